# Reference/hypothesis pairs for the CodeBLEU fixture.
PY = [
("def add(a, b):\n    return a + b\n", "def add(x, y):\n    return x + y\n"),
("def total(arr):\n    s = 0\n    for v in arr:\n        s = s + v\n    return s\n",
 "def total(arr):\n    s = 0\n    for v in arr:\n        s += v\n    return s\n"),
("def fact(n):\n    \"\"\"factorial\"\"\"\n    if n <= 1:\n        return 1\n    return n * fact(n - 1)\n",
 "def fact(n):\n    r = 1\n    for i in range(2, n + 1):\n        r = r * i\n    return r\n"),
("def sign(x):\n    if x > 0:\n        y = 1\n    elif x < 0:\n        y = -1\n    else:\n        y = 0\n    return y\n",
 "def sign(x):\n    # sign of x\n    if x > 0:\n        return 1\n    if x < 0:\n        return -1\n    return 0\n"),
("def swap(a, b):\n    a, b = b, a\n    return a, b\n", "def swap(a, b):\n    t = a\n    a = b\n    b = t\n    return a, b\n"),
("def count(s, c):\n    return sum(1 for ch in s if ch == c)\n", "def count(s, c):\n    n = 0\n    for ch in s:\n        if ch == c:\n            n = n + 1\n    return n\n"),
("def mx(a, b=0):\n    m = a\n    if b > m:\n        m = b\n    return m\n", "def mx(a, b=0):\n    return max(a, b)\n"),
("N = 10\nK = 3\nprint(N // K)\n", "n = 10\nk = 3\nprint(n // k)\n"),
("def g(lst):\n    out = [x * 2 for x in lst]\n    return out\n", "def g(lst):\n    return list(map(lambda x: x * 2, lst))\n"),
("def area(w, h):\n    a = w * h\n    print(a)\n    return a\n", "def area(w, h):\n    return w * h\n"),
]
CPP = [
("int add(int a, int b) {\n  return a + b;\n}\n", "int add(int x, int y) {\n  return x + y;\n}\n"),
("int total(int arr[], int n) {\n  int s = 0;\n  for (int i = 0; i < n; i++) {\n    s = s + arr[i];\n  }\n  return s;\n}\n",
 "int total(int arr[], int n) {\n  int s = 0;\n  for (int i = 0; i < n; ++i)\n    s += arr[i];\n  return s;\n}\n"),
("int fact(int n) {\n  // factorial\n  int r = 1;\n  int i = 2;\n  while (i <= n) {\n    r = r * i;\n    i = i + 1;\n  }\n  return r;\n}\n",
 "int fact(int n) {\n  int r = 1;\n  for (int i = 2; i <= n; i++) r = r * i;\n  return r;\n}\n"),
("int sign(int x) {\n  int y;\n  if (x > 0) {\n    y = 1;\n  } else if (x < 0) {\n    y = -1;\n  } else {\n    y = 0;\n  }\n  return y;\n}\n",
 "int sign(int x) {\n  /* sign */\n  if (x > 0) return 1;\n  if (x < 0) return -1;\n  return 0;\n}\n"),
("void swap(int &a, int &b) {\n  int t = a;\n  a = b;\n  b = t;\n}\n", "void swap(int &a, int &b) {\n  std::swap(a, b);\n}\n"),
("int mx(int a, int b) {\n  int m = a;\n  if (b > m) m = b;\n  return m;\n}\n", "int mx(int a, int b) {\n  return a > b ? a : b;\n}\n"),
("#include <iostream>\nint main() {\n  int n = 10, k = 3;\n  std::cout << n / k;\n  return 0;\n}\n", "#include <iostream>\nint main() {\n  int a = 10, b = 3;\n  std::cout << a / b;\n  return 0;\n}\n"),
("int area(int w, int h) {\n  int a = w * h;\n  return a;\n}\n", "int area(int w, int h) {\n  return w * h;\n}\n"),
("bool even(int x) {\n  return x % 2 == 0;\n}\n", "bool even(int x) {\n  if (x % 2 == 0) return true;\n  return false;\n}\n"),
("int cnt(const char *s, char c) {\n  int n = 0;\n  while (*s) {\n    if (*s == c) n++;\n    s++;\n  }\n  return n;\n}\n",
 "int cnt(const char *s, char c) {\n  int n = 0;\n  for (; *s; s++) if (*s == c) n = n + 1;\n  return n;\n}\n"),
]
JAVA = [
("static int add(int a, int b) {\n  return a + b;\n}\n", "static int add(int x, int y) {\n  return x + y;\n}\n"),
("static int total(int[] arr) {\n  int s = 0;\n  for (int i = 0; i < arr.length; i++) {\n    s = s + arr[i];\n  }\n  return s;\n}\n",
 "static int total(int[] arr) {\n  int s = 0;\n  for (int v : arr) s += v;\n  return s;\n}\n"),
("static int fact(int n) {\n  // factorial\n  int r = 1;\n  int i = 2;\n  while (i <= n) {\n    r = r * i;\n    i = i + 1;\n  }\n  return r;\n}\n",
 "static int fact(int n) {\n  int r = 1;\n  for (int i = 2; i <= n; i++) r = r * i;\n  return r;\n}\n"),
("static int sign(int x) {\n  int y;\n  if (x > 0) {\n    y = 1;\n  } else if (x < 0) {\n    y = -1;\n  } else {\n    y = 0;\n  }\n  return y;\n}\n",
 "static int sign(int x) {\n  /* sign */\n  if (x > 0) return 1;\n  if (x < 0) return -1;\n  return 0;\n}\n"),
("static int mx(int a, int b) {\n  int m = a;\n  if (b > m) m = b;\n  return m;\n}\n", "static int mx(int a, int b) {\n  return Math.max(a, b);\n}\n"),
("static int area(int w, int h) {\n  int a = w * h;\n  return a;\n}\n", "static int area(int w, int h) {\n  return w * h;\n}\n"),
("static boolean even(int x) {\n  return x % 2 == 0;\n}\n", "static boolean even(int x) {\n  if (x % 2 == 0) return true;\n  return false;\n}\n"),
("static int cnt(String s, char c) {\n  int n = 0;\n  for (char ch : s.toCharArray()) {\n    if (ch == c) n++;\n  }\n  return n;\n}\n",
 "static int cnt(String s, char c) {\n  int n = 0;\n  for (int i = 0; i < s.length(); i++) if (s.charAt(i) == c) n = n + 1;\n  return n;\n}\n"),
("public static void main(String[] args) {\n  int n = 10, k = 3;\n  System.out.println(n / k);\n}\n", "public static void main(String[] args) {\n  int a = 10, b = 3;\n  System.out.println(a / b);\n}\n"),
("static String rev(String s) {\n  String r = \"\";\n  for (int i = s.length() - 1; i >= 0; i--) r = r + s.charAt(i);\n  return r;\n}\n",
 "static String rev(String s) {\n  return new StringBuilder(s).reverse().toString();\n}\n"),
]
