//! Generated benchmark in the TransCoder-test layout: each template holds a
//! reference `f_gold`, a fill marker and a driver comparing `f_filled`
//! against `f_gold` on ten inputs.

#![allow(dead_code)]

use execrep::harness::BenchmarkSample;
use execrep::LanguageId;

/// (name, cpp body, python body, java body) over parameter `n` and a
/// per-sample constant `K`.
const FAMILIES: &[(&str, &str, &str, &str)] = &[
    (
        "digit_sum",
        "long long s = 0; n = n < 0 ? -n : n; while (n > 0) { s += n % (K + 1); n /= (K + 1); } return s;",
        "s = 0\n    n = abs(n)\n    while n > 0:\n        s += n % (K + 1)\n        n //= (K + 1)\n    return s",
        "long s = 0; n = n < 0 ? -n : n; while (n > 0) { s += n % (K + 1); n /= (K + 1); } return s;",
    ),
    (
        "fact_mod",
        "long long r = 1; for (long long i = 2; i <= n; i++) r = r * i % (1000 + K); return r;",
        "r = 1\n    for i in range(2, n + 1):\n        r = r * i % (1000 + K)\n    return r",
        "long r = 1; for (long i = 2; i <= n; i++) r = r * i % (1000 + K); return r;",
    ),
    (
        "gcd_k",
        "long long a = n, b = K * 6; while (b) { long long t = a % b; a = b; b = t; } return a;",
        "a, b = n, K * 6\n    while b:\n        a, b = b, a % b\n    return a",
        "long a = n, b = K * 6; while (b != 0) { long t = a % b; a = b; b = t; } return a;",
    ),
    (
        "bits",
        "long long c = 0; long long m = n + K; while (m > 0) { c += m & 1; m >>= 1; } return c;",
        "c = 0\n    m = n + K\n    while m > 0:\n        c += m & 1\n        m >>= 1\n    return c",
        "long c = 0; long m = n + K; while (m > 0) { c += m & 1; m >>= 1; } return c;",
    ),
    (
        "fib_mod",
        "long long a = 0, b = 1; for (long long i = 0; i < n; i++) { long long t = (a + b) % (97 + K); a = b; b = t; } return a;",
        "a, b = 0, 1\n    for _ in range(n):\n        a, b = b, (a + b) % (97 + K)\n    return a",
        "long a = 0, b = 1; for (long i = 0; i < n; i++) { long t = (a + b) % (97 + K); a = b; b = t; } return a;",
    ),
    (
        "reverse",
        "long long r = 0; while (n > 0) { r = r * 10 + n % 10; n /= 10; } return r + K;",
        "r = 0\n    while n > 0:\n        r = r * 10 + n % 10\n        n //= 10\n    return r + K",
        "long r = 0; while (n > 0) { r = r * 10 + n % 10; n /= 10; } return r + K;",
    ),
    (
        "is_prime",
        "long long m = n + K; if (m < 2) return 0; for (long long d = 2; d * d <= m; d++) if (m % d == 0) return 0; return 1;",
        "m = n + K\n    if m < 2:\n        return 0\n    d = 2\n    while d * d <= m:\n        if m % d == 0:\n            return 0\n        d += 1\n    return 1",
        "long m = n + K; if (m < 2) return 0; for (long d = 2; d * d <= m; d++) if (m % d == 0) return 0; return 1;",
    ),
    (
        "power_sum",
        "long long s = 0; for (long long i = 1; i <= n; i++) { long long p = 1; for (int j = 0; j < K % 3 + 1; j++) p *= i; s += p; } return s;",
        "s = 0\n    for i in range(1, n + 1):\n        s += i ** (K % 3 + 1)\n    return s",
        "long s = 0; for (long i = 1; i <= n; i++) { long p = 1; for (int j = 0; j < K % 3 + 1; j++) p *= i; s += p; } return s;",
    ),
    (
        "collatz",
        "long long m = n + K, c = 0; while (m > 1) { m = m % 2 ? 3 * m + 1 : m / 2; c++; } return c;",
        "m = n + K\n    c = 0\n    while m > 1:\n        m = 3 * m + 1 if m % 2 else m // 2\n        c += 1\n    return c",
        "long m = n + K, c = 0; while (m > 1) { m = m % 2 != 0 ? 3 * m + 1 : m / 2; c++; } return c;",
    ),
    (
        "triangle",
        "return n * (n + K) / 2;",
        "return n * (n + K) // 2",
        "return n * (n + K) / 2;",
    ),
];

pub fn inputs(seed: usize) -> Vec<i64> {
    (0..10).map(|i| ((i * 7 + seed * 3) % 40) as i64).collect()
}

fn body(lang: LanguageId, family: usize, k: usize) -> String {
    let (_, c, p, j) = FAMILIES[family];
    let b = match lang {
        LanguageId::Cpp => c,
        LanguageId::Python => p,
        LanguageId::Java => j,
    };
    b.replace('K', &k.to_string())
}

pub fn gold(lang: LanguageId, family: usize, k: usize) -> String {
    let b = body(lang, family, k);
    match lang {
        LanguageId::Cpp => format!("long long f_gold ( long long n ) {{\n  {b}\n}}\n"),
        LanguageId::Python => format!("def f_gold(n):\n    {b}\n"),
        LanguageId::Java => format!("static long f_gold(long n) {{\n  {b}\n}}\n"),
    }
}

pub fn template(lang: LanguageId, family: usize, k: usize, seed: usize) -> String {
    let g = gold(lang, family, k);
    let xs = inputs(seed)
        .iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",");
    match lang {
        LanguageId::Cpp => format!(
            "#include <iostream>\n#include <vector>\nusing namespace std;\n{g}\n//TOFILL\n\nint main() {{\n    int n_success = 0;\n    vector<long long> param0 {{{xs}}};\n    for (int i = 0; i < (int)param0.size(); ++i) {{\n        if (f_filled(param0[i]) == f_gold(param0[i])) {{\n            n_success += 1;\n        }}\n    }}\n    cout << \"#Results:\" << \" \" << n_success << \", \" << param0.size();\n    return 0;\n}}\n"
        ),
        LanguageId::Python => format!(
            "{g}\n#TOFILL\n\nif __name__ == '__main__':\n    param = [{xs}]\n    n_success = 0\n    for x in param:\n        if f_filled(x) == f_gold(x):\n            n_success += 1\n    print(\"#Results: %i, %i\" % (n_success, len(param)))\n"
        ),
        LanguageId::Java => format!(
            "public class CHECK_{family}_{k} {{\n{g}\n//TOFILL\n\n    public static void main(String args[]) {{\n        int n_success = 0;\n        long[] param0 = {{{xs}}};\n        for (int i = 0; i < param0.length; ++i) {{\n            if (f_filled(param0[i]) == f_gold(param0[i])) {{\n                n_success += 1;\n            }}\n        }}\n        System.out.println(\"#Results:\" + \" \" + n_success + \", \" + param0.length);\n    }}\n}}\n"
        ),
    }
}

/// `count` samples (ids `sample_000`…), cycling through the function
/// families with varying constants.
pub fn samples(lang: LanguageId, count: usize) -> Vec<BenchmarkSample> {
    (0..count)
        .map(|i| {
            let family = i % FAMILIES.len();
            let k = 1 + i / FAMILIES.len();
            BenchmarkSample::new(
                format!("sample_{i:03}"),
                lang,
                template(lang, family, k, i),
                Some(gold(lang, family, k)),
            )
            .unwrap()
        })
        .collect()
}

/// Write samples in the on-disk benchmark layout.
pub fn write_layout(root: &std::path::Path, samples: &[BenchmarkSample]) {
    for s in samples {
        let dir = root.join(s.lang.name());
        let gold_dir = root.join(format!("{}_gold", s.lang.name()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::create_dir_all(&gold_dir).unwrap();
        let file = format!("{}.{}", s.sample_id, s.lang.extension());
        std::fs::write(dir.join(&file), &s.template).unwrap();
        if let Some(g) = &s.gold_function {
            std::fs::write(gold_dir.join(&file), g).unwrap();
        }
    }
}

pub fn have_tool(name: &str) -> bool {
    std::process::Command::new("sh")
        .args(["-c", &format!("command -v {name}")])
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}
