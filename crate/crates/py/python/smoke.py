"""Smoke test for the execrep_py extension module.

Build with `maturin develop -m crates/py/Cargo.toml`, or copy
target/debug/libexecrep_py.so next to this file as execrep_py.so.
"""

import execrep_py as ex

CODE = """def add(a, b):
    s = a + b
    return s
"""

toks = ex.tokenize("python", CODE)
assert toks[:2] == ["def", "add"], toks

g = ex.dfg("python", CODE)
text = g.encode()
assert ex.parse_graph_text(text, "dfg") == g
print("dfg:", text)

a = ex.ast("python", CODE)
assert ex.parse_graph_text(a.encode(), "ast") == a
print(repr(a))

rec = ex.render_record("python", "cpp", CODE, "int add(int a, int b) { return a + b; }", "vd")
assert rec["stage"] == "vd" and "int add" in rec["output"]

kept, dropped = ex.dedup("python", [CODE, CODE, "def f():\n    return 1\n"])
assert kept == [0, 2] and dropped == [(1, 0)], (kept, dropped)

assert ex.exact_match("python", CODE, CODE.replace("    ", "  "))
assert ex.bleu("python", [CODE], [CODE]) > 99.0
cb = ex.codebleu("python", [CODE], [CODE])
assert abs(cb["codebleu"] - 1.0) < 1e-9, cb

assert ex.extract_code_block("x\n```python\nprint(1)\n```\n", "python").strip() == "print(1)"
assert ex.parse_results("#Results: 3, 4\n") == (3, 4)
print("ok")
