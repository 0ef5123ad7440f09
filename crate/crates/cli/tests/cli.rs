use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use axum::extract::State;
use axum::routing::post;
use axum::{Json, Router};
use execrep::encoding::{normalize_whitespace, parse_graph_text, GraphKind, GraphText};
use serde_json::{json, Value};

fn core_fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

fn execrep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_execrep")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn extract_max_dfg_without_literals() {
    let o = execrep(&["extract", s(&core_fixture("max.cpp")), "--repr", "dfg", "--no-literals"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let want = std::fs::read_to_string(core_fixture("max_dfg.txt")).unwrap();
    assert_eq!(normalize_whitespace(&text), normalize_whitespace(&want));
    assert!(parse_graph_text(&GraphText { kind: GraphKind::Dfg, text }).is_ok());
}

#[test]
fn extract_ast_output_reparses() {
    let o = execrep(&["extract", s(&core_fixture("kmultiples.py")), "--repr", "ast"]);
    assert_eq!(o.status.code(), Some(0));
    let g = parse_graph_text(&GraphText { kind: GraphKind::Ast, text: stdout(&o) }).unwrap();
    assert_eq!(g.count, 116);
}

#[test]
fn extract_input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.py");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(execrep(&["extract", s(&empty), "--repr", "dfg"]).status.code(), Some(2));
    let unknown = dir.path().join("x.rs");
    std::fs::write(&unknown, "fn main() {}").unwrap();
    assert_eq!(execrep(&["extract", s(&unknown), "--repr", "ast"]).status.code(), Some(2));
    assert_eq!(execrep(&["extract", "/nonexistent/file.py", "--repr", "ast"]).status.code(), Some(2));
    assert_eq!(execrep(&["extract"]).status.code(), Some(2));
}

#[test]
fn config_rejects_unknown_keys_and_unset_variables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    let file = s(&core_fixture("max.cpp")).to_string();
    std::fs::write(&cfg, "[dedup]\nthreshhold = 0.9\n").unwrap();
    assert_eq!(execrep(&["--config", s(&cfg), "extract", &file, "--repr", "ast"]).status.code(), Some(2));
    std::fs::write(&cfg, "[gateway]\nmodel = \"${EXECREP_SURELY_UNSET_VAR}\"\n").unwrap();
    assert_eq!(execrep(&["--config", s(&cfg), "extract", &file, "--repr", "ast"]).status.code(), Some(2));
    std::fs::write(&cfg, "jobs = 2\n[harness.limits]\nrun_timeout_secs = 5.0\n").unwrap();
    assert_eq!(execrep(&["--config", s(&cfg), "extract", &file, "--repr", "ast"]).status.code(), Some(0));
}

fn dataset_root(rows: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for f in ["kmultiples.py", "kmultiples.cpp", "kmultiples.txt"] {
        std::fs::copy(core_fixture(f), dir.path().join(f)).unwrap();
    }
    std::fs::write(dir.path().join("pairs.tsv"), rows).unwrap();
    dir
}

#[test]
fn build_dataset_writes_four_stage_files() {
    let dir = dataset_root("k\tkmultiples.py\tkmultiples.cpp\tkmultiples.txt\n");
    let out = dir.path().join("out");
    let o = execrep(&["build-dataset", "--manifest", s(&dir.path().join("pairs.tsv")), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["stage1_code.jsonl", "stage2_fs.jsonl", "stage3_ss.jsonl", "stage4_vd.jsonl"] {
        assert_eq!(std::fs::read_to_string(out.join(f)).unwrap().lines().count(), 1, "{f}");
    }
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["order"], json!(["code", "fs", "ss", "vd"]));
    assert!(!out.join(".execrep.lock").exists());
}

#[test]
fn build_dataset_drops_duplicates_and_respects_lock() {
    let row = "kmultiples.py\tkmultiples.cpp\tkmultiples.txt\n";
    let dir = dataset_root(&format!("a\t{row}b\t{row}"));
    let out = dir.path().join("out");
    let manifest = dir.path().join("pairs.tsv");
    let o = execrep(&["build-dataset", "--manifest", s(&manifest), "--out", s(&out), "--stages", "code"]);
    assert_eq!(o.status.code(), Some(0));
    let summary: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(summary["retained_pairs"], 1);
    assert_eq!(summary["dropped"], 1);
    assert_eq!(std::fs::read_to_string(out.join("stage2_fs.jsonl")).unwrap(), "");

    std::fs::write(out.join(".execrep.lock"), "1").unwrap();
    assert_eq!(execrep(&["build-dataset", "--manifest", s(&manifest), "--out", s(&out)]).status.code(), Some(1));
    assert_eq!(
        execrep(&["build-dataset", "--manifest", s(&dir.path().join("missing.tsv")), "--out", s(&dir.path().join("o2"))])
            .status
            .code(),
        Some(2)
    );
}

/// Small on-disk benchmark whose reference functions are `f_gold`.
fn bench(root: &Path, with_cpp: bool) {
    let py_gold = ["def f_gold(n):\n    return n * 2\n", "def f_gold(n):\n    return n + 7\n"];
    let cpp_gold = ["int f_gold(int n) {\n  return n * 2;\n}\n", "int f_gold(int n) {\n  return n + 7;\n}\n"];
    for (lang, ext, golds) in [("python", "py", &py_gold), ("cpp", "cpp", &cpp_gold)] {
        if lang == "cpp" && !with_cpp {
            continue;
        }
        std::fs::create_dir_all(root.join(lang)).unwrap();
        std::fs::create_dir_all(root.join(format!("{lang}_gold"))).unwrap();
        for (i, g) in golds.iter().enumerate() {
            let template = if lang == "python" {
                format!("{g}\n#TOFILL\n\nok = sum(f_filled(x) == f_gold(x) for x in range(10))\nprint('#Results: %d, %d' % (ok, 10))\n")
            } else {
                format!("#include <cstdio>\n{g}\n//TOFILL\n\nint main() {{\n  int ok = 0;\n  for (int x = 0; x < 10; x++) ok += f_filled(x) == f_gold(x);\n  printf(\"#Results: %d, %d\\n\", ok, 10);\n}}\n")
            };
            std::fs::write(root.join(lang).join(format!("s{i}.{ext}")), template).unwrap();
            std::fs::write(root.join(format!("{lang}_gold")).join(format!("s{i}.{ext}")), g).unwrap();
        }
    }
}

fn have(tool: &str) -> bool {
    Command::new("sh").args(["-c", &format!("command -v {tool}")]).output().is_ok_and(|o| o.status.success())
}

fn gold_solutions(root: &Path, pairs: &[(&str, &str, &str)]) -> PathBuf {
    let mut lines = String::new();
    for (src, tgt, ext) in pairs {
        for i in 0..2 {
            let g = std::fs::read_to_string(root.join(format!("{tgt}_gold/s{i}.{ext}"))).unwrap();
            let rec = json!({"sample_id": format!("s{i}"), "src_lang": src, "tgt_lang": tgt, "function_text": g});
            lines += &format!("{rec}\n");
        }
    }
    let p = root.join("solutions.jsonl");
    std::fs::write(&p, lines).unwrap();
    p
}

#[test]
fn eval_gold_solutions_score_one() {
    let dir = tempfile::tempdir().unwrap();
    let cpp = have("g++");
    bench(dir.path(), cpp);
    let mut dirs = vec![("cpp", "python", "py")];
    if cpp {
        dirs.push(("python", "cpp", "cpp"));
    }
    let sols = gold_solutions(dir.path(), &dirs);
    let out = dir.path().join("report.json");
    let o = execrep(&["eval", "--bench", s(dir.path()), "--solutions", s(&sols), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    for row in report["exec"]["rows"].as_array().unwrap() {
        assert_eq!((row["ca"].as_f64(), row["cca"].as_f64(), row["tca"].as_f64()), (Some(1.0), Some(1.0), Some(1.0)), "{row}");
    }
    let labels: Vec<&str> = report["exec"]["rows"].as_array().unwrap().iter().map(|r| r["label"].as_str().unwrap()).collect();
    assert!(labels.contains(&"C++ -> Python") && labels.contains(&"Average"));
    for row in report["match"]["rows"].as_array().unwrap() {
        assert_eq!(row["report"]["em"], 1.0);
        assert!((row["report"]["bleu"].as_f64().unwrap() - 100.0).abs() < 1e-9);
    }
}

#[test]
fn eval_match_mode_and_empty_solutions() {
    let dir = tempfile::tempdir().unwrap();
    bench(dir.path(), false);
    let sols = gold_solutions(dir.path(), &[("cpp", "python", "py")]);
    let o = execrep(&["eval", "--bench", s(dir.path()), "--solutions", s(&sols), "--mode", "match"]);
    assert_eq!(o.status.code(), Some(0));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(report.get("exec").is_none());
    assert_eq!(report["match"]["rows"][0]["report"]["codebleu"]["combined"], 1.0);

    let empty = dir.path().join("empty.jsonl");
    std::fs::write(&empty, "").unwrap();
    let o = execrep(&["eval", "--bench", s(dir.path()), "--solutions", s(&empty)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no solutions"));
}

#[derive(Default)]
struct Stub {
    calls: AtomicUsize,
}

async fn reply(State(stub): State<Arc<Stub>>, Json(body): Json<Value>) -> Json<Value> {
    stub.calls.fetch_add(1, Ordering::SeqCst);
    let prompt = body["messages"][0]["content"].as_str().unwrap();
    let code = if prompt.contains("n * 2") { "def f(n):\n    return n * 2" } else { "def f(n):\n    return n + 7" };
    Json(json!({"choices": [{"message": {"role": "assistant", "content": format!("Sure.\n```python\n{code}\n```")}}]}))
}

fn spawn_stub() -> (String, Arc<Stub>, tokio::runtime::Runtime) {
    let rt = tokio::runtime::Runtime::new().unwrap();
    let stub = Arc::new(Stub::default());
    let app = Router::new().route("/v1/chat/completions", post(reply)).with_state(stub.clone());
    let listener = rt.block_on(tokio::net::TcpListener::bind("127.0.0.1:0")).unwrap();
    let addr = listener.local_addr().unwrap();
    rt.spawn(async move { axum::serve(listener, app).await.unwrap() });
    (format!("http://{addr}/v1/chat/completions"), stub, rt)
}

#[test]
fn translate_writes_resumes_and_preserves_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    bench(dir.path(), true);
    let (url, stub, _rt) = spawn_stub();
    let out = dir.path().join("sols.jsonl");
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[gateway]\nbackoff_ms = 1\nmax_retries = 1\ntimeout_secs = 5.0\n").unwrap();
    let base = ["--config", s(&cfg), "translate", "--bench", s(dir.path()), "--from", "cpp", "--to", "python", "--out", s(&out)];

    let o = execrep(&[&base[..], &["--endpoint", &url]].concat());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 2);
    let rec: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert!(rec["function_text"].as_str().unwrap().starts_with("def f(n):"));
    assert_eq!(stub.calls.load(Ordering::SeqCst), 2);

    let o = execrep(&[&base[..], &["--endpoint", &url, "--resume"]].concat());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stub.calls.load(Ordering::SeqCst), 2, "answered samples are skipped");
    let summary: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(summary["skipped"], 2);

    // A new direction against a dead endpoint fails but keeps earlier lines.
    let o = execrep(&[
        "--config", s(&cfg), "translate", "--bench", s(dir.path()), "--from", "python", "--to", "cpp", "--out", s(&out),
        "--resume", "--endpoint", "http://127.0.0.1:9/v1/chat/completions",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(std::fs::read_to_string(&out).unwrap(), text);

    // The translated functions pass the harness once renamed.
    let o = execrep(&["eval", "--bench", s(dir.path()), "--solutions", s(&out), "--mode", "exec"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["exec"]["rows"][0]["tca"], 1.0);
}
