use std::fs;
use std::path::{Path, PathBuf};

use execrep::dataset::{
    build_dataset, emit_stages, ingest_pairs, render_eval_prompt, render_record, BuildOptions, DatasetError, DatasetManifest,
    ParallelPair, PromptTemplates, StageId, MANIFEST_FILE,
};
use execrep::encoding::normalize_whitespace;
use execrep::LanguageId;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn fixture(name: &str) -> String {
    fs::read_to_string(fixtures().join(name)).unwrap()
}

/// The function alone, as it appears in the code-stage record.
fn kmultiples_function() -> String {
    fixture("kmultiples.py").lines().take(8).collect::<Vec<_>>().join("\n")
}

fn kmultiples_pair(src: String) -> ParallelPair {
    ParallelPair::new(
        "kmultiples",
        LanguageId::Python,
        LanguageId::Cpp,
        src,
        fixture("kmultiples.cpp"),
        Some(fixture("kmultiples.txt")),
    )
    .unwrap()
}

const CODE_PROMPT: &str = "Translate the given code from python to cpp. The input Code is marked with <Code> and </Code>. Please note that the code entered is a complete program with main fuction.";
const FS_PROMPT: &str = "Translate the given code from python to cpp. The input contains the source code and a description of the code. The input Code is marked with <Code> and </Code>. Please note that the code entered is a complete program with main fuction. The description of the code is marked with <NL> and </NL>.";
const SS_PROMPT: &str = "Translate the given code from python to cpp. The input contains the source code and a Abstract Syntax Tree of the code. The input Code is marked with <Code> and </Code>. Please note that the code entered is a complete program with main fuction. The Abstract Syntax Tree of the code is marked with <AST> and </AST>.";
const VD_PROMPT: &str = "Translate the given code from python to cpp. The input contains the source code and a Dataflow Graph of the code. The input Code is marked with <Code> and </Code>. Please note that the code entered is a complete program with main fuction. The Dataflow Graph of the code is marked with <DFG> and </DFG>.";

#[test]
fn code_stage_record_matches_figure() {
    let pair = kmultiples_pair(kmultiples_function());
    let r = render_record(&pair, StageId::Code, &PromptTemplates::default()).unwrap();
    assert_eq!(r.instruction, CODE_PROMPT);
    assert_eq!(r.input, format!("<Code>\n{}\n</Code>", kmultiples_function()));
    assert_eq!(r.output, format!("```cpp\n{}\n```", fixture("kmultiples.cpp").trim_end()));
    assert_eq!(r.meta.stage, StageId::Code);
}

#[test]
fn fs_stage_appends_description_block() {
    let pair = kmultiples_pair(kmultiples_function());
    let r = render_record(&pair, StageId::Fs, &PromptTemplates::default()).unwrap();
    assert_eq!(r.instruction, FS_PROMPT);
    let nl = fixture("kmultiples.txt");
    assert_eq!(
        r.input,
        format!("<Code>\n{}\n</Code>\n\n<NL>\n{}\n</NL>", kmultiples_function(), nl.trim_end_matches('\n'))
    );
    assert!(nl.lines().nth(1).unwrap().ends_with("; "), "trailing space kept");
}

#[test]
fn vd_stage_carries_the_32_node_graph() {
    let pair = kmultiples_pair(fixture("kmultiples.py"));
    let r = render_record(&pair, StageId::Vd, &PromptTemplates::default()).unwrap();
    assert_eq!(r.instruction, VD_PROMPT);
    let start = r.input.find("<DFG>\n").unwrap() + "<DFG>\n".len();
    let end = r.input.find("\n</DFG>").unwrap();
    let block = &r.input[start..end];
    assert!(block.starts_with("G describes a graph among nodes 0, 1, 2,"));
    assert!(block.contains("and 31."));
    assert_eq!(normalize_whitespace(block), normalize_whitespace(&fixture("kmultiples_dfg.txt")));
    assert!(r.input.contains("</Code>\n\n<DFG>\n"));
}

#[test]
fn ss_stage_carries_the_ast() {
    let pair = kmultiples_pair(fixture("kmultiples.py"));
    let r = render_record(&pair, StageId::Ss, &PromptTemplates::default()).unwrap();
    assert_eq!(r.instruction, SS_PROMPT);
    assert!(r.input.contains("</Code>\n<AST>\nG describes a graph among nodes 0, 1,"));
    assert!(r.input.ends_with(".\n</AST>"));
}

#[test]
fn markers_are_balanced_in_every_stage() {
    let pair = kmultiples_pair(fixture("kmultiples.py"));
    for stage in StageId::ALL {
        let r = render_record(&pair, stage, &PromptTemplates::default()).unwrap();
        for (open, close, want) in [
            ("<Code>", "</Code>", 1),
            ("<NL>", "</NL>", (stage == StageId::Fs) as usize),
            ("<AST>", "</AST>", (stage == StageId::Ss) as usize),
            ("<DFG>", "</DFG>", (stage == StageId::Vd) as usize),
        ] {
            assert_eq!(r.input.matches(open).count(), want, "{stage} {open}");
            assert_eq!(r.input.matches(close).count(), want, "{stage} {close}");
            if want == 1 {
                assert!(r.input.find(open).unwrap() < r.input.find(close).unwrap());
            }
        }
        assert!(r.output.starts_with("```cpp\n") && r.output.ends_with("\n```"));
    }
}

#[test]
fn fs_without_description_is_an_error() {
    let mut pair = kmultiples_pair(kmultiples_function());
    pair.nl_description = None;
    assert!(matches!(
        render_record(&pair, StageId::Fs, &PromptTemplates::default()),
        Err(DatasetError::MissingNlDescription { .. })
    ));
}

#[test]
fn template_fidelity() {
    let t = PromptTemplates::default();
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("resources/templates");
    for (stage, file) in [(StageId::Code, "code.txt"), (StageId::Fs, "fs.txt"), (StageId::Ss, "ss.txt"), (StageId::Vd, "vd.txt")] {
        assert_eq!(t.for_stage(stage), fs::read_to_string(dir.join(file)).unwrap());
    }
    assert_eq!(t.instruction(StageId::Ss, LanguageId::Python, LanguageId::Cpp), SS_PROMPT);
    let prompt = render_eval_prompt(&t, LanguageId::Cpp, LanguageId::Python, "int x;");
    assert_eq!(
        prompt,
        "Translate the given code from cpp to python. The input Code is marked with <Code> and </Code>.\n\n<Code>\nint x;\n</Code>"
    );
}

#[test]
fn ingest_reads_manifest_rows() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("pairs.tsv");
    fs::write(&m, "kmultiples\tkmultiples.py\tkmultiples.cpp\tkmultiples.txt\nbroken\tkmultiples.py\tmissing.cpp\n").unwrap();
    let report = ingest_pairs(&fixtures(), &m).unwrap();
    assert_eq!(report.pairs.len(), 1);
    let p = &report.pairs[0];
    assert_eq!((p.src_lang, p.tgt_lang), (LanguageId::Python, LanguageId::Cpp));
    assert!(p.nl_description.as_deref().unwrap().starts_with("Generate first K multiples of N"));
    assert_eq!(report.skipped.len(), 1);
    assert_eq!(report.skipped[0].pair_id, "broken");

    fs::write(&m, "").unwrap();
    assert!(ingest_pairs(&fixtures(), &m).unwrap().pairs.is_empty());
    assert!(matches!(
        ingest_pairs(&fixtures(), &dir.path().join("nope.tsv")),
        Err(DatasetError::ManifestMissing(_))
    ));
    fs::write(&m, "only-one-field\n").unwrap();
    assert!(matches!(
        ingest_pairs(&fixtures(), &m),
        Err(DatasetError::MalformedManifestLine { line: 1, .. })
    ));
}

fn line_count(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count()
}

#[test]
fn emit_writes_one_file_per_stage() {
    let pair = kmultiples_pair(fixture("kmultiples.py"));
    let t = PromptTemplates::default();
    let records: Vec<_> = StageId::ALL.iter().map(|&s| render_record(&pair, s, &t).unwrap()).collect();
    let dir = tempfile::tempdir().unwrap();
    let manifest = emit_stages(&records, dir.path()).unwrap();
    for (stage, name) in StageId::ALL.iter().zip(["stage1_code", "stage2_fs", "stage3_ss", "stage4_vd"]) {
        assert_eq!(stage.file_stem(), name);
        assert_eq!(line_count(&dir.path().join(stage.file_name())), 1);
    }
    assert_eq!(manifest.order, StageId::ALL.to_vec());
    assert_eq!(manifest.total_records, 4);
    let on_disk: DatasetManifest = serde_json::from_str(&fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap()).unwrap();
    assert_eq!(on_disk, manifest);

    let only_code = emit_stages(&records[..1], &dir.path().join("single")).unwrap();
    assert_eq!(only_code.stages.iter().map(|s| s.records).collect::<Vec<_>>(), [1, 0, 0, 0]);
    for stage in &StageId::ALL[1..] {
        let p = dir.path().join("single").join(stage.file_name());
        assert!(p.exists());
        assert_eq!(fs::read_to_string(p).unwrap(), "");
    }
}

#[test]
fn stage_order_is_fixed() {
    let mut shuffled = vec![StageId::Vd, StageId::Code, StageId::Ss, StageId::Fs];
    shuffled.sort();
    assert_eq!(shuffled, StageId::ALL.to_vec());
    assert_eq!("ss".parse::<StageId>().unwrap(), StageId::Ss);
}

#[test]
fn build_drops_duplicate_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    for f in ["kmultiples.py", "kmultiples.cpp", "kmultiples.txt"] {
        fs::copy(fixtures().join(f), root.join(f)).unwrap();
    }
    fs::write(
        root.join("pairs.tsv"),
        "a\tkmultiples.py\tkmultiples.cpp\tkmultiples.txt\nb\tkmultiples.py\tkmultiples.cpp\tkmultiples.txt\n",
    )
    .unwrap();
    let out = root.join("out");
    let summary = build_dataset(root, &root.join("pairs.tsv"), &out, &BuildOptions::default()).unwrap();
    assert_eq!(summary.ingested, 2);
    assert_eq!(summary.retained_pairs, 1);
    let drops = summary.dedup.unwrap();
    assert_eq!(drops.entries.len(), 1);
    assert_eq!((drops.entries[0].dropped.as_str(), drops.entries[0].survivor.as_str()), ("b", "a"));
    assert_eq!(summary.manifest.total_records, 4);

    let no_dedup = BuildOptions { dedup: None, ..BuildOptions::default() };
    let summary = build_dataset(root, &root.join("pairs.tsv"), &root.join("out2"), &no_dedup).unwrap();
    assert_eq!(summary.manifest.total_records, 8);
}
