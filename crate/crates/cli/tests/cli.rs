use std::path::Path;
use std::process::{Command, Output};

use flowcode_core::corpus::{read_jsonl, DatasetRecord, Split};
use flowcode_core::maskgen::PretrainRecord;

const FUN1: &str = "def fun1(x):\n    y = ((16 + x) - 20)\n    return y\n";

fn flowcode(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flowcode"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = flowcode(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn code_graph_and_encodings() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("fun1.py");
    std::fs::write(&src, FUN1).unwrap();
    let graph = ok(&["code2flow", p(&src)]);
    let gpath = dir.path().join("fun1.json");
    std::fs::write(&gpath, &graph).unwrap();
    assert_eq!(
        ok(&["encode", p(&gpath), "--variant", "modified"]).trim_end(),
        "start fun1, OVAL [SEP] input: x, PARALLELOGRAM [SEP] y = ((16 + x) - 20), RECTANGLE [SEP] output: y, PARALLELOGRAM [SEP] end function return, OVAL"
    );
    assert!(ok(&["encode", p(&gpath), "--variant", "tuple"]).starts_with("[('start fun1', 'OVAL')"));
    assert_eq!(ok(&["flow2code", p(&gpath)]), FUN1);
}

#[test]
fn dataset_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let src = d.join("src");
    ok(&["synth", "-n", "40", "--seed", "3", "--out-dir", p(&src)]);
    std::fs::write(src.join("zz_class.py"), "class A:\n    pass\n").unwrap();

    let corpus = d.join("corpus.jsonl");
    let out = flowcode(&["build", p(&src), "-o", p(&corpus)]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("zz_class.py"));
    assert_eq!(read_jsonl::<DatasetRecord>(&corpus).unwrap().len(), 40);

    let split = d.join("split.jsonl");
    ok(&[
        "split",
        p(&corpus),
        "-o",
        p(&split),
        "--ratio",
        "85:10:5",
        "--seed",
        "1",
    ]);
    let recs: Vec<DatasetRecord> = read_jsonl(&split).unwrap();
    let count = |s| recs.iter().filter(|r| r.split == s).count();
    assert_eq!((count(Split::Train), count(Split::Test), count(Split::Val)), (34, 4, 2));

    let aug = d.join("aug.jsonl");
    ok(&["augment", p(&split), "-o", p(&aug), "--seed", "2"]);
    let all: Vec<DatasetRecord> = read_jsonl(&aug).unwrap();
    assert_eq!(all.len(), 40 + 3 * 34);
    assert!(all.iter().all(|r| r.regenerates()));

    let pre = d.join("pretrain.jsonl");
    ok(&["maskgen", p(&aug), "-o", p(&pre), "--p", "0.15", "--seed", "4"]);
    let samples: Vec<PretrainRecord> = read_jsonl(&pre).unwrap();
    assert_eq!(samples.len(), 4 * 34 + 34);

    let preds = d.join("pred.jsonl");
    let lines: Vec<String> = all
        .iter()
        .filter(|r| r.split == Split::Test)
        .map(|r| serde_json::json!({"id": r.id, "code": r.code}).to_string())
        .collect();
    std::fs::write(&preds, lines.join("\n") + "\n").unwrap();
    let report: serde_json::Value =
        serde_json::from_str(&ok(&["eval", "--pred", p(&preds), "--ref", p(&aug), "--split", "test"])).unwrap();
    assert_eq!(report["bleu"], 100.0);
    assert_eq!(report["em"], 100.0);
    assert_eq!(report["codebleu"]["score"], 100.0);

    let wrong = flowcode(&["eval", "--pred", p(&preds), "--ref", p(&aug), "--split", "val"]);
    assert_eq!(wrong.status.code(), Some(1));
}

#[test]
fn render_then_detect() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let src = d.join("fun1.py");
    std::fs::write(&src, FUN1).unwrap();
    let corpus = d.join("c.jsonl");
    ok(&["build", p(&src), "-o", p(&corpus)]);
    let rec = &read_jsonl::<DatasetRecord>(&corpus).unwrap()[0];
    let imgs = d.join("img");
    ok(&[
        "render",
        p(&corpus),
        "--out-dir",
        p(&imgs),
        "--format",
        "png",
        "--scale",
        "2",
    ]);
    ok(&["render", p(&corpus), "--out-dir", p(&imgs), "--format", "svg"]);
    assert!(imgs.join(format!("{}.svg", rec.id)).exists());
    let png = imgs.join(format!("{}.png", rec.id));
    assert!(imgs.join(format!("{}.png.gt.json", rec.id)).exists());
    assert_eq!(
        ok(&["detect", p(&png), "--variant", "modified"]).trim_end(),
        rec.enc_modified
    );

    let missing = flowcode(&["detect", p(&d.join("nope.png"))]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn exit_codes() {
    assert_eq!(flowcode(&[]).status.code(), Some(2));
    assert_eq!(flowcode(&["encode"]).status.code(), Some(2));
    assert_eq!(
        flowcode(&["split", "x", "-o", "y", "--ratio", "50:50:50"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(flowcode(&["code2flow", "/nonexistent.py"]).status.code(), Some(1));
    assert_eq!(flowcode(&["--help"]).status.code(), Some(0));
}

#[cfg(unix)]
#[test]
fn detect_through_an_adapter_command() {
    use std::os::unix::fs::PermissionsExt;
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let src = d.join("fun1.py");
    std::fs::write(&src, FUN1).unwrap();
    let graph = d.join("fun1.json");
    std::fs::write(&graph, ok(&["code2flow", p(&src)])).unwrap();
    ok(&["render", p(&graph), "--out-dir", p(d), "--scale", "3"]);
    let ocr = d.join("ocr.sh");
    std::fs::write(&ocr, "#!/bin/sh\ncat \"$1.gt.json\"\n").unwrap();
    std::fs::set_permissions(&ocr, std::fs::Permissions::from_mode(0o755)).unwrap();
    let png = d.join("fun1.png");
    let out = ok(&["detect", p(&png), "--adapter", p(&ocr), "--variant", "string"]);
    assert!(out.starts_with("{start fun1,OVAL},{input: x,PARALLELOGRAM}"), "{out}");

    let failing = d.join("fail.sh");
    std::fs::write(&failing, "#!/bin/sh\nexit 3\n").unwrap();
    std::fs::set_permissions(&failing, std::fs::Permissions::from_mode(0o755)).unwrap();
    assert_eq!(
        flowcode(&["detect", p(&png), "--adapter", p(&failing)]).status.code(),
        Some(1)
    );
}
