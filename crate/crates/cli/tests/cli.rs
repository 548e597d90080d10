use std::path::Path;
use std::process::{Command, Output};

fn dcamkl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dcamkl")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn generate(dir: &Path) -> String {
    let out = dcamkl(&["generate", "--out", dir.to_str().unwrap(), "--n", "40"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    dir.join("config.toml").to_string_lossy().into_owned()
}

fn ok(args: &[&str]) -> String {
    let o = dcamkl(args);
    assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

#[test]
fn full_run_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = generate(dir.path());
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let out = out.to_str().unwrap();
        ok(&["extract", "--config", &cfg, "--out", out]);
        ok(&["fuse", "--config", &cfg, "--out", out, "--seed", "3"]);
        let model = format!("{out}/trained.json");
        let train = ok(&["train", "--config", &cfg, "--out", out, "--seed", "3", "--model", &model]);
        assert!(train.contains("train ACC"));
        ok(&["predict", "--config", &cfg, "--out", out, "--seed", "3", "--model", &model]);
        let eval = ok(&["evaluate", "--config", &cfg, "--out", out, "--seed", "3"]);
        assert!(eval.contains("AUC"));
        let table = ok(&["compare", "--config", &cfg, "--out", out, "--seed", "3"]);
        assert_eq!(table.lines().count(), 4);
        let files = ["trained.json", "predictions.csv", "roc.csv", "evaluation.json", "train_report.json", "comparison.csv", "fusion_plan.json"];
        outputs.push(files.map(|f| std::fs::read(Path::new(out).join(f)).unwrap()));
    }
    assert!(outputs[0] == outputs[1]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = generate(dir.path());

    let missing = dcamkl(&["train", "--config", dir.path().join("nope.toml").to_str().unwrap()]);
    assert_eq!(code(&missing), 4);

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[split]\ntrain_fraction = 1.5\n").unwrap();
    assert_eq!(code(&dcamkl(&["train", "--config", bad.to_str().unwrap()])), 2);

    let unknown = dir.path().join("unknown.toml");
    std::fs::write(&unknown, "colour = 3\n").unwrap();
    assert_eq!(code(&dcamkl(&["extract", "--config", unknown.to_str().unwrap()])), 2);

    // no features extracted yet
    assert_eq!(code(&dcamkl(&["fuse", "--config", &cfg])), 4);
    ok(&["extract", "--config", &cfg]);
    // no model yet
    assert_eq!(code(&dcamkl(&["predict", "--config", &cfg])), 4);

    let capped = dir.path().join("capped.toml");
    let text = std::fs::read_to_string(&cfg).unwrap() + "\n[svm]\nmax_updates = 1\n";
    std::fs::write(&capped, text).unwrap();
    let o = dcamkl(&["train", "--config", capped.to_str().unwrap(), "--out", dir.path().join("out").to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));

    assert_eq!(code(&dcamkl(&["train"])), 2);
}
