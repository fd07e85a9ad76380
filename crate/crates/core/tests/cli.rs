//! End-to-end runs of the mgbench binary.

mod common;

use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

const BIN: &str = env!("CARGO_BIN_EXE_mgbench");

fn mgbench(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = mgbench(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    mgbench(args).status.code().unwrap()
}

struct Workspace {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

impl Workspace {
    /// Small corpus, prepped split, index and fragment table.
    fn new(n: usize) -> Workspace {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        let text: String = common::corpus().into_iter().take(n).map(|(s, _)| s + "\n").collect();
        std::fs::write(root.join("raw.smi"), text).unwrap();
        let ws = Workspace { _dir: dir, root };
        ok(&["prep", "--input", &ws.p("raw.smi"), "--out-dir", &ws.p("prep"), "--seed", "4"]);
        ok(&["index", "--input", &ws.p("raw.smi"), "--out", &ws.p("idx.lix"), "--latent-dim", "24"]);
        ok(&["fragscores", "--input", &ws.p("prep/train.smi"), "--out", &ws.p("frag.sas")]);
        ws
    }

    fn p(&self, rel: &str) -> String {
        self.root.join(rel).display().to_string()
    }
}

fn run_args<'a>(ws: &'a Workspace, out: &'a str, extra: &[&'a str]) -> Vec<String> {
    let mut v: Vec<String> = [
        "run", "--pair", "NSAID", "--sigma", "0.3", "--grid", "6", "--perturb", "10", "--seed", "5", "--index",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    v.push(ws.p("idx.lix"));
    v.extend(["--train".to_string(), ws.p("prep/train.smi"), "--fragscores".into(), ws.p("frag.sas")]);
    v.extend(["--out-dir".to_string(), ws.p(out)]);
    v.extend(extra.iter().map(|s| s.to_string()));
    v
}

fn as_refs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

#[test]
fn prep_writes_split_and_stats() {
    let ws = Workspace::new(200);
    let stats: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(ws.p("prep/prep_stats.json")).unwrap()).unwrap();
    assert_eq!(stats["read"], 200);
    let train = std::fs::read_to_string(ws.p("prep/train.smi")).unwrap().lines().count();
    let test = std::fs::read_to_string(ws.p("prep/test.smi")).unwrap().lines().count();
    assert_eq!(train + test, stats["kept"].as_u64().unwrap() as usize);
    assert_eq!(test, stats["test"].as_u64().unwrap() as usize);
}

#[test]
fn run_then_report_reproduces_the_report() {
    let ws = Workspace::new(300);
    ok(&as_refs(&run_args(&ws, "run", &["--no-timing", "--label", "a"])));
    for f in ["generations.tsv", "report.json", "run_meta.json", "qed_sas.csv", "rds_histogram.csv"] {
        assert!(Path::new(&ws.p(&format!("run/{f}"))).exists(), "{f}");
    }
    let gens = std::fs::read_to_string(ws.p("run/generations.tsv")).unwrap();
    assert_eq!(gens.lines().filter(|l| !l.starts_with('#')).count(), 60);
    ok(&[
        "report", "--generations", &ws.p("run/generations.tsv"), "--pair", "NSAID", "--train", &ws.p("prep/train.smi"),
        "--fragscores", &ws.p("frag.sas"), "--out-dir", &ws.p("rep"), "--no-timing",
    ]);
    assert_eq!(std::fs::read(ws.p("run/report.json")).unwrap(), std::fs::read(ws.p("rep/report.json")).unwrap());
    assert_eq!(std::fs::read(ws.p("run/qed_sas.csv")).unwrap(), std::fs::read(ws.p("rep/qed_sas.csv")).unwrap());

    ok(&as_refs(&run_args(&ws, "run_b", &["--sigma", "0.1", "--label", "b", "--baseline", &ws.p("run/report.json")])));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(ws.p("run_b/report.json")).unwrap()).unwrap();
    assert_eq!(report["delta_sas"]["baseline"], "a");
    let cmp: serde_json::Value =
        serde_json::from_str(&ok(&["compare", "--candidate", &ws.p("run_b/report.json"), "--baseline", &ws.p("run/report.json")])).unwrap();
    assert_eq!(cmp["candidate"], "b");
    // Mismatched pair for the baseline is a data error.
    let egfr = run_args(&ws, "run_c", &["--pair", "EGFR", "--baseline", &ws.p("run/report.json")]);
    assert_eq!(code(&as_refs(&egfr)), 2);
}

#[test]
fn config_file_fills_missing_flags_and_flags_win() {
    let ws = Workspace::new(200);
    let cfg = format!(
        "# run defaults\nsigma = 0.2\ngrid = 9\nperturb = 3\nno_timing = true\nindex = {}\ntrain = {}\npair = EGFR\n",
        ws.p("idx.lix"),
        ws.p("prep/train.smi")
    );
    std::fs::write(ws.p("run.cfg"), cfg).unwrap();
    ok(&["run", "--config", &ws.p("run.cfg"), "--grid", "4", "--out-dir", &ws.p("c")]);
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(ws.p("c/run_meta.json")).unwrap()).unwrap();
    assert_eq!(meta["n_grid"], 4);
    assert_eq!(meta["n_perturb"], 3);
    assert_eq!(meta["sigma"], 0.2);
    assert_eq!(meta["pair"], "EGFR");
    std::fs::write(ws.p("bad.cfg"), "no_such_key = 1\n").unwrap();
    assert_eq!(code(&["run", "--config", &ws.p("bad.cfg"), "--out-dir", &ws.p("d")]), 1);
}

#[test]
fn exit_codes() {
    let ws = Workspace::new(100);
    assert_eq!(code(&["no-such-command"]), 1);
    assert_eq!(code(&["run", "--sigma", "0.1"]), 1);
    assert_eq!(code(&as_refs(&run_args(&ws, "x", &["--pair", "Nope"]))), 1);
    assert_eq!(code(&as_refs(&run_args(&ws, "x", &["--sigma", "-1"]))), 1);
    assert_eq!(code(&["fp", "--input", "/no/such/file", "--out", &ws.p("x.mfp")]), 2);
    assert_eq!(code(&["check-decoder", "--decoder", "proto:exec:true"]), 3);
    let garbage = "proto:exec:echo '{\"latent_dim\":3,\"name\":\"g\"}'; read line; echo garbage";
    assert_eq!(code(&["check-decoder", "--decoder", garbage, "--requests", "2"]), 3);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn auxiliary_commands() {
    let ws = Workspace::new(150);
    assert!(ok(&["fp", "--input", &ws.p("raw.smi"), "--out", &ws.p("c.mfp")]).starts_with("150 fingerprints"));
    let store = mgbench::fingerprint::FingerprintStore::read_from(std::fs::File::open(ws.p("c.mfp")).unwrap()).unwrap();
    drop(store);
    ok(&["vocab", "--input", &ws.p("raw.smi"), "--out", &ws.p("vocab.txt")]);
    let vocab = mgbench::tokenizer::Vocab::load(Path::new(&ws.p("vocab.txt"))).unwrap();
    assert_eq!(vocab.id(mgbench::tokenizer::PAD), Some(0));
    assert!(vocab.id("c").is_some());

    std::fs::write(ws.p("recon.tsv"), "CCO\tOCC\nc1ccccc1\t\n").unwrap();
    let m: serde_json::Value = serde_json::from_str(&ok(&["eval", "--reconstructions", &ws.p("recon.tsv")])).unwrap();
    assert_eq!(m["molecule_accuracy"], 0.5);
    let m: serde_json::Value =
        serde_json::from_str(&ok(&["eval", "--corpus", &ws.p("prep/test.smi"), "--index", &ws.p("idx.lix")])).unwrap();
    assert!(m["tanimoto_accuracy"].as_f64().unwrap() > 0.0);

    let out = ok(&[
        "scan", "--pair", "NSAID", "--index", &ws.p("idx.lix"), "--train", &ws.p("prep/train.smi"), "--grid", "4",
        "--perturb", "5", "--sigmas", "0,0.3", "--out", &ws.p("scan.json"),
    ]);
    assert!(out.contains("sigma* = "));
    let scan: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(ws.p("scan.json")).unwrap()).unwrap();
    assert_eq!(scan["per_sigma"][1]["total"], 20);
}

#[test]
fn stdio_server_passes_conformance() {
    let ws = Workspace::new(120);
    let decoder = format!("proto:exec:{BIN} serve --index {}", ws.p("idx.lix"));
    let report: serde_json::Value =
        serde_json::from_str(&ok(&["check-decoder", "--decoder", &decoder, "--requests", "10000"])).unwrap();
    assert_eq!(report["requests"], 10000);
    assert_eq!(report["responses"], 10000);
    assert_eq!(report["latent_dim"], 24);

    // A protocol decoder serving the reference index reproduces the in-process run.
    let local = run_args(&ws, "local", &["--no-timing"]);
    let remote = run_args(&ws, "remote", &["--no-timing", "--decoder", &decoder]);
    ok(&as_refs(&local));
    ok(&as_refs(&remote));
    assert_eq!(
        std::fs::read(ws.p("local/generations.tsv")).unwrap(),
        std::fs::read(ws.p("remote/generations.tsv")).unwrap()
    );
}

#[test]
fn tcp_server_passes_conformance() {
    let ws = Workspace::new(120);
    let mut server = Command::new(BIN)
        .args(["serve", "--index", &ws.p("idx.lix"), "--listen", "tcp:127.0.0.1:0"])
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(server.stderr.take().unwrap()).read_line(&mut line).unwrap();
    let addr = line.trim().strip_prefix("listening on ").unwrap().to_string();
    let out = mgbench(&["check-decoder", "--decoder", &format!("proto:{addr}"), "--requests", "500"]);
    server.kill().unwrap();
    server.wait().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["responses"], 500);
}
