use std::fs;
use std::process::Command;

fn rlvqc(out: &std::path::Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_rlvqc"))
        .env("RLVQC_OUT", out)
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn generate_run_report() {
    let out = tempfile::tempdir().unwrap();
    let o = rlvqc(out.path(), &["gen-instances"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("24 graphs and 72 QUBO"));

    let cfg = out.path().join("exp.toml");
    fs::write(&cfg, "method = \"qaoa\"\n[qaoa]\nsearch_configs = 2\nmax_evals = 40\n").unwrap();
    let o = rlvqc(
        out.path(),
        &[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--problem",
            "maxcut",
            "--topology",
            "cycle,star",
            "--n",
            "8",
            "--seeds",
            "4",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.path().join("records/qaoa/maxcut_cycle_n8/seed-4.json").exists());

    let o = rlvqc(out.path(), &["report"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(out.path().join("reports/approximation_ratio.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);

    let o = rlvqc(out.path(), &["report", "--method", "rlvqc_block"]);
    assert!(!o.status.success());
}

#[test]
fn run_without_instances_fails_with_hint() {
    let out = tempfile::tempdir().unwrap();
    let o = rlvqc(out.path(), &["run", "--method", "qaoa", "--seeds", "0"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("gen-instances"));
}

#[test]
fn block_variant_is_not_searchable() {
    let out = tempfile::tempdir().unwrap();
    let o = rlvqc(out.path(), &["hpo", "--method", "rlvqc_block", "--budget", "1"]);
    assert!(!o.status.success());
}
