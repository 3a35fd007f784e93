use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_segredefect"))
        .args(args)
        .env_remove("SEGREDEFECT_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn check_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&[
        "check", "--family", "B0", "--m", "2", "--n", "4", "--seed", "5", "--out", out,
    ]);
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).starts_with("NONDEFECTIVE (SUPER) dim=0 expected=0"));
    let cert = dir.path().join("B0_2_4.cert");
    let text = std::fs::read_to_string(&cert).unwrap();
    assert!(text.starts_with("prime=127 seed=5\nconfig k=1 m=2 n=4\n"));

    let o = run(&["verify", cert.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "VERIFIED");

    let tampered = text.replace(
        "dim=0 expected=0 verdict=NONDEFECTIVE",
        "dim=1 expected=0 verdict=PROBABLY_DEFECTIVE",
    );
    std::fs::write(&cert, tampered).unwrap();
    let o = run(&["verify", cert.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o).trim(), "MISMATCH");
}

#[test]
fn paper_style_output() {
    let o = run(&[
        "check",
        "--family",
        "B0",
        "--m",
        "2",
        "--n",
        "4",
        "--paper-style",
    ]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("The 39 x 44 matrix was built in"));
    assert!(s.contains("The configuration is NON-DEFECTIVE (SUPERABUNDANT)."));
}

#[test]
fn check_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("two.cfg");
    std::fs::write(
        &path,
        "config k=1 m=2 n=4\nI=0 u=1 v=3 p=4\nI=1 u=2 v=2 p=3\n",
    )
    .unwrap();
    let o = run(&["vdim", "--config", path.to_str().unwrap()]);
    assert_eq!(stdout(&o).trim(), "vdim=-1 abundancy=SUPER");
    let o = run(&["check", "--config", path.to_str().unwrap()]);
    assert!(o.status.success());
}

#[test]
fn vdim_and_catalog() {
    let o = run(&["vdim", "--family", "B1", "--m", "3", "--n", "14"]);
    assert_eq!(stdout(&o).trim(), "vdim=0 abundancy=EQUI");
    let o = run(&["catalog"]);
    assert_eq!(stdout(&o).lines().count(), 22);
    let o = run(&["catalog", "--show", "B2"]);
    assert!(stdout(&o).starts_with("family B2\nk 3\n"));
}

#[test]
fn ugly_suite_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let tsv = dir.path().join("ugly.tsv");
    let certs = dir.path().join("certs");
    let o = run(&[
        "basecases",
        "ugly",
        "--workers",
        "1",
        "--tsv",
        tsv.to_str().unwrap(),
        "--out",
        certs.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).ends_with("suite ugly: PASS (18 entries, 0 skipped)\n"));
    let table = std::fs::read_to_string(tsv).unwrap();
    assert_eq!(table.lines().count(), 19);
    assert_eq!(std::fs::read_dir(&certs).unwrap().count(), 19);
}

#[test]
fn inductant_grid() {
    let o = run(&["inductant", "--child", "C2hat"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().filter(|l| l.ends_with("ok")).count(), 2);
}

#[test]
fn bad_input_exits_with_2() {
    let o = run(&["check", "--family", "Z9", "--m", "2", "--n", "4"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["check", "--family", "B0", "--m", "2", "--n", "5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("outside the domain"));
}
