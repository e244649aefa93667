use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iwasawa")).args(args).env_remove("IWASAWA_CHAR_CAP").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn eval_prints_value_and_valuation() {
    let o = run(&["--p", "2", "--d", "1", "-N", "3", "eval", "--char", "1@2", "--elem", "omega(s1,1)"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("valuation: 1"));
    let o = run(&["--p", "2", "--d", "1", "-N", "3", "eval", "--char", "1@2", "--elem", "omega(s1,2)"]);
    assert!(stdout(&o).contains("value: [0, 0]"), "{}", stdout(&o));
}

#[test]
fn member_reports_both_oracles() {
    let o = run(&["--p", "2", "--d", "2", "-N", "3", "member", "--elem", "omega(s1,1)", "--ideal", "TIGHT(1; tau=[1,0],[0,1])", "--method", "linear"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("linear: true"));
    let o = run(&["--p", "3", "--d", "2", "-N", "4", "member", "--ideal", "RN(r=[0,-1],n=[1,1])", "--samples", "30", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("60/60"));
}

#[test]
fn finite_precision_disagreement_exits_with_witness() {
    // the norm element of (Z/9)^2 dies under every character mod 3^4 but is nonzero
    let o = run(&["--p", "3", "--d", "2", "-N", "4", "member", "--elem", "nufull(0,2)", "--ideal", "RN(r=[-1,-1],n=[2,2])"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("witness: nufull(0,2)"));
}

#[test]
fn tower_writes_deterministic_files() {
    let dir = tempfile::tempdir().unwrap();
    let json = |tag: &str| {
        let prefix = dir.path().join(tag);
        let o = run(&[
            "--p", "2", "--d", "2", "-N", "3", "tower", "--module", "quot(2, omega(s1,0))", "--nmax", "2", "--mmax", "3",
            "--out", prefix.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains("compatible_chains=8"));
        let csv = std::fs::read_to_string(prefix.with_extension("csv")).unwrap();
        assert!(csv.starts_with("n,m,kernel_order_exp,kernel_p_rank\n"));
        assert_eq!(csv.lines().count(), 1 + 9);
        std::fs::read(prefix.with_extension("json")).unwrap()
    };
    let a = json("a");
    let b = json("b");
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["summary"]["compatible_chains"], 8);
    assert_eq!(v["meta"]["input_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn capitulation_trivial_action() {
    let o = run(&["--p", "2", "--d", "1", "-N", "4", "capitulation", "--module", "quot(omega(s1,0))", "--inertia", "1=1", "--nmax", "3", "--mmax", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("A_3: Z/p^3"), "{out}");
    assert!(out.contains("max_kernel_order=p^0"));
}

#[test]
fn cover_mismatch_exits_4() {
    let ok = run(&["--p", "2", "--d", "2", "-N", "4", "cover", "--f", "nu(s1,0,1)", "--flats", "s1=1@1"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    let bad = run(&["--p", "2", "--d", "2", "-N", "4", "cover", "--f", "nu(s1,0,1)", "--flats", "s1=0@0"]);
    assert_eq!(bad.status.code(), Some(4));
}

#[test]
fn error_exit_codes() {
    let parse = run(&["--p", "2", "eval", "--char", "0@1", "--elem", "omega(s1"]);
    assert_eq!(parse.status.code(), Some(2));
    let prime = run(&["--p", "7", "eval", "--char", "0@0", "--elem", "1"]);
    assert_eq!(prime.status.code(), Some(2));
    let capped = Command::new(env!("CARGO_BIN_EXE_iwasawa"))
        .args(["--p", "2", "--d", "2", "eval", "--char", "1,0@2", "--elem", "s1"])
        .env("IWASAWA_CHAR_CAP", "4")
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(3));
}

#[test]
fn config_file_sets_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("session.toml");
    std::fs::write(&path, "p = 3\nd = 1\nN = 2\n").unwrap();
    let o = run(&["--config", path.to_str().unwrap(), "eval", "--char", "1@1", "--elem", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("valuation: 1"));
    std::fs::write(&path, "p = 3\nbogus = 1\n").unwrap();
    let o = run(&["--config", path.to_str().unwrap(), "eval", "--char", "0@0", "--elem", "1"]);
    assert_eq!(o.status.code(), Some(2));
}
