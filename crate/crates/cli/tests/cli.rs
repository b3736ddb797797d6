use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_doubling")).args(args).output().expect("spawn doubling")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn verify_passes() {
    let o = run(&["verify", "--samples", "500"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("\"passed\": true") || stdout(&o).contains("\"passed\":true"));
}

#[test]
fn reports_are_deterministic() {
    let args = ["--seed", "5", "--samples", "300", "cover-cube", "--dim", "3", "--punctures", "0,0,0", "--delta", "0.0625"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn failing_checks_exit_one() {
    // equal face-adjacent squares intersect in less than a third of the radius
    let o = run(&["cover-cube", "--dim", "2", "--punctures", "0,0", "--delta", "0.0625", "--samples", "200"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn table_format() {
    let o = run(&["--format", "table", "doubling-bound", "--p", "1", "--alpha", "0.5", "--beta", "0.25"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(!s.trim_start().starts_with('{'));
    assert!(s.contains("c_p_alpha_beta") && s.contains("36.0"), "{s}");
}

#[test]
fn out_file() {
    let path = std::env::temp_dir().join(format!("doubling_cli_{}.json", std::process::id()));
    let p = path.to_str().unwrap();
    let o = run(&["--out", p, "experiment", "quadric", "--n", "3", "--eps", "0.1", "--samples", "200"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.trim_start().starts_with('{'));
    std::fs::remove_file(&path).ok();
}

#[test]
fn chain_on_quadric() {
    let o = run(&[
        "--mode", "covering", "--samples", "200", "chain", "--poly", "z1^2 + z2^2", "--n", "2", "--level", "0.25",
        "--from", "0.5,0,0,0", "--to", "0,0,0.5,0",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
}

#[test]
fn bad_input_exits_two() {
    assert_eq!(run(&["--gamma", "1", "cover-cube", "--dim", "2", "--delta", "0.1"]).status.code(), Some(2));
    assert_eq!(run(&["experiment", "hyperbola", "--eps", "0.9"]).status.code(), Some(2));
    assert_eq!(run(&["chain", "--poly", "z1*z2", "--n", "2", "--level", "0.01", "--from", "1,2", "--to", "0,0,0,0"]).status.code(), Some(2));
    assert_eq!(run(&["doubling-bound", "--poly-bound", "1,2"]).status.code(), Some(2));
    // clap usage errors also exit 2
    assert_eq!(run(&["cover-cube"]).status.code(), Some(2));
}
