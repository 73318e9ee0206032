use std::path::Path;
use std::process::{Command, Output};

fn dfrelay(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dfrelay")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = dfrelay(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn sample(dir: &Path, m: usize) -> String {
    let path = dir.join(format!("inst{m}.csv"));
    let p = path.to_str().unwrap().to_string();
    ok(&["sample", "--m", &m.to_string(), "--seed", "4", "--out", &p]);
    p
}

fn field(stdout: &str, label: &str) -> f64 {
    let line = stdout.lines().find(|l| l.starts_with(label)).unwrap();
    line.split_whitespace().nth(1).unwrap().parse().unwrap()
}

#[test]
fn sample_writes_instance_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = sample(dir.path(), 3);
    let text = std::fs::read_to_string(p).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,a_sd,a_sr,a_rd,w");
    assert_eq!(lines.len(), 4);
    assert!(lines[3].starts_with("3,"));
}

#[test]
fn solve_matches_oracle_on_small_instance() {
    let dir = tempfile::tempdir().unwrap();
    let p = sample(dir.path(), 4);
    let solved = ok(&["solve", "--instance", &p, "--power", "5"]);
    let best = ok(&["oracle", "--instance", &p, "--power", "5"]);
    let (rate, opt) = (field(&solved, "rate"), field(&best, "optimum"));
    assert!(rate <= opt + 1e-9 && rate >= 0.9 * opt, "{rate} vs {opt}");
    assert!(field(&solved, "dual") >= rate - 1e-9);
    assert!(solved.contains("pairing"));
}

#[test]
fn trace_file_has_one_row_per_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let p = sample(dir.path(), 4);
    let trace = dir.path().join("trace.csv");
    let out = ok(&["solve", "--instance", &p, "--trace", trace.to_str().unwrap()]);
    let iters: usize = out
        .lines()
        .find(|l| l.starts_with("iterations"))
        .unwrap()
        .split_whitespace()
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    let text = std::fs::read_to_string(trace).unwrap();
    assert_eq!(text.lines().next().unwrap(), "iter,mu,alpha_norm,power_sum,dual_value");
    assert_eq!(text.lines().count(), iters + 1);
}

#[test]
fn every_constraint_and_baseline_runs() {
    let dir = tempfile::tempdir().unwrap();
    let p = sample(dir.path(), 4);
    for extra in [&[][..], &["--extra-direct"][..]] {
        for c in [&["--constraint", "total"][..], &["--constraint", "individual", "--ps", "4", "--pr", "1"][..]] {
            let mut args = vec!["solve", "--instance", p.as_str()];
            args.extend_from_slice(c);
            args.extend_from_slice(extra);
            assert!(field(&ok(&args), "rate") > 0.0);
            for b in ["scp", "scp-unweighted", "fixed"] {
                let mut a = args.clone();
                a.extend_from_slice(&["--baseline", b]);
                assert!(field(&ok(&a), "rate") > 0.0);
            }
            let mut o = args.clone();
            o[0] = "oracle";
            assert!(field(&ok(&o), "optimum") > 0.0);
        }
    }
}

#[test]
fn simulate_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("sc.txt");
    std::fs::write(
        &sc,
        "name = mid\nmean_sq_sr = 3\nmean_sq_sd = 1\nmean_sq_rd = 3\nm_list = 2, 4\nschemes = proposed, scp, fixed, oracle\n",
    )
    .unwrap();
    let out = dir.path().join("out.csv");
    let stdout = ok(&[
        "simulate",
        "--scenario",
        sc.to_str().unwrap(),
        "--trials",
        "3",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
        "--parallel",
        "2",
    ]);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "scenario,scheme,m,trial,seed,rate,dual_value,gap,iterations,wall_time"
    );
    assert_eq!(text.lines().count(), 1 + 2 * 3 * 4);
    assert!(stdout.contains("oracle"));
}

#[test]
fn failures_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "k,a_sd,a_sr,a_rd,w\n1,-1,2,2,1\n").unwrap();
    let out = dfrelay(&["solve", "--instance", bad.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    let p = sample(dir.path(), 9);
    assert!(!dfrelay(&["oracle", "--instance", &p]).status.success());
    assert!(!dfrelay(&["solve", "--instance", "/nonexistent.csv"]).status.success());
    assert!(!dfrelay(&["solve", "--instance", &p, "--baseline", "fixed", "--trace", "/tmp/x.csv"]).status.success());
}
