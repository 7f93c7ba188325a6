use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fbp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fbp")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = fbp(&["solve", "--set", "steps=50", "--set", "degree=8", "-o", path_str(dir.path())]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,R,max_c,max_w,max_p,max_q,max_d,sum_drift");
    assert_eq!(lines.count(), 51);
    assert!(dir.path().join("final.snapshot").exists());
    let manifest = fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(manifest.contains("config_hash"));
    assert!(manifest.contains("steps = 50"));
}

#[test]
fn manifest_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    let out = fbp(&["solve", "--set", "steps=40", "--set", "degree=8", "-o", path_str(&first)]);
    assert_eq!(code(&out), 0);
    let manifest = first.join("manifest.txt");
    let out = fbp(&["solve", "-c", path_str(&manifest), "-o", path_str(&second)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["trajectory.csv", "final.snapshot"] {
        assert_eq!(fs::read(first.join(name)).unwrap(), fs::read(second.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn stop_and_resume_equals_full_run() {
    let dir = tempfile::tempdir().unwrap();
    let full = dir.path().join("full");
    let part = dir.path().join("part");
    let rest = dir.path().join("rest");
    let base = ["--set", "steps=60", "--set", "degree=8"];
    let run = |extra: &[&str], out: &Path| {
        let mut args = vec!["solve"];
        args.extend_from_slice(&base);
        args.extend_from_slice(extra);
        args.extend_from_slice(&["-o", path_str(out)]);
        let o = fbp(&args);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    };
    run(&[], &full);
    run(&["--stop-after", "25"], &part);
    let snap = part.join("final.snapshot");
    run(&["--resume", path_str(&snap)], &rest);
    assert_eq!(
        fs::read(full.join("final.snapshot")).unwrap(),
        fs::read(rest.join("final.snapshot")).unwrap()
    );

    // A snapshot from another configuration is refused.
    let o = fbp(&["solve", "--set", "steps=61", "--set", "degree=8", "--resume", path_str(&snap), "-o", path_str(&rest)]);
    assert_eq!(code(&o), 2);
}

#[test]
fn bad_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = path_str(dir.path());
    assert_eq!(code(&fbp(&["solve", "--set", "bogus_key=1", "-o", d])), 2);
    assert_eq!(code(&fbp(&["solve", "--set", "steps=0", "-o", d])), 2);
    assert_eq!(code(&fbp(&["solve", "--set", "alpha=1.5", "-o", d])), 2);
    assert_eq!(code(&fbp(&["stability", "--epsilon", "-1e-3", "-o", d])), 2);
    assert_eq!(code(&fbp(&["stability", "--epsilon", "0", "-o", d])), 2);
    assert_eq!(code(&fbp(&["convergence", "--vary", "time", "--levels", "100", "-o", d])), 2);
    assert_eq!(code(&fbp(&["convergence", "--vary", "sideways", "--levels", "10,20", "-o", d])), 2);
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "alpha = 0.3\nsteps = lots\n").unwrap();
    let out = fbp(&["solve", "-c", path_str(&cfg), "-o", d]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("steps"));
}

#[test]
fn numerical_failure_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = fbp(&[
        "solve",
        "--set",
        "model=full-template",
        "--set",
        "c_bar=1e308",
        "--set",
        "d1=1e308",
        "--set",
        "steps=20",
        "--set",
        "degree=6",
        "-o",
        path_str(dir.path()),
    ]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn time_convergence_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = fbp(&[
        "convergence", "--vary", "time", "--levels", "100,200,400", "--set", "degree=10", "-o", path_str(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let orders = fs::read_to_string(dir.path().join("orders.csv")).unwrap();
    let rows: Vec<&str> = orders.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let cells: Vec<f64> = row.split(',').skip(1).map(|c| c.parse().unwrap()).collect();
        assert_eq!(cells.len(), 6);
        assert!(cells[..5].iter().all(|o| *o > 1.0), "{row}");
        assert!((cells[5] - 1.95).abs() < 1e-12);
    }
}

#[test]
fn space_convergence_has_one_column_per_degree() {
    let dir = tempfile::tempdir().unwrap();
    let out = fbp(&[
        "convergence", "--vary", "space", "--levels", "4,6,8,10,12", "--set", "steps=50", "-o", path_str(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let errors = fs::read_to_string(dir.path().join("errors.csv")).unwrap();
    let header: Vec<&str> = errors.lines().next().unwrap().split(',').collect();
    assert_eq!(header, ["field", "N=4", "N=6", "N=8", "N=10", "N=12"]);
    assert_eq!(errors.lines().count(), 6);
}

#[test]
fn stability_reports_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let out = fbp(&["stability", "--epsilon", "1e-2,1e-3", "--set", "steps=100", "--set", "degree=10", "-o", path_str(dir.path())]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("stability.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 3);
    let ratio: f64 = rows[2].rsplit(',').next().unwrap().parse().unwrap();
    assert!((3.0..=30.0).contains(&ratio), "{ratio}");
}

#[test]
fn version_is_printed() {
    let out = fbp(&["--version"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("fbp 0.1.0"));
}
