use std::path::Path;
use std::process::{Command, Output};

fn mottlab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mottlab"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn basis_reports_dimension_and_partitions() {
    let dir = tempfile::tempdir().unwrap();
    let out = mottlab(&["basis", "--n", "10", "--m", "10"], dir.path());
    assert!(out.status.success());
    assert_eq!(stdout(&out), "N=10\nM=10\nD=92378\nf(N)=42\n");

    let out = mottlab(&["basis", "--n", "2", "--dump", "b.txt"], dir.path());
    assert!(out.status.success());
    let dump = std::fs::read_to_string(dir.path().join("b.txt")).unwrap();
    assert_eq!(dump, "2 2 3\n2 0\n1 1\n0 2\n");
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["sweep", "--frobnicate"][..],
        &["sweep", "--method", "exact"],
        &["basis"],
        &["nonsense"],
        &["sweep", "--steps", "1"],
        &["sweep", "--lambda-min", "0.5", "--lambda-max", "0.1"],
    ] {
        let out = mottlab(args, dir.path());
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!stderr(&out).is_empty());
    }
    let help = mottlab(&["--help"], dir.path());
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("sweep"));
}

#[test]
fn sweep_writes_one_line_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = mottlab(
        &[
            "sweep", "--n", "3", "--m", "3", "--geometry", "chain", "--method", "dense",
            "--lambda-min", "0", "--lambda-max", "1", "--steps", "101", "--csv", "out.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    assert_eq!(csv.lines().count(), 102);
    let first = csv.lines().nth(1).unwrap();
    assert!(first.starts_with("0.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0,"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.cfg"),
        "# small ccg sweep\nn = 4\ngeometry = ccg\nsteps = 5\nlambda_max = 0.4\ncsv = cfg.csv\nplot = cfg.svg\n",
    )
    .unwrap();
    let out = mottlab(&["sweep", "--config", "run.cfg", "--steps", "7"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("cfg.csv")).unwrap();
    assert_eq!(csv.lines().count(), 8);
    assert!(csv.lines().last().unwrap().starts_with("4.0000000000000002e-1,"));
    let svg = std::fs::read_to_string(dir.path().join("cfg.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));

    let missing = mottlab(&["sweep", "--config", "absent.cfg"], dir.path());
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn perturbative_sweep_warns_past_strong_coupling() {
    let dir = tempfile::tempdir().unwrap();
    let out = mottlab(
        &["sweep", "--n", "50", "--method", "perturb1", "--steps", "3", "--lambda-max", "0.5"],
        dir.path(),
    );
    assert!(out.status.success());
    assert!(stderr(&out).contains("warning"));
    assert_eq!(stdout(&out).lines().count(), 4);
}

#[test]
fn runtime_failure_leaves_partial_csv() {
    let dir = tempfile::tempdir().unwrap();
    // a single-state basis cannot run Lanczos
    let out = mottlab(
        &["sweep", "--n", "1", "--method", "lanczos", "--steps", "3", "--csv", "p.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error:"));
    let csv = std::fs::read_to_string(dir.path().join("p.csv")).unwrap();
    assert!(csv.starts_with("lambda,energy,"));
    assert!(csv.lines().last().unwrap().starts_with("# error:"));
}

#[test]
fn ground_prints_observables_and_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let out = mottlab(
        &[
            "ground", "--n", "2", "--lambda", "0.5", "--dump-state", "psi.txt", "--dump-operator",
            "h.txt",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let energy: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("energy="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((energy - (1.0 - 2f64.sqrt())).abs() < 1e-12);
    assert!(text.contains("negativity_nn="));
    assert!(!text.contains("negativity_nnn="));
    let psi = std::fs::read_to_string(dir.path().join("psi.txt")).unwrap();
    assert!(psi.starts_with("2 2 3 "));
    assert_eq!(psi.lines().count(), 4);
    let h = std::fs::read_to_string(dir.path().join("h.txt")).unwrap();
    assert!(h.starts_with("3 "));

    let sparse = mottlab(&["ground", "--n", "200", "--lambda", "0.02", "--method", "perturb2"], dir.path());
    assert!(sparse.status.success(), "{}", stderr(&sparse));
    assert!(stdout(&sparse).contains("method=perturb2"));
}

#[test]
fn compare_stays_within_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = mottlab(
        &["compare", "--n", "2", "--m", "2", "--method", "perturb2", "--lambda-max", "0.1"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let max = text.lines().find(|l| l.trim_start().starts_with("max")).unwrap();
    let ds: f64 = max.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!(ds <= 1e-3, "{text}");
}
