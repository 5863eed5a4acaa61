use std::path::Path;
use std::process::Command;

use maxreg_cli::table::strip_header;
use maxreg_cli::{execute, parse_config, run, CliError, RunOptions};
use proptest::prelude::*;

const SOLVE: &str = r#"
command = "solve"

[problem]
family = "scalar_poly"
coeffs = [1.0, 1.0]

[numerics]
n_steps = 256
solver = "representation"
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_maxreg"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    let text = strip_header(&std::fs::read_to_string(path).unwrap());
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn solve_on_one_plus_t() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(SOLVE).unwrap();
    let opts = RunOptions { out: Some(dir.path().into()), seed: None, no_timestamp: true };
    let paths = run(&cfg, &opts).unwrap();
    assert_eq!(paths.len(), 2);

    let u = rows(&dir.path().join("u.csv"));
    assert_eq!(u.len(), 257);
    for r in &u {
        let t: f64 = r[0].parse().unwrap();
        let re: f64 = r[1].parse().unwrap();
        let exact = (-t - t * t / 2.0).exp();
        assert!((re - exact).abs() <= 1e-4, "t = {t}: {re} vs {exact}");
    }
    let mr = rows(&dir.path().join("mr.csv"));
    assert_eq!(mr.len(), 1);
    assert!(mr[0].iter().all(|c| c.parse::<f64>().unwrap().is_finite()));
}

#[test]
fn header_records_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(SOLVE).unwrap();
    run(&cfg, &RunOptions { out: Some(dir.path().into()), seed: Some(3), no_timestamp: true }).unwrap();
    let text = std::fs::read_to_string(dir.path().join("mr.csv")).unwrap();
    for line in ["# tool=maxreg", "# seed=3", "# config.numerics.scheme=crank-nicolson", "# config.problem.gram_v=1.0"] {
        assert!(text.lines().any(|l| l == line), "missing {line}");
    }
    assert!(!text.contains("timestamp"));
}

#[test]
fn estimates_one_row_per_estimate_and_ell() {
    let cfg = parse_config(
        r#"
command = "estimates"
[problem]
family = "diag_perturbed"
n = 4
alpha = 0.8
amplitude = 0.3
[numerics]
ells = [0.0, 0.5, 1.0]
per_decade = 4
"#,
    )
    .unwrap();
    let tables = execute(&cfg).unwrap();
    let est = &tables[0];
    assert_eq!(est.name, "estimates");
    assert_eq!(est.rows.len(), 3 * maxreg::sectorial::ResolventEstimate::all().len());
    assert!(tables.iter().all(|t| t.is_finite()));
}

#[test]
fn empty_config_exits_one_with_usage() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "empty.toml", "# nothing here\n\n");
    let out = bin().arg("--config").arg(&p).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("usage:"));
}

#[test]
fn invalid_alpha_exits_one_naming_key() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "a.toml", "command = \"robin\"\n[problem]\nfamily = \"robin_1d\"\nn_cells = 8\nalpha = 0.2\n");
    let out = bin().arg("--config").arg(&p).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("problem.alpha"));
}

#[test]
fn mathematical_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "nl.toml",
        r#"
command = "nonlinear"
[problem]
family = "robin_1d"
n_cells = 8
alpha = 0.75
[numerics]
n_steps = 16
[data]
forcing = "ones"
[nonlinear]
max_outer = 1
tol = 1e-12
[nonlinear.beta0]
family = "tanh"
amplitude = 1.0
scale = 1.0
"#,
    );
    let out = bin().arg("--config").arg(&p).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn binary_writes_to_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "s.toml", SOLVE);
    let out_dir = dir.path().join("results");
    let out = bin()
        .args(["--threads", "1", "--no-timestamp", "--seed", "5", "--config"])
        .arg(&p)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("u.csv").exists() && out_dir.join("mr.csv").exists());
}

#[test]
fn shipped_configs_parse_and_run() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&root).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let cfg = parse_config(&std::fs::read_to_string(&path).unwrap())
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            let tables = execute(&cfg).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert!(tables.iter().all(|t| t.is_finite() && !t.rows.is_empty()));
            seen += 1;
        }
    }
    assert_eq!(seen, 8);
}

#[test]
fn convergence_needs_manufactured_family() {
    let err = parse_config("command = \"convergence\"\n[problem]\nfamily = \"robin_1d\"\nn_cells = 8\nalpha = 0.75\n")
        .unwrap_err();
    assert!(matches!(err, CliError::InvalidValue { .. }), "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn identical_seed_gives_identical_bodies(seed in any::<u64>()) {
        let text = r#"
command = "mr-check"
[problem]
family = "diag_perturbed"
n = 3
alpha = 0.8
amplitude = 0.2
[numerics]
grids = [16]
draws = 2
"#;
        let cfg = parse_config(text).unwrap();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let pa = run(&cfg, &RunOptions { out: Some(a.path().into()), seed: Some(seed), no_timestamp: false }).unwrap();
        let pb = run(&cfg, &RunOptions { out: Some(b.path().into()), seed: Some(seed), no_timestamp: true }).unwrap();
        for (x, y) in pa.iter().zip(&pb) {
            let bx = strip_header(&std::fs::read_to_string(x).unwrap());
            let by = strip_header(&std::fs::read_to_string(y).unwrap());
            prop_assert_eq!(bx, by);
        }
    }

    #[test]
    fn numeric_cells_round_trip(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        let mut t = maxreg_cli::table::Table::new("x", &["v"]);
        t.push(vec![v.into()]);
        let body = t.body().unwrap();
        let parsed: f64 = body.lines().nth(1).unwrap().parse().unwrap();
        prop_assert_eq!(parsed.to_bits(), (v + 0.0).to_bits());
    }
}
