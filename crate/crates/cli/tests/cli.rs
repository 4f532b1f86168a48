use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn mmdf(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmdf"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("MMDF_SEED")
        .output()
        .expect("binary runs")
}

struct Csv {
    meta: Vec<(String, String)>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn read(path: &Path) -> Self {
        let text = std::fs::read_to_string(path).unwrap();
        let mut lines = text.lines();
        let mut meta = Vec::new();
        let header = loop {
            let l = lines.next().expect("header present");
            match l.strip_prefix("# ") {
                Some(m) => {
                    let (k, v) = m.split_once('=').unwrap();
                    meta.push((k.to_string(), v.to_string()));
                }
                None => break l.split(',').map(String::from).collect::<Vec<_>>(),
            }
        };
        let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
        Self { meta, header, rows }
    }

    fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn col(&self, name: &str) -> Vec<f64> {
        let i = self.header.iter().position(|h| h == name).unwrap();
        self.rows.iter().map(|r| r[i].parse().unwrap()).collect()
    }

    fn col_str(&self, name: &str) -> Vec<String> {
        let i = self.header.iter().position(|h| h == name).unwrap();
        self.rows.iter().map(|r| r[i].clone()).collect()
    }
}

fn ok(o: &Output) {
    assert!(
        o.status.success(),
        "status {:?}\nstdout: {}\nstderr: {}",
        o.status.code(),
        String::from_utf8_lossy(&o.stdout),
        String::from_utf8_lossy(&o.stderr)
    );
}

fn tmp() -> (TempDir, PathBuf) {
    let d = tempfile::tempdir().unwrap();
    let p = d.path().to_path_buf();
    (d, p)
}

#[test]
fn moment_check_default() {
    let (_d, out) = tmp();
    ok(&mmdf(&["moment-check"], &out));
    let csv = Csv::read(&out.join("moment_check.csv"));
    assert_eq!(csv.header, ["d", "m", "k", "x", "abs_error"]);
    assert!(csv.col("abs_error").iter().all(|&e| e < 1e-8));
    let m = csv.col("m");
    for (mi, e) in m.iter().zip(csv.col("abs_error")) {
        if *mi == 1.0 {
            assert!(e <= 1e-15);
        }
    }
    assert_eq!(csv.meta("seed"), Some("none"));
    assert_eq!(csv.meta("version"), Some(env!("CARGO_PKG_VERSION")));
    assert_eq!(csv.meta("config_hash").unwrap().len(), 64);
}

#[test]
fn moment_check_two_dimensional_sinusoidal() {
    let (_d, out) = tmp();
    ok(&mmdf(
        &["moment-check", "--set", "dim=2", "--set", "density=sinusoidal", "--set", "moment.max_m=9"],
        &out,
    ));
    let csv = Csv::read(&out.join("moment_check.csv"));
    assert!(csv.col("abs_error").iter().all(|&e| e < 1e-8));
    assert!(csv.col("d").iter().all(|&d| d == 2.0));
}

#[test]
fn malformed_config_exits_2_naming_key() {
    let (_d, out) = tmp();
    let cfg = out.join("bad.ini");
    std::fs::write(&cfg, "dim = 1\nkernel.gamma = fast\n").unwrap();
    let o = mmdf(&["moment-check", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("kernel.gamma") && err.contains("bad.ini:2"), "{err}");

    std::fs::write(&cfg, "dim = 1\nno equals sign here\n").unwrap();
    let o = mmdf(&["moment-check", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.ini:2"));
}

#[test]
fn env_override_and_set_precedence() {
    let (_d, out) = tmp();
    let run = |env: Option<&str>, set: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_mmdf"));
        c.args(["decay", "--out"]).arg(&out);
        if let Some(v) = env {
            c.env("MMDF_KERNEL_GAMMA", v);
        }
        if let Some(s) = set {
            c.args(["--set", s]);
        }
        ok(&c.output().unwrap());
        let csv = Csv::read(&out.join("decay.csv"));
        (csv.meta("config_hash").unwrap().to_string(), csv.col("coeff")[0])
    };
    let (h1, c1) = run(None, None);
    let (h2, c2) = run(Some("2"), None);
    let (h3, c3) = run(Some("3"), Some("kernel.gamma=2"));
    assert_ne!(h1, h2);
    assert_eq!(h2, h3);
    assert_eq!(c2, c3);
    assert_ne!(c1, c2);
}

#[test]
fn dof_sweep_rank_one() {
    let (_d, out) = tmp();
    ok(&mmdf(&["dof-sweep", "--set", "kernel=constant"], &out));
    let csv = Csv::read(&out.join("dof_sweep.csv"));
    for (l, n) in csv.col("lambda").iter().zip(csv.col("N_inf")) {
        assert!((n - 1.0 / (1.0 + l)).abs() < 1e-10, "lambda {l}: {n}");
    }
}

#[test]
fn dof_sweep_gaussian_default() {
    let (_d, out) = tmp();
    ok(&mmdf(&["dof-sweep"], &out));
    let csv = Csv::read(&out.join("dof_sweep.csv"));
    let (l, ni, ne) = (csv.col("lambda"), csv.col("N_inf"), csv.col("N_eff"));
    assert!(ni.iter().zip(&ne).all(|(a, b)| b <= a));
    let ratios: Vec<f64> = l.iter().zip(&ni).map(|(l, n)| n / (1.0 / l).ln().powi(2)).collect();
    let spread = ratios.iter().cloned().fold(0.0, f64::max) / ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread <= 10.0, "{spread}");
    assert!(csv.meta("c_rho").unwrap().contains("calibrated"));
    assert!(csv.col_str("poly_bound").iter().all(String::is_empty));
}

#[test]
fn approx_error_rows_obey_bounds_and_improve_with_m() {
    let (_d, out) = tmp();
    ok(&mmdf(&["approx-error"], &out));
    let csv = Csv::read(&out.join("approx_error.csv"));
    let (m, x) = (csv.col("m"), csv.col_str("x"));
    let (ue, he) = (csv.col("uniform_error"), csv.col("rkhs_error_sq"));
    let (bi, bh) = (csv.col("bound_inf"), csv.col("bound_hk"));
    for i in 0..m.len() {
        assert!(he[i] <= bh[i] + 1e-9);
        assert!(ue[i] <= bi[i] + 1e-9);
        for j in 0..i {
            if x[j] == x[i] && m[j] < m[i] {
                assert!(he[i] <= he[j] + 1e-12, "x = {}: m {} -> {}", x[i], m[j], m[i]);
            }
        }
    }
}

#[test]
fn decay_gaussian_and_rough_table() {
    let (_d, out) = tmp();
    ok(&mmdf(&["decay"], &out));
    let csv = Csv::read(&out.join("decay.csv"));
    assert_eq!(csv.meta("classification"), Some("super_exponential"));
    for (c, b) in csv.col("coeff").iter().zip(csv.col("analytic_bound")) {
        assert!(c.abs() <= b);
    }

    let table = out.join("rough.txt");
    let text: String = (0..=2000)
        .map(|i| {
            let t = i as f64 / 2000.0;
            format!("{t} {}\n", (t - 0.5).abs().powf(1.5))
        })
        .collect();
    std::fs::write(&table, format!("t phi\n{text}")).unwrap();
    ok(&mmdf(
        &[
            "decay",
            "--set",
            "kernel=tabulated",
            "--set",
            &format!("kernel.table={}", table.display()),
            "--set",
            "smoothness.s=1",
        ],
        &out,
    ));
    let csv = Csv::read(&out.join("decay.csv"));
    let class = csv.meta("classification").unwrap();
    assert!(class.starts_with("polynomial (s = "), "{class}");
    assert!(csv.meta("v_s").unwrap().contains("estimated"));
}

#[test]
fn verify_identity_default_and_rank_one() {
    let (_d, out) = tmp();
    ok(&mmdf(&["verify-identity"], &out));
    let csv = Csv::read(&out.join("verify_identity.csv"));
    assert_eq!(csv.rows.len(), 55);
    assert!(csv.col("rel_gap").iter().all(|&g| g < 1e-6));

    ok(&mmdf(
        &["verify-identity", "--set", "kernel=constant", "--set", "identity.lambda=1e-1,1e-2,1e-3"],
        &out,
    ));
    let csv = Csv::read(&out.join("verify_identity.csv"));
    assert!(csv.col("rel_gap").iter().all(|&g| g < 1e-12));
}

#[test]
fn tight_tolerance_reports_violation_with_exit_1() {
    let (_d, out) = tmp();
    let o = mmdf(&["verify-identity", "--set", "identity.tolerance=1e-30"], &out);
    assert_eq!(o.status.code(), Some(1));
    assert!(out.join("verify_identity.csv").exists());
}

#[test]
fn nystrom_bench_requires_seed_and_reproduces() {
    let (_d, out) = tmp();
    let o = mmdf(&["nystrom-bench"], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));

    let args = [
        "nystrom-bench",
        "--seed",
        "11",
        "--set",
        "nystrom.n=300",
        "--set",
        "nystrom.seeds=2",
        "--set",
        "nystrom.m=20,60",
        "--set",
        "nystrom.timing=false",
    ];
    ok(&mmdf(&args, &out));
    let first = std::fs::read(out.join("nystrom_bench.csv")).unwrap();
    ok(&mmdf(&[&args[..], &["--threads", "3"]].concat(), &out));
    assert_eq!(first, std::fs::read(out.join("nystrom_bench.csv")).unwrap());

    let csv = Csv::read(&out.join("nystrom_bench.csv"));
    assert_eq!(csv.meta("seed"), Some("11"));
    let (m, rmse, full) = (csv.col("m"), csv.col("test_rmse"), csv.col("full_krr_rmse"));
    for i in 0..m.len() {
        if m[i] == 300.0 {
            assert!((rmse[i] - full[i]).abs() <= 1e-6);
        }
    }
}

#[test]
fn nystrom_bench_from_task_file() {
    let (_d, out) = tmp();
    let task = out.join("task.csv");
    let mut text = String::from("x,y\n");
    for i in 0..200 {
        let x = (i as f64 + 0.5) / 200.0;
        text.push_str(&format!("{x},{}\n", (3.0 * x).sin()));
    }
    std::fs::write(&task, text).unwrap();
    ok(&mmdf(
        &[
            "nystrom-bench",
            "--seed",
            "1",
            "--set",
            &format!("nystrom.task={}", task.display()),
            "--set",
            "nystrom.m=50",
            "--set",
            "nystrom.seeds=1",
        ],
        &out,
    ));
    let csv = Csv::read(&out.join("nystrom_bench.csv"));
    assert_eq!(csv.meta("test_set"), Some("training set"));
    assert_eq!(csv.meta("n"), Some("200"));
}

#[test]
fn threads_do_not_change_output() {
    let (_d, out) = tmp();
    ok(&mmdf(&["approx-error", "--threads", "1"], &out));
    let a = std::fs::read(out.join("approx_error.csv")).unwrap();
    ok(&mmdf(&["approx-error", "--threads", "4"], &out));
    assert_eq!(a, std::fs::read(out.join("approx_error.csv")).unwrap());
}

#[test]
fn plot_is_deterministic_and_validates_input() {
    let (_d, out) = tmp();
    ok(&mmdf(&["dof-sweep"], &out));
    let csv = out.join("dof_sweep.csv");
    let plots = out.join("plots");
    ok(&mmdf(&["plot", csv.to_str().unwrap()], &plots));
    let svg = std::fs::read_to_string(plots.join("dof_sweep.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("N_inf") && svg.contains("analytic_bound"));
    ok(&mmdf(&["plot", csv.to_str().unwrap()], &plots));
    assert_eq!(svg, std::fs::read_to_string(plots.join("dof_sweep.svg")).unwrap());

    let o = mmdf(&["plot", csv.to_str().unwrap(), "--kind", "pie"], &plots);
    assert_eq!(o.status.code(), Some(2));

    let empty = out.join("empty.csv");
    std::fs::write(&empty, "# command=dof-sweep\nlambda,N_inf,N_eff,argmax_x,analytic_bound,poly_bound\n").unwrap();
    let o = mmdf(&["plot", empty.to_str().unwrap()], &plots);
    assert_eq!(o.status.code(), Some(2));

    let missing = out.join("missing.csv");
    std::fs::write(&missing, "lambda,other\n0.1,1\n").unwrap();
    let o = mmdf(&["plot", missing.to_str().unwrap(), "--kind", "dof-sweep"], &plots);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("N_inf"));
}

#[test]
fn oversized_discretization_is_a_config_error() {
    let (_d, out) = tmp();
    let o = mmdf(&["dof-sweep", "--set", "dim=2", "--set", "operator.nodes=100"], &out);
    assert_eq!(o.status.code(), Some(2));
}
