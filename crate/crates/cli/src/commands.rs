use std::path::Path;
use std::time::Instant;

use mmdf_core::bounds::{
    approximation_bound_rkhs, approximation_bound_uniform, bound_dof_analytic, bound_dof_polynomial,
    coefficient_bound_analytic, coefficient_bound_polynomial_auto, constant_cs, default_rho, estimate_d_rho,
    estimate_variation, nystrom_center_count, ExponentVariant, SmoothnessParams,
};
use mmdf_core::dof::{
    default_dof_grid, effective_dimension, max_dof, max_dof_sweep, objective_value, pointwise_dof,
    representer_weights,
};
use mmdf_core::kernel::classify_decay;
use mmdf_core::nystrom::{benchmark_truth, fit_full_krr, fit_nystrom, predict_many, RegressionTask};
use mmdf_core::operator::default_probe_grid;
use mmdf_core::points::uniform_grid;
use mmdf_core::{DiscretizedOperator, Error, MomentWeight, PointSet, QuadratureRule};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::io::{self, num, opt_num, Table};
use crate::svg::{Chart, Scale, Series};

/// Slack for comparisons against bounds that are evaluated on a discretization.
pub const BOUND_SLACK: f64 = 1e-9;
/// Absolute slack for coefficient bounds, covering quadrature roundoff in tiny coefficients.
pub const COEFFICIENT_SLACK: f64 = 1e-14;

/// A finished command: its CSV plus any violated checks and notes for the terminal.
#[derive(Debug)]
pub struct Report {
    pub table: Table,
    pub file: String,
    pub violations: Vec<String>,
    pub notes: Vec<String>,
}

impl Report {
    fn new(table: Table, file: &str) -> Self {
        Self {
            table,
            file: file.to_string(),
            violations: Vec::new(),
            notes: Vec::new(),
        }
    }
}

fn point_label(p: &[f64]) -> String {
    p.iter().map(|v| num(*v)).collect::<Vec<_>>().join(";")
}

fn table(cfg: &ExperimentConfig, command: &str, header: &[&str]) -> Table {
    let mut t = Table::new(command, cfg.seed, &cfg.hash, header);
    t.meta("kernel", &cfg.kernel_tag);
    t.meta("dim", cfg.dim());
    t
}

fn operator(cfg: &ExperimentConfig) -> Result<DiscretizedOperator> {
    Ok(DiscretizedOperator::build(&cfg.kernel, &cfg.density, cfg.operator_nodes)?)
}

fn dof_grid(cfg: &ExperimentConfig) -> PointSet {
    cfg.dof_grid
        .map_or_else(|| default_dof_grid(cfg.dim()), |n| uniform_grid(n, cfg.dim()))
}

/// `C_rho` from the configuration or fitted so the analytic bound is tight at the calibration lambda.
fn c_rho(cfg: &ExperimentConfig, op: &DiscretizedOperator) -> Result<(f64, &'static str)> {
    if let Some(c) = cfg.c_rho {
        return Ok((c, "supplied"));
    }
    let l = cfg.calibration_lambda;
    let n = max_dof(op, l, &dof_grid(cfg))?.value;
    Ok((n / bound_dof_analytic(l, cfg.dim(), 1.0)?, "calibrated"))
}

fn is_analytic(cfg: &ExperimentConfig) -> bool {
    cfg.kernel.profile.analyticity_limit().is_some()
}

fn polynomial_cs(cfg: &ExperimentConfig) -> Result<Option<(f64, f64)>> {
    match (cfg.smoothness_s, cfg.c_phi_s) {
        (Some(s), Some(c)) => {
            let s = s as f64;
            Ok(Some((s, constant_cs(cfg.density.c_p(), cfg.dim(), s, c)?)))
        }
        _ => Ok(None),
    }
}

pub fn moment_check(cfg: &ExperimentConfig) -> Result<Report> {
    let d = cfg.dim();
    let density = &cfg.density;
    let rows: Vec<Vec<(usize, usize, f64, f64)>> = (1..=cfg.moment_max_m)
        .into_par_iter()
        .map(|m| -> Result<_> {
            let (nodes, weights) = QuadratureRule::gauss_legendre(m + 1)?.tensor(d);
            let mut out = Vec::new();
            for &x in &cfg.moment_x {
                let w = MomentWeight::new(m, &vec![x; d], density)?;
                let wp: Vec<f64> = nodes
                    .iter()
                    .zip(&weights)
                    .map(|(z, q)| Ok(q * w.eval(z)? * density.eval(z)))
                    .collect::<Result<_>>()?;
                for k in 0..m {
                    let got: f64 = nodes
                        .iter()
                        .zip(&wp)
                        .map(|(z, v)| v * z.iter().map(|c| c.powi(k as i32)).product::<f64>())
                        .sum();
                    out.push((m, k, x, (got - x.powi((k * d) as i32)).abs()));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut t = table(cfg, "moment-check", &["d", "m", "k", "x", "abs_error"]);
    t.meta("tolerance", cfg.moment_tolerance);
    let mut r = Report::new(t, "moment_check.csv");
    let mut worst = 0.0f64;
    for (m, k, x, e) in rows.into_iter().flatten() {
        worst = worst.max(e);
        if !(e < cfg.moment_tolerance) {
            r.violations
                .push(format!("m = {m}, k = {k}, x = {x}: error {e:e} >= {:e}", cfg.moment_tolerance));
        }
        r.table.push(vec![d.to_string(), m.to_string(), k.to_string(), num(x), num(e)]);
    }
    r.notes.push(format!("largest moment error {worst:e}"));
    Ok(r)
}

pub fn dof_sweep(cfg: &ExperimentConfig) -> Result<Report> {
    let op = operator(cfg)?;
    let d = cfg.dim();
    let sweep = max_dof_sweep(&op, &cfg.lambdas, &dof_grid(cfg))?;
    let analytic = if is_analytic(cfg) { Some(c_rho(cfg, &op)?) } else { None };
    let poly = polynomial_cs(cfg)?;
    let n_eff: Vec<f64> = cfg
        .lambdas
        .par_iter()
        .map(|&l| effective_dimension(&op, l))
        .collect::<std::result::Result<_, Error>>()?;

    let mut t = table(
        cfg,
        "dof-sweep",
        &["lambda", "N_inf", "N_eff", "argmax_x", "analytic_bound", "poly_bound"],
    );
    t.meta("operator_nodes", op.len());
    if let Some((c, how)) = analytic {
        t.meta("c_rho", format!("{c} ({how})"));
    }
    if let Some((s, c_s)) = poly {
        t.meta("poly_s", s);
        t.meta("c_s", c_s);
    }
    let mut r = Report::new(t, "dof_sweep.csv");
    for (est, ne) in sweep.iter().zip(&n_eff) {
        let l = est.lambda;
        let ab = match analytic {
            Some((c, _)) if l < 1.0 => Some(bound_dof_analytic(l, d, c)?),
            _ => None,
        };
        let pb = match poly {
            Some((s, c_s)) if l < 1.0 && s > d as f64 + 0.5 => {
                Some(bound_dof_polynomial(l, d, s, c_s, ExponentVariant::DimensionAdjusted)?)
            }
            _ => None,
        };
        if *ne > est.value * (1.0 + BOUND_SLACK) {
            r.violations
                .push(format!("lambda = {l:e}: N_eff = {ne} exceeds N_inf = {}", est.value));
        }
        if let Some(b) = pb {
            if est.value > b * (1.0 + BOUND_SLACK) {
                r.violations
                    .push(format!("lambda = {l:e}: N_inf = {} exceeds the polynomial bound {b}", est.value));
            }
        }
        if let (Some(b), Some((_, "supplied"))) = (ab, analytic) {
            if est.value > b * (1.0 + BOUND_SLACK) {
                r.violations
                    .push(format!("lambda = {l:e}: N_inf = {} exceeds the analytic bound {b}", est.value));
            }
        }
        r.table.push(vec![
            num(l),
            num(est.value),
            num(*ne),
            point_label(&est.argmax),
            opt_num(ab),
            opt_num(pb),
        ]);
    }
    let ratios: Vec<f64> = sweep
        .iter()
        .filter(|e| e.lambda < 1.0)
        .map(|e| e.value / (1.0 / e.lambda).ln().powi(2 * d as i32))
        .collect();
    if let (Some(lo), Some(hi)) = (
        ratios.iter().cloned().reduce(f64::min),
        ratios.iter().cloned().reduce(f64::max),
    ) {
        r.notes.push(format!("N_inf / ln(1/lambda)^(2d): max/min = {}", hi / lo));
    }
    Ok(r)
}

pub fn approx_error(cfg: &ExperimentConfig) -> Result<Report> {
    let op = operator(cfg)?;
    let d = cfg.dim();
    let c_p = cfg.density.c_p();
    let expansion = cfg
        .kernel
        .expand(cfg.expansion_degree, &QuadratureRule::gauss_legendre(cfg.expansion_nodes)?)?;
    let probes = cfg
        .probe_grid
        .map_or_else(|| default_probe_grid(d), |n| uniform_grid(n, d));
    let grid = uniform_grid(cfg.approx_grid, d);
    let points: Vec<&[f64]> = grid.iter().collect();

    let mut t = table(
        cfg,
        "approx-error",
        &["m", "x", "uniform_error", "rkhs_error_sq", "bound_inf", "bound_hk"],
    );
    t.meta("operator_nodes", op.len());
    t.meta("expansion_degree", cfg.expansion_degree);
    if expansion.truncation_warning() {
        t.meta("warning", "expansion tail not resolved; remainders are underestimated");
    }
    let mut r = Report::new(t, "approx_error.csv");
    for &m in &cfg.approx_m {
        if (m - 1) / 2 > cfg.expansion_degree {
            return Err(CliError::key(
                "approx.m",
                format!("order {m} needs expansion.degree >= {}", (m - 1) / 2),
            ));
        }
        let rem = expansion.remainder((m - 1) / 2);
        let b_inf = approximation_bound_uniform(c_p, m, d, rem);
        let b_hk = approximation_bound_rkhs(c_p, m, d, rem);
        let rows: Vec<(f64, f64)> = points
            .par_iter()
            .map(|x| {
                let w = MomentWeight::new(m, x, &cfg.density)?.values_at(op.nodes())?;
                Ok((op.uniform_error(&w, x, &probes)?, op.rkhs_error_sq(&w, x)?))
            })
            .collect::<std::result::Result<_, Error>>()?;
        for (x, (ue, he)) in points.iter().zip(rows) {
            if he > b_hk + BOUND_SLACK {
                r.violations
                    .push(format!("m = {m}, x = {}: RKHS error {he:e} > bound {b_hk:e}", point_label(x)));
            }
            if ue > b_inf + BOUND_SLACK {
                r.violations
                    .push(format!("m = {m}, x = {}: uniform error {ue:e} > bound {b_inf:e}", point_label(x)));
            }
            r.table
                .push(vec![m.to_string(), point_label(x), num(ue), num(he), num(b_inf), num(b_hk)]);
        }
    }
    Ok(r)
}

pub fn decay(cfg: &ExperimentConfig) -> Result<Report> {
    let profile = &cfg.kernel.profile;
    let expansion = cfg
        .kernel
        .expand(cfg.expansion_degree, &QuadratureRule::gauss_legendre(cfg.expansion_nodes)?)?;
    let mut t = table(cfg, "decay", &["ell", "coeff", "poly_bound", "analytic_bound"]);

    let analytic = if is_analytic(cfg) {
        let rho = cfg.rho.or_else(|| default_rho(profile));
        match (rho, cfg.d_rho) {
            (Some(rho), Some(d)) => Some((rho, d, "supplied")),
            (Some(rho), None) => match estimate_d_rho(profile, rho) {
                Ok(SmoothnessParams::Analytic { d_rho, .. }) => Some((rho, d_rho, "estimated")),
                _ => None,
            },
            _ => None,
        }
    } else {
        None
    };
    let poly = match cfg.smoothness_s {
        Some(s) => match cfg.v_s {
            Some(v) => Some((s, v, "supplied")),
            None => Some((s, estimate_variation(profile, s)?, "estimated")),
        },
        None => None,
    };
    if let Some((rho, d, how)) = analytic {
        t.meta("rho", rho);
        t.meta("d_rho", format!("{d} ({how})"));
    }
    if let Some((s, v, how)) = poly {
        t.meta("s", s);
        t.meta("v_s", format!("{v} ({how})"));
    }
    let summary = match classify_decay(&expansion, 1) {
        Ok(c) => {
            use mmdf_core::kernel::DecayKind;
            match c.kind {
                DecayKind::Polynomial { s, .. } => format!("polynomial (s = {s})"),
                DecayKind::Exponential { rho, .. } => format!("exponential (rho = {rho})"),
                DecayKind::SuperExponential { .. } => "super_exponential".to_string(),
            }
        }
        Err(Error::ClassificationFailed(msg)) => format!("unclassified ({msg})"),
        Err(e) => return Err(e.into()),
    };
    t.meta("classification", &summary);
    let mut r = Report::new(t, "decay.csv");
    r.notes.push(format!("classification: {summary}"));
    for (n, &c) in expansion.coefficients().iter().enumerate() {
        let pb = poly
            .filter(|(s, _, _)| n > *s as usize)
            .map(|(s, v, _)| coefficient_bound_polynomial_auto(n, s, v))
            .transpose()?;
        let ab = analytic
            .map(|(rho, d, _)| coefficient_bound_analytic(n, rho, d))
            .transpose()?;
        for (name, b) in [("polynomial", pb), ("analytic", ab)] {
            if let Some(b) = b {
                if c.abs() > b + COEFFICIENT_SLACK {
                    r.violations
                        .push(format!("ell = {n}: |c| = {:e} exceeds the {name} bound {b:e}", c.abs()));
                }
            }
        }
        r.table.push(vec![n.to_string(), num(c), opt_num(pb), opt_num(ab)]);
    }
    Ok(r)
}

fn rmse(pred: &[f64], truth: &[f64]) -> f64 {
    (pred.iter().zip(truth).map(|(p, y)| (p - y) * (p - y)).sum::<f64>() / truth.len() as f64).sqrt()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn nystrom_bench(cfg: &ExperimentConfig) -> Result<Report> {
    let seed = cfg.require_seed("nystrom-bench")?;
    let ny = &cfg.nystrom;
    let d = cfg.dim();
    let task = match &ny.task {
        Some(p) => io::read_task(p)?,
        None => RegressionTask::synthetic(ny.n, d, benchmark_truth, ny.sigma, seed)?,
    };
    if task.inputs.dim() != d {
        return Err(CliError::key(
            "dim",
            format!("task has {} feature columns but dim = {d}", task.inputs.dim()),
        ));
    }
    let (test_x, test_y, test_source) = match (&ny.test, task.truth) {
        (Some(p), _) => {
            let t = io::read_task(p)?;
            (t.inputs, t.targets, "file")
        }
        (None, Some(_)) => {
            let (x, y) = task.test_set(ny.test_n, seed.wrapping_add(1))?;
            (x, y, "noise-free truth")
        }
        (None, None) => (task.inputs.clone(), task.targets.clone(), "training set"),
    };
    let n = task.len();
    let lambda = ny.lambda;

    let (dof_bound, dof_source) = if is_analytic(cfg) && lambda < 1.0 {
        let op = operator(cfg)?;
        let (c, how) = c_rho(cfg, &op)?;
        (bound_dof_analytic(lambda, d, c)?, format!("analytic, c_rho = {c} ({how})"))
    } else if let (Some((s, c_s)), true) = (polynomial_cs(cfg)?, lambda < 1.0) {
        (
            bound_dof_polynomial(lambda, d, s, c_s, ExponentVariant::DimensionAdjusted)?,
            format!("polynomial, s = {s}"),
        )
    } else {
        let op = operator(cfg)?;
        (max_dof(&op, lambda, &dof_grid(cfg))?.value, "measured N_inf".to_string())
    };
    let count = nystrom_center_count(lambda, dof_bound, ny.guarantee.kappa, ny.guarantee.delta)?;
    let m_required = count.m.min(n);

    let full = fit_full_krr(&task, &cfg.kernel, lambda)?;
    let full_rmse = rmse(&predict_many(&full, &cfg.kernel, &test_x)?, &test_y);

    let mut ms: Vec<usize> = ny.m.iter().copied().filter(|&m| m <= n).collect();
    ms.extend([m_required, n]);
    ms.sort_unstable();
    ms.dedup();

    let mut t = table(
        cfg,
        "nystrom-bench",
        &["m", "seed", "fit_seconds", "test_rmse", "full_krr_rmse", "m_required"],
    );
    let g = &ny.guarantee;
    for (k, v) in [("kappa", g.kappa), ("delta", g.delta), ("q", g.q), ("nu", g.nu), ("gamma", g.gamma)] {
        t.meta(k, v);
    }
    t.meta("lambda", lambda);
    t.meta("n", n);
    t.meta("test_set", test_source);
    t.meta("dof_bound", format!("{dof_bound} ({dof_source})"));
    t.meta("m_formula", count.m);
    let mut r = Report::new(t, "nystrom_bench.csv");
    if count.m > n {
        r.notes
            .push(format!("bound asks for {} centers, more than n = {n}; using m = n", count.m));
    }
    for &m in &ms {
        let mut errs = Vec::new();
        for s in 0..ny.seeds as u64 {
            let center_seed = seed.wrapping_add(s);
            let start = Instant::now();
            let model = fit_nystrom(&task, &cfg.kernel, lambda, m, center_seed)?;
            let secs = start.elapsed().as_secs_f64();
            let e = rmse(&predict_many(&model, &cfg.kernel, &test_x)?, &test_y);
            errs.push(e);
            r.table.push(vec![
                m.to_string(),
                center_seed.to_string(),
                if ny.timing { num(secs) } else { String::new() },
                num(e),
                num(full_rmse),
                m_required.to_string(),
            ]);
        }
        if m == n {
            for e in &errs {
                if (e - full_rmse).abs() > 1e-6 {
                    r.violations
                        .push(format!("m = n: RMSE {e} differs from full KRR {full_rmse} by more than 1e-6"));
                }
            }
        }
        let med = median(errs);
        if m == m_required {
            r.notes.push(format!(
                "m_required = {m}: median RMSE {med} vs full KRR {full_rmse} (ratio {})",
                med / full_rmse
            ));
            if med > 1.5 * full_rmse {
                r.violations
                    .push(format!("m_required = {m}: median RMSE {med} exceeds 1.5 x full KRR {full_rmse}"));
            }
        }
    }
    if ny.scaling {
        r.notes.extend(scaling_check(cfg, seed)?);
    }
    Ok(r)
}

/// Soft check that Nyström fit time grows subquadratically in n for a fixed m.
fn scaling_check(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<String>> {
    let ny = &cfg.nystrom;
    let m = ny.m.first().copied().unwrap_or(100).min(500);
    let mut times = Vec::new();
    for n in [500usize, 1000, 2000] {
        let task = RegressionTask::synthetic(n, cfg.dim(), benchmark_truth, ny.sigma, seed)?;
        let start = Instant::now();
        fit_nystrom(&task, &cfg.kernel, ny.lambda, m, seed)?;
        times.push((n, start.elapsed().as_secs_f64()));
    }
    let mut notes = vec![format!(
        "fit seconds at m = {m}: {}",
        times
            .iter()
            .map(|(n, s)| format!("n = {n}: {s:.4}"))
            .collect::<Vec<_>>()
            .join(", ")
    )];
    for w in times.windows(2) {
        let ratio = w[1].1 / w[0].1;
        if ratio > 2.5 {
            notes.push(format!(
                "warning: fit time ratio {ratio:.2} from n = {} to n = {} exceeds 2.5",
                w[0].0, w[1].0
            ));
        }
    }
    Ok(notes)
}

pub fn verify_identity(cfg: &ExperimentConfig) -> Result<Report> {
    let op = operator(cfg)?;
    let grid = uniform_grid(cfg.identity_grid, cfg.dim());
    let cases: Vec<(f64, &[f64])> = cfg
        .identity_lambdas
        .iter()
        .flat_map(|&l| grid.iter().map(move |x| (l, x)))
        .collect();
    let rows: Vec<(f64, f64)> = cases
        .par_iter()
        .map(|&(l, x)| {
            let lhs = pointwise_dof(&op, x, l)?;
            let w = representer_weights(&op, x, l)?;
            Ok((lhs, objective_value(&op, &w, x, l)? / l))
        })
        .collect::<std::result::Result<_, Error>>()?;
    let mut t = table(
        cfg,
        "verify-identity",
        &["lambda", "x", "lhs_dof", "rhs_objective_over_lambda", "rel_gap"],
    );
    t.meta("operator_nodes", op.len());
    t.meta("tolerance", cfg.identity_tolerance);
    let mut r = Report::new(t, "verify_identity.csv");
    let mut worst = 0.0f64;
    for ((l, x), (lhs, rhs)) in cases.iter().zip(rows) {
        let gap = (lhs - rhs).abs() / lhs.abs();
        worst = worst.max(gap);
        if !(gap < cfg.identity_tolerance) {
            r.violations
                .push(format!("lambda = {l:e}, x = {}: relative gap {gap:e}", point_label(x)));
        }
        r.table
            .push(vec![num(*l), point_label(x), num(lhs), num(rhs), num(gap)]);
    }
    r.notes.push(format!("largest relative gap {worst:e}"));
    Ok(r)
}

/// How a result CSV is drawn: x column, y columns and scales. Rows sharing an x value are
/// reduced to their maximum.
struct PlotKind {
    command: &'static str,
    x: &'static str,
    ys: &'static [&'static str],
    dashed: &'static [&'static str],
    x_scale: Scale,
    y_scale: Scale,
    abs: bool,
}

const PLOT_KINDS: &[PlotKind] = &[
    PlotKind {
        command: "dof-sweep",
        x: "lambda",
        ys: &["N_inf", "N_eff", "analytic_bound", "poly_bound"],
        dashed: &["analytic_bound", "poly_bound"],
        x_scale: Scale::Log,
        y_scale: Scale::Log,
        abs: false,
    },
    PlotKind {
        command: "approx-error",
        x: "m",
        ys: &["uniform_error", "rkhs_error_sq", "bound_inf", "bound_hk"],
        dashed: &["bound_inf", "bound_hk"],
        x_scale: Scale::Linear,
        y_scale: Scale::Log,
        abs: false,
    },
    PlotKind {
        command: "decay",
        x: "ell",
        ys: &["coeff", "poly_bound", "analytic_bound"],
        dashed: &["poly_bound", "analytic_bound"],
        x_scale: Scale::Linear,
        y_scale: Scale::Log,
        abs: true,
    },
    PlotKind {
        command: "nystrom-bench",
        x: "m",
        ys: &["test_rmse", "full_krr_rmse"],
        dashed: &["full_krr_rmse"],
        x_scale: Scale::Log,
        y_scale: Scale::Log,
        abs: false,
    },
    PlotKind {
        command: "verify-identity",
        x: "lambda",
        ys: &["rel_gap"],
        dashed: &[],
        x_scale: Scale::Log,
        y_scale: Scale::Log,
        abs: false,
    },
    PlotKind {
        command: "moment-check",
        x: "m",
        ys: &["abs_error"],
        dashed: &[],
        x_scale: Scale::Linear,
        y_scale: Scale::Log,
        abs: false,
    },
];

pub fn plot_kinds() -> impl Iterator<Item = &'static str> {
    PLOT_KINDS.iter().map(|k| k.command)
}

/// Renders `csv` to `<out>/<stem>.svg`; `kind` defaults to the CSV's `command` metadata.
pub fn plot(csv: &Path, kind: Option<&str>, out: &Path) -> Result<std::path::PathBuf> {
    let parsed = io::read_result_csv(csv)?;
    let kind_name = match kind {
        Some(k) => k.to_string(),
        None => parsed
            .meta
            .iter()
            .find(|(k, _)| k == "command")
            .map(|(_, v)| v.clone())
            .ok_or_else(|| CliError::Config("CSV has no `command` metadata; pass --kind".into()))?,
    };
    let spec = PLOT_KINDS.iter().find(|k| k.command == kind_name).ok_or_else(|| {
        CliError::Config(format!(
            "unknown plot kind `{kind_name}` (expected one of: {})",
            plot_kinds().collect::<Vec<_>>().join(", ")
        ))
    })?;
    if parsed.rows.is_empty() {
        return Err(CliError::Input {
            path: csv.to_path_buf(),
            line: 0,
            msg: "no data rows to plot".into(),
        });
    }
    let missing = |c: &str| CliError::Input {
        path: csv.to_path_buf(),
        line: 0,
        msg: format!("missing column `{c}` required by plot kind `{kind_name}`"),
    };
    let xi = parsed.column(spec.x).ok_or_else(|| missing(spec.x))?;
    let mut series = Vec::new();
    for &y in spec.ys {
        let Some(yi) = parsed.column(y) else {
            if spec.dashed.contains(&y) {
                continue;
            }
            return Err(missing(y));
        };
        let mut pts: Vec<(f64, f64)> = Vec::new();
        for row in &parsed.rows {
            let (Ok(x), Ok(v)) = (row[xi].parse::<f64>(), row[yi].parse::<f64>()) else {
                continue;
            };
            let v = if spec.abs { v.abs() } else { v };
            match pts.iter_mut().find(|p| p.0 == x) {
                Some(p) => p.1 = p.1.max(v),
                None => pts.push((x, v)),
            }
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        if !pts.is_empty() {
            series.push(Series {
                name: y.to_string(),
                points: pts,
                dashed: spec.dashed.contains(&y),
            });
        }
    }
    let chart = Chart {
        title: kind_name.clone(),
        x_label: spec.x.to_string(),
        y_label: if spec.abs { "magnitude".into() } else { "value".into() },
        x_scale: spec.x_scale,
        y_scale: spec.y_scale,
        series,
    };
    let svg = chart.render().ok_or_else(|| CliError::Input {
        path: csv.to_path_buf(),
        line: 0,
        msg: "no plottable values".into(),
    })?;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let stem = csv.file_stem().and_then(|s| s.to_str()).unwrap_or("plot");
    let path = out.join(format!("{stem}.svg"));
    std::fs::write(&path, svg).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}
