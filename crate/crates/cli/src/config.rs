//! Flat `key = value` configuration with layered overrides.
//!
//! Precedence, lowest first: built-in defaults, the config file, `MMDF_*` environment
//! variables, `--set key=value`, then the dedicated `--seed` / `--out` flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use mmdf_core::bounds::NystromGuaranteeParams;
use mmdf_core::kernel::{MaternSmoothness, TabulatedProfile};
use mmdf_core::{DesignDensity, KernelSpec, Profile};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use crate::io;

pub const ENV_PREFIX: &str = "MMDF_";

/// `(key, default)`; an empty default means "unset" (derived or optional).
pub const KEYS: &[(&str, &str)] = &[
    ("kernel", "gaussian"),
    ("kernel.gamma", "1"),
    ("kernel.length_scale", "1"),
    ("kernel.constant", "1"),
    ("kernel.coefficients", ""),
    ("kernel.table", ""),
    ("dim", "1"),
    ("density", "uniform"),
    ("operator.nodes", ""),
    ("expansion.degree", "60"),
    ("expansion.nodes", "256"),
    ("lambda.grid", "1e-2,1e-3,1e-4,1e-5,1e-6,1e-7,1e-8"),
    ("grid.dof", ""),
    ("grid.probe", ""),
    ("grid.approx", "33"),
    ("grid.identity", "11"),
    ("moment.max_m", "25"),
    ("moment.x", "0,0.25,0.61803,1"),
    ("moment.tolerance", "1e-8"),
    ("approx.m", "3,5,9,15"),
    ("identity.lambda", "1e-2,1e-3,1e-4,1e-5,1e-6"),
    ("identity.tolerance", "1e-6"),
    ("bound.c_rho", ""),
    ("bound.calibration_lambda", "1e-2"),
    ("smoothness.s", ""),
    ("smoothness.v_s", ""),
    ("smoothness.c_phi_s", ""),
    ("smoothness.rho", ""),
    ("smoothness.d_rho", ""),
    ("nystrom.kappa", ""),
    ("nystrom.delta", "0.1"),
    ("nystrom.q", "1"),
    ("nystrom.nu", "1"),
    ("nystrom.gamma", "1"),
    ("nystrom.lambda", "1e-4"),
    ("nystrom.n", "2000"),
    ("nystrom.test_n", "500"),
    ("nystrom.sigma", "0.1"),
    ("nystrom.seeds", "5"),
    ("nystrom.m", "100,200,400"),
    ("nystrom.task", ""),
    ("nystrom.test", ""),
    ("nystrom.timing", "true"),
    ("nystrom.scaling", "false"),
    ("seed", ""),
    ("out", "results"),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Default,
    File { path: PathBuf, line: usize },
    Env(String),
    Set,
    Flag,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Default => write!(f, "default"),
            Origin::File { path, line } => write!(f, "{}:{line}", path.display()),
            Origin::Env(name) => write!(f, "environment variable {name}"),
            Origin::Set => write!(f, "--set"),
            Origin::Flag => write!(f, "command-line flag"),
        }
    }
}

/// Resolved string values and where each came from.
#[derive(Debug, Clone)]
pub struct RawConfig {
    values: BTreeMap<String, (String, Origin)>,
}

fn known(key: &str) -> bool {
    KEYS.iter().any(|(k, _)| *k == key)
}

impl Default for RawConfig {
    fn default() -> Self {
        let values = KEYS
            .iter()
            .map(|(k, v)| (k.to_string(), (v.to_string(), Origin::Default)))
            .collect();
        Self { values }
    }
}

impl RawConfig {
    pub fn set(&mut self, key: &str, value: &str, origin: Origin) -> Result<()> {
        if !known(key) {
            return Err(match origin {
                Origin::File { path, line } => CliError::ConfigLine {
                    path,
                    line,
                    msg: format!("unknown key `{key}`"),
                },
                other => CliError::key(key, format!("unknown key (from {other})")),
            });
        }
        self.values.insert(key.to_string(), (value.trim().to_string(), origin));
        Ok(())
    }

    pub fn merge_str(&mut self, text: &str, path: &Path) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::ConfigLine {
                    path: path.to_path_buf(),
                    line: i + 1,
                    msg: format!("expected `key = value`, found `{line}`"),
                });
            };
            let origin = Origin::File {
                path: path.to_path_buf(),
                line: i + 1,
            };
            self.set(k.trim(), v, origin)?;
        }
        Ok(())
    }

    pub fn merge_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        self.merge_str(&text, path)
    }

    /// Applies `MMDF_KERNEL_GAMMA=...` style variables for every known key.
    pub fn merge_env(&mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<()> {
        for (key, _) in KEYS {
            let name = env_name(key);
            if let Some(v) = lookup(&name) {
                self.set(key, &v, Origin::Env(name))?;
            }
        }
        Ok(())
    }

    pub fn merge_set(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set expects key=value, got `{assignment}`")))?;
        self.set(k.trim(), v, Origin::Set)
    }

    pub fn get(&self, key: &str) -> &str {
        self.values.get(key).map(|(v, _)| v.as_str()).unwrap_or("")
    }

    fn err(&self, key: &str, msg: impl fmt::Display) -> CliError {
        let origin = self.values.get(key).map(|(_, o)| o.clone()).unwrap_or(Origin::Default);
        CliError::key(key, format!("{msg} (from {origin})"))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<T> {
        let v = self.get(key);
        v.parse()
            .map_err(|_| self.err(key, format!("expected {what}, got `{v}`")))
    }

    fn opt<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<Option<T>> {
        if self.get(key).is_empty() {
            Ok(None)
        } else {
            self.parse(key, what).map(Some)
        }
    }

    fn list<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<Vec<T>> {
        let v = self.get(key);
        if v.is_empty() {
            return Ok(Vec::new());
        }
        v.split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| self.err(key, format!("expected a comma-separated list of {what}, got `{s}`")))
            })
            .collect()
    }

    fn positive(&self, key: &str) -> Result<f64> {
        let v: f64 = self.parse(key, "a number")?;
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(self.err(key, format!("must be positive, got {v}")))
        }
    }

    fn opt_positive(&self, key: &str) -> Result<Option<f64>> {
        if self.get(key).is_empty() {
            Ok(None)
        } else {
            self.positive(key).map(Some)
        }
    }

    fn lambda_grid(&self, key: &str) -> Result<Vec<f64>> {
        let l: Vec<f64> = self.list(key, "numbers")?;
        if l.is_empty() {
            return Err(self.err(key, "must not be empty"));
        }
        if l.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(self.err(key, "entries must be positive"));
        }
        if l.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(self.err(key, "entries must be strictly decreasing"));
        }
        Ok(l)
    }

    fn count(&self, key: &str) -> Result<usize> {
        let v: usize = self.parse(key, "a positive integer")?;
        if v == 0 {
            return Err(self.err(key, "must be at least 1"));
        }
        Ok(v)
    }

    fn flag(&self, key: &str) -> Result<bool> {
        match self.get(key) {
            "true" | "yes" | "1" | "on" => Ok(true),
            "false" | "no" | "0" | "off" => Ok(false),
            v => Err(self.err(key, format!("expected true or false, got `{v}`"))),
        }
    }

    /// SHA-256 of the resolved `key=value` lines, excluding the output directory.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, (v, _)) in &self.values {
            if k != "out" {
                h.update(format!("{k}={v}\n").as_bytes());
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub fn env_name(key: &str) -> String {
    format!("{ENV_PREFIX}{}", key.to_ascii_uppercase().replace('.', "_"))
}

#[derive(Debug, Clone)]
pub struct NystromSettings {
    pub guarantee: NystromGuaranteeParams,
    pub lambda: f64,
    pub n: usize,
    pub test_n: usize,
    pub sigma: f64,
    pub seeds: usize,
    pub m: Vec<usize>,
    pub task: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub timing: bool,
    pub scaling: bool,
}

/// Typed view of a [`RawConfig`].
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kernel: KernelSpec,
    pub kernel_tag: String,
    pub density: DesignDensity,
    pub operator_nodes: usize,
    pub expansion_degree: usize,
    pub expansion_nodes: usize,
    pub lambdas: Vec<f64>,
    pub dof_grid: Option<usize>,
    pub probe_grid: Option<usize>,
    pub approx_grid: usize,
    pub identity_grid: usize,
    pub moment_max_m: usize,
    pub moment_x: Vec<f64>,
    pub moment_tolerance: f64,
    pub approx_m: Vec<usize>,
    pub identity_lambdas: Vec<f64>,
    pub identity_tolerance: f64,
    pub c_rho: Option<f64>,
    pub calibration_lambda: f64,
    pub smoothness_s: Option<u32>,
    pub v_s: Option<f64>,
    pub c_phi_s: Option<f64>,
    pub rho: Option<f64>,
    pub d_rho: Option<f64>,
    pub nystrom: NystromSettings,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub hash: String,
}

fn default_operator_nodes(dim: usize) -> usize {
    match dim {
        1 => 256,
        2 => 32,
        d => (2048f64.powf(1.0 / d as f64).floor() as usize).max(2),
    }
}

impl ExperimentConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let dim = raw.count("dim")?;
        let kernel_tag = raw.get("kernel").to_string();
        let profile = match kernel_tag.as_str() {
            "gaussian" => Profile::Gaussian {
                gamma: raw.positive("kernel.gamma")?,
            },
            "imq" | "inverse_multiquadric" => Profile::InverseMultiquadric {
                gamma: raw.positive("kernel.gamma")?,
            },
            "matern12" | "matern32" | "matern52" => Profile::Matern {
                smoothness: match kernel_tag.as_str() {
                    "matern12" => MaternSmoothness::Half,
                    "matern32" => MaternSmoothness::ThreeHalves,
                    _ => MaternSmoothness::FiveHalves,
                },
                length_scale: raw.positive("kernel.length_scale")?,
            },
            "constant" => Profile::Constant(raw.positive("kernel.constant")?),
            "polynomial" | "legendre" => {
                let c: Vec<f64> = raw.list("kernel.coefficients", "numbers")?;
                if c.is_empty() {
                    return Err(raw.err("kernel.coefficients", "required for this kernel"));
                }
                if kernel_tag == "polynomial" {
                    Profile::Polynomial(c)
                } else {
                    Profile::LegendreSeries(c)
                }
            }
            "tabulated" => {
                let path = raw.get("kernel.table");
                if path.is_empty() {
                    return Err(raw.err("kernel.table", "required when kernel = tabulated"));
                }
                let (t, v) = io::read_profile_table(Path::new(path))?;
                Profile::Tabulated(TabulatedProfile::new(t, v).map_err(|e| raw.err("kernel.table", e))?)
            }
            other => {
                return Err(raw.err(
                    "kernel",
                    format!(
                        "unknown kernel `{other}` (gaussian, imq, matern12, matern32, matern52, constant, \
                         polynomial, legendre, tabulated)"
                    ),
                ))
            }
        };
        profile.validate().map_err(|e| raw.err("kernel", e))?;
        let kernel = KernelSpec::new(profile, dim).map_err(|e| raw.err("dim", e))?;
        let density = match raw.get("density") {
            "uniform" => DesignDensity::uniform(dim),
            "sinusoidal" => DesignDensity::sinusoidal(dim),
            other => return Err(raw.err("density", format!("unknown density `{other}` (uniform, sinusoidal)"))),
        };

        let lambdas = raw.lambda_grid("lambda.grid")?;
        let identity_lambdas = raw.lambda_grid("identity.lambda")?;

        let moment_x: Vec<f64> = raw.list("moment.x", "numbers")?;
        if moment_x.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(raw.err("moment.x", "locations must lie in [0, 1]"));
        }
        let approx_m: Vec<usize> = raw.list("approx.m", "positive integers")?;
        if approx_m.contains(&0) {
            return Err(raw.err("approx.m", "orders must be at least 1"));
        }
        let delta: f64 = raw.parse("nystrom.delta", "a number")?;
        if !(delta > 0.0 && delta < 1.0) {
            return Err(raw.err("nystrom.delta", "must lie in (0, 1)"));
        }
        let phi0 = kernel.diagonal();
        let kappa = raw.opt_positive("nystrom.kappa")?.unwrap_or(phi0.sqrt());
        let guarantee = NystromGuaranteeParams {
            kappa,
            delta,
            q: raw.parse("nystrom.q", "a number")?,
            nu: raw.parse("nystrom.nu", "a number")?,
            gamma: raw.parse("nystrom.gamma", "a number")?,
        };
        guarantee.validate(phi0).map_err(|e| raw.err("nystrom.kappa", e))?;
        let m: Vec<usize> = raw.list("nystrom.m", "positive integers")?;
        if m.contains(&0) {
            return Err(raw.err("nystrom.m", "center counts must be at least 1"));
        }
        let path = |key: &str| {
            let v = raw.get(key);
            (!v.is_empty()).then(|| PathBuf::from(v))
        };
        let nystrom = NystromSettings {
            guarantee,
            lambda: raw.positive("nystrom.lambda")?,
            n: raw.count("nystrom.n")?,
            test_n: raw.count("nystrom.test_n")?,
            sigma: {
                let s: f64 = raw.parse("nystrom.sigma", "a number")?;
                if !(s >= 0.0) {
                    return Err(raw.err("nystrom.sigma", "must be non-negative"));
                }
                s
            },
            seeds: raw.count("nystrom.seeds")?,
            m,
            task: path("nystrom.task"),
            test: path("nystrom.test"),
            timing: raw.flag("nystrom.timing")?,
            scaling: raw.flag("nystrom.scaling")?,
        };

        let calibration_lambda = raw.positive("bound.calibration_lambda")?;
        if calibration_lambda >= 1.0 {
            return Err(raw.err("bound.calibration_lambda", "must be below 1"));
        }
        let rho = raw.opt_positive("smoothness.rho")?;
        if rho.is_some_and(|r| r <= 1.0) {
            return Err(raw.err("smoothness.rho", "must exceed 1"));
        }
        let c_phi_s: Option<f64> = raw.opt("smoothness.c_phi_s", "a number")?;
        if c_phi_s.is_some_and(|c| !(c >= 0.0)) {
            return Err(raw.err("smoothness.c_phi_s", "must be non-negative"));
        }

        let opt_count = |key: &str| -> Result<Option<usize>> {
            if raw.get(key).is_empty() {
                Ok(None)
            } else {
                raw.count(key).map(Some)
            }
        };
        Ok(Self {
            kernel,
            kernel_tag,
            density,
            operator_nodes: opt_count("operator.nodes")?.unwrap_or_else(|| default_operator_nodes(dim)),
            expansion_degree: raw.parse("expansion.degree", "a non-negative integer")?,
            expansion_nodes: raw.count("expansion.nodes")?,
            lambdas,
            dof_grid: opt_count("grid.dof")?,
            probe_grid: opt_count("grid.probe")?,
            approx_grid: raw.count("grid.approx")?,
            identity_grid: raw.count("grid.identity")?,
            moment_max_m: raw.count("moment.max_m")?,
            moment_x,
            moment_tolerance: raw.positive("moment.tolerance")?,
            approx_m,
            identity_lambdas,
            identity_tolerance: raw.positive("identity.tolerance")?,
            c_rho: raw.opt_positive("bound.c_rho")?,
            calibration_lambda,
            smoothness_s: raw.opt("smoothness.s", "a non-negative integer")?,
            v_s: raw.opt_positive("smoothness.v_s")?,
            c_phi_s,
            rho,
            d_rho: raw.opt_positive("smoothness.d_rho")?,
            nystrom,
            seed: raw.opt("seed", "an unsigned 64-bit integer")?,
            out: PathBuf::from(raw.get("out")),
            hash: raw.hash(),
        })
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim
    }

    pub fn require_seed(&self, command: &str) -> Result<u64> {
        self.seed
            .ok_or_else(|| CliError::key("seed", format!("`{command}` is randomized and needs --seed or seed = ...")))
    }
}
