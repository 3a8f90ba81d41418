//! Run configuration: defaults, the flat key=value config file, and flag
//! overrides, resolved in that order.

use std::fmt;
use std::path::PathBuf;

use nmc_core::QuadratureConfig;

/// CLI failure modes, mapped onto the exit-code contract: usage and
/// configuration problems exit 1, numerical failures exit 2.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Numerical(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<nmc_core::NmcError> for CliError {
    fn from(e: nmc_core::NmcError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn label(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Flag values collected by the parser; `None` means "not given".
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub alpha: Option<f64>,
    pub kmax: Option<u32>,
    pub a_max: Option<f64>,
    pub steps: Option<usize>,
    pub modes: Option<usize>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub suite: Option<String>,
    pub seed: Option<u64>,
    pub config: Option<PathBuf>,
}

/// Fully resolved run configuration. Fields that default per command stay
/// optional here and are resolved by the command with `unwrap_or`.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub alpha: f64,
    pub kmax: u32,
    pub a_max: Option<f64>,
    pub steps: Option<usize>,
    pub modes: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub suite: String,
    pub seed: u64,
    /// Band half width for the spectrum table; solved from alpha if absent.
    pub r: Option<f64>,
    /// Shape description for `set-eval`, e.g. `ellipse:2.0,1.0`.
    pub shape: String,
    /// Cosine coefficients of the band profile for `nmc-eval`.
    pub profile: Vec<f64>,
    /// Sample-point count for the evaluation commands.
    pub points: usize,
    /// Evaluation route name; each command has its natural default.
    pub method: Option<String>,
    pub quad: QuadratureConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            alpha: 0.5,
            kmax: 16,
            a_max: None,
            steps: None,
            modes: None,
            out: None,
            format: None,
            suite: "all".into(),
            seed: 42,
            r: None,
            shape: "disc:1.0".into(),
            profile: vec![1.0, 0.05],
            points: 8,
            method: None,
            quad: QuadratureConfig::default(),
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse::<T>()
        .map_err(|_| usage(format!("config key {key}: cannot parse {value:?}")))
}

fn parse_float_list(key: &str, value: &str) -> Result<Vec<f64>, CliError> {
    value
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("config key {key}: cannot parse {value:?}")))
        })
        .collect()
}

fn parse_format(value: &str) -> Result<Format, CliError> {
    match value {
        "csv" => Ok(Format::Csv),
        "json" => Ok(Format::Json),
        other => Err(usage(format!(
            "format must be csv or json, got {other:?}"
        ))),
    }
}

impl RunConfig {
    /// Defaults, then the config file (if any), then the flags.
    pub fn assemble(ov: &Overrides) -> Result<RunConfig, CliError> {
        let mut rc = RunConfig::default();
        if let Some(path) = &ov.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
            rc.apply_file(&text)?;
        }
        if let Some(v) = ov.alpha {
            rc.alpha = v;
        }
        if let Some(v) = ov.kmax {
            rc.kmax = v;
        }
        if let Some(v) = ov.a_max {
            rc.a_max = Some(v);
        }
        if let Some(v) = ov.steps {
            rc.steps = Some(v);
        }
        if let Some(v) = ov.modes {
            rc.modes = Some(v);
        }
        if let Some(v) = ov.tol {
            rc.quad.abs_tol = v;
        }
        if let Some(v) = &ov.out {
            rc.out = Some(v.clone());
        }
        if let Some(v) = &ov.format {
            rc.format = Some(parse_format(v)?);
        }
        if let Some(v) = &ov.suite {
            rc.suite = v.clone();
        }
        if let Some(v) = ov.seed {
            rc.seed = v;
        }
        rc.validate()?;
        Ok(rc)
    }

    fn apply_file(&mut self, text: &str) -> Result<(), CliError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                usage(format!("config line {}: expected key=value", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "alpha" => self.alpha = parse_num(key, value)?,
                "kmax" => self.kmax = parse_num(key, value)?,
                "a_max" => self.a_max = Some(parse_num(key, value)?),
                "steps" => self.steps = Some(parse_num(key, value)?),
                "modes" => self.modes = Some(parse_num(key, value)?),
                "tol" => self.quad.abs_tol = parse_num(key, value)?,
                "trunc_t" => self.quad.trunc_t = parse_num(key, value)?,
                "graded_levels" => self.quad.graded_levels = parse_num(key, value)?,
                "periodization_m" => self.quad.periodization_m = parse_num(key, value)?,
                "out" => self.out = Some(PathBuf::from(value)),
                "format" => self.format = Some(parse_format(value)?),
                "suite" => self.suite = value.into(),
                "seed" => self.seed = parse_num(key, value)?,
                "r" => self.r = Some(parse_num(key, value)?),
                "shape" => self.shape = value.into(),
                "profile" => self.profile = parse_float_list(key, value)?,
                "points" => self.points = parse_num(key, value)?,
                "method" => self.method = Some(value.into()),
                other => {
                    return Err(usage(format!(
                        "config line {}: unknown key {other:?}",
                        lineno + 1
                    )));
                }
            }
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), CliError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(usage(format!("alpha = {} outside (0,1)", self.alpha)));
        }
        if self.kmax > 4096 {
            return Err(usage(format!("kmax = {} above the supported 4096", self.kmax)));
        }
        if let Some(a) = self.a_max {
            if !(a > 0.0 && a <= 0.1) {
                return Err(usage(format!("a_max = {a} outside (0, 0.1]")));
            }
        }
        if self.steps == Some(0) {
            return Err(usage("steps must be >= 1"));
        }
        if self.modes == Some(0) {
            return Err(usage("modes must be >= 1"));
        }
        if self.points == 0 {
            return Err(usage("points must be >= 1"));
        }
        if let Some(r) = self.r {
            if !(r > 0.0) {
                return Err(usage(format!("r = {r} must be positive")));
            }
        }
        if self.profile.is_empty() || self.profile.iter().any(|c| !c.is_finite()) {
            return Err(usage("profile must be a nonempty list of finite numbers"));
        }
        self.quad
            .validate()
            .map_err(|e| usage(format!("quadrature configuration: {e}")))?;
        Ok(())
    }
}
