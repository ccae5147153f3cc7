use super::CliError;
use crate::diagnostics::{EigenTolerances, RankTolerance};
use crate::plants::Segment;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const OUT_DIR_ENV: &str = "LINSPECT_OUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointChoice {
    Nominal,
    Trim,
}

/// Sampling period: a number of hours or `"auto"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TsSpec {
    Auto,
    Hours(f64),
}

impl TsSpec {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(TsSpec::Auto);
        }
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() && v > 0.0 => Ok(TsSpec::Hours(v)),
            _ => Err(CliError::Config(format!(
                "ts must be \"auto\" or a positive number, got {s:?}"
            ))),
        }
    }
}

impl Serialize for TsSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            TsSpec::Auto => s.serialize_str("auto"),
            TsSpec::Hours(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for TsSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Num(v) => TsSpec::parse(&v.to_string()),
            Raw::Text(s) => TsSpec::parse(&s),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

/// Rank tolerance as written in configs: `"default"` or a number.
pub fn parse_rank_tol(s: &str) -> Result<RankTolerance, CliError> {
    if s.eq_ignore_ascii_case("default") {
        return Ok(RankTolerance::Default);
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 => Ok(RankTolerance::Absolute(v)),
        _ => Err(CliError::Config(format!(
            "rank tolerance must be \"default\" or a nonnegative number, got {s:?}"
        ))),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FdConfig {
    pub step_factor: Option<f64>,
    pub floor: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub points: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenConfig {
    pub cluster: Option<f64>,
    pub integrator: Option<f64>,
    pub stability: Option<f64>,
}

impl EigenConfig {
    pub fn resolve(&self, base: EigenTolerances) -> EigenTolerances {
        EigenTolerances {
            cluster: self.cluster.unwrap_or(base.cluster),
            integrator: self.integrator.unwrap_or(base.integrator),
            stability: self.stability.unwrap_or(base.stability),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub duration: Option<f64>,
    pub step: Option<f64>,
    pub seed: Option<u64>,
    pub repeats: Option<usize>,
    pub noise: Option<bool>,
    pub schedule: Option<Vec<Segment>>,
}

/// Everything a run can be configured with. Each field may also be set by
/// a command-line flag, which takes precedence.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub plant: Option<String>,
    pub model: Option<PathBuf>,
    #[serde(default)]
    pub models: Vec<PathBuf>,
    pub operating_point: Option<PointChoice>,
    #[serde(default)]
    pub fd: FdConfig,
    pub ts: Option<TsSpec>,
    #[serde(default)]
    pub grid: GridConfig,
    pub rank_tolerance: Option<String>,
    #[serde(default)]
    pub eigen: EigenConfig,
    #[serde(default)]
    pub scenario: ScenarioConfig,
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    /// Reads a config file. Relative paths inside it are resolved against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(m) = cfg.model.as_mut() {
            fix(m);
        }
        cfg.models.iter_mut().for_each(fix);
        if let Some(o) = cfg.out_dir.as_mut() {
            fix(o);
        }
        Ok(cfg)
    }

    /// Flag, then environment, then config file, then the working directory.
    pub fn out_dir(&self, flag: Option<&Path>) -> PathBuf {
        if let Some(f) = flag {
            return f.to_path_buf();
        }
        if let Some(env) = std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()) {
            return PathBuf::from(env);
        }
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }
}
