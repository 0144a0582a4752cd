//! Experiment configuration shared by the CLI and the tests.
//!
//! Every option has a flat `key = value` spelling; config files are lists of
//! such lines and command-line flags are applied on top of them.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::channel::Fading;
use crate::nomographic::PresetName;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("unknown configuration key {0:?}")]
    UnknownKey(String),
    #[error("invalid value {value:?} for {key}: {reason}")]
    InvalidValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("{0}")]
    Invalid(String),
}

fn invalid(key: &str, value: &str, reason: impl fmt::Display) -> ConfigError {
    ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    MseSweep,
    MaeSweep,
    NmseCompare,
    OverlapDemo,
    AnalyticTable,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::MseSweep,
        Experiment::MaeSweep,
        Experiment::NmseCompare,
        Experiment::OverlapDemo,
        Experiment::AnalyticTable,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::MseSweep => "mse-sweep",
            Experiment::MaeSweep => "mae-sweep",
            Experiment::NmseCompare => "nmse-compare",
            Experiment::OverlapDemo => "overlap-demo",
            Experiment::AnalyticTable => "analytic-table",
        }
    }

    /// Stable numeric tag mixed into per-point seeds.
    pub fn tag(&self) -> u64 {
        *self as u64 + 1
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Experiment {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| invalid("experiment", s, "expected one of mse-sweep, mae-sweep, nmse-compare, overlap-demo, analytic-table"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modulation {
    Qam,
    Pam,
    HexA,
    HexB,
}

impl Modulation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Modulation::Qam => "qam",
            Modulation::Pam => "pam",
            Modulation::HexA => "hex-a",
            Modulation::HexB => "hex-b",
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Modulation {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "qam" => Ok(Modulation::Qam),
            "pam" => Ok(Modulation::Pam),
            "hex-a" => Ok(Modulation::HexA),
            "hex-b" => Ok(Modulation::HexB),
            _ => Err(invalid("preset", s, "expected qam, pam, hex-a or hex-b")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputDistribution {
    /// Uniform over the code's input alphabet `Z_q`.
    UniformOverZq,
    /// Uniform over the integers `lo..=hi`.
    UniformOverRange(i64, i64),
}

impl FromStr for InputDistribution {
    type Err = ConfigError;
    /// `zq` or `range:LO:HI`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "zq" {
            return Ok(InputDistribution::UniformOverZq);
        }
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["range", lo, hi] => {
                let lo: i64 = lo.parse().map_err(|e| invalid("input", s, e))?;
                let hi: i64 = hi.parse().map_err(|e| invalid("input", s, e))?;
                if lo > hi {
                    return Err(invalid("input", s, "empty range"));
                }
                Ok(InputDistribution::UniformOverRange(lo, hi))
            }
            _ => Err(invalid("input", s, "expected `zq` or `range:LO:HI`")),
        }
    }
}

/// How the received-grid extents `M1, M2` of the error model are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtentMode {
    /// `M -> inf` on every axis the aggregate can move along; `M = 1` on axes
    /// pinned by a one-row grid.
    Unbounded,
    /// `M = K (levels - 1) + 1` per axis.
    Aggregate,
}

impl FromStr for ExtentMode {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unbounded" => Ok(ExtentMode::Unbounded),
            "aggregate" => Ok(ExtentMode::Aggregate),
            _ => Err(invalid("extents", s, "expected unbounded or aggregate")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub preset: Modulation,
    pub function: PresetName,
    pub k: usize,
    pub q: u64,
    pub snr_start: f64,
    pub snr_stop: f64,
    pub snr_step: f64,
    /// Explicit SNR points; replaces start/stop/step when set.
    pub snr_list: Option<Vec<f64>>,
    pub trials: u64,
    pub seed: u64,
    pub input_distribution: Option<InputDistribution>,
    pub output_path: Option<PathBuf>,
    /// Worker threads; 0 picks the number of available cores.
    pub workers: usize,
    /// Shift the constellation centroid to the origin. `None` uses the
    /// experiment default.
    pub centered: Option<bool>,
    pub extents: ExtentMode,
    pub fading: Fading,
    pub check: bool,
    /// Node counts for `analytic-table`; defaults to `[k]`.
    pub k_list: Option<Vec<usize>>,
    pub bops_a: f64,
    pub bops_b: f64,
    pub bops_e: f64,
    pub bops_d: f64,
}

pub const KEYS: [&str; 23] = [
    "experiment",
    "preset",
    "function",
    "k",
    "q",
    "snr_start",
    "snr_stop",
    "snr_step",
    "snr_list",
    "trials",
    "seed",
    "input",
    "out",
    "workers",
    "centered",
    "extents",
    "fading",
    "check",
    "k_list",
    "bops_a",
    "bops_b",
    "bops_e",
    "bops_d",
];

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e| invalid(key, value, e))
}

fn parse_snr(key: &str, value: &str) -> Result<f64, ConfigError> {
    match value {
        "inf" | "+inf" => Ok(f64::INFINITY),
        _ => {
            let v: f64 = parse_num(key, value)?;
            if v.is_nan() {
                Err(invalid(key, value, "not a number"))
            } else {
                Ok(v)
            }
        }
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(invalid(key, value, "expected true or false")),
    }
}

fn parse_list<T>(key: &str, value: &str, item: impl Fn(&str) -> Result<T, ConfigError>) -> Result<Vec<T>, ConfigError> {
    let items: Result<Vec<T>, _> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(item)
        .collect();
    let items = items?;
    if items.is_empty() {
        return Err(invalid(key, value, "empty list"));
    }
    Ok(items)
}

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: i + 1,
            text: raw.to_string(),
        })?;
        pairs.push((key.trim().replace('-', "_"), value.trim().to_string()));
    }
    Ok(pairs)
}

impl ExperimentConfig {
    /// Settings of the corresponding figure: SNR -15..24 dB in 1 dB steps and
    /// 5e4 trials everywhere.
    pub fn defaults(experiment: Experiment) -> Self {
        let (preset, q, k, function) = match experiment {
            Experiment::MseSweep | Experiment::AnalyticTable => {
                (Modulation::Qam, 16, 100, PresetName::ArithmeticSum)
            }
            Experiment::MaeSweep => (Modulation::Qam, 64, 100, PresetName::ArithmeticMean),
            Experiment::NmseCompare => (Modulation::Qam, 64, 10, PresetName::ArithmeticMean),
            Experiment::OverlapDemo => (Modulation::Pam, 4, 2, PresetName::ArithmeticSum),
        };
        ExperimentConfig {
            experiment,
            preset,
            function,
            k,
            q,
            snr_start: -15.0,
            snr_stop: 24.0,
            snr_step: 1.0,
            snr_list: None,
            trials: 50_000,
            seed: 1,
            input_distribution: None,
            output_path: None,
            workers: 0,
            centered: None,
            extents: ExtentMode::Unbounded,
            fading: Fading::None,
            check: false,
            k_list: None,
            bops_a: 1.0,
            bops_b: 1.0,
            bops_e: 1.0,
            bops_d: 1.0,
        }
    }

    /// Applies one `key = value` setting. Dashes in keys are accepted as
    /// underscores.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let key = key.replace('-', "_");
        let key = key.as_str();
        let value = value.trim();
        match key {
            "experiment" => self.experiment = value.parse()?,
            "preset" => self.preset = value.parse()?,
            "function" => {
                self.function = value
                    .parse()
                    .map_err(|e| invalid(key, value, e))?
            }
            "k" => self.k = parse_num(key, value)?,
            "q" => self.q = parse_num(key, value)?,
            "snr_start" => self.snr_start = parse_snr(key, value)?,
            "snr_stop" => self.snr_stop = parse_snr(key, value)?,
            "snr_step" => self.snr_step = parse_snr(key, value)?,
            "snr_list" => self.snr_list = Some(parse_list(key, value, |s| parse_snr(key, s))?),
            "trials" => self.trials = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "input" => self.input_distribution = Some(value.parse()?),
            "out" => self.output_path = Some(PathBuf::from(value)),
            "workers" => self.workers = parse_num(key, value)?,
            "centered" => self.centered = Some(parse_bool(key, value)?),
            "extents" => self.extents = value.parse()?,
            "fading" => {
                self.fading = match value {
                    "none" => Fading::None,
                    "rayleigh" => Fading::Rayleigh,
                    _ => return Err(invalid(key, value, "expected none or rayleigh")),
                }
            }
            "check" => self.check = parse_bool(key, value)?,
            "k_list" => self.k_list = Some(parse_list(key, value, |s| parse_num(key, s))?),
            "bops_a" => self.bops_a = parse_num(key, value)?,
            "bops_b" => self.bops_b = parse_num(key, value)?,
            "bops_e" => self.bops_e = parse_num(key, value)?,
            "bops_d" => self.bops_d = parse_num(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    pub fn apply<'a, I>(&mut self, pairs: I) -> Result<(), ConfigError>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        for (k, v) in pairs {
            self.set(k, v)?;
        }
        Ok(())
    }

    /// SNR points in ascending order.
    pub fn snr_grid(&self) -> Vec<f64> {
        if let Some(list) = &self.snr_list {
            let mut list = list.clone();
            list.sort_by(f64::total_cmp);
            return list;
        }
        let n = ((self.snr_stop - self.snr_start) / self.snr_step + 1e-9).floor() as i64 + 1;
        (0..n.max(0))
            .map(|i| {
                let v = self.snr_start + i as f64 * self.snr_step;
                // Keep decimal grids such as 0.1 steps free of 0.30000000000000004.
                (v * 1e9).round() / 1e9
            })
            .collect()
    }

    pub fn centered(&self) -> bool {
        self.centered
            .unwrap_or(self.experiment == Experiment::NmseCompare)
    }

    pub fn k_values(&self) -> Vec<usize> {
        self.k_list.clone().unwrap_or_else(|| vec![self.k])
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.experiment == Experiment::OverlapDemo {
            return Ok(());
        }
        if self.k == 0 || self.k_values().contains(&0) {
            return Err(ConfigError::Invalid("k must be positive".into()));
        }
        if self.trials == 0 {
            return Err(ConfigError::Invalid("trials must be at least 1".into()));
        }
        if self.snr_list.is_none() {
            if !(self.snr_step > 0.0) || !self.snr_step.is_finite() {
                return Err(ConfigError::Invalid("snr_step must be positive".into()));
            }
            if !self.snr_start.is_finite() || !self.snr_stop.is_finite() {
                return Err(ConfigError::Invalid("snr_start and snr_stop must be finite; use snr_list for inf".into()));
            }
        }
        if self.snr_grid().is_empty() {
            return Err(ConfigError::Invalid("SNR grid is empty".into()));
        }
        if matches!(self.preset, Modulation::HexA | Modulation::HexB) && self.q != 8 {
            return Err(ConfigError::Invalid(format!(
                "{} has order 8, got q = {}",
                self.preset, self.q
            )));
        }
        match (self.experiment, self.function) {
            (Experiment::MseSweep, PresetName::ArithmeticSum) => {}
            (Experiment::MseSweep, f) => {
                return Err(ConfigError::Invalid(format!("mse-sweep computes arithmetic_sum, not {f}")))
            }
            (Experiment::MaeSweep, PresetName::ArithmeticMean | PresetName::EuclideanNorm) => {}
            (Experiment::MaeSweep, f) => {
                return Err(ConfigError::Invalid(format!(
                    "mae-sweep supports arithmetic_mean and euclidean_norm, not {f}"
                )))
            }
            _ => {}
        }
        if self.experiment == Experiment::MseSweep
            && !matches!(self.input_distribution, None | Some(InputDistribution::UniformOverZq))
        {
            return Err(ConfigError::Invalid("mse-sweep draws inputs from Z_q".into()));
        }
        Ok(())
    }
}
