//! Optional `key = value` configuration files mirroring the CLI flags.
//!
//! Lines are `key = value`, blank, or `#` comments. Keys use the flag names
//! with underscores. Values given on the command line override values from
//! the file. This parser handles untrusted input; it must reject garbage
//! with a line-tagged error and never panic.

use std::path::PathBuf;

use crate::protocols::ProtocolKind;
use crate::{Error, Result};

/// Output encoding for tables and trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidProtocol(format!(
                "unknown format '{other}' (expected csv or json)"
            ))),
        }
    }
}

/// Values recognized in a config file; every field optional so CLI flags
/// can fill the gaps.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileConfig {
    pub omega: Option<f64>,
    pub gamma: Option<f64>,
    pub gamma_min: Option<f64>,
    pub gamma_max: Option<f64>,
    pub gamma_steps: Option<usize>,
    pub protocol: Option<ProtocolKind>,
    pub lambda0: Option<f64>,
    pub c_factor: Option<f64>,
    pub step: Option<f64>,
    pub output: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub log_gamma: Option<bool>,
}

impl FileConfig {
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut config = FileConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::ConfigParse {
                line: line_no,
                message: format!("expected 'key = value', got '{line}'"),
            })?;
            let key = key.trim();
            let value = value.trim();
            config.assign(key, value).map_err(|e| Error::ConfigParse {
                line: line_no,
                message: e.to_string(),
            })?;
        }
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::parse_str(&std::fs::read_to_string(path)?)
    }

    fn assign(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "omega" => self.omega = Some(parse_finite(key, value)?),
            "gamma" => self.gamma = Some(parse_finite(key, value)?),
            "gamma_min" => self.gamma_min = Some(parse_finite(key, value)?),
            "gamma_max" => self.gamma_max = Some(parse_finite(key, value)?),
            "gamma_steps" => {
                self.gamma_steps = Some(value.parse().map_err(|_| {
                    Error::InvalidProtocol(format!("{key} must be an integer, got '{value}'"))
                })?)
            }
            "protocol" => self.protocol = Some(value.parse()?),
            "lambda0" => self.lambda0 = Some(parse_finite(key, value)?),
            "c_factor" => self.c_factor = Some(parse_finite(key, value)?),
            "step" => self.step = Some(parse_finite(key, value)?),
            "output" => self.output = Some(PathBuf::from(value)),
            "format" => self.format = Some(value.parse()?),
            "log_gamma" => {
                self.log_gamma = Some(value.parse().map_err(|_| {
                    Error::InvalidProtocol(format!("{key} must be true or false, got '{value}'"))
                })?)
            }
            other => {
                return Err(Error::InvalidProtocol(format!("unknown key '{other}'")));
            }
        }
        Ok(())
    }
}

fn parse_finite(key: &str, value: &str) -> Result<f64> {
    let parsed: f64 = value.parse().map_err(|_| {
        Error::InvalidProtocol(format!("{key} must be a number, got '{value}'"))
    })?;
    if !parsed.is_finite() {
        return Err(Error::InvalidProtocol(format!(
            "{key} must be finite, got '{value}'"
        )));
    }
    Ok(parsed)
}

/// A fully-resolved sweep request: γ grid, protocol choice, integrator
/// step, and output destination.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SweepConfig {
    pub omega: f64,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub gamma_steps: usize,
    pub protocol: ProtocolKind,
    pub lambda0: f64,
    pub c_factor: f64,
    /// Integrator step; `None` derives the default from each schedule.
    pub step: Option<f64>,
    pub log_gamma: bool,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.omega.is_nan() || self.omega <= 0.0 {
            return Err(Error::InvalidProtocol("omega must be positive".into()));
        }
        if self.gamma_min < 0.0 || self.gamma_max <= self.gamma_min {
            return Err(Error::InvalidProtocol(
                "need 0 <= gamma_min < gamma_max".into(),
            ));
        }
        if self.gamma_steps < 2 {
            return Err(Error::InvalidProtocol("gamma_steps must be >= 2".into()));
        }
        if self.log_gamma && self.gamma_min <= 0.0 {
            return Err(Error::InvalidProtocol(
                "log spacing needs gamma_min > 0".into(),
            ));
        }
        Ok(())
    }

    /// The γ grid, linear by default or logarithmic with `log_gamma`.
    pub fn gamma_grid(&self) -> Vec<f64> {
        let n = self.gamma_steps;
        (0..n)
            .map(|i| {
                let frac = i as f64 / (n - 1) as f64;
                if self.log_gamma {
                    (self.gamma_min.ln() + frac * (self.gamma_max / self.gamma_min).ln()).exp()
                } else {
                    self.gamma_min + frac * (self.gamma_max - self.gamma_min)
                }
            })
            .collect()
    }

    /// Per-protocol default amplitude factor: 1.5·ω²/γ for bang-off-bang,
    /// 0.5·ω²/γ for bang-bang.
    pub fn default_c_factor(protocol: ProtocolKind) -> f64 {
        match protocol {
            ProtocolKind::BangBang => 0.5,
            _ => 1.5,
        }
    }

    /// The protocol instance at one γ grid point.
    pub fn spec_at(&self, gamma: f64) -> crate::protocols::ProtocolSpec {
        use crate::protocols::ProtocolSpec;
        match self.protocol {
            ProtocolKind::CompositeUnconstrained => {
                ProtocolSpec::composite(self.omega, gamma, self.lambda0)
            }
            kind => {
                let c = self.c_factor * self.omega * self.omega / gamma;
                ProtocolSpec::constrained(kind, self.omega, gamma, c)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let text = "\
# sweep setup
omega = 1.0
gamma_min = 0.0
gamma_max = 10
gamma_steps = 200
protocol = composite
lambda0 = 10
step = 1e-3
output = out/sweep.csv
format = csv
log_gamma = false
";
        let c = FileConfig::parse_str(text).unwrap();
        assert_eq!(c.omega, Some(1.0));
        assert_eq!(c.gamma_steps, Some(200));
        assert_eq!(c.protocol, Some(ProtocolKind::CompositeUnconstrained));
        assert_eq!(c.format, Some(OutputFormat::Csv));
        assert_eq!(c.log_gamma, Some(false));
        assert_eq!(c.output, Some(PathBuf::from("out/sweep.csv")));
    }

    #[test]
    fn rejects_garbage_with_line_numbers() {
        let err = FileConfig::parse_str("omega = 1\nnot a line\n").unwrap_err();
        match err {
            Error::ConfigParse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
        assert!(FileConfig::parse_str("omega = banana").is_err());
        assert!(FileConfig::parse_str("omega = inf").is_err());
        assert!(FileConfig::parse_str("mystery = 3").is_err());
        assert!(FileConfig::parse_str("protocol = warp").is_err());
    }

    #[test]
    fn gamma_grid_endpoints() {
        let cfg = SweepConfig {
            omega: 1.0,
            gamma_min: 0.0,
            gamma_max: 10.0,
            gamma_steps: 5,
            protocol: ProtocolKind::CompositeUnconstrained,
            lambda0: 10.0,
            c_factor: 1.5,
            step: None,
            log_gamma: false,
        };
        cfg.validate().unwrap();
        let grid = cfg.gamma_grid();
        assert_eq!(grid.len(), 5);
        assert_eq!(grid[0], 0.0);
        assert_eq!(grid[4], 10.0);

        let log_cfg = SweepConfig {
            gamma_min: 0.1,
            log_gamma: true,
            ..cfg
        };
        log_cfg.validate().unwrap();
        let grid = log_cfg.gamma_grid();
        assert!((grid[0] - 0.1).abs() < 1e-12);
        assert!((grid[4] - 10.0).abs() < 1e-10);
    }

    #[test]
    fn sweep_validation_catches_bad_grids() {
        let base = SweepConfig {
            omega: 1.0,
            gamma_min: 0.0,
            gamma_max: 10.0,
            gamma_steps: 5,
            protocol: ProtocolKind::CompositeUnconstrained,
            lambda0: 10.0,
            c_factor: 1.5,
            step: None,
            log_gamma: false,
        };
        assert!(SweepConfig {
            gamma_steps: 1,
            ..base.clone()
        }
        .validate()
        .is_err());
        assert!(SweepConfig {
            gamma_max: -1.0,
            ..base.clone()
        }
        .validate()
        .is_err());
        assert!(SweepConfig {
            log_gamma: true,
            ..base
        }
        .validate()
        .is_err());
    }
}
