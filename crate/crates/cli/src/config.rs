//! Flat `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Keys use the same
//! names as the command-line flags with `-` or `_` accepted interchangeably.
//! Precedence, lowest first: built-in defaults, the config file, flags.

use std::collections::BTreeMap;
use std::path::Path;

use coxcell_core::NetworkConfig;

use crate::error::CliError;

/// Every setting that may come from a file or a flag; `None` means unset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub lambda_b: Option<f64>,
    pub lambda_u: Option<f64>,
    pub lambda_l: Option<f64>,
    pub mu_b: Option<f64>,
    pub mu_u: Option<f64>,
    pub alpha: Option<f64>,
    pub tx_power: Option<f64>,
    pub threshold_db: Option<f64>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub engine: Option<String>,
    pub scenario: Option<String>,
    pub angular: Option<String>,
    pub sweep: Option<String>,
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("config line {}: expected key = value", i + 1)))?;
            let key = k.trim().replace('-', "_");
            if map.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(CliError::config(format!("config line {}: duplicate key {key}", i + 1)));
            }
        }
        let mut s = Settings::default();
        for (k, v) in map {
            let num = |v: &str| -> Result<f64, CliError> {
                v.parse().map_err(|_| CliError::config(format!("{k}: not a number: {v}")))
            };
            match k.as_str() {
                "lambda_b" => s.lambda_b = Some(num(&v)?),
                "lambda_u" => s.lambda_u = Some(num(&v)?),
                "lambda_l" => s.lambda_l = Some(num(&v)?),
                "mu_b" => s.mu_b = Some(num(&v)?),
                "mu_u" => s.mu_u = Some(num(&v)?),
                "alpha" => s.alpha = Some(num(&v)?),
                "tx_power" => s.tx_power = Some(num(&v)?),
                "threshold_db" => s.threshold_db = Some(num(&v)?),
                "seed" => s.seed = Some(v.parse().map_err(|_| CliError::config(format!("seed: not an integer: {v}")))?),
                "trials" => {
                    s.trials = Some(v.parse().map_err(|_| CliError::config(format!("trials: not an integer: {v}")))?)
                }
                "engine" => s.engine = Some(v),
                "scenario" => s.scenario = Some(v),
                "angular" => s.angular = Some(v),
                "sweep" => s.sweep = Some(v),
                other => return Err(CliError::config(format!("unknown config key: {other}"))),
            }
        }
        Ok(s)
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overlay(self, over: Settings) -> Settings {
        Settings {
            lambda_b: over.lambda_b.or(self.lambda_b),
            lambda_u: over.lambda_u.or(self.lambda_u),
            lambda_l: over.lambda_l.or(self.lambda_l),
            mu_b: over.mu_b.or(self.mu_b),
            mu_u: over.mu_u.or(self.mu_u),
            alpha: over.alpha.or(self.alpha),
            tx_power: over.tx_power.or(self.tx_power),
            threshold_db: over.threshold_db.or(self.threshold_db),
            seed: over.seed.or(self.seed),
            trials: over.trials.or(self.trials),
            engine: over.engine.or(self.engine),
            scenario: over.scenario.or(self.scenario),
            angular: over.angular.or(self.angular),
            sweep: over.sweep.or(self.sweep),
        }
    }

    /// Applies the network parameters on top of `base`.
    pub fn network(&self, base: NetworkConfig) -> NetworkConfig {
        let mut c = NetworkConfig {
            lambda_b: self.lambda_b.unwrap_or(base.lambda_b),
            lambda_u: self.lambda_u.unwrap_or(base.lambda_u),
            lambda_l: self.lambda_l.unwrap_or(base.lambda_l),
            mu_b: self.mu_b.unwrap_or(base.mu_b),
            mu_u: self.mu_u.unwrap_or(base.mu_u),
            alpha: self.alpha.unwrap_or(base.alpha),
            tx_power: self.tx_power.unwrap_or(base.tx_power),
            threshold: base.threshold,
        };
        if let Some(db) = self.threshold_db {
            c = c.with_threshold_db(db);
        }
        c
    }
}
