use std::fmt;
use std::str::FromStr;

use coxcell_core::sampling::AngularMeasure;
use coxcell_core::{LinkType, NetworkConfig, PalmScenario};
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Analytic,
    #[serde(rename = "mc")]
    MonteCarlo,
    Both,
}

impl Engine {
    pub fn analytic(self) -> bool {
        matches!(self, Engine::Analytic | Engine::Both)
    }

    pub fn monte_carlo(self) -> bool {
        matches!(self, Engine::MonteCarlo | Engine::Both)
    }
}

impl FromStr for Engine {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "analytic" => Ok(Engine::Analytic),
            "mc" => Ok(Engine::MonteCarlo),
            "both" => Ok(Engine::Both),
            _ => Err(CliError::config(format!("engine must be analytic, mc or both, got {s}"))),
        }
    }
}

pub fn parse_scenario(s: &str) -> Result<PalmScenario, CliError> {
    match s {
        "planar" => Ok(PalmScenario::TypicalPlanarUser),
        "vehicular" => Ok(PalmScenario::TypicalVehicularUser),
        _ => Err(CliError::config(format!("scenario must be planar or vehicular, got {s}"))),
    }
}

pub fn parse_angular(s: &str) -> Result<AngularMeasure, CliError> {
    match s {
        "isotropic" => Ok(AngularMeasure::Isotropic),
        "manhattan" => Ok(AngularMeasure::Manhattan),
        _ => Err(CliError::config(format!("angular must be isotropic or manhattan, got {s}"))),
    }
}

pub fn parse_link(s: &str) -> Result<LinkType, CliError> {
    LinkType::ALL
        .into_iter()
        .find(|l| l.name().eq_ignore_ascii_case(s))
        .ok_or_else(|| CliError::config(format!("link must be one of v2v, i2v, v2i, i2i, got {s}")))
}

/// Which base stations count towards a coverage event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverageTarget {
    Total,
    Planar,
    Vehicular,
    SameLine,
    OtherLine,
}

impl FromStr for CoverageTarget {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "total" => Ok(CoverageTarget::Total),
            "planar" => Ok(CoverageTarget::Planar),
            "vehicular" => Ok(CoverageTarget::Vehicular),
            "same-line" => Ok(CoverageTarget::SameLine),
            "other-line" => Ok(CoverageTarget::OtherLine),
            _ => Err(CliError::config(format!(
                "event must be total, planar, vehicular, same-line or other-line, got {s}"
            ))),
        }
    }
}

/// The probability tabulated along the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Quantity {
    /// P(X⋆ ∈ Φ_b) or P(X⋆ ∈ Ψ_b).
    Association { vehicular: bool },
    /// P(‖X⋆‖ ≤ r).
    ServingDistanceCdf,
    /// P(SIR > T, event).
    Coverage { target: CoverageTarget },
    /// P(SIR > T | association) for one link type.
    Link { link: LinkType },
    /// Coverage of the typical user of the superposed user process.
    Mixture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepVar {
    /// SIR threshold in dB.
    TDb,
    MuB,
    LambdaB,
    LambdaL,
    /// Distance in km.
    R,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::TDb => "t-db",
            SweepVar::MuB => "mu-b",
            SweepVar::LambdaB => "lambda-b",
            SweepVar::LambdaL => "lambda-l",
            SweepVar::R => "r",
        }
    }

    /// `base` with this variable set to `x`.
    pub fn apply(self, base: NetworkConfig, x: f64) -> NetworkConfig {
        match self {
            SweepVar::TDb => base.with_threshold_db(x),
            SweepVar::MuB => NetworkConfig { mu_b: x, ..base },
            SweepVar::LambdaB => NetworkConfig { lambda_b: x, ..base },
            SweepVar::LambdaL => NetworkConfig { lambda_l: x, ..base },
            SweepVar::R => base,
        }
    }
}

impl fmt::Display for SweepVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepVar {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.replace('_', "-").as_str() {
            "t-db" | "t" => Ok(SweepVar::TDb),
            "mu-b" => Ok(SweepVar::MuB),
            "lambda-b" => Ok(SweepVar::LambdaB),
            "lambda-l" => Ok(SweepVar::LambdaL),
            "r" => Ok(SweepVar::R),
            _ => Err(CliError::config(format!("unknown sweep variable {s}; use t-db, mu-b, lambda-b, lambda-l or r"))),
        }
    }
}

/// One sweep variable and its grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub var: SweepVar,
    pub grid: Vec<f64>,
}

impl FromStr for Sweep {
    type Err = CliError;

    /// `VAR=a,b,c` or `VAR=start:stop:step` (stop included when hit).
    fn from_str(s: &str) -> Result<Self, CliError> {
        let (var, grid) =
            s.split_once('=').ok_or_else(|| CliError::config(format!("sweep must look like VAR=GRID, got {s}")))?;
        let var: SweepVar = var.trim().parse()?;
        let grid = grid.trim();
        let num = |t: &str| -> Result<f64, CliError> {
            t.trim().parse::<f64>().map_err(|_| CliError::config(format!("sweep grid: not a number: {t}")))
        };
        let values = if grid.is_empty() {
            Vec::new()
        } else if grid.contains(':') {
            let parts: Vec<&str> = grid.split(':').collect();
            let [a, b, h] = parts[..] else {
                return Err(CliError::config("range grid must be start:stop:step"));
            };
            let (a, b, h) = (num(a)?, num(b)?, num(h)?);
            if !(h > 0.0) || !(b >= a) {
                return Err(CliError::config("range grid needs step > 0 and stop >= start"));
            }
            let n = ((b - a) / h + 1e-9).floor() as usize;
            (0..=n).map(|i| a + h * i as f64).collect()
        } else {
            grid.split(',').map(num).collect::<Result<_, _>>()?
        };
        Ok(Sweep { var, grid: values })
    }
}

/// A complete, validated experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub engine: Engine,
    pub scenario: PalmScenario,
    pub quantity: Quantity,
    pub sweep: Sweep,
    pub config: NetworkConfig,
    pub angular: AngularMeasure,
    pub n_trials: usize,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn validate(self) -> Result<Self, CliError> {
        let g = &self.sweep.grid;
        if g.is_empty() {
            return Err(CliError::config(format!("{}: sweep grid over {} is empty", self.name, self.sweep.var)));
        }
        if g.iter().any(|x| !x.is_finite()) || g.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(CliError::config(format!("{}: sweep grid must be finite and strictly increasing", self.name)));
        }
        if matches!(self.sweep.var, SweepVar::MuB | SweepVar::LambdaB | SweepVar::LambdaL) && g[0] < 0.0 {
            return Err(CliError::config(format!("{}: intensities must be ≥ 0", self.name)));
        }
        let distance = matches!(self.quantity, Quantity::ServingDistanceCdf);
        if distance != (self.sweep.var == SweepVar::R) {
            return Err(CliError::config(format!(
                "{}: the distance CDF is swept over r, and r is only valid for the distance CDF",
                self.name
            )));
        }
        if distance && g[0] <= 0.0 {
            return Err(CliError::config(format!("{}: distances must be positive", self.name)));
        }
        if let Quantity::Coverage { target: CoverageTarget::SameLine | CoverageTarget::OtherLine } = self.quantity {
            if self.scenario != PalmScenario::TypicalVehicularUser {
                return Err(CliError::config(format!(
                    "{}: same-line and other-line events need the vehicular scenario",
                    self.name
                )));
            }
        }
        if self.angular == AngularMeasure::Manhattan && self.engine.analytic() {
            return Err(CliError::config(format!(
                "{}: --angular manhattan has no analytic counterpart; use --engine mc",
                self.name
            )));
        }
        if self.engine.monte_carlo() && self.n_trials == 0 {
            return Err(CliError::config(format!("{}: trials must be at least 1", self.name)));
        }
        for &x in g {
            self.sweep.var.apply(self.config, x).validate()?;
        }
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_grammar() {
        let s: Sweep = "t-db=-10:20:2.5".parse().unwrap();
        assert_eq!(s.var, SweepVar::TDb);
        assert_eq!(s.grid.len(), 13);
        assert_eq!(*s.grid.last().unwrap(), 20.0);
        let s: Sweep = "mu_b=1,2,5".parse().unwrap();
        assert_eq!(s.grid, vec![1.0, 2.0, 5.0]);
        assert!("mu-b".parse::<Sweep>().is_err());
        assert!("speed=1".parse::<Sweep>().is_err());
        assert!("t-db=0:1:0".parse::<Sweep>().is_err());
        assert!("t-db=".parse::<Sweep>().unwrap().grid.is_empty());
    }

    fn spec(sweep: &str) -> ExperimentSpec {
        ExperimentSpec {
            name: "t".into(),
            engine: Engine::Analytic,
            scenario: PalmScenario::TypicalPlanarUser,
            quantity: Quantity::Coverage { target: CoverageTarget::Total },
            sweep: sweep.parse().unwrap(),
            config: NetworkConfig::default(),
            angular: AngularMeasure::Isotropic,
            n_trials: 10,
            seed: 1,
        }
    }

    #[test]
    fn validation() {
        assert!(spec("t-db=0,1").validate().is_ok());
        assert!(spec("t-db=").validate().is_err());
        assert!(spec("t-db=1,0").validate().is_err());
        assert!(spec("r=0.1").validate().is_err());
        assert!(spec("mu-b=-1,2").validate().is_err());
        let manhattan = ExperimentSpec { angular: AngularMeasure::Manhattan, ..spec("t-db=0") };
        assert!(manhattan.clone().validate().is_err());
        assert!(ExperimentSpec { engine: Engine::MonteCarlo, ..manhattan }.validate().is_ok());
        let split =
            ExperimentSpec { quantity: Quantity::Coverage { target: CoverageTarget::SameLine }, ..spec("t-db=0") };
        assert!(split.validate().is_err());
    }
}
