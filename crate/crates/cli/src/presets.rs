//! Parameter sets of the published figures. Each preset expands into one
//! experiment per curve.

use coxcell_core::sampling::AngularMeasure;
use coxcell_core::{LinkType, NetworkConfig, PalmScenario};

use crate::error::CliError;
use crate::spec::{CoverageTarget, Engine, ExperimentSpec, Quantity, Sweep, SweepVar};

/// 3GPP urban layout: 500 m inter-site distance, 250 m × 433 m blocks.
pub fn three_gpp() -> NetworkConfig {
    NetworkConfig { lambda_l: 5.34, lambda_b: 6.15, mu_b: 5.0, alpha: 4.0, ..NetworkConfig::default() }
}

/// Planar and vehicular base stations at the same intensity, 25/km².
pub fn equal_intensity() -> NetworkConfig {
    NetworkConfig { lambda_l: 5.0, lambda_b: 25.0, mu_b: 5.0, alpha: 4.0, ..NetworkConfig::default() }
}

/// Twice the equal-intensity planar density relative to the roads:
/// λ_l μ_b = 50/km², λ_b = 100/km².
pub fn dense() -> NetworkConfig {
    NetworkConfig { lambda_l: 10.0, lambda_b: 100.0, mu_b: 5.0, alpha: 4.0, ..NetworkConfig::default() }
}

pub fn named_network(name: &str) -> Result<NetworkConfig, CliError> {
    match name {
        "3gpp" => Ok(three_gpp()),
        "equal" => Ok(equal_intensity()),
        "dense" => Ok(dense()),
        _ => Err(CliError::config(format!("unknown preset {name}; use 3gpp, equal or dense"))),
    }
}

/// −10 dB to 20 dB in 2.5 dB steps.
pub fn threshold_grid_db() -> Vec<f64> {
    (0..13).map(|i| -10.0 + 2.5 * i as f64).collect()
}

pub const FIGURES: [&str; 7] = ["fig3", "fig5", "fig6", "fig7-v2v", "fig7-i2v", "fig7-v2i", "fig7-i2i"];

/// Canonical figure name for an alias.
pub fn canonical(name: &str) -> Result<&'static str, CliError> {
    Ok(match name {
        "fig3" | "assoc-planar" => "fig3",
        "fig5" | "coverage-planar" => "fig5",
        "fig6" | "coverage-vehicular" => "fig6",
        "fig7-v2v" => "fig7-v2v",
        "fig7-i2v" => "fig7-i2v",
        "fig7-v2i" => "fig7-v2i",
        "fig7-i2i" => "fig7-i2i",
        _ => return Err(CliError::config(format!("unknown figure {name}; one of {}", FIGURES.join(", ")))),
    })
}

/// Shared run settings applied to every curve.
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub engine: Engine,
    pub angular: AngularMeasure,
    pub n_trials: usize,
    pub seed: u64,
    /// Road intensity for the association figure, which the caption omits.
    pub lambda_l: Option<f64>,
    /// Restricts figures 5 and 6 to one parameter set.
    pub network: Option<String>,
}

fn curve(
    name: String,
    s: &RunSettings,
    scenario: PalmScenario,
    quantity: Quantity,
    var: SweepVar,
    grid: Vec<f64>,
    config: NetworkConfig,
) -> ExperimentSpec {
    ExperimentSpec {
        name,
        engine: s.engine,
        scenario,
        quantity,
        sweep: Sweep { var, grid },
        config,
        angular: s.angular,
        n_trials: s.n_trials,
        seed: s.seed,
    }
}

fn networks(s: &RunSettings, defaults: &[&str]) -> Result<Vec<(String, NetworkConfig)>, CliError> {
    let names: Vec<String> = match &s.network {
        Some(n) => vec![n.clone()],
        None => defaults.iter().map(|d| d.to_string()).collect(),
    };
    names.into_iter().map(|n| Ok((n.clone(), named_network(&n)?))).collect()
}

/// Expands a figure into its curves.
pub fn figure(name: &str, s: &RunSettings) -> Result<Vec<ExperimentSpec>, CliError> {
    let t = threshold_grid_db;
    let cov = |target| Quantity::Coverage { target };
    let link = |link| Quantity::Link { link };
    let name = canonical(name)?;
    let specs = match name {
        "fig3" => {
            let ll = s.lambda_l.ok_or_else(|| {
                CliError::config("fig3 needs --lambda-l: the figure does not state the road intensity of its curves")
            })?;
            if !(ll > 0.0) {
                return Err(CliError::config("fig3 needs --lambda-l > 0"));
            }
            // λ_l μ_b from 1 to 100 /km², four points per decade.
            let grid: Vec<f64> = (0..=8).map(|k| 10f64.powf(k as f64 / 4.0) / ll).collect();
            [1.0, 10.0, 100.0]
                .into_iter()
                .map(|lb| {
                    let cfg = NetworkConfig { lambda_b: lb, lambda_l: ll, ..NetworkConfig::default() };
                    curve(
                        format!("fig3_lambda-b-{lb}"),
                        s,
                        PalmScenario::TypicalPlanarUser,
                        Quantity::Association { vehicular: true },
                        SweepVar::MuB,
                        grid.clone(),
                        cfg,
                    )
                })
                .collect()
        }
        "fig5" | "fig6" => {
            let (scenario, defaults) = if name == "fig5" {
                (PalmScenario::TypicalPlanarUser, ["3gpp", "equal"])
            } else {
                (PalmScenario::TypicalVehicularUser, ["equal", "dense"])
            };
            let mut v = Vec::new();
            for (net, cfg) in networks(s, &defaults)? {
                for (label, target) in
                    [("planar-bs", CoverageTarget::Planar), ("vehicular-bs", CoverageTarget::Vehicular)]
                {
                    v.push(curve(format!("{name}_{net}_{label}"), s, scenario, cov(target), SweepVar::TDb, t(), cfg));
                }
            }
            v
        }
        "fig7-v2v" => {
            let mut v: Vec<ExperimentSpec> = [5.0, 10.0, 15.0]
                .into_iter()
                .map(|mu| {
                    let cfg = NetworkConfig { mu_b: mu, ..three_gpp() };
                    curve(
                        format!("{name}_mu-b-{mu}"),
                        s,
                        PalmScenario::TypicalVehicularUser,
                        link(LinkType::V2V),
                        SweepVar::TDb,
                        t(),
                        cfg,
                    )
                })
                .collect();
            v.extend([7.55, 10.88].into_iter().map(|ll| {
                let cfg = NetworkConfig { lambda_l: ll, ..three_gpp() };
                curve(
                    format!("{name}_lambda-l-{ll}"),
                    s,
                    PalmScenario::TypicalVehicularUser,
                    link(LinkType::V2V),
                    SweepVar::TDb,
                    t(),
                    cfg,
                )
            }));
            v
        }
        "fig7-i2v" => [("sparse", 5.34, 6.15), ("normal", 7.55, 12.3), ("dense", 10.88, 24.6)]
            .into_iter()
            .map(|(label, ll, lb)| {
                let cfg = NetworkConfig { lambda_l: ll, lambda_b: lb, ..three_gpp() };
                curve(
                    format!("{name}_{label}"),
                    s,
                    PalmScenario::TypicalVehicularUser,
                    link(LinkType::I2V),
                    SweepVar::TDb,
                    t(),
                    cfg,
                )
            })
            .collect(),
        "fig7-v2i" | "fig7-i2i" => {
            let l = if name == "fig7-v2i" { LinkType::V2I } else { LinkType::I2I };
            [5.0, 10.0, 15.0]
                .into_iter()
                .map(|mu| {
                    let cfg = NetworkConfig { mu_b: mu, ..three_gpp() };
                    curve(
                        format!("{name}_mu-b-{mu}"),
                        s,
                        PalmScenario::TypicalPlanarUser,
                        link(l),
                        SweepVar::TDb,
                        t(),
                        cfg,
                    )
                })
                .collect()
        }
        _ => unreachable!("canonical names only"),
    };
    Ok(specs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings() -> RunSettings {
        RunSettings {
            engine: Engine::Analytic,
            angular: AngularMeasure::Isotropic,
            n_trials: 100,
            seed: 1,
            lambda_l: Some(10.0),
            network: None,
        }
    }

    #[test]
    fn every_figure_expands_to_valid_specs() {
        for f in FIGURES {
            let specs = figure(f, &settings()).unwrap();
            assert!(!specs.is_empty());
            for s in specs {
                s.validate().unwrap();
            }
        }
    }

    #[test]
    fn fig3_needs_road_intensity() {
        let s = RunSettings { lambda_l: None, ..settings() };
        assert!(matches!(figure("fig3", &s), Err(CliError::Config(_))));
        let grid = &figure("assoc-planar", &settings()).unwrap()[0].sweep.grid;
        assert!((grid[0] * 10.0 - 1.0).abs() < 1e-12 && (grid[8] * 10.0 - 100.0).abs() < 1e-9);
    }

    #[test]
    fn network_filter() {
        let s = RunSettings { network: Some("3gpp".into()), ..settings() };
        let specs = figure("coverage-planar", &s).unwrap();
        assert_eq!(specs.len(), 2);
        assert!(specs.iter().all(|sp| sp.config.lambda_b == 6.15));
        assert!(figure("fig9", &s).is_err());
    }
}
