use coxcell_core::analytic::{link_coverage_in, theorem1_total_coverage, CoverageContext};
use coxcell_core::mc::{z_score, CoverageEvent};
use coxcell_core::{AnalyticValue, EstimateWithCI, MonteCarlo, NetworkConfig, PalmScenario, TrialBatch};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::CliError;
use crate::spec::{CoverageTarget, ExperimentSpec, Quantity, SweepVar};

/// One grid point of an experiment. Columns of an engine that did not run
/// are empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub sweep: f64,
    pub analytic: Option<f64>,
    pub analytic_err: Option<f64>,
    pub mc: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub n_trials: Option<usize>,
    pub z: Option<f64>,
}

impl ComparisonRow {
    fn new(sweep: f64, a: Option<AnalyticValue>, m: Option<EstimateWithCI>) -> Self {
        let z = match (a, m) {
            (Some(a), Some(m)) => Some(z_score(a.value, a.error_bound, &m)),
            _ => None,
        };
        ComparisonRow {
            sweep,
            analytic: a.map(|a| a.value),
            analytic_err: a.map(|a| a.error_bound),
            mc: m.map(|m| m.value),
            mc_stderr: m.map(|m| m.std_err),
            n_trials: m.map(|m| m.n_trials),
            z,
        }
    }
}

/// Rows in grid order up to the first failing point, and that failure.
#[derive(Debug)]
pub struct RunOutput {
    pub rows: Vec<ComparisonRow>,
    pub error: Option<CliError>,
}

impl RunOutput {
    pub fn max_abs_z(&self) -> Option<f64> {
        self.rows.iter().filter_map(|r| r.z).reduce(f64::max)
    }
}

pub fn run(spec: &ExperimentSpec) -> RunOutput {
    let analytic: Vec<Option<Result<AnalyticValue, CliError>>> = if spec.engine.analytic() {
        spec.sweep.grid.par_iter().map(|&x| Some(analytic_point(spec, x))).collect()
    } else {
        spec.sweep.grid.iter().map(|_| None).collect()
    };
    let mc: Vec<Option<Result<Option<EstimateWithCI>, CliError>>> = if spec.engine.monte_carlo() {
        mc_points(spec).into_iter().map(Some).collect()
    } else {
        spec.sweep.grid.iter().map(|_| None).collect()
    };
    let mut rows = Vec::with_capacity(spec.sweep.grid.len());
    for ((&x, a), m) in spec.sweep.grid.iter().zip(analytic).zip(mc) {
        let a = match a.transpose() {
            Ok(a) => a,
            Err(e) => return RunOutput { rows, error: Some(e) },
        };
        let m = match m.transpose() {
            Ok(m) => m.flatten(),
            Err(e) => return RunOutput { rows, error: Some(e) },
        };
        rows.push(ComparisonRow::new(x, a, m));
    }
    RunOutput { rows, error: None }
}

fn analytic_point(spec: &ExperimentSpec, x: f64) -> Result<AnalyticValue, CliError> {
    let cfg = spec.sweep.var.apply(spec.config, x);
    let s = spec.scenario;
    Ok(match spec.quantity {
        Quantity::Association { vehicular } => {
            let a = CoverageContext::new(&cfg)?.association(s)?;
            if vehicular {
                a.to_vehicular
            } else {
                a.to_planar
            }
        }
        Quantity::ServingDistanceCdf => CoverageContext::new(&cfg)?.nearest_dist_cdf(s, x)?,
        Quantity::Coverage { target } => {
            let ctx = CoverageContext::new(&cfg)?;
            match (s, target) {
                (PalmScenario::TypicalPlanarUser, CoverageTarget::Planar) => ctx.cov_planar_user_planar_bs()?,
                (PalmScenario::TypicalPlanarUser, CoverageTarget::Vehicular) => ctx.cov_planar_user_vehicular_bs()?,
                (PalmScenario::TypicalVehicularUser, CoverageTarget::Planar) => ctx.cov_vehicular_user_planar_bs()?,
                (PalmScenario::TypicalVehicularUser, CoverageTarget::Vehicular) => {
                    ctx.cov_vehicular_user_vehicular_bs()?.total
                }
                (PalmScenario::TypicalVehicularUser, CoverageTarget::SameLine) => {
                    ctx.cov_vehicular_user_vehicular_bs()?.same_line
                }
                (PalmScenario::TypicalVehicularUser, CoverageTarget::OtherLine) => {
                    ctx.cov_vehicular_user_vehicular_bs()?.other_line
                }
                (_, CoverageTarget::Total) => ctx.joint_coverages()?.scenario_total(s),
                (PalmScenario::TypicalPlanarUser, CoverageTarget::SameLine | CoverageTarget::OtherLine) => {
                    return Err(CliError::config("same-line and other-line events need the vehicular scenario"))
                }
            }
        }
        Quantity::Link { link } => link_coverage_in(&CoverageContext::new(&cfg)?, link)?,
        Quantity::Mixture => theorem1_total_coverage(&cfg)?,
    })
}

/// Scenarios whose trials the quantity needs.
fn scenarios(spec: &ExperimentSpec, cfg: &NetworkConfig) -> Result<Vec<(f64, PalmScenario)>, CliError> {
    Ok(match spec.quantity {
        Quantity::Link { link } => vec![(1.0, link.scenario())],
        Quantity::Mixture => {
            let (wp, wv) = cfg
                .user_weights()
                .ok_or_else(|| CliError::config("both user intensities are zero; the mixture is undefined"))?;
            [(wp, PalmScenario::TypicalPlanarUser), (wv, PalmScenario::TypicalVehicularUser)]
                .into_iter()
                .filter(|(w, _)| *w > 0.0)
                .collect()
        }
        _ => vec![(1.0, spec.scenario)],
    })
}

fn mc_engine(spec: &ExperimentSpec, cfg: NetworkConfig) -> MonteCarlo {
    MonteCarlo::new(cfg, spec.n_trials, spec.seed).with_angular(spec.angular)
}

fn mc_points(spec: &ExperimentSpec) -> Vec<Result<Option<EstimateWithCI>, CliError>> {
    let grid = &spec.sweep.grid;
    // Threshold and distance sweeps leave the point process unchanged, so
    // one set of realizations serves the whole grid.
    if matches!(spec.sweep.var, SweepVar::TDb | SweepVar::R) {
        let batches = match run_batches(spec, spec.config) {
            Ok(b) => b,
            Err(e) => return vec![Err(e)],
        };
        grid.iter().map(|&x| Ok(mc_value(spec, &batches, spec.sweep.var.apply(spec.config, x), x))).collect()
    } else {
        let mut out = Vec::with_capacity(grid.len());
        for &x in grid {
            let cfg = spec.sweep.var.apply(spec.config, x);
            match run_batches(spec, cfg) {
                Ok(b) => out.push(Ok(mc_value(spec, &b, cfg, x))),
                Err(e) => {
                    out.push(Err(e));
                    break;
                }
            }
        }
        out
    }
}

fn run_batches(spec: &ExperimentSpec, cfg: NetworkConfig) -> Result<Vec<(f64, TrialBatch)>, CliError> {
    let engine = mc_engine(spec, cfg);
    scenarios(spec, &cfg)?.into_iter().map(|(w, s)| Ok((w, engine.run(s)?))).collect()
}

fn mc_value(
    spec: &ExperimentSpec,
    batches: &[(f64, TrialBatch)],
    cfg: NetworkConfig,
    x: f64,
) -> Option<EstimateWithCI> {
    let (_, batch) = &batches[0];
    let t = cfg.threshold;
    match spec.quantity {
        Quantity::Association { vehicular } => {
            let (p, v) = batch.association();
            Some(if vehicular { v } else { p })
        }
        Quantity::ServingDistanceCdf => {
            let n = batch.n_trials();
            let k = batch.outcomes.iter().filter(|o| o.nearest_dist <= x).count();
            Some(EstimateWithCI::bernoulli(k, n))
        }
        Quantity::Coverage { target } => {
            let c = batch.coverage(t);
            Some(match target {
                CoverageTarget::Total => c.total,
                CoverageTarget::Planar => c.joint[&CoverageEvent::ToPlanar],
                CoverageTarget::Vehicular => c.joint[&CoverageEvent::ToVehicular],
                CoverageTarget::SameLine => *c.joint.get(&CoverageEvent::SameLine)?,
                CoverageTarget::OtherLine => *c.joint.get(&CoverageEvent::OtherLine)?,
            })
        }
        Quantity::Link { link } => batch.coverage(t).conditional(link.association().into()),
        Quantity::Mixture => {
            let parts: Vec<(f64, EstimateWithCI)> = batches.iter().map(|(w, b)| (*w, b.coverage(t).total)).collect();
            Some(EstimateWithCI::combine(&parts))
        }
    }
}
