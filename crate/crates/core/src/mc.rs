//! Monte Carlo estimators: association, nearest-distance law, joint and
//! conditional coverage, Palm-mixture coverage.
//!
//! Every trial draws its own realization and Rayleigh fades from the stream
//! `(seed, trial)`, so results depend only on the seed and trial count, not on
//! how trials are scheduled across threads. Reductions run in trial order.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AssociationEvent, ConfigError, LinkType, NetworkConfig, PalmScenario};
use crate::sampling::{
    sample_realization_with, trial_rng, AngularMeasure, Realization, SimulationWindow, WindowError,
    DEFAULT_TAIL_EPSILON,
};

pub const DEFAULT_TRIALS: usize = 100_000;
pub const DEFAULT_MAX_RESAMPLE: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum McError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("simulation window: {0}")]
    Window(#[from] WindowError),
    #[error(
        "trial {trial}: no base station in the window after {attempts} draws; intensities too small for the window"
    )]
    EmptyRealization { trial: u64, attempts: usize },
    #[error("n_trials must be at least 1")]
    NoTrials,
    #[error("both user intensities are zero; the typical-user mixture is undefined")]
    DegenerateWeights,
    #[error("distance grid must be positive and strictly increasing")]
    BadGrid,
}

/// Outcome of one snapshot seen from the typical user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    /// Distance to the serving (nearest) base station, km.
    pub nearest_dist: f64,
    pub association: AssociationEvent,
    /// Whether the serving base station sits on the user's own road; only set
    /// for the vehicular user served by a vehicular base station.
    pub same_line: Option<bool>,
    /// Faded received power from the serving base station, H·d^{−α}.
    pub signal: f64,
    /// Sum of faded received powers from every other base station.
    pub interference: f64,
    pub nearest_planar: Option<f64>,
    pub nearest_vehicular: Option<f64>,
}

impl TrialOutcome {
    /// Signal-to-interference ratio; `+∞` without interferers.
    pub fn sir(&self) -> f64 {
        if self.interference > 0.0 {
            self.signal / self.interference
        } else {
            f64::INFINITY
        }
    }

    /// `SIR > threshold`, evaluated without dividing.
    pub fn covered(&self, threshold: f64) -> bool {
        self.signal > threshold * self.interference
    }
}

/// Evaluates a realization with the given fades, ordered as
/// `vehicular_bs` followed by `planar_bs`. Returns `None` for an empty
/// realization. Ties in distance go to the lowest index.
pub fn assess(realization: &Realization, alpha: f64, fading: &[f64]) -> Option<TrialOutcome> {
    let nv = realization.vehicular_bs.len();
    let n = nv + realization.planar_bs.len();
    assert_eq!(fading.len(), n, "one fade per base station");
    if n == 0 {
        return None;
    }
    let half_alpha = 0.5 * alpha;
    let mut best = 0usize;
    let mut best_d2 = f64::INFINITY;
    let mut nearest_v2 = f64::INFINITY;
    let mut nearest_p2 = f64::INFINITY;
    let mut total = 0.0;
    let mut best_gain = 0.0;
    for (i, &fade) in fading.iter().enumerate() {
        let xy = if i < nv { realization.vehicular_bs[i].xy } else { realization.planar_bs[i - nv] };
        let d2 = xy[0] * xy[0] + xy[1] * xy[1];
        let gain = fade * d2.powf(-half_alpha);
        total += gain;
        if d2 < best_d2 {
            best_d2 = d2;
            best = i;
            best_gain = gain;
        }
        if i < nv {
            nearest_v2 = nearest_v2.min(d2);
        } else {
            nearest_p2 = nearest_p2.min(d2);
        }
    }
    // Summing the others directly avoids the cancellation in `total − signal`.
    let mut interference = 0.0;
    if total > best_gain {
        for i in (0..n).filter(|&i| i != best) {
            let xy = if i < nv { realization.vehicular_bs[i].xy } else { realization.planar_bs[i - nv] };
            let d2 = xy[0] * xy[0] + xy[1] * xy[1];
            interference += fading[i] * d2.powf(-half_alpha);
        }
    }
    let association = if best < nv { AssociationEvent::ToVehicular } else { AssociationEvent::ToPlanar };
    let same_line = match (realization.origin_line, association) {
        (Some(l0), AssociationEvent::ToVehicular) => Some(realization.vehicular_bs[best].line == l0),
        _ => None,
    };
    let finite = |d2: f64| d2.is_finite().then(|| d2.sqrt());
    Some(TrialOutcome {
        nearest_dist: best_d2.sqrt(),
        association,
        same_line,
        signal: best_gain,
        interference,
        nearest_planar: finite(nearest_p2),
        nearest_vehicular: finite(nearest_v2),
    })
}

/// Draws a realization and unit-mean exponential fades from the
/// `(seed, trial)` stream and evaluates it, redrawing empty realizations up to
/// `max_resample` times.
pub fn run_trial(
    config: &NetworkConfig,
    scenario: PalmScenario,
    angular: AngularMeasure,
    window: &SimulationWindow,
    seed: u64,
    trial: u64,
    max_resample: usize,
) -> Result<TrialOutcome, McError> {
    let mut rng = trial_rng(seed, trial);
    let mut fading = Vec::new();
    for _ in 0..=max_resample {
        let real = sample_realization_with(config, scenario, angular, window, &mut rng, seed, trial);
        if real.is_empty() {
            continue;
        }
        fading.clear();
        fading.extend((0..real.base_station_count()).map(|_| -> f64 { Exp1.sample(&mut rng) }));
        return Ok(assess(&real, config.alpha, &fading).expect("non-empty realization"));
    }
    Err(McError::EmptyRealization { trial, attempts: max_resample + 1 })
}

/// A Bernoulli (or mean) estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithCI {
    pub value: f64,
    pub std_err: f64,
    pub n_trials: usize,
}

impl EstimateWithCI {
    /// `hits` successes out of `n` trials.
    pub fn bernoulli(hits: usize, n: usize) -> Self {
        if n == 0 {
            return EstimateWithCI { value: f64::NAN, std_err: f64::NAN, n_trials: 0 };
        }
        let p = hits as f64 / n as f64;
        EstimateWithCI { value: p, std_err: (p * (1.0 - p) / n as f64).sqrt(), n_trials: n }
    }

    /// Sample mean with the standard error from the sample variance.
    pub fn mean(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return EstimateWithCI { value: f64::NAN, std_err: f64::NAN, n_trials: 0 };
        }
        let m = pairwise_sum(samples) / n as f64;
        let dev: Vec<f64> = samples.iter().map(|x| (x - m) * (x - m)).collect();
        let var = if n > 1 { pairwise_sum(&dev) / (n - 1) as f64 } else { 0.0 };
        EstimateWithCI { value: m, std_err: (var / n as f64).sqrt(), n_trials: n }
    }

    /// Weighted combination of independent estimates.
    pub fn combine(parts: &[(f64, EstimateWithCI)]) -> Self {
        let value = parts.iter().map(|(w, e)| w * e.value).sum();
        let var: f64 = parts.iter().map(|(w, e)| w * w * e.std_err * e.std_err).sum();
        let n_trials = parts.iter().map(|(_, e)| e.n_trials).sum();
        EstimateWithCI { value, std_err: var.sqrt(), n_trials }
    }
}

/// Discrepancy between an analytic value (with quadrature error `err`) and a
/// Monte Carlo estimate, in units of their combined uncertainty. When the MC
/// standard error is zero the Bernoulli standard error under the analytic
/// value is used instead.
pub fn z_score(analytic: f64, err: f64, mc: &EstimateWithCI) -> f64 {
    let n = mc.n_trials.max(1) as f64;
    let sigma0 = (analytic.clamp(0.0, 1.0) * (1.0 - analytic.clamp(0.0, 1.0)) / n).sqrt();
    let sigma = mc.std_err.max(sigma0);
    let denom = (sigma * sigma + err * err).sqrt();
    let diff = (analytic - mc.value).abs();
    if denom > 0.0 {
        diff / denom
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Order-fixed pairwise summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        xs.iter().sum()
    } else {
        let (a, b) = xs.split_at(xs.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

/// Events whose joint probability with coverage is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CoverageEvent {
    ToPlanar,
    ToVehicular,
    /// Vehicular user served from its own road.
    SameLine,
    /// Vehicular user served from another road.
    OtherLine,
}

impl CoverageEvent {
    pub fn name(self) -> &'static str {
        match self {
            CoverageEvent::ToPlanar => "to_planar",
            CoverageEvent::ToVehicular => "to_vehicular",
            CoverageEvent::SameLine => "same_line",
            CoverageEvent::OtherLine => "other_line",
        }
    }

    fn matches(self, o: &TrialOutcome) -> bool {
        match self {
            CoverageEvent::ToPlanar => o.association == AssociationEvent::ToPlanar,
            CoverageEvent::ToVehicular => o.association == AssociationEvent::ToVehicular,
            CoverageEvent::SameLine => o.same_line == Some(true),
            CoverageEvent::OtherLine => o.same_line == Some(false),
        }
    }

    fn for_scenario(scenario: PalmScenario) -> &'static [CoverageEvent] {
        match scenario {
            PalmScenario::TypicalPlanarUser => &[CoverageEvent::ToPlanar, CoverageEvent::ToVehicular],
            PalmScenario::TypicalVehicularUser => &[
                CoverageEvent::ToPlanar,
                CoverageEvent::ToVehicular,
                CoverageEvent::SameLine,
                CoverageEvent::OtherLine,
            ],
        }
    }
}

impl From<AssociationEvent> for CoverageEvent {
    fn from(a: AssociationEvent) -> Self {
        match a {
            AssociationEvent::ToPlanar => CoverageEvent::ToPlanar,
            AssociationEvent::ToVehicular => CoverageEvent::ToVehicular,
        }
    }
}

/// Joint coverage probabilities at one threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageEstimate {
    pub scenario: PalmScenario,
    pub threshold: f64,
    /// P(SIR > T, event).
    pub joint: BTreeMap<CoverageEvent, EstimateWithCI>,
    /// P(event).
    pub event_probability: BTreeMap<CoverageEvent, EstimateWithCI>,
    /// P(SIR > T), the sum of the two association joints.
    pub total: EstimateWithCI,
    joint_hits: BTreeMap<CoverageEvent, usize>,
    event_hits: BTreeMap<CoverageEvent, usize>,
}

impl CoverageEstimate {
    /// P(SIR > T | event) as the ratio of counts; `None` when the event never
    /// occurred.
    pub fn conditional(&self, event: CoverageEvent) -> Option<EstimateWithCI> {
        let m = *self.event_hits.get(&event)?;
        let k = *self.joint_hits.get(&event)?;
        (m > 0).then(|| EstimateWithCI::bernoulli(k, m))
    }
}

/// Means of the nearest-distance variables and the empirical CDF on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NearestDistanceReport {
    pub grid: Vec<f64>,
    pub cdf: Vec<f64>,
    /// E[‖X⋆‖].
    pub mean: EstimateWithCI,
    /// E[distance to nearest planar BS], over trials with one in the window.
    pub mean_planar: EstimateWithCI,
    /// E[distance to nearest vehicular BS], over trials with one in the window.
    pub mean_vehicular: EstimateWithCI,
    /// E[‖X⋆‖ | X⋆ planar].
    pub mean_given_planar: EstimateWithCI,
    /// E[‖X⋆‖ | X⋆ vehicular].
    pub mean_given_vehicular: EstimateWithCI,
}

/// JSON record of one estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McRecord {
    pub scenario: PalmScenario,
    pub params: NetworkConfig,
    pub event: String,
    pub value: f64,
    pub std_err: f64,
    pub n_trials: usize,
    pub seed: u64,
    pub window_radius: f64,
}

/// All trial outcomes of one scenario, in trial order.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialBatch {
    pub scenario: PalmScenario,
    pub config: NetworkConfig,
    pub window: SimulationWindow,
    pub seed: u64,
    pub outcomes: Vec<TrialOutcome>,
}

impl TrialBatch {
    pub fn n_trials(&self) -> usize {
        self.outcomes.len()
    }

    fn count(&self, pred: impl Fn(&TrialOutcome) -> bool) -> usize {
        self.outcomes.iter().filter(|o| pred(o)).count()
    }

    /// `(P(X⋆ planar), P(X⋆ vehicular))`; the counts are complementary so the
    /// two values sum to one exactly.
    pub fn association(&self) -> (EstimateWithCI, EstimateWithCI) {
        let n = self.n_trials();
        let planar = self.count(|o| o.association == AssociationEvent::ToPlanar);
        (EstimateWithCI::bernoulli(planar, n), EstimateWithCI::bernoulli(n - planar, n))
    }

    pub fn coverage(&self, threshold: f64) -> CoverageEstimate {
        let n = self.n_trials();
        let mut joint = BTreeMap::new();
        let mut event_probability = BTreeMap::new();
        let mut joint_hits = BTreeMap::new();
        let mut event_hits = BTreeMap::new();
        for &ev in CoverageEvent::for_scenario(self.scenario) {
            let m = self.count(|o| ev.matches(o));
            let k = self.count(|o| ev.matches(o) && o.covered(threshold));
            joint.insert(ev, EstimateWithCI::bernoulli(k, n));
            event_probability.insert(ev, EstimateWithCI::bernoulli(m, n));
            joint_hits.insert(ev, k);
            event_hits.insert(ev, m);
        }
        let covered = joint_hits[&CoverageEvent::ToPlanar] + joint_hits[&CoverageEvent::ToVehicular];
        CoverageEstimate {
            scenario: self.scenario,
            threshold,
            joint,
            event_probability,
            total: EstimateWithCI::bernoulli(covered, n),
            joint_hits,
            event_hits,
        }
    }

    /// Empirical CDF of the serving distance at `r`.
    pub fn ecdf(&self, r: f64) -> f64 {
        self.count(|o| o.nearest_dist <= r) as f64 / self.n_trials() as f64
    }

    /// Sorted serving distances.
    pub fn sorted_distances(&self) -> Vec<f64> {
        let mut d: Vec<f64> = self.outcomes.iter().map(|o| o.nearest_dist).collect();
        d.sort_by(f64::total_cmp);
        d
    }

    /// Kolmogorov–Smirnov distance between the serving-distance sample and
    /// the CDF `cdf`.
    pub fn ks_distance(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        let d = self.sorted_distances();
        let n = d.len() as f64;
        d.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }

    pub fn nearest_distance(&self, grid: &[f64]) -> Result<NearestDistanceReport, McError> {
        if grid.iter().any(|r| !(*r > 0.0)) || grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(McError::BadGrid);
        }
        let cdf = grid.iter().map(|&r| self.ecdf(r)).collect();
        let pick = |f: &dyn Fn(&TrialOutcome) -> Option<f64>| -> EstimateWithCI {
            let xs: Vec<f64> = self.outcomes.iter().filter_map(f).collect();
            EstimateWithCI::mean(&xs)
        };
        Ok(NearestDistanceReport {
            grid: grid.to_vec(),
            cdf,
            mean: pick(&|o| Some(o.nearest_dist)),
            mean_planar: pick(&|o| o.nearest_planar),
            mean_vehicular: pick(&|o| o.nearest_vehicular),
            mean_given_planar: pick(&|o| (o.association == AssociationEvent::ToPlanar).then_some(o.nearest_dist)),
            mean_given_vehicular: pick(&|o| (o.association == AssociationEvent::ToVehicular).then_some(o.nearest_dist)),
        })
    }

    pub fn record(&self, event: &str, est: EstimateWithCI) -> McRecord {
        McRecord {
            scenario: self.scenario,
            params: self.config,
            event: event.to_string(),
            value: est.value,
            std_err: est.std_err,
            n_trials: est.n_trials,
            seed: self.seed,
            window_radius: self.window.radius,
        }
    }

    /// JSON records for every event of a coverage estimate, plus the total.
    pub fn coverage_records(&self, cov: &CoverageEstimate) -> Vec<McRecord> {
        let cfg = self.config.with_threshold(cov.threshold);
        let mut out: Vec<McRecord> =
            cov.joint.iter().map(|(ev, est)| McRecord { params: cfg, ..self.record(ev.name(), *est) }).collect();
        out.push(McRecord { params: cfg, ..self.record("total", cov.total) });
        out
    }
}

/// Monte Carlo engine for one parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarlo {
    pub config: NetworkConfig,
    pub angular: AngularMeasure,
    /// Explicit window; `None` picks the tail-bounded default.
    pub window: Option<SimulationWindow>,
    pub n_trials: usize,
    pub seed: u64,
    pub max_resample: usize,
}

impl MonteCarlo {
    pub fn new(config: NetworkConfig, n_trials: usize, seed: u64) -> Self {
        MonteCarlo {
            config,
            angular: AngularMeasure::Isotropic,
            window: None,
            n_trials,
            seed,
            max_resample: DEFAULT_MAX_RESAMPLE,
        }
    }

    pub fn with_angular(mut self, angular: AngularMeasure) -> Self {
        self.angular = angular;
        self
    }

    pub fn with_window(mut self, window: SimulationWindow) -> Self {
        self.window = Some(window);
        self
    }

    pub fn window(&self) -> Result<SimulationWindow, McError> {
        match self.window {
            Some(w) => Ok(w),
            None => Ok(SimulationWindow::tail_bounded(&self.config, DEFAULT_TAIL_EPSILON)?),
        }
    }

    /// Runs every trial of `scenario` in parallel.
    pub fn run(&self, scenario: PalmScenario) -> Result<TrialBatch, McError> {
        let config = self.config.validate()?;
        if self.n_trials == 0 {
            return Err(McError::NoTrials);
        }
        let window = self.window()?;
        let outcomes = (0..self.n_trials as u64)
            .into_par_iter()
            .map(|t| run_trial(&config, scenario, self.angular, &window, self.seed, t, self.max_resample))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TrialBatch { scenario, config, window, seed: self.seed, outcomes })
    }

    pub fn estimate_association(&self, scenario: PalmScenario) -> Result<(EstimateWithCI, EstimateWithCI), McError> {
        Ok(self.run(scenario)?.association())
    }

    pub fn estimate_nearest_distance_cdf(
        &self,
        scenario: PalmScenario,
        grid: &[f64],
    ) -> Result<NearestDistanceReport, McError> {
        self.run(scenario)?.nearest_distance(grid)
    }

    /// Joint coverages at each threshold, sharing realizations across the
    /// threshold grid.
    pub fn estimate_coverage(
        &self,
        scenario: PalmScenario,
        thresholds: &[f64],
    ) -> Result<Vec<CoverageEstimate>, McError> {
        let batch = self.run(scenario)?;
        Ok(thresholds.iter().map(|&t| batch.coverage(t)).collect())
    }

    /// Conditional coverage of one link type at each threshold.
    pub fn estimate_link_coverage(
        &self,
        link: LinkType,
        thresholds: &[f64],
    ) -> Result<Vec<Option<EstimateWithCI>>, McError> {
        let batch = self.run(link.scenario())?;
        let ev = CoverageEvent::from(link.association());
        Ok(thresholds.iter().map(|&t| batch.coverage(t).conditional(ev)).collect())
    }

    /// Coverage of the typical user of the superposed user process: the two
    /// Palm scenarios weighted by λ_u and λ_l μ_u. A scenario with zero weight
    /// is not simulated.
    pub fn estimate_mixture_coverage(&self, thresholds: &[f64]) -> Result<Vec<EstimateWithCI>, McError> {
        let (wp, wv) = self.config.user_weights().ok_or(McError::DegenerateWeights)?;
        let planar = (wp > 0.0).then(|| self.run(PalmScenario::TypicalPlanarUser)).transpose()?;
        let vehicular = (wv > 0.0).then(|| self.run(PalmScenario::TypicalVehicularUser)).transpose()?;
        Ok(thresholds
            .iter()
            .map(|&t| match (&planar, &vehicular) {
                (Some(p), None) => p.coverage(t).total,
                (None, Some(v)) => v.coverage(t).total,
                (Some(p), Some(v)) => EstimateWithCI::combine(&[(wp, p.coverage(t).total), (wv, v.coverage(t).total)]),
                (None, None) => unreachable!("weights sum to one"),
            })
            .collect())
    }
}

/// Draws `n` unit-mean exponential fades; exposed for callers assembling
/// their own snapshots.
pub fn draw_fades<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| Exp1.sample(rng)).collect()
}
