//! Finite-window realizations of the planar Poisson process, the Poisson line
//! process and the Cox processes it carries, with the Palm conditioning of
//! each typical-user scenario.

use std::f64::consts::PI;
use std::io::Write;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{line_point, CoxPoint, LineParams, NetworkConfig, PalmScenario};

/// Default fraction of mean interference allowed to come from outside the
/// window.
pub const DEFAULT_TAIL_EPSILON: f64 = 1e-3;

/// Cap on the expected number of points per window; larger windows point at
/// a misconfiguration (alpha barely above 2, tiny epsilon).
pub const MAX_EXPECTED_POINTS: f64 = 5e6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WindowError {
    #[error("window radius must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("tail epsilon must lie in (0, 1), got {0}")]
    BadEpsilon(f64),
    #[error("no base stations: every base-station intensity is zero")]
    NoBaseStations,
    #[error("window of radius {radius} km would hold ~{expected_points:.3e} points")]
    TooLarge { radius: f64, expected_points: f64 },
    #[error("tail bound violated: ratio {ratio:e} ≥ epsilon {epsilon:e}")]
    TailBound { ratio: f64, epsilon: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GuardPolicy {
    FixedRadius,
    /// Radius chosen so that the mean interference from beyond the window is
    /// below `epsilon` times the mean interference from beyond the
    /// nearest-BS distance scale.
    TailBounded {
        epsilon: f64,
    },
}

/// Simulation disc `B(0, radius)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationWindow {
    pub radius: f64,
    pub guard: GuardPolicy,
}

impl SimulationWindow {
    pub fn fixed(radius: f64) -> Result<Self, WindowError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(WindowError::BadRadius(radius));
        }
        Ok(SimulationWindow { radius, guard: GuardPolicy::FixedRadius })
    }

    /// Smallest window meeting the Campbell tail bound for `config`.
    ///
    /// With planar-equivalent intensity λ = λ_b + λ_l μ_b the mean
    /// interference from beyond radius ρ is 2πλ ρ^{2−α}/(α−2), so the ratio
    /// against the nearest-BS scale r₀ = 1/(2√λ) is (R/r₀)^{2−α}.
    pub fn tail_bounded(config: &NetworkConfig, epsilon: f64) -> Result<Self, WindowError> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(WindowError::BadEpsilon(epsilon));
        }
        let lambda = config.lambda_b + config.cox_bs_intensity();
        let alpha = config.alpha;
        let (radius, ratio) = if lambda > 0.0 {
            let r0 = 0.5 / lambda.sqrt();
            // Nudge outward so the strict inequality survives rounding.
            let radius = r0 * epsilon.powf(-1.0 / (alpha - 2.0)) * (1.0 + 1e-9);
            (radius, planar_tail_ratio(radius, r0, alpha))
        } else if config.mu_b > 0.0 {
            // Only the road through the origin carries base stations: the
            // tail is one-dimensional, 2μ ρ^{1−α}/(α−1).
            let r0 = 0.5 / config.mu_b;
            let radius = r0 * epsilon.powf(-1.0 / (alpha - 1.0)) * (1.0 + 1e-9);
            (radius, (radius / r0).powf(1.0 - alpha))
        } else {
            return Err(WindowError::NoBaseStations);
        };
        if !(ratio < epsilon) {
            return Err(WindowError::TailBound { ratio, epsilon });
        }
        let expected_points = (lambda * PI * radius + 2.0 * config.mu_b) * radius;
        if !(expected_points <= MAX_EXPECTED_POINTS) {
            return Err(WindowError::TooLarge { radius, expected_points });
        }
        Ok(SimulationWindow { radius, guard: GuardPolicy::TailBounded { epsilon } })
    }

    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }

    pub fn contains(&self, xy: [f64; 2]) -> bool {
        xy[0].hypot(xy[1]) <= self.radius * (1.0 + 1e-12)
    }
}

/// Ratio of the planar mean-interference tail beyond `radius` to the tail
/// beyond `r0`.
pub fn planar_tail_ratio(radius: f64, r0: f64, alpha: f64) -> f64 {
    (radius / r0).powf(2.0 - alpha)
}

/// Angular law of the road directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AngularMeasure {
    /// Uniform on [0, π).
    Isotropic,
    /// Equal mass on {0, π/2}.
    Manhattan,
}

impl AngularMeasure {
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            AngularMeasure::Isotropic => rng.random::<f64>() * PI,
            AngularMeasure::Manhattan => {
                if rng.random::<bool>() {
                    0.0
                } else {
                    PI / 2.0
                }
            }
        }
    }
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let d = Poisson::new(mean).expect("finite positive Poisson mean");
    d.sample(rng) as usize
}

/// Homogeneous planar Poisson process restricted to the window.
pub fn sample_planar_ppp<R: Rng + ?Sized>(intensity: f64, window: &SimulationWindow, rng: &mut R) -> Vec<[f64; 2]> {
    let n = poisson_count(intensity * window.area(), rng);
    (0..n)
        .map(|_| {
            let rho = window.radius * rng.random::<f64>().sqrt();
            let phi = 2.0 * PI * rng.random::<f64>();
            let (s, c) = phi.sin_cos();
            [rho * c, rho * s]
        })
        .collect()
}

/// Roads hitting the window: the cylinder measure λ_l/π dr dθ restricted to
/// |r| ≤ R gives a Poisson(2 λ_l R) count with r uniform on [−R, R].
pub fn sample_line_process<R: Rng + ?Sized>(
    lambda_l: f64,
    angular: AngularMeasure,
    window: &SimulationWindow,
    rng: &mut R,
) -> Vec<LineParams> {
    let n = poisson_count(2.0 * lambda_l * window.radius, rng);
    (0..n)
        .map(|_| {
            let r = window.radius * (2.0 * rng.random::<f64>() - 1.0);
            let theta = angular.sample(rng);
            LineParams { r, theta }
        })
        .collect()
}

/// Independent linear Poisson processes of intensity `mu` on the chord of
/// each road through the window.
pub fn sample_cox_on_lines<R: Rng + ?Sized>(
    lines: &[LineParams],
    mu: f64,
    window: &SimulationWindow,
    rng: &mut R,
) -> Vec<CoxPoint> {
    let mut out = Vec::new();
    for line in lines {
        push_line_points(*line, mu, window, rng, &mut out);
    }
    out
}

fn push_line_points<R: Rng + ?Sized>(
    line: LineParams,
    mu: f64,
    window: &SimulationWindow,
    rng: &mut R,
    out: &mut Vec<CoxPoint>,
) {
    let Some(h) = line.half_chord(window.radius) else {
        return;
    };
    let n = poisson_count(2.0 * mu * h, rng);
    out.extend((0..n).map(|_| line_point(line, h * (2.0 * rng.random::<f64>() - 1.0))));
}

/// Per-trial random stream: ChaCha8 keyed by the master seed, with the trial
/// index as the stream id, so any trial can be replayed on its own.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// One network snapshot around the typical user at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub lines: Vec<LineParams>,
    /// Vehicular base stations, including those on `origin_line`.
    pub vehicular_bs: Vec<CoxPoint>,
    pub planar_bs: Vec<[f64; 2]>,
    /// Road through the origin, present under the vehicular-user Palm law.
    pub origin_line: Option<LineParams>,
    pub rng_seed: u64,
    pub stream: u64,
}

impl Realization {
    pub fn is_empty(&self) -> bool {
        self.vehicular_bs.is_empty() && self.planar_bs.is_empty()
    }

    pub fn base_station_count(&self) -> usize {
        self.vehicular_bs.len() + self.planar_bs.len()
    }

    /// Dumps the realization as CSV rows `kind,r,theta,t,x,y` with kinds
    /// `line`, `vbs` and `pbs`. Unused columns are left empty.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["kind", "r", "theta", "t", "x", "y"])?;
        let lines = self.origin_line.iter().chain(self.lines.iter());
        for l in lines {
            w.write_record(["line", &l.r.to_string(), &l.theta.to_string(), "", "", ""])?;
        }
        for p in &self.vehicular_bs {
            w.write_record([
                "vbs".to_string(),
                p.line.r.to_string(),
                p.line.theta.to_string(),
                p.t.to_string(),
                p.xy[0].to_string(),
                p.xy[1].to_string(),
            ])?;
        }
        for p in &self.planar_bs {
            w.write_record(["pbs", "", "", "", &p[0].to_string(), &p[1].to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Samples every base-station process in the window. Under
/// `TypicalPlanarUser` nothing is added (Slivnyak); under
/// `TypicalVehicularUser` a road through the origin with its own independent
/// base stations is added.
pub fn sample_realization(
    config: &NetworkConfig,
    scenario: PalmScenario,
    angular: AngularMeasure,
    window: &SimulationWindow,
    seed: u64,
    stream: u64,
) -> Realization {
    let mut rng = trial_rng(seed, stream);
    sample_realization_with(config, scenario, angular, window, &mut rng, seed, stream)
}

/// As [`sample_realization`], drawing from a caller-owned stream.
pub fn sample_realization_with<R: Rng + ?Sized>(
    config: &NetworkConfig,
    scenario: PalmScenario,
    angular: AngularMeasure,
    window: &SimulationWindow,
    rng: &mut R,
    seed: u64,
    stream: u64,
) -> Realization {
    let lines = sample_line_process(config.lambda_l, angular, window, rng);
    let mut vehicular_bs = sample_cox_on_lines(&lines, config.mu_b, window, rng);
    let origin_line = scenario.has_origin_line().then(|| {
        let l0 = LineParams::through_origin(angular.sample(rng));
        push_line_points(l0, config.mu_b, window, rng, &mut vehicular_bs);
        l0
    });
    let planar_bs = sample_planar_ppp(config.lambda_b, window, rng);
    Realization { lines, vehicular_bs, planar_bs, origin_line, rng_seed: seed, stream }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn win(r: f64) -> SimulationWindow {
        SimulationWindow::fixed(r).unwrap()
    }

    #[test]
    fn null_processes_are_empty() {
        let mut rng = trial_rng(1, 0);
        assert!(sample_planar_ppp(0.0, &win(1.0), &mut rng).is_empty());
        assert!(sample_line_process(0.0, AngularMeasure::Isotropic, &win(1.0), &mut rng).is_empty());
        let lines = [LineParams::new(0.0, 0.0)];
        assert!(sample_cox_on_lines(&lines, 0.0, &win(1.0), &mut rng).is_empty());
    }

    #[test]
    fn same_seed_same_points() {
        let a = sample_planar_ppp(10.0, &win(1.0), &mut trial_rng(7, 3));
        let b = sample_planar_ppp(10.0, &win(1.0), &mut trial_rng(7, 3));
        assert_eq!(a, b);
        let c = sample_planar_ppp(10.0, &win(1.0), &mut trial_rng(7, 4));
        assert_ne!(a, c);
    }

    #[test]
    fn manhattan_angles() {
        let mut rng = trial_rng(2, 0);
        let lines = sample_line_process(50.0, AngularMeasure::Manhattan, &win(2.0), &mut rng);
        assert!(!lines.is_empty());
        assert!(lines.iter().all(|l| l.theta == 0.0 || l.theta == PI / 2.0));
        let horizontal = lines.iter().filter(|l| l.theta == 0.0).count();
        assert!(horizontal > 0 && horizontal < lines.len());
    }

    #[test]
    fn points_stay_on_their_lines_and_in_window() {
        let w = win(1.5);
        let mut rng = trial_rng(3, 0);
        let lines = sample_line_process(10.0, AngularMeasure::Isotropic, &w, &mut rng);
        let pts = sample_cox_on_lines(&lines, 10.0, &w, &mut rng);
        assert!(!pts.is_empty());
        for p in &pts {
            assert!(p.line.signed_distance(p.xy).abs() < 1e-12);
            assert!(w.contains(p.xy));
        }
        for p in sample_planar_ppp(30.0, &w, &mut rng) {
            assert!(w.contains(p));
        }
    }

    #[test]
    fn realization_scenarios() {
        let cfg = NetworkConfig::default();
        let w = win(1.0);
        let r = sample_realization(&cfg, PalmScenario::TypicalPlanarUser, AngularMeasure::Isotropic, &w, 5, 0);
        assert!(r.origin_line.is_none());
        let r = sample_realization(&cfg, PalmScenario::TypicalVehicularUser, AngularMeasure::Isotropic, &w, 5, 0);
        let l0 = r.origin_line.expect("origin line");
        assert_eq!(l0.r, 0.0);
        for p in &r.vehicular_bs {
            assert!(r.lines.iter().chain([&l0]).any(|l| *l == p.line));
        }
        let again = sample_realization(&cfg, PalmScenario::TypicalVehicularUser, AngularMeasure::Isotropic, &w, 5, 0);
        assert_eq!(r, again);
    }

    #[test]
    fn zero_mu_vehicular_scenario() {
        let cfg = NetworkConfig { mu_b: 0.0, ..NetworkConfig::default() };
        let r =
            sample_realization(&cfg, PalmScenario::TypicalVehicularUser, AngularMeasure::Isotropic, &win(1.0), 9, 0);
        assert!(r.vehicular_bs.is_empty());
        assert!(!r.planar_bs.is_empty());
        assert!(r.origin_line.is_some());
    }

    #[test]
    fn tail_bounded_window() {
        let cfg = NetworkConfig::default();
        let w = SimulationWindow::tail_bounded(&cfg, 1e-3).unwrap();
        let r0 = 0.5 / (cfg.lambda_b + cfg.cox_bs_intensity()).sqrt();
        assert!(planar_tail_ratio(w.radius, r0, cfg.alpha) < 1e-3);
        // Just barely: a 1% smaller window breaks the bound.
        assert!(planar_tail_ratio(0.99 * w.radius, r0, cfg.alpha) > 1e-3);

        let only_origin_road = NetworkConfig { lambda_b: 0.0, lambda_l: 0.0, ..cfg };
        assert!(SimulationWindow::tail_bounded(&only_origin_road, 1e-3).is_ok());
        let none = NetworkConfig { lambda_b: 0.0, mu_b: 0.0, ..cfg };
        assert_eq!(SimulationWindow::tail_bounded(&none, 1e-3), Err(WindowError::NoBaseStations));
        let steep = NetworkConfig { alpha: 2.05, ..cfg };
        assert!(matches!(SimulationWindow::tail_bounded(&steep, 1e-3), Err(WindowError::TooLarge { .. })));
        assert!(SimulationWindow::tail_bounded(&cfg, 0.0).is_err());
        assert!(SimulationWindow::fixed(-1.0).is_err());
    }

    #[test]
    fn csv_dump() {
        let cfg = NetworkConfig { lambda_b: 3.0, lambda_l: 2.0, mu_b: 2.0, ..NetworkConfig::default() };
        let r =
            sample_realization(&cfg, PalmScenario::TypicalVehicularUser, AngularMeasure::Isotropic, &win(1.0), 1, 0);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut rows = text.lines();
        assert_eq!(rows.next(), Some("kind,r,theta,t,x,y"));
        let body: Vec<&str> = rows.collect();
        assert_eq!(body.len(), r.lines.len() + 1 + r.base_station_count());
        assert!(body.iter().filter(|l| l.starts_with("pbs,")).count() == r.planar_bs.len());
    }
}
