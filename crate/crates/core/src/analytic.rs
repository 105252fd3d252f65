//! Integral formulas for association, nearest-distance law and SIR coverage
//! under both Palm laws, evaluated with nested adaptive quadrature.
//!
//! All interference kernels are written in units of the serving distance r.
//! With `k(ρ²) = 1 / (1 + ρ^α / T)` (ρ measured in units of r) the Laplace
//! exponents reduce to
//!
//! * planar interferers: `π λ_b r² ρ_T` with `ρ_T = 2 ∫₁^∞ x k(x²) dx`,
//! * the road through the origin: `2 μ_b r σ_T` with `σ_T = ∫₁^∞ k(x²) dx`,
//! * a road at offset `r cos φ` hitting B(r): `2 μ_b r h(φ)`,
//!   `h(φ) = ∫_{sin φ}^∞ k(cos²φ + x²) dx`,
//! * a road at offset `w r`, w > 1, missing B(r): `2 μ_b r g(w)`,
//!   `g(w) = ∫₀^∞ k(w² + x²) dx`.
//!
//! `h` and `g` do not depend on r, so they are memoized per call on the
//! quadrature nodes of the middle integrals; every coverage evaluated from one
//! [`CoverageContext`] shares them.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ConfigError, LinkType, NetworkConfig, PalmScenario};
use crate::quadrature::{EndpointKind, Estimate, Integrand1D, Nesting, QuadError, QuadResult};

/// Exponent at which the void probability drops below 1e-16.
const VOID_CUTOFF: f64 = 16.0 * std::f64::consts::LN_10;

/// Association probabilities below this are treated as impossible events.
pub const CONDITIONING_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("no base stations: every base-station intensity is zero for the {0} user")]
    NoBaseStations(PalmScenario),
    #[error("{link} coverage is conditioned on an event of probability {probability:e}")]
    DegenerateConditioning { link: LinkType, probability: f64 },
    #[error("both user intensities are zero; the typical-user mixture is undefined")]
    DegenerateWeights,
    #[error("distance must be positive, got {0}")]
    BadDistance(f64),
}

/// A probability or density with its propagated quadrature error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticValue {
    pub value: f64,
    pub error_bound: f64,
}

impl AnalyticValue {
    pub fn exact(value: f64) -> Self {
        AnalyticValue { value, error_bound: 0.0 }
    }

    /// Within [−err, 1 + err].
    pub fn is_probability(&self) -> bool {
        self.value >= -self.error_bound && self.value <= 1.0 + self.error_bound
    }
}

impl From<QuadResult> for AnalyticValue {
    fn from(q: QuadResult) -> Self {
        AnalyticValue { value: q.value, error_bound: q.abs_error_estimate }
    }
}

impl From<Estimate> for AnalyticValue {
    fn from(e: Estimate) -> Self {
        AnalyticValue { value: e.value, error_bound: e.err }
    }
}

/// How the outer r-integral handles its infinite upper limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OuterRange {
    /// Integrate up to where the void probability falls below 1e-16.
    Truncated,
    /// Map [0, ∞) through r = s/(1 − s).
    RationalTransform,
}

#[derive(Debug, Clone)]
pub struct AnalyticOptions {
    pub nesting: Nesting,
    pub outer: OuterRange,
}

impl Default for AnalyticOptions {
    fn default() -> Self {
        AnalyticOptions { nesting: Nesting::standard(), outer: OuterRange::Truncated }
    }
}

/// `(P(X⋆ planar), P(X⋆ vehicular))`; the second is `1 −` the first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Association {
    pub to_planar: AnalyticValue,
    pub to_vehicular: AnalyticValue,
}

impl Association {
    fn from_planar(p: AnalyticValue) -> Self {
        Association { to_planar: p, to_vehicular: AnalyticValue { value: 1.0 - p.value, error_bound: p.error_bound } }
    }
}

/// Joint coverage of the vehicular user by vehicular base stations, split by
/// whether the serving station is on the user's own road.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicularSplit {
    pub same_line: AnalyticValue,
    pub other_line: AnalyticValue,
    pub total: AnalyticValue,
}

/// The four joint coverage probabilities at one threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointCoverages {
    /// P⁰_{Φu}(SIR > T, X⋆ ∈ Φ_b).
    pub planar_user_planar_bs: AnalyticValue,
    /// P⁰_{Φu}(SIR > T, X⋆ ∈ Ψ_b).
    pub planar_user_vehicular_bs: AnalyticValue,
    /// P⁰_{Ψu}(SIR > T, X⋆ ∈ Φ_b).
    pub vehicular_user_planar_bs: AnalyticValue,
    /// P⁰_{Ψu}(SIR > T, X⋆ ∈ Ψ_b) with its road split.
    pub vehicular_user_vehicular_bs: VehicularSplit,
}

impl JointCoverages {
    pub fn scenario_total(&self, scenario: PalmScenario) -> AnalyticValue {
        match scenario {
            PalmScenario::TypicalPlanarUser => add(self.planar_user_planar_bs, self.planar_user_vehicular_bs),
            PalmScenario::TypicalVehicularUser => {
                add(self.vehicular_user_planar_bs, self.vehicular_user_vehicular_bs.total)
            }
        }
    }
}

fn add(a: AnalyticValue, b: AnalyticValue) -> AnalyticValue {
    AnalyticValue { value: a.value + b.value, error_bound: a.error_bound + b.error_bound }
}

fn scale(w: f64, a: AnalyticValue) -> AnalyticValue {
    AnalyticValue { value: w * a.value, error_bound: w.abs() * a.error_bound }
}

fn has_base_stations(config: &NetworkConfig, scenario: PalmScenario) -> bool {
    config.lambda_b > 0.0 || config.cox_bs_intensity() > 0.0 || (scenario.has_origin_line() && config.mu_b > 0.0)
}

/// `1 − e^{−x}` without cancellation for small x.
fn one_minus_exp_neg(x: f64) -> f64 {
    -(-x).exp_m1()
}

/// Per-r exponents shared across coverages.
#[derive(Debug, Clone, Copy)]
struct RadialTerms {
    /// Roads hitting B(r): void plus interference, `2λ_l ∫₀^r (1 − e^{…}) dv`.
    near: Estimate,
    /// Roads missing B(r): interference only, `2λ_l ∫_r^∞ (1 − e^{…}) dv`.
    far: Estimate,
    /// Serving-road angle integral `∫₀^{π/2} e^{−2μ_b r (sin θ + h(θ))} dθ`.
    serving: Estimate,
}

/// Evaluation state for one parameter set. Holds the per-call memo tables;
/// create one per configuration and drop it afterwards.
pub struct CoverageContext {
    config: NetworkConfig,
    opts: AnalyticOptions,
    planar_const: Estimate,
    origin_const: Estimate,
    near_kernel: RefCell<HashMap<u64, Estimate>>,
    far_kernel: RefCell<HashMap<u64, Estimate>>,
    radial: RefCell<HashMap<u64, RadialTerms>>,
}

impl CoverageContext {
    pub fn new(config: &NetworkConfig) -> Result<Self, AnalyticError> {
        Self::with_options(config, AnalyticOptions::default())
    }

    pub fn with_options(config: &NetworkConfig, opts: AnalyticOptions) -> Result<Self, AnalyticError> {
        let config = config.validate()?;
        let inner = opts.nesting.level(opts.nesting.depth() - 1);
        let (alpha, t) = (config.alpha, config.threshold);
        let planar = inner.integrate(
            &Integrand1D::new(EndpointKind::AlgebraicTail { decay: alpha - 1.0 }, move |x: f64| {
                Ok(Estimate::exact(2.0 * x / (1.0 + x.powf(alpha) / t)))
            }),
            1.0,
            f64::INFINITY,
        )?;
        let origin = inner.integrate(
            &Integrand1D::new(EndpointKind::AlgebraicTail { decay: alpha }, move |x: f64| {
                Ok(Estimate::exact(1.0 / (1.0 + x.powf(alpha) / t)))
            }),
            1.0,
            f64::INFINITY,
        )?;
        Ok(CoverageContext {
            config,
            opts,
            planar_const: planar.into(),
            origin_const: origin.into(),
            near_kernel: RefCell::new(HashMap::new()),
            far_kernel: RefCell::new(HashMap::new()),
            radial: RefCell::new(HashMap::new()),
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    /// `ρ_T = 2 ∫₁^∞ x/(1 + x^α/T) dx`; the planar interference exponent is
    /// `π λ_b r² ρ_T`.
    pub fn planar_interference_constant(&self) -> Estimate {
        self.planar_const
    }

    fn kernel(&self, rho2: f64) -> f64 {
        1.0 / (1.0 + rho2.powf(0.5 * self.config.alpha) / self.config.threshold)
    }

    /// Tail class of the interference kernel along a road.
    fn line_tail(&self) -> EndpointKind {
        EndpointKind::AlgebraicTail { decay: self.config.alpha }
    }

    fn inner_level(&self) -> crate::quadrature::Quadrature {
        self.opts.nesting.level(self.opts.nesting.depth() - 1)
    }

    fn middle_level(&self) -> crate::quadrature::Quadrature {
        let d = self.opts.nesting.depth();
        self.opts.nesting.level(d.saturating_sub(2))
    }

    fn outer_level(&self) -> crate::quadrature::Quadrature {
        self.opts.nesting.level(0)
    }

    /// `h(φ) = ∫_{sin φ}^∞ k(cos²φ + x²) dx`.
    fn near_kernel(&self, phi: f64) -> Result<Estimate, QuadError> {
        if let Some(e) = self.near_kernel.borrow().get(&phi.to_bits()) {
            return Ok(*e);
        }
        let (s, c) = phi.sin_cos();
        let c2 = c * c;
        let res = self.inner_level().integrate(
            &Integrand1D::new(self.line_tail(), |x: f64| Ok(Estimate::exact(self.kernel(c2 + x * x)))),
            s,
            f64::INFINITY,
        )?;
        let e = Estimate::from(res);
        self.near_kernel.borrow_mut().insert(phi.to_bits(), e);
        Ok(e)
    }

    /// `g(w) = ∫₀^∞ k(w² + x²) dx`.
    fn far_kernel(&self, w: f64) -> Result<Estimate, QuadError> {
        if let Some(e) = self.far_kernel.borrow().get(&w.to_bits()) {
            return Ok(*e);
        }
        let w2 = w * w;
        let res = self.inner_level().integrate(
            &Integrand1D::new(self.line_tail(), |x: f64| Ok(Estimate::exact(self.kernel(w2 + x * x)))),
            0.0,
            f64::INFINITY,
        )?;
        let e = Estimate::from(res);
        self.far_kernel.borrow_mut().insert(w.to_bits(), e);
        Ok(e)
    }

    fn radial_terms(&self, r: f64) -> Result<RadialTerms, QuadError> {
        if let Some(t) = self.radial.borrow().get(&r.to_bits()) {
            return Ok(*t);
        }
        let cfg = &self.config;
        let zero = Estimate::exact(0.0);
        let terms = if cfg.lambda_l == 0.0 || cfg.mu_b == 0.0 || r == 0.0 {
            RadialTerms { near: zero, far: zero, serving: Estimate::exact(FRAC_PI_2) }
        } else {
            let m = 2.0 * cfg.mu_b * r;
            let middle = self.middle_level();
            // Roads at offset v = r cos φ from the origin; the chord inside
            // B(r) has half-length r sin φ and dv = r sin φ dφ.
            let near = middle.integrate(
                &Integrand1D::new(EndpointKind::Regular, |phi: f64| {
                    let h = self.near_kernel(phi)?;
                    let s = phi.sin();
                    let a = m * (s + h.value);
                    Ok(Estimate::new(one_minus_exp_neg(a) * s, m * (-a).exp() * s * h.err))
                }),
                0.0,
                FRAC_PI_2,
            )?;
            // Roads at offset w r, w > 1.
            let far = middle.integrate(
                &Integrand1D::new(EndpointKind::AlgebraicTail { decay: cfg.alpha - 1.0 }, |w: f64| {
                    let g = self.far_kernel(w)?;
                    let a = m * g.value;
                    Ok(Estimate::new(one_minus_exp_neg(a), m * (-a).exp() * g.err))
                }),
                1.0,
                f64::INFINITY,
            )?;
            let serving = middle.integrate(
                &Integrand1D::new(EndpointKind::Regular, |theta: f64| {
                    let h = self.near_kernel(theta)?;
                    let e = (-m * (theta.sin() + h.value)).exp();
                    Ok(Estimate::new(e, m * e * h.err))
                }),
                0.0,
                FRAC_PI_2,
            )?;
            let l = 2.0 * cfg.lambda_l * r;
            RadialTerms {
                near: Estimate::new(l * near.value, l * near.abs_error_estimate),
                far: Estimate::new(l * far.value, l * far.abs_error_estimate),
                serving: serving.into(),
            }
        };
        self.radial.borrow_mut().insert(r.to_bits(), terms);
        Ok(terms)
    }

    /// `V(r) = 2λ_l ∫₀^r (1 − e^{−2μ_b √(r² − t²)}) dt`, the Cox void exponent
    /// of B(r).
    pub fn cox_void_exponent(&self, r: f64) -> Result<Estimate, QuadError> {
        let cfg = &self.config;
        if cfg.lambda_l == 0.0 || cfg.mu_b == 0.0 || r == 0.0 {
            return Ok(Estimate::exact(0.0));
        }
        let m = 2.0 * cfg.mu_b * r;
        let res = self.middle_level().integrate(
            &Integrand1D::new(EndpointKind::Regular, |phi: f64| {
                let s = phi.sin();
                Ok(Estimate::exact(one_minus_exp_neg(m * s) * s))
            }),
            0.0,
            FRAC_PI_2,
        )?;
        let l = 2.0 * cfg.lambda_l * r;
        Ok(Estimate::new(l * res.value, l * res.abs_error_estimate))
    }

    /// `V'(r) = 4 λ_l μ_b r ∫₀^{π/2} e^{−2μ_b r sin φ} dφ`, the hazard of the
    /// nearest vehicular base station.
    pub fn cox_void_hazard(&self, r: f64) -> Result<Estimate, QuadError> {
        let cfg = &self.config;
        if cfg.lambda_l == 0.0 || cfg.mu_b == 0.0 {
            return Ok(Estimate::exact(0.0));
        }
        let m = 2.0 * cfg.mu_b * r;
        let res = self.middle_level().integrate(
            &Integrand1D::new(EndpointKind::Regular, |phi: f64| Ok(Estimate::exact((-m * phi.sin()).exp()))),
            0.0,
            FRAC_PI_2,
        )?;
        let c = 4.0 * cfg.lambda_l * cfg.mu_b * r;
        Ok(Estimate::new(c * res.value, c * res.abs_error_estimate))
    }

    /// Log of the probability that B(r) holds no base station.
    pub fn void_exponent(&self, scenario: PalmScenario, r: f64) -> Result<Estimate, QuadError> {
        let v = self.cox_void_exponent(r)?;
        let mut value = PI * self.config.lambda_b * r * r + v.value;
        if scenario.has_origin_line() {
            value += 2.0 * self.config.mu_b * r;
        }
        Ok(Estimate::new(value, v.err))
    }

    /// Radius beyond which the void probability is below 1e-16.
    fn cutoff_radius(&self, scenario: PalmScenario) -> Result<f64, AnalyticError> {
        if !has_base_stations(&self.config, scenario) {
            return Err(AnalyticError::NoBaseStations(scenario));
        }
        let exceeds =
            |r: f64| -> Result<bool, AnalyticError> { Ok(self.void_exponent(scenario, r)?.value >= VOID_CUTOFF) };
        let mut hi = 1e-3;
        while !exceeds(hi)? {
            hi *= 2.0;
            if hi > 1e9 {
                return Err(AnalyticError::NoBaseStations(scenario));
            }
        }
        let mut lo = 0.5 * hi;
        for _ in 0..30 {
            let mid = 0.5 * (lo + hi);
            if exceeds(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    fn integrate_outer<F>(&self, scenario: PalmScenario, f: F) -> Result<AnalyticValue, AnalyticError>
    where
        F: Fn(f64) -> Result<Estimate, QuadError>,
    {
        let q = self.outer_level();
        let res = match self.opts.outer {
            OuterRange::Truncated => {
                let r_max = self.cutoff_radius(scenario)?;
                q.integrate(&Integrand1D::new(EndpointKind::Regular, f), 0.0, r_max)?
            }
            OuterRange::RationalTransform => {
                if !has_base_stations(&self.config, scenario) {
                    return Err(AnalyticError::NoBaseStations(scenario));
                }
                q.integrate(&Integrand1D::new(EndpointKind::SemiInfinite, f), 0.0, f64::INFINITY)?
            }
        };
        Ok(res.into())
    }

    /// Exponent of every coverage integrand at serving distance r: planar
    /// void and interference, both road families, and for the vehicular user
    /// the void and interference of its own road.
    fn coverage_exponent(&self, scenario: PalmScenario, r: f64) -> Result<(Estimate, RadialTerms), QuadError> {
        let cfg = &self.config;
        let terms = self.radial_terms(r)?;
        let pl = PI * cfg.lambda_b * r * r;
        let mut value = pl * (1.0 + self.planar_const.value) + terms.near.value + terms.far.value;
        let mut err = pl * self.planar_const.err + terms.near.err + terms.far.err;
        if scenario.has_origin_line() {
            let m = 2.0 * cfg.mu_b * r;
            value += m * (1.0 + self.origin_const.value);
            err += m * self.origin_const.err;
        }
        Ok((Estimate::new(value, err), terms))
    }

    fn planar_bs_joint(&self, scenario: PalmScenario) -> Result<AnalyticValue, AnalyticError> {
        let lb = self.config.lambda_b;
        if lb == 0.0 {
            return Ok(AnalyticValue::exact(0.0));
        }
        self.integrate_outer(scenario, |r| {
            let (e, _) = self.coverage_exponent(scenario, r)?;
            let v = 2.0 * PI * lb * r * (-e.value).exp();
            Ok(Estimate::new(v, v * e.err))
        })
    }

    /// Serving station on another road, found through the angle of that road.
    fn other_road_joint(&self, scenario: PalmScenario) -> Result<AnalyticValue, AnalyticError> {
        let c = 4.0 * self.config.cox_bs_intensity();
        if c == 0.0 {
            return Ok(AnalyticValue::exact(0.0));
        }
        self.integrate_outer(scenario, |r| {
            let (e, terms) = self.coverage_exponent(scenario, r)?;
            let base = c * r * (-e.value).exp();
            let v = base * terms.serving.value;
            Ok(Estimate::new(v, v * e.err + base * terms.serving.err))
        })
    }

    /// P⁰_{Φu}(SIR > T, X⋆ ∈ Φ_b).
    pub fn cov_planar_user_planar_bs(&self) -> Result<AnalyticValue, AnalyticError> {
        self.planar_bs_joint(PalmScenario::TypicalPlanarUser)
    }

    /// P⁰_{Φu}(SIR > T, X⋆ ∈ Ψ_b).
    pub fn cov_planar_user_vehicular_bs(&self) -> Result<AnalyticValue, AnalyticError> {
        self.other_road_joint(PalmScenario::TypicalPlanarUser)
    }

    /// P⁰_{Ψu}(SIR > T, X⋆ ∈ Φ_b).
    pub fn cov_vehicular_user_planar_bs(&self) -> Result<AnalyticValue, AnalyticError> {
        self.planar_bs_joint(PalmScenario::TypicalVehicularUser)
    }

    /// P⁰_{Ψu}(SIR > T, X⋆ ∈ Ψ_b), split by the serving road.
    pub fn cov_vehicular_user_vehicular_bs(&self) -> Result<VehicularSplit, AnalyticError> {
        let scenario = PalmScenario::TypicalVehicularUser;
        let mu = self.config.mu_b;
        let same_line = if mu == 0.0 {
            AnalyticValue::exact(0.0)
        } else {
            self.integrate_outer(scenario, |r| {
                let (e, _) = self.coverage_exponent(scenario, r)?;
                let v = 2.0 * mu * (-e.value).exp();
                Ok(Estimate::new(v, v * e.err))
            })?
        };
        let other_line = self.other_road_joint(scenario)?;
        Ok(VehicularSplit { same_line, other_line, total: add(same_line, other_line) })
    }

    pub fn joint_coverages(&self) -> Result<JointCoverages, AnalyticError> {
        Ok(JointCoverages {
            planar_user_planar_bs: self.cov_planar_user_planar_bs()?,
            planar_user_vehicular_bs: self.cov_planar_user_vehicular_bs()?,
            vehicular_user_planar_bs: self.cov_vehicular_user_planar_bs()?,
            vehicular_user_vehicular_bs: self.cov_vehicular_user_vehicular_bs()?,
        })
    }

    /// Association probabilities of the typical user of `scenario`.
    pub fn association(&self, scenario: PalmScenario) -> Result<Association, AnalyticError> {
        let cfg = &self.config;
        let vehicular_exists = match scenario {
            PalmScenario::TypicalPlanarUser => cfg.cox_bs_intensity() > 0.0,
            PalmScenario::TypicalVehicularUser => cfg.mu_b > 0.0,
        };
        if !vehicular_exists {
            if cfg.lambda_b == 0.0 {
                return Err(AnalyticError::NoBaseStations(scenario));
            }
            return Ok(Association::from_planar(AnalyticValue::exact(1.0)));
        }
        if cfg.lambda_b == 0.0 {
            return Ok(Association::from_planar(AnalyticValue::exact(0.0)));
        }
        let lb = cfg.lambda_b;
        let p = self.integrate_outer(scenario, |r| {
            let e = self.void_exponent(scenario, r)?;
            let v = 2.0 * PI * lb * r * (-e.value).exp();
            Ok(Estimate::new(v, v * e.err))
        })?;
        Ok(Association::from_planar(p))
    }

    /// P(X⋆ ∈ Ψ_b) integrated directly from the vehicular hazard, as an
    /// independent check on the complement.
    pub fn association_vehicular_direct(&self, scenario: PalmScenario) -> Result<AnalyticValue, AnalyticError> {
        let mu = if scenario.has_origin_line() { self.config.mu_b } else { 0.0 };
        if self.config.cox_bs_intensity() == 0.0 && mu == 0.0 {
            return Ok(AnalyticValue::exact(0.0));
        }
        self.integrate_outer(scenario, |r| {
            let e = self.void_exponent(scenario, r)?;
            let hz = self.cox_void_hazard(r)?;
            let s = (-e.value).exp();
            Ok(Estimate::new((2.0 * mu + hz.value) * s, (2.0 * mu + hz.value) * s * e.err + hz.err * s))
        })
    }

    /// Hazard of the serving distance at r: planar, origin-road and Cox parts.
    fn hazard(&self, scenario: PalmScenario, r: f64) -> Result<Estimate, QuadError> {
        let hz = self.cox_void_hazard(r)?;
        let mut v = 2.0 * PI * self.config.lambda_b * r + hz.value;
        if scenario.has_origin_line() {
            v += 2.0 * self.config.mu_b;
        }
        Ok(Estimate::new(v, hz.err))
    }

    /// Density of the serving distance at r: hazard × survival of the minimum
    /// of the independent planar and vehicular nearest distances.
    pub fn nearest_dist_pdf(&self, scenario: PalmScenario, r: f64) -> Result<AnalyticValue, AnalyticError> {
        if !(r > 0.0) {
            return Err(AnalyticError::BadDistance(r));
        }
        if !has_base_stations(&self.config, scenario) {
            return Err(AnalyticError::NoBaseStations(scenario));
        }
        let e = self.void_exponent(scenario, r)?;
        let h = self.hazard(scenario, r)?;
        let s = (-e.value).exp();
        Ok(AnalyticValue { value: h.value * s, error_bound: h.value * s * e.err + h.err * s })
    }

    pub fn nearest_dist_cdf(&self, scenario: PalmScenario, r: f64) -> Result<AnalyticValue, AnalyticError> {
        if !(r >= 0.0) {
            return Err(AnalyticError::BadDistance(r));
        }
        let e = self.void_exponent(scenario, r)?;
        let s = (-e.value).exp();
        Ok(AnalyticValue { value: one_minus_exp_neg(e.value), error_bound: s * e.err })
    }

    /// Means of the serving distance and of its parts.
    pub fn nearest_dist_means(&self, scenario: PalmScenario) -> Result<DistanceMeans, AnalyticError> {
        let cfg = self.config;
        let serving = self.integrate_outer(scenario, |r| {
            let e = self.void_exponent(scenario, r)?;
            let s = (-e.value).exp();
            Ok(Estimate::new(s, s * e.err))
        })?;
        let nearest_planar = (cfg.lambda_b > 0.0).then(|| AnalyticValue::exact(0.5 / cfg.lambda_b.sqrt()));
        let vehicular_exists = cfg.cox_bs_intensity() > 0.0 || (scenario.has_origin_line() && cfg.mu_b > 0.0);
        let nearest_vehicular = if vehicular_exists {
            let only_roads = NetworkConfig { lambda_b: 0.0, ..cfg };
            let ctx = CoverageContext::with_options(&only_roads, self.opts.clone())?;
            Some(ctx.integrate_outer(scenario, |r| {
                let e = ctx.void_exponent(scenario, r)?;
                let s = (-e.value).exp();
                Ok(Estimate::new(s, s * e.err))
            })?)
        } else {
            None
        };
        let assoc = self.association(scenario)?;
        let given_planar = if cfg.lambda_b > 0.0 && assoc.to_planar.value > CONDITIONING_FLOOR {
            let num = self.integrate_outer(scenario, |r| {
                let e = self.void_exponent(scenario, r)?;
                let v = r * 2.0 * PI * cfg.lambda_b * r * (-e.value).exp();
                Ok(Estimate::new(v, v * e.err))
            })?;
            Some(ratio(num, assoc.to_planar))
        } else {
            None
        };
        let given_vehicular = if vehicular_exists && assoc.to_vehicular.value > CONDITIONING_FLOOR {
            let mu = if scenario.has_origin_line() { cfg.mu_b } else { 0.0 };
            let num = self.integrate_outer(scenario, |r| {
                let e = self.void_exponent(scenario, r)?;
                let hz = self.cox_void_hazard(r)?;
                let s = (-e.value).exp();
                let v = r * (2.0 * mu + hz.value) * s;
                Ok(Estimate::new(v, v * e.err + r * hz.err * s))
            })?;
            Some(ratio(num, assoc.to_vehicular))
        } else {
            None
        };
        Ok(DistanceMeans { serving, nearest_planar, nearest_vehicular, given_planar, given_vehicular })
    }
}

fn ratio(num: AnalyticValue, den: AnalyticValue) -> AnalyticValue {
    let q = num.value / den.value;
    AnalyticValue { value: q, error_bound: (num.error_bound + q.abs() * den.error_bound) / den.value }
}

/// Mean distances (km) under one Palm law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceMeans {
    /// E[‖X⋆‖].
    pub serving: AnalyticValue,
    /// E[distance to the nearest planar BS], 1/(2√λ_b).
    pub nearest_planar: Option<AnalyticValue>,
    /// E[distance to the nearest vehicular BS].
    pub nearest_vehicular: Option<AnalyticValue>,
    /// E[‖X⋆‖ | X⋆ ∈ Φ_b].
    pub given_planar: Option<AnalyticValue>,
    /// E[‖X⋆‖ | X⋆ ∈ Ψ_b].
    pub given_vehicular: Option<AnalyticValue>,
}

pub fn assoc_planar_user(config: &NetworkConfig) -> Result<Association, AnalyticError> {
    CoverageContext::new(config)?.association(PalmScenario::TypicalPlanarUser)
}

pub fn assoc_vehicular_user(config: &NetworkConfig) -> Result<Association, AnalyticError> {
    CoverageContext::new(config)?.association(PalmScenario::TypicalVehicularUser)
}

pub fn nearest_dist_pdf_planar_user(config: &NetworkConfig, r: f64) -> Result<AnalyticValue, AnalyticError> {
    CoverageContext::new(config)?.nearest_dist_pdf(PalmScenario::TypicalPlanarUser, r)
}

pub fn nearest_dist_pdf_vehicular_user(config: &NetworkConfig, r: f64) -> Result<AnalyticValue, AnalyticError> {
    CoverageContext::new(config)?.nearest_dist_pdf(PalmScenario::TypicalVehicularUser, r)
}

pub fn cov_planar_user_planar_bs(config: &NetworkConfig) -> Result<AnalyticValue, AnalyticError> {
    CoverageContext::new(config)?.cov_planar_user_planar_bs()
}

pub fn cov_planar_user_vehicular_bs(config: &NetworkConfig) -> Result<AnalyticValue, AnalyticError> {
    CoverageContext::new(config)?.cov_planar_user_vehicular_bs()
}

pub fn cov_vehicular_user_planar_bs(config: &NetworkConfig) -> Result<AnalyticValue, AnalyticError> {
    CoverageContext::new(config)?.cov_vehicular_user_planar_bs()
}

pub fn cov_vehicular_user_vehicular_bs(config: &NetworkConfig) -> Result<VehicularSplit, AnalyticError> {
    CoverageContext::new(config)?.cov_vehicular_user_vehicular_bs()
}

pub fn joint_coverages(config: &NetworkConfig) -> Result<JointCoverages, AnalyticError> {
    CoverageContext::new(config)?.joint_coverages()
}

/// Coverage of the typical user of the superposed user process.
pub fn theorem1_total_coverage(config: &NetworkConfig) -> Result<AnalyticValue, AnalyticError> {
    let config = config.validate()?;
    let (wp, wv) = config.user_weights().ok_or(AnalyticError::DegenerateWeights)?;
    let ctx = CoverageContext::new(&config)?;
    let mut total = AnalyticValue::exact(0.0);
    if wp > 0.0 {
        let a = ctx.cov_planar_user_planar_bs()?;
        let b = ctx.cov_planar_user_vehicular_bs()?;
        total = add(total, scale(wp, add(a, b)));
    }
    if wv > 0.0 {
        let c = ctx.cov_vehicular_user_planar_bs()?;
        let d = ctx.cov_vehicular_user_vehicular_bs()?.total;
        total = add(total, scale(wv, add(c, d)));
    }
    Ok(total)
}

/// Coverage of one link type: joint coverage over association probability.
pub fn link_coverage(config: &NetworkConfig, link: LinkType) -> Result<AnalyticValue, AnalyticError> {
    let ctx = CoverageContext::new(config)?;
    link_coverage_in(&ctx, link)
}

pub fn link_coverage_in(ctx: &CoverageContext, link: LinkType) -> Result<AnalyticValue, AnalyticError> {
    let assoc = match ctx.association(link.scenario()) {
        Ok(a) => a,
        Err(AnalyticError::NoBaseStations(_)) => {
            return Err(AnalyticError::DegenerateConditioning { link, probability: 0.0 })
        }
        Err(e) => return Err(e),
    };
    let p = match link.association() {
        crate::model::AssociationEvent::ToPlanar => assoc.to_planar,
        crate::model::AssociationEvent::ToVehicular => assoc.to_vehicular,
    };
    if !(p.value > CONDITIONING_FLOOR) {
        return Err(AnalyticError::DegenerateConditioning { link, probability: p.value });
    }
    let joint = match link {
        LinkType::V2V => ctx.cov_vehicular_user_vehicular_bs()?.total,
        LinkType::I2V => ctx.cov_vehicular_user_planar_bs()?,
        LinkType::V2I => ctx.cov_planar_user_vehicular_bs()?,
        LinkType::I2I => ctx.cov_planar_user_planar_bs()?,
    };
    Ok(ratio(joint, p))
}

/// P⁰_{Φu}(SIR > T, X⋆ ∈ Ψ_b) through the Palm law of the vehicular base
/// stations: `λ_l μ_b ∫_{ℝ²} A(x) B(x) C(x) dx` with the planar factor A, the
/// other-roads factor B and the serving-road factor C (uniform road angle),
/// all evaluated in raw km coordinates.
pub fn cov_planar_user_vehicular_bs_appendix(config: &NetworkConfig) -> Result<AnalyticValue, AnalyticError> {
    cov_planar_user_vehicular_bs_appendix_with(config, AnalyticOptions::default())
}

pub fn cov_planar_user_vehicular_bs_appendix_with(
    config: &NetworkConfig,
    opts: AnalyticOptions,
) -> Result<AnalyticValue, AnalyticError> {
    let cfg = config.validate()?;
    if cfg.cox_bs_intensity() == 0.0 {
        return Ok(AnalyticValue::exact(0.0));
    }
    let scenario = PalmScenario::TypicalPlanarUser;
    let ctx = CoverageContext::with_options(&cfg, opts.clone())?;
    let nesting = &opts.nesting;
    let depth = nesting.depth();
    let outer = nesting.level(0);
    let middle = nesting.level(depth.saturating_sub(2));
    let inner = nesting.level(depth - 1);
    let (alpha, t, lb, ll, mu) = (cfg.alpha, cfg.threshold, cfg.lambda_b, cfg.lambda_l, cfg.mu_b);

    // Interference kernel T ρ^α d^{-α} / (1 + T ρ^α d^{-α}) at squared distance d2.
    let planar_tail = EndpointKind::AlgebraicTail { decay: alpha - 1.0 };
    let line_tail = EndpointKind::AlgebraicTail { decay: alpha };
    let kernel = |rho: f64, d2: f64| 1.0 / (1.0 + (d2 / (rho * rho)).powf(0.5 * alpha) / t);

    let integrand = |rho: f64| -> Result<Estimate, QuadError> {
        if rho == 0.0 {
            return Ok(Estimate::exact(0.0));
        }
        // Planar factor.
        let planar = if lb > 0.0 {
            middle.integrate(
                &Integrand1D::new(planar_tail, |u: f64| Ok(Estimate::exact(u * kernel(rho, u * u)))),
                rho,
                f64::INFINITY,
            )?
        } else {
            QuadResult { value: 0.0, abs_error_estimate: 0.0, function_evals: 0 }
        };
        let a_exp = Estimate::new(
            PI * lb * rho * rho + 2.0 * PI * lb * planar.value,
            2.0 * PI * lb * planar.abs_error_estimate,
        );

        // Other roads: those crossing B(ρ) (offset u < ρ) and those missing it.
        let crossing = middle.integrate(
            &Integrand1D::new(EndpointKind::Regular, |u: f64| {
                let half = (rho * rho - u * u).max(0.0).sqrt();
                let lap = inner.integrate(
                    &Integrand1D::new(line_tail, |v: f64| Ok(Estimate::exact(kernel(rho, u * u + v * v)))),
                    half,
                    f64::INFINITY,
                )?;
                let a = 2.0 * mu * half + 2.0 * mu * lap.value;
                Ok(Estimate::new(one_minus_exp_neg(a), (-a).exp() * 2.0 * mu * lap.abs_error_estimate))
            }),
            0.0,
            rho,
        )?;
        let missing = middle.integrate(
            &Integrand1D::new(planar_tail, |u: f64| {
                let lap = inner.integrate(
                    &Integrand1D::new(line_tail, |v: f64| Ok(Estimate::exact(kernel(rho, u * u + v * v)))),
                    0.0,
                    f64::INFINITY,
                )?;
                let a = 2.0 * mu * lap.value;
                Ok(Estimate::new(one_minus_exp_neg(a), (-a).exp() * 2.0 * mu * lap.abs_error_estimate))
            }),
            rho,
            f64::INFINITY,
        )?;
        let b_exp = Estimate::new(
            2.0 * ll * (crossing.value + missing.value),
            2.0 * ll * (crossing.abs_error_estimate + missing.abs_error_estimate),
        );

        // Serving road through the station, angle θ against the segment to
        // the user. With the user at distance ρ, the road passes at distance
        // ρ|cos θ| from the user and the protected disc cuts a chord of
        // half-length ρ|sin θ| centred at arc position ρ sin θ.
        let serving_side = |theta: f64| -> Result<Estimate, QuadError> {
            let (s, c) = theta.sin_cos();
            let d2 = rho * rho * c * c;
            let s0 = rho * s;
            let w = rho * s.abs();
            let fwd = inner.integrate(
                &Integrand1D::new(line_tail, |x: f64| {
                    let ds = x - s0;
                    Ok(Estimate::exact(kernel(rho, d2 + ds * ds)))
                }),
                s0 + w,
                f64::INFINITY,
            )?;
            let back = inner.integrate(
                &Integrand1D::new(line_tail, |x: f64| {
                    let ds = x + s0;
                    Ok(Estimate::exact(kernel(rho, d2 + ds * ds)))
                }),
                w - s0,
                f64::INFINITY,
            )?;
            let a = 2.0 * mu * w + mu * (fwd.value + back.value);
            let e = (-a).exp();
            Ok(Estimate::new(e, e * mu * (fwd.abs_error_estimate + back.abs_error_estimate)))
        };
        let c1 = middle.integrate(&Integrand1D::new(EndpointKind::Regular, serving_side), 0.0, FRAC_PI_2)?;
        let c2 = middle.integrate(&Integrand1D::new(EndpointKind::Regular, serving_side), FRAC_PI_2, PI)?;
        let c_val = c1.value + c2.value;
        let c_err = c1.abs_error_estimate + c2.abs_error_estimate;

        // λ_l μ_b · 2πρ · (1/π) ∫₀^π …
        let pref = 2.0 * ll * mu * rho;
        let ab = (-(a_exp.value + b_exp.value)).exp();
        let v = pref * ab * c_val;
        Ok(Estimate::new(v, v * (a_exp.err + b_exp.err) + pref * ab * c_err))
    };

    let res = match opts.outer {
        OuterRange::Truncated => {
            let r_max = ctx.cutoff_radius(scenario)?;
            outer.integrate(&Integrand1D::new(EndpointKind::Regular, integrand), 0.0, r_max)?
        }
        OuterRange::RationalTransform => {
            outer.integrate(&Integrand1D::new(EndpointKind::SemiInfinite, integrand), 0.0, f64::INFINITY)?
        }
    };
    Ok(res.into())
}

/// Classical interference-limited Poisson cellular coverage for α = 4:
/// `1 / (1 + √T (π/2 − arctan(1/√T)))`.
pub fn poisson_cellular_coverage_alpha4(threshold: f64) -> f64 {
    let s = threshold.sqrt();
    1.0 / (1.0 + s * (FRAC_PI_2 - (1.0 / s).atan()))
}
