//! Adaptive Gauss–Kronrod quadrature for the one- to three-level nested
//! integrals of the analytic engine.
//!
//! A single rule pair (Gauss 10 / Kronrod 21) is used on every panel; the
//! panel with the largest error estimate is bisected until the global
//! estimate meets the tolerance. Semi-infinite ranges and inverse square-root
//! endpoint singularities are mapped onto finite, regular ranges first.
//!
//! Integrands may carry their own error (an inner integral evaluated to a
//! finite tolerance). That error is propagated through the Kronrod weights
//! and reported on top of the rule error, but it does not drive subdivision:
//! bisecting cannot shrink it.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::FRAC_PI_2;

use thiserror::Error;

/// Abscissae of the 21-point Kronrod rule on [-1, 1], descending; the odd
/// entries are the 10-point Gauss abscissae.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_292_240_370,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const EVALS_PER_PANEL: usize = 21;

/// A value together with an absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate {
    pub value: f64,
    pub err: f64,
}

impl Estimate {
    pub fn new(value: f64, err: f64) -> Self {
        Estimate { value, err: err.abs() }
    }

    pub fn exact(value: f64) -> Self {
        Estimate { value, err: 0.0 }
    }
}

impl From<QuadResult> for Estimate {
    fn from(q: QuadResult) -> Self {
        Estimate { value: q.value, err: q.abs_error_estimate }
    }
}

/// How the integrand behaves at the ends of the range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EndpointKind {
    /// Finite range, integrand bounded.
    Regular,
    /// Finite range with a `1/√(b − x)` singularity at the upper limit.
    /// Integrated through `x = a + (b − a) sin φ`, which turns
    /// `∫₀^r g(z)/√(r² − z²) dz` into `∫₀^{π/2} g(r sin φ) dφ`.
    InverseSqrtSingularity,
    /// Upper limit `+∞`. Integrated through `x = a + s/(1 − s)`, which suits
    /// integrands decaying faster than `x^{-2}`.
    SemiInfinite,
    /// Upper limit `+∞` with an algebraic tail `f(x) ~ C x^{-decay}`,
    /// `decay > 1`. Integrated through `x = a − 1 + y^{-1/(decay − 1)}` on
    /// `(0, 1]`, which maps the tail onto a bounded integrand near `y = 0`.
    AlgebraicTail { decay: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    pub const fn new(rel: f64, abs: f64) -> Self {
        Tolerance { rel, abs }
    }

    pub const fn rel(rel: f64) -> Self {
        Tolerance { rel, abs: 0.0 }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub function_evals: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("quadrature did not converge at nesting level {level}: best estimate {:e} ± {:e} after {} evaluations", .best.value, .best.abs_error_estimate, .best.function_evals)]
    NonConvergence { level: usize, best: QuadResult },
    #[error("integrand returned a non-finite value at x = {x} (nesting level {level})")]
    NonFinite { level: usize, x: f64 },
    #[error("invalid range [{a}, {b}] for {kind:?} integrand")]
    InvalidRange { a: f64, b: f64, kind: EndpointKind },
    #[error("invalid nesting: {0}")]
    InvalidNesting(String),
}

impl QuadError {
    pub fn level(&self) -> Option<usize> {
        match self {
            QuadError::NonConvergence { level, .. } | QuadError::NonFinite { level, .. } => Some(*level),
            _ => None,
        }
    }
}

/// A real integrand with its endpoint classification. The closure returns the
/// value with an error bound, or an error raised by an inner integration.
pub struct Integrand1D<F> {
    kind: EndpointKind,
    f: F,
}

impl<F> Integrand1D<F>
where
    F: Fn(f64) -> Result<Estimate, QuadError>,
{
    pub fn new(kind: EndpointKind, f: F) -> Self {
        Integrand1D { kind, f }
    }

    pub fn kind(&self) -> EndpointKind {
        self.kind
    }
}

/// Wraps an infallible, exactly evaluated integrand.
pub fn plain<G>(kind: EndpointKind, g: G) -> Integrand1D<impl Fn(f64) -> Result<Estimate, QuadError>>
where
    G: Fn(f64) -> f64,
{
    Integrand1D::new(kind, move |x| Ok(Estimate::exact(g(x))))
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    rule_err: f64,
    prop_err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.rule_err == other.rule_err
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rule_err.total_cmp(&other.rule_err)
    }
}

/// QUADPACK's error rescaling for a Kronrod panel.
fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut err = err.abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    err
}

/// Adaptive integrator for one nesting level.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub tol: Tolerance,
    pub max_evals: usize,
    /// Nesting level reported in errors; 0 is the outermost integral.
    pub level: usize,
}

impl Quadrature {
    pub const DEFAULT_MAX_EVALS: usize = 50_000;

    pub fn new(tol: Tolerance) -> Self {
        Quadrature { tol, max_evals: Self::DEFAULT_MAX_EVALS, level: 0 }
    }

    pub fn at_level(mut self, level: usize) -> Self {
        self.level = level;
        self
    }

    pub fn with_max_evals(mut self, max_evals: usize) -> Self {
        self.max_evals = max_evals;
        self
    }

    /// Integrates `f` over `[a, b]`; `b` must be `+∞` exactly for
    /// semi-infinite integrands.
    pub fn integrate<F>(&self, f: &Integrand1D<F>, a: f64, b: f64) -> Result<QuadResult, QuadError>
    where
        F: Fn(f64) -> Result<Estimate, QuadError>,
    {
        let invalid = || QuadError::InvalidRange { a, b, kind: f.kind };
        match f.kind {
            EndpointKind::Regular => {
                if !(a.is_finite() && b.is_finite() && a <= b) {
                    return Err(invalid());
                }
                if a == b {
                    return Ok(QuadResult { value: 0.0, abs_error_estimate: 0.0, function_evals: 0 });
                }
                self.adapt(0.0, 1.0, |s| {
                    let x = a + (b - a) * s;
                    (f.f)(x).map(|e| (x, e, b - a))
                })
            }
            EndpointKind::InverseSqrtSingularity => {
                if !(a.is_finite() && b.is_finite() && a <= b) {
                    return Err(invalid());
                }
                if a == b {
                    return Ok(QuadResult { value: 0.0, abs_error_estimate: 0.0, function_evals: 0 });
                }
                let w = b - a;
                self.adapt(0.0, FRAC_PI_2, |phi| {
                    let (s, c) = phi.sin_cos();
                    let x = a + w * s;
                    (f.f)(x).map(|e| (x, e, w * c))
                })
            }
            EndpointKind::SemiInfinite => {
                if !(a.is_finite() && b == f64::INFINITY) {
                    return Err(invalid());
                }
                self.adapt(0.0, 1.0, |s| {
                    let d = 1.0 - s;
                    let x = a + s / d;
                    (f.f)(x).map(|e| (x, e, 1.0 / (d * d)))
                })
            }
            EndpointKind::AlgebraicTail { decay } => {
                if !(a.is_finite() && b == f64::INFINITY && decay > 1.0 && decay.is_finite()) {
                    return Err(invalid());
                }
                let k = 1.0 / (decay - 1.0);
                self.adapt(0.0, 1.0, |y| {
                    let z = y.powf(-k);
                    let x = a - 1.0 + z;
                    (f.f)(x).map(|e| (x, e, k * z / y))
                })
            }
        }
    }

    /// Core loop on the transformed range `[lo, hi]`. `g` maps a transformed
    /// abscissa to `(x, f(x), jacobian)`.
    fn adapt<G>(&self, lo: f64, hi: f64, g: G) -> Result<QuadResult, QuadError>
    where
        G: Fn(f64) -> Result<(f64, Estimate, f64), QuadError>,
    {
        let mut evals = 0usize;
        let mut heap = BinaryHeap::new();
        let first = self.panel(lo, hi, &g)?;
        evals += EVALS_PER_PANEL;
        let mut total = first.value;
        let mut total_err = first.rule_err;
        heap.push(first);

        loop {
            if total_err <= self.tol.target(total) {
                break;
            }
            if evals + 2 * EVALS_PER_PANEL > self.max_evals {
                let best = summarize(&heap, evals);
                return Err(QuadError::NonConvergence { level: self.level, best });
            }
            let worst = heap.pop().expect("heap holds at least one panel");
            let mid = 0.5 * (worst.lo + worst.hi);
            if !(mid > worst.lo && mid < worst.hi) {
                // Panel has collapsed to adjacent floats; nothing left to split.
                heap.push(worst);
                let best = summarize(&heap, evals);
                return Err(QuadError::NonConvergence { level: self.level, best });
            }
            let left = self.panel(worst.lo, mid, &g)?;
            let right = self.panel(mid, worst.hi, &g)?;
            evals += 2 * EVALS_PER_PANEL;
            total += left.value + right.value - worst.value;
            total_err += left.rule_err + right.rule_err - worst.rule_err;
            heap.push(left);
            heap.push(right);
        }
        Ok(summarize(&heap, evals))
    }

    fn panel<G>(&self, lo: f64, hi: f64, g: &G) -> Result<Panel, QuadError>
    where
        G: Fn(f64) -> Result<(f64, Estimate, f64), QuadError>,
    {
        let center = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let eval = |s: f64| -> Result<(f64, f64), QuadError> {
            let (x, e, jac) = g(s)?;
            let v = e.value * jac;
            if !v.is_finite() || !e.err.is_finite() {
                return Err(QuadError::NonFinite { level: self.level, x });
            }
            Ok((v, e.err * jac.abs()))
        };

        let (fc, ec) = eval(center)?;
        let mut res_k = WGK[10] * fc;
        let mut res_g = 0.0;
        let mut res_abs = WGK[10] * fc.abs();
        let mut prop = WGK[10] * ec;
        let mut f1 = [0.0; 10];
        let mut f2 = [0.0; 10];
        for j in 0..10 {
            let dx = half * XGK[j];
            let (a, ea) = eval(center - dx)?;
            let (b, eb) = eval(center + dx)?;
            f1[j] = a;
            f2[j] = b;
            res_k += WGK[j] * (a + b);
            res_abs += WGK[j] * (a.abs() + b.abs());
            prop += WGK[j] * (ea + eb);
            if j % 2 == 1 {
                res_g += WG[j / 2] * (a + b);
            }
        }
        let mean = 0.5 * res_k;
        let mut res_asc = WGK[10] * (fc - mean).abs();
        for j in 0..10 {
            res_asc += WGK[j] * ((f1[j] - mean).abs() + (f2[j] - mean).abs());
        }
        let h = half.abs();
        let rule_err = rescale_error((res_k - res_g) * h, res_abs * h, res_asc * h);
        Ok(Panel { lo, hi, value: res_k * half, rule_err, prop_err: prop * h })
    }
}

fn summarize(heap: &BinaryHeap<Panel>, evals: usize) -> QuadResult {
    // Re-sum from the panels so the running-update drift does not leak out.
    let mut panels: Vec<&Panel> = heap.iter().collect();
    panels.sort_by(|p, q| p.lo.total_cmp(&q.lo));
    let value = panels.iter().map(|p| p.value).sum();
    let err: f64 = panels.iter().map(|p| p.rule_err + p.prop_err).sum();
    QuadResult { value, abs_error_estimate: err, function_evals: evals }
}

/// Single-level integration with explicit tolerances.
pub fn integrate<F>(f: &Integrand1D<F>, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<QuadResult, QuadError>
where
    F: Fn(f64) -> Result<Estimate, QuadError>,
{
    Quadrature::new(Tolerance::new(rel_tol, abs_tol)).integrate(f, a, b)
}

/// Per-level tolerances for a nested integral, outermost first.
#[derive(Debug, Clone)]
pub struct Nesting {
    levels: Vec<Tolerance>,
    max_evals: usize,
}

impl Nesting {
    pub const MAX_DEPTH: usize = 3;

    /// Outer rel 1e-6, middle 1e-7, inner 1e-8.
    pub fn standard() -> Self {
        Nesting::new(vec![Tolerance::rel(1e-6), Tolerance::rel(1e-7), Tolerance::rel(1e-8)])
            .expect("standard tolerances are strictly nested")
    }

    /// Each level must be at least 10x tighter (relative and absolute) than
    /// the one enclosing it.
    pub fn new(levels: Vec<Tolerance>) -> Result<Self, QuadError> {
        if levels.is_empty() || levels.len() > Self::MAX_DEPTH {
            return Err(QuadError::InvalidNesting(format!(
                "{} levels given, 1 to {} supported",
                levels.len(),
                Self::MAX_DEPTH
            )));
        }
        for (i, pair) in levels.windows(2).enumerate() {
            let (outer, inner) = (pair[0], pair[1]);
            let rel_ok = inner.rel * 10.0 <= outer.rel * (1.0 + 1e-12);
            let abs_ok = inner.abs * 10.0 <= outer.abs * (1.0 + 1e-12) || inner.abs == 0.0;
            if !rel_ok || !abs_ok {
                return Err(QuadError::InvalidNesting(format!(
                    "level {} tolerance must be at least 10x tighter than level {}",
                    i + 1,
                    i
                )));
            }
        }
        Ok(Nesting { levels, max_evals: Quadrature::DEFAULT_MAX_EVALS })
    }

    pub fn with_max_evals(mut self, max_evals: usize) -> Self {
        self.max_evals = max_evals;
        self
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn tolerance(&self, level: usize) -> Tolerance {
        self.levels[level]
    }

    /// Integrator for `level` (0 = outer). Panics if `level` exceeds the
    /// configured depth.
    pub fn level(&self, level: usize) -> Quadrature {
        assert!(level < self.levels.len(), "nesting level {level} not configured");
        Quadrature::new(self.levels[level]).at_level(level).with_max_evals(self.max_evals)
    }
}

/// Integrates the outer level of a nested integral. `build` receives the
/// nesting so that the integrand it returns can call `nesting.level(1)` (and
/// deeper) on its inner integrals; their error bounds flow into the result
/// through each evaluation's `Estimate::err`.
pub fn integrate_nested<F, B>(nesting: &Nesting, a: f64, b: f64, build: B) -> Result<QuadResult, QuadError>
where
    B: FnOnce(&Nesting) -> Integrand1D<F>,
    F: Fn(f64) -> Result<Estimate, QuadError>,
{
    let outer = build(nesting);
    nesting.level(0).integrate(&outer, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn q(rel: f64) -> Quadrature {
        Quadrature::new(Tolerance::rel(rel))
    }

    #[test]
    fn constant() {
        let r = q(1e-10).integrate(&plain(EndpointKind::Regular, |_| 1.0), 0.0, 1.0).unwrap();
        assert!((r.value - 1.0).abs() < 1e-14);
        assert!(r.abs_error_estimate <= 1e-10);
    }

    #[test]
    fn exponential_tail() {
        let r = q(1e-10).integrate(&plain(EndpointKind::SemiInfinite, |x| (-x).exp()), 0.0, f64::INFINITY).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn slow_algebraic_tails() {
        let f = plain(EndpointKind::AlgebraicTail { decay: 1.5 }, |x: f64| x.powf(-1.5));
        let r = q(1e-10).integrate(&f, 1.0, f64::INFINITY).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9, "{}", r.value);
        let f = plain(EndpointKind::AlgebraicTail { decay: 1.2 }, |x: f64| (1.0 + x).powf(-1.2));
        let r = q(1e-10).integrate(&f, 0.0, f64::INFINITY).unwrap();
        assert!((r.value - 5.0).abs() < 1e-8, "{}", r.value);
        let bad = plain(EndpointKind::AlgebraicTail { decay: 1.0 }, |x: f64| 1.0 / x);
        assert!(matches!(q(1e-6).integrate(&bad, 1.0, f64::INFINITY), Err(QuadError::InvalidRange { .. })));
    }

    #[test]
    fn arcsine_singularity() {
        let rr = 2.0;
        let f = plain(EndpointKind::InverseSqrtSingularity, move |z: f64| 1.0 / (rr * rr - z * z).sqrt());
        let r = q(1e-10).integrate(&f, 0.0, rr).unwrap();
        assert!((r.value - PI / 2.0).abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn empty_range_is_zero() {
        let r = q(1e-8).integrate(&plain(EndpointKind::Regular, |x| x), 3.0, 3.0).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn invalid_ranges() {
        let f = plain(EndpointKind::SemiInfinite, |x| x);
        assert!(matches!(q(1e-6).integrate(&f, 0.0, 1.0), Err(QuadError::InvalidRange { .. })));
        let f = plain(EndpointKind::Regular, |x| x);
        assert!(matches!(q(1e-6).integrate(&f, 0.0, f64::INFINITY), Err(QuadError::InvalidRange { .. })));
        assert!(matches!(q(1e-6).integrate(&f, 1.0, 0.0), Err(QuadError::InvalidRange { .. })));
    }

    #[test]
    fn nan_is_reported() {
        let f = plain(EndpointKind::Regular, |x| if x > 0.5 { f64::NAN } else { x });
        let err = q(1e-6).at_level(2).integrate(&f, 0.0, 1.0).unwrap_err();
        assert!(matches!(err, QuadError::NonFinite { level: 2, .. }));
    }

    #[test]
    fn budget_exhaustion_is_signalled() {
        // 1/x on (0, 1] diverges; the integrator must give up, not return a number.
        let f = plain(EndpointKind::Regular, |x| 1.0 / x);
        let err = q(1e-8).with_max_evals(2_000).integrate(&f, 0.0, 1.0).unwrap_err();
        match err {
            QuadError::NonConvergence { level, best } => {
                assert_eq!(level, 0);
                assert!(best.function_evals <= 2_000);
                assert!(best.abs_error_estimate > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nesting_validation() {
        assert!(Nesting::new(vec![]).is_err());
        assert!(Nesting::new(vec![Tolerance::rel(1e-6); 4]).is_err());
        assert!(Nesting::new(vec![Tolerance::rel(1e-6), Tolerance::rel(1e-6)]).is_err());
        assert!(Nesting::new(vec![Tolerance::rel(1e-6), Tolerance::rel(1e-7)]).is_ok());
        assert_eq!(Nesting::standard().depth(), 3);
    }

    #[test]
    fn nested_unit_square() {
        let n = Nesting::new(vec![Tolerance::rel(1e-8), Tolerance::rel(1e-10)]).unwrap();
        let r = integrate_nested(&n, 0.0, 1.0, |n| {
            let inner = n.level(1);
            Integrand1D::new(EndpointKind::Regular, move |_v| {
                inner.integrate(&plain(EndpointKind::Regular, |_u| 1.0), 0.0, 1.0).map(Estimate::from)
            })
        })
        .unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nested_error_reports_inner_level() {
        let n = Nesting::standard().with_max_evals(500);
        let err = integrate_nested(&n, 0.0, 1.0, |n| {
            let inner = n.level(1);
            Integrand1D::new(EndpointKind::Regular, move |_v| {
                inner.integrate(&plain(EndpointKind::Regular, |u| 1.0 / u), 0.0, 1.0).map(Estimate::from)
            })
        })
        .unwrap_err();
        assert_eq!(err.level(), Some(1));
    }

    #[test]
    fn propagated_error_is_reported() {
        let r = q(1e-10)
            .integrate(&Integrand1D::new(EndpointKind::Regular, |_| Ok(Estimate::new(1.0, 1e-3))), 0.0, 2.0)
            .unwrap();
        // Kronrod weights sum to 2 on [-1, 1]; over a width-2 range the
        // propagated bound is 2e-3.
        assert!((r.abs_error_estimate - 2e-3).abs() < 1e-9);
    }

    #[test]
    fn rayleigh_density_integrates_to_one() {
        for lambda in [0.1, 1.0, 25.0, 400.0] {
            let f =
                plain(EndpointKind::SemiInfinite, move |r: f64| 2.0 * PI * lambda * r * (-PI * lambda * r * r).exp());
            let r = q(1e-9).integrate(&f, 0.0, f64::INFINITY).unwrap();
            assert!((r.value - 1.0).abs() < 1e-8, "lambda {lambda}: {}", r.value);
        }
    }
}
