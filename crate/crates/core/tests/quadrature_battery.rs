mod common;

use std::time::Instant;

use coxcell_core::quadrature::{integrate_nested, plain, EndpointKind, Integrand1D, Nesting, Quadrature, Tolerance};
use coxcell_core::{Estimate, QuadError};

#[test]
fn closed_forms_at_three_tolerances() {
    for rel in [1e-4, 1e-6, 1e-8] {
        for c in common::battery() {
            let r = common::run(&c, rel).unwrap_or_else(|e| panic!("{}: {e}", c.name));
            let actual = (r.value - c.exact).abs();
            assert!(actual <= rel * c.exact.abs(), "{} at {rel}: error {actual:e}", c.name);
            // The reported bound covers the true error up to rounding in the
            // integrand itself, which near the singular endpoint loses digits.
            assert!(
                actual <= r.abs_error_estimate + 1e-12 * c.exact.abs(),
                "{} at {rel}: bound {:e} < {actual:e}",
                c.name,
                r.abs_error_estimate
            );
        }
    }
}

#[test]
fn tighter_tolerance_never_costs_fewer_evaluations() {
    for c in common::battery() {
        let evals: Vec<usize> =
            [1e-4, 1e-6, 1e-8, 1e-10].iter().map(|&t| common::run(&c, t).unwrap().function_evals).collect();
        assert!(evals.windows(2).all(|w| w[0] <= w[1]), "{}: {evals:?}", c.name);
    }
}

#[test]
fn battery_runs_well_under_a_second() {
    let start = Instant::now();
    for c in common::battery() {
        common::run(&c, 1e-8).unwrap();
    }
    assert!(start.elapsed().as_secs_f64() < 1.0);
}

#[test]
fn gaussian_integral_over_two_halves() {
    let q = Quadrature::new(Tolerance::rel(1e-10));
    let f = plain(EndpointKind::SemiInfinite, |x: f64| (-x * x).exp());
    let half = q.integrate(&f, 0.0, f64::INFINITY).unwrap();
    assert!((2.0 * half.value - std::f64::consts::PI.sqrt()).abs() < 1e-9);
}

#[test]
fn nested_disc_area() {
    // Area of the unit quarter disc as ∫₀¹ ∫₀^{√(1−x²)} dy dx.
    let nesting = Nesting::standard();
    let r = integrate_nested(&nesting, 0.0, 1.0, |n| {
        let inner = n.level(1);
        Integrand1D::new(EndpointKind::Regular, move |x: f64| {
            let top = (1.0 - x * x).max(0.0).sqrt();
            inner.integrate(&plain(EndpointKind::Regular, |_y| 1.0), 0.0, top).map(Estimate::from)
        })
    })
    .unwrap();
    assert!((r.value - std::f64::consts::FRAC_PI_4).abs() < 1e-6);
}

#[test]
fn nonconvergence_reports_budget_and_level() {
    let q = Quadrature::new(Tolerance::rel(1e-14)).with_max_evals(63).at_level(2);
    let f = plain(EndpointKind::Regular, |x: f64| (50.0 * x).sin().abs());
    match q.integrate(&f, 0.0, 10.0) {
        Err(QuadError::NonConvergence { level, best }) => {
            assert_eq!(level, 2);
            assert!(best.function_evals <= 63);
        }
        other => panic!("expected non-convergence, got {other:?}"),
    }
}

#[test]
fn nan_integrand_is_reported() {
    let q = Quadrature::new(Tolerance::rel(1e-8));
    let f = plain(EndpointKind::Regular, |x: f64| if x > 0.5 { f64::NAN } else { 1.0 });
    assert!(matches!(q.integrate(&f, 0.0, 1.0), Err(QuadError::NonFinite { .. })));
}
