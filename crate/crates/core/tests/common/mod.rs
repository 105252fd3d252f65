#![allow(dead_code)]

use std::f64::consts::{E, FRAC_PI_2, FRAC_PI_4, PI};

use coxcell_core::quadrature::{plain, EndpointKind, QuadError, Quadrature, Tolerance};
use coxcell_core::NetworkConfig;

pub struct ClosedForm {
    pub name: &'static str,
    pub kind: EndpointKind,
    pub a: f64,
    pub b: f64,
    pub f: fn(f64) -> f64,
    pub exact: f64,
}

pub fn battery() -> Vec<ClosedForm> {
    use EndpointKind::*;
    vec![
        ClosedForm { name: "x^3 on [0,1]", kind: Regular, a: 0.0, b: 1.0, f: |x| x * x * x, exact: 0.25 },
        ClosedForm { name: "sin on [0,pi]", kind: Regular, a: 0.0, b: PI, f: f64::sin, exact: 2.0 },
        ClosedForm { name: "exp on [0,1]", kind: Regular, a: 0.0, b: 1.0, f: f64::exp, exact: E - 1.0 },
        ClosedForm {
            name: "1/(1+x^2) on [0,1]",
            kind: Regular,
            a: 0.0,
            b: 1.0,
            f: |x| 1.0 / (1.0 + x * x),
            exact: FRAC_PI_4,
        },
        ClosedForm {
            name: "1/sqrt(1-x^2) on [0,1]",
            kind: InverseSqrtSingularity,
            a: 0.0,
            b: 1.0,
            f: |x| 1.0 / (1.0 - x * x).sqrt(),
            exact: FRAC_PI_2,
        },
        ClosedForm {
            name: "x/sqrt(1-x^2) on [0,1]",
            kind: InverseSqrtSingularity,
            a: 0.0,
            b: 1.0,
            f: |x| x / (1.0 - x * x).sqrt(),
            exact: 1.0,
        },
        ClosedForm {
            name: "1/sqrt(1-x) on [0,1]",
            kind: InverseSqrtSingularity,
            a: 0.0,
            b: 1.0,
            f: |x| 1.0 / (1.0 - x).sqrt(),
            exact: 2.0,
        },
        ClosedForm {
            name: "exp(-x) on [0,inf)",
            kind: SemiInfinite,
            a: 0.0,
            b: f64::INFINITY,
            f: |x| (-x).exp(),
            exact: 1.0,
        },
        ClosedForm {
            name: "1/(1+x^2) on [0,inf)",
            kind: SemiInfinite,
            a: 0.0,
            b: f64::INFINITY,
            f: |x| 1.0 / (1.0 + x * x),
            exact: FRAC_PI_2,
        },
        ClosedForm {
            name: "x exp(-x^2/2) on [0,inf)",
            kind: SemiInfinite,
            a: 0.0,
            b: f64::INFINITY,
            f: |x| x * (-0.5 * x * x).exp(),
            exact: 1.0,
        },
    ]
}

pub fn run(c: &ClosedForm, rel: f64) -> Result<coxcell_core::QuadResult, QuadError> {
    let q = Quadrature::new(Tolerance::rel(rel));
    q.integrate(&plain(c.kind, c.f), c.a, c.b)
}

/// 3GPP urban preset.
pub fn three_gpp() -> NetworkConfig {
    NetworkConfig { lambda_l: 5.34, lambda_b: 6.15, mu_b: 5.0, alpha: 4.0, ..NetworkConfig::default() }
}

/// Equal planar and vehicular base-station intensity.
pub fn equal_intensity() -> NetworkConfig {
    NetworkConfig { lambda_l: 5.0, lambda_b: 25.0, mu_b: 5.0, alpha: 4.0, ..NetworkConfig::default() }
}

/// −10 dB to 20 dB in 2.5 dB steps.
pub fn threshold_grid_db() -> Vec<f64> {
    (0..13).map(|i| -10.0 + 2.5 * i as f64).collect()
}
