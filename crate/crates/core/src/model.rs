//! Parameter and geometry vocabulary shared by both engines.
//!
//! Lengths are in km, point intensities in 1/km² (planar) or 1/km (per road),
//! the SIR threshold is linear. Conversions from dB happen at the I/O boundary.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("{0} must be ≥ 0")]
    Negative(&'static str),
    #[error("{0} must be finite")]
    NotFinite(&'static str),
    #[error("alpha must exceed 2")]
    AlphaTooSmall,
    #[error("threshold must be > 0")]
    NonPositiveThreshold,
    #[error("tx_power must be > 0")]
    NonPositivePower,
}

/// Full parameter set of the network model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Planar base-station intensity, 1/km².
    pub lambda_b: f64,
    /// Planar user intensity, 1/km².
    pub lambda_u: f64,
    /// Road (line process) intensity, 1/km.
    pub lambda_l: f64,
    /// Vehicular base stations per km of road.
    pub mu_b: f64,
    /// Vehicular users per km of road.
    pub mu_u: f64,
    /// Path-loss exponent.
    pub alpha: f64,
    /// Common transmit power. It cancels in every SIR.
    pub tx_power: f64,
    /// Linear SIR threshold.
    pub threshold: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        // Equal-intensity setting: λ_b = λ_l μ_b = 25/km².
        NetworkConfig {
            lambda_b: 25.0,
            lambda_u: 1.0,
            lambda_l: 5.0,
            mu_b: 5.0,
            mu_u: 1.0,
            alpha: 4.0,
            tx_power: 1.0,
            threshold: 1.0,
        }
    }
}

impl NetworkConfig {
    /// Returns the config unchanged if every constraint holds, otherwise the
    /// first violated one.
    pub fn validate(self) -> Result<Self, ConfigError> {
        let intensities = [
            ("lambda_b", self.lambda_b),
            ("lambda_u", self.lambda_u),
            ("lambda_l", self.lambda_l),
            ("mu_b", self.mu_b),
            ("mu_u", self.mu_u),
        ];
        for (name, v) in intensities {
            if !v.is_finite() {
                return Err(ConfigError::NotFinite(name));
            }
            if v < 0.0 {
                return Err(ConfigError::Negative(name));
            }
        }
        if !self.alpha.is_finite() {
            return Err(ConfigError::NotFinite("alpha"));
        }
        if self.alpha <= 2.0 {
            return Err(ConfigError::AlphaTooSmall);
        }
        if !(self.threshold > 0.0) || !self.threshold.is_finite() {
            return Err(ConfigError::NonPositiveThreshold);
        }
        if !(self.tx_power > 0.0) || !self.tx_power.is_finite() {
            return Err(ConfigError::NonPositivePower);
        }
        Ok(self)
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn with_threshold_db(self, threshold_db: f64) -> Self {
        self.with_threshold(db_to_linear(threshold_db))
    }

    /// Spatial intensity of vehicular base stations, λ_l μ_b.
    pub fn cox_bs_intensity(&self) -> f64 {
        self.lambda_l * self.mu_b
    }

    /// Spatial intensity of vehicular users, λ_l μ_u.
    pub fn cox_user_intensity(&self) -> f64 {
        self.lambda_l * self.mu_u
    }

    /// Palm mixture weights `(planar, vehicular)` of the typical user, or
    /// `None` when no users exist.
    pub fn user_weights(&self) -> Option<(f64, f64)> {
        let planar = self.lambda_u;
        let vehicular = self.cox_user_intensity();
        let total = planar + vehicular;
        if total > 0.0 {
            Some((planar / total, vehicular / total))
        } else {
            None
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// One road, as a point `(r, θ)` of the cylinder ℝ×[0,π).
///
/// `theta` is the direction of the road measured from the positive X axis and
/// `r` the signed offset of the road from the origin along the left normal
/// `(−sin θ, cos θ)`. The road is `{ t·(cos θ, sin θ) + r·(−sin θ, cos θ) }`,
/// equivalently `−x sin θ + y cos θ = r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineParams {
    pub r: f64,
    pub theta: f64,
}

impl LineParams {
    /// Builds the canonical representative of the road with offset `r` and
    /// direction `theta` (any real angle). Directions are folded into
    /// `[0, π)`, flipping the sign of `r` when the direction is reversed.
    pub fn new(r: f64, theta: f64) -> Self {
        let mut theta = theta.rem_euclid(2.0 * PI);
        let mut r = r;
        if theta >= PI {
            theta -= PI;
            r = -r;
        }
        // rem_euclid can round up to exactly 2π for tiny negative inputs.
        if theta >= PI {
            theta = 0.0;
        }
        LineParams { r, theta }
    }

    /// Road through the origin with the given direction.
    pub fn through_origin(theta: f64) -> Self {
        LineParams::new(0.0, theta)
    }

    pub fn direction(&self) -> [f64; 2] {
        [self.theta.cos(), self.theta.sin()]
    }

    pub fn normal(&self) -> [f64; 2] {
        [-self.theta.sin(), self.theta.cos()]
    }

    /// Signed distance of `xy` from the road.
    pub fn signed_distance(&self, xy: [f64; 2]) -> f64 {
        let n = self.normal();
        n[0] * xy[0] + n[1] * xy[1] - self.r
    }

    /// Half-length of the chord cut by the disc of radius `radius` centred at
    /// the origin; `None` when the road misses the disc.
    pub fn half_chord(&self, radius: f64) -> Option<f64> {
        let d2 = radius * radius - self.r * self.r;
        (d2 >= 0.0).then(|| d2.sqrt())
    }
}

/// A vehicular base station: its road, its arc-length coordinate from the
/// road's foot point, and its Cartesian position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoxPoint {
    pub line: LineParams,
    pub t: f64,
    pub xy: [f64; 2],
}

impl CoxPoint {
    pub fn norm(&self) -> f64 {
        self.xy[0].hypot(self.xy[1])
    }
}

/// Position of the point at arc length `t` on `line`: the point `(t, r)`
/// rotated by the road direction.
pub fn line_point(line: LineParams, t: f64) -> CoxPoint {
    let (s, c) = line.theta.sin_cos();
    let xy = [t * c - line.r * s, t * s + line.r * c];
    CoxPoint { line, t, xy }
}

/// Which typical user sits at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PalmScenario {
    /// Palm of the planar users: nothing is added to the base stations.
    TypicalPlanarUser,
    /// Palm of the vehicular users: a road through the origin is added.
    TypicalVehicularUser,
}

impl PalmScenario {
    pub const ALL: [PalmScenario; 2] = [PalmScenario::TypicalPlanarUser, PalmScenario::TypicalVehicularUser];

    pub fn has_origin_line(self) -> bool {
        matches!(self, PalmScenario::TypicalVehicularUser)
    }

    pub fn name(self) -> &'static str {
        match self {
            PalmScenario::TypicalPlanarUser => "planar",
            PalmScenario::TypicalVehicularUser => "vehicular",
        }
    }
}

impl fmt::Display for PalmScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Whether the serving (nearest) base station is planar or vehicular.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AssociationEvent {
    ToPlanar,
    ToVehicular,
}

impl AssociationEvent {
    pub fn complement(self) -> Self {
        match self {
            AssociationEvent::ToPlanar => AssociationEvent::ToVehicular,
            AssociationEvent::ToVehicular => AssociationEvent::ToPlanar,
        }
    }
}

/// Link types: serving base station kind to user kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LinkType {
    /// Vehicular BS to vehicular user.
    V2V,
    /// Planar BS to vehicular user.
    I2V,
    /// Vehicular BS to planar user.
    V2I,
    /// Planar BS to planar user.
    I2I,
}

impl LinkType {
    pub const ALL: [LinkType; 4] = [LinkType::V2V, LinkType::I2V, LinkType::V2I, LinkType::I2I];

    pub fn scenario(self) -> PalmScenario {
        match self {
            LinkType::V2V | LinkType::I2V => PalmScenario::TypicalVehicularUser,
            LinkType::V2I | LinkType::I2I => PalmScenario::TypicalPlanarUser,
        }
    }

    pub fn association(self) -> AssociationEvent {
        match self {
            LinkType::V2V | LinkType::V2I => AssociationEvent::ToVehicular,
            LinkType::I2V | LinkType::I2I => AssociationEvent::ToPlanar,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LinkType::V2V => "v2v",
            LinkType::I2V => "i2v",
            LinkType::V2I => "v2i",
            LinkType::I2I => "i2i",
        }
    }
}

impl fmt::Display for LinkType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
