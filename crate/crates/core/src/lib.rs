//! Association, nearest-distance and SIR coverage for a planar Poisson layer
//! of base stations superposed with Cox base stations on a Poisson line
//! process, by nested quadrature and by Monte Carlo.

/// Version of this crate, recorded in experiment metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod analytic;
pub mod mc;
pub mod model;
pub mod quadrature;
pub mod sampling;

pub use analytic::{
    AnalyticError, AnalyticOptions, AnalyticValue, Association, CoverageContext, DistanceMeans, JointCoverages,
    OuterRange, VehicularSplit,
};
pub use mc::{CoverageEstimate, EstimateWithCI, McError, McRecord, MonteCarlo, TrialBatch, TrialOutcome};
pub use model::{
    db_to_linear, linear_to_db, AssociationEvent, ConfigError, CoxPoint, LineParams, LinkType, NetworkConfig,
    PalmScenario,
};
pub use quadrature::{EndpointKind, Estimate, Nesting, QuadError, QuadResult, Quadrature, Tolerance};
pub use sampling::{AngularMeasure, Realization, SimulationWindow, WindowError};
