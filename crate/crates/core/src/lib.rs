//! Electrostatic MEMS plate model: transmission problem on a deflection-dependent
//! domain, its energy and shape derivative, and the obstacle-constrained energy
//! minimization of the plate.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod catalogue;
pub mod energy_force;
pub mod error;
pub mod fem2d;
pub mod geometry;
pub mod hermite;
pub mod io;
pub mod minimize;
pub mod params;
pub mod transmission;
pub mod verify;

pub use catalogue::Shape;
pub use energy_force::{
    electrostatic_force, jump_residuals, mechanical_energy, total_energy, two_sided_force, ElectrostaticModel,
    EnergyReport, ForceProfile, JumpResiduals, ShapeSensitivity,
};
pub use error::{Error, Result};
pub use fem2d::{ReferenceMesh, SolveStats, SolverOptions};
pub use geometry::{map_to_physical, map_to_reference, BoundaryData, CoefficientField, Region};
pub use hermite::{BcMode, DeflectionProfile};
pub use minimize::{
    energy_gradient, minimize_total_energy, vi_residual, voltage_sweep, ForceRoute, MinimizationState, MinimizeConfig,
    MinimizeResult, ObstacleMode, Outcome,
};
pub use params::PhysicalParams;
pub use transmission::{
    electrostatic_energy, extract_traces, solve_potential, PotentialField, TraceData, TraceRecovery,
};

/// Default relative obstacle margin: the nodal floor is `-H + DEFAULT_EPS_GAP * H`.
pub const DEFAULT_EPS_GAP: f64 = 1e-3;
