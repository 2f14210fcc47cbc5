//! Independent checks of the discretization and of the force identities.

mod derivative;
mod mms;
mod probes;
mod report;

pub use derivative::{fd_directional_derivative, one_sided_derivative, DerivativeReport, DEFAULT_STEPS};
pub use mms::{mms_convergence, ManufacturedSolution, MmsLevel, MmsStudy};
pub use probes::{
    continuity_probe, fitted_slope, jump_study, monotone_pairs, monotonicity_probe, ContinuityRow, ContinuityTable,
    JumpLevel, JumpStudy, MonotonicityCase,
};
pub use report::{num, CsvTable, ProbeReport};
