//! Shared fixtures for the benchmarks.

use memsplate::{DeflectionProfile, ElectrostaticModel, PhysicalParams, Shape};

/// Base-parameter model on an `n x n` mesh with a curved deflection.
pub fn fixture(n: usize) -> (ElectrostaticModel, DeflectionProfile) {
    let p = PhysicalParams::base();
    let model = ElectrostaticModel::new(p, n, n / 2, n / 2).expect("valid mesh");
    let u = Shape::Skewed.profile(-0.15, p.half_width, n, p.gap_floor(memsplate::DEFAULT_EPS_GAP));
    (model, u)
}
