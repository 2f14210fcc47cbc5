//! Bilinear finite elements on the interface-aligned reference rectangle.

mod assemble;
mod mesh;
mod sparse;

pub use assemble::{assemble, cell_gradient, gauss_gradient, ElementKernel, GAUSS2};
pub use mesh::ReferenceMesh;
pub use sparse::{solve_system, CsrMatrix, SolveStats, SolverOptions, SparseSystem};
