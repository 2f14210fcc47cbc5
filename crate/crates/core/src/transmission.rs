//! Electrostatic transmission problem solved in reference coordinates.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem2d::{assemble, cell_gradient, solve_system, ElementKernel, ReferenceMesh, SolveStats, SolverOptions};
use crate::geometry::{self, BoundaryData, CoefficientField, Region};
use crate::hermite::DeflectionProfile;
use crate::params::PhysicalParams;

/// Nodal potential `psi o Theta` on the reference mesh.
#[derive(Debug, Clone)]
pub struct PotentialField {
    pub mesh: Arc<ReferenceMesh>,
    pub values: Vec<f64>,
    pub deflection: DeflectionProfile,
    pub coefficients: CoefficientField,
    pub stats: SolveStats,
}

/// Solves for the potential of deflection `u`.
pub fn solve_potential(
    params: &PhysicalParams,
    u: &DeflectionProfile,
    mesh: &Arc<ReferenceMesh>,
    bdata: &BoundaryData,
    opts: SolverOptions,
) -> Result<PotentialField> {
    params.validate()?;
    u.validate()?;
    if (u.half_width() - mesh.half_width).abs() > 1e-12 * mesh.half_width {
        return Err(Error::DimensionMismatch(format!(
            "deflection spans half-width {} but mesh spans {}",
            u.half_width(),
            mesh.half_width
        )));
    }
    let points = ElementKernel::gauss_points(mesh);
    let coefficients = geometry::coefficients(params, u, &points, 4)?;

    let mut values = vec![0.0; mesh.n_nodes()];
    for n in 0..mesh.n_nodes() {
        if mesh.boundary[n] {
            let (x, z) = mesh.node_coords(n);
            let (_, zbar) = geometry::map_to_physical(params, u, x, z)?;
            values[n] = bdata.value(params, u, x, zbar);
        }
    }
    let sys = assemble(mesh, &coefficients, &values)?;
    let (interior, stats) = solve_system(&sys, opts, None)?;
    for (k, &n) in mesh.interior_nodes.iter().enumerate() {
        values[n] = interior[k];
    }
    Ok(PotentialField { mesh: Arc::clone(mesh), values, deflection: u.clone(), coefficients, stats })
}

/// `E_e = -1/2 int A grad psi . grad psi` over the reference rectangle.
pub fn electrostatic_energy(phi: &PotentialField, coeff: &CoefficientField) -> f64 {
    let mesh = &phi.mesh;
    let kernel = ElementKernel::default();
    let mut acc = 0.0;
    for c in 0..mesh.n_cells() {
        let (_, _, hx, hz) = mesh.cell_box(c);
        let vals = mesh.cell_nodes(c).map(|n| phi.values[n]);
        let w = 0.25 * hx * hz;
        for q in 0..4 {
            let g = kernel.gradient(q, hx, hz, vals);
            let a = coeff.samples[4 * c + q].a;
            acc += w * (a[0] * g[0] * g[0] + 2.0 * a[1] * g[0] * g[1] + a[2] * g[1] * g[1]);
        }
    }
    -0.5 * acc
}

/// Reference-coordinate `H1` seminorm of the difference of two fields on one mesh.
pub fn h1_seminorm_distance(a: &PotentialField, b: &PotentialField) -> f64 {
    let mesh = &a.mesh;
    let kernel = ElementKernel::default();
    let mut acc = 0.0;
    for c in 0..mesh.n_cells() {
        let (_, _, hx, hz) = mesh.cell_box(c);
        let vals = mesh.cell_nodes(c).map(|n| a.values[n] - b.values[n]);
        for q in 0..4 {
            let g = kernel.gradient(q, hx, hz, vals);
            acc += 0.25 * hx * hz * (g[0] * g[0] + g[1] * g[1]);
        }
    }
    acc.sqrt()
}

/// How one-sided gradients are recovered at a boundary line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceRecovery {
    /// Gradient at the centre of the adjacent cell row.
    CellCenter,
    /// Tangential part from the nodal values on the line, normal part linearly
    /// extrapolated from the centres of the two adjacent rows.
    #[default]
    Extrapolated,
}

/// One-sided physical gradients along the interface and the top of the plate,
/// sampled at the cell-column midpoints.
#[derive(Debug, Clone, Serialize)]
pub struct TraceData {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub slope: Vec<f64>,
    /// `grad psi_2` at `(x, u(x))`.
    pub interface_upper: Vec<[f64; 2]>,
    /// `grad psi_1` at `(x, u(x))`.
    pub interface_lower: Vec<[f64; 2]>,
    /// `grad psi_2` at `(x, u(x) + d)`.
    pub top: Vec<[f64; 2]>,
    /// Cell widths, used as quadrature weights for the samples.
    pub widths: Vec<f64>,
}

impl TraceData {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

pub fn extract_traces(params: &PhysicalParams, phi: &PotentialField) -> TraceData {
    extract_traces_with(params, phi, TraceRecovery::default())
}

/// Extracts one-sided traces. Upper-side values use only cells with `z > 0`,
/// lower-side values only cells with `z < 0`.
pub fn extract_traces_with(params: &PhysicalParams, phi: &PotentialField, recovery: TraceRecovery) -> TraceData {
    let mesh = &phi.mesh;
    let u = &phi.deflection;
    let nx = mesh.nx;
    let (nz1, nz) = (mesh.nz1, mesh.nz());
    let row_grad = |i: usize, j: usize| cell_gradient(mesh, &phi.values, i + j * nx);
    // rows ordered from the boundary line inward
    // `line` is the node row of the trace; its tangential difference is exact to O(h^2)
    let recover = |i: usize, line: usize, first: usize, second: Option<usize>| -> [f64; 2] {
        let g1 = row_grad(i, first);
        if recovery == TraceRecovery::CellCenter {
            return g1;
        }
        let (_, _, hx, _) = mesh.cell_box(i + first * nx);
        let gx = (phi.values[mesh.node(i + 1, line)] - phi.values[mesh.node(i, line)]) / hx;
        match second {
            Some(s) => [gx, 1.5 * g1[1] - 0.5 * row_grad(i, s)[1]],
            None => [gx, g1[1]],
        }
    };
    let x = mesh.x_midpoints();
    let mut out = TraceData {
        x: x.clone(),
        u: Vec::with_capacity(nx),
        slope: Vec::with_capacity(nx),
        interface_upper: Vec::with_capacity(nx),
        interface_lower: Vec::with_capacity(nx),
        top: Vec::with_capacity(nx),
        widths: mesh.xs.windows(2).map(|w| w[1] - w[0]).collect(),
    };
    for (i, &xi) in x.iter().enumerate() {
        let (uv, p, _) = u.eval(xi);
        let up = recover(i, nz1, nz1, (mesh.nz2 >= 2).then_some(nz1 + 1));
        let lo = recover(i, nz1, nz1 - 1, (nz1 >= 2).then(|| nz1 - 2));
        let tp = recover(i, nz, nz - 1, (mesh.nz2 >= 2).then(|| nz - 2));
        out.u.push(uv);
        out.slope.push(p);
        out.interface_upper.push(geometry::physical_gradient(params, Region::Upper, 0.0, uv, p, up));
        out.interface_lower.push(geometry::physical_gradient(params, Region::Lower, 0.0, uv, p, lo));
        out.top.push(geometry::physical_gradient(params, Region::Upper, params.thickness, uv, p, tp));
    }
    out
}
