use rayon::prelude::*;

use super::mesh::ReferenceMesh;
use super::sparse::{CsrMatrix, SparseSystem};
use crate::error::{Error, Result};
use crate::geometry::{CoefficientField, Sym2};

/// Two-point Gauss abscissae on `[0, 1]`; both weights are `1/2`.
pub const GAUSS2: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];

/// Shape-function derivatives of the bilinear element at the local point `(s, t)`
/// of the unit square, `[dN/ds; dN/dt]`.
#[inline]
fn local_grad(s: f64, t: f64) -> [[f64; 4]; 2] {
    [[-(1.0 - t), 1.0 - t, t, -t], [-(1.0 - s), -s, s, 1.0 - s]]
}

/// Per-mesh element data shared by assembly and post-processing.
#[derive(Debug, Clone)]
pub struct ElementKernel {
    /// Local derivatives at the four Gauss points, ordered `qx + 2 qz`.
    grads: [[[f64; 4]; 2]; 4],
}

impl Default for ElementKernel {
    fn default() -> Self {
        let mut grads = [[[0.0; 4]; 2]; 4];
        for qz in 0..2 {
            for qx in 0..2 {
                grads[qx + 2 * qz] = local_grad(GAUSS2[qx], GAUSS2[qz]);
            }
        }
        Self { grads }
    }
}

impl ElementKernel {
    /// Reference-coordinate Gauss points of every cell, four per cell.
    pub fn gauss_points(mesh: &ReferenceMesh) -> Vec<(f64, f64)> {
        let mut pts = Vec::with_capacity(4 * mesh.n_cells());
        for c in 0..mesh.n_cells() {
            let (x0, z0, hx, hz) = mesh.cell_box(c);
            for qz in 0..2 {
                for qx in 0..2 {
                    pts.push((x0 + GAUSS2[qx] * hx, z0 + GAUSS2[qz] * hz));
                }
            }
        }
        pts
    }

    /// Element stiffness `int A grad N_a . grad N_b` with the cell's four coefficient samples.
    pub fn stiffness(&self, hx: f64, hz: f64, coeff: &[Sym2]) -> [[f64; 4]; 4] {
        let mut k = [[0.0; 4]; 4];
        let w = 0.25 * hx * hz;
        for (q, a) in coeff.iter().enumerate() {
            let g = &self.grads[q];
            let gx: [f64; 4] = std::array::from_fn(|n| g[0][n] / hx);
            let gz: [f64; 4] = std::array::from_fn(|n| g[1][n] / hz);
            for i in 0..4 {
                let fx = a[0] * gx[i] + a[1] * gz[i];
                let fz = a[1] * gx[i] + a[2] * gz[i];
                for j in 0..4 {
                    k[i][j] += w * (fx * gx[j] + fz * gz[j]);
                }
            }
        }
        k
    }

    /// Reference gradient of the nodal field at Gauss point `q` of a cell.
    #[inline]
    pub fn gradient(&self, q: usize, hx: f64, hz: f64, vals: [f64; 4]) -> [f64; 2] {
        let g = &self.grads[q];
        let mut out = [0.0; 2];
        for n in 0..4 {
            out[0] += g[0][n] * vals[n];
            out[1] += g[1][n] * vals[n];
        }
        [out[0] / hx, out[1] / hz]
    }
}

/// Reference gradient at Gauss point `q` of cell `c`.
pub fn gauss_gradient(mesh: &ReferenceMesh, values: &[f64], c: usize, q: usize) -> [f64; 2] {
    let nodes = mesh.cell_nodes(c);
    let (_, _, hx, hz) = mesh.cell_box(c);
    ElementKernel::default().gradient(q, hx, hz, nodes.map(|n| values[n]))
}

/// Reference gradient of the bilinear interpolant at the centre of cell `c`.
pub fn cell_gradient(mesh: &ReferenceMesh, values: &[f64], c: usize) -> [f64; 2] {
    let [n0, n1, n2, n3] = mesh.cell_nodes(c);
    let (_, _, hx, hz) = mesh.cell_box(c);
    let v = |n: usize| values[n];
    [
        0.5 * ((v(n1) - v(n0)) + (v(n2) - v(n3))) / hx,
        0.5 * ((v(n3) - v(n0)) + (v(n2) - v(n1))) / hz,
    ]
}

fn interior_pattern(mesh: &ReferenceMesh) -> CsrMatrix {
    let nxp = mesh.nx + 1;
    let nz = mesh.nz();
    let rows = mesh
        .interior_nodes
        .iter()
        .map(|&n| {
            let (i, j) = (n % nxp, n / nxp);
            let mut cols = Vec::with_capacity(9);
            for jj in j.saturating_sub(1)..=(j + 1).min(nz) {
                for ii in i.saturating_sub(1)..=(i + 1).min(mesh.nx) {
                    let k = mesh.interior_index[mesh.node(ii, jj)];
                    if k != usize::MAX {
                        cols.push(k);
                    }
                }
            }
            cols
        })
        .collect();
    CsrMatrix::from_pattern(rows)
}

/// Assembles the weighted stiffness form and eliminates the boundary nodes.
///
/// `dirichlet` is a full nodal vector; only its boundary entries are read.
pub fn assemble(mesh: &ReferenceMesh, coeff: &CoefficientField, dirichlet: &[f64]) -> Result<SparseSystem> {
    if coeff.per_cell != 4 || coeff.samples.len() != 4 * mesh.n_cells() {
        return Err(Error::DimensionMismatch(format!(
            "coefficient field has {} samples ({} per cell) for {} cells",
            coeff.samples.len(),
            coeff.per_cell,
            mesh.n_cells()
        )));
    }
    if dirichlet.len() != mesh.n_nodes() {
        return Err(Error::DimensionMismatch(format!("{} nodal values for {} nodes", dirichlet.len(), mesh.n_nodes())));
    }
    let kernel = ElementKernel::default();
    let elements: Vec<[[f64; 4]; 4]> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| {
            let (_, _, hx, hz) = mesh.cell_box(c);
            let a: [Sym2; 4] = std::array::from_fn(|q| coeff.samples[4 * c + q].a);
            kernel.stiffness(hx, hz, &a)
        })
        .collect();

    let mut matrix = interior_pattern(mesh);
    let mut rhs = vec![0.0; mesh.interior_nodes.len()];
    // fixed element order keeps the accumulation deterministic
    for (c, ke) in elements.iter().enumerate() {
        let nodes = mesh.cell_nodes(c);
        for a in 0..4 {
            let ra = mesh.interior_index[nodes[a]];
            if ra == usize::MAX {
                continue;
            }
            for b in 0..4 {
                let rb = mesh.interior_index[nodes[b]];
                if rb == usize::MAX {
                    rhs[ra] -= ke[a][b] * dirichlet[nodes[b]];
                } else {
                    matrix.add(ra, rb, ke[a][b]);
                }
            }
        }
    }
    if let Some((row, &d)) = matrix.diagonal().iter().enumerate().find(|(_, &d)| !(d > 0.0)) {
        return Err(Error::NotPositiveDefinite { row, diag: d });
    }
    let constrained = (0..mesh.n_nodes()).filter(|&n| mesh.boundary[n]).map(|n| (n, dirichlet[n])).collect();
    Ok(SparseSystem { matrix, rhs, constrained })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem2d::{solve_system, SolverOptions};
    use crate::geometry::{CoefficientSample, Region};

    fn identity_field(mesh: &ReferenceMesh) -> CoefficientField {
        let samples = ElementKernel::gauss_points(mesh)
            .into_iter()
            .map(|(x, z)| CoefficientSample { x, z, region: Region::Upper, u: 0.0, slope: 0.0, a: [1.0, 0.0, 1.0], jacobian: 1.0 })
            .collect();
        CoefficientField { samples, per_cell: 4 }
    }

    fn full_solution(mesh: &ReferenceMesh, sys: &SparseSystem, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; mesh.n_nodes()];
        for &(n, v) in &sys.constrained {
            out[n] = v;
        }
        for (k, &n) in mesh.interior_nodes.iter().enumerate() {
            out[n] = x[k];
        }
        out
    }

    #[test]
    fn laplace_stencil_on_square_cells() {
        // square cells: the bilinear Laplace stencil is 8/3 centre, -1/3 neighbours
        let mesh = ReferenceMesh::build(1.0, 1.0, 1.0, 4, 2, 2).unwrap();
        let sys = assemble(&mesh, &identity_field(&mesh), &vec![0.0; mesh.n_nodes()]).unwrap();
        let c = mesh.interior_index[mesh.node(2, 2)];
        let e = mesh.interior_index[mesh.node(3, 2)];
        let d = mesh.interior_index[mesh.node(3, 3)];
        assert!((sys.matrix.get(c, c) - 8.0 / 3.0).abs() < 1e-13);
        assert!((sys.matrix.get(c, e) + 1.0 / 3.0).abs() < 1e-13);
        assert!((sys.matrix.get(c, d) + 1.0 / 3.0).abs() < 1e-13);
        assert!(sys.matrix.is_symmetric(1e-14));
    }

    #[test]
    fn constants_and_linears_are_reproduced() {
        let mesh = ReferenceMesh::build(1.0, 0.7, 0.5, 9, 4, 3).unwrap();
        let coeff = identity_field(&mesh);
        for (alpha, beta, gamma) in [(0.0, 0.0, 3.5), (0.4, -1.3, 0.2)] {
            let data: Vec<f64> = (0..mesh.n_nodes())
                .map(|n| {
                    let (x, z) = mesh.node_coords(n);
                    alpha * x + beta * z + gamma
                })
                .collect();
            let sys = assemble(&mesh, &coeff, &data).unwrap();
            let (x, _) = solve_system(&sys, SolverOptions { rel_tol: 1e-13, max_iter: 1000 }, None).unwrap();
            let full = full_solution(&mesh, &sys, &x);
            for (a, b) in full.iter().zip(&data) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn energy_form_is_positive() {
        let mesh = ReferenceMesh::build(1.0, 1.0, 1.0, 6, 3, 3).unwrap();
        let sys = assemble(&mesh, &identity_field(&mesh), &vec![0.0; mesh.n_nodes()]).unwrap();
        let n = sys.matrix.n;
        let mut y = vec![0.0; n];
        for seed in 1..20u64 {
            let v: Vec<f64> = (0..n).map(|i| ((i as u64 * 7919 + seed * 104_729) % 997) as f64 / 997.0 - 0.5).collect();
            sys.matrix.matvec(&v, &mut y);
            assert!(crate::fem2d::sparse::dot(&v, &y) > 0.0);
        }
    }

    #[test]
    fn dimension_checks() {
        let mesh = ReferenceMesh::build(1.0, 1.0, 1.0, 4, 2, 2).unwrap();
        assert!(assemble(&mesh, &identity_field(&mesh), &[0.0; 3]).is_err());
    }
}
