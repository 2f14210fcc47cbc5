use std::f64::consts::PI;

use serde::Serialize;

use crate::energy_force::ElectrostaticModel;
use crate::error::{Error, Result};
use crate::geometry::BoundaryData;
use crate::hermite::DeflectionProfile;
use crate::params::PhysicalParams;
use crate::transmission::PotentialField;

/// Harmonic transmission solution on the flat configuration:
/// `psi_1 = A sin(kx) sinh(k(z+H))` below the interface and
/// `psi_2 = sin(kx) [A sinh(kH) cosh(kz) + (sigma_1/sigma_2) A cosh(kH) sinh(kz)]` above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ManufacturedSolution {
    pub k: f64,
    pub amplitude: f64,
    pub gap: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

impl ManufacturedSolution {
    /// `k = pi / L`, unit amplitude.
    pub fn standard(params: &PhysicalParams) -> Self {
        Self { k: PI / params.half_width, amplitude: 1.0, gap: params.gap, sigma1: params.sigma1, sigma2: params.sigma2 }
    }

    /// Value and gradient at `(x, z)`.
    pub fn eval(&self, x: f64, z: f64) -> (f64, [f64; 2]) {
        let (k, a, h) = (self.k, self.amplitude, self.gap);
        let (s, c) = ((k * x).sin(), (k * x).cos());
        if z <= 0.0 {
            let (sh, ch) = ((k * (z + h)).sinh(), (k * (z + h)).cosh());
            (a * s * sh, [a * k * c * sh, a * k * s * ch])
        } else {
            let r = self.sigma1 / self.sigma2;
            let b = a * (k * h).sinh();
            let d = r * a * (k * h).cosh();
            let f = b * (k * z).cosh() + d * (k * z).sinh();
            let fz = k * (b * (k * z).sinh() + d * (k * z).cosh());
            (s * f, [k * c * f, s * fz])
        }
    }

    pub fn boundary_data(&self) -> BoundaryData {
        let m = *self;
        BoundaryData::custom(move |x, z| m.eval(x, z).0)
    }

    /// `sigma_2 psi_{2,z} - sigma_1 psi_{1,z}` at the interface, identically zero.
    pub fn flux_jump(&self, x: f64) -> f64 {
        self.sigma2 * self.eval(x, 1e-300).1[1] - self.sigma1 * self.eval(x, 0.0).1[1]
    }
}

/// Errors on one mesh of the ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MmsLevel {
    pub n: usize,
    pub h: f64,
    pub l2: f64,
    pub h1: f64,
    /// `L2(-L, L)` norm of the discrete flux jump at the interface.
    pub flux_jump: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MmsStudy {
    pub solution: ManufacturedSolution,
    pub levels: Vec<MmsLevel>,
    /// Observed orders between consecutive levels.
    pub l2_orders: Vec<f64>,
    pub h1_orders: Vec<f64>,
    pub flux_orders: Vec<f64>,
}

impl MmsStudy {
    pub fn min_l2_order(&self) -> f64 {
        self.l2_orders.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn min_h1_order(&self) -> f64 {
        self.h1_orders.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn min_flux_order(&self) -> f64 {
        self.flux_orders.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

const GAUSS3_1D: [(f64, f64); 3] = [
    (0.112_701_665_379_258_3, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

/// `L2` and `H1`-seminorm errors of the bilinear field against the exact solution,
/// three-by-three Gauss per cell.
fn errors(phi: &PotentialField, exact: &ManufacturedSolution) -> (f64, f64) {
    let mesh = &phi.mesh;
    let (mut l2, mut h1) = (0.0, 0.0);
    for c in 0..mesh.n_cells() {
        let (x0, z0, hx, hz) = mesh.cell_box(c);
        let [v0, v1, v2, v3] = mesh.cell_nodes(c).map(|n| phi.values[n]);
        for &(s, ws) in &GAUSS3_1D {
            for &(t, wt) in &GAUSS3_1D {
                let val = v0 * (1.0 - s) * (1.0 - t) + v1 * s * (1.0 - t) + v2 * s * t + v3 * (1.0 - s) * t;
                let gx = ((v1 - v0) * (1.0 - t) + (v2 - v3) * t) / hx;
                let gz = ((v3 - v0) * (1.0 - s) + (v2 - v1) * s) / hz;
                let (e, eg) = exact.eval(x0 + s * hx, z0 + t * hz);
                let w = ws * wt * hx * hz;
                l2 += w * (val - e).powi(2);
                h1 += w * ((gx - eg[0]).powi(2) + (gz - eg[1]).powi(2));
            }
        }
    }
    (l2.sqrt(), h1.sqrt())
}

fn orders(levels: &[MmsLevel], f: impl Fn(&MmsLevel) -> f64) -> Vec<f64> {
    levels.windows(2).map(|w| (f(&w[0]) / f(&w[1])).ln() / (w[0].h / w[1].h).ln()).collect()
}

/// Runs the manufactured case on `n x n` meshes (`nz1 = nz2 = n/2`) for each `n`.
pub fn mms_convergence(params: &PhysicalParams, ladder: &[usize]) -> Result<MmsStudy> {
    if ladder.len() < 2 || ladder.iter().any(|&n| n < 2 || n % 2 != 0) || ladder.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter { name: "ladder", reason: "need at least two increasing even sizes".into() });
    }
    let exact = ManufacturedSolution::standard(params);
    let mut levels = Vec::with_capacity(ladder.len());
    for &n in ladder {
        let model = ElectrostaticModel::new(*params, n, n / 2, n / 2)?.with_boundary(exact.boundary_data());
        let u = DeflectionProfile::flat(params.half_width, n, Default::default(), -params.gap);
        let phi = model.solve(&u)?;
        let (l2, h1) = errors(&phi, &exact);
        let tr = model.traces(&phi);
        let flux: f64 = (0..tr.len())
            .map(|k| tr.widths[k] * (params.sigma2 * tr.interface_upper[k][1] - params.sigma1 * tr.interface_lower[k][1]).powi(2))
            .sum::<f64>()
            .sqrt();
        levels.push(MmsLevel { n, h: 2.0 * params.half_width / n as f64, l2, h1, flux_jump: flux });
    }
    Ok(MmsStudy {
        solution: exact,
        l2_orders: orders(&levels, |l| l.l2),
        h1_orders: orders(&levels, |l| l.h1),
        flux_orders: orders(&levels, |l| l.flux_jump),
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_solution_satisfies_the_transmission_conditions() {
        let p = PhysicalParams::base();
        let m = ManufacturedSolution::standard(&p);
        for &x in &[-0.7, 0.1, 0.45] {
            let below = m.eval(x, 0.0).0;
            let above = m.eval(x, 1e-300).0;
            assert!((below - above).abs() < 1e-14);
            assert!(m.flux_jump(x).abs() < 1e-13);
            assert!(m.eval(1.0, 0.3).0.abs() < 1e-14);
        }
        // harmonic: second differences cancel
        let e = 1e-4;
        let (x, z) = (0.3, 0.4);
        let lap = (m.eval(x + e, z).0 + m.eval(x - e, z).0 + m.eval(x, z + e).0 + m.eval(x, z - e).0 - 4.0 * m.eval(x, z).0) / (e * e);
        assert!(lap.abs() < 1e-5);
    }

    #[test]
    fn coarse_ladder_converges() {
        let s = mms_convergence(&PhysicalParams::base(), &[8, 16, 32]).unwrap();
        assert!(s.min_l2_order() > 1.7, "{s:?}");
        assert!(s.min_h1_order() > 0.8, "{s:?}");
        assert!(mms_convergence(&PhysicalParams::base(), &[16]).is_err());
    }
}
