//! Mechanical energy, total energy and the electrostatic force density.

use std::sync::Arc;

use serde::Serialize;

use crate::error::Result;
use crate::fem2d::{ElementKernel, ReferenceMesh, SolverOptions};
use crate::geometry::{self, BoundaryData};
use crate::hermite::{shape, DeflectionProfile, GAUSS3};
use crate::params::PhysicalParams;
use crate::transmission::{
    electrostatic_energy, extract_traces_with, solve_potential, PotentialField, TraceData, TraceRecovery,
};

/// `E_m = beta/2 |u''|^2 + (tau/2 + a/4 |u'|^2) |u'|^2`, exact for the Hermite representation.
pub fn mechanical_energy(u: &DeflectionProfile, params: &PhysicalParams) -> f64 {
    let bend = u.integrate(|_, _, _, ddu| ddu * ddu);
    let stretch = u.slope_norm_sq();
    0.5 * params.bending * bend + (0.5 * params.stretching + 0.25 * params.nonlinear_stretching * stretch) * stretch
}

/// Force density samples with the three summands of the force formula.
#[derive(Debug, Clone, Serialize)]
pub struct ForceProfile {
    pub x: Vec<f64>,
    pub widths: Vec<f64>,
    pub g: Vec<f64>,
    /// Tangential interface term.
    pub interface_tangential: Vec<f64>,
    /// Normal interface term.
    pub interface_normal: Vec<f64>,
    /// Top-of-plate term.
    pub top: Vec<f64>,
}

impl ForceProfile {
    pub fn min(&self) -> f64 {
        self.g.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `int g theta dx` with `g` constant on each cell column and `theta` integrated
    /// by three-point Gauss.
    pub fn pair(&self, theta: &DeflectionProfile) -> f64 {
        let mut acc = 0.0;
        for (k, (&xm, &w)) in self.x.iter().zip(&self.widths).enumerate() {
            let x0 = xm - 0.5 * w;
            let mut cell = 0.0;
            for &(s, q) in &GAUSS3 {
                cell += q * theta.eval(x0 + s * w).0;
            }
            acc += self.g[k] * cell * w;
        }
        acc
    }

    /// Load vector `int g phi_j dx` over all Hermite basis functions of `grid`.
    pub fn load_vector(&self, grid: &DeflectionProfile) -> Vec<f64> {
        let mut out = vec![0.0; grid.n_dofs()];
        let h = grid.elem_len();
        for (k, (&xm, &w)) in self.x.iter().zip(&self.widths).enumerate() {
            let x0 = xm - 0.5 * w;
            for &(s, q) in &GAUSS3 {
                let (e, t) = grid.locate(x0 + s * w);
                let (n, _, _) = shape(t, h);
                for a in 0..4 {
                    out[2 * e + a] += self.g[k] * q * w * n[a];
                }
            }
        }
        out
    }
}

/// Evaluates the force formula from upper-side traces only.
pub fn electrostatic_force(traces: &TraceData, params: &PhysicalParams) -> ForceProfile {
    let jump = params.sigma_jump();
    let (s1, s2) = (params.sigma1, params.sigma2);
    let n = traces.len();
    let mut out = ForceProfile {
        x: traces.x.clone(),
        widths: traces.widths.clone(),
        g: Vec::with_capacity(n),
        interface_tangential: Vec::with_capacity(n),
        interface_normal: Vec::with_capacity(n),
        top: Vec::with_capacity(n),
    };
    for k in 0..n {
        let p = traces.slope[k];
        let [gx, gz] = traces.interface_upper[k];
        let [tx, tz] = traces.top[k];
        let metric = 1.0 + p * p;
        let t1 = -jump / (2.0 * metric) * (gx + p * gz).powi(2);
        let t2 = -jump * s2 / (2.0 * s1 * metric) * (p * gx - gz).powi(2);
        let t3 = 0.5 * s2 * (tx * tx + tz * tz);
        out.interface_tangential.push(t1);
        out.interface_normal.push(t2);
        out.top.push(t3);
        out.g.push(t1 + t2 + t3);
    }
    out
}

/// Force density from two-sided traces before the jump identities are used:
/// `-1/2 [sigma (psi_x^2 - psi_z^2)] - u' [sigma psi_x psi_z] + sigma_2/2 |grad psi_2|^2` at the top.
pub fn two_sided_force(traces: &TraceData, params: &PhysicalParams) -> Vec<f64> {
    let (s1, s2) = (params.sigma1, params.sigma2);
    (0..traces.len())
        .map(|k| {
            let p = traces.slope[k];
            let [ax, az] = traces.interface_lower[k];
            let [bx, bz] = traces.interface_upper[k];
            let [tx, tz] = traces.top[k];
            let jump_sq = s1 * (ax * ax - az * az) - s2 * (bx * bx - bz * bz);
            let jump_mixed = s1 * ax * az - s2 * bx * bz;
            -0.5 * jump_sq - p * jump_mixed + 0.5 * s2 * (tx * tx + tz * tz)
        })
        .collect()
}

/// Discrete interface jumps of `F = psi_x + u' psi_z` and `G = -u' psi_x + psi_z`.
#[derive(Debug, Clone, Serialize)]
pub struct JumpResiduals {
    /// `L2` norm in `x` of `[F]`.
    pub f_jump: f64,
    /// `L2` norm in `x` of `[sigma G]`.
    pub sigma_g_jump: f64,
    /// `L2` norm in `x` of `[sigma F G]`.
    pub sigma_fg_jump: f64,
    /// `L2` norm of `[sigma F^2] - [sigma] F_2^2`.
    pub f2_identity_defect: f64,
    /// `L2` norm of `[sigma G^2] - [1/sigma] sigma_2^2 G_2^2`.
    pub g2_identity_defect: f64,
    /// `L2` norm of the difference between the two-sided and the one-sided force.
    pub force_form_gap: f64,
    /// `L2` norm of the pointwise bound on that difference implied by the jumps.
    pub force_form_bound: f64,
    /// Pointwise difference never exceeds the pointwise bound.
    pub force_forms_consistent: bool,
}

pub fn jump_residuals(traces: &TraceData, params: &PhysicalParams) -> JumpResiduals {
    let (s1, s2) = (params.sigma1, params.sigma2);
    let one_sided = electrostatic_force(traces, params);
    let two_sided = two_sided_force(traces, params);
    let mut acc = [0.0f64; 7];
    let mut consistent = true;
    for k in 0..traces.len() {
        let w = traces.widths[k];
        let p = traces.slope[k];
        let [ax, az] = traces.interface_lower[k];
        let [bx, bz] = traces.interface_upper[k];
        let (f1, f2) = (ax + p * az, bx + p * bz);
        let (g1, g2) = (-p * ax + az, -p * bx + bz);
        let df = f1 - f2;
        let dsg = s1 * g1 - s2 * g2;
        let dsfg = s1 * f1 * g1 - s2 * f2 * g2;
        let f2_defect = (s1 * f1 * f1 - s2 * f2 * f2) - (s1 - s2) * f2 * f2;
        let g2_defect = (s1 * g1 * g1 - s2 * g2 * g2) - (1.0 / s1 - 1.0 / s2) * s2 * s2 * g2 * g2;
        let gap = two_sided[k] - one_sided.g[k];
        // exact expansion of the defect in terms of the two jumps
        let bound = 0.5 / (1.0 + p * p)
            * (s1 * df.abs() * (f1 + f2).abs()
                + 2.0 * p.abs() * (f1.abs() * dsg.abs() + s2 * g2.abs() * df.abs())
                + dsg.abs() * (s1 * g1 + s2 * g2).abs() / s1);
        let slack = 1e-12 * (1.0 + one_sided.g[k].abs());
        if gap.abs() > bound * (1.0 + 1e-9) + slack {
            consistent = false;
        }
        for (slot, v) in acc.iter_mut().zip([df, dsg, dsfg, f2_defect, g2_defect, gap, bound]) {
            *slot += w * v * v;
        }
    }
    let r = acc.map(f64::sqrt);
    JumpResiduals {
        f_jump: r[0],
        sigma_g_jump: r[1],
        sigma_fg_jump: r[2],
        f2_identity_defect: r[3],
        g2_identity_defect: r[4],
        force_form_gap: r[5],
        force_form_bound: r[6],
        force_forms_consistent: consistent,
    }
}

/// Exact derivative of the discrete electrostatic energy with respect to the
/// deflection, stored as per-quadrature-point weights of `theta` and `theta'`.
///
/// Valid when the pulled-back Dirichlet data do not depend on the deflection,
/// which holds for the model boundary data.
#[derive(Debug, Clone)]
pub struct ShapeSensitivity {
    /// `(x, weight of theta(x), weight of theta'(x))`.
    pub samples: Vec<(f64, f64, f64)>,
}

impl ShapeSensitivity {
    pub fn new(params: &PhysicalParams, phi: &PotentialField) -> Self {
        let mesh = &phi.mesh;
        let kernel = ElementKernel::default();
        let mut samples = Vec::with_capacity(4 * mesh.n_cells());
        for c in 0..mesh.n_cells() {
            let (_, _, hx, hz) = mesh.cell_box(c);
            let vals = mesh.cell_nodes(c).map(|n| phi.values[n]);
            let w = 0.25 * hx * hz;
            for q in 0..4 {
                let s = &phi.coefficients.samples[4 * c + q];
                let g = kernel.gradient(q, hx, hz, vals);
                let (du, dp) = geometry::coefficient_derivatives(params, s.region, s.z, s.u, s.slope);
                let quad = |a: [f64; 3]| a[0] * g[0] * g[0] + 2.0 * a[1] * g[0] * g[1] + a[2] * g[1] * g[1];
                samples.push((s.x, -0.5 * w * quad(du), -0.5 * w * quad(dp)));
            }
        }
        Self { samples }
    }

    /// Directional derivative along `theta`.
    pub fn directional(&self, theta: &DeflectionProfile) -> f64 {
        self.samples
            .iter()
            .map(|&(x, wu, wp)| {
                let (t, dt, _) = theta.eval(x);
                wu * t + wp * dt
            })
            .sum()
    }

    /// Gradient with respect to the Hermite coefficients of `grid`.
    pub fn load_vector(&self, grid: &DeflectionProfile) -> Vec<f64> {
        let mut out = vec![0.0; grid.n_dofs()];
        let h = grid.elem_len();
        for &(x, wu, wp) in &self.samples {
            let (e, t) = grid.locate(x);
            let (n, d, _) = shape(t, h);
            for a in 0..4 {
                out[2 * e + a] += wu * n[a] + wp * d[a];
            }
        }
        out
    }
}

/// Energy breakdown of one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyReport {
    pub mechanical: f64,
    pub electrostatic: f64,
    pub penalty: f64,
    pub total: f64,
}

impl EnergyReport {
    pub fn new(mechanical: f64, electrostatic: f64, penalty: f64) -> Self {
        Self { mechanical, electrostatic, penalty, total: mechanical + electrostatic + penalty }
    }
}

/// Bundles everything needed to evaluate the electrostatic part for a deflection.
#[derive(Debug, Clone)]
pub struct ElectrostaticModel {
    pub params: PhysicalParams,
    pub mesh: Arc<ReferenceMesh>,
    pub bdata: BoundaryData,
    pub solver: SolverOptions,
    pub recovery: TraceRecovery,
}

impl ElectrostaticModel {
    pub fn new(params: PhysicalParams, nx: usize, nz1: usize, nz2: usize) -> Result<Self> {
        params.validate()?;
        let mesh = ReferenceMesh::build(params.half_width, params.gap, params.thickness, nx, nz1, nz2)?;
        Ok(Self {
            params,
            mesh: Arc::new(mesh),
            bdata: BoundaryData::Model,
            solver: SolverOptions::default(),
            recovery: TraceRecovery::default(),
        })
    }

    pub fn with_solver(mut self, solver: SolverOptions) -> Self {
        self.solver = solver;
        self
    }

    pub fn with_boundary(mut self, bdata: BoundaryData) -> Self {
        self.bdata = bdata;
        self
    }

    pub fn solve(&self, u: &DeflectionProfile) -> Result<PotentialField> {
        solve_potential(&self.params, u, &self.mesh, &self.bdata, self.solver)
    }

    pub fn energy(&self, u: &DeflectionProfile) -> Result<f64> {
        let phi = self.solve(u)?;
        Ok(electrostatic_energy(&phi, &phi.coefficients))
    }

    pub fn traces(&self, phi: &PotentialField) -> TraceData {
        extract_traces_with(&self.params, phi, self.recovery)
    }

    pub fn force(&self, u: &DeflectionProfile) -> Result<ForceProfile> {
        let phi = self.solve(u)?;
        Ok(electrostatic_force(&self.traces(&phi), &self.params))
    }

    /// Energy breakdown without penalties; one potential solve.
    pub fn total_energy(&self, u: &DeflectionProfile) -> Result<EnergyReport> {
        let ee = self.energy(u)?;
        Ok(EnergyReport::new(mechanical_energy(u, &self.params), ee, 0.0))
    }
}

pub fn total_energy(u: &DeflectionProfile, model: &ElectrostaticModel) -> Result<EnergyReport> {
    model.total_energy(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::BcMode;

    fn quartic(n: usize) -> DeflectionProfile {
        DeflectionProfile::from_fn(1.0, n, BcMode::Clamped, -0.999, |x| 0.1 * (1.0 - x * x).powi(2), |x| -0.4 * x * (1.0 - x * x))
    }

    fn flat_traces(n: usize, up: [f64; 2], lo: [f64; 2], top: [f64; 2]) -> TraceData {
        TraceData {
            x: (0..n).map(|i| -1.0 + (i as f64 + 0.5) * 2.0 / n as f64).collect(),
            u: vec![0.0; n],
            slope: vec![0.0; n],
            interface_upper: vec![up; n],
            interface_lower: vec![lo; n],
            top: vec![top; n],
            widths: vec![2.0 / n as f64; n],
        }
    }

    #[test]
    fn mechanical_energy_of_the_quartic() {
        let mut p = PhysicalParams::base();
        assert_eq!(mechanical_energy(&DeflectionProfile::flat_for(&p, 8), &p), 0.0);
        let u = quartic(64);
        assert!((mechanical_energy(&u, &p) - 0.128).abs() < 1e-7);
        p.bending = 0.0;
        p.stretching = 1.0;
        assert!((mechanical_energy(&u, &p) - 0.5 * 0.01 * 256.0 / 105.0).abs() < 1e-7);
        p.stretching = 0.0;
        p.nonlinear_stretching = 4.0;
        let s = 0.01 * 256.0 / 105.0;
        assert!((mechanical_energy(&u, &p) - s * s).abs() < 1e-8);
    }

    #[test]
    fn force_on_the_flat_profile() {
        let p = PhysicalParams::base();
        let tr = flat_traces(8, [0.0, 1.0 / 3.0], [0.0, 2.0 / 3.0], [0.0, 1.0 / 3.0]);
        let f = electrostatic_force(&tr, &p);
        for k in 0..8 {
            assert!((f.g[k] - 2.0 / 9.0).abs() < 1e-15);
            assert_eq!(f.interface_tangential[k], 0.0);
            assert!((f.interface_normal[k] - 1.0 / 9.0).abs() < 1e-15);
            assert!((f.top[k] - 1.0 / 9.0).abs() < 1e-15);
        }
        let j = jump_residuals(&tr, &p);
        assert!(j.f_jump < 1e-15 && j.sigma_g_jump < 1e-15 && j.sigma_fg_jump < 1e-15);
        assert!(j.f2_identity_defect < 1e-15 && j.g2_identity_defect < 1e-15);
        assert!(j.force_form_gap < 1e-15);
        assert!(j.force_forms_consistent);
    }

    #[test]
    fn zero_traces_give_zero_force() {
        let p = PhysicalParams::base();
        let tr = flat_traces(4, [0.0; 2], [0.0; 2], [0.0; 2]);
        assert!(electrostatic_force(&tr, &p).g.iter().all(|&g| g == 0.0));
        let j = jump_residuals(&tr, &p);
        assert_eq!(j.f_jump + j.sigma_g_jump + j.sigma_fg_jump, 0.0);
    }

    #[test]
    fn summand_signs_follow_the_jump() {
        let mut p = PhysicalParams::base();
        let mut tr = flat_traces(3, [0.3, -0.2], [0.3, -0.4], [0.1, 0.5]);
        tr.slope = vec![0.4, -0.7, 0.0];
        let f = electrostatic_force(&tr, &p);
        assert!(f.interface_tangential.iter().chain(&f.interface_normal).chain(&f.top).all(|&t| t >= 0.0));
        std::mem::swap(&mut p.sigma1, &mut p.sigma2);
        let f = electrostatic_force(&tr, &p);
        assert!(f.interface_tangential.iter().chain(&f.interface_normal).all(|&t| t <= 0.0));
        assert!(f.top.iter().all(|&t| t >= 0.0));
    }

    #[test]
    fn two_sided_form_matches_when_jump_conditions_hold() {
        // build lower traces satisfying [F] = [sigma G] = 0 exactly
        let p = PhysicalParams::base();
        let slope = 0.37;
        let up = [0.21, -0.55];
        let f = up[0] + slope * up[1];
        let g2 = -slope * up[0] + up[1];
        let g1 = p.sigma2 * g2 / p.sigma1;
        let m = 1.0 + slope * slope;
        let lo = [(f - g1 * slope) / m, (f * slope + g1) / m];
        let mut tr = flat_traces(2, up, lo, [0.1, 0.4]);
        tr.slope = vec![slope; 2];
        let one = electrostatic_force(&tr, &p);
        let two = two_sided_force(&tr, &p);
        for k in 0..2 {
            assert!((one.g[k] - two[k]).abs() < 1e-14);
        }
        let j = jump_residuals(&tr, &p);
        assert!(j.f_jump < 1e-14 && j.sigma_g_jump < 1e-14 && j.sigma_fg_jump < 1e-14);
        assert!(j.f2_identity_defect < 1e-14 && j.g2_identity_defect < 1e-14);
    }

    #[test]
    fn pairing_and_load_vector_agree() {
        let tr = flat_traces(16, [0.1, 0.2], [0.1, 0.4], [0.0, 0.3]);
        let mut f = electrostatic_force(&tr, &PhysicalParams::base());
        for (k, g) in f.g.iter_mut().enumerate() {
            *g += 0.01 * k as f64;
        }
        let theta = quartic(8);
        let lv = f.load_vector(&theta);
        let direct: f64 = lv.iter().zip(theta.coefficients()).map(|(a, b)| a * b).sum();
        assert!((direct - f.pair(&theta)).abs() < 1e-14);
    }

    #[test]
    fn energy_report_identity() {
        let r = EnergyReport::new(0.25, -0.5, 0.125);
        assert_eq!(r.total, 0.25 - 0.5 + 0.125);
    }
}
