//! Cubic Hermite representation of the plate deflection on a uniform grid.
//!
//! Coefficients are stored interleaved as `[u_0, u'_0, u_1, u'_1, ...]`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::PhysicalParams;

/// Boundary condition at `x = +-L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BcMode {
    /// Value and slope vanish.
    #[default]
    Clamped,
    /// Only the value vanishes.
    Pinned,
}

/// Hermite shape functions on the unit element, `s` in `[0, 1]`, element length `h`.
/// Returns `(values, first derivatives, second derivatives)` in physical scaling.
#[inline]
pub fn shape(s: f64, h: f64) -> ([f64; 4], [f64; 4], [f64; 4]) {
    let s2 = s * s;
    let s3 = s2 * s;
    let n = [
        1.0 - 3.0 * s2 + 2.0 * s3,
        h * (s - 2.0 * s2 + s3),
        3.0 * s2 - 2.0 * s3,
        h * (-s2 + s3),
    ];
    let d = [
        (-6.0 * s + 6.0 * s2) / h,
        1.0 - 4.0 * s + 3.0 * s2,
        (6.0 * s - 6.0 * s2) / h,
        -2.0 * s + 3.0 * s2,
    ];
    let dd = [
        (-6.0 + 12.0 * s) / (h * h),
        (-4.0 + 6.0 * s) / h,
        (6.0 - 12.0 * s) / (h * h),
        (-2.0 + 6.0 * s) / h,
    ];
    (n, d, dd)
}

/// Three-point Gauss-Legendre rule on `[0, 1]`.
pub const GAUSS3: [(f64, f64); 3] = [
    (0.112_701_665_379_258_31, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

/// Plate deflection on a uniform grid over `[-L, L]` in cubic Hermite form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeflectionProfile {
    pub x_nodes: Vec<f64>,
    pub u_values: Vec<f64>,
    pub du_values: Vec<f64>,
    pub bc_mode: BcMode,
    pub gap_floor: f64,
}

impl DeflectionProfile {
    /// Flat profile `u = 0` with `n_elem` elements.
    pub fn flat(half_width: f64, n_elem: usize, bc_mode: BcMode, gap_floor: f64) -> Self {
        let x_nodes = uniform_nodes(half_width, n_elem);
        let n = x_nodes.len();
        Self { x_nodes, u_values: vec![0.0; n], du_values: vec![0.0; n], bc_mode, gap_floor }
    }

    /// Hermite interpolant of `f` with derivative `df`; boundary conditions are imposed
    /// on the end nodes regardless of what `f` returns there.
    pub fn from_fn(
        half_width: f64,
        n_elem: usize,
        bc_mode: BcMode,
        gap_floor: f64,
        f: impl Fn(f64) -> f64,
        df: impl Fn(f64) -> f64,
    ) -> Self {
        let x_nodes = uniform_nodes(half_width, n_elem);
        let mut u_values: Vec<f64> = x_nodes.iter().map(|&x| f(x)).collect();
        let mut du_values: Vec<f64> = x_nodes.iter().map(|&x| df(x)).collect();
        let last = x_nodes.len() - 1;
        u_values[0] = 0.0;
        u_values[last] = 0.0;
        if bc_mode == BcMode::Clamped {
            du_values[0] = 0.0;
            du_values[last] = 0.0;
        }
        Self { x_nodes, u_values, du_values, bc_mode, gap_floor }
    }

    /// Profile defined on the same grid as `self` from interleaved coefficients.
    pub fn with_coefficients(&self, coeffs: &[f64]) -> Self {
        assert_eq!(coeffs.len(), 2 * self.x_nodes.len());
        let mut out = self.clone();
        for (i, c) in coeffs.chunks_exact(2).enumerate() {
            out.u_values[i] = c[0];
            out.du_values[i] = c[1];
        }
        out
    }

    /// Profile parameters for the given physical setting with the default floor.
    pub fn flat_for(params: &PhysicalParams, n_elem: usize) -> Self {
        Self::flat(params.half_width, n_elem, BcMode::Clamped, params.gap_floor(crate::DEFAULT_EPS_GAP))
    }

    pub fn n_elem(&self) -> usize {
        self.x_nodes.len() - 1
    }

    pub fn n_dofs(&self) -> usize {
        2 * self.x_nodes.len()
    }

    pub fn half_width(&self) -> f64 {
        *self.x_nodes.last().unwrap()
    }

    pub fn elem_len(&self) -> f64 {
        2.0 * self.half_width() / self.n_elem() as f64
    }

    pub fn coefficients(&self) -> Vec<f64> {
        self.u_values.iter().zip(&self.du_values).flat_map(|(&u, &du)| [u, du]).collect()
    }

    /// Degrees of freedom fixed by the boundary condition.
    pub fn constrained_dofs(&self) -> Vec<usize> {
        let last = self.x_nodes.len() - 1;
        match self.bc_mode {
            BcMode::Clamped => vec![0, 1, 2 * last, 2 * last + 1],
            BcMode::Pinned => vec![0, 2 * last],
        }
    }

    /// Mask of unconstrained degrees of freedom.
    pub fn free_mask(&self) -> Vec<bool> {
        let mut mask = vec![true; self.n_dofs()];
        for i in self.constrained_dofs() {
            mask[i] = false;
        }
        mask
    }

    /// Element index and local coordinate of `x`.
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let h = self.elem_len();
        let t = (x + self.half_width()) / h;
        let e = (t.floor().max(0.0) as usize).min(self.n_elem() - 1);
        (e, (t - e as f64).clamp(0.0, 1.0))
    }

    /// Local element coefficients `[u_e, u'_e, u_{e+1}, u'_{e+1}]`.
    #[inline]
    pub fn elem_coeffs(&self, e: usize) -> [f64; 4] {
        [self.u_values[e], self.du_values[e], self.u_values[e + 1], self.du_values[e + 1]]
    }

    /// `(u, u', u'')` at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let (e, s) = self.locate(x);
        self.eval_local(e, s)
    }

    #[inline]
    pub fn eval_local(&self, e: usize, s: f64) -> (f64, f64, f64) {
        let c = self.elem_coeffs(e);
        let (n, d, dd) = shape(s, self.elem_len());
        let dot = |w: [f64; 4]| w.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>();
        (dot(n), dot(d), dot(dd))
    }

    pub fn max_value(&self) -> f64 {
        self.u_values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.u_values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Checks the boundary conditions and the nodal obstacle.
    pub fn validate(&self) -> Result<()> {
        let n = self.x_nodes.len();
        if n < 2 || self.u_values.len() != n || self.du_values.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} nodes, {} values, {} slopes",
                n,
                self.u_values.len(),
                self.du_values.len()
            )));
        }
        if self.u_values[0] != 0.0 || self.u_values[n - 1] != 0.0 {
            return Err(Error::InadmissibleDeflection("u(+-L) must vanish".into()));
        }
        if self.bc_mode == BcMode::Clamped && (self.du_values[0] != 0.0 || self.du_values[n - 1] != 0.0) {
            return Err(Error::InadmissibleDeflection("clamped profile needs u'(+-L) = 0".into()));
        }
        if let Some((i, &u)) = self.u_values.iter().enumerate().find(|(_, &u)| u < self.gap_floor || !u.is_finite()) {
            return Err(Error::InadmissibleDeflection(format!(
                "u = {u} at node {i} (x = {}) is below the floor {}",
                self.x_nodes[i], self.gap_floor
            )));
        }
        Ok(())
    }

    /// `||u'||^2` in `L2(-L, L)`.
    pub fn slope_norm_sq(&self) -> f64 {
        self.integrate(|_, _, du, _| du * du)
    }

    /// Integral over `(-L, L)` of a pointwise functional of `(x, u, u', u'')`,
    /// three-point Gauss per element.
    pub fn integrate(&self, f: impl Fn(f64, f64, f64, f64) -> f64) -> f64 {
        let h = self.elem_len();
        let mut acc = 0.0;
        for e in 0..self.n_elem() {
            for &(s, w) in &GAUSS3 {
                let (u, du, ddu) = self.eval_local(e, s);
                acc += w * h * f(self.x_nodes[e] + s * h, u, du, ddu);
            }
        }
        acc
    }
}

pub fn uniform_nodes(half_width: f64, n_elem: usize) -> Vec<f64> {
    assert!(n_elem >= 1, "need at least one element");
    let h = 2.0 * half_width / n_elem as f64;
    (0..=n_elem)
        .map(|i| if i == n_elem { half_width } else { -half_width + i as f64 * h })
        .collect()
}

/// Global bending (`int phi'' phi''`) and stretching (`int phi' phi'`) matrices and the
/// mass-like load vector map for a uniform Hermite grid.
#[derive(Debug, Clone)]
pub struct HermiteMatrices {
    pub bending: DMatrix<f64>,
    pub stretching: DMatrix<f64>,
}

impl HermiteMatrices {
    pub fn new(n_elem: usize, h: f64) -> Self {
        let n = 2 * (n_elem + 1);
        let mut bending = DMatrix::zeros(n, n);
        let mut stretching = DMatrix::zeros(n, n);
        let kb = [
            [12.0, 6.0 * h, -12.0, 6.0 * h],
            [6.0 * h, 4.0 * h * h, -6.0 * h, 2.0 * h * h],
            [-12.0, -6.0 * h, 12.0, -6.0 * h],
            [6.0 * h, 2.0 * h * h, -6.0 * h, 4.0 * h * h],
        ];
        let kt = [
            [36.0, 3.0 * h, -36.0, 3.0 * h],
            [3.0 * h, 4.0 * h * h, -3.0 * h, -h * h],
            [-36.0, -3.0 * h, 36.0, -3.0 * h],
            [3.0 * h, -h * h, -3.0 * h, 4.0 * h * h],
        ];
        let cb = 1.0 / (h * h * h);
        let ct = 1.0 / (30.0 * h);
        for e in 0..n_elem {
            for a in 0..4 {
                for b in 0..4 {
                    bending[(2 * e + a, 2 * e + b)] += cb * kb[a][b];
                    stretching[(2 * e + a, 2 * e + b)] += ct * kt[a][b];
                }
            }
        }
        Self { bending, stretching }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quartic(l: usize) -> DeflectionProfile {
        DeflectionProfile::from_fn(
            1.0,
            l,
            BcMode::Clamped,
            -0.999,
            |x| 0.1 * (1.0 - x * x).powi(2),
            |x| -0.4 * x * (1.0 - x * x),
        )
    }

    #[test]
    fn reproduces_cubics_exactly() {
        let f = |x: f64| 0.3 * x * x * x - x * x + 0.5 * x + 0.2;
        let df = |x: f64| 0.9 * x * x - 2.0 * x + 0.5;
        let mut p = DeflectionProfile::from_fn(1.0, 7, BcMode::Pinned, -1.0, f, df);
        // keep the raw endpoint values for this check
        p.u_values[0] = f(-1.0);
        p.u_values[7] = f(1.0);
        for &x in &[-0.93, -0.31, 0.0, 0.42, 0.99] {
            let (u, du, ddu) = p.eval(x);
            assert!((u - f(x)).abs() < 1e-13);
            assert!((du - df(x)).abs() < 1e-12);
            assert!((ddu - (1.8 * x - 2.0)).abs() < 1e-11);
        }
    }

    #[test]
    fn element_matrices_match_quadrature() {
        let h = 0.37;
        let m = HermiteMatrices::new(1, h);
        for a in 0..4 {
            for b in 0..4 {
                let mut kb = 0.0;
                let mut kt = 0.0;
                for &(s, w) in &GAUSS3 {
                    let (_, d, dd) = shape(s, h);
                    kb += w * h * dd[a] * dd[b];
                    kt += w * h * d[a] * d[b];
                }
                assert!((m.bending[(a, b)] - kb).abs() < 1e-10 * kb.abs().max(1.0));
                assert!((m.stretching[(a, b)] - kt).abs() < 1e-12 * kt.abs().max(1.0));
            }
        }
    }

    #[test]
    fn validation_catches_bc_and_obstacle() {
        let mut p = quartic(8);
        assert!(p.validate().is_ok());
        p.du_values[0] = 0.1;
        assert!(p.validate().is_err());
        let mut p = quartic(8);
        p.u_values[4] = -2.0;
        assert!(matches!(p.validate(), Err(Error::InadmissibleDeflection(_))));
        let mut p = DeflectionProfile::flat(1.0, 4, BcMode::Pinned, -0.9);
        p.du_values[0] = 0.5;
        assert!(p.validate().is_ok());
    }

    #[test]
    fn constrained_dofs_by_mode() {
        let c = DeflectionProfile::flat(1.0, 4, BcMode::Clamped, -0.9);
        assert_eq!(c.constrained_dofs(), vec![0, 1, 8, 9]);
        let p = DeflectionProfile::flat(1.0, 4, BcMode::Pinned, -0.9);
        assert_eq!(p.constrained_dofs(), vec![0, 8]);
    }

    #[test]
    fn coefficient_round_trip() {
        let p = quartic(5);
        let q = p.with_coefficients(&p.coefficients());
        assert_eq!(p, q);
    }
}
