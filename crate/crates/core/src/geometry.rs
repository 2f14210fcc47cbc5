//! Physical geometry of the deflected device and its pullback to the flat
//! reference rectangle `(-L, L) x (-H, d)`.
//!
//! The lower region `(-H, 0)` is stretched affinely onto `(-H, u(x))`, the upper
//! region `(0, d)` is shifted rigidly onto `(u(x), u(x) + d)`. The interface is
//! always the reference line `z = 0`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hermite::DeflectionProfile;
use crate::params::PhysicalParams;

/// Region tag of a reference point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Lower,
    Upper,
}

/// Maps a reference point to the physical domain of `u`.
pub fn map_to_physical(params: &PhysicalParams, u: &DeflectionProfile, x: f64, z: f64) -> Result<(f64, f64)> {
    check_reference(params, x, z)?;
    let (uv, _, _) = u.eval(x);
    Ok((x, map_z(params.gap, uv, z)))
}

#[inline]
fn map_z(gap: f64, u: f64, z: f64) -> f64 {
    if z <= 0.0 {
        z + u * (z + gap) / gap
    } else {
        z + u
    }
}

/// Inverse of [`map_to_physical`].
pub fn map_to_reference(
    params: &PhysicalParams,
    u: &DeflectionProfile,
    x: f64,
    zbar: f64,
) -> Result<(f64, f64)> {
    let (uv, _, _) = u.eval(x);
    let h = params.gap;
    if x < -params.half_width - 1e-12 || x > params.half_width + 1e-12 || zbar < -h - 1e-12 || zbar > uv + params.thickness + 1e-12 {
        return Err(Error::OutOfDomain { x, z: zbar });
    }
    let z = if zbar <= uv { (zbar + h) * h / (h + uv) - h } else { zbar - uv };
    Ok((x, z))
}

fn check_reference(params: &PhysicalParams, x: f64, z: f64) -> Result<()> {
    let tol = 1e-12;
    if !(x >= -params.half_width - tol && x <= params.half_width + tol && z >= -params.gap - tol && z <= params.thickness + tol) {
        return Err(Error::OutOfDomain { x, z });
    }
    Ok(())
}

/// Boundary profile `zeta(r) = V min(1, (r - 1)^m / d^m)` for `r > 1`, zero otherwise.
#[inline]
pub fn zeta(params: &PhysicalParams, r: f64) -> f64 {
    if r <= 1.0 {
        0.0
    } else {
        params.voltage * ((r - 1.0) / params.thickness).powf(params.profile_exponent).min(1.0)
    }
}

/// Dirichlet data of the electrostatic problem, as a function of the physical point.
#[derive(Clone)]
pub enum BoundaryData {
    /// `h_u(x, zbar) = zeta(zbar - u(x) + 1)`.
    Model,
    /// Arbitrary trace, used by manufactured-solution checks.
    Custom(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for BoundaryData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryData::Model => write!(f, "Model"),
            BoundaryData::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl BoundaryData {
    pub fn custom(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        BoundaryData::Custom(Arc::new(f))
    }

    pub fn is_model(&self) -> bool {
        matches!(self, BoundaryData::Model)
    }

    /// Value at the physical point `(x, zbar)`.
    pub fn value(&self, params: &PhysicalParams, u: &DeflectionProfile, x: f64, zbar: f64) -> f64 {
        match self {
            BoundaryData::Model => {
                let (uv, _, _) = u.eval(x);
                zeta(params, zbar - uv + 1.0)
            }
            BoundaryData::Custom(f) => f(x, zbar),
        }
    }
}

/// Symmetric 2x2 matrix stored as `[a11, a12, a22]`.
pub type Sym2 = [f64; 3];

/// Pullback coefficient `A = sigma J M M^T`, `M = (D Theta)^{-1}`, at a reference
/// point with local deflection `u` and slope `p`.
#[inline]
pub fn coefficient_at(params: &PhysicalParams, region: Region, z: f64, u: f64, p: f64) -> Sym2 {
    match region {
        Region::Lower => {
            let h = params.gap;
            let w = h + u;
            let q = z + h;
            let sg = params.sigma1;
            [sg * w / h, -sg * p * q / h, sg * (h * h + p * p * q * q) / (w * h)]
        }
        Region::Upper => {
            let sg = params.sigma2;
            [sg, -sg * p, sg * (1.0 + p * p)]
        }
    }
}

/// Partial derivatives of [`coefficient_at`] with respect to `u` and `p`.
#[inline]
pub fn coefficient_derivatives(params: &PhysicalParams, region: Region, z: f64, u: f64, p: f64) -> (Sym2, Sym2) {
    match region {
        Region::Lower => {
            let h = params.gap;
            let w = h + u;
            let q = z + h;
            let sg = params.sigma1;
            let du = [sg / h, 0.0, -sg * (h * h + p * p * q * q) / (w * w * h)];
            let dp = [0.0, -sg * q / h, sg * 2.0 * p * q * q / (w * h)];
            (du, dp)
        }
        Region::Upper => {
            let sg = params.sigma2;
            ([0.0; 3], [0.0, -sg, 2.0 * sg * p])
        }
    }
}

/// Jacobian determinant of the pullback.
#[inline]
pub fn jacobian_at(params: &PhysicalParams, region: Region, u: f64) -> f64 {
    match region {
        Region::Lower => (params.gap + u) / params.gap,
        Region::Upper => 1.0,
    }
}

/// Maps a reference gradient to the physical gradient, `(D Theta^T)^{-1} grad`.
#[inline]
pub fn physical_gradient(params: &PhysicalParams, region: Region, z: f64, u: f64, p: f64, g: [f64; 2]) -> [f64; 2] {
    match region {
        Region::Lower => {
            let w = params.gap + u;
            let q = z + params.gap;
            [g[0] - p * q / w * g[1], params.gap / w * g[1]]
        }
        Region::Upper => [g[0] - p * g[1], g[1]],
    }
}

/// One quadrature sample of the coefficient field.
#[derive(Debug, Clone, Copy)]
pub struct CoefficientSample {
    pub x: f64,
    pub z: f64,
    pub region: Region,
    pub u: f64,
    pub slope: f64,
    pub a: Sym2,
    pub jacobian: f64,
}

/// Coefficient field sampled at the quadrature points of a reference mesh.
#[derive(Debug, Clone)]
pub struct CoefficientField {
    /// Samples grouped per cell: `samples[cell * per_cell + q]`.
    pub samples: Vec<CoefficientSample>,
    pub per_cell: usize,
}

/// Fraction of the gap tolerance below which the pullback is treated as singular.
pub const DEGENERATE_FRACTION: f64 = 0.5;

/// Evaluates the coefficient field at the given reference points (grouped in cells
/// of `per_cell` points each).
pub fn coefficients(
    params: &PhysicalParams,
    u: &DeflectionProfile,
    points: &[(f64, f64)],
    per_cell: usize,
) -> Result<CoefficientField> {
    let eps_gap = (u.gap_floor + params.gap).max(0.0);
    let floor = DEGENERATE_FRACTION * eps_gap;
    let mut samples = Vec::with_capacity(points.len());
    for &(x, z) in points {
        check_reference(params, x, z)?;
        let (uv, p, _) = u.eval(x);
        let gap = params.gap + uv;
        if !(gap > floor) || gap <= 0.0 {
            return Err(Error::DegenerateGeometry { x, gap, floor });
        }
        let region = if z < 0.0 { Region::Lower } else { Region::Upper };
        samples.push(CoefficientSample {
            x,
            z,
            region,
            u: uv,
            slope: p,
            a: coefficient_at(params, region, z, uv, p),
            jacobian: jacobian_at(params, region, uv),
        });
    }
    Ok(CoefficientField { samples, per_cell })
}
