//! Fixed catalogue of clamped shapes used as deflections and perturbation directions.

use std::f64::consts::PI;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::hermite::{BcMode, DeflectionProfile};

/// Shape functions in the normalized coordinate `xi = x / L`; all vanish with their
/// slope at `xi = +-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    /// `(1 - xi^2)^2`
    Bump,
    /// `xi (1 - xi^2)^2`
    Odd,
    /// `(1 - xi^2)^2 (1 + xi) / 2`
    Skewed,
    /// `(1 - xi^2)^2 cos(pi xi)`
    Wiggle,
    /// `sin^2(pi xi)`
    DoubleHump,
    /// `(1 - xi^2)^3`
    Narrow,
}

impl Shape {
    pub const ALL: [Shape; 6] = [Shape::Bump, Shape::Odd, Shape::Skewed, Shape::Wiggle, Shape::DoubleHump, Shape::Narrow];

    pub fn name(self) -> &'static str {
        match self {
            Shape::Bump => "bump",
            Shape::Odd => "odd",
            Shape::Skewed => "skewed",
            Shape::Wiggle => "wiggle",
            Shape::DoubleHump => "double_hump",
            Shape::Narrow => "narrow",
        }
    }

    /// Value and derivative with respect to `xi`.
    pub fn eval(self, xi: f64) -> (f64, f64) {
        let b = 1.0 - xi * xi;
        let db = -2.0 * xi;
        match self {
            Shape::Bump => (b * b, 2.0 * b * db),
            Shape::Odd => (xi * b * b, b * b + xi * 2.0 * b * db),
            Shape::Skewed => {
                let s = 0.5 * (1.0 + xi);
                (b * b * s, 2.0 * b * db * s + 0.5 * b * b)
            }
            Shape::Wiggle => {
                let (c, dc) = ((PI * xi).cos(), -PI * (PI * xi).sin());
                (b * b * c, 2.0 * b * db * c + b * b * dc)
            }
            Shape::DoubleHump => {
                let s = (PI * xi).sin();
                (s * s, 2.0 * PI * s * (PI * xi).cos())
            }
            Shape::Narrow => (b * b * b, 3.0 * b * b * db),
        }
    }

    /// Hermite interpolant of `amplitude * shape(x / L)`.
    pub fn profile(self, amplitude: f64, half_width: f64, n_elem: usize, gap_floor: f64) -> DeflectionProfile {
        DeflectionProfile::from_fn(
            half_width,
            n_elem,
            BcMode::Clamped,
            gap_floor,
            move |x| amplitude * self.eval(x / half_width).0,
            move |x| amplitude * self.eval(x / half_width).1 / half_width,
        )
    }
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Shape::ALL
            .into_iter()
            .find(|sh| sh.name() == s)
            .ok_or_else(|| Error::InvalidParameter { name: "shape", reason: format!("unknown shape `{s}`") })
    }
}

/// Pointwise sum of two profiles on the same grid.
pub fn add_profiles(a: &DeflectionProfile, b: &DeflectionProfile, scale: f64) -> DeflectionProfile {
    let ca = a.coefficients();
    let cb = b.coefficients();
    let c: Vec<f64> = ca.iter().zip(&cb).map(|(x, y)| x + scale * y).collect();
    a.with_coefficients(&c)
}
