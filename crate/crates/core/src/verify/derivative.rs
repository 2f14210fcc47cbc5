use serde::Serialize;

use crate::catalogue::add_profiles;
use crate::energy_force::{electrostatic_force, ElectrostaticModel, ForceProfile, ShapeSensitivity};
use crate::error::{Error, Result};
use crate::hermite::{DeflectionProfile, GAUSS3};

/// Step ladder for the central quotients.
pub const DEFAULT_STEPS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

/// Finite-difference check of `dE_e(u)[theta] = int g(u) theta`.
#[derive(Debug, Clone, Serialize)]
pub struct DerivativeReport {
    pub direction: String,
    pub steps: Vec<f64>,
    pub quotients: Vec<f64>,
    /// Richardson extrapolants of consecutive quotient pairs.
    pub extrapolants: Vec<f64>,
    pub extrapolated: f64,
    /// `int g(u) theta` with `g` from the interface and top traces.
    pub analytic: f64,
    /// Exact derivative of the discrete energy.
    pub consistent: f64,
    /// Relative mismatch of the extrapolated quotient against `analytic`.
    pub mismatch: f64,
    /// Same, against `consistent`.
    pub consistent_mismatch: f64,
    /// `|D(t_1) - D(t_0)| / |D(t_2) - D(t_1)|`, infinite when the quotients agree exactly.
    pub contraction: f64,
}

impl DerivativeReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.mismatch <= tol
    }
}

fn check_steps(steps: &[f64]) -> Result<()> {
    if steps.is_empty() || steps.iter().any(|&t| !(t > 0.0)) || steps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter { name: "steps", reason: "need positive, strictly decreasing steps".into() });
    }
    Ok(())
}

fn perturbed(u: &DeflectionProfile, theta: &DeflectionProfile, t: f64) -> Result<DeflectionProfile> {
    let v = add_profiles(u, theta, t);
    v.validate().map_err(|e| Error::InadmissiblePerturbation { t, reason: e.to_string() })?;
    Ok(v)
}

fn richardson(steps: &[f64], d: &[f64], order: i32) -> Vec<f64> {
    (1..d.len())
        .map(|i| {
            let r = (steps[i - 1] / steps[i]).powi(order);
            (r * d[i] - d[i - 1]) / (r - 1.0)
        })
        .collect()
}

/// Relative mismatch with a floor of `1e-6 int |g| |theta|` so that directions with
/// a vanishing derivative are compared on an absolute scale.
fn relative(value: f64, reference: f64, floor: f64) -> f64 {
    let diff = (value - reference).abs();
    if diff == 0.0 {
        0.0
    } else {
        diff / reference.abs().max(floor).max(f64::MIN_POSITIVE)
    }
}

fn contraction(d: &[f64]) -> f64 {
    if d.len() < 3 {
        return f64::INFINITY;
    }
    let a = (d[1] - d[0]).abs();
    let b = (d[2] - d[1]).abs();
    if b == 0.0 {
        f64::INFINITY
    } else {
        a / b
    }
}

fn abs_pairing(force: &ForceProfile, theta: &DeflectionProfile) -> f64 {
    let mut acc = 0.0;
    for (k, (&xm, &w)) in force.x.iter().zip(&force.widths).enumerate() {
        let x0 = xm - 0.5 * w;
        for &(s, q) in &GAUSS3 {
            acc += force.g[k].abs() * q * w * theta.eval(x0 + s * w).0.abs();
        }
    }
    acc
}

/// Central quotients `(E_e(u + t theta) - E_e(u - t theta)) / 2t` on the step
/// ladder, extrapolated in `t`, against the force pairing.
pub fn fd_directional_derivative(
    model: &ElectrostaticModel,
    u: &DeflectionProfile,
    theta: &DeflectionProfile,
    direction: &str,
    steps: &[f64],
) -> Result<DerivativeReport> {
    check_steps(steps)?;
    u.validate()?;
    let phi = model.solve(u)?;
    let force = electrostatic_force(&model.traces(&phi), &model.params);
    let analytic = force.pair(theta);
    let consistent = ShapeSensitivity::new(&model.params, &phi).directional(theta);
    let floor = 1e-6 * abs_pairing(&force, theta);

    let mut quotients = Vec::with_capacity(steps.len());
    for &t in steps {
        let plus = perturbed(u, theta, t)?;
        let minus = perturbed(u, theta, -t)?;
        quotients.push((model.energy(&plus)? - model.energy(&minus)?) / (2.0 * t));
    }
    let extrapolants = richardson(steps, &quotients, 2);
    let extrapolated = extrapolants.last().copied().unwrap_or(quotients[0]);
    Ok(DerivativeReport {
        direction: direction.to_string(),
        steps: steps.to_vec(),
        contraction: contraction(&quotients),
        quotients,
        extrapolants,
        extrapolated,
        analytic,
        consistent,
        mismatch: relative(extrapolated, analytic, floor),
        consistent_mismatch: relative(extrapolated, consistent, floor),
    })
}

/// One-sided quotients `(E_e(u + t (w - u)) - E_e(u)) / t` for an admissible `w`,
/// extrapolated to first order, against `int g(u) (w - u)`.
pub fn one_sided_derivative(
    model: &ElectrostaticModel,
    u: &DeflectionProfile,
    w: &DeflectionProfile,
    direction: &str,
    steps: &[f64],
) -> Result<DerivativeReport> {
    check_steps(steps)?;
    if steps[0] > 1.0 {
        return Err(Error::InvalidParameter { name: "steps", reason: "one-sided steps must not exceed 1".into() });
    }
    u.validate()?;
    w.validate()?;
    let theta = add_profiles(w, u, -1.0);
    let phi = model.solve(u)?;
    let e0 = crate::transmission::electrostatic_energy(&phi, &phi.coefficients);
    let force = electrostatic_force(&model.traces(&phi), &model.params);
    let analytic = force.pair(&theta);
    let consistent = ShapeSensitivity::new(&model.params, &phi).directional(&theta);
    let floor = 1e-6 * abs_pairing(&force, &theta);

    let mut quotients = Vec::with_capacity(steps.len());
    for &t in steps {
        let v = perturbed(u, &theta, t)?;
        quotients.push((model.energy(&v)? - e0) / t);
    }
    // two Richardson sweeps: first order, then second
    let first = richardson(steps, &quotients, 1);
    let extrapolants = if first.len() >= 2 { richardson(&steps[1..], &first, 2) } else { first.clone() };
    let extrapolated = extrapolants.last().or(first.last()).copied().unwrap_or(quotients[0]);
    Ok(DerivativeReport {
        direction: direction.to_string(),
        steps: steps.to_vec(),
        contraction: contraction(&quotients),
        quotients,
        extrapolants,
        extrapolated,
        analytic,
        consistent,
        mismatch: relative(extrapolated, analytic, floor),
        consistent_mismatch: relative(extrapolated, consistent, floor),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogue::Shape;
    use crate::params::PhysicalParams;

    fn model() -> ElectrostaticModel {
        ElectrostaticModel::new(PhysicalParams::base(), 16, 8, 8).unwrap()
    }

    #[test]
    fn zero_direction_gives_zero() {
        let m = model();
        let u = DeflectionProfile::flat_for(&m.params, 16);
        let th = DeflectionProfile::flat(1.0, 16, u.bc_mode, -10.0);
        let r = fd_directional_derivative(&m, &u, &th, "zero", &DEFAULT_STEPS).unwrap();
        assert!(r.quotients.iter().all(|&q| q == 0.0));
        assert_eq!(r.analytic, 0.0);
        assert_eq!(r.mismatch, 0.0);
    }

    #[test]
    fn rejects_bad_steps_and_obstacle_violations() {
        let m = model();
        let u = DeflectionProfile::flat_for(&m.params, 16);
        let th = Shape::Bump.profile(-0.05, 1.0, 16, -10.0);
        assert!(fd_directional_derivative(&m, &u, &th, "b", &[1e-3, 1e-2]).is_err());
        let big = Shape::Bump.profile(-50.0, 1.0, 16, -100.0);
        let err = fd_directional_derivative(&m, &u, &big, "b", &[0.1]).unwrap_err();
        assert!(matches!(err, Error::InadmissiblePerturbation { t, .. } if t == 0.1 || t == -0.1));
    }

    #[test]
    fn richardson_removes_the_quadratic_term() {
        let steps = [0.1, 0.05, 0.025];
        let d: Vec<f64> = steps.iter().map(|t| 3.0 + 7.0 * t * t).collect();
        for r in richardson(&steps, &d, 2) {
            assert!((r - 3.0).abs() < 1e-13);
        }
        assert!((contraction(&d) - 4.0).abs() < 1e-9);
    }

    #[test]
    fn consistent_derivative_matches_quotients_on_a_coarse_mesh() {
        let m = model();
        let u = Shape::Skewed.profile(-0.1, 1.0, 16, m.params.gap_floor(1e-3));
        let th = Shape::Wiggle.profile(0.05, 1.0, 16, -10.0);
        let r = fd_directional_derivative(&m, &u, &th, "wiggle", &DEFAULT_STEPS).unwrap();
        assert!(r.consistent_mismatch < 1e-7, "{r:?}");
        assert!(r.mismatch < 5e-2, "{r:?}");
    }
}
