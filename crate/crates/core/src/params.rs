use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar model constants of the plate device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalParams {
    /// Half-width of the plate interval `(-L, L)`.
    pub half_width: f64,
    /// Gap depth `H` between ground plate and undeflected plate.
    pub gap: f64,
    /// Plate thickness `d`.
    pub thickness: f64,
    /// Bending stiffness.
    pub bending: f64,
    /// Linear stretching coefficient.
    pub stretching: f64,
    /// Nonlinear stretching coefficient.
    pub nonlinear_stretching: f64,
    /// Permittivity of the gap region.
    pub sigma1: f64,
    /// Permittivity of the plate.
    pub sigma2: f64,
    /// Potential applied at the top of the plate.
    pub voltage: f64,
    /// Exponent of the boundary profile, `m > 2`.
    pub profile_exponent: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self::base()
    }
}

impl PhysicalParams {
    /// Unit geometry with `sigma2 > sigma1`, used throughout the test suite.
    pub fn base() -> Self {
        Self {
            half_width: 1.0,
            gap: 1.0,
            thickness: 1.0,
            bending: 1.0,
            stretching: 0.0,
            nonlinear_stretching: 0.0,
            sigma1: 1.0,
            sigma2: 2.0,
            voltage: 1.0,
            profile_exponent: 3.0,
        }
    }

    pub fn with_voltage(mut self, voltage: f64) -> Self {
        self.voltage = voltage;
        self
    }

    /// Permittivity jump `sigma1 - sigma2` across the interface.
    pub fn sigma_jump(&self) -> f64 {
        self.sigma1 - self.sigma2
    }

    /// Lowest admissible nodal deflection for a relative gap tolerance.
    pub fn gap_floor(&self, eps_rel: f64) -> f64 {
        -self.gap + eps_rel * self.gap
    }

    /// Checks positivity constraints. A zero voltage is accepted since it is
    /// the natural unloaded state.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("half_width", self.half_width),
            ("gap", self.gap),
            ("thickness", self.thickness),
            ("bending", self.bending),
            ("sigma1", self.sigma1),
            ("sigma2", self.sigma2),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter { name, reason: format!("must be > 0, got {v}") });
            }
        }
        let nonneg = [
            ("stretching", self.stretching),
            ("nonlinear_stretching", self.nonlinear_stretching),
            ("voltage", self.voltage),
        ];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter { name, reason: format!("must be >= 0, got {v}") });
            }
        }
        if !(self.profile_exponent.is_finite() && self.profile_exponent > 2.0) {
            return Err(Error::InvalidParameter {
                name: "profile_exponent",
                reason: format!("must be > 2, got {}", self.profile_exponent),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jump_sign() {
        let p = PhysicalParams::base();
        assert_eq!(p.sigma_jump(), -1.0);
        assert!(p.validate().is_ok());
    }

    #[test]
    fn rejects_bad_values() {
        let mut p = PhysicalParams::base();
        p.profile_exponent = 2.0;
        assert!(p.validate().is_err());
        let mut p = PhysicalParams::base();
        p.gap = 0.0;
        assert!(matches!(p.validate(), Err(Error::InvalidParameter { name: "gap", .. })));
        let mut p = PhysicalParams::base();
        p.stretching = -1.0;
        assert!(p.validate().is_err());
    }
}
