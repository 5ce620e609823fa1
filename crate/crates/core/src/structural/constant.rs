use rand::RngCore;

use super::{check_dimension, check_horizon, finite, AffineCoefficients, StructuralModel};
use crate::error::Result;

/// Deterministic structural price `g ≡ γ`. Useful as a degenerate reference
/// where the futures price is a pure function of the market noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantModel {
    level: f64,
}

impl ConstantModel {
    pub fn new(level: f64) -> Result<Self> {
        finite("level", level)?;
        Ok(Self { level })
    }

    pub fn level(&self) -> f64 {
        self.level
    }
}

impl StructuralModel for ConstantModel {
    fn name(&self) -> &'static str {
        "constant"
    }

    fn dimension(&self) -> usize {
        1
    }

    fn initial_state(&self) -> Vec<f64> {
        vec![self.level]
    }

    fn expected_price(&self, tau: f64) -> Result<f64> {
        self.conditional_mean(&[self.level], 0.0, tau)
    }

    fn g(&self, y: &[f64]) -> f64 {
        y[0]
    }

    fn conditional_mean(&self, y: &[f64], t: f64, tau: f64) -> Result<f64> {
        check_horizon(t, tau)?;
        check_dimension(self, y)?;
        Ok(y[0])
    }

    fn affine_coeffs(&self, t: f64, tau: f64) -> Result<AffineCoefficients> {
        check_horizon(t, tau)?;
        Ok(AffineCoefficients::identity(1))
    }

    fn simulate_transition(&self, y: &[f64], t: f64, tau: f64, _rng: &mut dyn RngCore) -> Result<Vec<f64>> {
        check_horizon(t, tau)?;
        check_dimension(self, y)?;
        Ok(y.to_vec())
    }
}
