use nalgebra::DVector;
use rand::RngCore;

use super::{check_dimension, check_horizon, AffineCoefficients, SchwartzSmithParams, StructuralModel};
use crate::error::Result;

/// Arithmetic two-factor spot model `g(y) = y₁ + y₂` on the Schwartz-Smith
/// factor dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct LuciaSchwartz {
    params: SchwartzSmithParams,
}

impl LuciaSchwartz {
    pub fn new(params: SchwartzSmithParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params })
    }

    pub fn params(&self) -> &SchwartzSmithParams {
        &self.params
    }
}

impl StructuralModel for LuciaSchwartz {
    fn name(&self) -> &'static str {
        "lucia_schwartz"
    }

    fn dimension(&self) -> usize {
        2
    }

    fn initial_state(&self) -> Vec<f64> {
        self.params.y0.to_vec()
    }

    fn expected_price(&self, tau: f64) -> Result<f64> {
        self.conditional_mean(&self.params.y0, 0.0, tau)
    }

    fn g(&self, y: &[f64]) -> f64 {
        y[0] + y[1]
    }

    fn conditional_mean(&self, y: &[f64], t: f64, tau: f64) -> Result<f64> {
        check_horizon(t, tau)?;
        check_dimension(self, y)?;
        Ok(self.params.sum_moments(y, tau - t).0)
    }

    fn affine_coeffs(&self, t: f64, tau: f64) -> Result<AffineCoefficients> {
        check_horizon(t, tau)?;
        let s = tau - t;
        Ok(AffineCoefficients {
            a: self.params.a_matrix(s),
            b: DVector::from_vec(vec![0.0, self.params.mu2 * s]),
        })
    }

    fn simulate_transition(&self, y: &[f64], t: f64, tau: f64, rng: &mut dyn RngCore) -> Result<Vec<f64>> {
        check_horizon(t, tau)?;
        check_dimension(self, y)?;
        Ok(self.params.step(y, tau - t, rng))
    }
}
