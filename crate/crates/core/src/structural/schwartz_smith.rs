use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{check_dimension, check_horizon, finite, non_negative, one_minus_exp_over, positive, AffineCoefficients, StructuralModel};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Two-factor dynamics shared by the Schwartz-Smith and Lucia-Schwartz
/// models: an OU factor `dy¹ = -κ y¹ dt + σ₁ dW¹` and a correlated Brownian
/// motion with drift `y² = μ₂ t + σ₂ ρ W¹ + σ₂ √(1-ρ²) W²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchwartzSmithParams {
    pub kappa: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub rho: f64,
    pub mu2: f64,
    #[serde(default)]
    pub y0: [f64; 2],
}

impl SchwartzSmithParams {
    pub fn validate(&self) -> Result<()> {
        positive("kappa", self.kappa)?;
        non_negative("sigma1", self.sigma1)?;
        non_negative("sigma2", self.sigma2)?;
        finite("mu2", self.mu2)?;
        if !(-1.0..=1.0).contains(&self.rho) {
            return Err(Error::Model(format!("rho must lie in [-1, 1], got {}", self.rho)));
        }
        finite("y0[0]", self.y0[0])?;
        finite("y0[1]", self.y0[1])
    }

    /// `A_t^τ = diag(e^{-κ(τ-t)}, 1)`.
    pub(crate) fn a_matrix(&self, s: f64) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_vec(vec![(-self.kappa * s).exp(), 1.0]))
    }

    /// Conditional mean and variance of `y¹_τ + y²_τ` given the state, as
    /// `(mean, variance)`, over a horizon `s = τ - t`.
    pub(crate) fn sum_moments(&self, y: &[f64], s: f64) -> (f64, f64) {
        let k = self.kappa;
        let mean = (-k * s).exp() * y[0] + y[1] + self.mu2 * s;
        let var1 = self.sigma1 * self.sigma1 * s * one_minus_exp_over(2.0 * k * s);
        let var2 = self.sigma2 * self.sigma2 * s;
        let cov = self.rho * self.sigma1 * self.sigma2 * s * one_minus_exp_over(k * s);
        (mean, var1 + var2 + 2.0 * cov)
    }

    /// Exact joint draw of `(y¹_τ, y²_τ)`.
    pub(crate) fn step(&self, y: &[f64], s: f64, rng: &mut dyn RngCore) -> Vec<f64> {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let z3: f64 = rng.sample(StandardNormal);
        if s <= 0.0 {
            return y.to_vec();
        }
        let k = self.kappa;
        // I = ∫ e^{-κ(τ-u)} dW¹, J = ΔW¹ are jointly Gaussian
        let var_i = s * one_minus_exp_over(2.0 * k * s);
        let cov_ij = s * one_minus_exp_over(k * s);
        let a = var_i.sqrt();
        let c = cov_ij / a;
        let d = (s - c * c).max(0.0).sqrt();
        let i = a * z1;
        let j = c * z1 + d * z2;
        let w2 = s.sqrt() * z3;
        let rho_bar = (1.0 - self.rho * self.rho).max(0.0).sqrt();
        vec![
            (-k * s).exp() * y[0] + self.sigma1 * i,
            y[1] + self.mu2 * s + self.sigma2 * (self.rho * j + rho_bar * w2),
        ]
    }
}

/// Schwartz-Smith spot model `g(y) = exp(y₁ + y₂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchwartzSmith {
    params: SchwartzSmithParams,
}

impl SchwartzSmith {
    pub fn new(params: SchwartzSmithParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params })
    }

    pub fn params(&self) -> &SchwartzSmithParams {
        &self.params
    }

    /// `ln g(B_t^τ)`, the deterministic part of the log conditional mean.
    pub fn log_offset(&self, s: f64) -> f64 {
        let p = &self.params;
        let k = p.kappa;
        (p.mu2 + 0.5 * p.sigma2 * p.sigma2) * s
            + p.sigma1 * p.sigma1 / (4.0 * k) * -(-2.0 * k * s).exp_m1()
            + p.rho * p.sigma1 * p.sigma2 / k * -(-k * s).exp_m1()
    }
}

impl StructuralModel for SchwartzSmith {
    fn name(&self) -> &'static str {
        "schwartz_smith"
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
        (y[0] + y[1]).exp()
    }

    fn conditional_mean(&self, y: &[f64], t: f64, tau: f64) -> Result<f64> {
        check_horizon(t, tau)?;
        check_dimension(self, y)?;
        let (mean, var) = self.params.sum_moments(y, tau - t);
        Ok((mean + 0.5 * var).exp())
    }

    /// `B` puts the whole offset into the drift coordinate.
    fn affine_coeffs(&self, t: f64, tau: f64) -> Result<AffineCoefficients> {
        check_horizon(t, tau)?;
        let s = tau - t;
        Ok(AffineCoefficients {
            a: self.params.a_matrix(s),
            b: DVector::from_vec(vec![0.0, self.log_offset(s)]),
        })
    }

    fn simulate_transition(&self, y: &[f64], t: f64, tau: f64, rng: &mut dyn RngCore) -> Result<Vec<f64>> {
        check_horizon(t, tau)?;
        check_dimension(self, y)?;
        Ok(self.params.step(y, tau - t, rng))
    }
}
