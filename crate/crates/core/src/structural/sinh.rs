use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{check_dimension, check_horizon, non_negative, ou_step, positive, AffineCoefficients, StructuralModel};
use crate::error::{argument, Error, Result};
use crate::step::StepFunction;

/// Merit-order model `g(y₁, y₂) = γ + y₁ sinh(α y₂)` on the state
/// `Y_t = (β(t), D_t)` with Gaussian OU demand `dD = -λ D dt + σ dW`, `D₀ = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralSinhParams {
    pub gamma: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub sigma: f64,
    /// Piecewise-constant positive scale `β(t)`.
    pub beta: StepFunction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructuralSinh {
    params: StructuralSinhParams,
}

impl StructuralSinh {
    pub fn new(params: StructuralSinhParams) -> Result<Self> {
        positive("gamma", params.gamma)?;
        positive("alpha", params.alpha)?;
        positive("lambda", params.lambda)?;
        non_negative("sigma", params.sigma)?;
        if let Some(b) = params.beta.values().iter().find(|b| !(**b > 0.0 && b.is_finite())) {
            return Err(Error::Model(format!("beta must be finite and > 0, got {b}")));
        }
        Ok(Self { params })
    }

    pub fn params(&self) -> &StructuralSinhParams {
        &self.params
    }

    /// `ν²(s) = σ² (1 - e^{-2λs}) / 2λ`, the OU transition variance.
    pub fn nu2(&self, s: f64) -> f64 {
        let p = &self.params;
        p.sigma * p.sigma * -(-2.0 * p.lambda * s).exp_m1() / (2.0 * p.lambda)
    }

    fn growth(&self, s: f64) -> f64 {
        (0.5 * self.params.alpha * self.params.alpha * self.nu2(s)).exp()
    }
}

impl StructuralModel for StructuralSinh {
    fn name(&self) -> &'static str {
        "structural_sinh"
    }

    fn dimension(&self) -> usize {
        2
    }

    fn initial_state(&self) -> Vec<f64> {
        vec![self.params.beta.eval(0.0), 0.0]
    }

    fn g(&self, y: &[f64]) -> f64 {
        self.params.gamma + y[0] * (self.params.alpha * y[1]).sinh()
    }

    fn conditional_mean(&self, y: &[f64], t: f64, tau: f64) -> Result<f64> {
        check_horizon(t, tau)?;
        check_dimension(self, y)?;
        let p = &self.params;
        let s = tau - t;
        let shrink = (p.alpha * (-p.lambda * s).exp() * y[1]).sinh();
        Ok(p.gamma + p.beta.eval(tau) * self.growth(s) * shrink)
    }

    fn affine_coeffs(&self, t: f64, tau: f64) -> Result<AffineCoefficients> {
        check_horizon(t, tau)?;
        let p = &self.params;
        let s = tau - t;
        let a11 = p.beta.eval(tau) / p.beta.eval(t) * self.growth(s);
        let a22 = (-p.lambda * s).exp();
        Ok(AffineCoefficients {
            a: DMatrix::from_diagonal(&DVector::from_vec(vec![a11, a22])),
            b: DVector::zeros(2),
        })
    }

    fn simulate_transition(&self, y: &[f64], t: f64, tau: f64, rng: &mut dyn RngCore) -> Result<Vec<f64>> {
        check_horizon(t, tau)?;
        check_dimension(self, y)?;
        let z: f64 = rng.sample(StandardNormal);
        if tau == t {
            return Ok(y.to_vec());
        }
        let p = &self.params;
        Ok(vec![p.beta.eval(tau), ou_step(y[1], p.lambda, p.sigma, tau - t, z)])
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.params.beta.breakpoints().to_vec()
    }

    /// Accepts either `[D_t]` or the full `[β(t), D_t]`.
    fn lift_state(&self, y: &[f64], t: f64) -> Result<Vec<f64>> {
        match y {
            [d] => Ok(vec![self.params.beta.eval(t), *d]),
            [_, _] => {
                check_dimension(self, y)?;
                Ok(y.to_vec())
            }
            _ => Err(argument(format!("structural_sinh state needs 1 or 2 values, got {}", y.len()))),
        }
    }
}
