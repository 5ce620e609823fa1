use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore};
use rand_distr::{Distribution, Exp, Normal, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{check_dimension, check_horizon, finite, non_negative, one_minus_exp_over, positive, AffineCoefficients, StructuralModel};
use crate::error::{Error, Result};

/// Jump size law of a compound-Poisson driver component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum JumpSize {
    /// Positive spikes with the given mean.
    Exponential { mean: f64 },
    Normal { mean: f64, std: f64 },
}

impl JumpSize {
    pub fn mean(&self) -> f64 {
        match *self {
            JumpSize::Exponential { mean } | JumpSize::Normal { mean, .. } => mean,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            JumpSize::Exponential { mean } => positive("exponential jump mean", mean),
            JumpSize::Normal { mean, std } => {
                finite("normal jump mean", mean)?;
                non_negative("normal jump std", std)
            }
        }
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        match *self {
            JumpSize::Exponential { mean } => Exp::new(1.0 / mean).expect("validated").sample(rng),
            JumpSize::Normal { mean, std } => Normal::new(mean, std).expect("validated").sample(rng),
        }
    }
}

/// One coordinate of the Lévy driver: `L_t = μ t + σ W_t + Σ_{k ≤ N_t} J_k`
/// with `N` Poisson of rate `jump_rate` per hour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevyDriver {
    #[serde(default)]
    pub drift: f64,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default)]
    pub jump_rate: f64,
    #[serde(default)]
    pub jumps: Option<JumpSize>,
}

impl LevyDriver {
    /// `E L₁`.
    pub fn mean(&self) -> f64 {
        self.drift + self.jump_rate * self.jumps.map_or(0.0, |j| j.mean())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevyOuFactorParams {
    /// Diagonal of `Λ`.
    pub lambda: Vec<f64>,
    pub drivers: Vec<LevyDriver>,
    pub y0: Vec<f64>,
}

/// Arithmetic factor model `g(y) = Σ yᵢ` on a Lévy-driven OU process
/// `dY = -Λ Y dt + dL` with independent coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyOuFactorModel {
    params: LevyOuFactorParams,
}

impl LevyOuFactorModel {
    pub fn new(params: LevyOuFactorParams) -> Result<Self> {
        let n = params.lambda.len();
        if n == 0 || params.drivers.len() != n || params.y0.len() != n {
            return Err(Error::Model(format!(
                "levy_ou_factor needs equal non-zero lengths: lambda {}, drivers {}, y0 {}",
                n,
                params.drivers.len(),
                params.y0.len()
            )));
        }
        for (i, (l, d)) in params.lambda.iter().zip(&params.drivers).enumerate() {
            positive(&format!("lambda[{i}]"), *l)?;
            finite(&format!("drift[{i}]"), d.drift)?;
            non_negative(&format!("sigma[{i}]"), d.sigma)?;
            non_negative(&format!("jump_rate[{i}]"), d.jump_rate)?;
            match d.jumps {
                Some(j) => j.validate()?,
                None if d.jump_rate > 0.0 => {
                    return Err(Error::Model(format!("driver {i} has a jump rate but no jump law")))
                }
                None => {}
            }
        }
        for (i, y) in params.y0.iter().enumerate() {
            finite(&format!("y0[{i}]"), *y)?;
        }
        Ok(Self { params })
    }

    pub fn params(&self) -> &LevyOuFactorParams {
        &self.params
    }
}

impl StructuralModel for LevyOuFactorModel {
    fn name(&self) -> &'static str {
        "levy_ou_factor"
    }

    fn dimension(&self) -> usize {
        self.params.lambda.len()
    }

    fn initial_state(&self) -> Vec<f64> {
        self.params.y0.clone()
    }

    fn expected_price(&self, tau: f64) -> Result<f64> {
        self.conditional_mean(&self.params.y0, 0.0, tau)
    }

    fn g(&self, y: &[f64]) -> f64 {
        y.iter().sum()
    }

    fn conditional_mean(&self, y: &[f64], t: f64, tau: f64) -> Result<f64> {
        check_horizon(t, tau)?;
        check_dimension(self, y)?;
        let s = tau - t;
        Ok(self
            .params
            .lambda
            .iter()
            .zip(&self.params.drivers)
            .zip(y)
            .map(|((&l, d), &yi)| {
                // E ∫_t^τ e^{-λ(τ-u)} dL_u = E L₁ ∫_0^s e^{-λv} dv
                let integral = ((-l * s).exp_m1() / -l) * d.mean();
                (-l * s).exp() * yi + integral
            })
            .sum())
    }

    fn affine_coeffs(&self, t: f64, tau: f64) -> Result<AffineCoefficients> {
        check_horizon(t, tau)?;
        let s = tau - t;
        let p = &self.params;
        let a = DVector::from_iterator(p.lambda.len(), p.lambda.iter().map(|&l| (-l * s).exp()));
        let b = DVector::from_iterator(
            p.lambda.len(),
            p.lambda.iter().zip(&p.drivers).map(|(&l, d)| s * one_minus_exp_over(l * s) * d.mean()),
        );
        Ok(AffineCoefficients { a: DMatrix::from_diagonal(&a), b })
    }

    /// Drift and diffusion are drawn exactly; jumps arrive as a Poisson count
    /// with uniformly placed times, each decayed to `τ`.
    fn simulate_transition(&self, y: &[f64], t: f64, tau: f64, rng: &mut dyn RngCore) -> Result<Vec<f64>> {
        check_horizon(t, tau)?;
        check_dimension(self, y)?;
        let s = tau - t;
        let mut out = Vec::with_capacity(y.len());
        for ((&l, d), &yi) in self.params.lambda.iter().zip(&self.params.drivers).zip(y) {
            let z: f64 = rng.sample(StandardNormal);
            if s == 0.0 {
                out.push(yi);
                continue;
            }
            let mut next = (-l * s).exp() * yi
                + d.drift * s * one_minus_exp_over(l * s)
                + d.sigma * (s * one_minus_exp_over(2.0 * l * s)).sqrt() * z;
            if let (Some(jumps), true) = (d.jumps, d.jump_rate > 0.0) {
                let count: f64 = Poisson::new(d.jump_rate * s).expect("positive rate").sample(rng);
                for _ in 0..count as u64 {
                    let age = s * rng.random::<f64>();
                    next += jumps.sample(rng) * (-l * age).exp();
                }
            }
            out.push(next);
        }
        Ok(out)
    }
}
