//! Structural component `(g, Y)`.
//!
//! A structural model maps a market state `Y_t ∈ Rⁿ` to a price through `g`.
//! Every shipped model admits an affine decomposition
//! `E[g(Y_τ) | Y_t = y] = g(A_t^τ y + B_t^τ)` with deterministic `A`, `B`.
//! [`StructuralModel::conditional_mean`] is evaluated from each model's own
//! closed form, independently of [`StructuralModel::affine_coeffs`], so the
//! two can be checked against each other.

use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::RngCore;

use crate::error::{argument, Error, Result};

mod constant;
mod levy_ou;
mod lucia_schwartz;
mod schwartz_smith;
mod sinh;
mod wrap;

pub use constant::ConstantModel;
pub use levy_ou::{JumpSize, LevyDriver, LevyOuFactorModel, LevyOuFactorParams};
pub use lucia_schwartz::LuciaSchwartz;
pub use schwartz_smith::{SchwartzSmith, SchwartzSmithParams};
pub use sinh::{StructuralSinh, StructuralSinhParams};
pub use wrap::{pfc_consistent_wrap, PfcWrapped, WrapMode};

/// `(A_t^τ, B_t^τ)` of the affine structural component decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineCoefficients {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl AffineCoefficients {
    pub fn identity(n: usize) -> Self {
        Self { a: DMatrix::identity(n, n), b: DVector::zeros(n) }
    }

    /// `A y + B`.
    pub fn apply(&self, y: &[f64]) -> Vec<f64> {
        let y = DVector::from_column_slice(y);
        (&self.a * y + &self.b).iter().copied().collect()
    }
}

pub trait StructuralModel: Debug + Send + Sync {
    fn name(&self) -> &'static str;

    /// State dimension `n`.
    fn dimension(&self) -> usize;

    /// `y₀`.
    fn initial_state(&self) -> Vec<f64>;

    /// The price map `g: Rⁿ → R`.
    fn g(&self, y: &[f64]) -> f64;

    /// `E[g(Y_τ) | Y_t = y]` from the model's closed form.
    fn conditional_mean(&self, y: &[f64], t: f64, tau: f64) -> Result<f64>;

    fn affine_coeffs(&self, t: f64, tau: f64) -> Result<AffineCoefficients>;

    /// One exact draw of `Y_τ` given `Y_t = y`.
    fn simulate_transition(&self, y: &[f64], t: f64, tau: f64, rng: &mut dyn RngCore) -> Result<Vec<f64>>;

    /// Delivery times where `τ ↦ E[g(Y_τ) | Y_t]` may be discontinuous.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// `E g(Y_τ)` without the positivity requirement.
    fn expected_price(&self, tau: f64) -> Result<f64> {
        self.conditional_mean(&self.initial_state(), 0.0, tau)
    }

    /// Full state at trading time `t` from user-supplied coordinates.
    ///
    /// Models with deterministic coordinates may accept fewer than `n` values
    /// and fill the rest in.
    fn lift_state(&self, y: &[f64], _t: f64) -> Result<Vec<f64>> {
        check_dimension(self, y)?;
        Ok(y.to_vec())
    }
}

impl<M: StructuralModel + ?Sized> StructuralModel for Arc<M> {
    fn name(&self) -> &'static str {
        (**self).name()
    }
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn initial_state(&self) -> Vec<f64> {
        (**self).initial_state()
    }
    fn g(&self, y: &[f64]) -> f64 {
        (**self).g(y)
    }
    fn conditional_mean(&self, y: &[f64], t: f64, tau: f64) -> Result<f64> {
        (**self).conditional_mean(y, t, tau)
    }
    fn affine_coeffs(&self, t: f64, tau: f64) -> Result<AffineCoefficients> {
        (**self).affine_coeffs(t, tau)
    }
    fn simulate_transition(&self, y: &[f64], t: f64, tau: f64, rng: &mut dyn RngCore) -> Result<Vec<f64>> {
        (**self).simulate_transition(y, t, tau, rng)
    }
    fn breakpoints(&self) -> Vec<f64> {
        (**self).breakpoints()
    }
    fn expected_price(&self, tau: f64) -> Result<f64> {
        (**self).expected_price(tau)
    }
    fn lift_state(&self, y: &[f64], t: f64) -> Result<Vec<f64>> {
        (**self).lift_state(y, t)
    }
}

/// `E g(Y_τ)`, required to be strictly positive.
pub fn unconditional_mean(model: &dyn StructuralModel, tau: f64) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(argument(format!("tau must be >= 0, got {tau}")));
    }
    let value = model.expected_price(tau)?;
    if value > 0.0 {
        Ok(value)
    } else {
        Err(Error::NonPositiveMean { tau, value })
    }
}

/// Checks the positivity assumption `E g(Y_τ) > 0` on a delivery grid.
pub fn validate_positive_mean(model: &dyn StructuralModel, grid: &[f64]) -> Result<()> {
    grid.iter().try_for_each(|&tau| unconditional_mean(model, tau).map(|_| ()))
}

/// `g(A_t^τ y + B_t^τ)`.
pub fn decomposed_mean(model: &dyn StructuralModel, y: &[f64], t: f64, tau: f64) -> Result<f64> {
    let coeffs = model.affine_coeffs(t, tau)?;
    Ok(model.g(&coeffs.apply(y)))
}

/// Co-expectation `w^Y_t(u, s, y) = g(A_t^u y + B_t^u) g(A_t^s y + B_t^s)`.
pub fn w_y(model: &dyn StructuralModel, t: f64, u: f64, s: f64, y: &[f64]) -> Result<f64> {
    Ok(model.conditional_mean(y, t, u)? * model.conditional_mean(y, t, s)?)
}

pub(crate) fn check_horizon(t: f64, tau: f64) -> Result<()> {
    if !(t.is_finite() && tau.is_finite()) {
        return Err(argument(format!("non-finite times t = {t}, tau = {tau}")));
    }
    if t > tau {
        return Err(argument(format!("trading time {t} after delivery time {tau}")));
    }
    Ok(())
}

pub(crate) fn check_dimension<M: StructuralModel + ?Sized>(model: &M, y: &[f64]) -> Result<()> {
    if y.len() != model.dimension() {
        return Err(argument(format!(
            "{} state has dimension {}, got {}",
            model.name(),
            model.dimension(),
            y.len()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(argument(format!("non-finite state {y:?}")));
    }
    Ok(())
}

pub(crate) fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Model(format!("{name} must be finite and > 0, got {v}")))
    }
}

pub(crate) fn non_negative(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::Model(format!("{name} must be finite and >= 0, got {v}")))
    }
}

pub(crate) fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Model(format!("{name} must be finite, got {v}")))
    }
}

/// `(1 - e^{-x}) / x`, continuous at zero.
pub(crate) fn one_minus_exp_over(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0 - 0.5 * x
    } else {
        -(-x).exp_m1() / x
    }
}

/// Exact Gaussian OU move `e^{-λs} y + sd·z` with `sd² = σ²(1 - e^{-2λs}) / 2λ`.
pub(crate) fn ou_step(y: f64, lambda: f64, sigma: f64, s: f64, z: f64) -> f64 {
    (-lambda * s).exp() * y + sigma * (s * one_minus_exp_over(2.0 * lambda * s)).sqrt() * z
}
