use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::{check_dimension, check_horizon, AffineCoefficients, StructuralModel};
use crate::curve::PriceForwardCurve;
use crate::error::{argument, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WrapMode {
    /// `g̃ = f_0(τ) + g - E g(Y_τ)`.
    Arithmetic,
    /// `g̃ = f_0(τ) · g / E g(Y_τ)`.
    Geometric,
}

/// Smallest admissible `E g(Y_τ)` for the geometric wrap, relative to the
/// largest one on the PFC domain.
const GEOMETRIC_MIN_RELATIVE_MEAN: f64 = 1e-10;

/// Upper bound on the sample count used to screen `E g(Y_τ)` over the PFC.
const SCREEN_SAMPLES: usize = 4096;

/// A structural model made consistent with a PFC.
///
/// The state is the inner state extended by two deterministic coordinates,
/// `f_0(t)` and `E g(Y_t)`. Both have zero rows in `A` and carry their
/// delivery-time value in `B`, so the affine decomposition of the inner model
/// carries over unchanged.
#[derive(Debug, Clone)]
pub struct PfcWrapped {
    inner: Arc<dyn StructuralModel>,
    pfc: Arc<PriceForwardCurve>,
    mode: WrapMode,
}

pub fn pfc_consistent_wrap(
    model: Arc<dyn StructuralModel>,
    pfc: Arc<PriceForwardCurve>,
    mode: WrapMode,
) -> Result<PfcWrapped> {
    PfcWrapped::new(model, pfc, mode)
}

impl PfcWrapped {
    pub fn new(inner: Arc<dyn StructuralModel>, pfc: Arc<PriceForwardCurve>, mode: WrapMode) -> Result<Self> {
        if mode == WrapMode::Geometric {
            screen_geometric(inner.as_ref(), &pfc)?;
        }
        Ok(Self { inner, pfc, mode })
    }

    pub fn inner(&self) -> &Arc<dyn StructuralModel> {
        &self.inner
    }

    pub fn pfc(&self) -> &Arc<PriceForwardCurve> {
        &self.pfc
    }

    pub fn mode(&self) -> WrapMode {
        self.mode
    }

    /// `f_0` at `t`, held at the nearest end of the PFC domain outside it.
    fn pfc_coordinate(&self, t: f64) -> f64 {
        let t = t.clamp(self.pfc.start(), self.pfc.horizon());
        self.pfc.value(t).expect("clamped into domain")
    }

    fn mean_coordinate(&self, t: f64) -> Result<f64> {
        self.inner.expected_price(t.max(0.0))
    }

    fn split<'a>(&self, y: &'a [f64]) -> &'a [f64] {
        &y[..self.inner.dimension()]
    }

    /// Relative structural component: `I^a = g - E g` or `I^m = g / E g`.
    pub fn relative_component(&self, y_inner: &[f64], tau: f64) -> Result<f64> {
        let g = self.inner.g(y_inner);
        let m = self.inner.expected_price(tau)?;
        Ok(match self.mode {
            WrapMode::Arithmetic => g - m,
            WrapMode::Geometric => g / m,
        })
    }
}

fn screen_geometric(inner: &dyn StructuralModel, pfc: &PriceForwardCurve) -> Result<()> {
    let mut taus = pfc.knots();
    let span = pfc.horizon() - pfc.start();
    let samples = (span.ceil() as usize).clamp(1, SCREEN_SAMPLES);
    taus.extend((0..=samples).map(|i| pfc.start() + span * i as f64 / samples as f64));
    let means = taus
        .iter()
        .map(|&tau| inner.expected_price(tau.max(0.0)).map(|m| (tau, m)))
        .collect::<Result<Vec<_>>>()?;
    let scale = means.iter().map(|(_, m)| m.abs()).fold(0.0, f64::max);
    for (tau, m) in means {
        if !(m > GEOMETRIC_MIN_RELATIVE_MEAN * scale) || !m.is_finite() {
            return Err(Error::Model(format!(
                "geometric PFC wrap needs E g(Y_tau) bounded away from 0; got {m} at tau = {tau}"
            )));
        }
    }
    Ok(())
}

impl StructuralModel for PfcWrapped {
    fn name(&self) -> &'static str {
        match self.mode {
            WrapMode::Arithmetic => "pfc_arithmetic",
            WrapMode::Geometric => "pfc_geometric",
        }
    }

    fn dimension(&self) -> usize {
        self.inner.dimension() + 2
    }

    fn initial_state(&self) -> Vec<f64> {
        let mut y = self.inner.initial_state();
        y.push(self.pfc_coordinate(0.0));
        y.push(self.inner.g(&y[..self.inner.dimension()]));
        y
    }

    fn g(&self, y: &[f64]) -> f64 {
        let n = self.inner.dimension();
        let (f0, m) = (y[n], y[n + 1]);
        let g = self.inner.g(&y[..n]);
        match self.mode {
            WrapMode::Arithmetic => f0 + (g - m),
            WrapMode::Geometric => f0 * (g / m),
        }
    }

    fn conditional_mean(&self, y: &[f64], t: f64, tau: f64) -> Result<f64> {
        check_horizon(t, tau)?;
        check_dimension(self, y)?;
        let f0 = self.pfc.value(tau)?;
        let inner = self.inner.conditional_mean(self.split(y), t, tau)?;
        let m = self.inner.expected_price(tau)?;
        Ok(match self.mode {
            WrapMode::Arithmetic => f0 + (inner - m),
            WrapMode::Geometric => f0 * (inner / m),
        })
    }

    fn affine_coeffs(&self, t: f64, tau: f64) -> Result<AffineCoefficients> {
        check_horizon(t, tau)?;
        let n = self.inner.dimension();
        let inner = self.inner.affine_coeffs(t, tau)?;
        let mut a = DMatrix::zeros(n + 2, n + 2);
        a.view_mut((0, 0), (n, n)).copy_from(&inner.a);
        let mut b = DVector::zeros(n + 2);
        b.rows_mut(0, n).copy_from(&inner.b);
        b[n] = self.pfc.value(tau)?;
        b[n + 1] = self.inner.expected_price(tau)?;
        Ok(AffineCoefficients { a, b })
    }

    fn simulate_transition(&self, y: &[f64], t: f64, tau: f64, rng: &mut dyn RngCore) -> Result<Vec<f64>> {
        check_horizon(t, tau)?;
        check_dimension(self, y)?;
        let mut next = self.inner.simulate_transition(self.split(y), t, tau, rng)?;
        next.push(self.pfc_coordinate(tau));
        next.push(self.mean_coordinate(tau)?);
        Ok(next)
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut b = self.inner.breakpoints();
        b.extend(self.pfc.knots());
        b
    }

    /// Accepts an inner state (lifted by the inner model) or a full state.
    fn lift_state(&self, y: &[f64], t: f64) -> Result<Vec<f64>> {
        if y.len() == self.dimension() {
            check_dimension(self, y)?;
            return Ok(y.to_vec());
        }
        let mut full = self
            .inner
            .lift_state(y, t)
            .map_err(|e| argument(format!("cannot lift state for wrapped {}: {e}", self.inner.name())))?;
        full.push(self.pfc_coordinate(t));
        full.push(self.mean_coordinate(t)?);
        Ok(full)
    }
}
