//! Forward kernels and the delivery products built on them.
//!
//! With the affine decomposition, the forward kernel at trading time `t` is
//! `f_t(τ) = X_t^τ g(A_t^τ Y_t + B_t^τ)`, and every product with a delivery
//! period is an average of it: futures, day-ahead hours and the intraday
//! indices.

use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};
use crate::noise::{NoiseFactors, VolatilityStructure};
use crate::quadrature::{DeliveryQuadrature, QuadratureSpec};
use crate::structural::StructuralModel;

/// Everything needed to evaluate `f_t(τ)` at trading time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketState {
    pub t: f64,
    pub y: Vec<f64>,
    pub noise: NoiseFactors,
}

impl MarketState {
    pub fn new(t: f64, y: Vec<f64>, noise: NoiseFactors) -> Result<Self> {
        if noise.t != t {
            return Err(argument(format!("noise state at {} but market state at {t}", noise.t)));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(argument(format!("non-finite structural state {y:?}")));
        }
        Ok(Self { t, y, noise })
    }

    /// State at `t = 0`: `Y_0 = y₀`, `X_0 ≡ 1`.
    pub fn initial(model: &dyn StructuralModel) -> Self {
        Self { t: 0.0, y: model.initial_state(), noise: NoiseFactors::initial() }
    }

    /// `X_t^τ`.
    pub fn noise_value(&self, vol: &VolatilityStructure, tau: f64) -> f64 {
        self.noise.value(vol, tau)
    }
}

/// `f_t(τ) = X_t^τ E[g(Y_τ) | Y_t]`.
pub fn forward_kernel(
    state: &MarketState,
    model: &dyn StructuralModel,
    vol: &VolatilityStructure,
    tau: f64,
) -> Result<f64> {
    let mean = model.conditional_mean(&state.y, state.t, tau)?;
    Ok(state.noise_value(vol, tau) * mean)
}

/// Breakpoints of `u ↦ f_t(u)`: PFC and model knots plus `σ₂` jumps.
pub fn kernel_breakpoints(model: &dyn StructuralModel, vol: &VolatilityStructure) -> Vec<f64> {
    let mut b = model.breakpoints();
    b.extend_from_slice(vol.breakpoints());
    b
}

fn check_window(t: f64, tau1: f64, tau2: f64) -> Result<()> {
    if !(tau1 < tau2) {
        return Err(argument(format!("delivery window needs tau1 < tau2, got [{tau1}, {tau2}]")));
    }
    if t > tau1 {
        return Err(argument(format!("trading time {t} after delivery start {tau1}")));
    }
    Ok(())
}

/// A delivery window with its quadrature rule, reusable across states.
#[derive(Debug, Clone)]
pub struct FuturesWindow {
    quad: DeliveryQuadrature,
}

impl FuturesWindow {
    pub fn new(
        model: &dyn StructuralModel,
        vol: &VolatilityStructure,
        tau1: f64,
        tau2: f64,
        spec: &QuadratureSpec,
    ) -> Result<Self> {
        let quad = DeliveryQuadrature::new(tau1, tau2, &kernel_breakpoints(model, vol), spec)?;
        Ok(Self { quad })
    }

    pub fn quadrature(&self) -> &DeliveryQuadrature {
        &self.quad
    }

    /// `F_t(τ₁, τ₂) = (τ₂ - τ₁)⁻¹ ∫ f_t(u) du`.
    pub fn price(&self, state: &MarketState, model: &dyn StructuralModel, vol: &VolatilityStructure) -> Result<f64> {
        check_window(state.t, self.quad.tau1(), self.quad.tau2())?;
        let integral = self.quad.try_integrate(|u| forward_kernel(state, model, vol, u))?;
        Ok(integral / self.quad.length())
    }
}

pub fn futures_price(
    state: &MarketState,
    model: &dyn StructuralModel,
    vol: &VolatilityStructure,
    tau1: f64,
    tau2: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    check_window(state.t, tau1, tau2)?;
    FuturesWindow::new(model, vol, tau1, tau2, quad)?.price(state, model, vol)
}

/// `t_d^h` in hours from the epoch.
pub fn delivery_hour(day: i64, hour: u32) -> f64 {
    24.0 * day as f64 + hour as f64
}

/// Time of the day-ahead auction for day `d`, held on day `d - 1` at hour `a`.
pub fn auction_time(day: i64, auction_hour: u32) -> f64 {
    delivery_hour(day - 1, auction_hour)
}

/// Day-ahead price `S(d, h) = F_t(t_d^h, t_d^{h+1})` with `state` taken at the auction.
pub fn day_ahead_spot(
    state: &MarketState,
    model: &dyn StructuralModel,
    vol: &VolatilityStructure,
    day: i64,
    hour: u32,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if hour > 23 {
        return Err(argument(format!("hour must be in 0..=23, got {hour}")));
    }
    let start = delivery_hour(day, hour);
    futures_price(state, model, vol, start, start + 1.0, quad)
}

/// Lead window of the intraday `ID_n` index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IdWindow {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "3")]
    Three,
}

impl IdWindow {
    pub fn hours(self) -> f64 {
        match self {
            IdWindow::One => 1.0,
            IdWindow::Three => 3.0,
        }
    }

    /// `[τ₁ - n, τ₁ - 0.5]`.
    pub fn window(self, tau1: f64) -> (f64, f64) {
        (tau1 - self.hours(), tau1 - 0.5)
    }
}

impl TryFrom<u32> for IdWindow {
    type Error = Error;

    fn try_from(n: u32) -> Result<Self> {
        match n {
            1 => Ok(IdWindow::One),
            3 => Ok(IdWindow::Three),
            _ => Err(argument(format!("ID index window must be 1 or 3 hours, got {n}"))),
        }
    }
}

fn interpolate(path: &[(f64, f64)], x: f64) -> f64 {
    let i = path.partition_point(|&(u, _)| u <= x).clamp(1, path.len() - 1);
    let (u0, f0) = path[i - 1];
    let (u1, f1) = path[i];
    if u1 == u0 {
        return f1;
    }
    f0 + (f1 - f0) * (x - u0) / (u1 - u0)
}

/// `ID_n(τ₁, τ₂) = 2/(2n-1) ∫_{τ₁-n}^{τ₁-0.5} F_u(τ₁, τ₂) du`.
///
/// `path` holds `(u, F_u(τ₁, τ₂))` samples in ascending trading time. The
/// integral uses the trapezoid rule on the samples, with linear interpolation
/// at the window ends.
pub fn id_index(path: &[(f64, f64)], n: IdWindow, tau1: f64, tau2: f64) -> Result<f64> {
    if !(tau1 < tau2) {
        return Err(argument(format!("delivery window needs tau1 < tau2, got [{tau1}, {tau2}]")));
    }
    if path.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(argument("ID index path times must be strictly increasing"));
    }
    let (lo, hi) = n.window(tau1);
    let (have_start, have_end) = match (path.first(), path.last()) {
        (Some(a), Some(b)) => (a.0, b.0),
        _ => (f64::NAN, f64::NAN),
    };
    if path.len() < 2 || !(have_start <= lo) || !(have_end >= hi) {
        return Err(Error::Coverage { need_start: lo, need_end: hi, have_start, have_end });
    }
    let mut points = Vec::with_capacity(path.len() + 2);
    points.push((lo, interpolate(path, lo)));
    points.extend(path.iter().copied().filter(|&(u, _)| u > lo && u < hi));
    points.push((hi, interpolate(path, hi)));
    // Integrate relative to the first value so that a constant path is
    // reproduced exactly; the window length is n - 1/2.
    let anchor = points[0].1;
    let integral: f64 = points
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * ((w[0].1 - anchor) + (w[1].1 - anchor)))
        .sum();
    Ok(anchor + 2.0 / (2.0 * n.hours() - 1.0) * integral)
}

/// Futures prices `(t, F_t(τ₁, τ₂))` along a simulated state path, skipping
/// states after the delivery start.
pub fn futures_path(
    states: &[MarketState],
    model: &dyn StructuralModel,
    vol: &VolatilityStructure,
    tau1: f64,
    tau2: f64,
    quad: &QuadratureSpec,
) -> Result<Vec<(f64, f64)>> {
    let window = FuturesWindow::new(model, vol, tau1, tau2, quad)?;
    states
        .iter()
        .filter(|s| s.t <= tau1)
        .map(|s| Ok((s.t, window.price(s, model, vol)?)))
        .collect()
}

/// Discount factors `d_t(τ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiscountCurve {
    /// Continuously compounded rate per hour.
    Flat { rate: f64 },
    /// Discount factors `d_0(τ)` at the given times, log-linear in between.
    Table { times: Vec<f64>, factors: Vec<f64> },
}

impl Default for DiscountCurve {
    fn default() -> Self {
        DiscountCurve::Flat { rate: 0.0 }
    }
}

impl DiscountCurve {
    pub fn flat(rate: f64) -> Self {
        DiscountCurve::Flat { rate }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DiscountCurve::Flat { rate } if rate.is_finite() => Ok(()),
            DiscountCurve::Flat { rate } => Err(argument(format!("non-finite discount rate {rate}"))),
            DiscountCurve::Table { times, factors } => {
                if times.len() < 2 || times.len() != factors.len() {
                    return Err(argument("discount table needs at least two matching times and factors"));
                }
                if times.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(argument("discount table times must be strictly increasing"));
                }
                if factors.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
                    return Err(argument("discount factors must be finite and positive"));
                }
                Ok(())
            }
        }
    }

    pub fn is_unity(&self) -> bool {
        matches!(self, DiscountCurve::Flat { rate } if *rate == 0.0)
    }

    fn log_factor0(&self, tau: f64) -> Result<f64> {
        match self {
            DiscountCurve::Flat { rate } => Ok(-rate * tau),
            DiscountCurve::Table { times, factors } => {
                let (first, last) = (times[0], times[times.len() - 1]);
                if tau < first || tau > last {
                    return Err(Error::Domain { what: "discount time", value: tau, start: first, end: last });
                }
                let i = times.partition_point(|&x| x <= tau).clamp(1, times.len() - 1);
                let w = (tau - times[i - 1]) / (times[i] - times[i - 1]);
                Ok((1.0 - w) * factors[i - 1].ln() + w * factors[i].ln())
            }
        }
    }

    /// `d_t(τ)`; `d_t(t) = 1`.
    pub fn factor(&self, t: f64, tau: f64) -> Result<f64> {
        if let DiscountCurve::Flat { rate } = self {
            return Ok((-rate * (tau - t)).exp());
        }
        Ok((self.log_factor0(tau)? - self.log_factor0(t)?).exp())
    }

    fn breakpoints(&self) -> &[f64] {
        match self {
            DiscountCurve::Flat { .. } => &[],
            DiscountCurve::Table { times, .. } => times,
        }
    }
}

/// When a futures contract with non-zero rates is settled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Settlement {
    /// Payments spread over the delivery period.
    Continuous,
    /// One payment at the end of delivery.
    Terminal,
}

/// Futures price under discounting.
///
/// Continuous settlement: `∫ d f du / ∫ d du`. Terminal settlement:
/// `∫ d f du / ((τ₂ - τ₁) d_t(τ₂))`. A zero flat rate reduces to
/// [`futures_price`].
#[allow(clippy::too_many_arguments)]
pub fn discounted_futures(
    state: &MarketState,
    model: &dyn StructuralModel,
    vol: &VolatilityStructure,
    tau1: f64,
    tau2: f64,
    disc: &DiscountCurve,
    settlement: Settlement,
    quad: &QuadratureSpec,
) -> Result<f64> {
    disc.validate()?;
    if disc.is_unity() {
        return futures_price(state, model, vol, tau1, tau2, quad);
    }
    check_window(state.t, tau1, tau2)?;
    let mut knots = kernel_breakpoints(model, vol);
    knots.extend_from_slice(disc.breakpoints());
    let rule = DeliveryQuadrature::new(tau1, tau2, &knots, quad)?;
    let weighted = rule.try_integrate(|u| Ok(disc.factor(state.t, u)? * forward_kernel(state, model, vol, u)?))?;
    let denominator = match settlement {
        Settlement::Continuous => rule.try_integrate(|u| disc.factor(state.t, u))?,
        Settlement::Terminal => (tau2 - tau1) * disc.factor(state.t, tau2)?,
    };
    Ok(weighted / denominator)
}
