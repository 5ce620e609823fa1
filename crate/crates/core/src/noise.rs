//! Multiplicative market noise `X_t^τ`.
//!
//! The noise is a driftless geometric Brownian motion in trading time with a
//! deterministic two-factor volatility in the Hull-White style:
//! `Σ(t, τ) = (σ₁ e^{-κ(τ-t)}, σ₂(τ))`. Both factors are shared by every
//! delivery time, so the whole noise surface at trading time `t` is a function
//! of two numbers, see [`NoiseFactors`].

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};
use crate::quadrature::gauss_legendre;
use crate::step::StepFunction;

/// Deterministic volatility of the market noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VolatilityJson", into = "VolatilityJson")]
pub struct VolatilityStructure {
    kappa: f64,
    sigma1: f64,
    sigma2: StepFunction,
}

#[derive(Serialize, Deserialize)]
struct VolatilityJson {
    kappa: f64,
    sigma1: f64,
    sigma2: StepFunction,
}

impl TryFrom<VolatilityJson> for VolatilityStructure {
    type Error = Error;

    fn try_from(j: VolatilityJson) -> Result<Self> {
        Self::new(j.kappa, j.sigma1, j.sigma2)
    }
}

impl From<VolatilityStructure> for VolatilityJson {
    fn from(v: VolatilityStructure) -> Self {
        VolatilityJson { kappa: v.kappa, sigma1: v.sigma1, sigma2: v.sigma2 }
    }
}

impl VolatilityStructure {
    pub fn new(kappa: f64, sigma1: f64, sigma2: StepFunction) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::Model(format!("noise kappa must be finite and > 0, got {kappa}")));
        }
        if !(sigma1.is_finite() && sigma1 >= 0.0) {
            return Err(Error::Model(format!("noise sigma1 must be finite and >= 0, got {sigma1}")));
        }
        if let Some(v) = sigma2.values().iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::Model(format!("noise sigma2 segments must be >= 0, got {v}")));
        }
        Ok(Self { kappa, sigma1, sigma2 })
    }

    /// Constant long-term volatility on all delivery times.
    pub fn constant(kappa: f64, sigma1: f64, sigma2: f64) -> Result<Self> {
        Self::new(kappa, sigma1, StepFunction::constant(sigma2))
    }

    /// No noise at all: `X ≡ 1`.
    pub fn zero() -> Self {
        Self { kappa: 1.0, sigma1: 0.0, sigma2: StepFunction::constant(0.0) }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn sigma1(&self) -> f64 {
        self.sigma1
    }

    pub fn sigma2(&self, tau: f64) -> f64 {
        self.sigma2.eval(tau)
    }

    pub fn is_zero(&self) -> bool {
        self.sigma1 == 0.0 && self.sigma2.values().iter().all(|&v| v == 0.0)
    }

    /// Delivery times where `σ₂` jumps.
    pub fn breakpoints(&self) -> &[f64] {
        self.sigma2.breakpoints()
    }

    /// `Σ(t, τ)`.
    pub fn loadings(&self, t: f64, tau: f64) -> [f64; 2] {
        [self.sigma1 * (-self.kappa * (tau - t)).exp(), self.sigma2(tau)]
    }

    /// `∫_{t0}^{t1} Σ(v, a)·Σ(v, b) dv` in closed form.
    pub(crate) fn covariance_between(&self, t0: f64, t1: f64, a: f64, b: f64) -> f64 {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let k = self.kappa;
        let dt = t1 - t0;
        // e^{-κ(a-t1)} e^{-κ(b-t1)} (1 - e^{-2κ dt}) / 2κ never overflows for a, b >= t1
        let short = self.sigma1 * self.sigma1
            * (-k * (a - t1)).exp()
            * (-k * (b - t1)).exp()
            * -(-2.0 * k * dt).exp_m1()
            / (2.0 * k);
        short + self.sigma2(a) * self.sigma2(b) * dt
    }

    /// `∫_0^t Σ(v, a)·Σ(v, b) dv`, the covariance of `ln X_t^a` and `ln X_t^b`.
    pub fn covariance_integral(&self, t: f64, tau_a: f64, tau_b: f64) -> Result<f64> {
        check_times(t, tau_a, tau_b)?;
        Ok(self.covariance_between(0.0, t, tau_a, tau_b))
    }

    /// Co-expectation `w^X_t(u, s) = E[X_t^u X_t^s]`.
    pub fn w_x(&self, t: f64, u: f64, s: f64) -> Result<f64> {
        Ok(self.covariance_integral(t, u, s)?.exp())
    }
}

fn check_times(t: f64, tau_a: f64, tau_b: f64) -> Result<()> {
    if !(t >= 0.0) {
        return Err(argument(format!("trading time must be >= 0, got {t}")));
    }
    if t > tau_a.min(tau_b) {
        return Err(argument(format!(
            "trading time {t} after delivery time {}",
            tau_a.min(tau_b)
        )));
    }
    Ok(())
}

/// A general deterministic volatility `Σ(t, τ) ∈ R^m`.
pub trait Volatility {
    fn factor_count(&self) -> usize;

    fn loadings_into(&self, t: f64, tau: f64, out: &mut [f64]);

    /// Covariance integral by 64-node Gauss-Legendre on `[0, t]`, for
    /// volatility structures without a closed form.
    fn covariance_integral_quadrature(&self, t: f64, tau_a: f64, tau_b: f64) -> Result<f64> {
        check_times(t, tau_a, tau_b)?;
        if t == 0.0 {
            return Ok(0.0);
        }
        let m = self.factor_count();
        let mut sa = vec![0.0; m];
        let mut sb = vec![0.0; m];
        gauss_legendre(64, 0.0, t, |v| {
            self.loadings_into(v, tau_a, &mut sa);
            self.loadings_into(v, tau_b, &mut sb);
            sa.iter().zip(&sb).map(|(x, y)| x * y).sum()
        })
    }
}

impl Volatility for VolatilityStructure {
    fn factor_count(&self) -> usize {
        2
    }

    fn loadings_into(&self, t: f64, tau: f64, out: &mut [f64]) {
        out.copy_from_slice(&self.loadings(t, tau));
    }
}

/// The two Brownian factors driving the noise at trading time `t`:
/// `short = ∫_0^t e^{-κ(t-v)} dW¹_v` and `long = W²_t`.
///
/// They determine `X_t^τ` exactly for every delivery time `τ ≥ t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseFactors {
    pub t: f64,
    pub short: f64,
    pub long: f64,
}

impl NoiseFactors {
    pub fn initial() -> Self {
        Self { t: 0.0, short: 0.0, long: 0.0 }
    }

    /// `ln X_t^τ`.
    pub fn log_value(&self, vol: &VolatilityStructure, tau: f64) -> f64 {
        let [a, b] = vol.loadings(self.t, tau);
        a * self.short + b * self.long - 0.5 * vol.covariance_between(0.0, self.t, tau, tau)
    }

    /// `X_t^τ`.
    pub fn value(&self, vol: &VolatilityStructure, tau: f64) -> f64 {
        if self.t == 0.0 {
            return 1.0;
        }
        self.log_value(vol, tau).exp()
    }

    /// Exact transition to trading time `t1 >= self.t`.
    pub fn advance<R: Rng + ?Sized>(&self, vol: &VolatilityStructure, t1: f64, rng: &mut R) -> Self {
        let dt = t1 - self.t;
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        if dt <= 0.0 {
            return *self;
        }
        let k = vol.kappa();
        let decay = (-k * dt).exp();
        let sd = (-(-2.0 * k * dt).exp_m1() / (2.0 * k)).sqrt();
        Self {
            t: t1,
            short: decay * self.short + sd * z1,
            long: self.long + dt.sqrt() * z2,
        }
    }
}

/// Noise realisation at trading time `t` on a delivery grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseState {
    pub factors: NoiseFactors,
    /// `X_t^τ` per delivery grid point.
    pub values: Vec<f64>,
    /// Accumulated `Var ln X_t^τ` per delivery grid point.
    pub log_variance: Vec<f64>,
}

impl NoiseState {
    pub fn t(&self) -> f64 {
        self.factors.t
    }

    pub fn on_grid(factors: NoiseFactors, vol: &VolatilityStructure, delivery_grid: &[f64]) -> Self {
        let values = delivery_grid.iter().map(|&tau| factors.value(vol, tau)).collect();
        let log_variance = delivery_grid
            .iter()
            .map(|&tau| vol.covariance_between(0.0, factors.t, tau, tau))
            .collect();
        Self { factors, values, log_variance }
    }
}

pub(crate) fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(argument(format!("{name} grid is empty")));
    }
    if grid.iter().any(|t| !t.is_finite()) {
        return Err(argument(format!("{name} grid has non-finite entries")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(argument(format!("{name} grid must be strictly increasing")));
    }
    Ok(())
}

/// Simulates the noise surface on `delivery_grid` at each trading time.
///
/// Increments of `ln X` are drawn exactly: two shared Gaussian factor moves
/// per step, with the `-½ Var` compensator that keeps every `X^τ` a unit-mean
/// martingale.
pub fn simulate_noise<R: Rng + ?Sized>(
    vol: &VolatilityStructure,
    trading_grid: &[f64],
    delivery_grid: &[f64],
    rng: &mut R,
) -> Result<Vec<NoiseState>> {
    check_grid("trading", trading_grid)?;
    check_grid("delivery", delivery_grid)?;
    if trading_grid[0] < 0.0 {
        return Err(argument("trading grid starts before 0"));
    }
    let last = *trading_grid.last().expect("non-empty");
    if last > delivery_grid[0] {
        return Err(argument(format!(
            "trading grid reaches {last}, after the first delivery time {}",
            delivery_grid[0]
        )));
    }
    let mut factors = NoiseFactors::initial();
    let mut out = Vec::with_capacity(trading_grid.len());
    for &t in trading_grid {
        factors = factors.advance(vol, t, rng);
        out.push(NoiseState::on_grid(factors, vol, delivery_grid));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::path_rng;

    fn vol() -> VolatilityStructure {
        VolatilityStructure::new(
            0.5,
            0.2,
            StepFunction::new(vec![0.0, 5.0], vec![0.1, 0.15]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn covariance_examples() {
        let v = VolatilityStructure::constant(1.0, 0.0, 0.1).unwrap();
        assert_eq!(v.covariance_integral(0.0, 3.0, 4.0).unwrap(), 0.0);
        assert!((v.covariance_integral(1.0, 2.0, 7.0).unwrap() - 0.01).abs() < 1e-15);
        assert!((v.w_x(1.0, 3.0, 3.0).unwrap() - 0.01f64.exp()).abs() < 1e-15);
        assert_eq!(v.w_x(0.0, 3.0, 9.0).unwrap(), 1.0);

        let v = VolatilityStructure::constant(1.0, 0.2, 0.0).unwrap();
        let expected = 0.02 * (1.0 - (-2.0f64).exp());
        assert!((v.covariance_integral(1.0, 1.0, 1.0).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn closed_form_matches_quadrature_route() {
        let v = vol();
        for &(t, a, b) in &[(1.0, 2.0, 3.0), (4.0, 4.5, 7.0), (2.5, 6.0, 6.0), (0.3, 100.0, 0.3)] {
            let closed = v.covariance_integral(t, a, b).unwrap();
            let quad = v.covariance_integral_quadrature(t, a, b).unwrap();
            assert!((closed - quad).abs() <= 1e-13 * closed.abs().max(1e-300), "{t} {a} {b}: {closed} vs {quad}");
        }
    }

    #[test]
    fn covariance_argument_errors() {
        let v = vol();
        assert!(v.covariance_integral(3.0, 2.0, 5.0).is_err());
        assert!(v.w_x(-1.0, 2.0, 5.0).is_err());
    }

    #[test]
    fn large_times_stay_finite() {
        let v = VolatilityStructure::constant(1.0, 0.3, 0.01).unwrap();
        let c = v.covariance_integral(8000.0, 8760.0, 8760.0).unwrap();
        assert!(c.is_finite());
        let f = NoiseFactors { t: 8000.0, short: 0.4, long: -2.0 };
        assert!(f.value(&v, 8760.0).is_finite());
    }

    #[test]
    fn w_x_symmetric_and_at_least_one() {
        let v = vol();
        for &(t, u, s) in &[(0.5, 1.0, 9.0), (2.0, 2.0, 2.0), (3.0, 4.0, 6.0)] {
            let a = v.w_x(t, u, s).unwrap();
            assert_eq!(a, v.w_x(t, s, u).unwrap());
            assert!(a >= 1.0);
        }
    }

    #[test]
    fn zero_vol_is_identically_one() {
        let v = VolatilityStructure::zero();
        let mut rng = path_rng(1, 0);
        let states = simulate_noise(&v, &[0.0, 1.0, 2.5], &[3.0, 4.0, 10.0], &mut rng).unwrap();
        assert_eq!(states.len(), 3);
        for s in states {
            assert!(s.values.iter().all(|&x| x == 1.0));
            assert!(s.log_variance.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn initial_state_is_one() {
        let v = vol();
        let mut rng = path_rng(1, 0);
        let states = simulate_noise(&v, &[0.0, 1.0], &[3.0, 4.0], &mut rng).unwrap();
        assert!(states[0].values.iter().all(|&x| x == 1.0));
        assert!(states[1].values.iter().all(|&x| x > 0.0 && x != 1.0));
    }

    #[test]
    fn grid_errors() {
        let v = vol();
        let mut rng = path_rng(1, 0);
        assert!(simulate_noise(&v, &[], &[1.0], &mut rng).is_err());
        assert!(simulate_noise(&v, &[0.0], &[], &mut rng).is_err());
        assert!(simulate_noise(&v, &[0.0, 2.0], &[1.0], &mut rng).is_err());
        assert!(simulate_noise(&v, &[1.0, 0.5], &[3.0], &mut rng).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(VolatilityStructure::constant(0.0, 0.1, 0.1).is_err());
        assert!(VolatilityStructure::constant(1.0, -0.1, 0.1).is_err());
        assert!(VolatilityStructure::constant(1.0, 0.1, f64::NAN).is_err());
        let j = r#"{"kappa":0.5,"sigma1":0.2,"sigma2":[{"start_hours":0,"value":0.1},{"start_hours":5,"value":0.15}]}"#;
        let parsed: VolatilityStructure = serde_json::from_str(j).unwrap();
        assert_eq!(parsed, vol());
        assert!(serde_json::from_str::<VolatilityStructure>(r#"{"kappa":-1,"sigma1":0.2,"sigma2":[{"start_hours":0,"value":0.1}]}"#).is_err());
    }
}
