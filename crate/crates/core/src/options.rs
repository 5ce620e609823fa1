//! Options on futures by lognormal moment matching.
//!
//! Conditional on the structural state `Y_t = y`, the futures price is an
//! average of lognormal variables. Its first two moments are double integrals
//! of `w^X` and `w^Y`; matching a lognormal to them gives a Black-type price
//! for each `y`. The unconditional price averages that over `Y_T`, and a full
//! path Monte Carlo oracle checks the approximation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{argument, Error, Result};
use crate::noise::{NoiseFactors, VolatilityStructure};
use crate::pricing::{kernel_breakpoints, FuturesWindow, MarketState};
use crate::quadrature::{DeliveryQuadrature, QuadratureSpec};
use crate::rng::path_rng;
use crate::sim::Estimate;
use crate::structural::StructuralModel;

pub(crate) fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptionKind {
    Call,
    Put,
}

/// European option on the futures delivering over `[tau1, tau2]`, paying
/// `(τ₂ - τ₁)(F_T - K)⁺` for a call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionSpec {
    #[serde(rename = "T")]
    pub maturity: f64,
    #[serde(rename = "K")]
    pub strike: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub kind: OptionKind,
}

impl OptionSpec {
    pub fn new(maturity: f64, strike: f64, tau1: f64, tau2: f64, kind: OptionKind) -> Result<Self> {
        let spec = Self { maturity, strike, tau1, tau2, kind };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.maturity >= 0.0 && self.maturity <= self.tau1 && self.tau1 < self.tau2) {
            return Err(argument(format!(
                "option needs 0 <= T <= tau1 < tau2, got T = {}, [{}, {}]",
                self.maturity, self.tau1, self.tau2
            )));
        }
        if !(self.strike > 0.0 && self.strike.is_finite()) {
            return Err(argument(format!("strike must be positive, got {}", self.strike)));
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        self.tau2 - self.tau1
    }

    pub fn with_kind(self, kind: OptionKind) -> Self {
        Self { kind, ..self }
    }

    /// Payoff for a futures price at maturity.
    pub fn payoff(&self, futures: f64) -> f64 {
        let intrinsic = match self.kind {
            OptionKind::Call => futures - self.strike,
            OptionKind::Put => self.strike - futures,
        };
        self.length() * intrinsic.max(0.0)
    }
}

/// Conditional moments of `F_t(τ₁, τ₂)` given `Y_t = y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuturesMoments {
    pub m1: f64,
    pub m2: f64,
    pub variance: f64,
}

fn structural_means(model: &dyn StructuralModel, y: &[f64], t: f64, quad: &DeliveryQuadrature) -> Result<Vec<f64>> {
    quad.nodes().iter().map(|&u| model.conditional_mean(y, t, u)).collect()
}

fn moment_rule(
    model: &dyn StructuralModel,
    vol: &VolatilityStructure,
    t: f64,
    tau1: f64,
    tau2: f64,
    quad: &QuadratureSpec,
) -> Result<DeliveryQuadrature> {
    if t > tau1 {
        return Err(argument(format!("trading time {t} after delivery start {tau1}")));
    }
    DeliveryQuadrature::new(tau1, tau2, &kernel_breakpoints(model, vol), quad)
}

/// First two moments by tensor-product Gauss-Legendre:
/// `m1 = L⁻¹ ∫ g(A y + B) du` and `m2 = L⁻² ∫∫ w^X w^Y du ds`.
pub fn futures_moments(
    model: &dyn StructuralModel,
    vol: &VolatilityStructure,
    y: &[f64],
    t: f64,
    tau1: f64,
    tau2: f64,
    quad: &QuadratureSpec,
) -> Result<FuturesMoments> {
    let rule = moment_rule(model, vol, t, tau1, tau2, quad)?;
    let means = structural_means(model, y, t, &rule)?;
    let (nodes, weights) = (rule.nodes(), rule.weights());
    let len = rule.length();
    let m1 = rule.sum(&means) / len;
    let mut second = 0.0;
    let mut covariation = 0.0;
    for i in 0..nodes.len() {
        let wi = weights[i] * means[i];
        let mut row2 = 0.0;
        let mut rowv = 0.0;
        for j in 0..nodes.len() {
            let c = vol.covariance_between(0.0, t, nodes[i], nodes[j]);
            let wy = weights[j] * means[j];
            row2 += c.exp() * wy;
            rowv += c.exp_m1() * wy;
        }
        second += wi * row2;
        covariation += wi * rowv;
    }
    Ok(FuturesMoments { m1, m2: second / (len * len), variance: covariation / (len * len) })
}

/// `Var[F_t | Y_t = y] = L⁻² ∫∫ (w^X - 1) w^Y du ds`.
pub fn futures_variance(
    model: &dyn StructuralModel,
    vol: &VolatilityStructure,
    y: &[f64],
    t: f64,
    tau1: f64,
    tau2: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    Ok(futures_moments(model, vol, y, t, tau1, tau2, quad)?.variance)
}

/// Lognormal law `LN(μ_F, σ_F²)` matched to the conditional futures moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LognormalFit {
    pub mu: f64,
    pub sigma: f64,
    pub y: Vec<f64>,
    /// Matched first moment `m1`.
    pub m1: f64,
    /// `∫ g(A y + B) du = (τ₂ - τ₁) m1`.
    pub integral: f64,
}

impl LognormalFit {
    fn from_moments(y: &[f64], integral: f64, len: f64, variance: f64) -> Result<Self> {
        let m1 = integral / len;
        if !(m1 > 0.0) {
            return Err(Error::InfeasibleFit { m1 });
        }
        if !variance.is_finite() {
            return Err(argument(format!("non-finite futures variance {variance}")));
        }
        // ∫∫ (w_x - 1) w_y / ∫∫ w_y with ∫∫ w_y = (∫ g)²
        let sigma2 = (variance.max(0.0) / (m1 * m1)).ln_1p();
        let mu = integral.ln() - len.ln() - 0.5 * sigma2;
        Ok(Self { mu, sigma: sigma2.sqrt(), y: y.to_vec(), m1, integral })
    }

    /// First two moments of the fitted lognormal.
    pub fn moments(&self) -> (f64, f64) {
        let s2 = self.sigma * self.sigma;
        ((self.mu + 0.5 * s2).exp(), (2.0 * self.mu + 2.0 * s2).exp())
    }

    /// Black-type price of the option (not discounted, `r = 0`).
    pub fn price(&self, spec: &OptionSpec) -> f64 {
        let len = spec.length();
        let k = spec.strike;
        if self.sigma == 0.0 {
            return spec.payoff(self.m1);
        }
        let d2 = (self.mu - k.ln()) / self.sigma;
        let d1 = d2 + self.sigma;
        match spec.kind {
            OptionKind::Call => norm_cdf(d1) * self.integral - len * k * norm_cdf(d2),
            OptionKind::Put => len * k * norm_cdf(-d2) - norm_cdf(-d1) * self.integral,
        }
    }
}

pub fn lognormal_fit(
    model: &dyn StructuralModel,
    vol: &VolatilityStructure,
    y: &[f64],
    maturity: f64,
    tau1: f64,
    tau2: f64,
    quad: &QuadratureSpec,
) -> Result<LognormalFit> {
    let m = futures_moments(model, vol, y, maturity, tau1, tau2, quad)?;
    LognormalFit::from_moments(y, m.m1 * (tau2 - tau1), tau2 - tau1, m.variance)
}

/// Price at `t = 0` conditional on `Y_T = y`. Uses `spec.kind`.
pub fn conditional_price(
    model: &dyn StructuralModel,
    vol: &VolatilityStructure,
    y: &[f64],
    spec: &OptionSpec,
    quad: &QuadratureSpec,
) -> Result<f64> {
    spec.validate()?;
    Ok(lognormal_fit(model, vol, y, spec.maturity, spec.tau1, spec.tau2, quad)?.price(spec))
}

pub fn conditional_call(
    model: &dyn StructuralModel,
    vol: &VolatilityStructure,
    y: &[f64],
    spec: &OptionSpec,
    quad: &QuadratureSpec,
) -> Result<f64> {
    conditional_price(model, vol, y, &spec.with_kind(OptionKind::Call), quad)
}

pub fn conditional_put(
    model: &dyn StructuralModel,
    vol: &VolatilityStructure,
    y: &[f64],
    spec: &OptionSpec,
    quad: &QuadratureSpec,
) -> Result<f64> {
    conditional_price(model, vol, y, &spec.with_kind(OptionKind::Put), quad)
}

/// Precomputed `w_i w_j (w^X(u_i, u_j) - 1)` on a delivery window at a fixed
/// trading time, for many fits that differ only in `y`.
///
/// Memory is quadratic in the node count, which suits option windows of
/// days to months.
#[derive(Debug, Clone)]
pub struct MomentGrid {
    t: f64,
    rule: DeliveryQuadrature,
    covariation: Vec<f64>,
}

impl MomentGrid {
    pub fn new(
        model: &dyn StructuralModel,
        vol: &VolatilityStructure,
        t: f64,
        tau1: f64,
        tau2: f64,
        quad: &QuadratureSpec,
    ) -> Result<Self> {
        let rule = moment_rule(model, vol, t, tau1, tau2, quad)?;
        let (nodes, weights) = (rule.nodes(), rule.weights());
        let n = nodes.len();
        let mut covariation = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in 0..=i {
                covariation.push(weights[i] * weights[j] * vol.covariance_between(0.0, t, nodes[i], nodes[j]).exp_m1());
            }
        }
        Ok(Self { t, rule, covariation })
    }

    /// Row `i` of the packed lower triangle, diagonal last.
    fn row(&self, i: usize) -> &[f64] {
        let start = i * (i + 1) / 2;
        &self.covariation[start..start + i + 1]
    }

    pub fn moments(&self, model: &dyn StructuralModel, y: &[f64]) -> Result<FuturesMoments> {
        let means = structural_means(model, y, self.t, &self.rule)?;
        let len = self.rule.length();
        let m1 = self.rule.sum(&means) / len;
        let mut covariation = 0.0;
        for (i, &mi) in means.iter().enumerate() {
            let row = self.row(i);
            let off_diagonal = dot(&row[..i], &means[..i]);
            covariation += mi * (2.0 * off_diagonal + row[i] * mi);
        }
        let variance = covariation / (len * len);
        Ok(FuturesMoments { m1, m2: m1 * m1 + variance, variance })
    }

    pub fn fit(&self, model: &dyn StructuralModel, y: &[f64]) -> Result<LognormalFit> {
        let m = self.moments(model, y)?;
        let len = self.rule.length();
        LognormalFit::from_moments(y, m.m1 * len, len, m.variance)
    }
}

/// Dot product with four partial sums, in a fixed order.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for k in 0..chunks {
        for l in 0..4 {
            acc[l] += a[4 * k + l] * b[4 * k + l];
        }
    }
    let tail: f64 = a[4 * chunks..].iter().zip(&b[4 * chunks..]).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Monte Carlo price with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceEstimate {
    pub price: f64,
    pub se: f64,
    pub method: String,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub infeasible_paths: usize,
}

fn is_zero(n: &usize) -> bool {
    *n == 0
}

pub const METHOD_LOGNORMAL: &str = "lognormal_moment_matching";
pub const METHOD_MONTE_CARLO: &str = "monte_carlo";

/// Unconditional price `E C_0(T, K, τ₁, τ₂; Y_T)` by averaging the
/// conditional lognormal price over exact draws of `Y_T` from `y₀`.
///
/// Paths with a non-positive first moment contribute zero and are counted;
/// more than 1% of them aborts.
pub fn option_price(
    model: &dyn StructuralModel,
    vol: &VolatilityStructure,
    spec: &OptionSpec,
    n_paths: usize,
    seed: u64,
    quad: &QuadratureSpec,
) -> Result<PriceEstimate> {
    spec.validate()?;
    if n_paths < 2 {
        return Err(argument(format!("need at least 2 paths, got {n_paths}")));
    }
    let grid = MomentGrid::new(model, vol, spec.maturity, spec.tau1, spec.tau2, quad)?;
    let y0 = model.initial_state();
    let outcomes: Vec<Result<Option<f64>>> = (0..n_paths)
        .into_par_iter()
        .map(|path| {
            let mut rng = path_rng(seed, path as u64);
            let y = model.simulate_transition(&y0, 0.0, spec.maturity, &mut rng)?;
            match grid.fit(model, &y) {
                Ok(fit) => Ok(Some(fit.price(spec))),
                Err(Error::InfeasibleFit { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut samples = Vec::with_capacity(n_paths);
    let mut infeasible = 0;
    for outcome in outcomes {
        match outcome? {
            Some(v) => samples.push(v),
            None => {
                infeasible += 1;
                samples.push(0.0);
            }
        }
    }
    if infeasible * 100 > n_paths {
        return Err(Error::TooManyInfeasible { infeasible, paths: n_paths });
    }
    let est = Estimate::from_samples(&samples)?;
    Ok(PriceEstimate { price: est.mean, se: est.se, method: METHOD_LOGNORMAL.into(), infeasible_paths: infeasible })
}

pub fn call_price(
    model: &dyn StructuralModel,
    vol: &VolatilityStructure,
    spec: &OptionSpec,
    n_paths: usize,
    seed: u64,
    quad: &QuadratureSpec,
) -> Result<PriceEstimate> {
    option_price(model, vol, &spec.with_kind(OptionKind::Call), n_paths, seed, quad)
}

pub fn put_price(
    model: &dyn StructuralModel,
    vol: &VolatilityStructure,
    spec: &OptionSpec,
    n_paths: usize,
    seed: u64,
    quad: &QuadratureSpec,
) -> Result<PriceEstimate> {
    option_price(model, vol, &spec.with_kind(OptionKind::Put), n_paths, seed, quad)
}

/// Full-path Monte Carlo price with no lognormal assumption: `(X, Y)` are
/// simulated exactly along `grid` up to `T`, `F_T` is computed by quadrature,
/// and the payoff is averaged.
pub fn mc_price_oracle(
    model: &dyn StructuralModel,
    vol: &VolatilityStructure,
    spec: &OptionSpec,
    n_paths: usize,
    seed: u64,
    grid: &[f64],
    quad: &QuadratureSpec,
) -> Result<PriceEstimate> {
    spec.validate()?;
    if n_paths < 2 {
        return Err(argument(format!("need at least 2 paths, got {n_paths}")));
    }
    if grid.iter().any(|&t| !(t > 0.0 && t <= spec.maturity)) || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(argument("oracle grid must be strictly increasing within (0, T]"));
    }
    let mut times = grid.to_vec();
    if times.last().copied() != Some(spec.maturity) && spec.maturity > 0.0 {
        times.push(spec.maturity);
    }
    let window = FuturesWindow::new(model, vol, spec.tau1, spec.tau2, quad)?;
    let y0 = model.initial_state();
    let payoffs: Vec<Result<f64>> = (0..n_paths)
        .into_par_iter()
        .map(|path| {
            let mut rng = path_rng(seed, path as u64);
            let mut y = y0.clone();
            let mut noise = NoiseFactors::initial();
            let mut t = 0.0;
            for &next in &times {
                y = model.simulate_transition(&y, t, next, &mut rng)?;
                noise = noise.advance(vol, next, &mut rng);
                t = next;
            }
            let state = MarketState { t, y, noise };
            Ok(spec.payoff(window.price(&state, model, vol)?))
        })
        .collect();
    let samples = payoffs.into_iter().collect::<Result<Vec<_>>>()?;
    let est = Estimate::from_samples(&samples)?;
    Ok(PriceEstimate { price: est.mean, se: est.se, method: METHOD_MONTE_CARLO.into(), infeasible_paths: 0 })
}
