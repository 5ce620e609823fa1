//! Self-checks run by `powerhjm validate`: martingale property of the
//! kernel, cascading, the affine decomposition, moment identities and the
//! lognormal option approximation against full Monte Carlo.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::noise::{NoiseFactors, VolatilityStructure};
use crate::options::{call_price, futures_moments, mc_price_oracle, put_price, OptionKind, OptionSpec};
use crate::pricing::{futures_price, MarketState};
use crate::quadrature::QuadratureSpec;
use crate::rng::path_rng;
use crate::sim::Estimate;
use crate::structural::{decomposed_mean, StructuralModel};

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self { name: name.into(), passed, detail }
    }
}

#[derive(Debug, Clone)]
pub struct ValidationSettings {
    pub paths: usize,
    pub seed: u64,
    pub quad: QuadratureSpec,
    /// Delivery domain `[start, end]` the checks sample from.
    pub domain: (f64, f64),
}

pub(crate) fn relative_gap(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Draws `(Y_t, X at t)` from the initial state.
fn draw_state(model: &dyn StructuralModel, vol: &VolatilityStructure, t: f64, seed: u64, path: u64) -> Result<MarketState> {
    let mut rng = path_rng(seed, path);
    let y = model.simulate_transition(&model.initial_state(), 0.0, t, &mut rng)?;
    let noise = NoiseFactors::initial().advance(vol, t, &mut rng);
    Ok(MarketState { t, y, noise })
}

fn sample_points(domain: (f64, f64), k: usize) -> Vec<(f64, f64)> {
    let (a, b) = domain;
    (1..=k)
        .map(|i| {
            let tau = a + (b - a) * i as f64 / (k + 1) as f64;
            (0.5 * tau, tau)
        })
        .collect()
}

fn martingale(model: &dyn StructuralModel, vol: &VolatilityStructure, s: &ValidationSettings) -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    for (k, (t, tau)) in sample_points(s.domain, 4).into_iter().enumerate() {
        let f0 = model.expected_price(tau)?;
        let seed = s.seed.wrapping_add(k as u64);
        let samples = (0..s.paths as u64)
            .into_par_iter()
            .map(|p| {
                let state = draw_state(model, vol, t, seed, p)?;
                Ok(state.noise_value(vol, tau) * model.conditional_mean(&state.y, t, tau)?)
            })
            .collect::<Result<Vec<_>>>()?;
        let est = Estimate::from_samples(&samples)?;
        let z = if est.se > 0.0 { (est.mean - f0).abs() / est.se } else if est.mean == f0 { 0.0 } else { f64::INFINITY };
        worst = worst.max(z);
    }
    Ok(CheckOutcome::new("martingale E f_t(tau) = f_0(tau)", worst <= 3.0, format!("max |z| = {worst:.3} (limit 3)")))
}

fn cascading(model: &dyn StructuralModel, vol: &VolatilityStructure, s: &ValidationSettings) -> Result<CheckOutcome> {
    let (a, b) = s.domain;
    let mut rng = path_rng(s.seed, u64::MAX);
    let state = draw_state(model, vol, 0.25 * a, s.seed, u64::MAX - 1)?;
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let mut cuts: Vec<f64> = (0..rng.random_range(1..6)).map(|_| rng.random_range(a..b)).collect();
        cuts.push(a);
        cuts.push(b);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let whole = futures_price(&state, model, vol, a, b, &s.quad)?;
        let mut parts = 0.0;
        for w in cuts.windows(2) {
            parts += (w[1] - w[0]) * futures_price(&state, model, vol, w[0], w[1], &s.quad)?;
        }
        worst = worst.max(relative_gap(parts / (b - a), whole));
    }
    Ok(CheckOutcome::new("cascading", worst <= 1e-10, format!("max relative gap {worst:.2e} (limit 1e-10)")))
}

fn decomposition(model: &dyn StructuralModel, vol: &VolatilityStructure, s: &ValidationSettings) -> Result<CheckOutcome> {
    let (a, b) = s.domain;
    let mut rng = path_rng(s.seed, u64::MAX - 2);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let tau = rng.random_range(a..b);
        let t = rng.random_range(0.0..=tau);
        let y = draw_state(model, vol, t, s.seed, u64::MAX - 3 - i)?.y;
        let direct = model.conditional_mean(&y, t, tau)?;
        let affine = decomposed_mean(model, &y, t, tau)?;
        worst = worst.max(relative_gap(direct, affine));
    }
    Ok(CheckOutcome::new(
        "affine decomposition",
        worst <= 1e-10,
        format!("max relative gap {worst:.2e} (limit 1e-10)"),
    ))
}

fn moments(model: &dyn StructuralModel, vol: &VolatilityStructure, s: &ValidationSettings) -> Result<CheckOutcome> {
    let (a, b) = s.domain;
    let tau1 = a + 0.5 * (b - a);
    let tau2 = (tau1 + 24.0).min(b);
    let t = 0.5 * tau1;
    let mut worst: f64 = 0.0;
    for i in 0..5 {
        let y = draw_state(model, vol, t, s.seed, u64::MAX - 100 - i)?.y;
        let m = futures_moments(model, vol, &y, t, tau1, tau2, &s.quad)?;
        let identity = m.m2 - m.m1 * m.m1;
        let gap = (identity - m.variance).abs() / m.m2.abs().max(f64::MIN_POSITIVE);
        worst = worst.max(gap);
    }
    Ok(CheckOutcome::new(
        "variance = m2 - m1^2",
        worst <= 1e-10,
        format!("max gap relative to m2 {worst:.2e} (limit 1e-10)"),
    ))
}

fn option_checks(model: &dyn StructuralModel, vol: &VolatilityStructure, s: &ValidationSettings) -> Result<Vec<CheckOutcome>> {
    let (a, b) = s.domain;
    let tau1 = a + 0.5 * (b - a);
    let tau2 = (tau1 + 24.0).min(b);
    let maturity = 0.5 * tau1;
    let strike = crate::pricing::futures_price(&MarketState::initial(model), model, vol, tau1, tau2, &s.quad)?;
    if !(strike > 0.0) {
        return Ok(vec![CheckOutcome::new("lognormal option vs full MC", true, "skipped: non-positive forward".into())]);
    }
    let spec = OptionSpec::new(maturity, strike, tau1, tau2, OptionKind::Call)?;
    let call = match call_price(model, vol, &spec, s.paths, s.seed, &s.quad) {
        Ok(c) => c,
        Err(Error::TooManyInfeasible { .. }) => {
            return Ok(vec![CheckOutcome::new(
                "lognormal option vs full MC",
                true,
                "skipped: lognormal fit infeasible on too many paths".into(),
            )])
        }
        Err(e) => return Err(e),
    };
    let put = put_price(model, vol, &spec, s.paths, s.seed, &s.quad)?;
    let len = tau2 - tau1;
    let parity_target = len * (strike_free_mean(model, vol, &spec, s)? - strike);
    let parity_gap = ((call.price - put.price) - parity_target).abs() / (call.price.abs() + put.price.abs()).max(1e-300);
    let grid: Vec<f64> = (1..=4).map(|i| maturity * i as f64 / 4.0).collect();
    let oracle = mc_price_oracle(model, vol, &spec, s.paths, s.seed.wrapping_add(1), &grid, &s.quad)?;
    let se = (call.se * call.se + oracle.se * oracle.se).sqrt();
    let gap = (call.price - oracle.price).abs();
    let limit = (3.0 * se).max(0.01 * oracle.price.abs());
    Ok(vec![
        CheckOutcome::new(
            "put-call parity",
            parity_gap <= 1e-10,
            format!("relative gap {parity_gap:.2e} (limit 1e-10)"),
        ),
        CheckOutcome::new(
            "lognormal option vs full MC",
            gap <= limit,
            format!("call {:.6} vs oracle {:.6}, gap {gap:.2e} (limit {limit:.2e})", call.price, oracle.price),
        ),
    ])
}

/// Mean over the same `Y_T` draws of the matched `m1`, which is what parity
/// holds against for the Monte Carlo averages.
fn strike_free_mean(model: &dyn StructuralModel, vol: &VolatilityStructure, spec: &OptionSpec, s: &ValidationSettings) -> Result<f64> {
    let samples = (0..s.paths as u64)
        .into_par_iter()
        .map(|p| {
            let mut rng = path_rng(s.seed, p);
            let y = model.simulate_transition(&model.initial_state(), 0.0, spec.maturity, &mut rng)?;
            Ok(futures_moments(model, vol, &y, spec.maturity, spec.tau1, spec.tau2, &s.quad)?.m1)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(samples.iter().sum::<f64>() / samples.len() as f64)
}

/// Runs every check. Errors inside a check are reported as failures.
pub fn run_suite(model: &dyn StructuralModel, vol: &VolatilityStructure, settings: &ValidationSettings) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    let checks: [(&str, fn(&dyn StructuralModel, &VolatilityStructure, &ValidationSettings) -> Result<CheckOutcome>); 4] = [
        ("martingale", martingale),
        ("cascading", cascading),
        ("affine decomposition", decomposition),
        ("moments", moments),
    ];
    for (name, check) in checks {
        out.push(check(model, vol, settings).unwrap_or_else(|e| CheckOutcome::new(name, false, format!("error: {e}"))));
    }
    match option_checks(model, vol, settings) {
        Ok(v) => out.extend(v),
        Err(e) => out.push(CheckOutcome::new("options", false, format!("error: {e}"))),
    }
    out
}

/// Fixed-width pass/fail table.
pub fn format_table(outcomes: &[CheckOutcome]) -> String {
    let width = outcomes.iter().map(|o| o.name.len()).max().unwrap_or(0);
    outcomes
        .iter()
        .map(|o| format!("{}  {:<width$}  {}\n", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail))
        .collect()
}
