//! Joint scenario engine for `(X, Y)` and ensemble statistics.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{argument, Result};
use crate::noise::{check_grid, NoiseFactors, VolatilityStructure};
use crate::pricing::{forward_kernel, MarketState};
use crate::quadrature::QuadratureSpec;
use crate::rng::path_rng;
use crate::structural::StructuralModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub trading_grid: Vec<f64>,
    pub delivery_grid: Vec<f64>,
    pub n_paths: usize,
    pub seed: u64,
    #[serde(default)]
    pub quad: QuadratureSpec,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        check_grid("trading grid", &self.trading_grid)?;
        check_grid("delivery grid", &self.delivery_grid)?;
        if self.trading_grid[0] < 0.0 {
            return Err(argument(format!("trading grid starts before 0 at {}", self.trading_grid[0])));
        }
        if self.n_paths == 0 {
            return Err(argument("n_paths must be >= 1"));
        }
        self.quad.validate()
    }
}

/// Simulated market states, one sequence per path on the trading grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioEnsemble {
    pub seed: u64,
    /// SHA-256 of the simulation config, model name and volatility.
    pub config_hash: String,
    pub trading_grid: Vec<f64>,
    pub delivery_grid: Vec<f64>,
    pub paths: Vec<Vec<MarketState>>,
}

fn config_hash(config: &SimulationConfig, model: &dyn StructuralModel, vol: &VolatilityStructure) -> Result<String> {
    let mut hasher = Sha256::new();
    hasher.update(serde_json::to_vec(config)?);
    hasher.update(model.name().as_bytes());
    hasher.update(serde_json::to_vec(&model.initial_state())?);
    hasher.update(serde_json::to_vec(vol)?);
    Ok(hex::encode(hasher.finalize()))
}

fn simulate_path(
    model: &dyn StructuralModel,
    vol: &VolatilityStructure,
    grid: &[f64],
    seed: u64,
    path: u64,
) -> Result<Vec<MarketState>> {
    let mut rng = path_rng(seed, path);
    let mut t = 0.0;
    let mut y = model.initial_state();
    let mut noise = NoiseFactors::initial();
    let mut states = Vec::with_capacity(grid.len());
    for &next in grid {
        if next > t {
            y = model.simulate_transition(&y, t, next, &mut rng)?;
            noise = noise.advance(vol, next, &mut rng);
            t = next;
        }
        states.push(MarketState { t, y: y.clone(), noise });
    }
    Ok(states)
}

/// Exact joint simulation from `(y₀, X ≡ 1)` at `t = 0` along the trading
/// grid. Path `i` draws from its own stream, so the ensemble does not depend
/// on the thread count.
pub fn simulate_ensemble(
    config: &SimulationConfig,
    model: &dyn StructuralModel,
    vol: &VolatilityStructure,
) -> Result<ScenarioEnsemble> {
    config.validate()?;
    let last_trade = *config.trading_grid.last().expect("non-empty");
    if last_trade > config.delivery_grid[0] {
        return Err(argument(format!(
            "trading grid ends at {last_trade}, after the first delivery time {}",
            config.delivery_grid[0]
        )));
    }
    let paths = (0..config.n_paths as u64)
        .into_par_iter()
        .map(|p| simulate_path(model, vol, &config.trading_grid, config.seed, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScenarioEnsemble {
        seed: config.seed,
        config_hash: config_hash(config, model, vol)?,
        trading_grid: config.trading_grid.clone(),
        delivery_grid: config.delivery_grid.clone(),
        paths,
    })
}

/// Sample mean and its standard error `s / √n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl Estimate {
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return Err(argument(format!("an estimate needs at least 2 samples, got {n}")));
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
        let se = (ss / (n - 1) as f64 / n as f64).sqrt();
        Ok(Self { mean, se, n })
    }

    /// `|mean - target| <= k·SE`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.se
    }
}

/// Monte Carlo estimate of a path functional.
pub fn estimate<F>(ensemble: &ScenarioEnsemble, functional: F) -> Result<Estimate>
where
    F: Fn(&[MarketState]) -> Result<f64> + Sync,
{
    let samples = ensemble
        .paths
        .par_iter()
        .map(|p| functional(p))
        .collect::<Result<Vec<_>>>()?;
    Estimate::from_samples(&samples)
}

/// One row of the long-format forward curve export.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub path: usize,
    pub t: f64,
    pub tau: f64,
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPointSummary {
    pub t: f64,
    pub tau: f64,
    pub mean: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub seed: u64,
    pub config_hash: String,
    pub n_paths: usize,
    pub points: Vec<GridPointSummary>,
}

impl ScenarioEnsemble {
    pub fn n_paths(&self) -> usize {
        self.paths.len()
    }

    /// `f_t(τ)` on every (path, trading time, delivery time), in that order.
    pub fn forward_rows(&self, model: &dyn StructuralModel, vol: &VolatilityStructure) -> Result<Vec<CurveRow>> {
        let mut rows = Vec::with_capacity(self.paths.len() * self.trading_grid.len() * self.delivery_grid.len());
        for (path, states) in self.paths.iter().enumerate() {
            for state in states {
                for &tau in &self.delivery_grid {
                    rows.push(CurveRow { path, t: state.t, tau, f: forward_kernel(state, model, vol, tau)? });
                }
            }
        }
        Ok(rows)
    }

    /// Long CSV: `path,t,tau,f`.
    pub fn write_csv<W: Write>(&self, model: &dyn StructuralModel, vol: &VolatilityStructure, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for row in self.forward_rows(model, vol)? {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Mean and SE of `f_t(τ)` across paths at every grid point.
    pub fn summary(&self, model: &dyn StructuralModel, vol: &VolatilityStructure) -> Result<EnsembleSummary> {
        let mut points = Vec::new();
        for (k, &t) in self.trading_grid.iter().enumerate() {
            for &tau in &self.delivery_grid {
                let samples = self
                    .paths
                    .iter()
                    .map(|p| forward_kernel(&p[k], model, vol, tau))
                    .collect::<Result<Vec<_>>>()?;
                let (mean, se) = if samples.len() >= 2 {
                    let e = Estimate::from_samples(&samples)?;
                    (e.mean, e.se)
                } else {
                    (samples[0], 0.0)
                };
                points.push(GridPointSummary { t, tau, mean, se });
            }
        }
        Ok(EnsembleSummary { seed: self.seed, config_hash: self.config_hash.clone(), n_paths: self.n_paths(), points })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structural::{LuciaSchwartz, SchwartzSmithParams};

    fn config(n: usize) -> SimulationConfig {
        SimulationConfig {
            trading_grid: vec![0.0, 6.0, 12.0],
            delivery_grid: vec![12.0, 24.0, 48.0],
            n_paths: n,
            seed: 7,
            quad: QuadratureSpec::default(),
        }
    }

    fn model(sigma: f64) -> LuciaSchwartz {
        LuciaSchwartz::new(SchwartzSmithParams {
            kappa: 0.05,
            sigma1: sigma,
            sigma2: sigma,
            rho: 0.0,
            mu2: 0.01,
            y0: [2.0, 40.0],
        })
        .unwrap()
    }

    #[test]
    fn deterministic_path_follows_conditional_mean() {
        let m = model(0.0);
        let vol = VolatilityStructure::zero();
        let ens = simulate_ensemble(&config(1), &m, &vol).unwrap();
        let y0 = m.initial_state();
        for state in &ens.paths[0] {
            for &tau in &ens.delivery_grid {
                let f = forward_kernel(state, &m, &vol, tau).unwrap();
                let expected = m.conditional_mean(&y0, 0.0, tau).unwrap();
                assert!((f - expected).abs() <= 1e-12 * expected.abs());
            }
        }
    }

    #[test]
    fn same_seed_same_ensemble() {
        let m = model(0.1);
        let vol = VolatilityStructure::constant(0.02, 0.01, 0.005).unwrap();
        let a = simulate_ensemble(&config(20), &m, &vol).unwrap();
        let b = simulate_ensemble(&config(20), &m, &vol).unwrap();
        assert_eq!(a, b);
        let mut other = config(20);
        other.seed = 8;
        let c = simulate_ensemble(&other, &m, &vol).unwrap();
        assert_ne!(a.paths, c.paths);
        assert_ne!(a.config_hash, c.config_hash);
    }

    #[test]
    fn estimate_basics() {
        let e = Estimate::from_samples(&[3.0, 3.0, 3.0]).unwrap();
        assert_eq!((e.mean, e.se), (3.0, 0.0));
        assert!(Estimate::from_samples(&[1.0]).is_err());
        let e = Estimate::from_samples(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((e.mean - 2.5).abs() < 1e-15);
        assert!((e.se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn grid_errors() {
        let m = model(0.1);
        let vol = VolatilityStructure::zero();
        let mut bad = config(2);
        bad.trading_grid = vec![0.0, 30.0];
        assert!(simulate_ensemble(&bad, &m, &vol).is_err());
        bad.trading_grid = vec![6.0, 3.0];
        assert!(simulate_ensemble(&bad, &m, &vol).is_err());
        let mut none = config(0);
        none.n_paths = 0;
        assert!(simulate_ensemble(&none, &m, &vol).is_err());
    }

    #[test]
    fn csv_export_is_long_format() {
        let m = model(0.1);
        let vol = VolatilityStructure::zero();
        let ens = simulate_ensemble(&config(2), &m, &vol).unwrap();
        let mut buf = Vec::new();
        ens.write_csv(&m, &vol, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("path,t,tau,f"));
        assert_eq!(lines.count(), 2 * 3 * 3);
        let summary = ens.summary(&m, &vol).unwrap();
        assert_eq!(summary.points.len(), 9);
    }
}
