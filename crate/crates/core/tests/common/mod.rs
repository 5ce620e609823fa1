//! Test-side oracles, written independently of the library's numerics.
#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use powerhjm::config::ModelConfig;
use powerhjm::curve::PriceForwardCurve;
use powerhjm::noise::VolatilityStructure;
use powerhjm::structural::StructuralModel;

pub const MODELS: [&str; 4] = ["schwartz_smith", "lucia_schwartz", "structural_sinh", "levy_ou_factor"];

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

pub fn reference_pfc() -> Arc<PriceForwardCurve> {
    Arc::new(PriceForwardCurve::from_csv_path(config_path("pfc.csv"), None).unwrap())
}

pub fn reference_vol() -> VolatilityStructure {
    powerhjm::config::load_vol(config_path("vol.json")).unwrap()
}

pub fn reference_config(model: &str) -> ModelConfig {
    ModelConfig::from_path(config_path(&format!("{model}.json"))).unwrap()
}

/// The reference model, PFC-wrapped as its config says.
pub fn reference_model(model: &str, pfc: &Arc<PriceForwardCurve>) -> Arc<dyn StructuralModel> {
    reference_config(model).build(Some(pfc)).unwrap()
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Standard normal CDF by direct quadrature of the density.
pub fn phi(x: f64) -> f64 {
    let density = |u: f64| (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt();
    if x >= 0.0 {
        0.5 + simpson(&density, 0.0, x, 1e-16)
    } else {
        0.5 - simpson(&density, x, 0.0, 1e-16)
    }
}

/// Undiscounted Black-76 call on a futures at `f` with total vol `s = σ√T`.
pub fn black76_call(f: f64, k: f64, s: f64) -> f64 {
    let d1 = ((f / k).ln() + 0.5 * s * s) / s;
    f * phi(d1) - k * phi(d1 - s)
}

pub fn black76_put(f: f64, k: f64, s: f64) -> f64 {
    let d1 = ((f / k).ln() + 0.5 * s * s) / s;
    k * phi(s - d1) - f * phi(-d1)
}

/// Sample mean and standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Sample variance and its standard error from the fourth central moment.
pub fn variance_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean).powi(2)).collect();
    let (v, _) = mean_se(&sq);
    let var = v * n / (n - 1.0);
    let m4 = sq.iter().map(|s| s * s).sum::<f64>() / n;
    (var, ((m4 - v * v) / n).sqrt())
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
