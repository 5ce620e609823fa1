mod common;

use common::{mean_se, simpson, variance_se};
use powerhjm::noise::{simulate_noise, NoiseFactors, VolatilityStructure};
use powerhjm::rng::path_rng;
use powerhjm::step::StepFunction;
use proptest::prelude::*;

fn stepped() -> VolatilityStructure {
    VolatilityStructure::new(0.3, 0.15, StepFunction::new(vec![0.0, 5.0, 9.0], vec![0.1, 0.25, 0.05]).unwrap()).unwrap()
}

/// `∫₀ᵗ Σ(v, a)·Σ(v, b) dv` by adaptive quadrature over the loadings.
fn covariance_oracle(vol: &VolatilityStructure, t: f64, a: f64, b: f64) -> f64 {
    let f = |v: f64| {
        let (la, lb) = (vol.loadings(v, a), vol.loadings(v, b));
        la[0] * lb[0] + la[1] * lb[1]
    };
    simpson(&f, 0.0, t, 1e-15)
}

#[test]
fn covariance_matches_quadrature() {
    let vol = VolatilityStructure::new(1.0, 0.2, StepFunction::constant(0.0)).unwrap();
    let c = vol.covariance_integral(1.0, 1.0, 1.0).unwrap();
    assert!((c - covariance_oracle(&vol, 1.0, 1.0, 1.0)).abs() < 1e-13);
    assert!((c - 0.0172933).abs() < 5e-8);

    let vol = stepped();
    for (t, a, b) in [(1.0, 2.0, 7.5), (4.0, 4.5, 12.0), (3.3, 9.0, 9.0), (0.0, 1.0, 2.0)] {
        let c = vol.covariance_integral(t, a, b).unwrap();
        assert!((c - covariance_oracle(&vol, t, a, b)).abs() < 1e-12, "t={t} a={a} b={b}");
    }
}

#[test]
fn w_x_examples() {
    let vol = VolatilityStructure::constant(0.5, 0.0, 0.1).unwrap();
    assert!((vol.w_x(1.0, 3.0, 7.0).unwrap() - 0.01f64.exp()).abs() < 1e-15);
    assert!((vol.w_x(1.0, 3.0, 7.0).unwrap() - 1.0100502).abs() < 1e-7);
    assert_eq!(vol.w_x(0.0, 3.0, 7.0).unwrap(), 1.0);
    assert!(vol.w_x(4.0, 3.0, 7.0).is_err());
}

#[test]
fn w_x_is_the_second_moment() {
    let vol = stepped();
    let (t, u) = (4.0, 6.0);
    let samples: Vec<f64> = (0..100_000)
        .map(|p| {
            let f = NoiseFactors::initial().advance(&vol, t, &mut path_rng(11, p));
            f.value(&vol, u).powi(2)
        })
        .collect();
    let (mean, se) = mean_se(&samples);
    let target = vol.w_x(t, u, u).unwrap();
    assert!((mean - target).abs() <= 3.0 * se, "{mean} vs {target} (se {se})");
}

#[test]
fn simulated_noise_statistics() {
    let vol = stepped();
    let trading = [0.0, 0.5, 1.7, 3.0];
    let delivery = [3.0, 6.0, 10.0];
    let paths: Vec<_> = (0..100_000)
        .map(|p| simulate_noise(&vol, &trading, &delivery, &mut path_rng(12, p)).unwrap())
        .collect();
    let last = trading.len() - 1;
    for (k, &tau) in delivery.iter().enumerate() {
        let x: Vec<f64> = paths.iter().map(|p| p[last].values[k]).collect();
        assert!(x.iter().all(|&v| v > 0.0));
        let (mean, se) = mean_se(&x);
        assert!((mean - 1.0).abs() <= 3.0 * se, "E X at tau {tau}: {mean} (se {se})");
        let logs: Vec<f64> = x.iter().map(|v| v.ln()).collect();
        let (var, var_se) = variance_se(&logs);
        let target = vol.covariance_integral(3.0, tau, tau).unwrap();
        assert!((var - target).abs() <= 3.0 * var_se, "Var ln X: {var} vs {target} (se {var_se})");
    }
}

#[test]
fn resimulated_noise_is_a_martingale() {
    let vol = stepped();
    let tau = 8.0;
    let state = NoiseFactors::initial().advance(&vol, 2.0, &mut path_rng(13, 0));
    let samples: Vec<f64> = (0..100_000).map(|p| state.advance(&vol, 6.0, &mut path_rng(14, p)).value(&vol, tau)).collect();
    let (mean, se) = mean_se(&samples);
    let target = state.value(&vol, tau);
    assert!((mean - target).abs() <= 3.0 * se, "{mean} vs {target} (se {se})");
}

#[test]
fn zero_vol_noise_is_one() {
    let paths = simulate_noise(&VolatilityStructure::zero(), &[0.0, 1.0, 2.0], &[2.0, 5.0], &mut path_rng(0, 0)).unwrap();
    assert!(paths.iter().all(|s| s.values.iter().all(|&v| v == 1.0)));
}

proptest! {
    #[test]
    fn w_x_symmetry_and_bounds(t in 0.0..5.0f64, du in 0.0..10.0f64, ds in 0.0..10.0f64) {
        let vol = stepped();
        let (u, s) = (t + du, t + ds);
        let a = vol.w_x(t, u, s).unwrap();
        prop_assert_eq!(a, vol.w_x(t, s, u).unwrap());
        prop_assert!(a >= 1.0);
        prop_assert_eq!(vol.w_x(0.0, u, s).unwrap(), 1.0);
    }
}
