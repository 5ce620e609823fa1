mod common;

use common::{mean_se, reference_model, reference_pfc, reference_vol, MODELS};
use powerhjm::noise::VolatilityStructure;
use powerhjm::pricing::forward_kernel;
use powerhjm::quadrature::QuadratureSpec;
use powerhjm::sim::*;

fn config(n_paths: usize, seed: u64) -> SimulationConfig {
    SimulationConfig {
        trading_grid: vec![24.0, 120.0, 360.0],
        delivery_grid: vec![400.0, 744.0, 1200.0],
        n_paths,
        seed,
        quad: QuadratureSpec::default(),
    }
}

#[test]
fn deterministic_single_path_is_the_initial_curve() {
    let pfc = reference_pfc();
    let model = reference_model("schwartz_smith", &pfc);
    let zero = VolatilityStructure::zero();
    let constant = powerhjm::structural::ConstantModel::new(40.0).unwrap();
    let e = simulate_ensemble(&config(1, 0), &constant, &zero).unwrap();
    for state in &e.paths[0] {
        for &tau in &e.delivery_grid {
            assert_eq!(forward_kernel(state, &constant, &zero, tau).unwrap(), 40.0);
        }
    }
    assert!(simulate_ensemble(&SimulationConfig { trading_grid: vec![0.0, 500.0], ..config(2, 0) }, model.as_ref(), &zero).is_err());
}

#[test]
fn reproducible_across_seeds_and_threads() {
    let pfc = reference_pfc();
    let vol = reference_vol();
    let model = reference_model("levy_ou_factor", &pfc);
    let run = |threads: usize, seed: u64| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let e = simulate_ensemble(&config(200, seed), model.as_ref(), &vol).unwrap();
            let mut out = Vec::new();
            e.write_csv(model.as_ref(), &vol, &mut out).unwrap();
            (e.config_hash, out)
        })
    };
    let base = run(1, 42);
    assert_eq!(base, run(3, 42));
    assert_eq!(base, run(1, 42));
    assert_ne!(base.1, run(1, 43).1);
    assert_ne!(base.0, run(1, 43).0);
    assert!(String::from_utf8(base.1).unwrap().starts_with("path,t,tau,f\n"));
}

#[test]
fn ensemble_means_match_the_initial_curve() {
    let pfc = reference_pfc();
    let vol = reference_vol();
    for name in MODELS {
        let model = reference_model(name, &pfc);
        let e = simulate_ensemble(&config(20_000, 7), model.as_ref(), &vol).unwrap();
        let summary = e.summary(model.as_ref(), &vol).unwrap();
        assert_eq!(summary.points.len(), 9);
        for p in &summary.points {
            let target = pfc.value(p.tau).unwrap();
            assert!((p.mean - target).abs() <= 3.0 * p.se, "{name} t={} tau={}: {} vs {target} (se {})", p.t, p.tau, p.mean, p.se);
        }
    }
}

#[test]
fn estimate_oracles() {
    let pfc = reference_pfc();
    let vol = reference_vol();
    let model = reference_model("structural_sinh", &pfc);
    let e = simulate_ensemble(&config(5_000, 3), model.as_ref(), &vol).unwrap();

    let c = estimate(&e, |_| Ok(2.5)).unwrap();
    assert_eq!((c.mean, c.se, c.n), (2.5, 0.0, 5_000));

    // indicator of an above-median forward: a Bernoulli variable with SE √(p(1-p)/(n-1))
    let f = |p: &[powerhjm::pricing::MarketState]| forward_kernel(&p[2], model.as_ref(), &vol, 744.0);
    let level = pfc.value(744.0).unwrap();
    let b = estimate(&e, |p| Ok(if f(p)? > level { 1.0 } else { 0.0 })).unwrap();
    let n = b.n as f64;
    assert!(((b.se * b.se) - b.mean * (1.0 - b.mean) / (n - 1.0)).abs() < 1e-14);

    let a = estimate(&e, &f).unwrap();
    let g = |p: &[powerhjm::pricing::MarketState]| forward_kernel(&p[1], model.as_ref(), &vol, 1200.0);
    let bb = estimate(&e, &g).unwrap();
    let sum = estimate(&e, |p| Ok(2.0 * f(p)? - 3.0 * g(p)?)).unwrap();
    assert!((sum.mean - (2.0 * a.mean - 3.0 * bb.mean)).abs() <= 1e-12 * sum.mean.abs().max(1.0));

    assert!(Estimate::from_samples(&[1.0]).is_err());
    let est = Estimate::from_samples(&[1.0, 2.0, 3.0]).unwrap();
    assert!((est.se - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    assert!(est.within(2.5, 1.0) && !est.within(3.0, 1.0));
}

#[test]
fn noise_and_state_increments_are_uncorrelated() {
    let vol = reference_vol();
    let model = common::reference_config("lucia_schwartz").build_inner().unwrap();
    let e = simulate_ensemble(&config(20_000, 11), model.as_ref(), &vol).unwrap();
    let pairs: Vec<(f64, f64)> = e
        .paths
        .iter()
        .map(|p| (p[2].noise.log_value(&vol, 744.0) - p[1].noise.log_value(&vol, 744.0), p[2].y[1] - p[1].y[1]))
        .collect();
    let (mx, _) = mean_se(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
    let (my, _) = mean_se(&pairs.iter().map(|p| p.1).collect::<Vec<_>>());
    let products: Vec<f64> = pairs.iter().map(|(x, y)| (x - mx) * (y - my)).collect();
    let (cov, se) = mean_se(&products);
    assert!(cov.abs() <= 3.0 * se, "{cov} (se {se})");
}
