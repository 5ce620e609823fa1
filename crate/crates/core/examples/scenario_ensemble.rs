//! Reproducible forward-curve scenarios and Monte Carlo estimates on them.

use std::sync::Arc;

use powerhjm::config::{load_vol, ModelConfig};
use powerhjm::curve::PriceForwardCurve;
use powerhjm::pricing::forward_kernel;
use powerhjm::quadrature::QuadratureSpec;
use powerhjm::sim::{estimate, simulate_ensemble, SimulationConfig};

fn main() -> powerhjm::error::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/configs");
    let pfc = Arc::new(PriceForwardCurve::from_csv_path(format!("{dir}/pfc.csv"), None)?);
    let model = ModelConfig::from_path(format!("{dir}/levy_ou_factor.json"))?.build(Some(&pfc))?;
    let vol = load_vol(format!("{dir}/vol.json"))?;
    let config = SimulationConfig {
        trading_grid: vec![24.0, 168.0, 500.0],
        delivery_grid: vec![600.0, 900.0, 1400.0],
        n_paths: 2_000,
        seed: 2024,
        quad: QuadratureSpec::default(),
    };
    let ensemble = simulate_ensemble(&config, model.as_ref(), &vol)?;
    println!("{} paths, config hash {}", ensemble.n_paths(), ensemble.config_hash);
    for p in ensemble.summary(model.as_ref(), &vol)?.points {
        println!("t {:>5} tau {:>6}: mean {:.3} ± {:.3} (PFC {:.3})", p.t, p.tau, p.mean, p.se, pfc.value(p.tau)?);
    }
    let excess = estimate(&ensemble, |path| Ok((forward_kernel(&path[2], model.as_ref(), &vol, 900.0)? - 45.0).max(0.0)))?;
    println!("E (f_500(900) - 45)+ = {:.4} ± {:.4}", excess.mean, excess.se);
    Ok(())
}
