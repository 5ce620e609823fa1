//! European call on a month futures by lognormal moment matching, checked against full Monte Carlo.

use std::sync::Arc;

use powerhjm::config::{load_vol, read_json, ModelConfig};
use powerhjm::curve::PriceForwardCurve;
use powerhjm::options::*;
use powerhjm::quadrature::QuadratureSpec;

fn main() -> powerhjm::error::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/configs");
    let pfc = Arc::new(PriceForwardCurve::from_csv_path(format!("{dir}/pfc.csv"), None)?);
    let model = ModelConfig::from_path(format!("{dir}/schwartz_smith.json"))?.build(Some(&pfc))?;
    let vol = load_vol(format!("{dir}/vol.json"))?;
    let spec: OptionSpec = read_json(format!("{dir}/option.json"))?;
    let quad = QuadratureSpec::default();

    let y0 = model.initial_state();
    let fit = lognormal_fit(model.as_ref(), &vol, &y0, spec.maturity, spec.tau1, spec.tau2, &quad);
    println!("fit at t = 0, T = {}: {:?}", spec.maturity, fit.map(|f| (f.m1, f.sigma)));

    let call = option_price(model.as_ref(), &vol, &spec, 500, 1, &quad)?;
    let put = option_price(model.as_ref(), &vol, &spec.with_kind(OptionKind::Put), 500, 1, &quad)?;
    println!("call {:.4} ± {:.4}, put {:.4} ± {:.4}", call.price, call.se, put.price, put.se);

    let grid: Vec<f64> = (1..=4).map(|i| spec.maturity * i as f64 / 4.0).collect();
    let mc = mc_price_oracle(model.as_ref(), &vol, &spec, 5_000, 2, &grid, &quad)?;
    println!("full Monte Carlo call {:.4} ± {:.4}", mc.price, mc.se);
    Ok(())
}
