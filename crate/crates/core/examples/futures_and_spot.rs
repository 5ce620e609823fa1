//! Futures, day-ahead spot and cascading from a reference configuration.

use std::sync::Arc;

use powerhjm::config::{load_vol, ModelConfig};
use powerhjm::curve::PriceForwardCurve;
use powerhjm::noise::NoiseFactors;
use powerhjm::pricing::*;
use powerhjm::quadrature::QuadratureSpec;
use powerhjm::rng::path_rng;

fn main() -> powerhjm::error::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/configs");
    let pfc = Arc::new(PriceForwardCurve::from_csv_path(format!("{dir}/pfc.csv"), None)?);
    let model = ModelConfig::from_path(format!("{dir}/lucia_schwartz.json"))?.build(Some(&pfc))?;
    let vol = load_vol(format!("{dir}/vol.json"))?;
    let quad = QuadratureSpec::default();

    let s0 = MarketState::initial(model.as_ref());
    let month = futures_price(&s0, model.as_ref(), &vol, 744.0, 1488.0, &quad)?;
    println!("second month at t = 0: {month:.4} (PFC average {:.4})", pfc.average(744.0, 1488.0)?);

    // move the market forward one week
    let mut rng = path_rng(7, 0);
    let t = 168.0;
    let y = model.simulate_transition(&s0.y, 0.0, t, &mut rng)?;
    let state = MarketState { t, y, noise: NoiseFactors::initial().advance(&vol, t, &mut rng) };
    let month = futures_price(&state, model.as_ref(), &vol, 744.0, 1488.0, &quad)?;
    let weeks: f64 = (0..31)
        .map(|d| futures_price(&state, model.as_ref(), &vol, 744.0 + 24.0 * d as f64, 768.0 + 24.0 * d as f64, &quad))
        .sum::<powerhjm::error::Result<f64>>()?
        / 31.0;
    println!("second month at t = {t}: {month:.4}, average of its days: {weeks:.4}");

    let auction = auction_time(10, 12);
    let y = model.simulate_transition(&state.y, t, auction, &mut rng)?;
    let at_auction = MarketState { t: auction, y, noise: state.noise.advance(&vol, auction, &mut rng) };
    for hour in [3, 12, 19] {
        println!("day 10 hour {hour}: {:.4}", day_ahead_spot(&at_auction, model.as_ref(), &vol, 10, hour, &quad)?);
    }
    Ok(())
}
