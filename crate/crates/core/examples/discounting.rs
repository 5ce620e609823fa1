//! Discounted futures under continuous and terminal settlement.

use std::sync::Arc;

use powerhjm::curve::PriceForwardCurve;
use powerhjm::noise::VolatilityStructure;
use powerhjm::pricing::{discounted_futures, futures_price, DiscountCurve, MarketState, Settlement};
use powerhjm::quadrature::QuadratureSpec;
use powerhjm::structural::{ConstantModel, PfcWrapped, WrapMode};

fn main() -> powerhjm::error::Result<()> {
    let pfc = Arc::new(PriceForwardCurve::new(vec![0.0, 2160.0, 4368.0], vec![60.0, 45.0, 55.0], 8760.0)?);
    let model = PfcWrapped::new(Arc::new(ConstantModel::new(1.0)?), pfc, WrapMode::Geometric)?;
    let vol = VolatilityStructure::zero();
    let quad = QuadratureSpec::default();
    let s0 = MarketState::initial(&model);
    let (a, b) = (0.0, 8760.0);
    println!("undiscounted year: {:.4}", futures_price(&s0, &model, &vol, a, b, &quad)?);
    // 4% a year, quoted per hour
    let disc = DiscountCurve::flat(0.04 / 8760.0);
    for mode in [Settlement::Continuous, Settlement::Terminal] {
        println!("{mode:?}: {:.4}", discounted_futures(&s0, &model, &vol, a, b, &disc, mode, &quad)?);
    }
    Ok(())
}
