//! ID_3 index of an hourly product from a simulated futures path.

use std::sync::Arc;

use powerhjm::config::{load_vol, ModelConfig};
use powerhjm::curve::PriceForwardCurve;
use powerhjm::noise::NoiseFactors;
use powerhjm::pricing::{futures_path, id_index, IdWindow, MarketState};
use powerhjm::quadrature::QuadratureSpec;
use powerhjm::rng::path_rng;

fn main() -> powerhjm::error::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/configs");
    let pfc = Arc::new(PriceForwardCurve::from_csv_path(format!("{dir}/pfc.csv"), None)?);
    let model = ModelConfig::from_path(format!("{dir}/structural_sinh.json"))?.build(Some(&pfc))?;
    let vol = load_vol(format!("{dir}/vol.json"))?;

    let (tau1, tau2) = (100.0, 101.0);
    let (lo, hi) = IdWindow::Three.window(tau1);
    let mut rng = path_rng(11, 0);
    let (mut t, mut y, mut noise) = (0.0, model.initial_state(), NoiseFactors::initial());
    let mut states = Vec::new();
    for i in 0..=12 {
        let next = lo + (hi - lo) * i as f64 / 12.0;
        y = model.simulate_transition(&y, t, next, &mut rng)?;
        noise = noise.advance(&vol, next, &mut rng);
        t = next;
        states.push(MarketState { t, y: y.clone(), noise });
    }
    let path = futures_path(&states, model.as_ref(), &vol, tau1, tau2, &QuadratureSpec::default())?;
    for (u, f) in &path {
        println!("F_{u:.2}({tau1}, {tau2}) = {f:.4}");
    }
    println!("ID3 = {:.4}", id_index(&path, IdWindow::Three, tau1, tau2)?);
    Ok(())
}
