//! The built-in structural models, raw and wrapped around a PFC.

use std::sync::Arc;

use powerhjm::curve::PriceForwardCurve;
use powerhjm::rng::path_rng;
use powerhjm::step::StepFunction;
use powerhjm::structural::*;

fn report(model: &dyn StructuralModel, taus: &[f64]) -> powerhjm::error::Result<()> {
    let y0 = model.initial_state();
    let means: Vec<String> = taus.iter().map(|&tau| model.expected_price(tau).map(|m| format!("{m:.4}"))).collect::<Result<_, _>>()?;
    let y = model.simulate_transition(&y0, 0.0, 48.0, &mut path_rng(3, 0))?;
    println!("{:<16} E f(τ) = [{}]  Y_48 = {:.4?}", model.name(), means.join(", "), y);
    Ok(())
}

fn main() -> powerhjm::error::Result<()> {
    let taus = [24.0, 168.0, 720.0];
    let ss = SchwartzSmithParams { kappa: 0.02, sigma1: 0.02, sigma2: 0.002, rho: 0.3, mu2: 0.0, y0: [0.0, 3.7] };
    report(&SchwartzSmith::new(ss.clone())?, &taus)?;
    report(&LuciaSchwartz::new(SchwartzSmithParams { sigma1: 0.8, sigma2: 0.08, y0: [0.0, 40.0], ..ss.clone() })?, &taus)?;
    let sinh = StructuralSinh::new(StructuralSinhParams {
        gamma: 40.0,
        alpha: 0.5,
        lambda: 0.05,
        sigma: 0.1,
        beta: StepFunction::new(vec![0.0, 744.0], vec![20.0, 24.0])?,
    })?;
    report(&sinh, &taus)?;
    let spikes = LevyOuFactorModel::new(LevyOuFactorParams {
        lambda: vec![0.2, 0.005],
        drivers: vec![
            LevyDriver { drift: 0.0, sigma: 1.0, jump_rate: 0.01, jumps: Some(JumpSize::Exponential { mean: 10.0 }) },
            LevyDriver { drift: 0.0, sigma: 0.05, jump_rate: 0.0, jumps: None },
        ],
        y0: vec![0.0, 40.0],
    })?;
    report(&spikes, &taus)?;

    // wrapping makes E f_0(τ) equal the curve
    let pfc = Arc::new(PriceForwardCurve::new(vec![0.0, 168.0, 336.0], vec![45.0, 38.0, 50.0], 800.0)?);
    let schwartz_smith = Arc::new(SchwartzSmith::new(ss)?);
    report(&PfcWrapped::new(schwartz_smith.clone(), pfc.clone(), WrapMode::Geometric)?, &taus)?;
    report(&PfcWrapped::new(Arc::new(sinh), pfc, WrapMode::Arithmetic)?, &taus)?;

    println!("w_Y(0; 100, 200) for Schwartz-Smith = {:.6}", w_y(schwartz_smith.as_ref(), 0.0, 100.0, 200.0, &[0.0, 3.7])?);
    Ok(())
}
