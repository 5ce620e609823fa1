//! Two-factor lognormal market noise: covariances, second moments and a sample path.

use powerhjm::noise::{simulate_noise, VolatilityStructure};
use powerhjm::rng::path_rng;
use powerhjm::step::StepFunction;

fn main() -> powerhjm::error::Result<()> {
    // short-memory factor with decay 0.05/h, long-memory level stepping down after hour 744
    let vol = VolatilityStructure::new(0.05, 0.01, StepFunction::new(vec![0.0, 744.0], vec![0.002, 0.0015])?)?;
    for (t, a, b) in [(24.0, 48.0, 48.0), (24.0, 48.0, 800.0), (500.0, 800.0, 900.0)] {
        println!("cov(ln X_{t}({a}), ln X_{t}({b})) = {:.3e}", vol.covariance_integral(t, a, b)?);
    }
    println!("w_X(100; 200, 300) = {:.8}", vol.w_x(100.0, 200.0, 300.0)?);

    let path = simulate_noise(&vol, &[0.0, 24.0, 168.0], &[200.0, 800.0], &mut path_rng(1, 0))?;
    for state in &path {
        println!("t = {:>5}: X = {:?}", state.t(), state.values);
    }
    Ok(())
}
