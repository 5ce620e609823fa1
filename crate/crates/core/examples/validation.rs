//! Run the consistency checks on every reference model.

use std::sync::Arc;

use powerhjm::config::{load_vol, ModelConfig};
use powerhjm::curve::PriceForwardCurve;
use powerhjm::quadrature::QuadratureSpec;
use powerhjm::validate::{format_table, run_suite, ValidationSettings};

fn main() -> powerhjm::error::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/configs");
    let pfc = Arc::new(PriceForwardCurve::from_csv_path(format!("{dir}/pfc.csv"), None)?);
    let vol = load_vol(format!("{dir}/vol.json"))?;
    let settings = ValidationSettings { paths: 2_000, seed: 0, quad: QuadratureSpec::default(), domain: (0.0, pfc.horizon()) };
    for name in ["schwartz_smith", "lucia_schwartz", "structural_sinh", "levy_ou_factor"] {
        let model = ModelConfig::from_path(format!("{dir}/{name}.json"))?.build(Some(&pfc))?;
        println!("== {name}");
        print!("{}", format_table(&run_suite(model.as_ref(), &vol, &settings)));
    }
    Ok(())
}
