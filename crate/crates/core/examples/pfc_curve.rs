//! Load a price forward curve, query it, and write it back out.

use powerhjm::curve::PriceForwardCurve;

fn main() -> powerhjm::error::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/pfc.csv");
    let pfc = PriceForwardCurve::from_csv_path(path, None)?;
    println!("{} segments over [{}, {}] h", pfc.segment_count(), pfc.start(), pfc.horizon());
    println!("peak block of day 3: {:.2} EUR/MWh", pfc.value(3.0 * 24.0 + 12.0)?);
    println!("first month baseload: {:.4}", pfc.average(0.0, 744.0)?);
    let (lo, hi) = pfc.range_on(0.0, pfc.horizon())?;
    println!("range: [{lo}, {hi}]");

    let mut out = Vec::new();
    PriceForwardCurve::new(vec![0.0, 8.0, 20.0], vec![35.0, 52.0, 41.0], 24.0)?.write_csv(&mut out)?;
    print!("{}", String::from_utf8_lossy(&out));
    Ok(())
}
