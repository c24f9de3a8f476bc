//! Empirical closeness moduli between the two metrics, along orbits and over
//! exit windows.

use prongflow::verify::closeness::estimate_closeness_moduli;
use prongflow::verify::{estimate_window_closeness, SampleConfig};
use prongflow::{ModelParams, StandardPolygonSpec};

fn main() -> prongflow::Result<()> {
    let params = ModelParams::new(3, 1)?;
    let mut cfg = SampleConfig::for_model(3);
    cfg.n_pairs = 1000;
    let (pointwise, orbitwise) = estimate_closeness_moduli(&params, cfg.i_s, cfg.i_u, &cfg)?;
    let window = estimate_window_closeness(&params, &StandardPolygonSpec::new(cfg.c)?, &cfg)?;
    for report in [&pointwise, &orbitwise, &window] {
        println!("{} (pass {})", report.name, report.pass);
        for row in &report.rows {
            println!(
                "  eps {:.0e}: eta {:?}, {} pairs, {} violations",
                row.eps, row.eta_hat, row.passing, row.violations
            );
        }
    }
    Ok(())
}
