//! Prong counts produced by surgery along the singular orbit of a 3-prong model.

use prongflow::surgery::{brute_force_k, scan_box, sigma0, surgery_verdict};
use prongflow::{HomologyClass, ModelParams};

fn main() -> prongflow::Result<()> {
    let params = ModelParams::new(3, 1)?;
    println!("boundary orbit class {}", sigma0(&params));
    for sigma in [
        HomologyClass::MU,
        HomologyClass::new(0, 1),
        HomologyClass::new(-1, 4),
        HomologyClass::new(2, 1),
    ] {
        let v = surgery_verdict(&sigma, &params)?;
        println!(
            "sigma {sigma}: K = {} (counted {}), new prong count {}, expansive {}",
            v.k_count,
            brute_force_k(&sigma, &params)?,
            v.p_new,
            v.expansive
        );
    }
    let rows = scan_box(&params, 4);
    let one_prong = rows.iter().filter(|r| !r.expansive).count();
    println!(
        "{} admissible classes with |a|, |b| <= 4, {one_prong} give a 1-prong orbit",
        rows.len()
    );
    Ok(())
}
