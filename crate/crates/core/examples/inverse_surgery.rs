//! Undo a surgery: find a class on the surgered model restoring the prong count.

use prongflow::surgery::{inverse_surgery_search, surgered_local_model, DEFAULT_SEARCH_BOUND};
use prongflow::{HomologyClass, ModelParams};

fn main() -> prongflow::Result<()> {
    let params = ModelParams::new(4, 1)?;
    let sigma = HomologyClass::new(1, -2);
    let model = surgered_local_model(&sigma, &params, true)?;
    println!(
        "surgery {sigma} on (4, 1): {} prongs, estimated rotation {:?}, meets {} boundary orbits",
        model.p_new, model.k_estimate, model.repelling_orbits_met
    );
    match inverse_surgery_search(&sigma, &params, DEFAULT_SEARCH_BOUND)? {
        Some(inv) => println!(
            "class {} on ({}, {}) gives back {} prongs",
            inv.sigma_back,
            inv.surgered.p(),
            inv.surgered.k(),
            inv.verdict.p_new
        ),
        None => println!("no inverse class within the search bound"),
    }
    Ok(())
}
