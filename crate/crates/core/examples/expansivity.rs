//! Distinct orbits that never separate on the 1-prong model, against the
//! separation level found on a 3-prong model.

use prongflow::verify::{one_prong_witness, separation_estimate, SampleConfig};
use prongflow::ModelParams;

fn main() -> prongflow::Result<()> {
    let w = one_prong_witness(0.1, 1e-6, 60)?;
    println!(
        "1-prong pair: gap {:.3e} to {:.3e} (expected {:.3e}), torus sup {:.3e}, certified {}",
        w.gap_min, w.gap_max, w.expected_gap, w.torus_sup, w.certified
    );

    for (p, k) in [(1, 0), (3, 1)] {
        let params = ModelParams::new(p, k)?;
        let mut cfg = SampleConfig::for_model(p);
        cfg.n_pairs = 300;
        let report = separation_estimate(&params, &cfg)?;
        println!(
            "({p}, {k}): separation level {:.3e}, violations {:?}, defeated {}",
            report.eps_star, report.violations, report.defeated
        );
    }
    Ok(())
}
