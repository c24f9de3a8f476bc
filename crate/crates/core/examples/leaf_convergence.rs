//! Pairs on a common stable or unstable leaf approach each other.

use prongflow::verify::{stable_convergence_check, SampleConfig};
use prongflow::ModelParams;

fn main() -> prongflow::Result<()> {
    for (p, k) in [(1, 0), (2, 1), (5, 2)] {
        let params = ModelParams::new(p, k)?;
        let mut cfg = SampleConfig::for_model(p);
        cfg.n_pairs = 400;
        let report = stable_convergence_check(&params, &cfg)?;
        println!(
            "({p}, {k}): failures at {:?}: eucl {:?}, pol {:?}",
            report.tolerances, report.failures_eucl, report.failures_pol
        );
    }
    Ok(())
}
