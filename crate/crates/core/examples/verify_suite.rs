//! Run a full verification suite and list the checks.

use prongflow::verify::{run_suite, SampleConfig, Suite};
use prongflow::ModelParams;

fn main() -> prongflow::Result<()> {
    let params = ModelParams::new(2, 1)?;
    let mut cfg = SampleConfig::for_model(2);
    cfg.n_pairs = 500;
    let report = run_suite(&params, Suite::All, &cfg)?;
    for check in &report.checks {
        println!(
            "{}  {}",
            if check.pass { "ok  " } else { "FAIL" },
            check.name
        );
    }
    println!("overall {}", report.pass);
    Ok(())
}
