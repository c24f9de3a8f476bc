//! Compare the polar and euclidean metrics on a 3-prong plane.

use std::f64::consts::PI;

use prongflow::metrics::{comparison_constant, noneq_witness};
use prongflow::{d_eucl, d_pol, ProngPoint};

fn main() -> prongflow::Result<()> {
    let a = ProngPoint::new(3, 1.0, 0.0)?;
    let b = ProngPoint::new(3, 1.0, 3.0 * PI - 0.1)?;
    println!(
        "across the seam: pol {:.6}, eucl {:.6}",
        d_pol(&a, &b)?,
        d_eucl(&a, &b)?
    );

    let c = ProngPoint::new(3, 0.5, 2.0)?;
    println!(
        "generic pair: pol {:.6}, eucl {:.6}",
        d_pol(&a, &c)?,
        d_eucl(&a, &c)?
    );
    println!("on r <= 2, eucl <= {} * pol", comparison_constant(2.0));

    for n in [10, 1000, 100_000] {
        let w = noneq_witness(3, n)?;
        println!(
            "n = {n:>6}: eucl {:.2e}, pol {:.6}",
            d_eucl(&w.z, &w.z_prime)?,
            d_pol(&w.z, &w.z_prime)?
        );
    }
    Ok(())
}
