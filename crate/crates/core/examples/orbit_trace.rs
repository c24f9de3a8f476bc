//! Print a short orbit of the suspension flow together with its chart data.

use prongflow::suspension::flow;
use prongflow::{ModelParams, ProngPoint, TorusPoint};

fn main() -> prongflow::Result<()> {
    let params = ModelParams::new(2, 1)?;
    let start = TorusPoint::new(ProngPoint::new(2, 0.8, 0.3)?, 0.0)?;
    println!("t,r,theta,s,u,v,quadrant");
    for i in 0..=16 {
        let t = i as f64 * 0.5;
        let pt = flow(&start, t, &params)?;
        let (q, u, v) = pt.plane.quadrant_chart();
        println!(
            "{t},{:.9},{:.9},{},{u:.9},{v:.9},{}",
            pt.plane.r(),
            pt.plane.theta(),
            pt.s(),
            q.n()
        );
    }
    Ok(())
}
