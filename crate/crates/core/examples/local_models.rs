//! Iterate the p-prong model maps and follow points along prongs and leaves.

use prongflow::plane::{chart_iterate, phi_pk_pow, project_stable_unstable, prong_period};
use prongflow::{ModelParams, ProngId, ProngPoint};

fn main() -> prongflow::Result<()> {
    let params = ModelParams::new(3, 1)?;
    println!(
        "model p = {}, k = {}, g = {}, q = {}",
        params.p(),
        params.k(),
        params.g(),
        params.q()
    );
    println!("prong period {}", prong_period(&params, ProngId::stable(0)));

    let on_prong = ProngId::stable(0).point(3, 1.0)?;
    for n in 0..=3 {
        let image = phi_pk_pow(&on_prong, &params, n)?;
        println!("stable prong, n = {n}: {image}  prong {:?}", image.prong());
    }

    let x = ProngPoint::from_quadrant_chart(3, 0, 0.4, 0.1)?;
    let proj = project_stable_unstable(&x)?;
    println!(
        "x = {x} in quadrant {}, projections {} and {}",
        proj.quadrant.n(),
        proj.pi_s,
        proj.pi_u
    );
    let (quadrant, u, v) = x.quadrant_chart();
    for n in [1, 2, 5] {
        let (q, un, vn) = chart_iterate(&params, quadrant, u, v, n);
        println!("n = {n}: quadrant {}, (u, v) = ({un:.6}, {vn:.6})", q.n());
    }
    Ok(())
}
