//! Flow on the mapping torus, fiber-aligned distances, exit windows and the
//! boundary orbits of the blow-up.

use prongflow::suspension::{boundary_orbit_census, dist_torus, exit_window, flow};
use prongflow::{ModelParams, PlaneMetricKind, ProngPoint, StandardPolygonSpec, TorusPoint};

fn main() -> prongflow::Result<()> {
    let params = ModelParams::new(4, 2)?;
    let x = TorusPoint::new(ProngPoint::from_quadrant_chart(4, 1, 0.3, 0.02)?, 0.25)?;
    for t in [0.5, 1.0, 3.75] {
        let y = flow(&x, t, &params)?;
        println!("t = {t}: plane {}, s = {}", y.plane, y.s());
    }

    let y = TorusPoint::new(ProngPoint::from_quadrant_chart(4, 1, 0.31, 0.02)?, 0.3)?;
    for metric in [PlaneMetricKind::Eucl, PlaneMetricKind::Pol] {
        println!(
            "{metric:?} torus distance {:.6}",
            dist_torus(&x, &y, &params, metric)?
        );
    }

    let window = exit_window(&x, &StandardPolygonSpec::new(1.0)?, &params)?;
    println!("exit window [{}, {}]", window.t_minus, window.t_plus);

    let census = boundary_orbit_census(&params);
    println!(
        "boundary: {} attracting and {} repelling orbits of period {}",
        census.attracting, census.repelling, census.period
    );
    Ok(())
}
