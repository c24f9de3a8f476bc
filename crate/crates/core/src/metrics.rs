//! Distances on the punctured and blown-up p-prong plane.
//!
//! `d_pol` is the flat-cylinder metric `dr² + dθ²`, which extends to the
//! boundary circle `r = 0`. `d_eucl` is the cone metric `dr² + r²dθ²` of total
//! angle `pπ`; geodesics whose angular gap exceeds `π` pass through the apex.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plane::{circle_dist, ProngPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlaneMetricKind {
    Eucl,
    Pol,
}

impl PlaneMetricKind {
    pub fn distance(&self, a: &ProngPoint, b: &ProngPoint) -> Result<f64> {
        match self {
            PlaneMetricKind::Eucl => d_eucl(a, b),
            PlaneMetricKind::Pol => d_pol(a, b),
        }
    }
}

fn same_p(a: &ProngPoint, b: &ProngPoint) -> Result<()> {
    if a.p() != b.p() {
        return Err(Error::ProngMismatch {
            expected: a.p(),
            found: b.p(),
        });
    }
    Ok(())
}

/// Angular gap between two points, measured on `ℝ / pπℤ`.
pub fn angle_gap(a: &ProngPoint, b: &ProngPoint) -> f64 {
    circle_dist(a.theta(), b.theta(), a.p() as f64 * PI)
}

pub fn d_pol(a: &ProngPoint, b: &ProngPoint) -> Result<f64> {
    same_p(a, b)?;
    if a == b {
        return Ok(0.0);
    }
    Ok((a.r() - b.r()).hypot(angle_gap(a, b)))
}

pub fn d_eucl(a: &ProngPoint, b: &ProngPoint) -> Result<f64> {
    same_p(a, b)?;
    if a == b {
        return Ok(0.0);
    }
    Ok(cone_distance(a.r(), b.r(), angle_gap(a, b)))
}

/// Cone geodesic distance for radii `r1, r2` and angular gap `gap ≥ 0`.
pub(crate) fn cone_distance(r1: f64, r2: f64, gap: f64) -> f64 {
    if gap > PI {
        r1 + r2
    } else {
        let chord = 2.0 * (r1 * r2).sqrt() * (gap / 2.0).sin();
        (r1 - r2).hypot(chord)
    }
}

/// Lipschitz constant of `d_eucl` against `d_pol` on `{r ≤ R}`.
pub fn comparison_constant(radius_bound: f64) -> f64 {
    1f64.max(radius_bound).max(2.0 * radius_bound / PI)
}

/// The isometry `(r, θ)_p ↦ (r, θ + θ₁ - θ₀)_q` between two quadrants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadrantIsometry {
    p: u32,
    q: u32,
    theta0: f64,
    theta1: f64,
}

fn check_base_angle(model_p: u32, theta: f64) -> Result<f64> {
    let j = (theta / FRAC_PI_2).round();
    if !theta.is_finite()
        || (theta - j * FRAC_PI_2).abs() > 1e-12
        || j < 0.0
        || j >= 2.0 * model_p as f64
    {
        return Err(Error::NotQuadrantAngle(theta));
    }
    Ok(j * FRAC_PI_2)
}

pub fn quadrant_isometry(p: u32, q: u32, theta0: f64, theta1: f64) -> Result<QuadrantIsometry> {
    if p == 0 || q == 0 {
        return Err(Error::InvalidParams { p: p.min(q), k: 0 });
    }
    Ok(QuadrantIsometry {
        p,
        q,
        theta0: check_base_angle(p, theta0)?,
        theta1: check_base_angle(q, theta1)?,
    })
}

impl QuadrantIsometry {
    /// Whether `pt` lies in the closed source quadrant.
    pub fn in_source(&self, pt: &ProngPoint) -> bool {
        pt.p() == self.p && self.source_offset(pt).is_some()
    }

    fn source_offset(&self, pt: &ProngPoint) -> Option<f64> {
        let period = self.p as f64 * PI;
        let mut d = (pt.theta() - self.theta0).rem_euclid(period);
        if d > period - 1e-12 {
            d -= period;
        }
        (-1e-12..=FRAC_PI_2 + 1e-12)
            .contains(&d)
            .then_some(d.clamp(0.0, FRAC_PI_2))
    }

    pub fn apply(&self, pt: &ProngPoint) -> Result<ProngPoint> {
        if pt.p() != self.p {
            return Err(Error::ProngMismatch {
                expected: self.p,
                found: pt.p(),
            });
        }
        let offset = self.source_offset(pt).ok_or(Error::OutsideQuadrant)?;
        ProngPoint::new(self.q, pt.r(), self.theta1 + offset)
    }
}

/// Pair of points close in `d_eucl` yet `pπ/2` apart in `d_pol`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonEquivalenceWitness {
    pub z: ProngPoint,
    pub z_prime: ProngPoint,
    pub eps_bound: f64,
}

pub fn noneq_witness(p: u32, n: u64) -> Result<NonEquivalenceWitness> {
    if n == 0 {
        return Err(Error::InvalidCoordinate(
            "witness index n must be >= 1".into(),
        ));
    }
    let r = 1.0 / n as f64;
    let half_turn = p as f64 * FRAC_PI_2;
    Ok(NonEquivalenceWitness {
        z: ProngPoint::new(p, r, 0.0)?,
        z_prime: ProngPoint::new(p, r, half_turn)?,
        eps_bound: half_turn,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pt(p: u32, r: f64, theta: f64) -> ProngPoint {
        ProngPoint::new(p, r, theta).unwrap()
    }

    #[test]
    fn d_pol_examples() {
        assert_abs_diff_eq!(
            d_pol(&pt(3, 1.0, 0.0), &pt(3, 1.0, 3.0 * PI - 0.1)).unwrap(),
            0.1,
            epsilon = 1e-14
        );
        assert_eq!(d_pol(&pt(2, 1.0, 0.0), &pt(2, 1.0, 0.0)).unwrap(), 0.0);
        assert_abs_diff_eq!(
            d_pol(&pt(2, 1.0, 0.0), &pt(2, 2.0, PI)).unwrap(),
            3.29691,
            epsilon = 1e-5
        );
    }

    #[test]
    fn d_eucl_examples() {
        assert_abs_diff_eq!(
            d_eucl(&pt(2, 1.0, 0.0), &pt(2, 1.0, FRAC_PI_2)).unwrap(),
            2f64.sqrt(),
            epsilon = 1e-15
        );
        assert_eq!(
            d_eucl(&pt(4, 1.0, 0.0), &pt(4, 1.0, 2.0 * PI)).unwrap(),
            2.0
        );
        assert!(d_eucl(&pt(4, 1.0, 0.0), &pt(3, 1.0, 0.0)).is_err());
    }

    #[test]
    fn comparison_constant_shape() {
        assert_eq!(comparison_constant(0.5), 1.0);
        assert_eq!(comparison_constant(3.0), 3.0);
    }

    #[test]
    fn isometry_examples() {
        let iso = quadrant_isometry(3, 2, 0.0, 0.0).unwrap();
        let img = iso.apply(&pt(3, 1.0, PI / 4.0)).unwrap();
        assert_eq!((img.p(), img.r()), (2, 1.0));
        assert_abs_diff_eq!(img.theta(), PI / 4.0, epsilon = 1e-15);
        assert!(iso.apply(&pt(3, 1.0, 2.0)).is_err());
        assert!(quadrant_isometry(3, 2, 0.3, 0.0).is_err());
        assert!(quadrant_isometry(3, 2, 0.0, 2.0 * PI).is_err());

        let id = quadrant_isometry(2, 2, PI, PI).unwrap();
        let a = pt(2, 0.4, PI + 0.2);
        assert_eq!(id.apply(&a).unwrap(), a);
    }

    #[test]
    fn witness_examples() {
        let w = noneq_witness(2, 10).unwrap();
        assert_abs_diff_eq!(d_eucl(&w.z, &w.z_prime).unwrap(), 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(d_pol(&w.z, &w.z_prime).unwrap(), PI, epsilon = 1e-15);

        let w = noneq_witness(3, 100).unwrap();
        assert_abs_diff_eq!(d_eucl(&w.z, &w.z_prime).unwrap(), 0.02, epsilon = 1e-15);
        assert_abs_diff_eq!(d_pol(&w.z, &w.z_prime).unwrap(), 1.5 * PI, epsilon = 1e-14);

        let w = noneq_witness(1, 10).unwrap();
        assert_abs_diff_eq!(
            d_eucl(&w.z, &w.z_prime).unwrap(),
            2f64.sqrt() / 10.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(d_pol(&w.z, &w.z_prime).unwrap(), FRAC_PI_2, epsilon = 1e-15);
        assert!(noneq_witness(2, 0).is_err());
    }
}
