//! Mapping tori of the local models and their blow-ups.
//!
//! `N_{pk}` is `ℝ² × ℝ / ((z, t + 1) ∼ (ϕ_{pk}(z), t))` with the vertical unit
//! speed flow. A [`TorusPoint`] stores the canonical representative with fiber
//! coordinate `s ∈ [0, 1)`; plane points with `r = 0` live on the boundary torus
//! of the blow-up.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::PlaneMetricKind;
use crate::plane::{
    circle_dist, phi_pk_pow, wrap_angle, ModelParams, ProngId, ProngKind, ProngPoint,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    pub plane: ProngPoint,
    s: f64,
}

impl TorusPoint {
    pub fn new(plane: ProngPoint, s: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&s) {
            return Err(Error::InvalidCoordinate(format!(
                "fiber coordinate s = {s}"
            )));
        }
        Ok(Self { plane, s })
    }

    /// Canonical representative of `(plane, t)` for arbitrary real `t`.
    pub fn from_lift(plane: ProngPoint, t: f64, params: &ModelParams) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::InvalidCoordinate(format!(
                "fiber coordinate t = {t}"
            )));
        }
        let (n, s) = split_time(t);
        Ok(Self {
            plane: phi_pk_pow(&plane, params, n)?,
            s,
        })
    }

    pub fn s(&self) -> f64 {
        self.s
    }
}

/// Split `t` into `(⌊t⌋, t - ⌊t⌋)` with the fractional part in `[0, 1)`.
pub(crate) fn split_time(t: f64) -> (i64, f64) {
    let n = t.floor();
    let f = t - n;
    if f >= 1.0 {
        (n as i64 + 1, 0.0)
    } else {
        (n as i64, f)
    }
}

fn check_params(pt: &TorusPoint, params: &ModelParams) -> Result<()> {
    if pt.plane.p() != params.p() {
        return Err(Error::ProngMismatch {
            expected: params.p(),
            found: pt.plane.p(),
        });
    }
    Ok(())
}

/// The suspension flow `Φ^t_{pk}` (or `Φ*^t_{pk}` on boundary points).
pub fn flow(pt: &TorusPoint, t: f64, params: &ModelParams) -> Result<TorusPoint> {
    check_params(pt, params)?;
    if t == 0.0 {
        return Ok(*pt);
    }
    TorusPoint::from_lift(pt.plane, pt.s + t, params)
}

/// One-sided fiber-aligned distance from `(a_s, a_plane)` to the orbit
/// representative of `b` whose plane iterates are given by `b_shift(j) = ϕ^j(b)`.
pub(crate) fn fiber_aligned<F>(
    a_s: f64,
    a_plane: &ProngPoint,
    b_s: f64,
    mut b_shift: F,
    metric: PlaneMetricKind,
) -> Result<f64>
where
    F: FnMut(i64) -> Result<ProngPoint>,
{
    let mut best = f64::INFINITY;
    for m in -1i64..=1 {
        let ds = b_s + m as f64 - a_s;
        if ds.abs() > 0.5 {
            continue;
        }
        // (z, s + m) is identified with (ϕ^m z, s), so the lift at s + m
        // carries the plane point ϕ^{-m}(b).
        let plane = b_shift(-m)?;
        let d = metric.distance(a_plane, &plane)?;
        best = best.min(ds.hypot(d));
    }
    Ok(best)
}

/// Symmetrized fiber-aligned distance on `N_{pk}`, capped at 1.
pub fn dist_torus(
    a: &TorusPoint,
    b: &TorusPoint,
    params: &ModelParams,
    metric: PlaneMetricKind,
) -> Result<f64> {
    check_params(a, params)?;
    check_params(b, params)?;
    if metric == PlaneMetricKind::Eucl && (a.plane.is_boundary() || b.plane.is_boundary()) {
        return Err(Error::MetricRequiresPolar);
    }
    if a == b {
        return Ok(0.0);
    }
    let ab = fiber_aligned(
        a.s,
        &a.plane,
        b.s,
        |j| phi_pk_pow(&b.plane, params, j),
        metric,
    )?;
    let ba = fiber_aligned(
        b.s,
        &b.plane,
        a.s,
        |j| phi_pk_pow(&a.plane, params, j),
        metric,
    )?;
    Ok((0.5 * (ab + ba)).min(1.0))
}

/// Image of a point under the blow-down collapse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BlownDown {
    Regular(TorusPoint),
    /// The point of the singular orbit at fiber `s`.
    Singular {
        s: f64,
    },
}

pub fn blow_down(pt: &TorusPoint) -> BlownDown {
    if pt.plane.is_boundary() {
        BlownDown::Singular { s: pt.s }
    } else {
        BlownDown::Regular(*pt)
    }
}

/// Flow on the blown-down torus, acting on singular markers by fiber shift.
pub fn flow_blown_down(pt: &BlownDown, t: f64, params: &ModelParams) -> Result<BlownDown> {
    match pt {
        BlownDown::Regular(x) => Ok(BlownDown::Regular(flow(x, t, params)?)),
        BlownDown::Singular { s } => Ok(BlownDown::Singular {
            s: split_time(s + t).1,
        }),
    }
}

/// The boundary circle map `ϕ*_{pk}` on `θ ∈ [0, pπ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCircleMap {
    params: ModelParams,
}

pub fn boundary_circle_map(params: ModelParams) -> BoundaryCircleMap {
    BoundaryCircleMap { params }
}

impl BoundaryCircleMap {
    pub fn params(&self) -> ModelParams {
        self.params
    }

    pub fn period(&self) -> f64 {
        self.params.p() as f64 * PI
    }

    pub fn apply(&self, theta: f64) -> f64 {
        self.apply_n(theta, 1)
    }

    /// `n`-th iterate (negative `n` for the inverse).
    pub fn apply_n(&self, theta: f64, n: i64) -> f64 {
        let pt = ProngPoint::boundary(self.params.p(), theta).expect("finite angle");
        phi_pk_pow(&pt, &self.params, n)
            .expect("boundary iterate is always finite")
            .theta()
    }

    /// Signed circle difference `f^n(θ) - θ` in `(-pπ/2, pπ/2]`.
    pub fn displacement(&self, theta: f64, n: i64) -> f64 {
        let period = self.period();
        let d = (self.apply_n(theta, n) - theta).rem_euclid(period);
        if d > period / 2.0 {
            d - period
        } else {
            d
        }
    }

    /// Derivative of `f` by Richardson-extrapolated central differences.
    pub fn derivative(&self, theta: f64) -> f64 {
        let period = self.period();
        let central = |h: f64| {
            let up = self.apply(theta + h);
            let down = self.apply(theta - h);
            let mut d = (up - down).rem_euclid(period);
            if d > period / 2.0 {
                d -= period;
            }
            d / (2.0 * h)
        };
        let h = 1e-3;
        (4.0 * central(h / 2.0) - central(h)) / 3.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrbitKind {
    Attracting,
    Repelling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryOrbit {
    pub kind: OrbitKind,
    /// Angles of the orbit points, sorted increasingly.
    pub angles: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCensus {
    pub attracting: u32,
    pub repelling: u32,
    pub period: u32,
    pub orbits: Vec<BoundaryOrbit>,
}

const ORBIT_MATCH_TOL: f64 = 1e-6;

/// Periodic orbits of the boundary flow, found by root bracketing of
/// `f^q(θ) - θ` on a generic grid and grouped into `f`-orbits.
pub fn boundary_orbit_census(params: &ModelParams) -> BoundaryCensus {
    let map = boundary_circle_map(*params);
    let q = params.q() as i64;
    let period = map.period();
    let cells = 2 * params.p() as usize * 64;
    let step = period / cells as f64;
    let grid: Vec<f64> = (0..cells).map(|i| (i as f64 + 0.3719) * step).collect();
    let values: Vec<f64> = grid.iter().map(|&t| map.displacement(t, q)).collect();

    let mut fixed: Vec<(f64, OrbitKind)> = Vec::new();
    for i in 0..cells {
        let j = (i + 1) % cells;
        let (ga, gb) = (values[i], values[j]);
        if ga.signum() == gb.signum() {
            continue;
        }
        let mut lo = grid[i];
        let mut hi = if j == 0 { grid[0] + period } else { grid[j] };
        let sign_lo = ga.signum();
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if map.displacement(mid, q).signum() == sign_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let root = wrap_angle(0.5 * (lo + hi), period);
        let kind = if gb > 0.0 {
            OrbitKind::Repelling
        } else {
            OrbitKind::Attracting
        };
        fixed.push((root, kind));
    }

    let mut assigned = vec![false; fixed.len()];
    let mut orbits = Vec::new();
    let mut orbit_period = 0;
    for i in 0..fixed.len() {
        if assigned[i] {
            continue;
        }
        let (start, kind) = fixed[i];
        let mut angles = vec![start];
        assigned[i] = true;
        let mut theta = map.apply(start);
        let mut n = 1;
        while circle_dist(theta, start, period) > ORBIT_MATCH_TOL && n <= q {
            // Continue from the matching root so errors do not compound along
            // repelling orbits.
            if let Some(j) = fixed
                .iter()
                .position(|(t, _)| circle_dist(*t, theta, period) <= ORBIT_MATCH_TOL)
            {
                assigned[j] = true;
                theta = fixed[j].0;
            }
            angles.push(theta);
            theta = map.apply(theta);
            n += 1;
        }
        angles.sort_by(f64::total_cmp);
        if orbit_period == 0 {
            orbit_period = n as u32;
        }
        orbits.push(BoundaryOrbit { kind, angles });
    }
    let count = |k: OrbitKind| orbits.iter().filter(|o| o.kind == k).count() as u32;
    BoundaryCensus {
        attracting: count(OrbitKind::Attracting),
        repelling: count(OrbitKind::Repelling),
        period: orbit_period,
        orbits,
    }
}

/// The standard polygon family `V_c`: `|u|, |v| ≤ c` in every quadrant chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardPolygonSpec {
    c: f64,
}

impl Default for StandardPolygonSpec {
    fn default() -> Self {
        Self { c: 1.0 }
    }
}

/// One side of a standard polygon, given by its two corners.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolygonSide {
    pub kind: ProngKind,
    /// Prong crossed by the side.
    pub crosses: ProngId,
    pub start: ProngPoint,
    pub end: ProngPoint,
}

impl StandardPolygonSpec {
    pub fn new(c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Config(format!("polygon half-width c = {c}")));
        }
        Ok(Self { c })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Membership of a plane point; boundary points always belong.
    pub fn contains(&self, pt: &ProngPoint) -> bool {
        if pt.is_boundary() {
            return true;
        }
        let (_, u, v) = pt.quadrant_chart();
        let bound = self.c * (1.0 + 1e-12);
        u <= bound && v <= bound
    }

    /// The `2p` sides of `V_c ∩ 𝒫_s` in counterclockwise order, starting with
    /// the stable side crossing unstable prong 0.
    pub fn boundary_segments(&self, p: u32) -> Result<Vec<PolygonSide>> {
        let c = self.c;
        let corner = |n: u32| ProngPoint::from_quadrant_chart(p, n % (2 * p), c, c);
        let mut sides = Vec::with_capacity(2 * p as usize);
        for n in 0..2 * p {
            let (kind, crosses) = if n % 2 == 0 {
                (ProngKind::Stable, ProngId::unstable(n / 2))
            } else {
                (ProngKind::Unstable, ProngId::stable(n.div_ceil(2) % p))
            };
            sides.push(PolygonSide {
                kind,
                crosses,
                start: corner(n)?,
                end: corner(n + 1)?,
            });
        }
        Ok(sides)
    }
}

/// The flow-time window an orbit spends in `V_c × [0, 1)` around `t = 0`.
///
/// Endpoints are the times at which the first plane iterate outside `V_c`
/// is reached; integer fiber times strictly between them stay inside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitWindow {
    pub t_minus: f64,
    pub t_plus: f64,
}

impl ExitWindow {
    pub fn contains(&self, t: f64) -> bool {
        self.t_minus <= t && t <= self.t_plus
    }

    pub fn is_compact(&self) -> bool {
        self.t_minus.is_finite() && self.t_plus.is_finite()
    }

    pub fn length(&self) -> f64 {
        self.t_plus - self.t_minus
    }
}

const MAX_EXIT_ITERATES: i64 = 1100;

pub fn exit_window(
    pt: &TorusPoint,
    spec: &StandardPolygonSpec,
    params: &ModelParams,
) -> Result<ExitWindow> {
    check_params(pt, params)?;
    if pt.plane.is_boundary() {
        return Err(Error::BoundaryPoint);
    }
    if !spec.contains(&pt.plane) {
        return Err(Error::OutsidePolygon);
    }
    let prong = pt.plane.prong();
    let first_exit = |sign: i64| -> Result<f64> {
        for n in 1..=MAX_EXIT_ITERATES {
            let it = phi_pk_pow(&pt.plane, params, sign * n)?;
            if !spec.contains(&it) {
                return Ok((sign * n) as f64);
            }
        }
        Ok(sign as f64 * f64::INFINITY)
    };
    let t_plus = match prong {
        Some(ProngId {
            kind: ProngKind::Stable,
            ..
        }) => f64::INFINITY,
        _ => first_exit(1)? - pt.s,
    };
    let t_minus = match prong {
        Some(ProngId {
            kind: ProngKind::Unstable,
            ..
        }) => f64::NEG_INFINITY,
        _ => first_exit(-1)? - pt.s,
    };
    if t_plus.is_infinite() && t_minus.is_infinite() {
        return Err(Error::SingularOrbit);
    }
    Ok(ExitWindow { t_minus, t_plus })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::d_pol;
    use crate::plane::{phi_pk, Direction};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn params(p: u32, k: u32) -> ModelParams {
        ModelParams::new(p, k).unwrap()
    }

    fn tp(p: u32, r: f64, theta: f64, s: f64) -> TorusPoint {
        TorusPoint::new(ProngPoint::new(p, r, theta).unwrap(), s).unwrap()
    }

    #[test]
    fn flow_examples() {
        let m = params(3, 0);
        let x = flow(&tp(3, 1.0, 0.0, 0.0), 1.0, &m).unwrap();
        assert_abs_diff_eq!(x.plane.r(), 2f64.powf(-2.0 / 3.0), epsilon = 1e-15);
        assert_eq!(x.s(), 0.0);

        let y = tp(3, 0.7, 1.1, 0.4);
        assert_eq!(flow(&y, 0.0, &m).unwrap(), y);

        let m2 = params(2, 0);
        let z = tp(2, 1.0, 0.0, 0.75);
        let w = flow(&z, 0.5, &m2).unwrap();
        assert_eq!(w.s(), 0.25);
        assert_eq!(w.plane, phi_pk(&z.plane, &m2, Direction::Forward).unwrap());
    }

    #[test]
    fn fiber_coordinate_validation() {
        let plane = ProngPoint::new(2, 1.0, 0.0).unwrap();
        assert!(TorusPoint::new(plane, 1.0).is_err());
        assert!(TorusPoint::new(plane, -0.1).is_err());
        let m = params(2, 0);
        let lifted = TorusPoint::from_lift(plane, -1e-20, &m).unwrap();
        assert_eq!(lifted.s(), 0.0);
        assert_eq!(lifted.plane, plane);
    }

    #[test]
    fn dist_torus_examples() {
        let m = params(3, 1);
        let a = tp(3, 0.6, 0.4, 0.3);
        assert_eq!(dist_torus(&a, &a, &m, PlaneMetricKind::Eucl).unwrap(), 0.0);

        let b = tp(3, 0.65, 0.4, 0.3);
        let d = d_pol(&a.plane, &b.plane).unwrap();
        assert_abs_diff_eq!(
            dist_torus(&a, &b, &m, PlaneMetricKind::Pol).unwrap(),
            d,
            epsilon = 1e-15
        );

        let z = ProngPoint::new(3, 0.6, 0.4).unwrap();
        let a = TorusPoint::new(z, 0.9).unwrap();
        let b = TorusPoint::new(phi_pk(&z, &m, Direction::Forward).unwrap(), 0.1).unwrap();
        for metric in [PlaneMetricKind::Eucl, PlaneMetricKind::Pol] {
            assert_abs_diff_eq!(
                dist_torus(&a, &b, &m, metric).unwrap(),
                0.2,
                epsilon = 1e-12
            );
        }

        let boundary = tp(3, 0.0, 0.4, 0.1);
        assert_eq!(
            dist_torus(&a, &boundary, &m, PlaneMetricKind::Eucl),
            Err(Error::MetricRequiresPolar)
        );
    }

    #[test]
    fn blow_down_examples() {
        assert_eq!(
            blow_down(&tp(3, 0.0, 1.0, 0.3)),
            BlownDown::Singular { s: 0.3 }
        );
        let x = tp(3, 0.5, 1.0, 0.3);
        assert_eq!(blow_down(&x), BlownDown::Regular(x));
    }

    #[test]
    fn circle_map_fixed_points_for_p2() {
        let f = boundary_circle_map(params(2, 0));
        for (i, expected) in [4.0, 0.25, 4.0, 0.25].into_iter().enumerate() {
            let theta = i as f64 * FRAC_PI_2;
            assert!(circle_dist(f.apply(theta), theta, 2.0 * PI) < 1e-14);
            assert_abs_diff_eq!(f.derivative(theta), expected, epsilon = 1e-8);
        }
    }

    #[test]
    fn circle_map_with_rotation_has_period_three() {
        let f = boundary_circle_map(params(3, 1));
        assert!(circle_dist(f.apply(0.0), 0.0, 3.0 * PI) > 1.0);
        assert!(circle_dist(f.apply_n(0.0, 3), 0.0, 3.0 * PI) < 1e-14);
    }

    #[test]
    fn census_examples() {
        let c = boundary_orbit_census(&params(4, 2));
        assert_eq!((c.attracting, c.repelling, c.period), (2, 2, 2));
        let c = boundary_orbit_census(&params(5, 2));
        assert_eq!((c.attracting, c.repelling, c.period), (1, 1, 5));
        let c = boundary_orbit_census(&params(3, 0));
        assert_eq!((c.attracting, c.repelling, c.period), (3, 3, 1));
        for orbit in &c.orbits {
            let on_stable = (orbit.angles[0] / PI).fract().abs() < 1e-9;
            assert_eq!(orbit.kind == OrbitKind::Repelling, on_stable);
        }
    }

    #[test]
    fn polygon_sides_alternate() {
        let spec = StandardPolygonSpec::default();
        let sides = spec.boundary_segments(3).unwrap();
        assert_eq!(sides.len(), 6);
        for (i, side) in sides.iter().enumerate() {
            let next = &sides[(i + 1) % sides.len()];
            assert_ne!(side.kind, next.kind);
            assert!(d_pol(&side.end, &next.start).unwrap() < 1e-12);
        }
        assert!(StandardPolygonSpec::new(0.0).is_err());
    }

    #[test]
    fn exit_window_examples() {
        let spec = StandardPolygonSpec::default();
        let m = params(2, 0);
        let plane = ProngPoint::from_quadrant_chart(2, 0, 0.5, 0.01).unwrap();
        let w = exit_window(&TorusPoint::new(plane, 0.0).unwrap(), &spec, &m).unwrap();
        assert_eq!((w.t_minus, w.t_plus), (-2.0, 7.0));

        let on_stable = TorusPoint::new(ProngPoint::new(2, 0.5, 0.0).unwrap(), 0.0).unwrap();
        let w = exit_window(&on_stable, &spec, &m).unwrap();
        assert_eq!(w.t_plus, f64::INFINITY);
        assert_eq!(w.t_minus, -2.0);

        let p3 = ProngPoint::from_quadrant_chart(3, 0, 0.5, 0.01).unwrap();
        let x = TorusPoint::new(p3, 0.0).unwrap();
        let w0 = exit_window(&x, &spec, &params(3, 0)).unwrap();
        let w1 = exit_window(&x, &spec, &params(3, 1)).unwrap();
        assert_eq!(w0, w1);
        assert_eq!((w0.t_minus, w0.t_plus), (-2.0, 7.0));

        let outside = ProngPoint::from_quadrant_chart(2, 0, 1.5, 0.01).unwrap();
        assert_eq!(
            exit_window(&TorusPoint::new(outside, 0.0).unwrap(), &spec, &m),
            Err(Error::OutsidePolygon)
        );
    }
}
