//! Orbit arithmetic in quadrant charts.
//!
//! Iterates of `ϕ_{pk}` act on chart coordinates by `(u, v) ↦ (u/2, 2v)` and
//! a quadrant shift, which is exact in floating point. Distances are
//! evaluated from chart coordinates with the angular gap taken from relative
//! arguments of cover points, so they stay accurate far along an orbit where
//! absolute angles would round to a prong.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::metrics::{cone_distance, PlaneMetricKind};
use crate::plane::{ModelParams, ProngPoint, QuadrantIndex};
use crate::suspension::split_time;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    p: u32,
    n: u32,
    u: f64,
    v: f64,
}

impl ChartPoint {
    /// Chart point with signed coordinates, reflected across prongs as needed.
    pub fn new(p: u32, n: u32, u: f64, v: f64) -> Self {
        let two_p = 2 * p;
        let mut n = n % two_p;
        let (mut u, mut v) = (u, v);
        if u < 0.0 {
            n ^= 1;
            u = -u;
        }
        if v < 0.0 {
            n = if n.is_multiple_of(2) {
                (n + two_p - 1) % two_p
            } else {
                (n + 1) % two_p
            };
            v = -v;
        }
        Self {
            p,
            n,
            u: u + 0.0,
            v: v + 0.0,
        }
    }

    pub fn from_prong(pt: &ProngPoint) -> Self {
        let (q, u, v) = pt.quadrant_chart();
        Self {
            p: pt.p(),
            n: q.n(),
            u,
            v,
        }
    }

    pub fn to_prong(&self) -> Result<ProngPoint> {
        ProngPoint::from_quadrant_chart(self.p, self.n, self.u, self.v)
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn quadrant(&self) -> u32 {
        self.n
    }

    pub fn quadrant_index(&self) -> QuadrantIndex {
        QuadrantIndex::new(self.p, self.n).expect("quadrant in range")
    }

    pub fn iterate(&self, params: &ModelParams, j: i64) -> Self {
        let scale = 2f64.powi(j as i32);
        let two_p = 2 * self.p as i64;
        let n = (self.n as i64 + 2 * params.k() as i64 * j).rem_euclid(two_p) as u32;
        Self {
            p: self.p,
            n,
            u: self.u / scale,
            v: self.v * scale,
        }
    }

    /// Radius in `(r, θ)_p` coordinates.
    pub fn radius(&self) -> f64 {
        self.u.hypot(self.v).powf(2.0 / self.p as f64)
    }

    /// Radius of the stable-prong projection.
    pub fn stable_projection_radius(&self) -> f64 {
        self.u.powf(2.0 / self.p as f64)
    }

    fn cover(&self) -> (i64, f64, f64) {
        let x = if self.n.is_multiple_of(2) {
            self.u
        } else {
            -self.u
        };
        ((self.n / 2) as i64, x, self.v)
    }
}

fn rel_angle(x1: f64, y1: f64, x2: f64, y2: f64) -> f64 {
    (x1 * y2 - y1 * x2).atan2(x1 * x2 + y1 * y2)
}

/// Angular gap on `ℝ / pπℤ` between two chart points.
pub fn angle_gap(a: &ChartPoint, b: &ChartPoint) -> f64 {
    let p = a.p as i64;
    let (m1, x1, y1) = a.cover();
    let (m2, x2, y2) = b.cover();
    let d = (m2 - m1) as f64;
    let rough = d * PI + (y2.atan2(x2) - y1.atan2(x1));
    let direct = rel_angle(x1, y1, x2, y2);
    let psi = if direct.abs() <= FRAC_PI_2 {
        direct
    } else {
        rel_angle(x1, y1, -x2, -y2)
    };
    let j = ((rough - psi) / PI).round() as i64;
    let j = j.rem_euclid(p);
    let first = (j as f64 * PI + psi).abs();
    let second = ((j - p) as f64 * PI + psi).abs();
    first.min(second)
}

/// Both plane distances `(eucl, pol)` between two chart points.
pub fn plane_distances(a: &ChartPoint, b: &ChartPoint) -> (f64, f64) {
    if a == b {
        return (0.0, 0.0);
    }
    let (r1, r2) = (a.radius(), b.radius());
    let gap = angle_gap(a, b);
    (cone_distance(r1, r2, gap), (r1 - r2).hypot(gap))
}

pub fn plane_distance(a: &ChartPoint, b: &ChartPoint, metric: PlaneMetricKind) -> f64 {
    let (e, p) = plane_distances(a, b);
    match metric {
        PlaneMetricKind::Eucl => e,
        PlaneMetricKind::Pol => p,
    }
}

/// A flow line of the suspension, parametrized by time from its base point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartOrbit {
    pub params: ModelParams,
    pub base: ChartPoint,
    pub s: f64,
}

impl ChartOrbit {
    pub fn new(params: ModelParams, base: ChartPoint, s: f64) -> Result<Self> {
        if base.p != params.p() {
            return Err(Error::ProngMismatch {
                expected: params.p(),
                found: base.p,
            });
        }
        if base.u == 0.0 && base.v == 0.0 {
            return Err(Error::BoundaryPoint);
        }
        let (n, s) = split_time(s);
        Ok(Self {
            params,
            base: base.iterate(&params, n),
            s,
        })
    }

    /// `(integer part, fiber coordinate)` of the point at time `t`.
    pub fn state(&self, t: f64) -> (i64, f64) {
        split_time(self.s + t)
    }

    pub fn plane(&self, n: i64) -> ChartPoint {
        self.base.iterate(&self.params, n)
    }

    /// The orbit re-based at time `t`.
    pub fn at(&self, t: f64) -> ChartOrbit {
        let (n, s) = self.state(t);
        ChartOrbit {
            params: self.params,
            base: self.plane(n),
            s,
        }
    }

    /// Plane point of the representative aligned with fiber 0 at time `t`,
    /// i.e. the lift whose fiber coordinate lies within ½ of 0.
    pub fn aligned_plane(&self, t: f64) -> ChartPoint {
        let (n, s) = self.state(t);
        if s <= 0.5 {
            self.plane(n)
        } else {
            self.plane(n + 1)
        }
    }
}

fn one_sided(a: (i64, f64), x: &ChartOrbit, b: (i64, f64), y: &ChartOrbit) -> (f64, f64) {
    let pa = x.plane(a.0);
    let mut best = (f64::INFINITY, f64::INFINITY);
    for m in -1i64..=1 {
        let ds = b.1 + m as f64 - a.1;
        if ds.abs() > 0.5 {
            continue;
        }
        let (e, p) = plane_distances(&pa, &y.plane(b.0 - m));
        best.0 = best.0.min(ds.hypot(e));
        best.1 = best.1.min(ds.hypot(p));
    }
    best
}

/// Plane points of `Φ^{tx}(x)` and of the lift of `Φ^{ty}(y)` whose fiber
/// coordinate is nearest to that of `x`.
pub fn fiber_partners(
    x: &ChartOrbit,
    tx: f64,
    y: &ChartOrbit,
    ty: f64,
) -> (ChartPoint, ChartPoint) {
    let (n, s) = x.state(tx);
    let (m, s2) = y.state(ty);
    let j = (s - s2).round() as i64;
    (x.plane(n), y.plane(m - j))
}

/// Torus distances `(eucl, pol)` between `Φ^{tx}(x)` and `Φ^{ty}(y)`, with the
/// same symmetrization and cap as [`crate::suspension::dist_torus`].
pub fn torus_distances(x: &ChartOrbit, tx: f64, y: &ChartOrbit, ty: f64) -> (f64, f64) {
    let a = x.state(tx);
    let b = y.state(ty);
    let ab = one_sided(a, x, b, y);
    let ba = one_sided(b, y, a, x);
    (
        (0.5 * (ab.0 + ba.0)).min(1.0),
        (0.5 * (ab.1 + ba.1)).min(1.0),
    )
}

/// Integer iterate indices `(n₋, n₊)` of the first plane iterates outside `V_c`
/// in each direction; `None` on a side where the orbit never leaves.
pub fn exit_indices(pt: &ChartPoint, c: f64) -> (Option<i64>, Option<i64>) {
    let bound = c * (1.0 + 1e-12);
    let first = |x: f64| -> Option<i64> {
        if x == 0.0 {
            return None;
        }
        let mut n = 1i64;
        let mut y = x * 2.0;
        while y <= bound {
            y *= 2.0;
            n += 1;
        }
        Some(n)
    };
    (first(pt.u).map(|n| -n), first(pt.v))
}
