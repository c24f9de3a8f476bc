//! The p-prong plane and its hyperbolic models.
//!
//! Points are stored in `(r, θ)_p` coordinates with `θ ∈ [0, pπ)`. Sector `m`
//! is `θ ∈ [mπ, (m+1)π]` and is charted onto the closed upper half of the
//! `ϕ₂`-plane by `(r, θ) ↦ r^{p/2}·e^{i(θ - mπ)}`. Quadrant `n` is
//! `θ ∈ [nπ/2, (n+1)π/2]`; its chart coordinates `(u, v)` are the cover
//! coordinates with `u` reflected on odd quadrants, so that `u = 0` is the
//! unstable prong and `v = 0` the stable prong bounding the quadrant.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radii below this are identified with the boundary circle `r = 0`.
pub const BOUNDARY_RADIUS: f64 = 1e-300;

/// Angular tolerance for prong membership.
pub const PRONG_TOL: f64 = 1e-12;

pub fn gcd(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// A local model `ϕ_{pk} = ϕ_p ∘ R_{k/p}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelParams {
    p: u32,
    k: u32,
}

impl ModelParams {
    pub fn new(p: u32, k: u32) -> Result<Self> {
        if p == 0 || k >= p {
            return Err(Error::InvalidParams { p, k });
        }
        Ok(Self { p, k })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// `gcd(k, p)`, with `gcd(0, p) = p`.
    pub fn g(&self) -> u32 {
        gcd(self.k as u64, self.p as u64) as u32
    }

    /// Period of each prong, `p / g`.
    pub fn q(&self) -> u32 {
        self.p / self.g()
    }

    /// Enumerate all models with `p` in the given inclusive range.
    pub fn all(p_range: std::ops::RangeInclusive<u32>) -> impl Iterator<Item = ModelParams> {
        p_range.flat_map(|p| (0..p).map(move |k| ModelParams { p, k }))
    }
}

impl fmt::Display for ModelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(p={}, k={})", self.p, self.k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CartesianPoint {
    pub x: f64,
    pub y: f64,
}

impl CartesianPoint {
    pub const ORIGIN: CartesianPoint = CartesianPoint { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(rho: f64, alpha: f64) -> Self {
        Self {
            x: rho * alpha.cos(),
            y: rho * alpha.sin(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(&self, other: &CartesianPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    fn from_complex(z: Complex64) -> Self {
        Self { x: z.re, y: z.im }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Inverse,
}

impl Direction {
    fn exponent(self) -> i64 {
        match self {
            Direction::Forward => 1,
            Direction::Inverse => -1,
        }
    }
}

/// `ϕ₂(x, y) = (x/2, 2y)`.
pub fn phi2(pt: CartesianPoint, direction: Direction) -> CartesianPoint {
    match direction {
        Direction::Forward => CartesianPoint::new(pt.x * 0.5, pt.y * 2.0),
        Direction::Inverse => CartesianPoint::new(pt.x * 2.0, pt.y * 0.5),
    }
}

/// The 1-prong map, `π₂ ∘ ϕ₂ ∘ π₂⁻¹` on the `w`-plane.
pub fn phi1(w: CartesianPoint, direction: Direction) -> CartesianPoint {
    let zeta = CartesianPoint::from_complex(w.to_complex().sqrt());
    let image = phi2(zeta, direction).to_complex();
    CartesianPoint::from_complex(image * image)
}

/// Normalize an angle onto the circle `[0, period)`.
pub fn wrap_angle(theta: f64, period: f64) -> f64 {
    let t = theta.rem_euclid(period);
    if t >= period {
        0.0
    } else {
        t
    }
}

/// Distance on the circle `ℝ / period·ℤ`.
pub fn circle_dist(a: f64, b: f64, period: f64) -> f64 {
    let (a, b) = if a <= b { (b, a) } else { (a, b) };
    let d = (a - b).rem_euclid(period);
    d.min(period - d).max(0.0)
}

/// A point of the p-prong plane (or of its blow-up when `r = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProngPoint {
    r: f64,
    theta: f64,
    p: u32,
}

impl ProngPoint {
    pub fn new(p: u32, r: f64, theta: f64) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidParams { p, k: 0 });
        }
        if !r.is_finite() || r < 0.0 {
            return Err(Error::InvalidCoordinate(format!("r = {r}")));
        }
        if !theta.is_finite() {
            return Err(Error::InvalidCoordinate(format!("theta = {theta}")));
        }
        let r = if r < BOUNDARY_RADIUS { 0.0 } else { r };
        Ok(Self {
            r,
            theta: wrap_angle(theta, p as f64 * PI),
            p,
        })
    }

    /// A point of the blown-up boundary circle.
    pub fn boundary(p: u32, theta: f64) -> Result<Self> {
        Self::new(p, 0.0, theta)
    }

    /// Build from actual planar coordinates: the `(r, θ)_p` angle is `p/2` times
    /// the Euclidean polar angle.
    pub fn from_plane_xy(p: u32, x: f64, y: f64) -> Result<Self> {
        let phi = y.atan2(x).rem_euclid(2.0 * PI);
        Self::new(p, x.hypot(y), phi * p as f64 / 2.0)
    }

    /// Planar Cartesian image, the inverse of [`ProngPoint::from_plane_xy`].
    pub fn to_plane_xy(&self) -> CartesianPoint {
        CartesianPoint::from_polar(self.r, 2.0 * self.theta / self.p as f64)
    }

    /// Point with quadrant-chart coordinates `(u, v)` in quadrant `n`.
    ///
    /// Negative `u` or `v` reflects across the corresponding prong into the
    /// adjacent quadrant.
    pub fn from_quadrant_chart(p: u32, n: u32, u: f64, v: f64) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidParams { p, k: 0 });
        }
        if !u.is_finite() || !v.is_finite() {
            return Err(Error::InvalidCoordinate(format!("(u, v) = ({u}, {v})")));
        }
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
        let m = n / 2;
        let x = if n.is_multiple_of(2) { u } else { -u };
        from_cover(p, m, CartesianPoint::new(x, v))
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn is_boundary(&self) -> bool {
        self.r == 0.0
    }

    /// Same point with `θ` shifted by `delta`.
    pub fn rotate(&self, delta: f64) -> Self {
        Self {
            r: self.r,
            theta: wrap_angle(self.theta + delta, self.p as f64 * PI),
            p: self.p,
        }
    }

    /// Sector index `m` with `θ ∈ [mπ, (m+1)π)`.
    pub fn sector(&self) -> u32 {
        ((self.theta / PI).floor() as u32).min(self.p - 1)
    }

    pub fn quadrant(&self) -> QuadrantIndex {
        let n = ((self.theta / FRAC_PI_2).floor() as u32).min(2 * self.p - 1);
        QuadrantIndex { n, p: self.p }
    }

    /// Chart coordinates `(u, v) ≥ 0` in the quadrant containing the point.
    pub fn quadrant_chart(&self) -> (QuadrantIndex, f64, f64) {
        let quadrant = self.quadrant();
        let m = quadrant.n / 2;
        let cover = cover_point(self, m);
        let u = if quadrant.n.is_multiple_of(2) {
            cover.x
        } else {
            -cover.x
        };
        (quadrant, u.max(0.0), cover.y.max(0.0))
    }

    /// Prong containing the point, within [`PRONG_TOL`].
    pub fn prong(&self) -> Option<ProngId> {
        let j = (self.theta / FRAC_PI_2).round();
        if (self.theta - j * FRAC_PI_2).abs() > PRONG_TOL {
            return None;
        }
        let j = (j as u32) % (2 * self.p);
        Some(if j.is_multiple_of(2) {
            ProngId::stable(j / 2)
        } else {
            ProngId::unstable(j / 2)
        })
    }
}

impl fmt::Display for ProngPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})_{}", self.r, self.theta, self.p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadrantIndex {
    n: u32,
    p: u32,
}

impl QuadrantIndex {
    pub fn new(p: u32, n: u32) -> Result<Self> {
        if p == 0 || n >= 2 * p {
            return Err(Error::InvalidCoordinate(format!("quadrant {n} for p={p}")));
        }
        Ok(Self { n, p })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn angle_range(&self) -> (f64, f64) {
        let lo = self.n as f64 * FRAC_PI_2;
        (lo, lo + FRAC_PI_2)
    }

    /// Stable prong bounding the quadrant (`v = 0`).
    pub fn stable_prong(&self) -> ProngId {
        ProngId::stable(self.n.div_ceil(2) % self.p)
    }

    /// Unstable prong bounding the quadrant (`u = 0`).
    pub fn unstable_prong(&self) -> ProngId {
        ProngId::unstable(self.n / 2)
    }

    /// Image quadrant under `ϕ_{pk}^j`.
    pub fn shifted(&self, k: u32, j: i64) -> Self {
        let two_p = 2 * self.p as i64;
        let n = (self.n as i64 + 2 * k as i64 * j).rem_euclid(two_p);
        Self {
            n: n as u32,
            p: self.p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProngKind {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProngId {
    pub kind: ProngKind,
    pub index: u32,
}

impl ProngId {
    pub fn stable(index: u32) -> Self {
        Self {
            kind: ProngKind::Stable,
            index,
        }
    }

    pub fn unstable(index: u32) -> Self {
        Self {
            kind: ProngKind::Unstable,
            index,
        }
    }

    pub fn angle(&self) -> f64 {
        match self.kind {
            ProngKind::Stable => self.index as f64 * PI,
            ProngKind::Unstable => FRAC_PI_2 + self.index as f64 * PI,
        }
    }

    /// Point on this prong at radius `r`.
    pub fn point(&self, p: u32, r: f64) -> Result<ProngPoint> {
        ProngPoint::new(p, r, self.angle())
    }
}

impl fmt::Display for ProngId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ProngKind::Stable => write!(f, "stable #{}", self.index),
            ProngKind::Unstable => write!(f, "unstable #{}", self.index),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartDirection {
    ToCover,
    FromCover,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChartValue {
    Cover(CartesianPoint),
    Plane(ProngPoint),
}

/// Sector chart between the p-prong plane and the upper half `ϕ₂`-plane.
pub fn sector_chart(
    p: u32,
    input: ChartValue,
    direction: ChartDirection,
    sector_m: u32,
) -> Result<ChartValue> {
    match (direction, input) {
        (ChartDirection::ToCover, ChartValue::Plane(pt)) => {
            if pt.p != p {
                return Err(Error::ProngMismatch {
                    expected: p,
                    found: pt.p,
                });
            }
            to_cover(&pt, sector_m).map(ChartValue::Cover)
        }
        (ChartDirection::FromCover, ChartValue::Cover(c)) => {
            from_cover(p, sector_m, c).map(ChartValue::Plane)
        }
        (ChartDirection::ToCover, ChartValue::Cover(_)) => Err(Error::InvalidCoordinate(
            "to_cover expects a plane point".into(),
        )),
        (ChartDirection::FromCover, ChartValue::Plane(_)) => Err(Error::InvalidCoordinate(
            "from_cover expects a cover point".into(),
        )),
    }
}

/// Angle of `pt` lifted into `[mπ - tol, (m+1)π + tol]`, if possible.
fn lift_into_sector(pt: &ProngPoint, m: u32) -> Option<f64> {
    let period = pt.p as f64 * PI;
    let lo = m as f64 * PI;
    let tol = 1e-12;
    [pt.theta, pt.theta + period, pt.theta - period]
        .into_iter()
        .find(|t| *t >= lo - tol && *t <= lo + PI + tol)
}

pub fn to_cover(pt: &ProngPoint, m: u32) -> Result<CartesianPoint> {
    if m >= pt.p {
        return Err(Error::ChartDomain {
            sector: m,
            theta: pt.theta,
        });
    }
    let theta = lift_into_sector(pt, m).ok_or(Error::ChartDomain {
        sector: m,
        theta: pt.theta,
    })?;
    let alpha = (theta - m as f64 * PI).clamp(0.0, PI);
    let rho = pt.r.powf(pt.p as f64 / 2.0);
    Ok(CartesianPoint::from_polar(rho, alpha))
}

pub fn from_cover(p: u32, m: u32, c: CartesianPoint) -> Result<ProngPoint> {
    if m >= p {
        return Err(Error::ChartDomain {
            sector: m,
            theta: f64::NAN,
        });
    }
    if !c.x.is_finite() || !c.y.is_finite() || c.y < 0.0 {
        return Err(Error::CoverDomain { x: c.x, y: c.y });
    }
    let y = if c.y == 0.0 { 0.0 } else { c.y };
    let rho = c.norm();
    let alpha = if rho == 0.0 { 0.0 } else { y.atan2(c.x) };
    ProngPoint::new(p, rho.powf(2.0 / p as f64), m as f64 * PI + alpha)
}

/// Cover point of `pt` in its own sector (no domain check needed).
fn cover_point(pt: &ProngPoint, m: u32) -> CartesianPoint {
    let alpha = (pt.theta - m as f64 * PI).clamp(0.0, PI);
    CartesianPoint::from_polar(pt.r.powf(pt.p as f64 / 2.0), alpha)
}

fn check_p(pt: &ProngPoint, params: &ModelParams) -> Result<()> {
    if pt.p != params.p {
        return Err(Error::ProngMismatch {
            expected: params.p,
            found: pt.p,
        });
    }
    Ok(())
}

/// `ϕ_{pk}` or its inverse. On `r = 0` this is the boundary circle map.
pub fn phi_pk(pt: &ProngPoint, params: &ModelParams, direction: Direction) -> Result<ProngPoint> {
    phi_pk_pow(pt, params, direction.exponent())
}

/// `ϕ_{pk}^n` for any integer `n`, evaluated in closed form in the sector
/// chart: the cover point goes to `(x/2ⁿ, 2ⁿy)` and the angle gains `nkπ`.
pub fn phi_pk_pow(pt: &ProngPoint, params: &ModelParams, n: i64) -> Result<ProngPoint> {
    check_p(pt, params)?;
    if n == 0 {
        return Ok(*pt);
    }
    if n.abs() > 1000 {
        return Err(Error::Overflow);
    }
    let p = params.p as f64;
    let m = pt.sector();
    let alpha = (pt.theta - m as f64 * PI).clamp(0.0, PI);
    let scale = 2f64.powi(n as i32);
    let (cx, cy) = (alpha.cos() / scale, alpha.sin() * scale);
    let new_alpha = cy.atan2(cx);
    let rotation = ((n as i128 * params.k as i128).rem_euclid(params.p as i128)) as f64 * PI;
    let theta = m as f64 * PI + new_alpha + rotation;
    let r = if pt.r == 0.0 {
        0.0
    } else {
        let r = pt.r * cx.hypot(cy).powf(2.0 / p);
        if !r.is_finite() {
            return Err(Error::Overflow);
        }
        r
    };
    ProngPoint::new(params.p, r, theta)
}

/// Rotation `R_{k/p}`: `θ ↦ θ + kπ`.
pub fn rotate_k(pt: &ProngPoint, k: u32) -> ProngPoint {
    pt.rotate(k as f64 * PI)
}

/// `π_p(z) = z^p` as a point of the `w`-plane.
pub fn pi_p(pt: &ProngPoint) -> CartesianPoint {
    CartesianPoint::from_polar(pt.r.powi(pt.p as i32), 2.0 * pt.theta)
}

/// Leaf projections of a plane point onto the prongs of its quadrant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeafProjection {
    /// Point of the stable prong on the same unstable leaf.
    pub pi_s: ProngPoint,
    /// Point of the unstable prong on the same stable leaf.
    pub pi_u: ProngPoint,
    pub quadrant: QuadrantIndex,
    pub prong: Option<ProngId>,
}

pub fn project_stable_unstable(pt: &ProngPoint) -> Result<LeafProjection> {
    if pt.is_boundary() {
        return Err(Error::BoundaryPoint);
    }
    let (quadrant, u, v) = pt.quadrant_chart();
    let pi_s = ProngPoint::from_quadrant_chart(pt.p, quadrant.n, u, 0.0)?;
    let pi_u = ProngPoint::from_quadrant_chart(pt.p, quadrant.n, 0.0, v)?;
    // A projection landing on the origin is recorded on the bounding prong.
    let pi_s = if pi_s.is_boundary() {
        ProngPoint::boundary(pt.p, quadrant.stable_prong().angle())?
    } else {
        pi_s
    };
    let pi_u = if pi_u.is_boundary() {
        ProngPoint::boundary(pt.p, quadrant.unstable_prong().angle())?
    } else {
        pi_u
    };
    Ok(LeafProjection {
        pi_s,
        pi_u,
        quadrant,
        prong: pt.prong(),
    })
}

/// Period of a prong under `ϕ_{pk}`: `p / gcd(k, p)`.
pub fn prong_period(params: &ModelParams, _prong: ProngId) -> u32 {
    params.q()
}

/// Exact iterate in the `(u, v)` chart: `ϕ_{pk}^n` sends `(u, v)` in quadrant
/// `n₀` to `(u/2ⁿ, 2ⁿv)` in quadrant `n₀ + 2kn`.
pub fn chart_iterate(
    params: &ModelParams,
    quadrant: QuadrantIndex,
    u: f64,
    v: f64,
    n: i64,
) -> (QuadrantIndex, f64, f64) {
    let scale = 2f64.powi(n as i32);
    (quadrant.shifted(params.k, n), u / scale, v * scale)
}
