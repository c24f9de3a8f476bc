//! Homology bookkeeping on the boundary torus and the surgery arithmetic.
//!
//! The boundary torus of the blown-up model is straightened to the flat torus
//! `𝕋_{p,k} = ℝ²_{(u,t)} / ⟨(1, 0), (k/p, 1)⟩`, where `t` is the flow time and
//! `u = -θ/(pπ)` is the normalized boundary angle. Classes `(a, b)` are written in
//! the basis `μ = [(1, 0)]` (a boundary fiber circle) and `ν = [(k/p, 1)]`.
//! Boundary periodic orbits are vertical lines; those through `u ∈ (1/p)ℤ`
//! come from the stable prongs and are repelling.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plane::{gcd, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct HomologyClass {
    pub a: i64,
    pub b: i64,
}

impl HomologyClass {
    pub const fn new(a: i64, b: i64) -> Self {
        Self { a, b }
    }

    /// The fiber class `μ`.
    pub const MU: HomologyClass = HomologyClass { a: 1, b: 0 };

    pub fn is_primitive(&self) -> bool {
        gcd(self.a.unsigned_abs(), self.b.unsigned_abs()) == 1
    }

    pub fn det(&self, other: &HomologyClass) -> i64 {
        self.a * other.b - self.b * other.a
    }
}

impl std::ops::Neg for HomologyClass {
    type Output = HomologyClass;
    fn neg(self) -> HomologyClass {
        HomologyClass::new(-self.a, -self.b)
    }
}

impl From<[i64; 2]> for HomologyClass {
    fn from(v: [i64; 2]) -> Self {
        HomologyClass::new(v[0], v[1])
    }
}

impl From<HomologyClass> for [i64; 2] {
    fn from(c: HomologyClass) -> Self {
        [c.a, c.b]
    }
}

impl fmt::Display for HomologyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

impl std::str::FromStr for HomologyClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(format!("expected a,b but got {s:?}"));
        }
        let parse = |x: &str| x.parse::<i64>().map_err(|e| format!("{x:?}: {e}"));
        Ok(HomologyClass::new(parse(parts[0])?, parse(parts[1])?))
    }
}

/// Class of a boundary periodic orbit: `(-k/g, q)`.
pub fn sigma0(params: &ModelParams) -> HomologyClass {
    let g = params.g() as i64;
    HomologyClass::new(-(params.k() as i64) / g, params.q() as i64)
}

fn inadmissibility(sigma: &HomologyClass, params: &ModelParams) -> Option<&'static str> {
    if !sigma.is_primitive() {
        return Some("class is not primitive");
    }
    let s0 = sigma0(params);
    if *sigma == s0 || *sigma == -s0 {
        return Some("class is the boundary orbit class up to sign");
    }
    None
}

pub fn admissible(sigma: &HomologyClass, params: &ModelParams) -> bool {
    inadmissibility(sigma, params).is_none()
}

fn require_admissible(sigma: &HomologyClass, params: &ModelParams) -> Result<()> {
    match inadmissibility(sigma, params) {
        None => Ok(()),
        Some(reason) => Err(Error::Inadmissible {
            sigma: *sigma,
            p: params.p(),
            k: params.k(),
            reason,
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurgeryVerdict {
    pub p: u32,
    pub k: u32,
    pub sigma: HomologyClass,
    pub sigma0: HomologyClass,
    #[serde(rename = "K")]
    pub k_count: u64,
    pub g: u32,
    pub p_new: u64,
    pub expansive: bool,
}

pub fn surgery_verdict(sigma: &HomologyClass, params: &ModelParams) -> Result<SurgeryVerdict> {
    require_admissible(sigma, params)?;
    let g = params.g();
    let s0 = sigma0(params);
    let k_count = sigma.det(&s0).unsigned_abs();
    let p_new = (sigma.a * params.p() as i64 + sigma.b * params.k() as i64).unsigned_abs();
    debug_assert_eq!(p_new, k_count * g as u64);
    Ok(SurgeryVerdict {
        p: params.p(),
        k: params.k(),
        sigma: *sigma,
        sigma0: s0,
        k_count,
        g,
        p_new,
        expansive: p_new != 1,
    })
}

/// A closed piecewise-linear curve on `𝕋_{p,k}`; the last vertex is the first
/// one translated by the lattice vector of the class.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafCurve {
    pub class: HomologyClass,
    pub params: ModelParams,
    pub vertices: Vec<[f64; 2]>,
}

fn lattice_vector(class: &HomologyClass, params: &ModelParams) -> [f64; 2] {
    let shear = params.k() as f64 / params.p() as f64;
    [class.a as f64 + class.b as f64 * shear, class.b as f64]
}

pub fn leaf_curve(sigma: &HomologyClass, params: &ModelParams) -> Result<LeafCurve> {
    require_admissible(sigma, params)?;
    // a + b·k/p vanishes exactly when σ is a multiple of σ₀.
    if sigma.a * params.p() as i64 + sigma.b * params.k() as i64 == 0 {
        return Err(Error::NotTransverse(*sigma));
    }
    Ok(LeafCurve::straight(*sigma, *params, [0.0, 0.0]))
}

impl LeafCurve {
    /// The straight representative starting at `base`.
    pub fn straight(class: HomologyClass, params: ModelParams, base: [f64; 2]) -> Self {
        let v = lattice_vector(&class, &params);
        Self {
            class,
            params,
            vertices: vec![base, [base[0] + v[0], base[1] + v[1]]],
        }
    }

    pub fn segments(&self) -> impl Iterator<Item = ([f64; 2], [f64; 2])> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }

    /// Total `(Δu, Δt)` along the curve.
    pub fn displacement(&self) -> [f64; 2] {
        self.segments().fold([0.0, 0.0], |acc, (x, y)| {
            [acc[0] + y[0] - x[0], acc[1] + y[1] - x[1]]
        })
    }

    /// Class read off the integrated displacement, if it is a lattice vector.
    pub fn recovered_class(&self) -> Option<HomologyClass> {
        let [du, dt] = self.displacement();
        let b = dt.round();
        let a = du - b * self.params.k() as f64 / self.params.p() as f64;
        let a_int = a.round();
        ((dt - b).abs() < 1e-9 && (a - a_int).abs() < 1e-9)
            .then(|| HomologyClass::new(a_int as i64, b as i64))
    }

    pub fn is_nowhere_vertical(&self) -> bool {
        self.segments().all(|(x, y)| {
            let du = (y[0] - x[0]).abs();
            let len = (y[0] - x[0]).hypot(y[1] - x[1]);
            len > 0.0 && du > 1e-12 * len
        })
    }

    /// No two segments meet on the torus except consecutive ones at their
    /// shared vertex (including the closing identification).
    pub fn is_simple(&self) -> bool {
        let segs: Vec<_> = self.segments().collect();
        let n = segs.len();
        let closing = lattice_vector(&self.class, &self.params);
        let shear = self.params.k() as f64 / self.params.p() as f64;
        let (umin, umax, tmin, tmax) = bounding_box(&self.vertices);
        let jr = (tmax - tmin).ceil() as i64 + 1;
        for j in -jr..=jr {
            let ir = (umax - umin + (j as f64 * shear).abs()).ceil() as i64 + 1;
            for i in -ir..=ir {
                let shift = [i as f64 + j as f64 * shear, j as f64];
                let trivial = i == 0 && j == 0;
                let forward = close(shift, closing);
                let backward = close(shift, [-closing[0], -closing[1]]);
                for (x, sx) in segs.iter().enumerate() {
                    for (y, sy) in segs.iter().enumerate() {
                        if trivial && x == y {
                            continue;
                        }
                        let moved = (add(sy.0, shift), add(sy.1, shift));
                        let adjacent = (trivial && (x + 1 == y || y + 1 == x))
                            || (forward && x == n - 1 && y == 0)
                            || (backward && x == 0 && y == n - 1);
                        if segments_meet(*sx, moved, adjacent) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

fn add(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] + b[0], a[1] + b[1]]
}

fn close(a: [f64; 2], b: [f64; 2]) -> bool {
    (a[0] - b[0]).abs() < 1e-9 && (a[1] - b[1]).abs() < 1e-9
}

fn bounding_box(v: &[[f64; 2]]) -> (f64, f64, f64, f64) {
    v.iter().fold(
        (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        ),
        |(a, b, c, d), x| (a.min(x[0]), b.max(x[0]), c.min(x[1]), d.max(x[1])),
    )
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Whether two closed segments intersect. When `adjacent`, a single shared
/// endpoint is allowed.
fn segments_meet(s: ([f64; 2], [f64; 2]), t: ([f64; 2], [f64; 2]), adjacent: bool) -> bool {
    let eps = 1e-12;
    let d1 = cross(t.0, t.1, s.0);
    let d2 = cross(t.0, t.1, s.1);
    let d3 = cross(s.0, s.1, t.0);
    let d4 = cross(s.0, s.1, t.1);
    if d1.abs() <= eps && d2.abs() <= eps {
        // Collinear: overlap of the projections onto the segment direction.
        let dir = [s.1[0] - s.0[0], s.1[1] - s.0[1]];
        let len2 = dir[0] * dir[0] + dir[1] * dir[1];
        let proj = |p: [f64; 2]| ((p[0] - s.0[0]) * dir[0] + (p[1] - s.0[1]) * dir[1]) / len2;
        let (a, b) = (proj(t.0), proj(t.1));
        let (lo, hi) = (a.min(b), a.max(b));
        let overlap = hi.min(1.0) - lo.max(0.0);
        return if adjacent {
            overlap > 1e-9
        } else {
            overlap >= -1e-12
        };
    }
    let straddle = (d1 > eps && d2 < -eps || d1 < -eps && d2 > eps)
        && (d3 > eps && d4 < -eps || d3 < -eps && d4 > eps);
    if straddle {
        return true;
    }
    if adjacent {
        return false;
    }
    let on = |p: [f64; 2], seg: ([f64; 2], [f64; 2]), d: f64| {
        d.abs() <= eps
            && p[0] >= seg.0[0].min(seg.1[0]) - eps
            && p[0] <= seg.0[0].max(seg.1[0]) + eps
            && p[1] >= seg.0[1].min(seg.1[1]) - eps
            && p[1] <= seg.0[1].max(seg.1[1]) + eps
    };
    on(s.0, t, d1) || on(s.1, t, d2) || on(t.0, s, d3) || on(t.1, s, d4)
}

const LEAF_BASE: [f64; 2] = [0.271_828_182_8, 0.141_421_356_2];
const ORBIT_BASE: [f64; 2] = [0.577_215_664_9, 0.323_606_797_7];

/// Geometric count of intersections between a leaf of class `σ` and one
/// vertical boundary periodic orbit, over all lattice translates.
pub fn brute_force_k(sigma: &HomologyClass, params: &ModelParams) -> Result<u64> {
    let leaf = LeafCurve::straight(*sigma, *params, LEAF_BASE);
    leaf_curve(sigma, params)?;
    let q = params.q() as f64;
    let shear = params.k() as f64 / params.p() as f64;
    let (umin, umax, tmin, tmax) = bounding_box(&leaf.vertices);
    let mut count = 0u64;
    let j_lo = (tmin - ORBIT_BASE[1] - q).floor() as i64 - 1;
    let j_hi = (tmax - ORBIT_BASE[1]).ceil() as i64 + 1;
    for j in j_lo..=j_hi {
        let t_lo = ORBIT_BASE[1] + j as f64;
        let t_hi = t_lo + q;
        let u_shift = ORBIT_BASE[0] + j as f64 * shear;
        let i_lo = (umin - u_shift).floor() as i64 - 1;
        let i_hi = (umax - u_shift).ceil() as i64 + 1;
        for i in i_lo..=i_hi {
            let u_line = u_shift + i as f64;
            for (x, y) in leaf.segments() {
                let du = y[0] - x[0];
                if du == 0.0 {
                    continue;
                }
                let lambda = (u_line - x[0]) / du;
                if !(0.0..1.0).contains(&lambda) {
                    continue;
                }
                let t = x[1] + lambda * (y[1] - x[1]);
                if t >= t_lo && t < t_hi {
                    count += 1;
                }
            }
        }
    }
    Ok(count)
}

/// A stable-prong marker on the surgery leaf.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Marker {
    /// Leaf parameter in `[0, 1)`.
    pub lambda: f64,
    /// Flat-model `u` coordinate, a multiple of `1/p`.
    pub u: f64,
    /// Index of the marker reached by the first return of the boundary flow.
    pub successor: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurgeredModel {
    pub p_new: u32,
    /// Rotation of the surgered model, when requested. It is a model-level
    /// estimate from the marker shift and is flagged as such.
    pub k_estimate: Option<u32>,
    pub estimated: bool,
    /// Number of distinct repelling boundary orbits met by the leaf.
    pub repelling_orbits_met: u32,
    pub markers: Vec<Marker>,
}

impl SurgeredModel {
    /// The surgered model, with rotation 0 if none was estimated.
    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.p_new, self.k_estimate.unwrap_or(0))
    }
}

/// Extended Euclid: `(x, y)` with `a·x + b·y = gcd(a, b)`.
fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a.signum() * a, a.signum(), 0)
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - (a.div_euclid(b)) * y)
    }
}

pub fn surgered_local_model(
    sigma: &HomologyClass,
    params: &ModelParams,
    estimate_rotation: bool,
) -> Result<SurgeredModel> {
    let verdict = surgery_verdict(sigma, params)?;
    if verdict.p_new == 1 {
        return Err(Error::OneProng { sigma: *sigma });
    }
    let p = params.p() as f64;
    let shear = params.k() as f64 / p;
    // Orient the leaf so that u increases.
    let oriented = if (sigma.a as f64 + sigma.b as f64 * shear) < 0.0 {
        -*sigma
    } else {
        *sigma
    };
    let (big_a, big_b) = (oriented.a, oriented.b);
    let du = big_a as f64 + big_b as f64 * shear;
    let base_u = 0.37 / p;

    // Markers: leaf points with u ∈ (1/p)ℤ, in order of the leaf parameter.
    let p_new = verdict.p_new as usize;
    let first = (base_u * p).ceil() as i64;
    let mut markers: Vec<Marker> = (0..p_new as i64)
        .map(|j| {
            let u = (first + j) as f64 / p;
            Marker {
                lambda: (u - base_u) / du,
                u,
                successor: 0,
            }
        })
        .collect();

    // Lattice coordinates relative to the leaf: (c, d) completes (A, B) to a
    // basis, so λ = dα - cβ is the leaf parameter of a point on the leaf.
    let (g, x, y) = ext_gcd(big_a, big_b);
    debug_assert_eq!(g, 1);
    let (c, d) = (-y, x);
    let ret = 1.0 / du;
    let lambdas: Vec<f64> = markers.iter().map(|m| m.lambda).collect();
    let mut shifts = Vec::with_capacity(p_new);
    for (idx, m) in markers.iter_mut().enumerate() {
        let t = m.lambda * big_b as f64 + ret;
        let alpha = (m.u - base_u) - t * shear;
        let beta = t;
        let lambda = (d as f64 * alpha - c as f64 * beta).rem_euclid(1.0);
        let succ = lambdas
            .iter()
            .enumerate()
            .min_by(|(_, l1), (_, l2)| {
                circle_gap(**l1, lambda).total_cmp(&circle_gap(**l2, lambda))
            })
            .map(|(i, _)| i)
            .unwrap_or(0);
        m.successor = succ;
        shifts.push((succ + p_new - idx) % p_new);
    }
    let shift = shifts[0];
    debug_assert!(shifts.iter().all(|s| *s == shift));
    let cycles = gcd(p_new as u64, shift as u64) as u32;
    let k_estimate = estimate_rotation.then(|| ((p_new - shift) % p_new) as u32);
    Ok(SurgeredModel {
        p_new: verdict.p_new as u32,
        k_estimate,
        estimated: estimate_rotation,
        repelling_orbits_met: cycles,
        markers,
    })
}

fn circle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseSurgery {
    pub sigma_back: HomologyClass,
    pub surgered: ModelParams,
    pub verdict: SurgeryVerdict,
}

pub const DEFAULT_SEARCH_BOUND: i64 = 50;

/// Search for a class on the surgered model whose surgery restores the
/// original prong count. Candidates are tried in order of
/// `(|a'| + |b'|, a', b')`.
pub fn inverse_surgery_search(
    sigma: &HomologyClass,
    params: &ModelParams,
    bound: i64,
) -> Result<Option<InverseSurgery>> {
    let verdict = surgery_verdict(sigma, params)?;
    if !verdict.expansive {
        return Err(Error::NotExpansive);
    }
    let surgered = surgered_local_model(sigma, params, true)?.params()?;
    let mut candidates: Vec<HomologyClass> = (-bound..=bound)
        .flat_map(|a| (-bound..=bound).map(move |b| HomologyClass::new(a, b)))
        .collect();
    candidates.sort_by_key(|c| (c.a.abs() + c.b.abs(), c.a, c.b));
    for cand in candidates {
        if !admissible(&cand, &surgered) {
            continue;
        }
        let back = surgery_verdict(&cand, &surgered)?;
        if back.p_new == params.p() as u64 {
            return Ok(Some(InverseSurgery {
                sigma_back: cand,
                surgered,
                verdict: back,
            }));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanRow {
    pub a: i64,
    pub b: i64,
    #[serde(rename = "K")]
    pub k_count: u64,
    pub p_new: u64,
    pub expansive: bool,
}

/// Verdicts for every admissible class with `|a|, |b| ≤ bound`, sorted by `(a, b)`.
pub fn scan_box(params: &ModelParams, bound: i64) -> Vec<ScanRow> {
    let mut rows = Vec::new();
    for a in -bound..=bound {
        for b in -bound..=bound {
            let sigma = HomologyClass::new(a, b);
            if let Ok(v) = surgery_verdict(&sigma, params) {
                rows.push(ScanRow {
                    a,
                    b,
                    k_count: v.k_count,
                    p_new: v.p_new,
                    expansive: v.expansive,
                });
            }
        }
    }
    rows
}
