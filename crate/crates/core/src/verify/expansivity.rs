//! Expansivity of the local models: separation of nearby orbits for `p ≥ 2`
//! and explicit non-expansivity witnesses on the 1-prong model.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::chart::{plane_distances, torus_distances, ChartOrbit, ChartPoint};
use super::reparam::Reparam;
use super::{log_uniform, pair_rng, random_sign, PairKind, SampleConfig};
use crate::error::{Error, Result};
use crate::plane::{phi1, phi2, CartesianPoint, Direction, ModelParams};

/// Time step of the separation grid.
pub const SEPARATION_STEP: f64 = 0.125;

/// Time horizon per prong used by the separation estimate. Distances between
/// nearby orbits grow like `2^{2|t|/p}`, so the horizon scales with `p`.
pub const SEPARATION_HORIZON_PER_PRONG: f64 = 30.0;

/// Horizon of the separation estimate for a model: the configured horizon,
/// extended to `30·p` when shorter.
pub fn separation_horizon(p: u32, cfg: &SampleConfig) -> f64 {
    cfg.horizon.max(SEPARATION_HORIZON_PER_PRONG * p as f64)
}

/// Two orbits of the 1-prong suspension that stay uniformly close.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneProngWitness {
    pub x0: f64,
    pub delta: f64,
    pub horizon: u32,
    /// `π₂(x0, δ)` and `π₂(x0, −δ)`.
    pub w: CartesianPoint,
    pub w_prime: CartesianPoint,
    /// `4·x0·δ`.
    pub expected_gap: f64,
    pub gap_min: f64,
    pub gap_max: f64,
    /// Largest relative deviation of the `w`-plane gap from `4·x0·δ`.
    pub max_relative_deviation: f64,
    /// Largest relative disagreement between one application of `ϕ₁` and the
    /// tracked iterate.
    pub map_consistency: f64,
    /// Range of the cone distance in `(r, θ)₁` coordinates along the orbits.
    pub cone_gap_min: f64,
    pub cone_gap_max: f64,
    /// Supremum of the torus distance over `|t| ≤ horizon` with `h = id`.
    pub torus_sup: f64,
    pub distinct_orbits: bool,
    pub certified: bool,
}

fn square(z: CartesianPoint) -> CartesianPoint {
    CartesianPoint::new(z.x * z.x - z.y * z.y, 2.0 * z.x * z.y)
}

fn phi2_pow(z: CartesianPoint, n: i64) -> CartesianPoint {
    let s = 2f64.powi(n as i32);
    CartesianPoint::new(z.x / s, z.y * s)
}

/// Build and check the witness pair on `|n| ≤ horizon`. A zero `delta` gives
/// a degenerate, uncertified record.
pub fn one_prong_witness(x0: f64, delta: f64, horizon: u32) -> Result<OneProngWitness> {
    if !(x0.is_finite() && x0 > 0.0 && delta.is_finite() && delta >= 0.0) {
        return Err(Error::InvalidCoordinate(format!(
            "witness needs x0 > 0 and delta >= 0, got ({x0}, {delta})"
        )));
    }
    if horizon > 500 {
        return Err(Error::Overflow);
    }
    let params = ModelParams::new(1, 0)?;
    let zeta = CartesianPoint::new(x0, delta);
    let zeta_prime = CartesianPoint::new(x0, -delta);
    let expected = 4.0 * x0 * delta;
    let h = horizon as i64;

    let (mut gap_min, mut gap_max, mut deviation, mut consistency) =
        (f64::INFINITY, 0.0f64, 0.0f64, 0.0f64);
    let (mut cone_min, mut cone_max) = (f64::INFINITY, 0.0f64);
    let a = ChartPoint::new(1, 0, x0, delta);
    let b = ChartPoint::new(1, 0, x0, -delta);
    for n in -h..=h {
        let (z, z2) = (phi2_pow(zeta, n), phi2_pow(zeta_prime, n));
        let (w, w2) = (square(z), square(z2));
        let gap = w.dist(&w2);
        gap_min = gap_min.min(gap);
        gap_max = gap_max.max(gap);
        if expected > 0.0 {
            deviation = deviation.max((gap - expected).abs() / expected);
        }
        if n < h {
            let next = square(phi2(z, Direction::Forward));
            let mapped = phi1(w, Direction::Forward);
            consistency = consistency.max(mapped.dist(&next) / next.norm().max(f64::MIN_POSITIVE));
        }
        let (cone, _) = plane_distances(&a.iterate(&params, n), &b.iterate(&params, n));
        cone_min = cone_min.min(cone);
        cone_max = cone_max.max(cone);
    }

    let x = ChartOrbit::new(params, a, 0.0)?;
    let y = ChartOrbit::new(params, b, 0.0)?;
    let steps = (horizon as f64 / SEPARATION_STEP) as i64;
    let mut torus_sup = 0.0f64;
    for k in -steps..=steps {
        let t = k as f64 * SEPARATION_STEP;
        torus_sup = torus_sup.max(torus_distances(&x, t, &y, t).0);
    }

    // The lifts ±ζ′ lie in quadrants never reached from the quadrant of ζ.
    let distinct_orbits = delta > 0.0 && a.quadrant() != b.quadrant();
    let certified =
        distinct_orbits && deviation <= 1e-12 && consistency <= 1e-12 && torus_sup <= expected;
    Ok(OneProngWitness {
        x0,
        delta,
        horizon,
        w: square(zeta),
        w_prime: square(zeta_prime),
        expected_gap: expected,
        gap_min,
        gap_max,
        max_relative_deviation: deviation,
        map_consistency: consistency,
        cone_gap_min: cone_min,
        cone_gap_max: cone_max,
        torus_sup,
        distinct_orbits,
        certified,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingWitness {
    pub pair: usize,
    pub kind: PairKind,
    /// Smallest supremum distance over the reparametrization family.
    pub tracking: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub horizon: f64,
    /// Candidate expansivity constants, decreasing.
    pub levels: Vec<f64>,
    /// Distinct-orbit pairs staying closer than each level.
    pub violations: Vec<usize>,
    /// Smallest tracking distance among distinct-orbit pairs.
    pub eps_star: f64,
    pub orbit_pairs_excluded: usize,
    pub pairs_tested: usize,
    pub witnesses: Vec<TrackingWitness>,
    /// No level is violated.
    pub pass: bool,
    /// Every level is violated.
    pub defeated: bool,
}

/// Exact orbit-pair detection: some integer iterate of the base of `x`
/// equals the base of `y`.
fn same_orbit(x: &ChartOrbit, y: &ChartOrbit, reach: i64) -> bool {
    (-reach..=reach).any(|m| x.plane(m) == y.base)
}

/// Time grid ordered outward from 0.
fn outward_times(horizon: f64) -> Vec<f64> {
    let steps = (horizon / SEPARATION_STEP) as i64;
    let mut out = vec![0.0];
    for k in 1..=steps {
        let t = k as f64 * SEPARATION_STEP;
        out.push(t);
        out.push(-t);
    }
    out
}

fn reparam_family<R: Rng>(rng: &mut R, horizon: f64) -> Vec<Reparam> {
    vec![
        Reparam::Identity,
        Reparam::Shift(SEPARATION_STEP),
        Reparam::Shift(-SEPARATION_STEP),
        Reparam::random_piecewise(rng, horizon, 0.05),
        Reparam::random_piecewise(rng, horizon, 0.5),
    ]
}

/// Minimum over the family of `sup_t d_eucl(Φ^t x, Φ^{h(t)} y)`, stopping
/// each supremum once it can no longer improve the minimum.
fn tracking_distance(x: &ChartOrbit, y: &ChartOrbit, family: &[Reparam], times: &[f64]) -> f64 {
    let mut best = 1.0f64;
    for h in family {
        let mut sup = 0.0f64;
        for &t in times {
            sup = sup.max(torus_distances(x, t, y, h.eval(t)).0);
            if sup >= best {
                break;
            }
        }
        best = best.min(sup);
    }
    best
}

struct SeparationPair {
    kind: PairKind,
    orbit_pair: bool,
    tracking: f64,
}

fn sample_pair(
    params: &ModelParams,
    cfg: &SampleConfig,
    horizon: f64,
    times: &[f64],
    pair: usize,
) -> Result<SeparationPair> {
    let p = params.p();
    let c = cfg.c;
    let mut rng = pair_rng(cfg.seed, pair);
    let n = rng.gen_range(0..2 * p);
    let s = rng.gen_range(0.0..1.0);
    let u = log_uniform(&mut rng, c / 1024.0, c);
    let (kind, x, y) = match pair % 3 {
        0 => {
            let v = log_uniform(&mut rng, c / 1024.0, c);
            let x = ChartPoint::new(p, n, u, v);
            let d = log_uniform(&mut rng, 1e-9, 1e-1) * c;
            let y = ChartPoint::new(
                p,
                n,
                u + d * rng.gen_range(-1.0..=1.0),
                v + d * rng.gen_range(-1.0..=1.0),
            );
            let ds = d * random_sign(&mut rng);
            (
                PairKind::Perturbed,
                ChartOrbit::new(*params, x, s)?,
                ChartOrbit::new(*params, y, s + ds)?,
            )
        }
        1 => {
            let v = log_uniform(&mut rng, 1e-9, 1e-1) * c;
            (
                PairKind::Mirror,
                ChartOrbit::new(*params, ChartPoint::new(p, n, u, v), s)?,
                ChartOrbit::new(*params, ChartPoint::new(p, n, u, -v), s)?,
            )
        }
        _ => {
            let v = log_uniform(&mut rng, c / 1024.0, c);
            let x = ChartOrbit::new(*params, ChartPoint::new(p, n, u, v), s)?;
            let tau = rng.gen_range(-2.0..=2.0);
            (PairKind::SameOrbit, x, x.at(tau))
        }
    };
    let reach = horizon.ceil() as i64 + 3;
    if same_orbit(&x, &y, reach) {
        return Ok(SeparationPair {
            kind,
            orbit_pair: true,
            tracking: f64::NAN,
        });
    }
    let family = reparam_family(&mut rng, horizon);
    Ok(SeparationPair {
        kind,
        orbit_pair: false,
        tracking: tracking_distance(&x, &y, &family, times),
    })
}

/// Estimate the expansivity constant over `V_c`: the smallest supremum
/// distance over `|t| ≤ T` achieved by a pair of distinct orbits, minimized
/// over a family of increasing reparametrizations. `T` is
/// [`separation_horizon`].
pub fn separation_estimate(params: &ModelParams, cfg: &SampleConfig) -> Result<SeparationReport> {
    cfg.validate(params.p())?;
    let horizon = separation_horizon(params.p(), cfg);
    let times = outward_times(horizon);
    let pairs: Vec<SeparationPair> = (0..cfg.n_pairs)
        .into_par_iter()
        .map(|i| sample_pair(params, cfg, horizon, &times, i))
        .collect::<Result<_>>()?;

    let mut violations = vec![0usize; cfg.eps_grid.len()];
    let mut eps_star = f64::INFINITY;
    let mut excluded = 0;
    let mut witnesses = Vec::new();
    for (i, pair) in pairs.iter().enumerate() {
        if pair.orbit_pair {
            excluded += 1;
            continue;
        }
        eps_star = eps_star.min(pair.tracking);
        for (slot, &level) in cfg.eps_grid.iter().enumerate() {
            if pair.tracking < level {
                violations[slot] += 1;
            }
        }
        if pair.tracking < cfg.eps_grid[0] && witnesses.len() < 10 {
            witnesses.push(TrackingWitness {
                pair: i,
                kind: pair.kind,
                tracking: pair.tracking,
            });
        }
    }
    let tested = pairs.len() - excluded;
    Ok(SeparationReport {
        horizon,
        levels: cfg.eps_grid.clone(),
        pass: tested > 0 && violations.iter().all(|v| *v == 0),
        defeated: violations.iter().all(|v| *v > 0),
        violations,
        eps_star,
        orbit_pairs_excluded: excluded,
        pairs_tested: tested,
        witnesses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn witness_gap_is_constant() {
        for (x0, delta) in [(0.1, 0.01), (1.0, 1e-6)] {
            let w = one_prong_witness(x0, delta, 60).unwrap();
            assert!(w.certified, "{w:?}");
            assert!(w.max_relative_deviation <= 1e-12);
            assert!((w.expected_gap - 4.0 * x0 * delta).abs() < 1e-18);
            assert!(w.cone_gap_min >= 2.0 * x0 * delta * (1.0 - 1e-9));
            assert!(w.cone_gap_max <= 2.0 * 2f64.sqrt() * x0 * delta * (1.0 + 1e-9));
        }
    }

    #[test]
    fn zero_delta_is_not_a_witness() {
        let w = one_prong_witness(0.1, 0.0, 10).unwrap();
        assert_eq!(w.w, w.w_prime);
        assert!(!w.certified);
        assert!(one_prong_witness(-1.0, 0.1, 10).is_err());
    }

    #[test]
    fn orbit_pairs_are_detected() {
        let params = ModelParams::new(3, 1).unwrap();
        let x = ChartOrbit::new(params, ChartPoint::new(3, 1, 0.3, 0.2), 0.7).unwrap();
        assert!(same_orbit(&x, &x.at(1.6), 5));
        assert!(same_orbit(&x, &x.at(-0.2), 5));
        let y = ChartOrbit::new(params, ChartPoint::new(3, 1, 0.3, 0.2001), 0.7).unwrap();
        assert!(!same_orbit(&x, &y, 5));
    }

    #[test]
    fn two_prong_model_separates_and_one_prong_does_not() {
        let mut cfg = SampleConfig::for_model(2);
        cfg.n_pairs = 150;
        let r = separation_estimate(&ModelParams::new(2, 0).unwrap(), &cfg).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.orbit_pairs_excluded > 0);
        let cfg = SampleConfig {
            n_pairs: 150,
            ..SampleConfig::for_model(1)
        };
        let r = separation_estimate(&ModelParams::new(1, 0).unwrap(), &cfg).unwrap();
        assert!(r.defeated, "{r:?}");
    }
}
