//! Closeness of orbit segments inside a standard polygon, measured before and
//! after the blow-up.
//!
//! For `x ∈ V_c` the supremum is taken over the exit window of `x`. The
//! blown-down metric is the euclidean torus distance and the blown-up metric
//! the polar one, so the estimate tabulates
//! `sup_t d_pol(Φ^t x, Φ^{h(t)} y)` among pairs with `sup_t d_eucl < ε`.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;

use super::chart::{exit_indices, fiber_partners, torus_distances, ChartOrbit, ChartPoint};
use super::reparam::Reparam;
use super::{
    decreases_overall, is_monotone, log_uniform, pair_rng, random_sign, tabulate, EstimateReport,
    PairKind, PairOutcome, SampleConfig,
};
use crate::error::Result;
use crate::plane::ModelParams;
use crate::suspension::StandardPolygonSpec;

/// Time grid resolution inside the exit window.
pub const GRID_STEPS_PER_UNIT: i64 = 64;

/// Per-pair measurements over the exit window of `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowComparison {
    pub sup_eucl: f64,
    pub sup_pol: f64,
    /// Quadrants agree at every integer fiber time strictly inside the window.
    pub quadrants_agree: bool,
    /// Ratio of the stable-prong projection radii at time 0, when both points
    /// share a quadrant.
    pub projection_ratio: Option<f64>,
}

/// Compare `Φ^t(x)` with `Φ^{h(t)}(y)` over the exit window of `x`.
pub fn compare_over_window(
    x: &ChartOrbit,
    y: &ChartOrbit,
    h: &Reparam,
    c: f64,
) -> WindowComparison {
    let (back, fwd) = exit_indices(&x.base, c);
    let (n_minus, n_plus) = (back.unwrap_or(-1), fwd.unwrap_or(1));
    let t_minus = n_minus as f64 - x.s;
    let steps = (n_plus - n_minus) * GRID_STEPS_PER_UNIT;
    let mut out = WindowComparison {
        sup_eucl: 0.0,
        sup_pol: 0.0,
        quadrants_agree: true,
        projection_ratio: None,
    };
    for k in 0..=steps {
        let t = t_minus + k as f64 / GRID_STEPS_PER_UNIT as f64;
        let ty = h.eval(t);
        let (e, pol) = torus_distances(x, t, y, ty);
        out.sup_eucl = out.sup_eucl.max(e);
        out.sup_pol = out.sup_pol.max(pol);
        if k % GRID_STEPS_PER_UNIT == 0 && k > 0 && k < steps {
            let (px, py) = fiber_partners(x, t, y, ty);
            out.quadrants_agree &= px.quadrant() == py.quadrant();
        }
    }
    let (px, py) = fiber_partners(x, 0.0, y, h.eval(0.0));
    if px.quadrant() == py.quadrant() {
        let (a, b) = (px.stable_projection_radius(), py.stable_projection_radius());
        out.projection_ratio = Some(a.max(b) / a.min(b));
    }
    out
}

fn sample_base<R: Rng>(rng: &mut R, p: u32, cfg: &SampleConfig) -> ChartPoint {
    let c = cfg.c;
    loop {
        let n = rng.gen_range(0..2 * p);
        let u = log_uniform(rng, c / 1024.0, c);
        let v = log_uniform(rng, c / 1024.0, c);
        if u.max(v) >= cfg.u_prime_frac * c {
            return ChartPoint::new(p, n, u, v);
        }
    }
}

fn perturb<R: Rng>(rng: &mut R, x: &ChartPoint, p: u32, lo: f64, hi: f64) -> ChartPoint {
    let delta = log_uniform(rng, lo, hi);
    ChartPoint::new(
        p,
        x.quadrant(),
        x.u() * (1.0 + delta * rng.gen_range(-1.0..=1.0)),
        x.v() * (1.0 + delta * rng.gen_range(-1.0..=1.0)),
    )
}

struct WindowPair {
    outcome: PairOutcome,
    cmp: WindowComparison,
}

fn sample_pair(params: &ModelParams, cfg: &SampleConfig, pair: usize) -> Result<WindowPair> {
    let p = params.p();
    let mut rng = pair_rng(cfg.seed, pair);
    let base = sample_base(&mut rng, p, cfg);
    let s = rng.gen_range(0.0..1.0);
    let x = ChartOrbit::new(*params, base, s)?;
    let (kind, y, h) = match pair % 4 {
        0 => {
            let y = perturb(&mut rng, &base, p, 1e-8, 1.0);
            (
                PairKind::Perturbed,
                ChartOrbit::new(*params, y, s)?,
                Reparam::Identity,
            )
        }
        1 => {
            let delta = log_uniform(&mut rng, 1e-8, 1e-1);
            let (su, sv) = if rng.gen_bool(0.5) {
                (1.0, -1.0)
            } else {
                (-1.0, 1.0)
            };
            let y = ChartPoint::new(
                p,
                base.quadrant(),
                su * base.u() * (1.0 + delta * rng.gen_range(-1.0..=1.0)),
                sv * base.v() * (1.0 + delta * rng.gen_range(-1.0..=1.0)),
            );
            (
                PairKind::Mirror,
                ChartOrbit::new(*params, y, s)?,
                Reparam::Identity,
            )
        }
        2 => {
            let tau = random_sign(&mut rng) * log_uniform(&mut rng, 1e-8, 0.25);
            (PairKind::SameOrbit, x.at(tau), Reparam::Identity)
        }
        _ => {
            let y = perturb(&mut rng, &base, p, 1e-8, 1e-1);
            let span = cfg.horizon.min(24.0);
            let h = Reparam::random_near_identity(&mut rng, span);
            (PairKind::Reparametrized, ChartOrbit::new(*params, y, s)?, h)
        }
    };
    let cmp = compare_over_window(&x, &y, &h, cfg.c);
    Ok(WindowPair {
        outcome: PairOutcome {
            pair,
            kind,
            hypothesis: cmp.sup_eucl,
            conclusion: cmp.sup_pol,
        },
        cmp,
    })
}

/// Tabulate `η''(ε)` over the configured grid.
///
/// Diagnostics: `quadrant_eps0` is the smallest blown-down supremum among
/// pairs whose quadrants disagree inside the window (so every pair below it
/// agrees), and `projection_violations` counts agreeing pairs below
/// `min(ε_max, quadrant_eps0)` whose stable projections are a full prong
/// fundamental domain apart.
pub fn estimate_window_closeness(
    params: &ModelParams,
    spec: &StandardPolygonSpec,
    cfg: &SampleConfig,
) -> Result<EstimateReport> {
    let p = params.p();
    cfg.validate(p)?;
    let mut cfg = cfg.clone();
    cfg.c = spec.c();
    let pairs: Vec<WindowPair> = (0..cfg.n_pairs)
        .into_par_iter()
        .map(|i| sample_pair(params, &cfg, i))
        .collect::<Result<_>>()?;

    let outcomes: Vec<PairOutcome> = pairs.iter().map(|l| l.outcome).collect();
    let (rows, unbounded) = tabulate(&outcomes, &cfg.eps_grid, None, 1.0);

    let eps0 = pairs
        .iter()
        .filter(|l| !l.cmp.quadrants_agree)
        .map(|l| l.cmp.sup_eucl)
        .fold(f64::INFINITY, f64::min);
    let fundamental = 2f64.powf(2.0 * params.q() as f64 / p as f64);
    let threshold = cfg.eps_grid[0].min(eps0);
    let mut projection_violations = 0usize;
    let mut max_ratio = 1.0f64;
    for l in pairs
        .iter()
        .filter(|l| l.cmp.quadrants_agree && l.cmp.sup_eucl < threshold)
    {
        match l.cmp.projection_ratio {
            Some(r) => {
                max_ratio = max_ratio.max(r);
                if r >= fundamental {
                    projection_violations += 1;
                }
            }
            None => projection_violations += 1,
        }
    }
    let finest = *cfg.eps_grid.last().unwrap_or(&0.0);
    let floor = cfg.eps_grid[0];
    let below_floor = rows
        .last()
        .and_then(|r| r.eta_hat)
        .is_some_and(|e| e < floor);
    let monotone = is_monotone(&rows);
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("quadrant_eps0".to_string(), eps0);
    diagnostics.insert(
        "projection_violations".to_string(),
        projection_violations as f64,
    );
    diagnostics.insert("projection_ratio_max".to_string(), max_ratio);
    diagnostics.insert("fundamental_domain_ratio".to_string(), fundamental);
    diagnostics.insert("grid_floor".to_string(), floor);
    let pass = monotone
        && unbounded == 0
        && decreases_overall(&rows)
        && below_floor
        && eps0 > finest
        && projection_violations == 0;
    Ok(EstimateReport {
        name: "window-closeness-blow-up".into(),
        rows,
        monotone,
        unbounded_witnesses: unbounded,
        pass,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p: u32, k: u32) -> ModelParams {
        ModelParams::new(p, k).unwrap()
    }

    #[test]
    fn same_orbit_pair_is_close_both_ways() {
        let m = params(2, 0);
        let x = ChartOrbit::new(m, ChartPoint::new(2, 0, 0.5, 0.01), 0.3).unwrap();
        let y = x.at(0.01);
        let cmp = compare_over_window(&x, &y, &Reparam::Identity, 1.0);
        assert!(cmp.sup_eucl < 0.05, "{cmp:?}");
        assert!(cmp.sup_pol < 0.05, "{cmp:?}");
        assert!(cmp.quadrants_agree);
    }

    #[test]
    fn mirror_pair_is_filtered_and_disagrees() {
        let m = params(2, 0);
        let x = ChartOrbit::new(m, ChartPoint::new(2, 0, 0.5, 0.01), 0.0).unwrap();
        let y = ChartOrbit::new(m, ChartPoint::new(2, 0, 0.5, -0.01), 0.0).unwrap();
        let cmp = compare_over_window(&x, &y, &Reparam::Identity, 1.0);
        assert!(!cmp.quadrants_agree);
        assert!(cmp.sup_eucl > 0.5, "{cmp:?}");
    }

    #[test]
    fn shadowing_pair_passes() {
        let m = params(2, 0);
        let x = ChartOrbit::new(m, ChartPoint::new(2, 0, 0.5, 0.01), 0.0).unwrap();
        let y = ChartOrbit::new(m, ChartPoint::new(2, 0, 0.5 + 1e-4, 0.01 + 1e-6), 0.0).unwrap();
        let cmp = compare_over_window(&x, &y, &Reparam::Identity, 1.0);
        assert!(cmp.quadrants_agree);
        assert!(cmp.sup_eucl < 1e-3, "{cmp:?}");
        assert!(cmp.sup_pol < 1e-2, "{cmp:?}");
        assert!(cmp.projection_ratio.unwrap() < 2.0);
    }
}
