//! Asymptotic convergence of points on a common stable or unstable leaf.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::chart::{torus_distances, ChartOrbit, ChartPoint};
use super::{log_uniform, pair_rng, SampleConfig};
use crate::error::Result;
use crate::plane::ModelParams;

pub const CONVERGENCE_TOLERANCES: [f64; 3] = [1e-2, 1e-4, 1e-6];

const STEPS_PER_UNIT: i64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafKind {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafPairFailure {
    pub pair: usize,
    pub leaf: LeafKind,
    pub tolerance: f64,
    pub final_eucl: f64,
    pub final_pol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub pairs: usize,
    pub horizon: f64,
    pub tolerances: Vec<f64>,
    /// Pairs not below each tolerance at the end of the horizon, per metric.
    pub failures_eucl: Vec<usize>,
    pub failures_pol: Vec<usize>,
    /// Fraction of pairs whose distance is nonincreasing on the time grid.
    pub monotone_fraction_eucl: f64,
    pub monotone_fraction_pol: f64,
    pub witnesses: Vec<LeafPairFailure>,
    pub pass: bool,
}

struct LeafPair {
    leaf: LeafKind,
    /// Distances along the grid, ordered away from time 0.
    eucl: Vec<f64>,
    pol: Vec<f64>,
}

fn settles(trace: &[f64], tol: f64) -> bool {
    trace.last().is_some_and(|d| *d < tol)
}

fn nonincreasing(trace: &[f64]) -> bool {
    trace.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12))
}

fn sample_pair(params: &ModelParams, cfg: &SampleConfig, pair: usize) -> Result<LeafPair> {
    let p = params.p();
    let mut rng = pair_rng(cfg.seed, pair);
    let c = cfg.c;
    let n = rng.gen_range(0..2 * p);
    let s = rng.gen_range(0.0..1.0);
    let shared = log_uniform(&mut rng, 1e-3 * c, c);
    let a = log_uniform(&mut rng, 1e-3 * c, c);
    let b = log_uniform(&mut rng, 1e-3 * c, c);
    let leaf = if pair.is_multiple_of(2) {
        LeafKind::Stable
    } else {
        LeafKind::Unstable
    };
    let (x, y) = match leaf {
        LeafKind::Stable => (
            ChartPoint::new(p, n, a, shared),
            ChartPoint::new(p, n, b, shared),
        ),
        LeafKind::Unstable => (
            ChartPoint::new(p, n, shared, a),
            ChartPoint::new(p, n, shared, b),
        ),
    };
    let x = ChartOrbit::new(*params, x, s)?;
    let y = ChartOrbit::new(*params, y, s)?;
    let steps = (cfg.horizon * STEPS_PER_UNIT as f64).ceil() as i64;
    let dir = match leaf {
        LeafKind::Stable => 1.0,
        LeafKind::Unstable => -1.0,
    };
    let mut out = LeafPair {
        leaf,
        eucl: Vec::with_capacity(steps as usize + 1),
        pol: Vec::with_capacity(steps as usize + 1),
    };
    for k in 0..=steps {
        let t = dir * k as f64 / STEPS_PER_UNIT as f64;
        let (e, pol) = torus_distances(&x, t, &y, t);
        out.eucl.push(e);
        out.pol.push(pol);
    }
    Ok(out)
}

/// Pairs on a common leaf: stable pairs share the chart coordinate `v` and are
/// followed forward, unstable pairs share `u` and are followed backward. A
/// pair passes a tolerance in a metric when its torus distance is below the
/// tolerance at the end of the horizon.
pub fn stable_convergence_check(
    params: &ModelParams,
    cfg: &SampleConfig,
) -> Result<ConvergenceReport> {
    cfg.validate(params.p())?;
    let pairs: Vec<LeafPair> = (0..cfg.n_pairs)
        .into_par_iter()
        .map(|i| sample_pair(params, cfg, i))
        .collect::<Result<_>>()?;
    let mut failures_eucl = vec![0; CONVERGENCE_TOLERANCES.len()];
    let mut failures_pol = vec![0; CONVERGENCE_TOLERANCES.len()];
    let mut witnesses = Vec::new();
    let (mut mono_e, mut mono_p) = (0usize, 0usize);
    for (i, pair) in pairs.iter().enumerate() {
        mono_e += nonincreasing(&pair.eucl) as usize;
        mono_p += nonincreasing(&pair.pol) as usize;
        for (slot, &tol) in CONVERGENCE_TOLERANCES.iter().enumerate() {
            let (e, p) = (settles(&pair.eucl, tol), settles(&pair.pol, tol));
            failures_eucl[slot] += !e as usize;
            failures_pol[slot] += !p as usize;
            if !(e && p) && witnesses.len() < 10 {
                witnesses.push(LeafPairFailure {
                    pair: i,
                    leaf: pair.leaf,
                    tolerance: tol,
                    final_eucl: *pair.eucl.last().unwrap_or(&f64::NAN),
                    final_pol: *pair.pol.last().unwrap_or(&f64::NAN),
                });
            }
        }
    }
    let n = pairs.len() as f64;
    Ok(ConvergenceReport {
        pairs: pairs.len(),
        horizon: cfg.horizon,
        tolerances: CONVERGENCE_TOLERANCES.to_vec(),
        pass: failures_eucl.iter().chain(&failures_pol).all(|f| *f == 0),
        failures_eucl,
        failures_pol,
        monotone_fraction_eucl: mono_e as f64 / n,
        monotone_fraction_pol: mono_p as f64 / n,
        witnesses,
    })
}
