//! Comparison of the polar and euclidean metrics along orbit segments in
//! `𝒪_{M,N}`.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rayon::prelude::*;

use super::chart::{plane_distances, ChartPoint};
use super::sampling::{o_mn_rectangle, sample_in_rect};
use super::{
    decreases_overall, is_monotone, log_uniform, pair_rng, tabulate, EstimateReport, PairKind,
    PairOutcome, SampleConfig,
};
use crate::error::Result;
use crate::metrics::comparison_constant;
use crate::plane::ModelParams;

/// Ceiling for the orbit-wise polar distance of pairs passing the filter.
pub const POLAR_CEILING: f64 = FRAC_PI_2;

struct ClosenessPair {
    pointwise: PairOutcome,
    orbitwise: PairOutcome,
}

fn clamp_into(x: f64, range: [f64; 2]) -> f64 {
    x.clamp(range[0], range[1])
}

fn sample_pair(
    params: &ModelParams,
    i_s: [f64; 2],
    i_u: [f64; 2],
    cfg: &SampleConfig,
    pair: usize,
) -> Result<ClosenessPair> {
    let p = params.p();
    let mut rng = pair_rng(cfg.seed, pair);
    let h = cfg.horizon.floor() as u32;
    let m = rng.gen_range(0..=h);
    let n = rng.gen_range(0..=h);
    let rect = o_mn_rectangle(p, i_s, i_u, m, n)?;
    let x = sample_in_rect(&mut rng, p, &rect);
    let delta = log_uniform(&mut rng, 1e-7, 1.0);
    let y = ChartPoint::new(
        p,
        0,
        clamp_into(x.u() * (1.0 + delta * rng.gen_range(-1.0..=1.0)), rect[0]),
        clamp_into(x.v() * (1.0 + delta * rng.gen_range(-1.0..=1.0)), rect[1]),
    );
    let (e0, pol0) = plane_distances(&x, &y);
    let (mut max_e, mut max_pol) = (0.0f64, 0.0f64);
    for j in -(m as i64)..=(n as i64) {
        let (e, pol) = plane_distances(&x.iterate(params, j), &y.iterate(params, j));
        max_e = max_e.max(e);
        max_pol = max_pol.max(pol);
    }
    Ok(ClosenessPair {
        pointwise: PairOutcome {
            pair,
            kind: PairKind::Perturbed,
            hypothesis: pol0,
            conclusion: e0,
        },
        orbitwise: PairOutcome {
            pair,
            kind: PairKind::Perturbed,
            hypothesis: max_e,
            conclusion: max_pol,
        },
    })
}

/// Two reports: the pointwise implication `d_pol < ε ⇒ d_eucl ≤ C(R)·ε`
/// checked against the analytic constant, and the orbit-wise converse
/// `max_k d_eucl < ε ⇒ max_k d_pol < η'(ε)` estimated empirically.
pub fn estimate_closeness_moduli(
    params: &ModelParams,
    i_s: [f64; 2],
    i_u: [f64; 2],
    cfg: &SampleConfig,
) -> Result<(EstimateReport, EstimateReport)> {
    let p = params.p();
    cfg.validate(p)?;
    let pairs: Vec<ClosenessPair> = (0..cfg.n_pairs)
        .into_par_iter()
        .map(|i| sample_pair(params, i_s, i_u, cfg, i))
        .collect::<Result<_>>()?;

    let corner = o_mn_rectangle(p, i_s, i_u, 0, 0)?;
    let radius_bound = ChartPoint::new(p, 0, corner[0][1], corner[1][1]).radius();
    let constant = comparison_constant(radius_bound);

    let pointwise: Vec<PairOutcome> = pairs.iter().map(|c| c.pointwise).collect();
    let bound = move |eps: f64| constant * eps;
    let (rows, _) = tabulate(&pointwise, &cfg.eps_grid, Some(&bound), f64::INFINITY);
    let violations: usize = rows.iter().map(|r| r.violations).sum();
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("radius_bound".to_string(), radius_bound);
    diagnostics.insert("comparison_constant".to_string(), constant);
    let report1 = EstimateReport {
        name: "polar-to-euclidean".into(),
        monotone: is_monotone(&rows),
        unbounded_witnesses: 0,
        pass: violations == 0 && rows.iter().all(|r| r.passing > 0),
        rows,
        diagnostics,
    };

    let orbitwise: Vec<PairOutcome> = pairs.iter().map(|c| c.orbitwise).collect();
    let (rows, unbounded) = tabulate(&orbitwise, &cfg.eps_grid, None, POLAR_CEILING);
    let monotone = is_monotone(&rows);
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("ceiling".to_string(), POLAR_CEILING);
    let report2 = EstimateReport {
        name: "orbitwise-euclidean-to-polar".into(),
        pass: monotone && unbounded == 0 && decreases_overall(&rows),
        monotone,
        unbounded_witnesses: unbounded,
        rows,
        diagnostics,
    };
    Ok((report1, report2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes_for_the_regular_model() {
        let params = ModelParams::new(2, 0).unwrap();
        let mut cfg = SampleConfig::for_model(2);
        cfg.n_pairs = 400;
        cfg.horizon = 10.0;
        let (r1, r2) = estimate_closeness_moduli(&params, cfg.i_s, cfg.i_u, &cfg).unwrap();
        assert!(r1.pass, "{r1:?}");
        assert!(r2.monotone);
        assert_eq!(r2.unbounded_witnesses, 0);
    }

    #[test]
    fn collinear_pairs_on_a_prong_are_close_both_ways() {
        let a = ChartPoint::new(2, 0, 0.5, 0.0);
        let b = ChartPoint::new(2, 0, 0.5001, 0.0);
        let (e, pol) = plane_distances(&a, &b);
        assert!((e - 1e-4).abs() < 1e-12);
        assert!((pol - 1e-4).abs() < 1e-12);
    }
}
