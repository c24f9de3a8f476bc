//! Named verification suites combining the estimators with exact checks.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::convergence::stable_convergence_check;
use super::expansivity::{one_prong_witness, separation_estimate};
use super::{estimate_closeness_moduli, estimate_window_closeness, EstimateReport, SampleConfig};
use crate::error::{Error, Result};
use crate::metrics::{comparison_constant, d_eucl, d_pol, noneq_witness, quadrant_isometry};
use crate::plane::{
    phi1, phi_pk, phi_pk_pow, pi_p, rotate_k, Direction, ModelParams, ProngId, ProngPoint,
};
use crate::surgery::{
    brute_force_k, inverse_surgery_search, surgery_verdict, HomologyClass, DEFAULT_SEARCH_BOUND,
};
use crate::suspension::{
    boundary_circle_map, boundary_orbit_census, OrbitKind, StandardPolygonSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Metrics,
    Models,
    Closeness,
    Expansivity,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 5] = ["metrics", "models", "closeness", "expansivity", "all"];
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Suite::Metrics => "metrics",
            Suite::Models => "models",
            Suite::Closeness => "closeness",
            Suite::Expansivity => "expansivity",
            Suite::All => "all",
        };
        f.write_str(name)
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "metrics" => Ok(Suite::Metrics),
            "models" => Ok(Suite::Models),
            "closeness" => Ok(Suite::Closeness),
            "expansivity" => Ok(Suite::Expansivity),
            "all" => Ok(Suite::All),
            other => Err(Error::Config(format!(
                "unknown suite {other:?}, expected one of {}",
                Suite::NAMES.join(", ")
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub details: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub p: u32,
    pub k: u32,
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
    /// ε tables behind the closeness checks.
    pub tables: Vec<EstimateReport>,
    pub pass: bool,
}

fn check(name: &str, pass: bool, details: Value) -> CheckOutcome {
    CheckOutcome {
        name: name.to_string(),
        pass,
        details,
    }
}

fn check_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn random_point<R: Rng>(rng: &mut R, p: u32, r_lo: f64, r_hi: f64) -> Result<ProngPoint> {
    let r = (rng.gen_range(r_lo.ln()..=r_hi.ln())).exp();
    ProngPoint::new(p, r, rng.gen_range(0.0..p as f64 * PI))
}

const METRIC_SAMPLES: usize = 10_000;

fn cylinder_distance(a: &ProngPoint, b: &ProngPoint) -> f64 {
    let period = a.p() as f64 * PI;
    let dr = a.r() - b.r();
    (-1..=1)
        .map(|j| dr.hypot(a.theta() - b.theta() + j as f64 * period))
        .fold(f64::INFINITY, f64::min)
}

pub fn metric_checks(p: u32, seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();

    let mut rng = check_rng(seed, 101);
    let mut worst = 0.0f64;
    for _ in 0..METRIC_SAMPLES {
        let a = random_point(&mut rng, p, 1e-3, 2.0)?;
        let b = random_point(&mut rng, p, 1e-3, 2.0)?;
        worst = worst.max((d_pol(&a, &b)? - cylinder_distance(&a, &b)).abs());
    }
    out.push(check(
        "polar distance matches the flat cylinder",
        worst <= 1e-12,
        json!({ "samples": METRIC_SAMPLES, "max_abs_error": worst }),
    ));

    let mut pass = true;
    let mut rows = Vec::new();
    for n in [1_000_000u64, 10_000_000, 1_000_000_000] {
        let w = noneq_witness(p, n)?;
        let (e, pol) = (d_eucl(&w.z, &w.z_prime)?, d_pol(&w.z, &w.z_prime)?);
        let small = e <= 2.0 / n as f64 * (1.0 + 1e-12) && (n < 10_000_000 || e < 1e-6);
        pass &= small && pol >= w.eps_bound * (1.0 - 1e-15);
        rows.push(json!({ "n": n, "eucl": e, "pol": pol }));
    }
    out.push(check(
        "euclidean-close pairs can stay polar-far",
        pass,
        json!({ "witnesses": rows }),
    ));

    let mut rng = check_rng(seed, 103);
    let mut worst = 0.0f64;
    for _ in 0..METRIC_SAMPLES {
        let a = random_point(&mut rng, p, 1e-3, 2.0)?;
        let b = random_point(&mut rng, p, 1e-3, 2.0)?;
        let c = rng.gen_range(-10.0..10.0);
        let (ra, rb) = (a.rotate(c), b.rotate(c));
        worst = worst
            .max((d_eucl(&a, &b)? - d_eucl(&ra, &rb)?).abs())
            .max((d_pol(&a, &b)? - d_pol(&ra, &rb)?).abs());
    }
    out.push(check(
        "rotations preserve both metrics",
        worst <= 1e-12,
        json!({ "samples": METRIC_SAMPLES, "max_abs_error": worst }),
    ));

    let mut rng = check_rng(seed, 104);
    let mut pass = true;
    let mut worst_tail = 0.0f64;
    for _ in 0..20 {
        let limit_angle = rng.gen_range(0.0..p as f64 * PI);
        let phase = rng.gen_range(0.0..2.0 * PI);
        let seq: Vec<ProngPoint> = (1..=60)
            .map(|n| {
                let scale = 2f64.powi(-n);
                ProngPoint::new(p, scale, limit_angle + scale * (n as f64 + phase).sin())
            })
            .collect::<Result<_>>()?;
        let limit = ProngPoint::boundary(p, limit_angle)?;
        for (n, x) in seq.iter().enumerate() {
            // d_pol(x_n, lim) ≤ √2·2^{-n-1}
            let bound = 2f64.sqrt() * 2f64.powi(-(n as i32) - 1) * (1.0 + 1e-9);
            pass &= d_pol(x, &limit)? <= bound;
        }
        let tail = d_pol(&seq[59], &limit)?;
        worst_tail = worst_tail.max(tail);
        pass &= limit.is_boundary() && tail < 1e-15;
    }
    out.push(check(
        "polar-Cauchy sequences converge onto the boundary circle",
        pass,
        json!({ "sequences": 20, "max_tail_distance": worst_tail }),
    ));

    let mut rng = check_rng(seed, 105);
    let mut worst = 0.0f64;
    for q in 1..=6u32 {
        let j0 = rng.gen_range(0..2 * p);
        let j1 = rng.gen_range(0..2 * q);
        let iso = quadrant_isometry(p, q, j0 as f64 * FRAC_PI_2, j1 as f64 * FRAC_PI_2)?;
        for _ in 0..1000 {
            let pt = |rng: &mut ChaCha8Rng| {
                let r = rng.gen_range(0.0..2.0);
                ProngPoint::new(p, r, j0 as f64 * FRAC_PI_2 + rng.gen_range(0.0..=FRAC_PI_2))
            };
            let (a, b) = (pt(&mut rng)?, pt(&mut rng)?);
            let (ia, ib) = (iso.apply(&a)?, iso.apply(&b)?);
            worst = worst
                .max((d_eucl(&a, &b)? - d_eucl(&ia, &ib)?).abs())
                .max((d_pol(&a, &b)? - d_pol(&ia, &ib)?).abs());
        }
    }
    out.push(check(
        "quadrant isometries preserve both metrics",
        worst <= 1e-10,
        json!({ "targets": "q = 1..6", "pairs_per_target": 1000, "max_abs_error": worst }),
    ));

    let mut rng = check_rng(seed, 106);
    let radius = 2.0;
    let constant = comparison_constant(radius);
    let mut worst_ratio = 0.0f64;
    for _ in 0..METRIC_SAMPLES {
        let a = random_point(&mut rng, p, 1e-6, radius)?;
        let b = random_point(&mut rng, p, 1e-6, radius)?;
        let pol = d_pol(&a, &b)?;
        if pol > 0.0 {
            worst_ratio = worst_ratio.max(d_eucl(&a, &b)? / pol);
        }
    }
    out.push(check(
        "euclidean distance bounded by polar distance on a disk",
        worst_ratio <= constant * (1.0 + 1e-12),
        json!({ "radius": radius, "constant": constant, "max_ratio": worst_ratio }),
    ));
    Ok(out)
}

fn surgery_checks(params: &ModelParams) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    let (mut tested, mut mismatches) = (0usize, 0usize);
    for a in -10..=10i64 {
        for b in -10..=10i64 {
            let sigma = HomologyClass::new(a, b);
            let Ok(v) = surgery_verdict(&sigma, params) else {
                continue;
            };
            tested += 1;
            let g = params.g() as u64;
            let closed = (a * params.p() as i64 + b * params.k() as i64).unsigned_abs();
            let geometric = brute_force_k(&sigma, params)?;
            if geometric != v.k_count || closed != v.k_count * g || v.p_new != v.k_count * g {
                mismatches += 1;
            }
        }
    }
    out.push(check(
        "boundary intersections match the determinant count",
        tested > 0 && mismatches == 0,
        json!({ "classes": tested, "mismatches": mismatches, "box": 10 }),
    ));

    let v = surgery_verdict(&HomologyClass::MU, params)?;
    out.push(check(
        "meridian surgery keeps the prong count",
        v.p_new == params.p() as u64,
        json!({ "p_new": v.p_new }),
    ));

    let (mut tried, mut restored) = (0usize, 0usize);
    for a in -3..=3i64 {
        for b in -3..=3i64 {
            let sigma = HomologyClass::new(a, b);
            match surgery_verdict(&sigma, params) {
                Ok(v) if v.expansive => {}
                _ => continue,
            }
            tried += 1;
            if inverse_surgery_search(&sigma, params, DEFAULT_SEARCH_BOUND)?.is_some() {
                restored += 1;
            }
        }
    }
    out.push(check(
        "inverse surgery restores the prong count",
        tried > 0 && restored == tried,
        json!({ "surgeries": tried, "restored": restored, "search_bound": DEFAULT_SEARCH_BOUND }),
    ));
    Ok(out)
}

pub fn model_checks(params: &ModelParams, cfg: &SampleConfig) -> Result<Vec<CheckOutcome>> {
    let p = params.p();
    let k = params.k();
    let mut out = Vec::new();
    let unrotated = ModelParams::new(p, 0)?;

    let mut rng = check_rng(cfg.seed, 201);
    let (mut conj, mut comm) = (0.0f64, 0.0f64);
    for _ in 0..METRIC_SAMPLES {
        let x = random_point(&mut rng, p, 1e-3, 1e3)?;
        let lhs = pi_p(&phi_pk(&x, &unrotated, Direction::Forward)?);
        let rhs = phi1(pi_p(&x), Direction::Forward);
        conj = conj.max(lhs.dist(&rhs) / rhs.norm());
        let a = rotate_k(&phi_pk(&x, &unrotated, Direction::Forward)?, k);
        let b = phi_pk(&rotate_k(&x, k), &unrotated, Direction::Forward)?;
        comm = comm.max(d_pol(&a, &b)? / a.r().max(1.0));
    }
    out.push(check(
        "branched cover conjugates the model map to the 1-prong map",
        conj < 1e-9,
        json!({ "samples": METRIC_SAMPLES, "max_relative_residual": conj }),
    ));
    out.push(check(
        "rotation commutes with the model map",
        comm <= 1e-12,
        json!({ "samples": METRIC_SAMPLES, "max_relative_residual": comm }),
    ));

    let mut rng = check_rng(cfg.seed, 202);
    let mut bad = 0usize;
    for _ in 0..METRIC_SAMPLES {
        let x = random_point(&mut rng, p, 1e-2, 1e2)?;
        if x.prong().is_some() {
            continue;
        }
        let y = phi_pk(&x, params, Direction::Forward)?;
        if y.quadrant().n() != (x.quadrant().n() + 2 * k) % (2 * p) {
            bad += 1;
        }
    }
    out.push(check(
        "quadrant index advances by twice the rotation",
        bad == 0,
        json!({ "samples": METRIC_SAMPLES, "mismatches": bad }),
    ));

    let mut worst = 0.0f64;
    let mut pass = true;
    for i in 0..p {
        for (prong, rate) in [
            (ProngId::stable(i), 2f64.powf(-2.0 / p as f64)),
            (ProngId::unstable(i), 2f64.powf(2.0 / p as f64)),
        ] {
            let img = phi_pk(&prong.point(p, 1.0)?, params, Direction::Forward)?;
            worst = worst.max((img.r() - rate).abs());
            let expected = ProngId {
                kind: prong.kind,
                index: (i + k) % p,
            };
            pass &= img.prong() == Some(expected);
        }
    }
    out.push(check(
        "prongs map to prongs at the expected radial rates",
        pass && worst <= 1e-12,
        json!({ "max_rate_error": worst }),
    ));

    let census = boundary_orbit_census(params);
    let map = boundary_circle_map(*params);
    let g = params.g();
    let mut worst = 0.0f64;
    for orbit in &census.orbits {
        let target = match orbit.kind {
            OrbitKind::Attracting => 0.25,
            OrbitKind::Repelling => 4.0,
        };
        for &theta in &orbit.angles {
            worst = worst.max((map.derivative(theta) - target).abs());
        }
    }
    let counts_ok = census.attracting == g && census.repelling == g && census.period == params.q();
    out.push(check(
        "boundary circle has the expected periodic orbits",
        counts_ok && worst <= 1e-8,
        json!({
            "attracting": census.attracting,
            "repelling": census.repelling,
            "period": census.period,
            "expected_orbits": g,
            "expected_period": params.q(),
            "max_multiplier_error": worst,
        }),
    ));

    let forward = phi_pk_pow(&ProngId::stable(0).point(p, 1.0)?, params, 40)?;
    out.push(check(
        "stable prong points contract under iteration",
        (forward.r() - 2f64.powf(-80.0 / p as f64)).abs() <= 1e-12 * forward.r().max(1e-300),
        json!({ "radius_after_40": forward.r() }),
    ));

    let report = stable_convergence_check(params, cfg)?;
    let details = json!({
        "pairs": report.pairs,
        "horizon": report.horizon,
        "tolerances": report.tolerances,
        "failures_eucl": report.failures_eucl,
        "failures_pol": report.failures_pol,
        "monotone_fraction_eucl": report.monotone_fraction_eucl,
        "monotone_fraction_pol": report.monotone_fraction_pol,
    });
    let pol_ok = report.failures_pol.iter().all(|f| *f == 0);
    if p >= 2 {
        out.push(check(
            "leaf pairs converge in both metrics",
            report.pass,
            details,
        ));
    } else {
        out.push(check(
            "leaf pairs converge in the polar metric",
            pol_ok,
            details,
        ));
    }

    if p >= 2 {
        out.extend(surgery_checks(params)?);
    }
    Ok(out)
}

pub fn closeness_checks(
    params: &ModelParams,
    cfg: &SampleConfig,
) -> Result<(Vec<CheckOutcome>, Vec<EstimateReport>)> {
    let (pointwise, orbitwise) = estimate_closeness_moduli(params, cfg.i_s, cfg.i_u, cfg)?;
    let spec = StandardPolygonSpec::new(cfg.c)?;
    let window = estimate_window_closeness(params, &spec, cfg)?;
    let summary = |r: &EstimateReport| {
        json!({
            "eps": r.rows.iter().map(|row| row.eps).collect::<Vec<_>>(),
            "eta_hat": r.rows.iter().map(|row| row.eta_hat).collect::<Vec<_>>(),
            "violations": r.rows.iter().map(|row| row.violations).collect::<Vec<_>>(),
            "monotone": r.monotone,
            "unbounded_witnesses": r.unbounded_witnesses,
            "diagnostics": r.diagnostics,
        })
    };
    let diag = |key: &str| window.diagnostics.get(key).copied().unwrap_or(f64::NAN);
    let finest = *cfg.eps_grid.last().unwrap_or(&0.0);
    let checks = vec![
        check(
            "polar closeness implies euclidean closeness",
            pointwise.pass,
            summary(&pointwise),
        ),
        check(
            "euclidean orbit closeness implies polar closeness",
            orbitwise.pass,
            summary(&orbitwise),
        ),
        check(
            "closeness inside standard polygons survives the blow-up",
            window.pass,
            summary(&window),
        ),
        check(
            "close pairs share quadrants inside the exit window",
            diag("quadrant_eps0") > finest,
            json!({ "quadrant_eps0": diag("quadrant_eps0"), "finest_eps": finest }),
        ),
        check(
            "stable projections of close pairs stay within one fundamental domain",
            diag("projection_violations") == 0.0,
            json!({
                "violations": diag("projection_violations"),
                "max_ratio": diag("projection_ratio_max"),
                "fundamental_ratio": diag("fundamental_domain_ratio"),
            }),
        ),
    ];
    Ok((checks, vec![pointwise, orbitwise, window]))
}

pub const WITNESS_CASES: [(f64, f64); 4] = [(0.1, 1e-2), (0.1, 1e-6), (1.0, 1e-2), (1.0, 1e-6)];

pub fn expansivity_checks(params: &ModelParams, cfg: &SampleConfig) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    let mut pass = true;
    let mut rows = Vec::new();
    for (x0, delta) in WITNESS_CASES {
        let w = one_prong_witness(x0, delta, 60)?;
        pass &= w.certified;
        rows.push(json!({
            "x0": x0,
            "delta": delta,
            "gap": w.expected_gap,
            "max_relative_deviation": w.max_relative_deviation,
            "torus_sup": w.torus_sup,
        }));
    }
    out.push(check(
        "one-prong orbit pairs keep a constant gap",
        pass,
        json!({ "horizon": 60, "witnesses": rows }),
    ));

    let report = separation_estimate(params, cfg)?;
    let details = json!({
        "levels": report.levels,
        "violations": report.violations,
        "eps_star": report.eps_star,
        "pairs_tested": report.pairs_tested,
        "orbit_pairs_excluded": report.orbit_pairs_excluded,
    });
    if params.p() >= 2 {
        out.push(check(
            "nearby distinct orbits separate",
            report.pass,
            details,
        ));
    } else {
        out.push(check(
            "separation fails at every level on the 1-prong model",
            report.defeated,
            details,
        ));
    }
    Ok(out)
}

/// Run a suite on one model.
pub fn run_suite(params: &ModelParams, suite: Suite, cfg: &SampleConfig) -> Result<SuiteReport> {
    cfg.validate(params.p())?;
    let mut checks = Vec::new();
    let mut tables = Vec::new();
    let wants = |s: Suite| suite == s || suite == Suite::All;
    if wants(Suite::Metrics) {
        checks.extend(metric_checks(params.p(), cfg.seed)?);
    }
    if wants(Suite::Models) {
        checks.extend(model_checks(params, cfg)?);
    }
    if wants(Suite::Closeness) {
        let (c, t) = closeness_checks(params, cfg)?;
        checks.extend(c);
        tables.extend(t);
    }
    if wants(Suite::Expansivity) {
        checks.extend(expansivity_checks(params, cfg)?);
    }
    Ok(SuiteReport {
        suite,
        p: params.p(),
        k: params.k(),
        seed: cfg.seed,
        pass: checks.iter().all(|c| c.pass),
        checks,
        tables,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg(p: u32) -> SampleConfig {
        SampleConfig {
            n_pairs: 120,
            ..SampleConfig::for_model(p)
        }
    }

    #[test]
    fn suite_names_round_trip() {
        for name in Suite::NAMES {
            assert_eq!(name.parse::<Suite>().unwrap().to_string(), name);
        }
        assert!("everything".parse::<Suite>().is_err());
    }

    #[test]
    fn metric_suite_passes() {
        for p in [1, 3] {
            let checks = metric_checks(p, 0).unwrap();
            assert!(checks.iter().all(|c| c.pass), "{checks:#?}");
        }
    }

    #[test]
    fn model_suite_passes() {
        for (p, k) in [(1, 0), (3, 1), (4, 2)] {
            let params = ModelParams::new(p, k).unwrap();
            let checks = model_checks(&params, &small_cfg(p)).unwrap();
            let failed: Vec<_> = checks.iter().filter(|c| !c.pass).collect();
            assert!(failed.is_empty(), "{failed:#?}");
        }
    }
}
