//! Sampling in the sets `𝒪_{M,N}(I^s, I^u)`.
//!
//! A point of quadrant 0 with chart coordinates `(u, v)` lies in `𝒪_{M,N}`
//! exactly when `2^M·u` is the cover radius of a point of `I^s` and `2^N·v`
//! the cover radius of a point of `I^u`, so the set is a chart rectangle.

use rand::Rng;

use super::chart::ChartPoint;
use super::pair_rng;
use crate::error::{Error, Result};
use crate::plane::{phi_pk_pow, project_stable_unstable, ModelParams, ProngPoint};

/// Chart rectangle `[u_lo, u_hi] × [v_lo, v_hi]` of `𝒪_{M,N}` in quadrant 0.
pub fn o_mn_rectangle(
    p: u32,
    i_s: [f64; 2],
    i_u: [f64; 2],
    m: u32,
    n: u32,
) -> Result<[[f64; 2]; 2]> {
    for seg in [i_s, i_u] {
        if !(seg[0] > 0.0 && seg[1] >= seg[0] && seg[1].is_finite()) {
            return Err(Error::EmptyRegion(format!(
                "segment [{}, {}]",
                seg[0], seg[1]
            )));
        }
    }
    let half = p as f64 / 2.0;
    let su = 2f64.powi(-(m as i32));
    let sv = 2f64.powi(-(n as i32));
    let rect = [
        [i_s[0].powf(half) * su, i_s[1].powf(half) * su],
        [i_u[0].powf(half) * sv, i_u[1].powf(half) * sv],
    ];
    if rect.iter().any(|r| !(r[0] > 0.0 && r[1] > r[0])) {
        return Err(Error::EmptyRegion("degenerate rectangle".into()));
    }
    Ok(rect)
}

pub(crate) fn sample_in_rect<R: Rng>(rng: &mut R, p: u32, rect: &[[f64; 2]; 2]) -> ChartPoint {
    let u = rng.gen_range(rect[0][0]..=rect[0][1]);
    let v = rng.gen_range(rect[1][0]..=rect[1][1]);
    ChartPoint::new(p, 0, u, v)
}

/// `count` points sampled uniformly in the chart rectangle of `𝒪_{M,N}`.
pub fn sample_o_mn(
    p: u32,
    i_s: [f64; 2],
    i_u: [f64; 2],
    m: u32,
    n: u32,
    count: usize,
    seed: u64,
) -> Result<Vec<ProngPoint>> {
    let rect = o_mn_rectangle(p, i_s, i_u, m, n)?;
    (0..count)
        .map(|i| sample_in_rect(&mut pair_rng(seed, i), p, &rect).to_prong())
        .collect()
}

/// Membership test through the plane maps: `π_s(ϕ_p^{-M}(x)) ∈ I^s` and
/// `π_u(ϕ_p^N(x)) ∈ I^u`, for `x` in quadrant 0, with relative slack 1e-9.
pub fn in_o_mn(pt: &ProngPoint, i_s: [f64; 2], i_u: [f64; 2], m: u32, n: u32) -> Result<bool> {
    let params = ModelParams::new(pt.p(), 0)?;
    if pt.is_boundary() || pt.quadrant().n() != 0 {
        return Ok(false);
    }
    let inside = |r: f64, seg: [f64; 2]| r >= seg[0] * (1.0 - 1e-9) && r <= seg[1] * (1.0 + 1e-9);
    let back = project_stable_unstable(&phi_pk_pow(pt, &params, -(m as i64))?)?;
    let fwd = project_stable_unstable(&phi_pk_pow(pt, &params, n as i64)?)?;
    Ok(inside(back.pi_s.r(), i_s) && inside(fwd.pi_u.r(), i_u))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_rectangle_membership() {
        let pts = sample_o_mn(2, [1.0, 3.0], [1.0, 3.0], 0, 0, 50, 1).unwrap();
        for pt in &pts {
            assert!(in_o_mn(pt, [1.0, 3.0], [1.0, 3.0], 0, 0).unwrap());
        }
    }

    #[test]
    fn backward_contraction_scales_u() {
        let rect = o_mn_rectangle(2, [1.0, 3.0], [1.0, 3.0], 3, 0).unwrap();
        assert_eq!(rect[0], [0.125, 0.375]);
        let pts = sample_o_mn(2, [1.0, 3.0], [1.0, 3.0], 3, 0, 50, 2).unwrap();
        for pt in &pts {
            let (_, u, _) = pt.quadrant_chart();
            assert!((0.125 - 1e-12..=0.375 + 1e-12).contains(&u));
            assert!(in_o_mn(pt, [1.0, 3.0], [1.0, 3.0], 3, 0).unwrap());
        }
    }

    #[test]
    fn three_prong_rectangle_uses_radial_power() {
        let rect = o_mn_rectangle(3, [0.5, 2.0], [0.5, 2.0], 1, 2).unwrap();
        assert!((rect[0][0] - 0.5f64.powf(1.5) / 2.0).abs() < 1e-15);
        assert!((rect[0][1] - 2f64.powf(1.5) / 2.0).abs() < 1e-15);
        assert!((rect[1][1] - 2f64.powf(1.5) / 4.0).abs() < 1e-15);
        for pt in sample_o_mn(3, [0.5, 2.0], [0.5, 2.0], 1, 2, 100, 3).unwrap() {
            assert!(in_o_mn(&pt, [0.5, 2.0], [0.5, 2.0], 1, 2).unwrap());
        }
    }

    #[test]
    fn empty_segments_are_rejected() {
        assert!(o_mn_rectangle(2, [0.0, 1.0], [1.0, 2.0], 0, 0).is_err());
        assert!(o_mn_rectangle(2, [1.0, 1.0], [1.0, 2.0], 0, 0).is_err());
    }
}
