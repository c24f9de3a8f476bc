//! Increasing reparametrizations of time used when comparing orbits.

use rand::Rng;

use super::{log_uniform, random_sign};

/// An increasing map `h : ℝ → ℝ`.
#[derive(Debug, Clone, PartialEq)]
pub enum Reparam {
    Identity,
    Shift(f64),
    /// Piecewise linear with unit-spaced knots `h(j)` for `j = lo, …, lo + len`,
    /// `h(0) = 0`, extended linearly outside.
    PiecewiseLinear {
        lo: i64,
        values: Vec<f64>,
    },
}

impl Reparam {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Reparam::Identity => t,
            Reparam::Shift(tau) => t + tau,
            Reparam::PiecewiseLinear { lo, values } => {
                let last = values.len() - 1;
                let x = t - *lo as f64;
                let i = (x.floor().max(0.0) as usize).min(last - 1);
                let frac = x - i as f64;
                values[i] + frac * (values[i + 1] - values[i])
            }
        }
    }

    /// Random piecewise-linear map on `[-span, span]` with slopes
    /// `1 + ζ·ξ_j`, `ξ_j ∈ [-1, 1]`, clipped to `[½, 2]`.
    pub fn random_piecewise<R: Rng>(rng: &mut R, span: f64, zeta: f64) -> Reparam {
        let reach = span.ceil() as i64 + 1;
        let slope = |rng: &mut R| (1.0 + zeta * rng.gen_range(-1.0..=1.0)).clamp(0.5, 2.0);
        let mut forward = vec![0.0];
        for _ in 0..reach {
            let next = forward.last().copied().unwrap_or(0.0) + slope(rng);
            forward.push(next);
        }
        let mut backward = vec![0.0];
        for _ in 0..reach {
            let next = backward.last().copied().unwrap_or(0.0) - slope(rng);
            backward.push(next);
        }
        backward.reverse();
        backward.pop();
        backward.extend(forward);
        Reparam::PiecewiseLinear {
            lo: -reach,
            values: backward,
        }
    }

    /// A shift or a piecewise-linear map with log-uniform deviation from the
    /// identity.
    pub fn random_near_identity<R: Rng>(rng: &mut R, span: f64) -> Reparam {
        if rng.gen_bool(0.5) {
            Reparam::Shift(random_sign(rng) * log_uniform(rng, 1e-8, 0.25))
        } else {
            let zeta = log_uniform(rng, 1e-8, 0.5);
            Reparam::random_piecewise(rng, span, zeta)
        }
    }
}
