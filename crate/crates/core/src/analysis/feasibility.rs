use serde::Serialize;

use crate::error::{Error, Result};

/// Exponent bookkeeping for the trace argument at singularity strength
/// `delta` and slack `eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeasibilityQuery {
    pub delta: f64,
    pub eps: f64,
    /// `s = (1 - delta + 2 eps) / (2 - delta)`.
    pub s: f64,
    /// `(12 - 6 delta) / (4 + delta - delta^2 - 4 eps)`.
    pub p_lower: f64,
    /// `1 / delta`.
    pub p_upper: f64,
    pub feasible: bool,
}

impl FeasibilityQuery {
    /// `delta - 2 s + 3 - 6 / p`, which must be positive.
    pub fn exponent_margin(&self, p: f64) -> f64 {
        self.delta - 2.0 * self.s + 3.0 - 6.0 / p
    }

    /// `4 (1 - eps) - 11 delta + 5 delta^2`.
    pub fn quadratic(&self) -> f64 {
        4.0 * (1.0 - self.eps) - 11.0 * self.delta + 5.0 * self.delta * self.delta
    }
}

pub fn feasibility_check(delta: f64, eps: f64) -> FeasibilityQuery {
    let s = (1.0 - delta + 2.0 * eps) / (2.0 - delta);
    let denom = 4.0 + delta - delta * delta - 4.0 * eps;
    let p_lower = (12.0 - 6.0 * delta) / denom;
    let p_upper = 1.0 / delta;
    let mut q = FeasibilityQuery {
        delta,
        eps,
        s,
        p_lower,
        p_upper,
        feasible: false,
    };
    // the margin vanishes at p_lower and grows with p, so the midpoint decides
    q.feasible = denom > 0.0 && p_lower < p_upper && q.exponent_margin(0.5 * (p_lower + p_upper)) > 0.0;
    q
}

/// Smaller root of `5 delta^2 - 11 delta + 4 (1 - eps)`; `(11 - sqrt 41) / 10`
/// at `eps = 0`.
pub fn feasibility_threshold(eps: f64) -> f64 {
    let disc = 41.0 + 80.0 * eps;
    // rationalized to avoid cancellation
    8.0 * (1.0 - eps) / (11.0 + disc.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interpolation {
    pub theta: f64,
    pub s: f64,
    /// `|theta - delta / 2|`.
    pub residual: f64,
}

/// Solves `1/2 + eps = (1 - theta) s + theta` for `theta`.
pub fn interpolation_exponent(delta: f64, eps: f64) -> Result<Interpolation> {
    let top = feasibility_threshold(0.0);
    if !(delta > 0.0 && delta < top) {
        return Err(Error::domain(format!("delta must lie in (0, {top:.5}), got {delta}")));
    }
    if !(eps > 0.0 && eps < delta / 4.0) {
        return Err(Error::domain(format!("eps must lie in (0, delta/4), got {eps}")));
    }
    let s = (1.0 - delta + 2.0 * eps) / (2.0 - delta);
    let theta = (0.5 + eps - s) / (1.0 - s);
    Ok(Interpolation {
        theta,
        s,
        residual: (theta - 0.5 * delta).abs(),
    })
}
