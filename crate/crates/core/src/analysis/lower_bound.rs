use std::f64::consts::PI;

use serde::Serialize;
use statrs::function::gamma::gamma;

use super::quadrature::exp_sinh;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialMoment {
    /// `int_0^inf exp(-2 b r^2) r^{2 - delta} dr` by exp-sinh quadrature.
    pub quadrature: f64,
    pub error_estimate: f64,
    /// `Gamma((3 - delta)/2) / (2 (2b)^{(3 - delta)/2})`.
    pub closed_form: f64,
    /// The same with `Gamma(3 - delta)` in place of `Gamma((3 - delta)/2)`.
    pub alternate_form: f64,
}

pub fn gaussian_radial_moment(delta: f64, b: f64) -> Result<RadialMoment> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::domain(format!("delta must lie in [0, 1], got {delta}")));
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::domain(format!("b must be positive, got {b}")));
    }
    let q = exp_sinh(|r| (-2.0 * b * r * r).exp() * r.powf(2.0 - delta), 0.0, 1e-14);
    let k = 0.5 * (3.0 - delta);
    let scale = 0.5 * (2.0 * b).powf(-k);
    Ok(RadialMoment {
        quadrature: q.value,
        error_estimate: q.error_estimate,
        closed_form: scale * gamma(k),
        alternate_form: scale * gamma(3.0 - delta),
    })
}

/// Constants of the Gaussian heat-kernel lower bound
/// `K_t(x, y) >= c t^{-3/2} exp(-b |x - y|^2 / t) exp(-w t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowerBoundParams {
    pub delta: f64,
    pub b: f64,
    pub c: f64,
    pub w: f64,
    pub t_final: f64,
}

impl LowerBoundParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::domain(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        for (name, v) in [("b", self.b), ("c", self.c), ("T", self.t_final)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.w >= 0.0) {
            return Err(Error::domain(format!("w must be >= 0, got {}", self.w)));
        }
        Ok(())
    }
}

/// `2 pi^2 c^2 T^{2 - delta/2} / ((1 - delta/2)(2 - delta/2))` times the
/// radial moment, evaluated by quadrature. `w` does not enter.
pub fn lower_bound_value(params: &LowerBoundParams) -> Result<f64> {
    params.validate()?;
    let d = params.delta;
    let moment = gaussian_radial_moment(d, params.b)?.quadrature;
    let time = params.t_final.powf(2.0 - 0.5 * d) / ((1.0 - 0.5 * d) * (2.0 - 0.5 * d));
    Ok(2.0 * PI * PI * params.c * params.c * time * moment)
}
