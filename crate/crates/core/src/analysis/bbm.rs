//! `(1 - s) |h|^2_{H^s}` as `s -> 1`.
//!
//! Every test field reduces to `|h|^2_{H^s} = 2 int_0^L rho^{1-2s} G(rho) drho`
//! with `G` smooth: over an interval `G(rho) = int_0^{L-rho} (dh/rho)^2 dy`,
//! and for an affine field on a ball `G` is the angular average of
//! `|grad h . omega|^2` times the covariogram of the ball. The limit is `G(0)`.

use std::f64::consts::PI;

use serde::Serialize;

use super::quadrature::tanh_sinh;
use crate::error::{Error, Result};

/// Smooth fields with an exact gradient.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum BbmField {
    /// `sum_k coeffs[k] y^k` on `[0, length]`.
    Polynomial { coeffs: Vec<f64>, length: f64 },
    /// `amplitude * exp(-1 / (1 - u^2))`, `u = (y - center) / width`, on `[0, length]`.
    Bump {
        amplitude: f64,
        center: f64,
        width: f64,
        length: f64,
    },
    /// `gradient . x` on the ball of radius `radius`.
    Affine { gradient: [f64; 3], radius: f64 },
}

impl BbmField {
    pub fn dimension(&self) -> usize {
        match self {
            BbmField::Affine { .. } => 3,
            _ => 1,
        }
    }

    /// BBM constant: `|S^{d-1}| / (2d)`.
    pub fn constant(&self) -> f64 {
        match self.dimension() {
            1 => 1.0,
            _ => 2.0 * PI / 3.0,
        }
    }

    fn extent(&self) -> f64 {
        match self {
            BbmField::Polynomial { length, .. } | BbmField::Bump { length, .. } => *length,
            BbmField::Affine { radius, .. } => 2.0 * radius,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            BbmField::Polynomial { coeffs, length } => *length > 0.0 && coeffs.iter().all(|c| c.is_finite()),
            BbmField::Bump { width, length, .. } => *width > 0.0 && *length > 0.0,
            BbmField::Affine { radius, .. } => *radius > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid test field {self:?}")))
        }
    }

    fn value(&self, y: f64) -> f64 {
        match self {
            BbmField::Polynomial { coeffs, .. } => coeffs.iter().rev().fold(0.0, |acc, c| acc * y + c),
            BbmField::Bump { amplitude, center, width, .. } => {
                let u = (y - center) / width;
                if u.abs() >= 1.0 {
                    0.0
                } else {
                    amplitude * (-1.0 / (1.0 - u * u)).exp()
                }
            }
            BbmField::Affine { .. } => unreachable!("affine fields are handled in closed form"),
        }
    }

    fn derivative(&self, y: f64) -> f64 {
        match self {
            BbmField::Polynomial { coeffs, .. } => coeffs
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, c)| acc * y + k as f64 * c),
            BbmField::Bump { width, .. } => {
                let u = (y - self.center()) / width;
                if u.abs() >= 1.0 {
                    0.0
                } else {
                    self.value(y) * (-2.0 * u / (1.0 - u * u).powi(2)) / width
                }
            }
            BbmField::Affine { .. } => unreachable!("affine fields are handled in closed form"),
        }
    }

    fn center(&self) -> f64 {
        match self {
            BbmField::Bump { center, .. } => *center,
            _ => 0.0,
        }
    }

    /// `|grad h|^2_{L^2}`.
    pub fn gradient_energy(&self) -> f64 {
        match self {
            BbmField::Affine { gradient, radius } => {
                norm_sq(gradient) * 4.0 * PI * radius.powi(3) / 3.0
            }
            _ => tanh_sinh(|y| self.derivative(y).powi(2), 0.0, self.extent(), 1e-14).value,
        }
    }

    /// `G(rho)`.
    fn profile(&self, rho: f64) -> f64 {
        match self {
            BbmField::Affine { gradient, radius } => {
                let covariogram = PI / 12.0 * (4.0 * radius + rho) * (2.0 * radius - rho).powi(2);
                2.0 * PI / 3.0 * norm_sq(gradient) * covariogram
            }
            _ => {
                let l = self.extent();
                tanh_sinh(|y| ((self.value(y + rho) - self.value(y)) / rho).powi(2), 0.0, l - rho, 1e-13).value
            }
        }
    }
}

fn norm_sq(a: &[f64; 3]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

/// Below this fraction of the extent, `G` is replaced by its chord from `G(0)`.
const NEAR_FIELD: f64 = 1e-5;

/// `(1 - s) |h|^2_{H^s}`.
pub fn scaled_seminorm(field: &BbmField, s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::domain(format!("seminorm order must lie in (0, 1), got {s}")));
    }
    field.validate()?;
    let l = field.extent();
    let rho_c = NEAR_FIELD * l;
    let g0 = field.gradient_energy() * field.constant();
    let slope = (field.profile(rho_c) - g0) / rho_c;
    let near = g0 * rho_c.powf(2.0 - 2.0 * s) + 2.0 * (1.0 - s) * slope * rho_c.powf(3.0 - 2.0 * s) / (3.0 - 2.0 * s);
    let far = tanh_sinh(|rho| rho.powf(1.0 - 2.0 * s) * field.profile(rho), rho_c, l, 1e-12).value;
    Ok(near + 2.0 * (1.0 - s) * far)
}

/// Value at `x = 1` of the polynomial through `points`, by Neville's scheme.
pub fn richardson_at_one(points: &[(f64, f64)]) -> f64 {
    let mut p: Vec<f64> = points.iter().map(|&(_, v)| v).collect();
    let n = p.len();
    for m in 1..n {
        for i in 0..n - m {
            let (xi, xj) = (points[i].0, points[i + m].0);
            p[i] = ((1.0 - xj) * p[i] + (xi - 1.0) * p[i + 1]) / (xi - xj);
        }
    }
    p[0]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BbmRow {
    pub s: f64,
    pub scaled: f64,
    /// `K_d |grad h|^2`.
    pub reference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BbmReport {
    pub dimension: usize,
    pub rows: Vec<BbmRow>,
    pub extrapolated: f64,
    pub reference: f64,
    /// `|extrapolated - reference| / reference`, or the absolute gap when the
    /// reference is zero.
    pub relative_error: f64,
}

pub fn bbm_limit_check(field: &BbmField, s_sequence: &[f64]) -> Result<BbmReport> {
    if s_sequence.len() < 2 || s_sequence.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("s sequence must be strictly increasing with at least two entries"));
    }
    let reference = field.constant() * field.gradient_energy();
    let rows = s_sequence
        .iter()
        .map(|&s| {
            Ok(BbmRow {
                s,
                scaled: scaled_seminorm(field, s)?,
                reference,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.s, r.scaled)).collect();
    let extrapolated = richardson_at_one(&points);
    let gap = (extrapolated - reference).abs();
    Ok(BbmReport {
        dimension: field.dimension(),
        rows,
        extrapolated,
        reference,
        relative_error: if reference == 0.0 { gap } else { gap / reference },
    })
}
