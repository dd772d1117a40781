//! Observables: energies, dissipation, ensemble statistics, scaling fits,
//! fractional seminorms and the Duchon-Robert density.

mod duchon_robert;
mod seminorm;
mod series;

pub use duchon_robert::{duchon_robert_density, DuchonRobert};
pub use seminorm::{hs_seminorm_sq, Sampling};
pub use series::{accumulate_ensemble, ChannelStats, DiagnosticsSeries, EnsembleStats, SweepRow, SweepTable};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Grid, VelocityField};
use crate::solver::{Operator, TopBoundary};

/// How the gradient of an azimuthal field is measured in the ball.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientForm {
    /// `|grad (u phi_hat)|^2`, including `u^2 / (r sin(theta))^2`.
    #[default]
    Covariant,
    /// `|grad u|^2` of the component alone.
    Componentwise,
}

/// `|grad z|^2_{L^2(D)}`. Full-3d fields are measured through `u_phi`,
/// the only component the azimuthal ansatz keeps.
pub fn gradient_energy(state: &VelocityField, grid: &Grid, form: GradientForm) -> Result<f64> {
    state.check_shape(grid)?;
    let z = state.tangential();
    let parts = Operator::new(grid, 0.0, TopBoundary::Dirichlet)?.energy_parts(&z);
    Ok(match form {
        GradientForm::Covariant => parts.covariant(),
        GradientForm::Componentwise => parts.differences,
    })
}

/// `nu E|z(T)|^2` from the last sample of an ensemble.
pub fn weak_dissipation_value(stats: &EnsembleStats, nu: f64) -> f64 {
    nu * stats.kinetic_energy.last_mean()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares line through `(ln nu, ln observable)`.
pub fn fit_scaling_exponent(pairs: &[(f64, f64)]) -> Result<ScalingFit> {
    if pairs.len() < 3 {
        return Err(Error::domain(format!("need at least 3 points to fit, got {}", pairs.len())));
    }
    if let Some(&(x, y)) = pairs.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(Error::domain(format!("log-log fit needs positive data, got ({x}, {y})")));
    }
    let n = pairs.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("log-log fit needs at least two distinct abscissae"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if ss_tot <= f64::EPSILON * ys.iter().map(|y| y * y).sum::<f64>() {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(ScalingFit {
        slope,
        intercept,
        r_squared,
    })
}
