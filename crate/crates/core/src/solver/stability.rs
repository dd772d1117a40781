use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Grid, SphereMode};

use super::operator::Operator;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityReport {
    pub dt: f64,
    /// `min(h_min^2 / (2 d nu), 1 / (nu * gershgorin))`.
    pub dt_max: f64,
    /// Spacing-based limit `h_min^2 / (2 d nu)`.
    pub dt_spacing: f64,
    /// Limit from the Gershgorin bound on the assembled operator, which also
    /// sees the wall, origin and curvature rows.
    pub dt_gershgorin: f64,
    pub h_min: f64,
    pub dimensions: usize,
    pub passes: bool,
}

impl StabilityReport {
    /// `Err(Stability)` on failure unless `force` is set.
    pub fn check(&self, force: bool) -> Result<()> {
        if self.passes || force {
            Ok(())
        } else {
            Err(Error::Stability {
                dt: self.dt,
                dt_max: self.dt_max,
            })
        }
    }
}

/// Smallest grid spacing and number of second-difference directions.
pub fn min_spacing(grid: &Grid) -> (f64, usize) {
    match grid {
        Grid::HalfSpace(g) => (g.dy(), 1),
        Grid::Sphere(s) => {
            let r0 = s.r()[0];
            let arc = r0 * s.dtheta();
            match s.mode() {
                SphereMode::Axisymmetric => (s.dr().min(arc), 2),
                SphereMode::Full3d => {
                    let ring = r0 * s.theta()[0].sin() * s.dphi();
                    (s.dr().min(arc).min(ring), 3)
                }
            }
        }
    }
}

pub fn stability_report(dt: f64, nu: f64, grid: &Grid, op: &Operator) -> StabilityReport {
    let (h_min, dimensions) = min_spacing(grid);
    let dt_spacing = h_min * h_min / (2.0 * dimensions as f64 * nu);
    let dt_gershgorin = 1.0 / (nu * op.gershgorin_bound());
    let dt_max = dt_spacing.min(dt_gershgorin);
    StabilityReport {
        dt,
        dt_max,
        dt_spacing,
        dt_gershgorin,
        h_min,
        dimensions,
        passes: dt > 0.0 && dt <= dt_max,
    }
}
