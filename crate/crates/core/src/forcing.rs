//! Boundary-singular amplitude `g = dist^{-delta/2}` for the noise and the
//! deterministic drift.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{FieldValues, Grid, VelocityField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForcingGeometry {
    HalfSpace { y_max: f64 },
    Sphere { radius: f64 },
}

/// Treatment of the wall node, where `dist^{-delta/2}` is infinite.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regularization {
    /// Mean of `u^{-delta/2}` over `[0, h]`: `h^{-delta/2} / (1 - delta/2)`.
    #[default]
    CellAverage,
    /// Evaluate at `dist + h/2`.
    HalfCellOffset,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForcingSpec {
    pub delta: f64,
    pub geometry: ForcingGeometry,
    #[serde(default)]
    pub regularization: Regularization,
    #[serde(default = "unit")]
    pub amplitude: f64,
}

fn unit() -> f64 {
    1.0
}

impl ForcingSpec {
    pub fn new(delta: f64, geometry: ForcingGeometry) -> Self {
        ForcingSpec {
            delta,
            geometry,
            regularization: Regularization::default(),
            amplitude: 1.0,
        }
    }

    pub fn with_regularization(mut self, regularization: Regularization) -> Self {
        self.regularization = regularization;
        self
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::config(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !self.amplitude.is_finite() {
            return Err(Error::config("forcing amplitude must be finite"));
        }
        Ok(())
    }
}

/// Per-node amplitude of the forcing: the vertical component over the plate,
/// the `phi_hat` component in the ball.
#[derive(Debug, Clone)]
pub struct ForcingField {
    spec: ForcingSpec,
    values: Vec<f64>,
}

impl ForcingField {
    pub fn spec(&self) -> &ForcingSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The forcing as a tangential velocity-shaped field on its grid.
    pub fn to_field(&self, grid: &Grid) -> VelocityField {
        let mut f = VelocityField::zeros(grid);
        match &mut f.values {
            FieldValues::Scalar(v) => v.copy_from_slice(&self.values),
            FieldValues::Vector(v) => v.iter_mut().zip(&self.values).for_each(|(c, g)| c[2] = *g),
        }
        f
    }
}

fn wall_value(delta: f64, h: f64, rule: Regularization) -> f64 {
    match rule {
        Regularization::CellAverage => h.powf(-delta / 2.0) / (1.0 - delta / 2.0),
        Regularization::HalfCellOffset => (0.5 * h).powf(-delta / 2.0),
    }
}

pub fn build_forcing(spec: &ForcingSpec, grid: &Grid) -> Result<ForcingField> {
    spec.validate()?;
    match (spec.geometry, grid) {
        (ForcingGeometry::HalfSpace { y_max }, Grid::HalfSpace(g)) if (y_max - g.y_max()).abs() <= 1e-12 * y_max => {}
        (ForcingGeometry::Sphere { radius }, Grid::Sphere(g)) if (radius - g.radius()).abs() <= 1e-12 * radius => {}
        _ => return Err(Error::config("forcing geometry does not match the grid")),
    }
    let h = grid.normal_spacing();
    let values = grid
        .wall_distance()
        .into_iter()
        .map(|d| {
            let g = if d < 0.5 * h {
                match spec.regularization {
                    Regularization::CellAverage => wall_value(spec.delta, h, spec.regularization),
                    Regularization::HalfCellOffset => (d + 0.5 * h).powf(-spec.delta / 2.0),
                }
            } else {
                d.powf(-spec.delta / 2.0)
            };
            spec.amplitude * g
        })
        .collect();
    Ok(ForcingField { spec: *spec, values })
}

/// `int_D |g|^2`: `8 pi R^{3-delta} / ((1-delta)(2-delta)(3-delta))` in the
/// ball, `y_max^{1-delta} / (1-delta)` per unit area over the plate.
pub fn forcing_l2_norm_sq(spec: &ForcingSpec) -> Result<f64> {
    let d = spec.delta;
    if d >= 1.0 {
        return Err(Error::domain(format!(
            "int |g|^2 diverges for delta >= 1 (got {d})"
        )));
    }
    if d < 0.0 {
        return Err(Error::domain(format!("delta must be non-negative, got {d}")));
    }
    let a2 = spec.amplitude * spec.amplitude;
    Ok(match spec.geometry {
        ForcingGeometry::HalfSpace { y_max } => a2 * y_max.powf(1.0 - d) / (1.0 - d),
        ForcingGeometry::Sphere { radius } => {
            a2 * 8.0 * PI * radius.powf(3.0 - d) / ((1.0 - d) * (2.0 - d) * (3.0 - d))
        }
    })
}

/// Largest absolute discrete divergence over interior nodes.
///
/// Scalar fields are tangential by construction (vertical over the plate,
/// azimuthal in the ball) and are checked through their vector embedding.
/// Column vector storage lists the wall-normal component first; sphere vector
/// storage is `(u_r, u_theta, u_phi)`. The sphere divergence is the
/// finite-volume flux balance with face values averaged from neighbours.
pub fn divergence_residual(field: &VelocityField, grid: &Grid) -> f64 {
    match grid {
        Grid::HalfSpace(g) => match &field.values {
            // w(y) carries no dependence along the plate
            FieldValues::Scalar(_) => 0.0,
            FieldValues::Vector(v) => {
                let dy = g.dy();
                (1..v.len().saturating_sub(1))
                    .map(|j| ((v[j + 1][0] - v[j - 1][0]) / (2.0 * dy)).abs())
                    .fold(0.0, f64::max)
            }
        },
        Grid::Sphere(s) => {
            let u: Vec<[f64; 3]> = match &field.values {
                FieldValues::Scalar(v) => v.iter().map(|&x| [0.0, 0.0, x]).collect(),
                FieldValues::Vector(v) => v.clone(),
            };
            let (nr, nt, np) = (s.n_r(), s.n_theta(), s.n_phi());
            let dphi_span = if np == 1 { 2.0 * PI } else { s.dphi() };
            let mut worst = 0.0f64;
            for i in 1..nr.saturating_sub(1) {
                let (rlo, rhi) = s.r_bounds(i);
                let lr = 0.5 * (rhi * rhi - rlo * rlo);
                for k in 1..nt - 1 {
                    let (tlo, thi) = s.theta_bounds(k);
                    let dcos = tlo.cos() - thi.cos();
                    for m in 0..np {
                        let a = s.index(i, k, m);
                        let face = |b: usize, c: usize| 0.5 * (u[a][c] + u[b][c]);
                        let mut flux = 0.0;
                        flux += rhi * rhi * dcos * dphi_span * face(s.index(i + 1, k, m), 0);
                        flux -= rlo * rlo * dcos * dphi_span * face(s.index(i - 1, k, m), 0);
                        flux += thi.sin() * lr * dphi_span * face(s.index(i, k + 1, m), 1);
                        flux -= tlo.sin() * lr * dphi_span * face(s.index(i, k - 1, m), 1);
                        if np > 1 {
                            let (mp, mm) = ((m + 1) % np, (m + np - 1) % np);
                            let area = lr * s.dtheta();
                            flux += area * face(s.index(i, k, mp), 2);
                            flux -= area * face(s.index(i, k, mm), 2);
                        }
                        worst = worst.max((flux / s.volume_weights()[a]).abs());
                    }
                }
            }
            worst
        }
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use super::*;
    use crate::analysis::quadrature::tanh_sinh;
    use crate::geometry::{build_halfspace_grid, build_sphere_grid, BallMesh, ColumnMesh, SphereMode};

    fn column(nu: f64) -> Grid {
        build_halfspace_grid(nu, 10.0, ColumnMesh::Kolmogorov).unwrap().into()
    }

    fn ball(nu: f64, mode: SphereMode, mesh: BallMesh) -> Grid {
        build_sphere_grid(nu, 5.0, mode, mesh).unwrap().into()
    }

    fn plate(delta: f64) -> ForcingSpec {
        ForcingSpec::new(delta, ForcingGeometry::HalfSpace { y_max: 10.0 })
    }

    fn sphere(delta: f64) -> ForcingSpec {
        ForcingSpec::new(delta, ForcingGeometry::Sphere { radius: 5.0 })
    }

    #[test]
    fn plate_amplitude_at_y4() {
        // dy = 1 puts a node at y = 4
        let g = build_forcing(&plate(0.75), &column(1.0)).unwrap();
        assert_relative_eq!(g.values()[4], 0.594_603_557_501_360_5, max_relative = 1e-14);
    }

    #[test]
    fn sphere_amplitude_at_r1() {
        // dr = 2/3 fits 8 shells with the second at r = 1
        let grid = ball(0.5, SphereMode::Axisymmetric, BallMesh::Explicit { dr: 2.0 / 3.0, dtheta: 0.5, dphi: 1.0 });
        let Grid::Sphere(s) = &grid else { unreachable!() };
        assert_eq!(s.n_r(), 8);
        assert_relative_eq!(s.r()[1], 1.0, max_relative = 1e-14);
        let g = build_forcing(&sphere(0.75), &grid).unwrap();
        assert_relative_eq!(g.values()[s.index(1, 3, 0)], 0.594_603_557_501_360_5, max_relative = 1e-13);
    }

    #[test]
    fn vanishing_delta_gives_unit_amplitude() {
        let g = build_forcing(&plate(1e-14), &column(0.25)).unwrap();
        assert!(g.values()[1..].iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn wall_regularizations() {
        let grid = column(0.1);
        let h = grid.normal_spacing();
        let avg = build_forcing(&plate(0.75), &grid).unwrap();
        let off = build_forcing(&plate(0.75).with_regularization(Regularization::HalfCellOffset), &grid).unwrap();
        assert_relative_eq!(avg.values()[0], h.powf(-0.375) / 0.625, max_relative = 1e-14);
        assert_relative_eq!(off.values()[0], (0.5 * h).powf(-0.375), max_relative = 1e-14);
        assert_eq!(avg.values()[1..], off.values()[1..]);
    }

    #[test]
    fn regularizations_agree_within_a_quarter() {
        for delta in [0.1, 0.25, 0.5, 0.6, 0.75] {
            for h in [1.0, 0.3, 0.05] {
                let a = wall_value(delta, h, Regularization::CellAverage);
                let b = wall_value(delta, h, Regularization::HalfCellOffset);
                assert!((a / b - 1.0).abs() <= 0.25, "delta {delta}: ratio {}", a / b);
            }
        }
    }

    #[test]
    fn rejects_delta_outside_unit_interval() {
        for delta in [0.0, 1.0, 1.5, -0.2] {
            assert!(matches!(build_forcing(&plate(delta), &column(0.5)), Err(Error::Config(_))));
        }
        assert!(build_forcing(&sphere(0.5), &column(0.5)).is_err());
    }

    #[test]
    fn l2_norm_examples() {
        assert_relative_eq!(forcing_l2_norm_sq(&sphere(0.75)).unwrap(), 1336.256_496_537_3, max_relative = 1e-12);
        assert_relative_eq!(
            forcing_l2_norm_sq(&sphere(0.0)).unwrap(),
            4.0 / 3.0 * PI * 125.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(forcing_l2_norm_sq(&plate(0.5)).unwrap(), 2.0 * 10f64.sqrt(), max_relative = 1e-14);
        assert!(matches!(forcing_l2_norm_sq(&sphere(1.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn l2_closed_form_matches_quadrature() {
        for delta in [0.1, 0.25, 0.5, 0.75, 0.9] {
            // singular end moved to the origin: u = R - r
            let q = tanh_sinh(|u| 4.0 * PI * (5.0 - u).powi(2) * u.powf(-delta), 0.0, 5.0, 1e-13);
            let closed = forcing_l2_norm_sq(&sphere(delta)).unwrap();
            assert_relative_eq!(q.value, closed, max_relative = 1e-10);
        }
    }

    #[test]
    fn grid_quadrature_of_g_squared_converges() {
        let exact = forcing_l2_norm_sq(&plate(0.5)).unwrap();
        let errs: Vec<f64> = [0.4, 0.1, 0.025]
            .iter()
            .map(|&dy| {
                let grid: Grid = build_halfspace_grid(1.0, 10.0, ColumnMesh::Explicit(dy)).unwrap().into();
                let g = build_forcing(&plate(0.5), &grid).unwrap();
                let sq: Vec<f64> = g.values().iter().map(|v| v * v).collect();
                (crate::geometry::volume_integral(&sq, &grid).unwrap() - exact).abs()
            })
            .collect();
        assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
        // order at least 1 - delta in h
        assert!(errs[1] / errs[2] >= 4f64.powf(0.5) * 0.9, "{errs:?}");
    }

    #[test]
    fn tangential_forcing_is_divergence_free() {
        let grid = column(0.1);
        let g = build_forcing(&plate(0.75), &grid).unwrap();
        assert_eq!(divergence_residual(&g.to_field(&grid), &grid), 0.0);
        for (mode, mesh) in [
            (SphereMode::Axisymmetric, BallMesh::Kolmogorov),
            (SphereMode::Full3d, BallMesh::RadialKolmogorov { n_theta: 8, n_phi: 8 }),
        ] {
            let grid = ball(0.5, mode, mesh);
            let g = build_forcing(&sphere(0.75), &grid).unwrap();
            assert_eq!(divergence_residual(&g.to_field(&grid), &grid), 0.0);
        }
    }

    #[test]
    fn radial_field_has_divergence_three() {
        let grid = ball(0.5, SphereMode::Full3d, BallMesh::RadialKolmogorov { n_theta: 8, n_phi: 8 });
        let Grid::Sphere(s) = &grid else { unreachable!() };
        let u = (0..s.n_nodes()).map(|n| [s.r()[s.coords(n).0], 0.0, 0.0]).collect();
        let res = divergence_residual(&VelocityField::vector(u), &grid);
        assert_relative_eq!(res, 3.0, max_relative = 1e-10);
    }

    proptest! {
        #[test]
        fn amplitude_grows_toward_the_wall(delta in 0.01f64..0.99, nu in 0.05f64..0.8) {
            let grid = column(nu);
            let g = build_forcing(&plate(delta), &grid).unwrap();
            for w in g.values().windows(2) {
                prop_assert!(w[0] > w[1]);
            }
            prop_assert!(g.values().iter().all(|v| v.is_finite() && *v >= 0.0));
        }

        #[test]
        fn amplitude_monotone_in_delta(d1 in 0.01f64..0.98, step in 0.001f64..0.5) {
            let d2 = (d1 + step).min(0.99);
            prop_assume!(d2 > d1);
            let grid = column(0.3);
            let Grid::HalfSpace(h) = &grid else { unreachable!() };
            let g1 = build_forcing(&plate(d1), &grid).unwrap();
            let g2 = build_forcing(&plate(d2), &grid).unwrap();
            for (j, &y) in h.nodes().iter().enumerate().skip(1) {
                if y < 1.0 {
                    prop_assert!(g2.values()[j] > g1.values()[j]);
                } else if y > 1.0 {
                    prop_assert!(g2.values()[j] < g1.values()[j]);
                }
            }
        }
    }
}
