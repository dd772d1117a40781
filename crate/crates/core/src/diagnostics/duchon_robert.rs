use std::sync::OnceLock;

use crate::analysis::quadrature::tanh_sinh;
use crate::error::{Error, Result};
use crate::geometry::{Grid, VelocityField};

/// Regularized local dissipation at the nodes far enough from both ends of
/// the column for the mollifier to fit.
#[derive(Debug, Clone, PartialEq)]
pub struct DuchonRobert {
    pub ell: f64,
    pub nodes: Vec<usize>,
    pub values: Vec<f64>,
}

fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

fn bump_mass() -> f64 {
    static MASS: OnceLock<f64> = OnceLock::new();
    *MASS.get_or_init(|| tanh_sinh(bump, -1.0, 1.0, 1e-14).value)
}

/// `phi_ell'(t)` for the unit-mass bump of half-width `ell`.
fn mollifier_derivative(t: f64, ell: f64) -> f64 {
    let s = t / ell;
    if s.abs() >= 1.0 {
        return 0.0;
    }
    let ds = -2.0 * s / (1.0 - s * s).powi(2);
    bump(s) * ds / (bump_mass() * ell * ell)
}

/// `D_ell(x) = 1/4 int phi_ell'(t) (delta_t u)^3 dt` with
/// `delta_t u = u(x + t) - u(x)`, for the scalar column profile.
pub fn duchon_robert_density(state: &VelocityField, grid: &Grid, ell: f64) -> Result<DuchonRobert> {
    let Grid::HalfSpace(g) = grid else {
        return Err(Error::Unsupported(
            "the Duchon-Robert density is implemented on the half-space column only".into(),
        ));
    };
    state.check_shape(grid)?;
    let dy = g.dy();
    if !(ell >= 2.0 * dy * (1.0 - 1e-12)) {
        return Err(Error::Resolution(format!(
            "mollifier width {ell} is below two cells (dy = {dy})"
        )));
    }
    let u = state.tangential();
    let y = g.nodes();
    let w = g.volume_weights();
    let reach = (ell / dy).ceil() as usize;
    let mut nodes = Vec::new();
    let mut values = Vec::new();
    for a in 0..y.len() {
        if y[a] <= ell || y[a] + ell >= g.y_max() {
            continue;
        }
        let lo = a.saturating_sub(reach);
        let hi = (a + reach).min(y.len() - 1);
        let d: f64 = (lo..=hi)
            .map(|b| {
                let du = u[b] - u[a];
                w[b] * mollifier_derivative(y[b] - y[a], ell) * du * du * du
            })
            .sum();
        nodes.push(a);
        values.push(0.25 * d);
    }
    Ok(DuchonRobert { ell, nodes, values })
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;
    use crate::geometry::{build_halfspace_grid, build_sphere_grid, BallMesh, ColumnMesh, SphereMode};

    fn column() -> (Grid, Vec<f64>) {
        let g = build_halfspace_grid(1.0, 10.0, ColumnMesh::Explicit(0.01)).unwrap();
        let y = g.nodes().to_vec();
        (g.into(), y)
    }

    #[test]
    fn mollifier_has_unit_mass() {
        assert_relative_eq!(bump_mass(), 0.443_993_816_168_079_4, max_relative = 1e-12);
    }

    #[test]
    fn zero_field_has_zero_density() {
        let (grid, y) = column();
        let d = duchon_robert_density(&VelocityField::scalar(vec![0.0; y.len()]), &grid, 0.1).unwrap();
        assert!(!d.nodes.is_empty());
        assert!(d.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn odd_under_sign_flip() {
        let (grid, y) = column();
        let u: Vec<f64> = y.iter().map(|y| (2.0 * y).sin() + y.sqrt()).collect();
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        let a = duchon_robert_density(&VelocityField::scalar(u), &grid, 0.08).unwrap();
        let b = duchon_robert_density(&VelocityField::scalar(neg), &grid, 0.08).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert_eq!(*x, -*y);
        }
    }

    #[test]
    fn smooth_fields_carry_no_defect() {
        let (grid, y) = column();
        let u = VelocityField::scalar(y.iter().map(|y| 0.7 * y).collect());
        let at = |ell: f64| {
            let d = duchon_robert_density(&u, &grid, ell).unwrap();
            d.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
        };
        let (a, b, c) = (at(0.32), at(0.16), at(0.08));
        assert!(b < a && c < b);
        // quadratic decay in ell
        assert_relative_eq!(a / b, 4.0, max_relative = 0.05);
    }

    #[test]
    fn too_narrow_mollifier_and_sphere() {
        let (grid, y) = column();
        let u = VelocityField::scalar(y);
        assert!(matches!(duchon_robert_density(&u, &grid, 0.015), Err(Error::Resolution(_))));
        let ball: Grid = build_sphere_grid(0.5, 5.0, SphereMode::Axisymmetric, BallMesh::Kolmogorov)
            .unwrap()
            .into();
        let z = VelocityField::zeros(&ball);
        assert!(matches!(duchon_robert_density(&z, &ball, 1.0), Err(Error::Unsupported(_))));
    }
}
