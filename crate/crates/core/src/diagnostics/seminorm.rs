use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{FieldValues, Grid, SphereGrid, VelocityField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Every pair of points.
    Full,
    /// `n_pairs` pairs drawn independently, each point with probability
    /// proportional to its cell measure.
    MonteCarlo { n_pairs: usize, seed: u64 },
}

/// Virtual points per azimuthal ring when an axisymmetric field is unrolled.
const RING_POINTS: usize = 16;

struct Cloud {
    points: Vec<[f64; 3]>,
    values: Vec<[f64; 3]>,
    weights: Vec<f64>,
    dim: usize,
    h: f64,
}

fn ball_cloud(s: &SphereGrid, state: &VelocityField) -> Cloud {
    let ring = s.n_phi() == 1;
    let copies = if ring { RING_POINTS } else { 1 };
    let mut cloud = Cloud {
        points: Vec::with_capacity(s.n_nodes() * copies),
        values: Vec::with_capacity(s.n_nodes() * copies),
        weights: Vec::with_capacity(s.n_nodes() * copies),
        dim: 3,
        h: s.dr(),
    };
    for n in 0..s.n_nodes() {
        let (i, k, m) = s.coords(n);
        let local = match &state.values {
            FieldValues::Scalar(v) => [0.0, 0.0, v[n]],
            FieldValues::Vector(v) => v[n],
        };
        let (r, theta) = (s.r()[i], s.theta()[k]);
        for c in 0..copies {
            let phi = if ring {
                2.0 * std::f64::consts::PI * c as f64 / copies as f64
            } else {
                s.phi()[m]
            };
            let basis = SphereGrid::local_basis(theta, phi);
            let mut cart = [0.0; 3];
            for (b, u) in basis.iter().zip(local) {
                for d in 0..3 {
                    cart[d] += u * b[d];
                }
            }
            cloud
                .points
                .push([r * theta.sin() * phi.cos(), r * theta.sin() * phi.sin(), r * theta.cos()]);
            cloud.values.push(cart);
            cloud.weights.push(s.volume_weights()[n] / copies as f64);
        }
    }
    cloud
}

fn pair_term(c: &Cloud, a: usize, b: usize, exponent: f64) -> f64 {
    let d2: f64 = (0..3).map(|d| (c.points[a][d] - c.points[b][d]).powi(2)).sum();
    if d2 < 0.25 * c.h * c.h {
        return 0.0;
    }
    let diff: f64 = (0..3).map(|d| (c.values[a][d] - c.values[b][d]).powi(2)).sum();
    diff / d2.powf(0.5 * exponent)
}

/// `int int |f(x) - f(y)|^2 / |x - y|^{d + 2s}` by a double sum over grid
/// points, skipping pairs closer than half a cell. Axisymmetric sphere
/// fields are unrolled onto 16 points per ring as the vector `u_phi phi_hat`.
pub fn hs_seminorm_sq(state: &VelocityField, grid: &Grid, s: f64, sampling: Sampling) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::domain(format!("seminorm order must lie in (0, 1), got {s}")));
    }
    state.check_shape(grid)?;
    let cloud = match grid {
        Grid::HalfSpace(g) => Cloud {
            points: g.nodes().iter().map(|&y| [y, 0.0, 0.0]).collect(),
            values: match &state.values {
                FieldValues::Scalar(v) => v.iter().map(|&x| [x, 0.0, 0.0]).collect(),
                FieldValues::Vector(v) => v.clone(),
            },
            weights: g.volume_weights().to_vec(),
            dim: 1,
            h: g.dy(),
        },
        Grid::Sphere(sg) => ball_cloud(sg, state),
    };
    let exponent = cloud.dim as f64 + 2.0 * s;
    let n = cloud.points.len();
    match sampling {
        Sampling::Full => {
            let mut total = 0.0;
            for a in 0..n {
                let mut row = 0.0;
                for b in a + 1..n {
                    row += cloud.weights[b] * pair_term(&cloud, a, b, exponent);
                }
                total += 2.0 * cloud.weights[a] * row;
            }
            Ok(total)
        }
        Sampling::MonteCarlo { n_pairs, seed } => {
            if n_pairs == 0 {
                return Err(Error::domain("monte carlo sampling needs at least one pair"));
            }
            let pick = WeightedIndex::new(&cloud.weights)
                .map_err(|e| Error::domain(format!("invalid cell measures: {e}")))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let measure: f64 = cloud.weights.iter().sum();
            let mut total = 0.0;
            for _ in 0..n_pairs {
                let (a, b) = (pick.sample(&mut rng), pick.sample(&mut rng));
                total += pair_term(&cloud, a, b, exponent);
            }
            Ok(measure * measure * total / n_pairs as f64)
        }
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use super::*;
    use crate::geometry::{build_halfspace_grid, build_sphere_grid, BallMesh, ColumnMesh, SphereMode};

    fn unit_column(dy: f64) -> (Grid, Vec<f64>) {
        let g = build_halfspace_grid(1.0, 1.0, ColumnMesh::Explicit(dy)).unwrap();
        let y = g.nodes().to_vec();
        (g.into(), y)
    }

    #[test]
    fn identity_profile_at_half_order() {
        // the integrand is 1 off the diagonal, so the sum is 1 - sum W^2
        let exact_sum = |dy: f64| {
            let (grid, y) = unit_column(dy);
            let v = hs_seminorm_sq(&VelocityField::scalar(y), &grid, 0.5, Sampling::Full).unwrap();
            let w2: f64 = grid.volume_weights().iter().map(|w| w * w).sum();
            assert_relative_eq!(v, 1.0 - w2, max_relative = 1e-12);
            v
        };
        let (a, b) = (exact_sum(0.02), exact_sum(0.01));
        // the exclusion defect is first order in dy; Richardson removes it
        assert_relative_eq!(2.0 * b - a, 1.0, max_relative = 5e-4);
    }

    #[test]
    fn constant_and_scaled_fields() {
        let (grid, y) = unit_column(0.05);
        let c = VelocityField::scalar(vec![4.0; y.len()]);
        assert_eq!(hs_seminorm_sq(&c, &grid, 0.3, Sampling::Full).unwrap(), 0.0);
        let f = VelocityField::scalar(y.iter().map(|y| (3.0 * y).sin()).collect());
        let f2 = VelocityField::scalar(y.iter().map(|y| 2.0 * (3.0 * y).sin()).collect());
        let (a, b) = (
            hs_seminorm_sq(&f, &grid, 0.3, Sampling::Full).unwrap(),
            hs_seminorm_sq(&f2, &grid, 0.3, Sampling::Full).unwrap(),
        );
        assert_relative_eq!(b, 4.0 * a, max_relative = 1e-12);
        assert!(a > 0.0);
    }

    #[test]
    fn order_outside_unit_interval() {
        let (grid, y) = unit_column(0.1);
        let f = VelocityField::scalar(y);
        for s in [0.0, 1.0, -0.5, 1.5] {
            assert!(matches!(hs_seminorm_sq(&f, &grid, s, Sampling::Full), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn monte_carlo_estimates_the_full_sum() {
        let (grid, y) = unit_column(0.02);
        let f = VelocityField::scalar(y.iter().map(|y| y * y).collect());
        let full = hs_seminorm_sq(&f, &grid, 0.4, Sampling::Full).unwrap();
        let mc = hs_seminorm_sq(&f, &grid, 0.4, Sampling::MonteCarlo { n_pairs: 400_000, seed: 3 }).unwrap();
        assert_relative_eq!(mc, full, max_relative = 0.02);
        let again = hs_seminorm_sq(&f, &grid, 0.4, Sampling::MonteCarlo { n_pairs: 400_000, seed: 3 }).unwrap();
        assert_eq!(mc, again);
    }

    #[test]
    fn rigid_rotation_about_the_axis() {
        // u_phi = r sin(theta) is the rotation (-y, x, 0): |f(x)-f(y)| = |x_perp - y_perp|
        let grid: Grid = build_sphere_grid(0.5, 5.0, SphereMode::Axisymmetric, BallMesh::RadialKolmogorov { n_theta: 8, n_phi: 1 })
            .unwrap()
            .into();
        let Grid::Sphere(s) = &grid else { unreachable!() };
        let z: Vec<f64> = (0..s.n_nodes())
            .map(|n| {
                let (i, k, _) = s.coords(n);
                s.r()[i] * s.theta()[k].sin()
            })
            .collect();
        let v = hs_seminorm_sq(&VelocityField::scalar(z.clone()), &grid, 0.5, Sampling::Full).unwrap();
        assert!(v > 0.0 && v.is_finite());
        let doubled: Vec<f64> = z.iter().map(|x| 2.0 * x).collect();
        let v2 = hs_seminorm_sq(&VelocityField::scalar(doubled), &grid, 0.5, Sampling::Full).unwrap();
        assert_relative_eq!(v2, 4.0 * v, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn vanishes_only_for_constants(values in prop::collection::vec(-2.0f64..2.0, 11), s in 0.05f64..0.95) {
            let (grid, _) = unit_column(0.1);
            let v = hs_seminorm_sq(&VelocityField::scalar(values.clone()), &grid, s, Sampling::Full).unwrap();
            let spread = values.iter().cloned().fold(f64::MIN, f64::max) - values.iter().cloned().fold(f64::MAX, f64::min);
            prop_assert!(v >= 0.0);
            prop_assert_eq!(v == 0.0, spread == 0.0);
        }
    }
}
