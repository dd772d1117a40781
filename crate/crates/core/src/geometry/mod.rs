//! Discrete domains: a wall-normal column over a flat plate and a spherical
//! grid of the ball, with volume and surface quadrature.

mod field;
mod halfspace;
mod sphere;

pub use field::{FieldValues, VelocityField};
pub use halfspace::{build_halfspace_grid, ColumnMesh, HalfSpaceGrid, WALL_INDEX};
pub use sphere::{build_sphere_grid, BallMesh, SphereGrid, SphereMode};

use crate::error::{check_len, Result};

/// Kolmogorov dissipation length `nu^{3/4}` used as the default mesh size.
pub fn kolmogorov_length(nu: f64) -> f64 {
    nu.powf(0.75)
}

#[derive(Debug, Clone)]
pub enum Grid {
    HalfSpace(HalfSpaceGrid),
    Sphere(SphereGrid),
}

impl From<HalfSpaceGrid> for Grid {
    fn from(g: HalfSpaceGrid) -> Self {
        Grid::HalfSpace(g)
    }
}

impl From<SphereGrid> for Grid {
    fn from(g: SphereGrid) -> Self {
        Grid::Sphere(g)
    }
}

impl Grid {
    pub fn n_nodes(&self) -> usize {
        match self {
            Grid::HalfSpace(g) => g.n_nodes(),
            Grid::Sphere(g) => g.n_nodes(),
        }
    }

    pub fn volume_weights(&self) -> &[f64] {
        match self {
            Grid::HalfSpace(g) => g.volume_weights(),
            Grid::Sphere(g) => g.volume_weights(),
        }
    }

    /// Boundary nodes paired with their surface weights. The plate has a
    /// single wall node of unit weight (per unit plate area).
    pub fn wall(&self) -> Vec<(usize, f64)> {
        match self {
            Grid::HalfSpace(_) => vec![(WALL_INDEX, 1.0)],
            Grid::Sphere(g) => g
                .wall_shell()
                .iter()
                .copied()
                .zip(g.surface_weights().iter().copied())
                .collect(),
        }
    }

    /// Distance from each node to the wall (`y` or `R - r`).
    pub fn wall_distance(&self) -> Vec<f64> {
        match self {
            Grid::HalfSpace(g) => g.nodes().to_vec(),
            Grid::Sphere(g) => (0..g.n_nodes())
                .map(|n| g.radius() - g.r()[g.coords(n).0])
                .collect(),
        }
    }

    /// Wall-normal mesh spacing.
    pub fn normal_spacing(&self) -> f64 {
        match self {
            Grid::HalfSpace(g) => g.dy(),
            Grid::Sphere(g) => g.dr(),
        }
    }

    /// Order in which per-node noise draws are consumed: wall-adjacent nodes
    /// first, so grids of different resolution share the draws nearest the
    /// wall under a common seed.
    pub fn noise_order(&self) -> Vec<usize> {
        match self {
            Grid::HalfSpace(g) => (0..g.n_nodes()).collect(),
            Grid::Sphere(g) => {
                let mut order = Vec::with_capacity(g.n_nodes());
                for i in (0..g.n_r()).rev() {
                    for k in 0..g.n_theta() {
                        for m in 0..g.n_phi() {
                            order.push(g.index(i, k, m));
                        }
                    }
                }
                order
            }
        }
    }

    /// Measure of the domain represented by the grid.
    pub fn measure(&self) -> f64 {
        self.volume_weights().iter().sum()
    }

    pub fn describe(&self) -> String {
        match self {
            Grid::HalfSpace(g) => format!("halfspace column: {} nodes, dy = {:.6}", g.n_nodes(), g.dy()),
            Grid::Sphere(g) => format!(
                "sphere {:?}: {} x {} x {} nodes, dr = {:.6}",
                g.mode(),
                g.n_r(),
                g.n_theta(),
                g.n_phi(),
                g.dr()
            ),
        }
    }
}

/// `sum_j values_j * w_j` with the grid's volume weights.
pub fn volume_integral(values: &[f64], grid: &Grid) -> Result<f64> {
    let w = grid.volume_weights();
    check_len(w.len(), values.len())?;
    Ok(values.iter().zip(w).map(|(v, w)| v * w).sum())
}

/// Boundary integral of node values, read off the wall nodes directly.
pub fn surface_integral(values: &[f64], grid: &Grid) -> Result<f64> {
    check_len(grid.n_nodes(), values.len())?;
    Ok(grid.wall().into_iter().map(|(n, a)| values[n] * a).sum())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use approx::assert_relative_eq;

    use super::*;
    use crate::error::Error;

    #[test]
    fn kolmogorov_column_at_nu_005() {
        let g = build_halfspace_grid(0.05, 10.0, ColumnMesh::Kolmogorov).unwrap();
        assert_relative_eq!(g.dy(), 0.105_737_126, max_relative = 1e-8);
        assert_eq!(g.top_index(), 95);
        assert!(g.nodes()[95] >= 10.0);
    }

    #[test]
    fn unit_viscosity_gives_unit_spacing() {
        let g = build_halfspace_grid(1.0, 10.0, ColumnMesh::Kolmogorov).unwrap();
        assert_eq!(g.dy(), 1.0);
        assert_eq!(g.n_nodes(), 11);
    }

    #[test]
    fn explicit_spacing_hits_the_top_exactly() {
        let g = build_halfspace_grid(0.5, 10.0, ColumnMesh::Explicit(0.1)).unwrap();
        assert_eq!(g.n_nodes(), 101);
        assert_relative_eq!(g.nodes()[100], 10.0, max_relative = 1e-12);
    }

    #[test]
    fn column_rejects_bad_input() {
        assert!(matches!(
            build_halfspace_grid(0.0, 10.0, ColumnMesh::Kolmogorov),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            build_halfspace_grid(0.1, -1.0, ColumnMesh::Kolmogorov),
            Err(Error::Config(_))
        ));
        assert!(build_halfspace_grid(0.1, 1.0, ColumnMesh::Explicit(0.3)).is_err());
        // nu = 10: dy = 5.6 gives two intervals on a column of height 10
        assert!(build_halfspace_grid(10.0, 10.0, ColumnMesh::Kolmogorov).is_err());
    }

    #[test]
    fn column_weights_sum_to_height() {
        for nu in [0.5, 0.25, 0.1, 0.075, 0.05, 0.013] {
            let g: Grid = build_halfspace_grid(nu, 10.0, ColumnMesh::Kolmogorov).unwrap().into();
            let ones = vec![1.0; g.n_nodes()];
            assert_relative_eq!(volume_integral(&ones, &g).unwrap(), 10.0, max_relative = 1e-12);
            if let Grid::HalfSpace(h) = &g {
                assert_relative_eq!(h.edge_lengths().iter().sum::<f64>(), 10.0, max_relative = 1e-12);
                for w in h.nodes().windows(2) {
                    assert!((w[1] - w[0] - h.dy()).abs() <= 1e-12 * h.dy().max(1.0));
                }
            }
        }
    }

    #[test]
    fn kolmogorov_rule_scales_by_two_to_the_minus_three_quarters() {
        let a = build_halfspace_grid(0.2, 10.0, ColumnMesh::Kolmogorov).unwrap();
        let b = build_halfspace_grid(0.1, 10.0, ColumnMesh::Kolmogorov).unwrap();
        assert_relative_eq!(b.dy() / a.dy(), 2f64.powf(-0.75), max_relative = 1e-14);
    }

    #[test]
    fn sphere_shell_counts() {
        let g = build_sphere_grid(0.5, 5.0, SphereMode::Axisymmetric, BallMesh::Kolmogorov).unwrap();
        assert_relative_eq!(g.dr_nominal(), 0.594_603_557, max_relative = 1e-8);
        assert_eq!(g.n_r(), 9);
        assert!(g.dr() <= g.dr_nominal() && g.dr() > 0.98 * g.dr_nominal());
        assert_eq!(g.n_phi(), 1);
        assert_eq!(*g.r().last().unwrap(), 5.0);

        let g = build_sphere_grid(0.05, 5.0, SphereMode::Axisymmetric, BallMesh::Kolmogorov).unwrap();
        assert_relative_eq!(g.dr_nominal(), 0.105_737_126, max_relative = 1e-8);
        assert_eq!(g.n_r(), 48);
    }

    #[test]
    fn sphere_rejects_nonpositive_radius() {
        for r in [0.0, -5.0] {
            assert!(matches!(
                build_sphere_grid(0.5, r, SphereMode::Axisymmetric, BallMesh::Kolmogorov),
                Err(Error::Config(_))
            ));
        }
        assert!(build_sphere_grid(5.0, 5.0, SphereMode::Axisymmetric, BallMesh::Kolmogorov).is_err());
    }

    #[test]
    fn sphere_quadrature_reproduces_volume_and_area() {
        let meshes = [
            (SphereMode::Axisymmetric, BallMesh::Kolmogorov),
            (SphereMode::Axisymmetric, BallMesh::RadialKolmogorov { n_theta: 16, n_phi: 1 }),
            (SphereMode::Full3d, BallMesh::RadialKolmogorov { n_theta: 8, n_phi: 8 }),
        ];
        for (mode, mesh) in meshes {
            let g: Grid = build_sphere_grid(0.5, 5.0, mode, mesh).unwrap().into();
            let ones = vec![1.0; g.n_nodes()];
            assert_relative_eq!(volume_integral(&ones, &g).unwrap(), 4.0 / 3.0 * PI * 125.0, max_relative = 1e-3);
            assert_relative_eq!(surface_integral(&ones, &g).unwrap(), 4.0 * PI * 25.0, max_relative = 1e-3);
            let zeros = vec![0.0; g.n_nodes()];
            assert_eq!(volume_integral(&zeros, &g).unwrap(), 0.0);
            assert_eq!(surface_integral(&zeros, &g).unwrap(), 0.0);
        }
    }

    #[test]
    fn plate_surface_integral_is_wall_value() {
        let g: Grid = build_halfspace_grid(0.25, 10.0, ColumnMesh::Kolmogorov).unwrap().into();
        let mut v = vec![0.0; g.n_nodes()];
        v[0] = 2.5;
        assert_eq!(surface_integral(&v, &g).unwrap(), 2.5);
        assert!(matches!(volume_integral(&v[1..], &g), Err(Error::Shape { .. })));
    }

    #[test]
    fn noise_order_is_a_permutation_starting_at_the_wall() {
        let g: Grid = build_sphere_grid(0.5, 5.0, SphereMode::Axisymmetric, BallMesh::Kolmogorov)
            .unwrap()
            .into();
        let mut order = g.noise_order();
        assert_eq!(order[0], g.wall()[0].0);
        order.sort_unstable();
        assert!(order.iter().enumerate().all(|(i, &n)| i == n));
    }
}
