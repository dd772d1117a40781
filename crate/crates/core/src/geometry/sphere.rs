use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::halfspace::ceil_intervals;
use super::kolmogorov_length;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SphereMode {
    /// `(r, theta)` nodes; each node stands for a full ring in `phi`.
    #[default]
    Axisymmetric,
    /// `(r, theta, phi)` nodes carrying a 3-vector.
    Full3d,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BallMesh {
    /// `dr = nu^{3/4}` and angular spacings `nu^{3/4} / R`.
    Kolmogorov,
    Explicit { dr: f64, dtheta: f64, dphi: f64 },
    /// Kolmogorov radial spacing with a fixed number of polar (and azimuthal)
    /// cells. Keeps the explicit time step away from the `1/(r sin(theta))^2`
    /// stiffness near the axis.
    RadialKolmogorov { n_theta: usize, n_phi: usize },
}

/// Spherical-coordinate grid of the ball `|x| < R`.
///
/// Radial nodes sit at `(i + 1/2) dr`, with the spacing adjusted so the last
/// node lands on the wall `r = R`. Polar nodes sit at `(k + 1/2) dtheta`, so
/// neither the origin nor the poles carry a node. Node index is
/// `(i * n_theta + k) * n_phi + m`.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    radius: f64,
    mode: SphereMode,
    dr: f64,
    dr_nominal: f64,
    dtheta: f64,
    dphi: f64,
    r: Vec<f64>,
    theta: Vec<f64>,
    phi: Vec<f64>,
    r_bounds: Vec<(f64, f64)>,
    theta_bounds: Vec<(f64, f64)>,
    volume_weights: Vec<f64>,
    wall_shell: Vec<usize>,
    surface_weights: Vec<f64>,
    origin_shell: Vec<usize>,
}

pub fn build_sphere_grid(nu: f64, radius: f64, mode: SphereMode, mesh: BallMesh) -> Result<SphereGrid> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::config(format!("viscosity must be positive, got {nu}")));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::config(format!("ball radius must be positive, got {radius}")));
    }
    let eta = kolmogorov_length(nu);
    let (dr_nominal, n_theta, n_phi) = match mesh {
        BallMesh::Kolmogorov => (
            eta,
            ceil_intervals(PI, eta / radius),
            ceil_intervals(2.0 * PI, eta / radius),
        ),
        BallMesh::Explicit { dr, dtheta, dphi } => {
            if !(dr > 0.0 && dtheta > 0.0 && dphi > 0.0) {
                return Err(Error::config("explicit sphere spacings must be positive"));
            }
            (dr, ceil_intervals(PI, dtheta), ceil_intervals(2.0 * PI, dphi))
        }
        BallMesh::RadialKolmogorov { n_theta, n_phi } => (eta, n_theta, n_phi),
    };
    let n_phi = match mode {
        SphereMode::Axisymmetric => 1,
        SphereMode::Full3d => n_phi,
    };
    if n_theta < 2 || n_phi < 1 {
        return Err(Error::config("sphere needs at least 2 polar cells"));
    }
    if mode == SphereMode::Full3d && n_phi < 4 {
        return Err(Error::config("full3d sphere needs at least 4 azimuthal cells"));
    }

    // N shells with the outermost node on the wall: R = (N - 1/2) dr, dr <= nominal.
    let n_r = ceil_intervals(radius + 0.5 * dr_nominal, dr_nominal);
    if n_r < 5 {
        return Err(Error::config(format!(
            "sphere mesh too coarse: {n_r} radial shells (need at least 5)"
        )));
    }
    let dr = radius / (n_r as f64 - 0.5);
    let dtheta = PI / n_theta as f64;
    let dphi = 2.0 * PI / n_phi as f64;

    let r: Vec<f64> = (0..n_r)
        .map(|i| if i + 1 == n_r { radius } else { (i as f64 + 0.5) * dr })
        .collect();
    let r_bounds: Vec<(f64, f64)> = r
        .iter()
        .map(|&ri| ((ri - 0.5 * dr).max(0.0), (ri + 0.5 * dr).min(radius)))
        .collect();
    let theta: Vec<f64> = (0..n_theta).map(|k| (k as f64 + 0.5) * dtheta).collect();
    let theta_bounds: Vec<(f64, f64)> = (0..n_theta)
        .map(|k| (k as f64 * dtheta, ((k + 1) as f64 * dtheta).min(PI)))
        .collect();
    let phi: Vec<f64> = (0..n_phi).map(|m| m as f64 * dphi).collect();

    let mut volume_weights = Vec::with_capacity(n_r * n_theta * n_phi);
    for &(lo, hi) in &r_bounds {
        let radial = (hi.powi(3) - lo.powi(3)) / 3.0;
        for &(tlo, thi) in &theta_bounds {
            let polar = tlo.cos() - thi.cos();
            for _ in 0..n_phi {
                volume_weights.push(radial * polar * dphi);
            }
        }
    }

    let index = |i: usize, k: usize, m: usize| (i * n_theta + k) * n_phi + m;
    let mut wall_shell = Vec::with_capacity(n_theta * n_phi);
    let mut surface_weights = Vec::with_capacity(n_theta * n_phi);
    let mut origin_shell = Vec::with_capacity(n_theta * n_phi);
    for (k, &(tlo, thi)) in theta_bounds.iter().enumerate() {
        for m in 0..n_phi {
            wall_shell.push(index(n_r - 1, k, m));
            surface_weights.push(radius * radius * (tlo.cos() - thi.cos()) * dphi);
            origin_shell.push(index(0, k, m));
        }
    }

    Ok(SphereGrid {
        radius,
        mode,
        dr,
        dr_nominal,
        dtheta,
        dphi,
        r,
        theta,
        phi,
        r_bounds,
        theta_bounds,
        volume_weights,
        wall_shell,
        surface_weights,
        origin_shell,
    })
}

impl SphereGrid {
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn mode(&self) -> SphereMode {
        self.mode
    }

    /// Actual radial spacing.
    pub fn dr(&self) -> f64 {
        self.dr
    }

    /// Requested radial spacing before fitting the wall node onto `r = R`.
    pub fn dr_nominal(&self) -> f64 {
        self.dr_nominal
    }

    pub fn dtheta(&self) -> f64 {
        self.dtheta
    }

    pub fn dphi(&self) -> f64 {
        self.dphi
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn n_r(&self) -> usize {
        self.r.len()
    }

    pub fn n_theta(&self) -> usize {
        self.theta.len()
    }

    pub fn n_phi(&self) -> usize {
        self.phi.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.volume_weights.len()
    }

    pub fn index(&self, i: usize, k: usize, m: usize) -> usize {
        (i * self.n_theta() + k) * self.n_phi() + m
    }

    /// Inverse of [`SphereGrid::index`].
    pub fn coords(&self, node: usize) -> (usize, usize, usize) {
        let m = node % self.n_phi();
        let rest = node / self.n_phi();
        (rest / self.n_theta(), rest % self.n_theta(), m)
    }

    /// Radial extent `[lo, hi]` of the dual cell of shell `i`.
    pub fn r_bounds(&self, i: usize) -> (f64, f64) {
        self.r_bounds[i]
    }

    pub fn theta_bounds(&self, k: usize) -> (f64, f64) {
        self.theta_bounds[k]
    }

    pub fn volume_weights(&self) -> &[f64] {
        &self.volume_weights
    }

    /// Nodes on `r = R`.
    pub fn wall_shell(&self) -> &[usize] {
        &self.wall_shell
    }

    /// Surface weights `R^2 sin(theta) dtheta dphi` (exact cell areas), aligned with `wall_shell`.
    pub fn surface_weights(&self) -> &[f64] {
        &self.surface_weights
    }

    /// Nodes of the innermost shell.
    pub fn origin_shell(&self) -> &[usize] {
        &self.origin_shell
    }

    /// Cartesian position of a node.
    pub fn position(&self, node: usize) -> [f64; 3] {
        let (i, k, m) = self.coords(node);
        let (r, t, p) = (self.r[i], self.theta[k], self.phi[m]);
        [r * t.sin() * p.cos(), r * t.sin() * p.sin(), r * t.cos()]
    }

    /// Cartesian components of the local unit vectors `(r_hat, theta_hat, phi_hat)` at `(theta, phi)`.
    pub fn local_basis(theta: f64, phi: f64) -> [[f64; 3]; 3] {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        [
            [st * cp, st * sp, ct],
            [ct * cp, ct * sp, -st],
            [-sp, cp, 0.0],
        ]
    }
}
