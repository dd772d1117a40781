//! Finite-volume Laplacian with Navier-slip walls.
//!
//! The operator is the negative gradient (in the cell-volume inner product)
//! of the discrete energy
//!
//! ```text
//! Q(z) = sum_edges c_e (z_a - z_b)^2 + sum_a m_a z_a^2 + sum_k c_k (z_k - zbar)^2 + alpha |z|^2_wall
//! ```
//!
//! where the third sum ties the innermost sphere shell to its mean `zbar`,
//! the value assigned to the origin. Then `<z, Lap z>_W = -Q(z)` exactly, so
//! the unforced scheme dissipates energy and the energy budget closes at the
//! discrete level. Over the plate the wall row reproduces the ghost-node
//! closure `w_{-1} = w_1 - 2 dy alpha w_0`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::geometry::{Grid, HalfSpaceGrid, SphereGrid, WALL_INDEX};

/// Condition at the top of the truncated column.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopBoundary {
    /// `w = 0` at the last node.
    #[default]
    Dirichlet,
    /// Zero flux. A last node whose cell lies wholly above `y_max` carries
    /// no unknown: it is detached and held at zero.
    Neumann,
}

#[derive(Debug, Clone)]
pub struct Operator {
    inv_w: Vec<f64>,
    diag: Vec<f64>,
    offsets: Vec<usize>,
    neighbours: Vec<(usize, f64)>,
    edges: Vec<(usize, usize, f64)>,
    /// Metric term from the turning of `phi_hat`: `W / (r sin(theta))^2`.
    curvature: Vec<f64>,
    /// `alpha` times the wall surface weight.
    robin: Vec<(usize, f64)>,
    origin: Option<Origin>,
    fixed: Vec<usize>,
    free: Vec<bool>,
}

#[derive(Debug, Clone)]
struct Origin {
    nodes: Vec<usize>,
    /// Normalized shell-mean weights.
    weights: Vec<f64>,
    coupling: Vec<f64>,
}

impl Origin {
    fn mean(&self, z: &[f64]) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&n, w)| w * z[n]).sum()
    }
}

/// Energy split into its parts, before multiplying by `nu`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EnergyParts {
    /// Differences along grid edges, including the origin ties.
    pub differences: f64,
    /// Rotation of the azimuthal unit vector; zero over the plate.
    pub curvature: f64,
    /// `alpha |z|^2` on the wall.
    pub robin: f64,
}

impl EnergyParts {
    pub fn covariant(&self) -> f64 {
        self.differences + self.curvature
    }
}

struct Builder {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    curvature: Vec<f64>,
    robin: Vec<(usize, f64)>,
}

impl Builder {
    fn new(n: usize) -> Self {
        Builder {
            n,
            edges: Vec::new(),
            curvature: vec![0.0; n],
            robin: Vec::new(),
        }
    }

    fn edge(&mut self, a: usize, b: usize, c: f64) {
        if c > 0.0 {
            self.edges.push((a, b, c));
        }
    }

    fn finish(self, weights: &[f64], origin: Option<Origin>, fixed: Vec<usize>) -> Operator {
        let n = self.n;
        let mut diag = self.curvature.clone();
        for &(a, c) in &self.robin {
            diag[a] += c;
        }
        let mut lists: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(a, b, c) in &self.edges {
            diag[a] += c;
            diag[b] += c;
            lists[a].push((b, c));
            lists[b].push((a, c));
        }
        if let Some(o) = &origin {
            for (&node, &c) in o.nodes.iter().zip(&o.coupling) {
                diag[node] += c;
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbours = Vec::new();
        offsets.push(0);
        for l in lists {
            neighbours.extend(l);
            offsets.push(neighbours.len());
        }
        let mut free = vec![true; n];
        for &f in &fixed {
            free[f] = false;
        }
        Operator {
            inv_w: weights.iter().map(|&w| if w > 0.0 { 1.0 / w } else { 0.0 }).collect(),
            diag,
            offsets,
            neighbours,
            edges: self.edges,
            curvature: self.curvature,
            robin: self.robin,
            origin,
            fixed,
            free,
        }
    }
}

impl Operator {
    pub fn new(grid: &Grid, alpha: f64, top: TopBoundary) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::config(format!("slip coefficient alpha must be >= 0, got {alpha}")));
        }
        Ok(match grid {
            Grid::HalfSpace(g) => Self::column(g, alpha, top),
            Grid::Sphere(g) => Self::ball(g, alpha),
        })
    }

    fn column(g: &HalfSpaceGrid, alpha: f64, top: TopBoundary) -> Self {
        let n = g.n_nodes();
        let dy = g.dy();
        let top_index = g.top_index();
        let detached = top == TopBoundary::Neumann && g.volume_weights()[top_index] == 0.0;
        let mut b = Builder::new(n);
        for (j, &e) in g.edge_lengths().iter().enumerate() {
            if !(detached && j + 1 == top_index) {
                b.edge(j, j + 1, e / (dy * dy));
            }
        }
        b.robin.push((WALL_INDEX, alpha));
        let fixed = if top == TopBoundary::Dirichlet || detached {
            vec![top_index]
        } else {
            Vec::new()
        };
        b.finish(g.volume_weights(), None, fixed)
    }

    fn ball(g: &SphereGrid, alpha: f64) -> Self {
        let (nr, nt, np) = (g.n_r(), g.n_theta(), g.n_phi());
        let dr = g.dr();
        let dtheta = g.dtheta();
        let dphi = g.dphi();
        let w = g.volume_weights();
        let mut b = Builder::new(g.n_nodes());
        let solid = |k: usize| {
            let (lo, hi) = g.theta_bounds(k);
            (lo.cos() - hi.cos()) * dphi
        };
        for i in 0..nr {
            let ri = g.r()[i];
            let (rlo, rhi) = g.r_bounds(i);
            for k in 0..nt {
                let st = g.theta()[k].sin();
                for m in 0..np {
                    let a = g.index(i, k, m);
                    if i + 1 < nr {
                        let rf = 0.5 * (ri + g.r()[i + 1]);
                        b.edge(a, g.index(i + 1, k, m), rf * rf * solid(k) / dr);
                    }
                    if k + 1 < nt {
                        let sf = g.theta_bounds(k).1.sin();
                        b.edge(a, g.index(i, k + 1, m), sf * (rhi - rlo) * dphi / dtheta);
                    }
                    if np > 1 && (m + 1 < np || np > 2) {
                        let next = g.index(i, k, (m + 1) % np);
                        b.edge(a, next, (rhi - rlo) * (dtheta / st) / dphi);
                    }
                    b.curvature[a] = w[a] / (ri * ri * st * st);
                }
            }
        }
        for (&node, &area) in g.wall_shell().iter().zip(g.surface_weights()) {
            b.robin.push((node, alpha * area));
        }
        let r0 = g.r()[0];
        let nodes = g.origin_shell().to_vec();
        let omega: Vec<f64> = nodes.iter().map(|&n| solid(g.coords(n).1)).collect();
        let total: f64 = omega.iter().sum();
        debug_assert!((total - 4.0 * PI).abs() < 1e-9);
        let origin = Origin {
            weights: omega.iter().map(|o| o / total).collect(),
            coupling: omega.iter().map(|o| r0 * o / 3.0).collect(),
            nodes,
        };
        b.finish(w, Some(origin), Vec::new())
    }

    pub fn n_nodes(&self) -> usize {
        self.inv_w.len()
    }

    /// Nodes held at zero (the Dirichlet top of the column).
    pub fn fixed_nodes(&self) -> &[usize] {
        &self.fixed
    }

    pub fn is_free(&self, node: usize) -> bool {
        self.free[node]
    }

    /// Gershgorin bound `max_a diag_a / W_a` over evolving nodes; the
    /// spectrum of `-Lap` lies in `[0, 2 * bound]`.
    pub fn gershgorin_bound(&self) -> f64 {
        (0..self.n_nodes())
            .filter(|&a| self.free[a])
            .map(|a| self.diag[a] * self.inv_w[a])
            .fold(0.0, f64::max)
    }

    /// `out = Lap z` at every node; fixed nodes get 0.
    pub fn apply(&self, z: &[f64], out: &mut [f64]) {
        let zbar = self.origin.as_ref().map_or(0.0, |o| o.mean(z));
        for a in 0..z.len() {
            if !self.free[a] {
                out[a] = 0.0;
                continue;
            }
            let mut s = -self.diag[a] * z[a];
            for &(b, c) in &self.neighbours[self.offsets[a]..self.offsets[a + 1]] {
                s += c * z[b];
            }
            out[a] = s * self.inv_w[a];
        }
        if let Some(o) = &self.origin {
            for (&node, &c) in o.nodes.iter().zip(&o.coupling) {
                out[node] += c * zbar * self.inv_w[node];
            }
        }
    }

    pub fn energy_parts(&self, z: &[f64]) -> EnergyParts {
        let mut differences: f64 = self.edges.iter().map(|&(a, b, c)| c * (z[a] - z[b]).powi(2)).sum();
        if let Some(o) = &self.origin {
            let zbar = o.mean(z);
            differences += o
                .nodes
                .iter()
                .zip(&o.coupling)
                .map(|(&n, c)| c * (z[n] - zbar).powi(2))
                .sum::<f64>();
        }
        EnergyParts {
            differences,
            curvature: self.curvature_energy(z),
            robin: self.robin_energy(z),
        }
    }

    /// `alpha |z|^2` on the wall.
    pub fn robin_energy(&self, z: &[f64]) -> f64 {
        self.robin.iter().map(|&(n, c)| c * z[n] * z[n]).sum()
    }

    /// The `|z|^2 / (r sin(theta))^2` part of the gradient energy.
    pub fn curvature_energy(&self, z: &[f64]) -> f64 {
        self.curvature.iter().zip(z).map(|(m, x)| m * x * x).sum()
    }

    /// `Q(z) = -<z, Lap z>_W`: gradient energy plus the weighted wall term.
    pub fn slip_energy(&self, z: &[f64]) -> f64 {
        let p = self.energy_parts(z);
        p.differences + p.curvature + p.robin
    }
}

/// `Lap z` for a tangential field on `grid` with slip coefficient `alpha`.
pub fn apply_laplacian(z: &[f64], grid: &Grid, alpha: f64) -> Result<Vec<f64>> {
    check_len(grid.n_nodes(), z.len())?;
    if let Some(node) = z.iter().position(|x| !x.is_finite()) {
        return Err(Error::Numeric {
            realization: 0,
            step: 0,
            node,
        });
    }
    let op = Operator::new(grid, alpha, TopBoundary::Dirichlet)?;
    let mut out = vec![0.0; z.len()];
    op.apply(z, &mut out);
    Ok(out)
}
