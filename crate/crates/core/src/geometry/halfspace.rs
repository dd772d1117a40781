use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::kolmogorov_length;

/// How the wall-normal spacing of a half-space column is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ColumnMesh {
    /// `dy = nu^{3/4}`.
    Kolmogorov,
    Explicit(f64),
}

/// Uniform column `y_j = j * dy`, `j = 0..=J`, perpendicular to a flat plate.
///
/// The physical domain is `[0, y_max]`; the last node may sit above `y_max`
/// and carries the far-field condition. Quadrature weights are dual cells and
/// edges clipped to `[0, y_max]`, so constants integrate exactly. All
/// integrals are per unit plate area.
#[derive(Debug, Clone)]
pub struct HalfSpaceGrid {
    dy: f64,
    y_max: f64,
    nodes: Vec<f64>,
    volume_weights: Vec<f64>,
    edge_lengths: Vec<f64>,
}

pub const WALL_INDEX: usize = 0;

/// Number of intervals needed to reach `extent` with spacing `h`, tolerant to
/// round-off when `extent / h` is an integer up to a few ulps.
pub(crate) fn ceil_intervals(extent: f64, h: f64) -> usize {
    let q = extent / h;
    let r = q.round();
    if (q - r).abs() <= 1e-9 * r.max(1.0) {
        r as usize
    } else {
        q.ceil() as usize
    }
}

pub fn build_halfspace_grid(nu: f64, y_max: f64, mesh: ColumnMesh) -> Result<HalfSpaceGrid> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::config(format!("viscosity must be positive, got {nu}")));
    }
    if !(y_max > 0.0) || !y_max.is_finite() {
        return Err(Error::config(format!("y_max must be positive, got {y_max}")));
    }
    let dy = match mesh {
        ColumnMesh::Kolmogorov => kolmogorov_length(nu),
        ColumnMesh::Explicit(dy) => {
            if !(dy > 0.0) || dy > y_max / 4.0 * (1.0 + 1e-12) {
                return Err(Error::config(format!(
                    "explicit dy must lie in (0, y_max/4], got {dy}"
                )));
            }
            dy
        }
    };
    let intervals = ceil_intervals(y_max, dy);
    if intervals < 4 {
        return Err(Error::config(format!(
            "column too coarse: {} nodes (need at least 5)",
            intervals + 1
        )));
    }

    let nodes: Vec<f64> = (0..=intervals).map(|j| j as f64 * dy).collect();
    let clip = |y: f64| y.clamp(0.0, y_max);
    let volume_weights = nodes
        .iter()
        .map(|&y| clip(y + 0.5 * dy) - clip(y - 0.5 * dy))
        .collect();
    let edge_lengths = nodes.windows(2).map(|w| clip(w[1]) - clip(w[0])).collect();

    Ok(HalfSpaceGrid {
        dy,
        y_max,
        nodes,
        volume_weights,
        edge_lengths,
    })
}

impl HalfSpaceGrid {
    pub fn dy(&self) -> f64 {
        self.dy
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Index of the last node (`J`).
    pub fn top_index(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn volume_weights(&self) -> &[f64] {
        &self.volume_weights
    }

    /// Length of `[y_j, y_{j+1}] ∩ [0, y_max]`, one entry per edge.
    pub fn edge_lengths(&self) -> &[f64] {
        &self.edge_lengths
    }
}
