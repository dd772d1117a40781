use crate::error::{check_len, Result};

use super::{Grid, SphereMode};

/// Node values of a velocity field.
///
/// Scalar storage holds the single nonzero component of the reduced
/// representations (vertical velocity over the plate, azimuthal component in
/// the ball). Vector storage holds `(u_r, u_theta, u_phi)` in the local
/// spherical basis.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldValues {
    Scalar(Vec<f64>),
    Vector(Vec<[f64; 3]>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub values: FieldValues,
    pub time: f64,
}

impl VelocityField {
    /// Zero field in the representation the grid expects.
    pub fn zeros(grid: &Grid) -> Self {
        let n = grid.n_nodes();
        let values = match grid {
            Grid::Sphere(s) if s.mode() == SphereMode::Full3d => FieldValues::Vector(vec![[0.0; 3]; n]),
            _ => FieldValues::Scalar(vec![0.0; n]),
        };
        VelocityField { values, time: 0.0 }
    }

    pub fn scalar(values: Vec<f64>) -> Self {
        VelocityField {
            values: FieldValues::Scalar(values),
            time: 0.0,
        }
    }

    pub fn vector(values: Vec<[f64; 3]>) -> Self {
        VelocityField {
            values: FieldValues::Vector(values),
            time: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        match &self.values {
            FieldValues::Scalar(v) => v.len(),
            FieldValues::Vector(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn check_shape(&self, grid: &Grid) -> Result<()> {
        check_len(grid.n_nodes(), self.len())
    }

    /// The tangential component the solver evolves: the scalar itself, or `u_phi`.
    pub fn tangential(&self) -> Vec<f64> {
        match &self.values {
            FieldValues::Scalar(v) => v.clone(),
            FieldValues::Vector(v) => v.iter().map(|c| c[2]).collect(),
        }
    }

    /// `|z|^2` per node.
    pub fn magnitude_sq(&self) -> Vec<f64> {
        match &self.values {
            FieldValues::Scalar(v) => v.iter().map(|x| x * x).collect(),
            FieldValues::Vector(v) => v.iter().map(|c| c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).collect(),
        }
    }

    /// First node holding NaN or infinity.
    pub fn first_non_finite(&self) -> Option<usize> {
        match &self.values {
            FieldValues::Scalar(v) => v.iter().position(|x| !x.is_finite()),
            FieldValues::Vector(v) => v.iter().position(|c| c.iter().any(|x| !x.is_finite())),
        }
    }

    pub fn scale(&mut self, factor: f64) {
        match &mut self.values {
            FieldValues::Scalar(v) => v.iter_mut().for_each(|x| *x *= factor),
            FieldValues::Vector(v) => v.iter_mut().flatten().for_each(|x| *x *= factor),
        }
    }
}
