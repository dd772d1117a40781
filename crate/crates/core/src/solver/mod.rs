//! Euler-Maruyama integration of `dz = (nu Lap z + f) dt + g dW` with
//! Navier-slip walls.

mod noise;
mod operator;
mod stability;

pub use noise::{NoiseMode, NoiseStream};
pub use operator::{apply_laplacian, EnergyParts, Operator, TopBoundary};
pub use stability::{min_spacing, stability_report, StabilityReport};

use serde::{Deserialize, Serialize};

use crate::diagnostics::{DiagnosticsSeries, GradientForm};
use crate::error::{Error, Result};
use crate::forcing::{build_forcing, ForcingField, ForcingGeometry, ForcingSpec, Regularization};
use crate::geometry::{
    build_halfspace_grid, build_sphere_grid, BallMesh, ColumnMesh, FieldValues, Grid, SphereMode, VelocityField,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryKind {
    HalfSpace,
    Sphere,
}

impl GeometryKind {
    pub fn label(self) -> &'static str {
        match self {
            GeometryKind::HalfSpace => "halfspace",
            GeometryKind::Sphere => "sphere",
        }
    }
}

/// Every physical and numerical parameter of one simulation variant.
///
/// Serialized with the flat keys of the configuration file; `y_max` is read
/// for the half-space and `R` for the sphere. The optional mesh keys override
/// the Kolmogorov rule: `dy` for the column, `dr`/`dtheta`/`dphi` or
/// `n_theta`/`n_phi` for the ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub geometry: GeometryKind,
    #[serde(default)]
    pub mode: SphereMode,
    pub nu: f64,
    pub delta: f64,
    #[serde(default)]
    pub alpha: f64,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_max: Option<f64>,
    #[serde(default, rename = "R", skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default)]
    pub noise_mode: NoiseMode,
    #[serde(default)]
    pub deterministic_forcing: bool,
    #[serde(default = "one")]
    pub realizations: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub sample_every: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dtheta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dphi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_theta: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_phi: Option<usize>,
    #[serde(default)]
    pub regularization: Regularization,
    #[serde(default)]
    pub top_boundary: TopBoundary,
    #[serde(default)]
    pub gradient: GradientForm,
    #[serde(default = "unit")]
    pub amplitude: f64,
}

fn one() -> usize {
    1
}

fn unit() -> f64 {
    1.0
}

impl SimConfig {
    /// Half-space variant with the reference defaults for everything but
    /// `nu`, `delta` and the noise.
    pub fn halfspace(nu: f64, delta: f64) -> Self {
        SimConfig {
            geometry: GeometryKind::HalfSpace,
            mode: SphereMode::Axisymmetric,
            nu,
            delta,
            alpha: 0.0005,
            dt: 0.005,
            t_final: 1.0,
            y_max: Some(10.0),
            radius: None,
            noise_mode: NoiseMode::NodeIid,
            deterministic_forcing: false,
            realizations: 250,
            seed: 0,
            sample_every: 1,
            dy: None,
            dr: None,
            dtheta: None,
            dphi: None,
            n_theta: None,
            n_phi: None,
            regularization: Regularization::CellAverage,
            top_boundary: TopBoundary::Dirichlet,
            gradient: GradientForm::Covariant,
            amplitude: 1.0,
        }
    }

    pub fn sphere(nu: f64, delta: f64) -> Self {
        SimConfig {
            geometry: GeometryKind::Sphere,
            y_max: None,
            radius: Some(5.0),
            ..SimConfig::halfspace(nu, delta)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("nu", self.nu)?;
        positive("dt", self.dt)?;
        positive("T", self.t_final)?;
        if self.t_final < self.dt * (1.0 - 1e-12) {
            return Err(Error::config(format!("T = {} is shorter than dt = {}", self.t_final, self.dt)));
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::config(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if self.realizations == 0 {
            return Err(Error::config("realizations must be at least 1"));
        }
        if self.sample_every == 0 {
            return Err(Error::config("sample_every must be at least 1"));
        }
        self.n_steps()?;
        self.forcing_spec()?.validate()
    }

    /// `T / dt`, which must be an integer up to round-off.
    pub fn n_steps(&self) -> Result<usize> {
        let q = self.t_final / self.dt;
        let n = q.round();
        if n < 1.0 || (q - n).abs() > 1e-9 * n {
            return Err(Error::config(format!(
                "T / dt must be a whole number of steps, got {q}"
            )));
        }
        Ok(n as usize)
    }

    pub fn forcing_geometry(&self) -> Result<ForcingGeometry> {
        match self.geometry {
            GeometryKind::HalfSpace => self
                .y_max
                .map(|y_max| ForcingGeometry::HalfSpace { y_max })
                .ok_or_else(|| Error::config("half-space configuration needs y_max")),
            GeometryKind::Sphere => self
                .radius
                .map(|radius| ForcingGeometry::Sphere { radius })
                .ok_or_else(|| Error::config("sphere configuration needs R")),
        }
    }

    pub fn forcing_spec(&self) -> Result<ForcingSpec> {
        Ok(ForcingSpec::new(self.delta, self.forcing_geometry()?)
            .with_regularization(self.regularization)
            .with_amplitude(self.amplitude))
    }

    pub fn build_grid(&self) -> Result<Grid> {
        match self.forcing_geometry()? {
            ForcingGeometry::HalfSpace { y_max } => {
                let mesh = self.dy.map_or(ColumnMesh::Kolmogorov, ColumnMesh::Explicit);
                Ok(build_halfspace_grid(self.nu, y_max, mesh)?.into())
            }
            ForcingGeometry::Sphere { radius } => {
                let mesh = match (self.dr, self.dtheta, self.dphi, self.n_theta) {
                    (Some(dr), Some(dtheta), dphi, None) => BallMesh::Explicit {
                        dr,
                        dtheta,
                        dphi: dphi.unwrap_or(dtheta),
                    },
                    (None, None, None, Some(n_theta)) => BallMesh::RadialKolmogorov {
                        n_theta,
                        n_phi: self.n_phi.unwrap_or(2 * n_theta),
                    },
                    (None, None, None, None) => BallMesh::Kolmogorov,
                    _ => {
                        return Err(Error::config(
                            "sphere mesh takes either dr and dtheta (and optionally dphi) or n_theta, not a mix",
                        ))
                    }
                };
                Ok(build_sphere_grid(self.nu, radius, self.mode, mesh)?.into())
            }
        }
    }
}

/// A configured variant with its grid, forcing and operator assembled.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: SimConfig,
    grid: Grid,
    forcing: ForcingField,
    op: Operator,
    n_steps: usize,
    /// Nodes receiving a draw, in draw order; full-3d keeps one node per ring.
    order: Vec<usize>,
    /// Multiplier of the standard normal draw at each node.
    noise_scale: Vec<f64>,
    /// `dt * f` at each node.
    drift: Vec<f64>,
    /// Nodes of one azimuthal ring, for the full-3d projection.
    rings: Option<(usize, usize)>,
    wall: Vec<(usize, f64)>,
}

/// Per-step scratch buffers.
struct Work {
    lap: Vec<f64>,
    xi: Vec<f64>,
}

impl Simulation {
    pub fn new(config: &SimConfig) -> Result<Self> {
        config.validate()?;
        let grid = config.build_grid()?;
        let forcing = build_forcing(&config.forcing_spec()?, &grid)?;
        Self::from_parts(config, grid, forcing)
    }

    pub fn from_parts(config: &SimConfig, grid: Grid, forcing: ForcingField) -> Result<Self> {
        config.validate()?;
        crate::error::check_len(grid.n_nodes(), forcing.values().len())?;
        let op = Operator::new(&grid, config.alpha, config.top_boundary)?;
        let dt = config.dt;
        let w = grid.volume_weights();
        let g = forcing.values();
        let noise_scale = (0..grid.n_nodes())
            .map(|a| {
                if !op.is_free(a) {
                    return 0.0;
                }
                match config.noise_mode {
                    NoiseMode::NodeIid => g[a] * dt.sqrt(),
                    NoiseMode::WhiteNoiseScaled => g[a] * (dt / w[a]).sqrt(),
                    NoiseMode::Off => 0.0,
                }
            })
            .collect();
        let drift = (0..grid.n_nodes())
            .map(|a| {
                if config.deterministic_forcing && op.is_free(a) {
                    dt * g[a]
                } else {
                    0.0
                }
            })
            .collect();
        let rings = match &grid {
            Grid::Sphere(s) if s.mode() == SphereMode::Full3d => Some((s.n_r() * s.n_theta(), s.n_phi())),
            _ => None,
        };
        let mut order = grid.noise_order();
        if let Some((n_rings, n_phi)) = rings {
            order.retain(|&a| a >= n_rings * n_phi || a % n_phi == 0);
        }
        Ok(Simulation {
            n_steps: config.n_steps()?,
            order,
            wall: grid.wall(),
            config: config.clone(),
            grid,
            forcing,
            op,
            noise_scale,
            drift,
            rings,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn forcing(&self) -> &ForcingField {
        &self.forcing
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn stability(&self) -> StabilityReport {
        stability_report(self.config.dt, self.config.nu, &self.grid, &self.op)
    }

    /// Rate at which the noise injects energy, `E d|z|^2_W / dt`: `sum W g^2`
    /// for node-iid increments, `sum g^2` for cell-scaled white noise.
    pub fn noise_energy_rate(&self) -> f64 {
        let dt = self.config.dt;
        self.noise_scale
            .iter()
            .zip(self.grid.volume_weights())
            .map(|(s, w)| s * s * w / dt)
            .sum()
    }

    fn work(&self) -> Work {
        let n = self.grid.n_nodes();
        Work {
            lap: vec![0.0; n],
            xi: vec![0.0; n],
        }
    }

    /// Replaces each azimuthal ring by its mean.
    fn project(&self, z: &mut [f64]) {
        if let Some((n_rings, n_phi)) = self.rings {
            for ring in z.chunks_exact_mut(n_phi).take(n_rings) {
                let mean = ring.iter().sum::<f64>() / n_phi as f64;
                ring.fill(mean);
            }
        }
    }

    /// Advances `z` by one step; `work.lap` must already hold `Lap z`.
    fn advance(&self, z: &mut [f64], work: &mut Work, noise: &NoiseStream, step: usize) -> Result<()> {
        let nu_dt = self.config.nu * self.config.dt;
        let noisy = self.config.noise_mode != NoiseMode::Off;
        if noisy {
            noise.fill(step, &self.order, &mut work.xi);
            if let Some((n_rings, n_phi)) = self.rings {
                for ring in work.xi.chunks_exact_mut(n_phi).take(n_rings) {
                    let x = ring[0];
                    ring.fill(x);
                }
            }
        }
        for a in 0..z.len() {
            let mut next = z[a] + nu_dt * work.lap[a] + self.drift[a];
            if noisy {
                next += self.noise_scale[a] * work.xi[a];
            }
            z[a] = next;
        }
        self.project(z);
        if let Some(node) = z.iter().position(|x| !x.is_finite()) {
            return Err(Error::Numeric {
                realization: noise.realization(),
                step,
                node,
            });
        }
        Ok(())
    }

    /// One Euler-Maruyama step of a velocity field; step `step_index` selects
    /// the noise draws. Full-3d fields come back on the azimuthal ansatz.
    pub fn step(&self, state: &VelocityField, noise: &NoiseStream, step_index: usize) -> Result<VelocityField> {
        state.check_shape(&self.grid)?;
        if let Some(node) = state.first_non_finite() {
            return Err(Error::Numeric {
                realization: noise.realization(),
                step: step_index,
                node,
            });
        }
        let mut z = state.tangential();
        let mut work = self.work();
        self.op.apply(&z, &mut work.lap);
        self.advance(&mut z, &mut work, noise, step_index)?;
        let values = match &state.values {
            FieldValues::Scalar(_) => FieldValues::Scalar(z),
            FieldValues::Vector(_) => FieldValues::Vector(z.into_iter().map(|u| [0.0, 0.0, u]).collect()),
        };
        Ok(VelocityField {
            values,
            time: state.time + self.config.dt,
        })
    }

    /// Steps from `z0` to `T`, calling `visit(step, z)` on every state
    /// including the initial one.
    pub fn trajectory(
        &self,
        z0: &[f64],
        realization: usize,
        mut visit: impl FnMut(usize, &[f64], &[f64]),
    ) -> Result<Vec<f64>> {
        crate::error::check_len(self.grid.n_nodes(), z0.len())?;
        let noise = NoiseStream::new(self.config.seed, realization);
        let mut z = z0.to_vec();
        for &f in self.op.fixed_nodes() {
            z[f] = 0.0;
        }
        self.project(&mut z);
        let mut work = self.work();
        for n in 0..self.n_steps {
            self.op.apply(&z, &mut work.lap);
            visit(n, &z, &work.lap);
            self.advance(&mut z, &mut work, &noise, n)?;
        }
        self.op.apply(&z, &mut work.lap);
        visit(self.n_steps, &z, &work.lap);
        Ok(z)
    }

    /// Diagnostics of one realization started from rest.
    pub fn run_realization(&self, realization: usize) -> Result<DiagnosticsSeries> {
        let z0 = vec![0.0; self.grid.n_nodes()];
        self.run_from(&z0, realization)
    }

    pub fn run_from(&self, z0: &[f64], realization: usize) -> Result<DiagnosticsSeries> {
        let nu = self.config.nu;
        let dt = self.config.dt;
        let every = self.config.sample_every;
        let last = self.n_steps;
        let w = self.grid.volume_weights();
        let mut series = DiagnosticsSeries::with_capacity(last / every + 2);
        let (mut cum_diss, mut cum_slip) = (0.0, 0.0);
        self.trajectory(z0, realization, |n, z, lap| {
            // Q = -<z, Lap z>_W; its wall and curvature pieces are cheap
            let q = -z.iter().zip(lap).zip(w).map(|((a, b), w)| a * b * w).sum::<f64>();
            let q = q.max(0.0);
            let robin = self.op.robin_energy(z);
            let mut grad = (q - robin).max(0.0);
            if self.config.gradient == GradientForm::Componentwise {
                grad = (grad - self.op.curvature_energy(z)).max(0.0);
            }
            if n % every == 0 || n == last {
                let ke = z.iter().zip(w).map(|(a, w)| a * a * w).sum();
                let wall = self.wall.iter().map(|&(j, s)| s * z[j] * z[j]).sum();
                series.push(n as f64 * dt, ke, nu * grad, wall, nu * q, cum_diss, cum_slip);
            }
            cum_diss += dt * nu * grad;
            cum_slip += dt * nu * q;
        })?;
        Ok(series)
    }
}

/// Explicit-scheme limit for `config` on `grid`.
pub fn validate_stability(config: &SimConfig, grid: &Grid) -> Result<StabilityReport> {
    let op = Operator::new(grid, config.alpha, config.top_boundary)?;
    Ok(stability_report(config.dt, config.nu, grid, &op))
}

/// One step of `state` under `config`.
pub fn step(
    state: &VelocityField,
    forcing: &ForcingField,
    config: &SimConfig,
    grid: &Grid,
    noise: &NoiseStream,
    step_index: usize,
) -> Result<VelocityField> {
    Simulation::from_parts(config, grid.clone(), forcing.clone())?.step(state, noise, step_index)
}

pub fn run_realization(
    config: &SimConfig,
    grid: &Grid,
    forcing: &ForcingField,
    realization: usize,
) -> Result<DiagnosticsSeries> {
    Simulation::from_parts(config, grid.clone(), forcing.clone())?.run_realization(realization)
}
