use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::SphereMode;
use crate::solver::{validate_stability, NoiseMode, SimConfig};

/// How a variant is driven.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    NodeIid,
    WhiteNoiseScaled,
    /// Noise off, drift `f = g`.
    Deterministic,
    /// Noise and drift off.
    Quiet,
}

impl RunMode {
    pub fn apply(self, config: &mut SimConfig) {
        let (noise, drift) = match self {
            RunMode::NodeIid => (NoiseMode::NodeIid, false),
            RunMode::WhiteNoiseScaled => (NoiseMode::WhiteNoiseScaled, false),
            RunMode::Deterministic => (NoiseMode::Off, true),
            RunMode::Quiet => (NoiseMode::Off, false),
        };
        config.noise_mode = noise;
        config.deterministic_forcing = drift;
    }
}

/// Label written to the `mode` column of the sweep table.
pub fn mode_label(config: &SimConfig) -> String {
    match (config.noise_mode, config.deterministic_forcing) {
        (NoiseMode::Off, true) => "deterministic".into(),
        (NoiseMode::Off, false) => "quiet".into(),
        (noise, false) => noise.label().into(),
        (noise, true) => format!("{}+drift", noise.label()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    pub name: String,
    pub config: SimConfig,
}

impl Variant {
    pub fn new(config: SimConfig) -> Self {
        let mut name = format!("nu{}_delta{}_{}", config.nu, config.delta, mode_label(&config));
        if config.mode == SphereMode::Full3d {
            name.push_str("_full3d");
        }
        Variant { name, config }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub name: String,
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    pub variants: Vec<Variant>,
}

fn default_output() -> PathBuf {
    PathBuf::from("results")
}

/// Plan file layout: a base configuration swept over `nu`, `delta` and `modes`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    name: String,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_output")]
    output: PathBuf,
    nu: Vec<f64>,
    delta: Vec<f64>,
    modes: Vec<RunMode>,
    base: SimConfig,
}

#[derive(Serialize)]
struct HashView<'a> {
    name: &'a str,
    seed: u64,
    variants: &'a [Variant],
}

impl ExperimentPlan {
    /// Cartesian product over `nus x deltas x modes`, every variant seeded with `seed`.
    pub fn cartesian(
        name: impl Into<String>,
        seed: u64,
        base: &SimConfig,
        nus: &[f64],
        deltas: &[f64],
        modes: &[RunMode],
    ) -> Self {
        let mut variants = Vec::with_capacity(nus.len() * deltas.len() * modes.len());
        for &mode in modes {
            for &delta in deltas {
                for &nu in nus {
                    let mut config = SimConfig {
                        nu,
                        delta,
                        seed,
                        ..base.clone()
                    };
                    mode.apply(&mut config);
                    if mode == RunMode::Deterministic || mode == RunMode::Quiet {
                        config.realizations = 1;
                    }
                    variants.push(Variant::new(config));
                }
            }
        }
        ExperimentPlan {
            name: name.into(),
            seed,
            output: default_output(),
            variants,
        }
    }

    /// A plan with one variant.
    pub fn single(name: impl Into<String>, config: SimConfig) -> Self {
        ExperimentPlan {
            name: name.into(),
            seed: config.seed,
            output: default_output(),
            variants: vec![Variant::new(config)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::config(format!("invalid plan name {:?}", self.name)));
        }
        let first = self
            .variants
            .first()
            .ok_or_else(|| Error::config(format!("plan {} has no variants", self.name)))?;
        let mut names = HashSet::new();
        for v in &self.variants {
            if v.config.geometry != first.config.geometry {
                return Err(Error::config(format!("plan {} mixes geometries", self.name)));
            }
            if !names.insert(v.name.as_str()) {
                return Err(Error::config(format!("duplicate variant name {}", v.name)));
            }
            v.config.validate()?;
        }
        Ok(())
    }

    /// SHA-256 of the plan content, excluding the output directory.
    pub fn hash(&self) -> String {
        let view = HashView {
            name: &self.name,
            seed: self.seed,
            variants: &self.variants,
        };
        let bytes = serde_json::to_vec(&view).expect("plans serialize");
        hex(&Sha256::digest(bytes))
    }

    /// Scales every stochastic variant to `n` realizations.
    pub fn with_realizations(mut self, n: usize) -> Self {
        for v in &mut self.variants {
            if v.config.noise_mode != NoiseMode::Off {
                v.config.realizations = n;
            }
        }
        self
    }

    pub fn with_output(mut self, output: impl Into<PathBuf>) -> Self {
        self.output = output.into();
        self
    }

    /// Reads a plan from a TOML plan file or from the JSON run manifest of an
    /// earlier run.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let parse = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            msg,
        };
        if path.extension().is_some_and(|e| e == "json") {
            let manifest: super::RunManifest = serde_json::from_str(&text).map_err(|e| parse(e.to_string()))?;
            return Ok(manifest.plan);
        }
        let file: PlanFile = toml::from_str(&text).map_err(|e| parse(e.to_string()))?;
        let mut plan = ExperimentPlan::cartesian(file.name, file.seed, &file.base, &file.nu, &file.delta, &file.modes);
        plan.output = file.output;
        Ok(plan)
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub const VISCOSITIES: [f64; 5] = [0.5, 0.25, 0.1, 0.075, 0.05];
pub const SWEEP_DELTAS: [f64; 4] = [0.25, 0.5, 0.75, 0.9];
pub const PLAN_SEED: u64 = 2024;

/// Largest `dt <= safety * dt_max` dividing `T` into whole steps.
pub fn stable_dt(config: &SimConfig, safety: f64) -> Result<f64> {
    let dt_max = validate_stability(config, &config.build_grid()?)?.dt_max;
    let steps = (config.t_final / (safety * dt_max)).ceil();
    Ok(config.t_final / steps)
}

/// The sphere plan with a stability-derived `dt` per variant.
pub fn sphere_plan(name: &str, mode: SphereMode, n_theta: usize, realizations: usize) -> Result<ExperimentPlan> {
    let base = SimConfig {
        mode,
        n_theta: Some(n_theta),
        n_phi: (mode == SphereMode::Full3d).then_some(2 * n_theta),
        realizations,
        ..SimConfig::sphere(0.5, 0.75)
    };
    let mut plan = ExperimentPlan::cartesian(name, PLAN_SEED, &base, &VISCOSITIES, &[0.75], &[RunMode::NodeIid]);
    for v in &mut plan.variants {
        v.config.dt = stable_dt(&v.config, 0.9)?;
    }
    Ok(plan)
}

/// The canned experiments.
pub fn canned_plans() -> Vec<ExperimentPlan> {
    let half = SimConfig::halfspace(0.5, 0.75);
    let mut plans = vec![
        ExperimentPlan::cartesian("halfspace-stochastic", PLAN_SEED, &half, &VISCOSITIES, &[0.75], &[RunMode::NodeIid]),
        ExperimentPlan::cartesian(
            "halfspace-deterministic",
            PLAN_SEED,
            &half,
            &VISCOSITIES,
            &[0.75],
            &[RunMode::Deterministic],
        ),
        ExperimentPlan::cartesian(
            "halfspace-delta-sweep",
            PLAN_SEED,
            &half,
            &[0.1],
            &SWEEP_DELTAS,
            &[RunMode::NodeIid, RunMode::Deterministic],
        ),
        ExperimentPlan::cartesian(
            "halfspace-smoke",
            PLAN_SEED,
            &SimConfig {
                realizations: 16,
                ..half.clone()
            },
            &VISCOSITIES,
            &[0.75],
            &[RunMode::NodeIid, RunMode::Deterministic],
        ),
    ];
    plans.push(sphere_plan("sphere-stochastic", SphereMode::Axisymmetric, 16, 250).expect("canned sphere plan builds"));
    plans
}

pub fn find_plan(name: &str) -> Option<ExperimentPlan> {
    canned_plans().into_iter().find(|p| p.name == name)
}

/// Work of one variant in node updates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostEstimate {
    pub nodes: usize,
    pub steps: usize,
    pub realizations: usize,
    pub node_steps: f64,
}

pub fn cost_estimate(config: &SimConfig) -> Result<CostEstimate> {
    let nodes = config.build_grid()?.n_nodes();
    let steps = config.n_steps()?;
    Ok(CostEstimate {
        nodes,
        steps,
        realizations: config.realizations,
        node_steps: nodes as f64 * steps as f64 * config.realizations as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::Simulation;

    #[test]
    fn canned_roster() {
        let plans = canned_plans();
        let names: Vec<&str> = plans.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(
            names,
            ["halfspace-stochastic", "halfspace-deterministic", "halfspace-delta-sweep", "halfspace-smoke", "sphere-stochastic"]
        );
        for p in &plans {
            p.validate().unwrap();
            assert!(p.variants.iter().all(|v| v.config.seed == PLAN_SEED));
        }
        let st = &plans[0];
        assert_eq!(st.variants.len(), 5);
        for v in &st.variants {
            let c = &v.config;
            assert_eq!((c.delta, c.alpha, c.y_max, c.dt, c.t_final, c.realizations), (0.75, 0.0005, Some(10.0), 0.005, 1.0, 250));
            assert_eq!(mode_label(c), "node_iid");
        }
        assert!(plans[1].variants.iter().all(|v| mode_label(&v.config) == "deterministic"));
        let sweep = &plans[2];
        assert_eq!(sweep.variants.len(), 8);
        assert!(sweep.variants.iter().all(|v| v.config.nu == 0.1));
        let sphere = &plans[4];
        assert_eq!(sphere.variants.len(), 5);
        for v in &sphere.variants {
            assert_eq!(v.config.radius, Some(5.0));
            assert_eq!(v.config.mode, SphereMode::Axisymmetric);
            let sim = Simulation::new(&v.config).unwrap();
            assert!(sim.stability().passes);
            assert!(sim.n_steps() >= 200);
        }
    }

    #[test]
    fn hash_ignores_output_but_not_content() {
        let p = find_plan("halfspace-smoke").unwrap();
        let q = p.clone().with_output("/elsewhere");
        assert_eq!(p.hash(), q.hash());
        assert_eq!(p.hash().len(), 64);
        let r = p.clone().with_realizations(8);
        assert_ne!(p.hash(), r.hash());
        assert!(r.variants.iter().all(|v| v.config.realizations == if v.config.noise_mode == NoiseMode::Off { 1 } else { 8 }));
    }

    #[test]
    fn invalid_plans() {
        let mut p = find_plan("halfspace-smoke").unwrap();
        p.variants.push(p.variants[0].clone());
        assert!(matches!(p.validate(), Err(Error::Config(_))));
        let mut p = find_plan("halfspace-smoke").unwrap();
        p.variants.push(Variant::new(SimConfig::sphere(0.5, 0.75)));
        assert!(p.validate().is_err());
        let p = ExperimentPlan { variants: vec![], ..find_plan("halfspace-smoke").unwrap() };
        assert!(p.validate().is_err());
    }

    #[test]
    fn plan_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("plan.toml");
        std::fs::write(
            &path,
            r#"
name = "tiny"
seed = 5
nu = [0.5, 0.25]
delta = [0.75]
modes = ["node_iid", "deterministic"]

[base]
geometry = "halfspace"
nu = 0.5
delta = 0.75
alpha = 0.0005
dt = 0.005
T = 0.1
y_max = 10.0
realizations = 4
"#,
        )
        .unwrap();
        let plan = ExperimentPlan::from_path(&path).unwrap();
        plan.validate().unwrap();
        assert_eq!(plan.variants.len(), 4);
        assert!(plan.variants.iter().all(|v| v.config.seed == 5));
        assert_eq!(plan.variants[0].name, "nu0.5_delta0.75_node_iid");
        std::fs::write(&path, "name = 1").unwrap();
        assert!(matches!(ExperimentPlan::from_path(&path), Err(Error::Parse { .. })));
        assert!(matches!(ExperimentPlan::from_path(&dir.path().join("missing.toml")), Err(Error::Io { .. })));
    }

    #[test]
    fn labels() {
        let mut c = SimConfig::halfspace(0.1, 0.75);
        assert_eq!(mode_label(&c), "node_iid");
        c.deterministic_forcing = true;
        assert_eq!(mode_label(&c), "node_iid+drift");
        RunMode::Quiet.apply(&mut c);
        assert_eq!(mode_label(&c), "quiet");
        RunMode::WhiteNoiseScaled.apply(&mut c);
        assert_eq!(mode_label(&c), "white_noise_scaled");
    }

    #[test]
    fn cost_of_the_reference_column() {
        let c = cost_estimate(&SimConfig::halfspace(0.05, 0.75)).unwrap();
        assert_eq!((c.nodes, c.steps, c.realizations), (96, 200, 250));
    }

    #[test]
    fn stability_derived_steps_survive_json() {
        let p = sphere_plan("s", SphereMode::Axisymmetric, 16, 4).unwrap();
        let back: ExperimentPlan = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        for (a, b) in p.variants.iter().zip(&back.variants) {
            assert_eq!(a.config.dt.to_bits(), b.config.dt.to_bits());
        }
        assert_eq!(back.hash(), p.hash());
    }
}
