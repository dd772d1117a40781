use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::plan::{cost_estimate, hex, mode_label, ExperimentPlan, Variant};
use crate::diagnostics::{accumulate_ensemble, EnsembleStats, SweepRow, SweepTable};
use crate::error::{Error, Result};
use crate::geometry::SphereMode;
use crate::solver::{SimConfig, Simulation};

pub const SERIES_SCHEMA: &str = "slipflow-series/1";
pub const SWEEP_SCHEMA: &str = "slipflow-sweep/1";
pub const MANIFEST_SCHEMA: &str = "slipflow-manifest/1";

pub const SERIES_HEADER: &str =
    "time,ke_mean,ke_sem,diss_mean,diss_sem,wall_ke_mean,wall_ke_sem,slipnorm_mean,cum_diss_mean";
pub const SWEEP_HEADER: &str = "nu,delta,mode,time_integrated_diss,final_wall_ke,final_ke,weak_diss";

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Threads for the realizations of one variant; 0 uses every core.
    pub workers: usize,
    /// Run variants that fail the stability check.
    pub force: bool,
    pub allow_full3d: bool,
    /// Overrides the plan's output directory.
    pub out: Option<PathBuf>,
    pub quiet: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            workers: 0,
            force: false,
            allow_full3d: false,
            out: None,
            quiet: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantRecord {
    pub name: String,
    pub mode: String,
    pub seed: u64,
    pub realizations: usize,
    pub wall_clock_seconds: f64,
    /// `None` when the variant completed.
    pub error: Option<String>,
    #[serde(default)]
    pub exit_code: i32,
    pub series_file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub version: String,
    pub plan_hash: String,
    pub started_unix: u64,
    pub wall_clock_seconds: f64,
    pub workers: usize,
    pub variants: Vec<VariantRecord>,
    pub files: Vec<FileEntry>,
    /// Enough to rerun every variant.
    pub plan: ExperimentPlan,
}

impl RunManifest {
    /// Exit code of the first failed variant, 0 when all completed.
    pub fn exit_code(&self) -> i32 {
        self.variants.iter().find(|v| v.error.is_some()).map_or(0, |v| v.exit_code)
    }
}

/// Writes `bytes` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn config_line(c: &SimConfig) -> String {
    let mut s = format!(
        "# geometry={} mode={:?} nu={} delta={} alpha={} dt={} T={}",
        c.geometry.label(),
        c.mode,
        c.nu,
        c.delta,
        c.alpha,
        c.dt,
        c.t_final
    );
    if let Some(y) = c.y_max {
        let _ = write!(s, " y_max={y}");
    }
    if let Some(r) = c.radius {
        let _ = write!(s, " R={r}");
    }
    let _ = write!(
        s,
        " noise_mode={} deterministic_forcing={} realizations={} seed={} sample_every={}",
        c.noise_mode.label(),
        c.deterministic_forcing,
        c.realizations,
        c.seed,
        c.sample_every
    );
    s
}

/// Series CSV: `#` metadata lines, one header line, one row per sample.
pub fn series_csv(variant: &Variant, stats: &EnsembleStats) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# schema={SERIES_SCHEMA}");
    let _ = writeln!(out, "# variant={}", variant.name);
    let _ = writeln!(out, "{}", config_line(&variant.config));
    let _ = writeln!(out, "{SERIES_HEADER}");
    for i in 0..stats.time.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            stats.time[i],
            stats.kinetic_energy.mean[i],
            stats.kinetic_energy.sem[i],
            stats.dissipation_rate.mean[i],
            stats.dissipation_rate.sem[i],
            stats.wall_energy.mean[i],
            stats.wall_energy.sem[i],
            stats.slip_norm.mean[i],
            stats.cumulative_dissipation.mean[i],
        );
    }
    out
}

pub fn sweep_csv(plan_name: &str, table: &SweepTable) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# schema={SWEEP_SCHEMA}");
    let _ = writeln!(out, "# plan={plan_name}");
    let _ = writeln!(out, "{SWEEP_HEADER}");
    for r in table.rows() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.nu, r.delta, r.mode, r.time_integrated_diss, r.final_wall_ke, r.final_ke, r.weak_diss
        );
    }
    out
}

/// Runs every realization of one variant and averages them.
pub fn run_ensemble(config: &SimConfig, pool: &rayon::ThreadPool, force: bool) -> Result<EnsembleStats> {
    let sim = Simulation::new(config)?;
    sim.stability().check(force)?;
    let series = pool.install(|| {
        (0..config.realizations)
            .into_par_iter()
            .map(|r| sim.run_realization(r))
            .collect::<Result<Vec<_>>>()
    })?;
    accumulate_ensemble(&series)
}

fn file_entry(root: &Path, rel: &str) -> Result<FileEntry> {
    let path = root.join(rel);
    let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
    Ok(FileEntry {
        path: rel.to_string(),
        sha256: hex(&Sha256::digest(&bytes)),
        bytes: bytes.len() as u64,
    })
}

/// Executes a plan: one series CSV per variant under `series/`, the sweep
/// table and the manifest, all inside `<out>/<plan name>/`.
///
/// Variants run in order; a failing variant is recorded in the manifest and
/// does not stop the others.
pub fn run_plan(plan: &ExperimentPlan, options: &RunOptions) -> Result<RunManifest> {
    plan.validate()?;
    for v in &plan.variants {
        if v.config.mode == SphereMode::Full3d && v.config.geometry == crate::solver::GeometryKind::Sphere {
            let cost = cost_estimate(&v.config)?;
            if !options.allow_full3d {
                return Err(Error::config(format!(
                    "variant {} is full-3d ({} nodes x {} steps x {} realizations = {:.2e} node updates); pass the full-3d flag to run it",
                    v.name, cost.nodes, cost.steps, cost.realizations, cost.node_steps
                )));
            }
            if !options.quiet {
                eprintln!(
                    "[{}] full-3d cost estimate: {} nodes x {} steps x {} realizations = {:.2e} node updates",
                    v.name, cost.nodes, cost.steps, cost.realizations, cost.node_steps
                );
            }
        }
    }
    let root = options.out.clone().unwrap_or_else(|| plan.output.clone()).join(&plan.name);
    std::fs::create_dir_all(root.join("series")).map_err(|e| Error::io(&root, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers)
        .build()
        .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))?;
    let workers = pool.current_num_threads();
    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let clock = Instant::now();

    let mut table = SweepTable::new();
    let mut records = Vec::with_capacity(plan.variants.len());
    let mut files = Vec::new();
    for v in &plan.variants {
        let t0 = Instant::now();
        let mode = mode_label(&v.config);
        let outcome = run_ensemble(&v.config, &pool, options.force).and_then(|stats| {
            let rel = format!("series/{}.csv", v.name);
            write_atomic(&root.join(&rel), series_csv(v, &stats).as_bytes())?;
            table.push(SweepRow::from_stats(v.config.nu, v.config.delta, mode.clone(), &stats))?;
            Ok(rel)
        });
        let seconds = t0.elapsed().as_secs_f64();
        let (series_file, error, exit_code) = match outcome {
            Ok(rel) => {
                files.push(file_entry(&root, &rel)?);
                (Some(rel), None, 0)
            }
            Err(e) => (None, Some(e.to_string()), e.exit_code()),
        };
        if !options.quiet {
            match &error {
                None => eprintln!("[{}] {} done in {seconds:.2} s", plan.name, v.name),
                Some(e) => eprintln!("[{}] {} failed: {e}", plan.name, v.name),
            }
        }
        records.push(VariantRecord {
            name: v.name.clone(),
            mode,
            seed: v.config.seed,
            realizations: v.config.realizations,
            wall_clock_seconds: seconds,
            error,
            exit_code,
            series_file,
        });
    }
    write_atomic(&root.join("sweep.csv"), sweep_csv(&plan.name, &table).as_bytes())?;
    files.push(file_entry(&root, "sweep.csv")?);

    let manifest = RunManifest {
        schema: MANIFEST_SCHEMA.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        plan_hash: plan.hash(),
        started_unix,
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
        workers,
        variants: records,
        files,
        plan: plan.clone(),
    };
    let json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    write_atomic(&root.join("manifest.json"), &json)?;
    Ok(manifest)
}

/// Sweep rows from a sweep CSV.
pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let parse = |msg: String| Error::Parse {
        path: path.to_path_buf(),
        msg,
    };
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(file);
    let header = reader.headers().map_err(|e| parse(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>().join(",") != SWEEP_HEADER {
        return Err(parse(format!("expected header {SWEEP_HEADER}")));
    }
    reader
        .deserialize()
        .map(|r| r.map_err(|e| parse(e.to_string())))
        .collect()
}
