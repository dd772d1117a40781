use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use slipflow::analysis::{format_table, run_verification, to_csv};
use slipflow::harness::{
    canned_plans, cost_estimate, find_plan, fit_report, load_config, run_plan, write_atomic, ExperimentPlan,
    RunOptions,
};
use slipflow::Error;

#[derive(Parser)]
#[command(name = "slipflow", version, about = "Stochastic Stokes flow with Navier-slip walls")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunFlags {
    /// Output directory (default: the plan's own).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for realizations; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Run even when dt exceeds the explicit stability limit.
    #[arg(long)]
    force: bool,
    /// Permit full-3d sphere variants.
    #[arg(long)]
    full3d: bool,
}

impl RunFlags {
    fn options(&self) -> RunOptions {
        RunOptions {
            workers: self.workers,
            force: self.force,
            allow_full3d: self.full3d,
            out: self.out.clone(),
            quiet: false,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Run a canned plan by name, a TOML plan file or a manifest from an earlier run.
    Sweep {
        #[arg(long)]
        plan: String,
        /// Override the realization count of stochastic variants.
        #[arg(long)]
        realizations: Option<usize>,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Run the analysis suite.
    Verify {
        /// Also write the checks as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Scaling exponents of a sweep table.
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Show the canned plans.
    Plans {
        /// List every plan (the default).
        #[arg(long)]
        list: bool,
        /// Print one plan as JSON.
        #[arg(long)]
        show: Option<String>,
    },
}

fn resolve_plan(spec: &str) -> Result<ExperimentPlan, Error> {
    if let Some(p) = find_plan(spec) {
        return Ok(p);
    }
    let path = Path::new(spec);
    if path.exists() {
        return ExperimentPlan::from_path(path);
    }
    Err(Error::config(format!("no canned plan or plan file named {spec}")))
}

fn execute(plan: &ExperimentPlan, flags: &RunFlags) -> Result<i32, Error> {
    let manifest = run_plan(plan, &flags.options())?;
    let root = flags.out.clone().unwrap_or_else(|| plan.output.clone()).join(&plan.name);
    println!("wrote {} files to {}", manifest.files.len() + 1, root.display());
    Ok(manifest.exit_code())
}

fn run(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Simulate { config, flags } => {
            let cfg = load_config(&config)?;
            let name = config.file_stem().and_then(|s| s.to_str()).unwrap_or("simulate").to_string();
            let cost = cost_estimate(&cfg)?;
            println!(
                "{name}: {} nodes, {} steps, {} realizations",
                cost.nodes, cost.steps, cost.realizations
            );
            execute(&ExperimentPlan::single(name, cfg), &flags)
        }
        Command::Sweep { plan, realizations, flags } => {
            let mut plan = resolve_plan(&plan)?;
            if let Some(n) = realizations {
                plan = plan.with_realizations(n);
            }
            execute(&plan, &flags)
        }
        Command::Verify { csv } => {
            let checks = run_verification()?;
            print!("{}", format_table(&checks));
            if let Some(path) = csv {
                write_atomic(&path, to_csv(&checks).as_bytes())?;
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            println!("{} checks, {failed} failed", checks.len());
            Ok(if failed == 0 { 0 } else { 1 })
        }
        Command::Fit { input, json } => {
            let report = fit_report(&input)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            } else {
                print!("{}", report.to_text());
            }
            Ok(0)
        }
        Command::Plans { show, .. } => {
            if let Some(name) = show {
                let plan = find_plan(&name).ok_or_else(|| Error::config(format!("no canned plan named {name}")))?;
                println!("{}", serde_json::to_string_pretty(&plan).expect("plans serialize"));
            } else {
                for p in canned_plans() {
                    let geometry = p.variants[0].config.geometry.label();
                    println!("{:<26} {:>3} variants  {geometry}", p.name, p.variants.len());
                }
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
