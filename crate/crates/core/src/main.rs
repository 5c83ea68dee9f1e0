use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sce_market::dynamics::Method;
use sce_market::scenario::{
    load_config_file, run_simulate, run_solve, run_sweep, run_verify, write_sweep_csv, ScenarioConfig, ScenarioError,
    VerifyOptions,
};

#[derive(Parser)]
#[command(
    name = "sce-market",
    version,
    about = "Socially acceptable market equilibria and their closed-loop dynamics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the CE and SCE and print the equilibrium report as JSON.
    Solve(Common),
    /// Simulate the closed loop, writing a CSV trajectory and a JSON summary.
    Simulate(Common),
    /// Run the randomized invariant suite; exits 1 if any check fails.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Number of random market instances.
        #[arg(long, default_value_t = 200)]
        instances: usize,
    },
    /// Solve the SCE for a list of caps.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated cap values.
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        caps: Vec<f64>,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario JSON file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured price cap.
    #[arg(long, allow_negative_numbers = true)]
    lambda_max: Option<f64>,
    /// Overrides the integration step.
    #[arg(long)]
    h: Option<f64>,
    /// Overrides the simulated horizon.
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    method: Option<Method>,
    /// Output file; stdout when omitted (simulate defaults to trajectory.csv).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn load(&self) -> Result<ScenarioConfig, ScenarioError> {
        let mut config = load_config_file(&self.config)?;
        if let Some(v) = self.lambda_max {
            config.lambda_max = v;
        }
        if let Some(v) = self.h {
            config.sim.h = v;
        }
        if let Some(v) = self.t_end {
            config.sim.t_end = v;
        }
        if let Some(v) = self.method {
            config.sim.method = v;
        }
        if let Some(v) = self.seed {
            config.seed = v;
        }
        config.validate()?;
        Ok(config)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, ScenarioError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), ScenarioError> {
    match out {
        Some(path) => {
            let mut w = create(path)?;
            w.write_all(text.as_bytes())?;
            w.flush()?;
        }
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn summary_path(csv: &Path) -> PathBuf {
    let stem = csv
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    csv.with_file_name(format!("{stem}.summary.json"))
}

fn run(cli: Cli) -> Result<ExitCode, ScenarioError> {
    match cli.command {
        Command::Solve(common) => {
            let report = run_solve(&common.load()?)?;
            emit(common.out.as_deref(), &report.to_json())?;
        }
        Command::Simulate(common) => {
            let config = common.load()?;
            let csv_path = common.out.clone().unwrap_or_else(|| PathBuf::from("trajectory.csv"));
            let mut writer = create(&csv_path)?;
            let result = run_simulate(&config, &mut writer);
            writer.flush()?;
            let summary = result?;
            let json = summary.to_json();
            emit(Some(&summary_path(&csv_path)), &json)?;
            io::stdout().lock().write_all(json.as_bytes())?;
            if !summary.convergence.converged {
                log::warn!(
                    "trajectory did not reach the equilibrium within {:e} (final error {:e})",
                    summary.convergence.tolerance,
                    summary.convergence.final_error
                );
            }
        }
        Command::Verify { common, instances } => {
            if instances == 0 {
                return Err(ScenarioError::Validation("--instances must be at least 1".into()));
            }
            let config = common.load()?;
            let report = run_verify(&config, &VerifyOptions::new(instances, config.seed))?;
            for c in &report.checks {
                eprintln!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            emit(common.out.as_deref(), &report.to_json())?;
            if !report.passed() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Sweep { common, caps } => {
            let rows = run_sweep(&common.load()?, &caps)?;
            match common.out.as_deref() {
                Some(path) => {
                    let mut w = create(path)?;
                    write_sweep_csv(&mut w, &rows)?;
                    w.flush()?;
                }
                None => write_sweep_csv(io::stdout().lock(), &rows)?,
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
