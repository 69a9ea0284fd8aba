use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use sasaki_core::config::{self, ConfigError, RunConfig};
use sasaki_core::gallery;
use sasaki_core::report::{self, ExitStatus};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    VerifyStructure,
    CheckHypotheses,
    Reduce,
    CurvatureScan,
    ReebFlow,
    ConeCheck,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::VerifyStructure => "verify-structure",
            Command::CheckHypotheses => "check-hypotheses",
            Command::Reduce => "reduce",
            Command::CurvatureScan => "curvature-scan",
            Command::ReebFlow => "reeb-flow",
            Command::ConeCheck => "cone-check",
        }
    }
}

/// Numerical laboratory for contact and Sasakian reduction of torus actions
/// on odd spheres.
#[derive(Debug, Parser)]
#[command(name = "sasaki-lab", version)]
struct Cli {
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in example (ex1, ex1gen, ex2, ex3, ex4, weighted).
    #[arg(long)]
    preset: Option<String>,
    /// Complex dimension for the ex1gen preset.
    #[arg(long)]
    n: Option<usize>,
    /// Momentum direction, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    mu: Option<Vec<f64>>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for report.json and samples.csv.
    #[arg(long, default_value = "lab-output")]
    out: PathBuf,
}

fn build_config(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut cfg = match (&cli.config, &cli.preset) {
        (Some(path), _) => config::load_config(path)?,
        (None, Some(name)) => config::preset(name, cli.n).map_err(|v| ConfigError::Validation(vec![v]))?,
        (None, None) => {
            return Err(ConfigError::Validation(vec![config::Violation {
                field: "config".into(),
                message: "either --config or --preset is required".into(),
            }]))
        }
    };
    if let (Some(_), Some(name)) = (&cli.config, &cli.preset) {
        if cfg.preset.as_deref() != Some(name) {
            let base = config::preset(name, cli.n).map_err(|v| ConfigError::Validation(vec![v]))?;
            cfg.action_weights = base.action_weights;
            cfg.n = base.n;
            cfg.preset = base.preset;
        }
    }
    if let Some(mu) = &cli.mu {
        cfg.mu = Some(mu.clone());
    }
    if let Some(s) = cli.samples {
        cfg.samples = s;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("sasaki-lab: {e}");
            return ExitCode::from(ExitStatus::Validation.code() as u8);
        }
    };
    let (report, table) = gallery::run_command(cli.command.name(), &cfg);
    if let Err(e) = report::write_outputs(&cli.out, &report, &table) {
        eprintln!("sasaki-lab: cannot write outputs to {}: {e}", cli.out.display());
        return ExitCode::FAILURE;
    }
    for v in &report.violations {
        eprintln!("invalid config: {v}");
    }
    if let Some(e) = &report.error {
        eprintln!("error: {e}");
    }
    for r in &report.residuals {
        println!("{:<24} max {:.3e}  tol {:.1e}  {}", r.name, r.max, r.tolerance, if r.pass { "ok" } else { "FAIL" });
    }
    for n in &report.verdicts.notes {
        println!("note: {n}");
    }
    println!("status: {:?} (exit {})", report.exit.status, report.exit.code);
    ExitCode::from(report.exit.code as u8)
}
