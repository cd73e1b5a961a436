use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use subgamma_cli::{load_report, output_dir, run, write_outputs, CliError, Command, JobConfig, Overrides};

#[derive(Parser)]
#[command(name = "subgamma", version, about = "Curvature-dimension certification and heat-semigroup inequality checks")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Certify CD(ρ₁, ρ₂, κ, d) for a model, or search for parameters.
    CertifyCd(Common),
    /// Check heat-semigroup inequalities on a discretized model.
    HeatVerify(Common),
    /// Spectral gap of the discrete generator.
    Spectral(Common),
    /// Wasserstein distances, entropy bounds and the modified HWI inequality.
    Transport(Common),
    /// Logarithmic isoperimetry for node sets.
    Isoperimetry(Common),
    /// Print a stored JSON report as a table.
    Report {
        path: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    /// Built-in model name or model file.
    #[arg(long)]
    model: Option<String>,
    /// Job file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Certifier tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Grid spacing h.
    #[arg(long)]
    grid: Option<f64>,
    #[arg(long, env = "SUBGAMMA_OUT_DIR")]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
}

fn execute(command: Command, c: Common) -> Result<bool, CliError> {
    let config = match &c.config {
        Some(p) => JobConfig::load(p)?,
        None => JobConfig::default(),
    };
    let overrides = Overrides { model: c.model, seed: c.seed, tol: c.tol, h: c.grid, out: c.out };
    let config = overrides.apply(config);
    if let Some(n) = c.jobs.or(config.jobs) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Compute(e.to_string()))?;
    }
    let doc = run(command, &config, overrides.tol, overrides.h)?;
    let (json, csv) = write_outputs(&doc, &output_dir(&config))?;
    print!("{}", doc.table());
    println!("wrote {} and {}", json.display(), csv.display());
    Ok(doc.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::CertifyCd(c) => execute(Command::CertifyCd, c),
        Cmd::HeatVerify(c) => execute(Command::HeatVerify, c),
        Cmd::Spectral(c) => execute(Command::Spectral, c),
        Cmd::Transport(c) => execute(Command::Transport, c),
        Cmd::Isoperimetry(c) => execute(Command::Isoperimetry, c),
        Cmd::Report { path } => load_report(&path).map(|doc| {
            print!("{}", doc.table());
            doc.passed()
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
