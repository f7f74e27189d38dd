use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use solsurf::commands::{ensure_dir, execute, CliError, Command};
use solsurf::config::{parse_lambda, ConfigError, Overrides, RunConfig};
use solsurf_core::io::write_text;

#[derive(Parser)]
#[command(name = "solsurf", version, about = "Soliton surfaces of the CP^(N-1) sigma model")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the solution, its ladder and wave function.
    Solve(Common),
    /// Integrate the immersion and compare with closed forms.
    Immerse(Common),
    /// Run a verification suite.
    Verify(Common),
    /// Write meshes, scalar fields or field files from immerse outputs.
    Export(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Spectral parameter, `re` or `re,im`.
    #[arg(long, value_parser = parse_lambda, allow_hyphen_values = true)]
    lambda: Option<[f64; 2]>,
    /// Grid spacing; the domain extent is kept.
    #[arg(long)]
    grid_h: Option<f64>,
    #[arg(long)]
    suite: Option<String>,
    /// Where to write the JSON report (default: <output_dir>/report.json).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Include wall-clock times in the JSON report.
    #[arg(long)]
    timings: bool,
}

fn threads() -> Result<(), String> {
    let Ok(v) = std::env::var("SOLSURF_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or(format!("SOLSURF_THREADS must be a positive integer, got `{v}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    solsurf::tune_allocator();
    if let Err(e) = threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let (cmd, args) = match cli.command {
        Cmd::Solve(a) => (Command::Solve, a),
        Cmd::Immerse(a) => (Command::Immerse, a),
        Cmd::Verify(a) => (Command::Verify, a),
        Cmd::Export(a) => (Command::Export, a),
    };
    match run(cmd, &args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Command, args: &Common) -> Result<bool, CliError> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(h) = args.grid_h {
        if !(h > 0.0 && h.is_finite()) {
            return Err(ConfigError::Invalid { key: "--grid-h".into(), msg: format!("must be positive, got {h}") }.into());
        }
    }
    cfg.apply(&Overrides { lambda: args.lambda, grid_h: args.grid_h, suite: args.suite.clone() });
    let report = execute(cmd, &cfg)?;
    print!("{}", report.to_text());
    let path = args.report.clone().unwrap_or_else(|| cfg.output_dir.join("report.json"));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        ensure_dir(dir)?;
    }
    write_text(&path, &report.to_json(args.timings)).map_err(CliError::Input)?;
    Ok(report.all_passed())
}
