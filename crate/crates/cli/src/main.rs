use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use bufcontour_cli::config::Overrides;
use bufcontour_cli::{commands, run_contour, run_riskcalc, run_sample, run_verify, CliError, RiskInput, RunConfig};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bufcontour", version, about = "Classical and buffered environmental contours by Monte Carlo")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build contours and write contour.csv, report.json and optionally contour.svg.
    Contour(RunArgs),
    /// Failure and buffered failure probabilities of a scalar sample.
    Riskcalc(RiskArgs),
    /// Check a contour CSV against fresh draws.
    Verify {
        #[command(flatten)]
        run: RunArgs,
        /// Contour CSV to check; defaults to <out-dir>/contour.csv.
        #[arg(long)]
        contour: Option<PathBuf>,
    },
    /// Write the construction sample as samples.csv.
    Sample(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset: swell, windsea or normal.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    pe: Option<f64>,
    #[arg(long)]
    return_period_years: Option<f64>,
    #[arg(long)]
    states_per_hour: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    directions: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    buffered: bool,
    #[arg(long)]
    scale_a: Option<f64>,
    #[arg(long)]
    min_tail: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    svg: bool,
    #[arg(long)]
    verify_samples: Option<usize>,
    #[arg(long)]
    verify_seed: Option<u64>,
}

impl RunArgs {
    fn resolve(self) -> Result<RunConfig, CliError> {
        let base = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        base.with_overrides(&Overrides {
            model: self.model,
            pe: self.pe,
            return_period_years: self.return_period_years,
            states_per_hour: self.states_per_hour,
            samples: self.samples,
            directions: self.directions,
            seed: self.seed,
            buffered: self.buffered,
            scale_a: self.scale_a,
            min_tail: self.min_tail,
            out_dir: self.out_dir,
            svg: self.svg,
            verify_samples: self.verify_samples,
            verify_seed: self.verify_seed,
        })
    }
}

#[derive(Args)]
struct RiskArgs {
    /// File of numbers, one or more per line.
    #[arg(long, conflicts_with_all = ["mu", "sigma"])]
    input: Option<PathBuf>,
    /// Mean of a synthetic normal sample.
    #[arg(long, allow_hyphen_values = true, requires = "sigma")]
    mu: Option<f64>,
    #[arg(long, requires = "mu")]
    sigma: Option<f64>,
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Also write the report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Contour(args) => {
            let outcome = run_contour(&args.resolve()?)?;
            let r = &outcome.report;
            eprintln!("wrote {} to {}", r.files.join(", "), r.config.out_dir.display());
            if let Some(c) = &r.containment {
                eprintln!("classical inside buffered: {}", c.classical_in_buffered);
            }
            if !r.classical.valid {
                eprintln!("warning: {} classical vertices violate other halfplanes", r.classical.failing_vertices.len());
            }
        }
        Command::Riskcalc(args) => {
            let input = match (args.input, args.mu, args.sigma) {
                (Some(path), None, None) => RiskInput::File(path),
                (None, Some(mu), Some(sigma)) => RiskInput::Normal { mu, sigma, samples: args.samples, seed: args.seed },
                _ => return Err(CliError::Usage("give --input FILE or --mu and --sigma".into())),
            };
            let out = run_riskcalc(&input)?;
            let json = serde_json::to_string_pretty(&out).expect("risk output serializes");
            // a closed pipe is not an error worth reporting
            let _ = writeln!(std::io::stdout().lock(), "{json}");
            if let Some(table) = commands::side_by_side(&out) {
                eprint!("{table}");
            }
            if let Some(path) = args.out {
                std::fs::write(&path, json + "\n").map_err(|e| CliError::File { path: path.display().to_string(), message: e.to_string() })?;
            }
        }
        Command::Verify { run, contour } => {
            let config = run.resolve()?;
            let contour = contour.unwrap_or_else(|| config.out_dir.join(commands::CONTOUR_CSV));
            let outcome = run_verify(&config, &contour)?;
            for w in &outcome.report.warnings {
                eprintln!("warning: {w}");
            }
            eprintln!("wrote {}", outcome.path.display());
            if !outcome.report.pass {
                let mut failing = outcome.report.exceedence.failing.clone();
                if let Some(g) = &outcome.report.gamma_buffered {
                    failing.extend(&g.failing);
                }
                failing.sort_unstable();
                failing.dedup();
                return Err(CliError::VerificationFailed(format!("directions {failing:?} outside tolerance")));
            }
        }
        Command::Sample(args) => {
            let path = run_sample(&args.resolve()?)?;
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
