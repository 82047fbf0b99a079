//! `gchan`: batch front end for the gauge-covariant Gaussian channel calculus.
//!
//! Exit codes: 0 success, 1 malformed input, 2 channel not completely
//! positive, 3 oracle or entropy check failed, 4 interpolation-bound violation.

mod commands;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gchan_core::interpbound::{self, MapFamily, SuiteConfig};

use commands::{CliError, ConvergeOptions, OracleOptions};
use output::Report;

#[derive(Parser)]
#[command(name = "gchan", version, about = "Schatten norms, thermal transforms and entropy gains of gauge-covariant Gaussian channels")]
struct Cli {
    /// Output encoding.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic p -> p norm (det K*K)^(-1/p') with the CP report.
    Norm(NormArgs),
    /// Thermal norm ratios and entropy gains against their large-E limits.
    Converge(ConvergeArgs),
    /// Truncated Fock-space simulation compared with the thermal closed forms.
    Oracle(OracleArgs),
    /// Randomized interpolation-bound suite over positive maps.
    Interp(InterpArgs),
    /// Entropy gain on thermal inputs against ln det K*K.
    Entropy(EntropyArgs),
}

#[derive(Args)]
struct PGrid {
    /// Single exponent.
    #[arg(long, conflicts_with = "p_grid")]
    p: Option<f64>,
    /// Comma-separated exponents.
    #[arg(long = "p-grid", value_delimiter = ',')]
    p_grid: Option<Vec<f64>>,
}

impl PGrid {
    fn resolve(&self, default: &[f64]) -> Vec<f64> {
        match (self.p, &self.p_grid) {
            (Some(p), _) => vec![p],
            (None, Some(g)) => g.clone(),
            (None, None) => default.to_vec(),
        }
    }
}

#[derive(Args)]
struct NormArgs {
    /// Channel-spec JSON file.
    channel: PathBuf,
    #[command(flatten)]
    p: PGrid,
}

#[derive(Args)]
struct ConvergeArgs {
    channel: PathBuf,
    #[command(flatten)]
    p: PGrid,
    /// Mean occupations.
    #[arg(long = "E-grid", value_delimiter = ',', default_value = "1,10,100,10000")]
    e_grid: Vec<f64>,
    /// Output exponent q < p: tabulate ||Phi(omega)||_q / ||omega||_p instead.
    #[arg(long)]
    q: Option<f64>,
}

#[derive(Args)]
struct OracleArgs {
    /// Channel-spec JSON file; alternatively give --k2 and --mu.
    channel: Option<PathBuf>,
    /// Single-mode |K|^2.
    #[arg(long, requires = "mu", conflicts_with = "channel")]
    k2: Option<f64>,
    /// Single-mode mu.
    #[arg(long, requires = "k2", conflicts_with = "channel")]
    mu: Option<f64>,
    /// Mean occupation of the thermal input.
    #[arg(long = "E", default_value_t = 1.0)]
    e: f64,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Allowed discrepancy on top of the truncation tails.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Fock levels per input mode (default ceil(28 (E + 1))).
    #[arg(long)]
    cutoff: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Cp,
    CoPositive,
    Mixed,
    Identity,
}

impl From<Family> for MapFamily {
    fn from(f: Family) -> Self {
        match f {
            Family::Cp => MapFamily::Cp,
            Family::CoPositive => MapFamily::CoPositive,
            Family::Mixed => MapFamily::Mixed,
            Family::Identity => MapFamily::Identity,
        }
    }
}

#[derive(Args)]
struct InterpArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest matrix dimension.
    #[arg(long = "d-max", default_value_t = 8)]
    d_max: usize,
    #[arg(long = "n-maps", default_value_t = 500)]
    n_maps: usize,
    #[arg(long = "p-grid", value_delimiter = ',', default_value = "1.1,1.5,2,3,10,1000")]
    p_grid: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Family::Mixed)]
    family: Family,
    /// Random starts per (map, p).
    #[arg(long, default_value_t = interpbound::DEFAULT_TRIALS)]
    trials: usize,
    /// Ascent steps per start.
    #[arg(long, default_value_t = interpbound::DEFAULT_ITERS)]
    iters: usize,
    /// Where to write witnesses if the bound is ever violated.
    #[arg(long = "counterexample-file", default_value = "interp-counterexample.json")]
    counterexample_file: PathBuf,
}

#[derive(Args)]
struct EntropyArgs {
    channel: PathBuf,
    #[arg(long = "E-grid", value_delimiter = ',', default_value = "0,1,10,100,10000")]
    e_grid: Vec<f64>,
    /// Allowed shortfall below the bound.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("GCHAN_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Input(format!("GCHAN_THREADS={raw:?} is not a non-negative integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Input(format!("thread pool: {e}")))
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    configure_threads()?;
    match &cli.command {
        Command::Norm(a) => {
            let ch = commands::load_channel(&a.channel)?;
            commands::norm(&ch, &a.p.resolve(&[2.0]))
        }
        Command::Converge(a) => {
            let ch = commands::load_channel(&a.channel)?;
            let p_grid = a.p.resolve(&[2.0]);
            commands::converge(
                &ch,
                &ConvergeOptions {
                    e_grid: &a.e_grid,
                    p_grid: &p_grid,
                    q: a.q,
                },
            )
        }
        Command::Oracle(a) => {
            let ch = commands::channel_source(a.channel.clone(), a.k2, a.mu)?;
            commands::oracle(
                &ch,
                &OracleOptions {
                    e: a.e,
                    p: a.p,
                    tol: a.tol,
                    cutoff: a.cutoff,
                },
            )
        }
        Command::Interp(a) => {
            let config = SuiteConfig {
                seed: a.seed,
                d_max: a.d_max,
                n_maps: a.n_maps,
                p_grid: a.p_grid.clone(),
                trials: a.trials,
                iters: a.iters,
                family: a.family.into(),
            };
            commands::interp(&config, &a.counterexample_file)
        }
        Command::Entropy(a) => {
            let ch = commands::load_channel(&a.channel)?;
            commands::entropy(&ch, &a.e_grid, a.tol)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            if let CliError::NotCp(cp) = &e {
                let mut r = Report::default();
                r.set("error", "not completely positive");
                r.set("cp", cp);
                println!("{}", output::to_json(&r.meta));
            }
            eprintln!("gchan: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let text = match cli.format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.table.to_csv(),
    };
    let mut stdout = std::io::stdout().lock();
    if stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
        return ExitCode::from(1);
    }
    if let Some(d) = &report.diagnostics {
        eprintln!("gchan: {d}");
    }
    ExitCode::from(report.exit_code)
}
