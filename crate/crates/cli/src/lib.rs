//! Command-line experiment runner: each subcommand writes CSV tables plus a `manifest.json`
//! entry, and `summarize` turns a results directory into `report.json`.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod report;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

use commands::mc::{SgdArgs, SgdParams, VerifyArgs, VerifyParams};
use commands::multinode::{MultinodeArgs, MultinodeParams, ToeplitzArgs, ToeplitzParams};
use commands::relusq::{RelusqArgs, RelusqParams};
use commands::single::{FlowArgs, FlowParams, GdCompareArgs, GdCompareParams, LandscapeArgs, LandscapeParams};
use commands::spectral::{ChebyshevArgs, ChebyshevParams, LinearArgs, LinearParams};
use config::{resolve, Common, Params};
pub use error::{CliError, CliResult};
use output::{ensure_dir, update_manifest, ManifestEntry};
pub use report::{summarize, Report};

#[derive(Debug, Parser)]
#[command(name = "sobolev-lab", version, about = "Landscape, flow and Monte-Carlo experiments for Sobolev-trained ReLU units")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hessian spectra and condition numbers over a theta sweep and random pairs
    Landscape {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: LandscapeArgs,
    },
    /// One gradient step on the value loss against the Sobolev loss
    GdCompare {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: GdCompareArgs,
    },
    /// Population gradient flows of a single ReLU unit
    Flow {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: FlowArgs,
    },
    /// Descent inequalities and flows for a squared-ReLU unit
    Relusq {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: RelusqArgs,
    },
    /// Reduced planar dynamics of the cyclic K-node network
    Multinode {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: MultinodeArgs,
    },
    /// Linearization of the circulant K-node dynamics at the optimum
    Toeplitz {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: ToeplitzArgs,
    },
    /// Minibatch SGD on a fixed dataset with condition-number traces
    Sgd {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: SgdArgs,
    },
    /// Monte-Carlo checks of every closed-form gradient
    VerifyGradients {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: VerifyArgs,
    },
    /// Least squares against anchored ridge: conditioning and variance
    Linear {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: LinearArgs,
    },
    /// Chebyshev differentiation matrices against monomials and finite differences
    Chebyshev {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: ChebyshevArgs,
    },
    /// Evaluate acceptance criteria from the CSVs in a directory into report.json
    Summarize {
        /// Directory holding the CSVs
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// Second run directory; enables the byte-identity check
        #[arg(long)]
        compare: Option<PathBuf>,
    },
}

#[derive(Debug, Clone)]
pub enum Outcome {
    Files { subcommand: &'static str, out_dir: PathBuf, files: Vec<String>, elapsed_seconds: f64 },
    Report(Report),
}

fn threads(common: &Common) -> usize {
    common.threads.unwrap_or(0)
}

fn execute<P: Params + Sync>(common: &Common, args: &impl serde::Serialize) -> CliResult<Outcome> {
    let params: P = resolve(common, args)?;
    ensure_dir(&common.out_dir)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads(common)).build()?;
    let workers = pool.current_num_threads();
    let start = Instant::now();
    let files = pool.install(|| params.execute(&common.out_dir))?;
    let elapsed_seconds = start.elapsed().as_secs_f64();
    update_manifest(
        &common.out_dir,
        ManifestEntry { subcommand: P::NAME, config: serde_json::to_value(&params)?, threads: workers, elapsed_seconds, outputs: &files },
    )?;
    Ok(Outcome::Files { subcommand: P::NAME, out_dir: common.out_dir.clone(), files, elapsed_seconds })
}

pub fn run(cli: Cli) -> CliResult<Outcome> {
    match &cli.command {
        Command::Landscape { common, args } => execute::<LandscapeParams>(common, args),
        Command::GdCompare { common, args } => execute::<GdCompareParams>(common, args),
        Command::Flow { common, args } => execute::<FlowParams>(common, args),
        Command::Relusq { common, args } => execute::<RelusqParams>(common, args),
        Command::Multinode { common, args } => execute::<MultinodeParams>(common, args),
        Command::Toeplitz { common, args } => execute::<ToeplitzParams>(common, args),
        Command::Sgd { common, args } => execute::<SgdParams>(common, args),
        Command::VerifyGradients { common, args } => execute::<VerifyParams>(common, args),
        Command::Linear { common, args } => execute::<LinearParams>(common, args),
        Command::Chebyshev { common, args } => execute::<ChebyshevParams>(common, args),
        Command::Summarize { out_dir, compare } => summarize(out_dir, compare.as_deref()).map(Outcome::Report),
    }
}

/// Parses `args` (including the program name) and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(Outcome::Files { subcommand, out_dir, files, elapsed_seconds }) => {
            eprintln!("{subcommand}: wrote {} to {} in {elapsed_seconds:.2}s", files.join(", "), out_dir.display());
            0
        }
        Ok(Outcome::Report(r)) => {
            for c in &r.criteria {
                println!("{:>2} {} {}", c.id, if c.pass { "PASS" } else { "FAIL" }, c.title);
            }
            for m in &r.missing {
                println!("{:>2} MISSING {} (needs {})", m.id, m.title, m.needs.join(", "));
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
