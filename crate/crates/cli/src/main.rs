//! `iga-gap`: experiment runner for spectral-gap studies of reparametrized
//! isogeometric discretizations.

mod commands;
mod config;
mod csv;
mod error;
mod registry;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use iga_gap_core::reparam::parse_phi;
use iga_gap_core::spectral_analysis::ordering_interval;

use commands::Context;
use config::{ExperimentConfig, FileConfig, Overrides};
use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "iga-gap", version, about = "Spectral-gap experiments for reparametrized B-spline discretizations")]
struct Cli {
    /// Experiment file (TOML); command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    svg: bool,
    /// Write the assembled mass and stiffness matrices as text.
    #[arg(long, global = true)]
    dump_matrices: bool,
    /// Accepted for reproducibility scripts; every computation is deterministic.
    #[arg(long, global = true)]
    seedless: bool,
    /// Relative tolerance of the adaptive assembly quadrature.
    #[arg(long, global = true)]
    quad_tol: Option<f64>,
    /// Relative threshold above the symbol range for counting outliers.
    #[arg(long, global = true)]
    outlier_tol: Option<f64>,
    /// Logarithmic x axis in SVG plots.
    #[arg(long, global = true)]
    logx: bool,
    /// Logarithmic y axis in SVG plots.
    #[arg(long, global = true)]
    logy: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone, Default)]
struct Sweep {
    /// Spline degrees, comma separated.
    #[arg(short, long = "p", value_delimiter = ',')]
    p: Vec<usize>,
    /// Numbers of elements, comma separated.
    #[arg(short, long = "n", value_delimiter = ',')]
    n: Vec<usize>,
    /// Reparametrization, e.g. `phi1`, `phi3:theta=0.01`, `Phi:p=4,theta=0.01`; repeatable.
    #[arg(long = "phi")]
    phi: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rearranged symbol against normalized square-root eigenvalues.
    Symbol(Sweep),
    /// Generalized eigenvalues of each pencil.
    Eig(Sweep),
    /// Gap δ, its index m(n), and outlier counts over a sweep.
    GapSweep(Sweep),
    /// Counting-function and sampling errors.
    Weyl {
        #[command(flatten)]
        sweep: Sweep,
        /// Number of grid points for the counting-function error.
        #[arg(long, default_value_t = 1001)]
        grid: usize,
    },
    /// Eigenvalue counts per bin and the per-k gap sequence.
    Pack {
        #[command(flatten)]
        sweep: Sweep,
        /// Lower end of the binned range, in units of √λ / n.
        #[arg(long, default_value_t = 0.0)]
        y0: f64,
        /// Upper end; defaults to the top of the symbol range.
        #[arg(long)]
        yr: Option<f64>,
        /// Number of bins.
        #[arg(short, long, default_value_t = 10)]
        r: usize,
    },
    /// Eigenvalue ordering between two reparametrizations.
    Compare {
        #[arg(long)]
        phi_a: String,
        #[arg(long)]
        phi_b: String,
        #[arg(short, long = "p", default_value_t = 1)]
        p: usize,
        #[arg(short, long = "n", value_delimiter = ',', required = true)]
        n: Vec<usize>,
        /// `lo,hi` in units of λ / n²; defaults to the interval derived from the slopes.
        #[arg(long)]
        interval: Option<String>,
    },
    /// Checks the admissibility conditions of reparametrizations.
    ValidatePhi {
        #[arg(long = "phi", required = true)]
        phi: Vec<String>,
    },
    /// Runs a registered experiment into `<out>/<target>/`.
    Reproduce {
        /// One of: table1, fig2, fig3, fig-gap-dist, test4 ... test9.
        target: String,
    },
}

fn parse_interval(text: &str) -> Result<(f64, f64)> {
    let bad = || CliError::Usage(format!("interval must be 'lo,hi' with lo < hi, got '{text}'"));
    let (a, b) = text.split_once(',').ok_or_else(bad)?;
    let lo: f64 = a.trim().parse().map_err(|_| bad())?;
    let hi: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(lo < hi) {
        return Err(bad());
    }
    Ok((lo, hi))
}

impl Cli {
    fn file_config(&self) -> Result<FileConfig> {
        match &self.config {
            Some(path) => FileConfig::load(path),
            None => Ok(FileConfig::default()),
        }
    }

    fn experiment(&self, name: &str, sweep: &Sweep) -> Result<ExperimentConfig> {
        let flags = Overrides {
            p_list: sweep.p.clone(),
            n_list: sweep.n.clone(),
            phi_specs: sweep.phi.clone(),
            svg: self.svg,
            dump_matrices: self.dump_matrices,
            quad_tol: self.quad_tol,
            outlier_tol: self.outlier_tol,
        };
        ExperimentConfig::resolve(name, &self.file_config()?, &flags)
    }

    fn context(&self) -> Context {
        Context {
            out: self.out.clone(),
            log_x: self.logx,
            log_y: self.logy,
        }
    }
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let ctx = cli.context();
    match &cli.command {
        Command::Symbol(s) => commands::cmd_symbol(&ctx, &cli.experiment("symbol", s)?),
        Command::Eig(s) => commands::cmd_eig(&ctx, &cli.experiment("eig", s)?),
        Command::GapSweep(s) => Ok(commands::cmd_gap_sweep(&ctx, &cli.experiment("gap-sweep", s)?)?.0),
        Command::Weyl { sweep, grid } => Ok(commands::cmd_weyl(&ctx, &cli.experiment("weyl", sweep)?, *grid)?.0),
        Command::Pack { sweep, y0, yr, r } => {
            commands::cmd_pack(&ctx, &cli.experiment("pack", sweep)?, *y0, *yr, *r)
        }
        Command::Compare {
            phi_a,
            phi_b,
            p,
            n,
            interval,
        } => {
            let interval = interval.as_deref().map(parse_interval).transpose()?;
            let a = parse_phi(phi_a)?;
            let b = parse_phi(phi_b)?;
            let interval = match interval {
                Some(i) => i,
                None => ordering_interval(&a, &b, *p)?,
            };
            let mut quad = iga_gap_core::assembly::QuadratureConfig::default();
            if let Some(t) = cli.quad_tol {
                quad.rel_tol = t;
            }
            Ok(commands::cmd_compare(&ctx, &a, &b, *p, n, interval, &quad)?.0)
        }
        Command::ValidatePhi { phi } => {
            let phis = phi.iter().map(|s| parse_phi(s)).collect::<iga_gap_core::Result<Vec<_>>>()?;
            let (text, ok) = commands::cmd_validate(&phis);
            print!("{text}");
            if ok {
                Ok(Vec::new())
            } else {
                Err(CliError::Failed("at least one reparametrization failed validation".into()))
            }
        }
        Command::Reproduce { target } => {
            let shared = registry::Shared {
                svg: cli.svg,
                dump_matrices: cli.dump_matrices,
                quad_tol: cli.quad_tol,
                outlier_tol: cli.outlier_tol,
            };
            registry::reproduce(target, &cli.out, &shared, cli.logx, cli.logy)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
