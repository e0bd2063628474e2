use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use mottlab::basis::{fock_dimension, partition_count, partitions};
use mottlab::entanglement::entanglement_report;
use mottlab::operators::assemble_hamiltonian;
use mottlab::solvers::{perturbative_state_sparse, solve_dense, solve_lanczos};
use mottlab::sweep::{
    compare, emit_csv, emit_partial_csv, emit_plot, run_sweep, Column, Lattice, SweepConfig,
    SweepMethod,
};
use mottlab::{FockBasis, HamiltonianParams, LanczosOptions, PairLabel};

/// Bose-Hubbard ground states and entanglement along λ = J/U.
#[derive(Parser)]
#[command(name = "mottlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep λ and write observables to CSV and/or SVG.
    Sweep(SweepArgs),
    /// Print the Hilbert-space dimension and partition count.
    Basis(BasisArgs),
    /// Solve a single λ and print energy, residual and observables.
    Ground(GroundArgs),
    /// Tabulate dense vs perturbative deviations over a λ grid.
    Compare(CompareArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// `key = value` file; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// Defaults to N.
    #[arg(long)]
    m: Option<usize>,
    /// chain, chain-open or ccg.
    #[arg(long)]
    geometry: Option<Lattice>,
    /// dense, lanczos, perturb1, perturb2 or ccg-analytic.
    #[arg(long)]
    method: Option<SweepMethod>,
    #[arg(long)]
    lambda_min: Option<f64>,
    #[arg(long)]
    lambda_max: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Comma-separated: nn, nnn.
    #[arg(long, value_delimiter = ',')]
    pairs: Option<Vec<PairLabel>>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Comma-separated CSV column names to plot.
    #[arg(long, value_delimiter = ',')]
    columns: Option<Vec<Column>>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct BasisArgs {
    #[arg(long)]
    n: usize,
    /// Defaults to N.
    #[arg(long)]
    m: Option<usize>,
    /// Write the configurations, one per line.
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Args)]
struct GroundArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value = "chain")]
    geometry: Lattice,
    /// dense, lanczos, perturb1 or perturb2.
    #[arg(long, default_value = "dense")]
    method: SweepMethod,
    #[arg(long)]
    lambda: f64,
    #[arg(long, value_delimiter = ',', default_value = "nn,nnn")]
    pairs: Vec<PairLabel>,
    /// Write the ground-state amplitudes.
    #[arg(long)]
    dump_state: Option<PathBuf>,
    /// Write the Hamiltonian's upper-triangle entries.
    #[arg(long)]
    dump_operator: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value = "chain")]
    geometry: Lattice,
    /// perturb1 or perturb2.
    #[arg(long, default_value = "perturb2")]
    method: SweepMethod,
    #[arg(long, default_value_t = 0.0)]
    lambda_min: f64,
    #[arg(long, default_value_t = 0.3)]
    lambda_max: f64,
    #[arg(long, default_value_t = 21)]
    steps: usize,
}

/// Arguments that parse but make no sense together; exits like a parse error.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn checked(config: &SweepConfig) -> Result<()> {
    let warnings = config.validate().map_err(|e| UsageError(e.to_string()))?;
    for warning in warnings {
        eprintln!("warning: {warning}");
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => SweepConfig::from_file(path)
            .with_context(|| format!("reading config {}", path.display()))?,
        None => SweepConfig::default(),
    };
    if let Some(n) = args.n {
        config.n_particles = n;
        config.n_sites = n;
    }
    if let Some(m) = args.m {
        config.n_sites = m;
    }
    if let Some(g) = args.geometry {
        config.lattice = g;
    }
    if let Some(method) = args.method {
        config.method = method;
    }
    if let Some(x) = args.lambda_min {
        config.lambda_min = x;
    }
    if let Some(x) = args.lambda_max {
        config.lambda_max = x;
    }
    if let Some(s) = args.steps {
        config.steps = s;
    }
    if let Some(p) = args.pairs {
        config.pairs = p;
    }
    if let Some(c) = args.columns {
        config.columns = c;
    }
    if args.csv.is_some() {
        config.csv = args.csv;
    }
    if args.plot.is_some() {
        config.plot = args.plot;
    }
    if args.workers.is_some() {
        config.workers = args.workers;
    }

    checked(&config)?;
    let records = match run_sweep(&config) {
        Ok(records) => records,
        Err(failure) => {
            if let Some(path) = &config.csv {
                emit_partial_csv(&failure.records, &failure, path)?;
            }
            return Err(failure.into());
        }
    };
    if let Some(path) = &config.csv {
        emit_csv(&records, path)?;
    }
    if let Some(path) = &config.plot {
        emit_plot(&records, path, &config.columns)?;
    }
    if config.csv.is_none() && config.plot.is_none() {
        mottlab::sweep::write_csv(&records, io::stdout().lock())?;
    }
    Ok(())
}

fn basis(args: BasisArgs) -> Result<()> {
    let n = args.n;
    let m = args.m.unwrap_or(n);
    let d = fock_dimension(n, m).context("dimension overflows 64 bits")?;
    let f = if m >= n {
        partition_count(n).context("partition count overflows")?
    } else {
        partitions(n, m)?.len() as u128
    };
    let mut out = io::stdout().lock();
    writeln!(out, "N={n}")?;
    writeln!(out, "M={m}")?;
    writeln!(out, "D={d}")?;
    writeln!(out, "f(N)={f}")?;
    if let Some(path) = args.dump {
        let basis = FockBasis::new(n, m)?;
        basis.write_text(BufWriter::new(File::create(&path)?))?;
    }
    Ok(())
}

fn ground(args: GroundArgs) -> Result<()> {
    let n_sites = args.m.unwrap_or(args.n);
    let geometry = args.geometry.geometry(n_sites);
    let params = HamiltonianParams::new(args.lambda, geometry.clone())?;
    let result = match args.method.perturbative_order() {
        Some(order) => {
            if args.n != n_sites {
                bail!("perturbative methods need N = M");
            }
            if args.dump_operator.is_some() {
                bail!("--dump-operator needs an exact method");
            }
            perturbative_state_sparse(n_sites, &params, order)?
        }
        None => {
            let basis = Arc::new(FockBasis::new(args.n, n_sites)?);
            let h = assemble_hamiltonian(&basis, &params)?;
            if let Some(path) = &args.dump_operator {
                h.write_text(BufWriter::new(File::create(path)?))?;
            }
            match args.method {
                SweepMethod::Dense => solve_dense(&h)?,
                SweepMethod::Lanczos => solve_lanczos(&h, LanczosOptions::default())?,
                other => bail!("ground does not support method {other}"),
            }
        }
    };
    let report = entanglement_report(&result.state, &geometry, &args.pairs)?;
    let mut out = io::stdout().lock();
    writeln!(out, "method={}", result.method)?;
    writeln!(out, "energy={:.16e}", result.energy)?;
    match result.residual {
        Some(r) => writeln!(out, "residual={r:.3e}")?,
        None => writeln!(out, "residual=")?,
    }
    if result.iterations > 0 {
        writeln!(out, "iterations={}", result.iterations)?;
    }
    writeln!(out, "linear_entropy={:.16e}", report.linear_entropy)?;
    for (label, value) in &report.negativities {
        writeln!(out, "negativity_{label}={value:.16e}")?;
    }
    writeln!(out, "delta_n2={:.16e}", report.delta_n2)?;
    if let Some(path) = args.dump_state {
        let basis = Arc::new(FockBasis::new(args.n, n_sites)?);
        let dense = mottlab::GroundStateResult {
            state: result.state.to_dense(&basis)?,
            ..result
        };
        dense.write_text(BufWriter::new(File::create(&path)?))?;
    }
    Ok(())
}

fn compare_cmd(args: CompareArgs) -> Result<()> {
    let config = SweepConfig {
        n_particles: args.n,
        n_sites: args.m.unwrap_or(args.n),
        lattice: args.geometry,
        method: args.method,
        lambda_min: args.lambda_min,
        lambda_max: args.lambda_max,
        steps: args.steps,
        ..SweepConfig::default()
    };
    checked(&config)?;
    compare(&config)?.write_table(io::stdout().lock())?;
    Ok(())
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
    let outcome = match cli.command {
        Command::Sweep(a) => sweep(a),
        Command::Basis(a) => basis(a),
        Command::Ground(a) => ground(a),
        Command::Compare(a) => compare_cmd(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
