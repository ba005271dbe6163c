use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lke_cli::config::{ObservableName, OutputPaths};
use lke_cli::{run, CliError, Mode, RunConfig};
use lke_core::kinetics::Integrator;
use lke_core::{HamiltonianMode, InitialState, Scheme};

/// Linear kinetic equations for the long-range transverse-field Ising chain.
#[derive(Parser)]
#[command(name = "lke", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the kinetic equations for one truncation.
    Evolve(Overrides),
    /// Exact diagonalization trajectory (N <= 12).
    Ed(Overrides),
    /// Accuracy of several truncations against ED.
    Benchmark(Overrides),
    /// Thermal averages from ED and the high-temperature expansion.
    Thermal(Overrides),
    /// Space-time grid of connected zz-correlators.
    Correlate(Overrides),
}

/// Every flag overrides the matching key of the config file.
#[derive(Args)]
struct Overrides {
    /// JSON run configuration; without it a small example config is the base.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the merged configuration as JSON and exit.
    #[arg(long)]
    print_config: bool,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    jx: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    jz: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    h: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Truncation name such as T4, Tp2 or T6p3.
    #[arg(long)]
    truncation: Option<Scheme>,
    #[arg(long, value_enum)]
    hamiltonian: Option<HamiltonianArg>,
    /// vacuum, psi:<n|max>, chi:<n|max> or superposition:<re1>,<im1>,<re2>,<im2>:<n|max>
    #[arg(long)]
    state: Option<InitialState>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    sample_every: Option<usize>,
    /// Also integrate with dt/2 and record the difference.
    #[arg(long)]
    halving_check: bool,
    #[arg(long, value_enum, value_delimiter = ',')]
    observables: Option<Vec<ObservableName>>,
    /// Correlator distances, comma separated.
    #[arg(long, value_delimiter = ',')]
    czz: Option<Vec<i64>>,
    #[arg(long)]
    particle_hole: bool,
    /// Benchmark: long-range exponents, comma separated.
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
    /// Benchmark: truncations, comma separated.
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<Scheme>>,
    /// Thermal: ED sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    metadata: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    memory_budget_gib: Option<f64>,
    #[arg(long)]
    density_threshold: Option<f64>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum HamiltonianArg {
    Full,
    QuadraticOnly,
}

impl Overrides {
    fn merge(self, mode: Mode) -> Result<(RunConfig, bool), CliError> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::example(mode),
        };
        c.mode = mode;
        let m = &mut c.model;
        set(&mut m.n, self.n);
        set(&mut m.jx, self.jx);
        set(&mut m.jz, self.jz);
        set(&mut m.h, self.h);
        set(&mut m.alpha, self.alpha);
        set(&mut c.truncation, self.truncation);
        set(
            &mut c.hamiltonian,
            self.hamiltonian.map(|h| match h {
                HamiltonianArg::Full => HamiltonianMode::Full,
                HamiltonianArg::QuadraticOnly => HamiltonianMode::QuadraticOnly,
            }),
        );
        set(&mut c.initial_state, self.state);
        set(&mut c.trajectory.t_max, self.t_max);
        set(&mut c.trajectory.dt, self.dt);
        set(&mut c.trajectory.sample_every, self.sample_every);
        if self.halving_check {
            c.trajectory.method = Integrator::Rk4WithHalvingCheck;
        }
        set(&mut c.observables, self.observables);
        set(&mut c.czz, self.czz);
        c.particle_hole |= self.particle_hole;
        set(&mut c.benchmark.alphas, self.alphas);
        set(&mut c.benchmark.schemes, self.schemes);
        set(&mut c.thermal.sizes, self.sizes);
        if let Some(csv) = self.csv {
            c.output = OutputPaths { csv, metadata: c.output.metadata.take() };
        }
        if self.metadata.is_some() {
            c.output.metadata = self.metadata;
        }
        if self.workers.is_some() {
            c.workers = self.workers;
        }
        set(&mut c.memory_budget_gib, self.memory_budget_gib);
        set(&mut c.density_threshold, self.density_threshold);
        Ok((c, self.print_config))
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, o) = match cli.command {
        Command::Evolve(o) => (Mode::Lke, o),
        Command::Ed(o) => (Mode::Ed, o),
        Command::Benchmark(o) => (Mode::Benchmark, o),
        Command::Thermal(o) => (Mode::Thermal, o),
        Command::Correlate(o) => (Mode::Correlate, o),
    };
    let result = o.merge(mode).and_then(|(cfg, print)| {
        if print {
            println!("{}", cfg.to_json());
            return Ok(());
        }
        let report = run(&cfg)?;
        for w in &report.warnings {
            eprintln!("warning: {w}");
        }
        eprintln!("wrote {} rows to {} ({})", report.rows, report.csv.display(), report.metadata.display());
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
