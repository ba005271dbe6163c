//! Run configuration: a JSON document whose keys double as command-line flags.

use std::path::{Path, PathBuf};

use lke_core::kinetics::Integrator;
use lke_core::observables::Observable;
use lke_core::{HamiltonianMode, InitialState, ModelParams, Scheme, TrajectoryConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Lke,
    Ed,
    Benchmark,
    Thermal,
    Correlate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ObservableName {
    Sz,
    Cx1,
    Energy,
    Density,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub csv: PathBuf,
    /// Defaults to the CSV path with `.meta.json` appended.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<PathBuf>,
}

impl OutputPaths {
    pub fn metadata_path(&self) -> PathBuf {
        self.metadata.clone().unwrap_or_else(|| {
            let mut s = self.csv.clone().into_os_string();
            s.push(".meta.json");
            PathBuf::from(s)
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_schemes")]
    pub schemes: Vec<Scheme>,
}

fn default_alphas() -> Vec<f64> {
    vec![3.0, 5.0]
}

fn default_schemes() -> Vec<Scheme> {
    ["T2", "Tp2", "T4", "T6p3", "T6p4", "Tp4"].iter().map(|s| s.parse().unwrap()).collect()
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig { alphas: default_alphas(), schemes: default_schemes() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalConfig {
    /// Inverse temperatures at which to tabulate both routes.
    #[serde(default = "default_betas")]
    pub betas: Vec<f64>,
    /// System sizes for exact thermal averages and the `1/N` fit.
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    /// Match `β` to the initial state's energy density.
    #[serde(default = "default_true")]
    pub match_state: bool,
}

fn default_betas() -> Vec<f64> {
    (-10..=10).map(|i| i as f64 * 0.05).collect()
}

fn default_sizes() -> Vec<usize> {
    vec![8, 10, 12]
}

fn default_true() -> bool {
    true
}

impl Default for ThermalConfig {
    fn default() -> Self {
        ThermalConfig { betas: default_betas(), sizes: default_sizes(), match_state: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelateConfig {
    /// Lower clip of `log10 |C^z_m|`.
    #[serde(default = "default_floor")]
    pub log_floor: f64,
}

fn default_floor() -> f64 {
    -5.0
}

impl Default for CorrelateConfig {
    fn default() -> Self {
        CorrelateConfig { log_floor: default_floor() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub model: ModelParams,
    pub truncation: Scheme,
    #[serde(default = "default_hamiltonian")]
    pub hamiltonian: HamiltonianMode,
    pub initial_state: InitialState,
    pub trajectory: TrajectoryConfig,
    #[serde(default = "default_observables")]
    pub observables: Vec<ObservableName>,
    /// Distances `m` of the connected `S^z S^z` correlators to track.
    #[serde(default)]
    pub czz: Vec<i64>,
    /// Evolve `chi` states through the field-reversed model, and
    /// superpositions through the decoupled formula.
    #[serde(default)]
    pub particle_hole: bool,
    pub output: OutputPaths,
    /// Worker threads; results do not depend on it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default = "default_budget")]
    pub memory_budget_gib: f64,
    /// Threshold on `min(<D>, 1 - <D>)` for the few-particle validity flag.
    #[serde(default = "default_density_threshold")]
    pub density_threshold: f64,
    #[serde(default)]
    pub benchmark: BenchmarkConfig,
    #[serde(default)]
    pub thermal: ThermalConfig,
    #[serde(default)]
    pub correlate: CorrelateConfig,
}

fn default_hamiltonian() -> HamiltonianMode {
    HamiltonianMode::Full
}

fn default_observables() -> Vec<ObservableName> {
    vec![ObservableName::Sz]
}

fn default_budget() -> f64 {
    8.0
}

fn default_density_threshold() -> f64 {
    0.1
}

impl RunConfig {
    /// A small runnable configuration for `mode`.
    pub fn example(mode: Mode) -> Self {
        RunConfig {
            mode,
            model: ModelParams { n: 10, jx: -1.0, jz: -1.0, h: -1.0, alpha: 3.0 },
            truncation: Scheme::Deg(4),
            hamiltonian: HamiltonianMode::Full,
            initial_state: InitialState::Psi(lke_core::states::Level::Pairs(1)),
            trajectory: TrajectoryConfig::new(10.0, 0.01, 10),
            observables: default_observables(),
            czz: Vec::new(),
            particle_hole: false,
            output: OutputPaths { csv: PathBuf::from("out.csv"), metadata: None },
            workers: None,
            memory_budget_gib: default_budget(),
            density_threshold: default_density_threshold(),
            benchmark: BenchmarkConfig::default(),
            thermal: ThermalConfig::default(),
            correlate: CorrelateConfig::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("bad config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks that need no allocation beyond the config itself.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        self.model.validate()?;
        self.truncation.validate()?;
        self.trajectory.validate()?;
        self.initial_state.validate(self.model.n)?;
        for &m in &self.czz {
            if m == 0 || m.unsigned_abs() as usize > self.model.n / 2 {
                return bad(format!("czz distance {m} outside 1..={}", self.model.n / 2));
            }
        }
        if !(self.memory_budget_gib > 0.0) {
            return bad(format!("memory_budget_gib must be positive, got {}", self.memory_budget_gib));
        }
        if self.workers == Some(0) {
            return bad("workers must be >= 1".into());
        }
        if self.particle_hole && matches!(self.initial_state, InitialState::Superposition { .. }) {
            let only_sz = self.observables == [ObservableName::Sz] && self.czz.is_empty();
            if !only_sz {
                return bad("decoupled superposition dynamics are available for sz only".into());
            }
        }
        if self.mode == Mode::Benchmark && self.benchmark.schemes.is_empty() {
            return bad("benchmark needs at least one truncation".into());
        }
        if self.mode == Mode::Thermal {
            if self.thermal.sizes.iter().any(|&n| n < 4 || n % 2 != 0) {
                return bad(format!("thermal sizes must be even and >= 4, got {:?}", self.thermal.sizes));
            }
            if self.thermal.match_state && self.thermal.sizes.len() < 2 {
                return bad("beta matching needs at least two sizes for the 1/N fit".into());
            }
        }
        Ok(())
    }

    pub fn observable_list(&self) -> Vec<Observable> {
        let mut out: Vec<Observable> = self
            .observables
            .iter()
            .map(|o| match o {
                ObservableName::Sz => Observable::Sz,
                ObservableName::Cx1 => Observable::Cx1,
                ObservableName::Energy => Observable::Energy,
                ObservableName::Density => Observable::Density,
            })
            .collect();
        out.extend(self.czz.iter().map(|&m| Observable::Czz(m)));
        out
    }

    pub fn memory_budget_bytes(&self) -> usize {
        (self.memory_budget_gib * (1u64 << 30) as f64) as usize
    }

    pub fn integrator(&self) -> Integrator {
        self.trajectory.method
    }
}
