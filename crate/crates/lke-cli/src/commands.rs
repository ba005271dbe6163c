//! The five run modes. Each returns a table for the CSV and a metadata object;
//! [`run`] adds the shared fields and writes both.

use std::path::PathBuf;
use std::time::Instant;

use lke_core::ed_reference::{accuracy_metric, ed_evolve, match_beta_extrapolated, normalize, FockRep, ThermalSpectrum};
use lke_core::kinetics::GeneratorOptions;
use lke_core::observables::{density_polynomial, spin_z_polynomial, Observable, ObservableSet, ThermalExpansion};
use lke_core::operator_basis::cardinality;
use lke_core::states::{decoupled_superposition, energy_density, few_particle, particle_hole};
use lke_core::{
    BogoliubovTable, Error as CoreError, InitialState, KineticSystem, Model, ModelParams, Scheme, TimeSeries,
    TrajectoryConfig, Truncation, C64,
};
use serde_json::{json, Map, Value};

use crate::config::{Mode, RunConfig};
use crate::output::{num, write_json, Table};
use crate::CliError;

/// What a successful run wrote.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub csv: PathBuf,
    pub metadata: PathBuf,
    pub rows: usize,
    pub warnings: Vec<String>,
}

/// Accumulates the metadata sidecar.
#[derive(Default)]
struct Meta {
    runs: Vec<Value>,
    warnings: Vec<String>,
    notes: Vec<String>,
    extra: Map<String, Value>,
}

/// Validate, run the configured mode, write the CSV and metadata.
pub fn run(cfg: &RunConfig) -> Result<RunReport, CliError> {
    cfg.validate()?;
    let start = Instant::now();
    let (table, meta) = match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| CliError::Config(format!("cannot start {w} workers: {e}")))?
            .install(|| dispatch(cfg))?,
        None => dispatch(cfg)?,
    };
    let csv = cfg.output.csv.clone();
    let metadata = cfg.output.metadata_path();
    table.write(&csv)?;
    let mut doc = Map::new();
    doc.insert("mode".into(), serde_json::to_value(cfg.mode).expect("mode serializes"));
    doc.insert("config".into(), serde_json::to_value(cfg).expect("config serializes"));
    doc.insert("runs".into(), Value::Array(meta.runs));
    doc.extend(meta.extra);
    doc.insert("warnings".into(), json!(meta.warnings));
    doc.insert("notes".into(), json!(meta.notes));
    doc.insert("rows".into(), json!(table.rows.len()));
    doc.insert("wall_time_s".into(), json!(start.elapsed().as_secs_f64()));
    write_json(&metadata, &Value::Object(doc))?;
    Ok(RunReport { csv, metadata, rows: table.rows.len(), warnings: meta.warnings })
}

fn dispatch(cfg: &RunConfig) -> Result<(Table, Meta), CliError> {
    match cfg.mode {
        Mode::Lke => evolve_mode(cfg),
        Mode::Ed => ed_mode(cfg),
        Mode::Benchmark => benchmark_mode(cfg),
        Mode::Thermal => thermal_mode(cfg),
        Mode::Correlate => correlate_mode(cfg),
    }
}

/// Sample times of a trajectory; identical to those the integrator emits.
fn sample_times(t: &TrajectoryConfig) -> Vec<f64> {
    let (steps, dt) = t.steps();
    (0..=steps).filter(|s| s % t.sample_every == 0).map(|s| s as f64 * dt).collect()
}

/// Reject a basis whose state vectors alone exceed the memory budget, before
/// anything is enumerated.
fn check_feasible(scheme: Scheme, n: usize, budget: usize) -> Result<u128, CliError> {
    let card = cardinality(scheme, n);
    // state, four RK stages and one scratch vector of complex doubles
    let bytes = card as f64 * 16.0 * 6.0;
    if card > u32::MAX as u128 || bytes > budget as f64 {
        return Err(CoreError::Infeasible(format!(
            "{scheme} at N = {n} has {card} operators, about {:.1} GiB of state vectors (budget {:.1} GiB)",
            bytes / (1u64 << 30) as f64,
            budget as f64 / (1u64 << 30) as f64
        ))
        .into());
    }
    Ok(card)
}

fn initial_density(state: &InitialState, table: &BogoliubovTable) -> Result<f64, CliError> {
    Ok(state.expect(&density_polynomial(table.n), table)?.re)
}

/// One integration of the kinetic equations.
fn lke_trajectory(
    p: &ModelParams,
    scheme: Scheme,
    state: &InitialState,
    list: &[Observable],
    cfg: &RunConfig,
    label: &str,
    meta: &mut Meta,
) -> Result<TimeSeries, CliError> {
    let card = check_feasible(scheme, p.n, cfg.memory_budget_bytes())?;
    let model = Model::new(*p)?;
    let trunc = Truncation::new(scheme, p.n)?;
    let opts = GeneratorOptions { audit: false, memory_budget: cfg.memory_budget_bytes() };
    let sys = KineticSystem::build_with(&model.coeffs, &trunc, cfg.hamiltonian, opts)?;
    let obs = ObservableSet::new(list, &trunc, &model.coeffs)?;
    let x0 = state.initial_vector(&trunc, &model.table)?;
    let density = initial_density(state, &model.table)?;
    let valid = few_particle(density, cfg.density_threshold);
    if !valid {
        meta.warnings.push(format!(
            "{label}: initial density {density:.4} is outside the few-particle regime (threshold {})",
            cfg.density_threshold
        ));
    }
    let tr = sys.evolve(&x0, &cfg.trajectory, &|x| obs.eval(x), &obs.names())?;
    meta.warnings.extend(tr.warnings.iter().map(|w| format!("{label}: {w}")));
    meta.runs.push(json!({
        "label": label,
        "model": p,
        "initial_state": state,
        "truncation": scheme,
        "cardinality": card as u64,
        "dt": tr.dt,
        "halving_residual": tr.halving_residual,
        "dropped_terms": sys.dropped.terms,
        "dropped_max_abs": sys.dropped.max_abs,
        "initial_density": density,
        "few_particle": valid,
    }));
    Ok(tr.series)
}

/// Runs the configured state, routing `chi` states and superpositions through
/// the particle-hole mapping when asked to.
fn lke_series(
    p: &ModelParams,
    scheme: Scheme,
    list: &[Observable],
    cfg: &RunConfig,
    meta: &mut Meta,
) -> Result<TimeSeries, CliError> {
    let state = cfg.initial_state;
    if !cfg.particle_hole {
        return lke_trajectory(p, scheme, &state, list, cfg, "direct", meta);
    }
    let (mirror, warn) = particle_hole(p);
    meta.warnings.extend(warn);
    match state {
        InitialState::Chi(level) => {
            meta.notes.push("chi state evolved as psi under (-h, -J_x); Sz and Cx1 negated, density mapped to 1 - D".into());
            let mut s = lke_trajectory(&mirror, scheme, &InitialState::Psi(level), list, cfg, "particle_hole", meta)?;
            for row in s.values.iter_mut() {
                for (o, x) in list.iter().zip(row.iter_mut()) {
                    match o {
                        Observable::Sz | Observable::Cx1 => *x = -*x,
                        Observable::Density => *x = 1.0 - *x,
                        Observable::Czz(_) | Observable::Energy => {}
                    }
                }
            }
            Ok(s)
        }
        InitialState::Superposition { y1, y2, level } => {
            meta.notes.push("superposition evolved by decoupling into psi branches under (h, J_x) and (-h, -J_x)".into());
            let psi = InitialState::Psi(level);
            let down = lke_trajectory(p, scheme, &psi, list, cfg, "down_branch", meta)?;
            let up = lke_trajectory(&mirror, scheme, &psi, list, cfg, "up_branch_mirrored", meta)?;
            let table = BogoliubovTable::new(p);
            let initial = state.expect(&spin_z_polynomial(&table), &table)?.re;
            Ok(decoupled_superposition(y1, y2, &down, &up, 0, initial)?)
        }
        _ => Err(CliError::Config(format!("particle_hole applies to chi and superposition states, not {state}"))),
    }
}

fn series_table(s: &TimeSeries) -> Table {
    let mut header = vec!["t".to_string()];
    header.extend(s.names.iter().cloned());
    let mut t = Table::new(header);
    for (time, row) in s.times.iter().zip(&s.values) {
        let mut cells = vec![num(*time)];
        cells.extend(row.iter().map(|v| num(*v)));
        t.push(cells);
    }
    t
}

fn evolve_mode(cfg: &RunConfig) -> Result<(Table, Meta), CliError> {
    let mut meta = Meta::default();
    let s = lke_series(&cfg.model, cfg.truncation, &cfg.observable_list(), cfg, &mut meta)?;
    Ok((series_table(&s), meta))
}

fn fock_state(p: &ModelParams, state: &InitialState) -> Result<Vec<C64>, CliError> {
    let fock = FockRep::new(p)?;
    let mut v = vec![C64::new(0.0, 0.0); fock.dim()];
    for (w, ps) in state.components(&fock.table)? {
        for (o, x) in v.iter_mut().zip(fock.pair_state(&ps)?) {
            *o += w * x;
        }
    }
    normalize(&mut v);
    Ok(v)
}

fn ed_mode(cfg: &RunConfig) -> Result<(Table, Meta), CliError> {
    let list = cfg.observable_list();
    if list.iter().any(|o| matches!(o, Observable::Energy | Observable::Density)) {
        return Err(CliError::Config("ed mode tracks sz, cx1 and czz only".into()));
    }
    let psi = fock_state(&cfg.model, &cfg.initial_state)?;
    let s = ed_evolve(&cfg.model, &psi, &list, &sample_times(&cfg.trajectory))?;
    let mut meta = Meta::default();
    meta.runs.push(json!({ "label": "ed", "model": cfg.model, "hilbert_dim": 1u64 << cfg.model.n }));
    Ok((series_table(&s), meta))
}

fn benchmark_mode(cfg: &RunConfig) -> Result<(Table, Meta), CliError> {
    let mut meta = Meta::default();
    let schemes = &cfg.benchmark.schemes;
    let mut header = vec!["alpha".to_string(), "t".to_string()];
    header.extend(schemes.iter().map(|s| format!("delta_{s}")));
    let mut table = Table::new(header);
    let times = sample_times(&cfg.trajectory);
    for &alpha in &cfg.benchmark.alphas {
        let p = ModelParams { alpha, ..cfg.model };
        p.validate()?;
        let ed = ed_evolve(&p, &fock_state(&p, &cfg.initial_state)?, &[Observable::Sz], &times)?.column(0);
        let mut cols = Vec::with_capacity(schemes.len());
        for &scheme in schemes {
            match lke_series(&p, scheme, &[Observable::Sz], cfg, &mut meta) {
                Ok(s) => cols.push(accuracy_metric(&s.column(0), &ed, &times)?),
                Err(CliError::Core(CoreError::BlowUp { t, ratio })) => {
                    meta.notes.push(format!("{scheme} at alpha = {alpha} blew up at t = {t} (ratio {ratio:.3e}); column is NaN"));
                    cols.push(vec![f64::NAN; times.len()]);
                }
                Err(e) => return Err(e),
            }
        }
        for (i, t) in times.iter().enumerate() {
            let mut row = vec![num(alpha), num(*t)];
            row.extend(cols.iter().map(|c| num(c[i])));
            table.push(row);
        }
    }
    Ok((table, meta))
}

fn thermal_mode(cfg: &RunConfig) -> Result<(Table, Meta), CliError> {
    let p = cfg.model;
    let th = &cfg.thermal;
    let mut meta = Meta::default();
    let mut table = Table::new(["source", "n", "beta", "energy_density", "sz"].map(String::from).to_vec());
    for &n in &th.sizes {
        let spec = ThermalSpectrum::new(&ModelParams { n, ..p })?;
        for &beta in &th.betas {
            let (nu, sz) = spec.thermal(beta);
            table.push(vec!["ed".into(), n.to_string(), num(beta), num(nu), num(sz)]);
        }
    }
    let ex = ThermalExpansion::new(&p);
    for &beta in &th.betas {
        table.push(vec!["expansion".into(), p.n.to_string(), num(beta), num(ex.energy_density(beta)), num(ex.spin_z(beta))]);
    }
    meta.extra.insert("expansion".into(), json!(ex));
    if th.match_state {
        let target = energy_density(&cfg.initial_state, &p)?;
        let m = match_beta_extrapolated(&p, target, &th.sizes, p.n)?;
        meta.extra.insert(
            "beta_match".into(),
            json!({
                "initial_state": cfg.initial_state,
                "energy_density": target,
                "ed": m,
                "expansion_beta": ex.invert(target),
            }),
        );
    }
    Ok((table, meta))
}

fn correlate_mode(cfg: &RunConfig) -> Result<(Table, Meta), CliError> {
    let n = cfg.model.n as i64;
    let ms: Vec<i64> = if cfg.czz.is_empty() { (1..=n / 2).collect() } else { cfg.czz.clone() };
    let list: Vec<Observable> = ms.iter().map(|&m| Observable::Czz(m)).collect();
    let mut meta = Meta::default();
    let s = lke_series(&cfg.model, cfg.truncation, &list, cfg, &mut meta)?;
    let floor = cfg.correlate.log_floor;
    let mut table = Table::new(["t", "m", "czz", "log10_abs"].map(String::from).to_vec());
    for (t, row) in s.times.iter().zip(&s.values) {
        for (m, v) in ms.iter().zip(row) {
            let lg = if *v == 0.0 { floor } else { v.abs().log10().max(floor) };
            table.push(vec![num(*t), m.to_string(), num(*v), num(lg)]);
        }
    }
    Ok((table, meta))
}
