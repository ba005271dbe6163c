//! Assembly of the truncated linear system `dX/dt = D X` and its integration.
//!
//! Row `i` of `D` holds the coefficients of `-i [O_i, H]` on the basis; terms
//! whose canonical key lies outside the truncation are dropped.

use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fermion_algebra::{canonicalize, wick_product, Key, Polynomial, PRUNE};
use crate::model::{conserving_k4, HamiltonianCoeffs, Quartic};
use crate::operator_basis::Truncation;
use crate::C64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Which part of the Hamiltonian enters the generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianMode {
    Full,
    QuadraticOnly,
}

/// The quadratic part `H0 + sum_k [A_I η_{-k}η_k + A_II η†_kη_k + A_III η†_kη†_{-k}]`.
pub fn quadratic_polynomial(coeffs: &HamiltonianCoeffs) -> Polynomial {
    let n = coeffs.n;
    let mut h = Polynomial::identity(C64::new(coeffs.h0, 0.0));
    let mut add = |ops: &[crate::Op], c: C64| {
        if let Some(m) = canonicalize(ops, c) {
            h.add(m.key, m.coeff);
        }
    };
    for k in 0..n {
        let nk = n - 1 - k;
        add(&[crate::Op::ann(nk), crate::Op::ann(k)], coeffs.a1[k]);
        add(&[crate::Op::cre(k), crate::Op::ann(k)], C64::new(coeffs.a2[k], 0.0));
        add(&[crate::Op::cre(k), crate::Op::cre(nk)], coeffs.a3(k));
    }
    h.prune(PRUNE);
    h
}

/// The quartic part `sum_λ sum_{k1..k4} B_λ(k) (operator string)`, keeping only
/// canonical keys accepted by `keep`.
pub fn quartic_polynomial(coeffs: &HamiltonianCoeffs, keep: impl Fn(&Key) -> bool + Sync) -> Polynomial {
    let n = coeffs.n;
    let chunks: Vec<Vec<(Key, C64)>> = (0..n)
        .into_par_iter()
        .map(|k1| {
            let mut out = Vec::new();
            for k2 in 0..n {
                for k3 in 0..n {
                    let k = [k1, k2, k3, conserving_k4(n, k1, k2, k3)];
                    for lam in Quartic::ALL {
                        let b = coeffs.b(lam, k);
                        if b.norm() < PRUNE {
                            continue;
                        }
                        if let Some(m) = canonicalize(&lam.operators(n, k), b) {
                            if keep(&m.key) {
                                out.push((m.key, m.coeff));
                            }
                        }
                    }
                }
            }
            out
        })
        .collect();
    let mut h = Polynomial::new();
    for chunk in chunks {
        for (k, c) in chunk {
            h.add(k, c);
        }
    }
    h.prune(PRUNE);
    h
}

pub fn hamiltonian_polynomial(coeffs: &HamiltonianCoeffs, mode: HamiltonianMode) -> Polynomial {
    let mut h = quadratic_polynomial(coeffs);
    if mode == HamiltonianMode::Full && coeffs.g != 0.0 {
        h.add_poly(&quartic_polynomial(coeffs, |_| true), C64::new(1.0, 0.0));
        h.prune(PRUNE);
    }
    h
}

/// Row-compressed complex matrix.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Csr {
    pub dim: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<u32>,
    pub vals: Vec<C64>,
}

impl Csr {
    fn from_rows(rows: Vec<Vec<(u32, C64)>>) -> Self {
        let dim = rows.len();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        row_ptr.push(0);
        let nnz = rows.iter().map(|r| r.len()).sum();
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        for r in rows {
            for (c, v) in r {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Csr { dim, row_ptr, cols, vals }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().map(|&c| c as usize).zip(self.vals[r].iter().copied())
    }

    /// `y = A x`; rows are independent so the result does not depend on the
    /// number of worker threads.
    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        y.par_iter_mut().with_min_len(256).enumerate().for_each(|(i, yi)| {
            let mut acc = ZERO;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[p] * x[self.cols[p] as usize];
            }
            *yi = acc;
        });
    }
}

/// Options for [`KineticSystem::build_with`].
#[derive(Clone, Copy, Debug)]
pub struct GeneratorOptions {
    /// Expand every commutator in full instead of skipping contractions that
    /// can only produce keys above the truncation's maximal degree. Slower;
    /// makes the dropped-term statistics complete.
    pub audit: bool,
    /// Upper bound on the estimated memory of `D`, in bytes.
    pub memory_budget: usize,
}

impl Default for GeneratorOptions {
    fn default() -> Self {
        GeneratorOptions { audit: false, memory_budget: 8 << 30 }
    }
}

/// Terms of `-i[O_i, H]` that fell outside the truncation.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DropStats {
    pub terms: usize,
    pub max_abs: f64,
}

#[derive(Clone, Debug)]
pub struct KineticSystem {
    pub truncation: Truncation,
    pub mode: HamiltonianMode,
    pub d: Csr,
    pub dropped: DropStats,
}

/// `H` terms indexed by the operators they contain, so each row only visits
/// terms that can contract with it.
struct TermIndex {
    terms: Vec<(Key, C64)>,
    by_cre: FxHashMap<u16, Vec<u32>>,
    by_ann: FxHashMap<u16, Vec<u32>>,
    by_cre_pair: FxHashMap<(u16, u16), Vec<u32>>,
    by_ann_pair: FxHashMap<(u16, u16), Vec<u32>>,
}

impl TermIndex {
    fn new(h: &Polynomial) -> Self {
        let terms: Vec<(Key, C64)> = h.sorted_terms().into_iter().filter(|(k, _)| !k.is_identity()).collect();
        let mut ix = TermIndex {
            terms,
            by_cre: FxHashMap::default(),
            by_ann: FxHashMap::default(),
            by_cre_pair: FxHashMap::default(),
            by_ann_pair: FxHashMap::default(),
        };
        for (t, (k, _)) in ix.terms.iter().enumerate() {
            let t = t as u32;
            let push_all = |xs: &[u16], single: &mut FxHashMap<u16, Vec<u32>>, pair: &mut FxHashMap<(u16, u16), Vec<u32>>| {
                for (a, &i) in xs.iter().enumerate() {
                    single.entry(i).or_default().push(t);
                    for &j in &xs[a + 1..] {
                        pair.entry((i, j)).or_default().push(t);
                    }
                }
            };
            push_all(k.creators(), &mut ix.by_cre, &mut ix.by_cre_pair);
            push_all(k.annihilators(), &mut ix.by_ann, &mut ix.by_ann_pair);
        }
        ix
    }

    /// Terms with at least `c` of their creators (or annihilators) among `idx`.
    fn candidates(&self, idx: &[u16], c: usize, creators: bool, out: &mut Vec<u32>, seen: &mut FxHashSet<u32>) {
        out.clear();
        seen.clear();
        let (single, pair) = if creators { (&self.by_cre, &self.by_cre_pair) } else { (&self.by_ann, &self.by_ann_pair) };
        if c >= 2 {
            for (a, &i) in idx.iter().enumerate() {
                for &j in &idx[a + 1..] {
                    if let Some(list) = pair.get(&(i, j)) {
                        for &t in list {
                            if seen.insert(t) {
                                out.push(t);
                            }
                        }
                    }
                }
            }
        } else {
            for &i in idx {
                if let Some(list) = single.get(&i) {
                    for &t in list {
                        if seen.insert(t) {
                            out.push(t);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
    }
}

impl KineticSystem {
    pub fn build(coeffs: &HamiltonianCoeffs, trunc: &Truncation, mode: HamiltonianMode) -> Result<Self> {
        Self::build_with(coeffs, trunc, mode, GeneratorOptions::default())
    }

    pub fn build_with(
        coeffs: &HamiltonianCoeffs,
        trunc: &Truncation,
        mode: HamiltonianMode,
        opts: GeneratorOptions,
    ) -> Result<Self> {
        if coeffs.n != trunc.n {
            return Err(Error::param(format!("model has N = {} but truncation has N = {}", coeffs.n, trunc.n)));
        }
        // A degree-2 row reaches degree 2 only by contracting two creators or
        // two annihilators of a pair mode with a quartic term, and momentum
        // conservation then forces that term to be pair structured.
        let h = if !opts.audit && trunc.max_degree() <= 2 && mode == HamiltonianMode::Full && coeffs.g != 0.0 {
            let mut h = quadratic_polynomial(coeffs);
            h.add_poly(&quartic_polynomial(coeffs, |k| k.is_pair_structured(coeffs.n)), C64::new(1.0, 0.0));
            h.prune(PRUNE);
            h
        } else {
            hamiltonian_polynomial(coeffs, mode)
        };
        Self::from_polynomial(&h, trunc, mode, opts)
    }

    /// Generator for an arbitrary Hamiltonian polynomial.
    pub fn from_polynomial(h: &Polynomial, trunc: &Truncation, mode: HamiltonianMode, opts: GeneratorOptions) -> Result<Self> {
        let index = TermIndex::new(h);
        let dmax = if opts.audit { usize::MAX / 4 } else { trunc.max_degree() };

        let row = |i: usize, cand: &mut Vec<u32>, seen: &mut FxHashSet<u32>| -> (Vec<(u32, C64)>, DropStats) {
            let o = trunc.key(i);
            let mut acc: FxHashMap<Key, C64> = FxHashMap::default();
            let d = o.degree();
            for creators in [true, false] {
                // creators: O * t, contracting O's annihilators with t's creators
                let idx = if creators { o.annihilators() } else { o.creators() };
                if idx.is_empty() {
                    continue;
                }
                for deg_t in [2usize, 4, 6, 8] {
                    let need = ((d + deg_t).saturating_sub(dmax)).div_ceil(2).max(1);
                    if need > idx.len() {
                        continue;
                    }
                    index.candidates(idx, need, creators, cand, seen);
                    for &t in cand.iter() {
                        let (tk, tc) = index.terms[t as usize];
                        if tk.degree() != deg_t {
                            continue;
                        }
                        // -i [O, t] = -i O t + i t O
                        if creators {
                            let c = C64::new(0.0, -1.0) * tc;
                            wick_product(&o, &tk, need, |k, s| *acc.entry(k).or_insert(ZERO) += c * s);
                        } else {
                            let c = C64::new(0.0, 1.0) * tc;
                            wick_product(&tk, &o, need, |k, s| *acc.entry(k).or_insert(ZERO) += c * s);
                        }
                    }
                }
            }
            let mut out = Vec::new();
            let mut dropped = DropStats::default();
            for (k, c) in acc {
                match trunc.position(&k) {
                    Some(j) if c.norm() >= PRUNE => out.push((j as u32, c)),
                    Some(_) => {}
                    None if c.norm() > 1e-12 => {
                        dropped.terms += 1;
                        dropped.max_abs = dropped.max_abs.max(c.norm());
                    }
                    None => {}
                }
            }
            out.sort_unstable_by_key(|e| e.0);
            (out, dropped)
        };

        // estimate memory from a sample of rows before building everything
        let dim = trunc.len();
        let sample: Vec<usize> = (0..dim).step_by((dim / 64).max(1)).collect();
        let sampled_nnz: usize = sample
            .par_iter()
            .map_init(|| (Vec::new(), FxHashSet::default()), |(c, s), &i| row(i, c, s).0.len())
            .sum();
        let est = (sampled_nnz as f64 / sample.len() as f64) * dim as f64 * 24.0;
        if est > opts.memory_budget as f64 {
            return Err(Error::Infeasible(format!(
                "generator for {} operators needs about {:.1} GiB (budget {:.1} GiB)",
                dim,
                est / (1u64 << 30) as f64,
                opts.memory_budget as f64 / (1u64 << 30) as f64
            )));
        }

        let built: Vec<(Vec<(u32, C64)>, DropStats)> = (0..dim)
            .into_par_iter()
            .map_init(|| (Vec::new(), FxHashSet::default()), |(c, s), i| row(i, c, s))
            .collect();
        let mut dropped = DropStats::default();
        let rows = built
            .into_iter()
            .map(|(r, ds)| {
                dropped.terms += ds.terms;
                dropped.max_abs = dropped.max_abs.max(ds.max_abs);
                r
            })
            .collect();
        Ok(KineticSystem { truncation: trunc.clone(), mode, d: Csr::from_rows(rows), dropped })
    }

    pub fn dim(&self) -> usize {
        self.d.dim
    }

    pub fn evolve(
        &self,
        x0: &[C64],
        cfg: &TrajectoryConfig,
        observe: &(dyn Fn(&[C64]) -> Vec<f64> + Sync),
        names: &[String],
    ) -> Result<Trajectory> {
        evolve(&self.d, x0, cfg, observe, names)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    Rk4,
    Rk4WithHalvingCheck,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryConfig {
    pub t_max: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
    #[serde(default = "default_method")]
    pub method: Integrator,
    /// Abort when `|X|` exceeds this multiple of `|X0|`.
    #[serde(default = "default_blowup")]
    pub blowup_ratio: f64,
}

fn default_dt() -> f64 {
    0.01
}
fn default_sample_every() -> usize {
    10
}
fn default_method() -> Integrator {
    Integrator::Rk4
}
fn default_blowup() -> f64 {
    10.0
}

/// Tolerance of the step-halving comparison.
pub const HALVING_TOL: f64 = 1e-8;

impl TrajectoryConfig {
    pub fn new(t_max: f64, dt: f64, sample_every: usize) -> Self {
        TrajectoryConfig { t_max, dt, sample_every, method: Integrator::Rk4, blowup_ratio: 10.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::param(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_max >= 0.0) || !self.t_max.is_finite() {
            return Err(Error::param(format!("t_max must be >= 0, got {}", self.t_max)));
        }
        if self.sample_every == 0 {
            return Err(Error::param("sample_every must be >= 1"));
        }
        if !(self.blowup_ratio > 1.0) {
            return Err(Error::param("blowup_ratio must exceed 1"));
        }
        Ok(())
    }

    /// Number of steps and the step actually used, which divides `t_max`.
    pub fn steps(&self) -> (usize, f64) {
        let n = (self.t_max / self.dt).round().max(0.0) as usize;
        if n == 0 {
            (0, self.dt)
        } else {
            (n, self.t_max / n as f64)
        }
    }
}

/// Named scalar series on a common time grid. `values[s][c]` is column `c`
/// at sample `s`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub names: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl TimeSeries {
    pub fn new(names: Vec<String>) -> Self {
        TimeSeries { times: Vec::new(), names, values: Vec::new() }
    }

    pub fn scalar(name: &str, times: Vec<f64>, values: Vec<f64>) -> Self {
        TimeSeries { times, names: vec![name.to_string()], values: values.into_iter().map(|v| vec![v]).collect() }
    }

    pub fn push(&mut self, t: f64, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.names.len());
        self.times.push(t);
        self.values.push(row);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        self.values.iter().map(|r| r[c]).collect()
    }

    pub fn named(&self, name: &str) -> Option<Vec<f64>> {
        self.column_index(name).map(|c| self.column(c))
    }

    /// Error unless `other` uses the same sample times.
    pub fn check_grid(&self, other: &TimeSeries) -> Result<()> {
        if self.times.len() != other.times.len()
            || self.times.iter().zip(&other.times).any(|(a, b)| (a - b).abs() > 1e-9 * (1.0 + a.abs()))
        {
            return Err(Error::GridMismatch(format!(
                "{} samples up to t = {:?} vs {} samples up to t = {:?}",
                self.times.len(),
                self.times.last(),
                other.times.len(),
                other.times.last()
            )));
        }
        Ok(())
    }
}

/// Result of [`evolve`].
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub series: TimeSeries,
    pub final_state: Vec<C64>,
    pub dt: f64,
    /// Max difference of the observables against a run with `dt/2`.
    pub halving_residual: Option<f64>,
    pub warnings: Vec<String>,
}

fn norm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn integrate(
    d: &Csr,
    x0: &[C64],
    steps: usize,
    dt: f64,
    every: usize,
    blowup: f64,
    observe: &(dyn Fn(&[C64]) -> Vec<f64> + Sync),
    names: &[String],
) -> Result<(TimeSeries, Vec<C64>)> {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut k1 = vec![ZERO; n];
    let mut k2 = vec![ZERO; n];
    let mut k3 = vec![ZERO; n];
    let mut k4 = vec![ZERO; n];
    let mut tmp = vec![ZERO; n];
    let mut series = TimeSeries::new(names.to_vec());
    series.push(0.0, observe(&x));
    let limit = blowup * norm(x0).max(f64::MIN_POSITIVE);
    let h = C64::new(dt, 0.0);
    for step in 1..=steps {
        d.matvec(&x, &mut k1);
        tmp.par_iter_mut().zip(&x).zip(&k1).for_each(|((t, x), k)| *t = x + k * (0.5 * dt));
        d.matvec(&tmp, &mut k2);
        tmp.par_iter_mut().zip(&x).zip(&k2).for_each(|((t, x), k)| *t = x + k * (0.5 * dt));
        d.matvec(&tmp, &mut k3);
        tmp.par_iter_mut().zip(&x).zip(&k3).for_each(|((t, x), k)| *t = x + k * dt);
        d.matvec(&tmp, &mut k4);
        x.par_iter_mut()
            .zip(k1.par_iter().zip(&k2).zip(k3.par_iter().zip(&k4)))
            .for_each(|(x, ((a, b), (c, e)))| *x += h / 6.0 * (a + 2.0 * b + 2.0 * c + e));
        if step % every == 0 || step == steps {
            let nx = norm(&x);
            let t = step as f64 * dt;
            if !nx.is_finite() || nx > limit {
                return Err(Error::BlowUp { t, ratio: nx / norm(x0) });
            }
            if step % every == 0 {
                series.push(t, observe(&x));
            }
        }
    }
    Ok((series, x))
}

/// Fixed-step classical RK4 for `dX/dt = D X`, sampling `observe` every
/// `sample_every` steps.
pub fn evolve(
    d: &Csr,
    x0: &[C64],
    cfg: &TrajectoryConfig,
    observe: &(dyn Fn(&[C64]) -> Vec<f64> + Sync),
    names: &[String],
) -> Result<Trajectory> {
    cfg.validate()?;
    if x0.len() != d.dim {
        return Err(Error::param(format!("initial vector has length {} but the basis has {}", x0.len(), d.dim)));
    }
    let (steps, dt) = cfg.steps();
    let (series, final_state) = integrate(d, x0, steps, dt, cfg.sample_every, cfg.blowup_ratio, observe, names)?;
    let mut out = Trajectory { series, final_state, dt, halving_residual: None, warnings: Vec::new() };
    if cfg.method == Integrator::Rk4WithHalvingCheck {
        let (fine, _) = integrate(d, x0, 2 * steps, dt / 2.0, 2 * cfg.sample_every, cfg.blowup_ratio, observe, names)?;
        let res = out
            .series
            .values
            .iter()
            .zip(&fine.values)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max);
        if res >= HALVING_TOL {
            out.warnings.push(format!("step-halving residual {res:.3e} exceeds {HALVING_TOL:e}; reduce dt"));
        }
        out.halving_residual = Some(res);
    }
    Ok(out)
}

/// A linear functional `X -> c0 + sum_j c_j X_j` over a truncation.
#[derive(Clone, Debug, Default)]
pub struct Functional {
    pub constant: C64,
    pub terms: Vec<(usize, C64)>,
}

impl Functional {
    /// Map every key of `poly` to its basis position. Keys that are not pair
    /// structured have zero expectation in the states this crate evolves and
    /// are skipped; any other missing key is an error.
    pub fn from_polynomial(poly: &Polynomial, trunc: &Truncation) -> Result<Self> {
        let mut f = Functional::default();
        for (k, c) in poly.sorted_terms() {
            if k.is_identity() {
                f.constant += c;
                continue;
            }
            match trunc.position(&k) {
                Some(j) => f.terms.push((j, c)),
                None if !k.is_pair_structured(trunc.n) || k.degree() % 2 != 0 => {}
                None => return Err(Error::MissingOperator(format!("{k} (truncation {})", trunc.scheme))),
            }
        }
        Ok(f)
    }

    pub fn eval(&self, x: &[C64]) -> C64 {
        self.terms.iter().fold(self.constant, |acc, &(j, c)| acc + c * x[j])
    }
}
