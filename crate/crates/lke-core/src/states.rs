//! Truncated polarized states in the pair-mode representation.
//!
//! The positive half-zone gives `N/2` pair modes `p`, each with the two states
//! `|0>_p` and `|1>_p = η†_{-k}η†_k |0>_p`. Pair creators commute, so
//!
//! `|ψ^n> = W_n^{-1} sum_{|S| <= n} prod_{p in S} β_p |S>`, `β_p = -i v_k/u_k`,
//!
//! and the mirrored `|χ^n>` swaps the roles of empty and occupied pairs (at
//! most `n` empty pairs, amplitude `β_p` on the empty ones) with the global
//! phase `i^{-N/2}`, which makes `|χ^{N/2}>` the fully up-polarized state.
//!
//! A pair-structured monomial acts on each touched mode with a single nonzero
//! local matrix element; untouched modes enter only through a generating
//! polynomial that counts their occupations. Everything else has zero
//! expectation value.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::fermion_algebra::{pair_mode, Key, Polynomial};
use crate::kinetics::{hamiltonian_polynomial, HamiltonianMode, TimeSeries};
use crate::model::{pairwise_sum, BogoliubovTable, HamiltonianCoeffs, ModelParams};
use crate::operator_basis::Truncation;
use crate::C64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// A state `phase * sum_S [lo <= |S| <= hi] prod_p (alpha_p or beta_p) |S>`,
/// not normalized.
#[derive(Clone, Debug, PartialEq)]
pub struct PairState {
    pub alpha: Vec<C64>,
    pub beta: Vec<C64>,
    pub lo: usize,
    pub hi: usize,
    pub phase: C64,
}

impl PairState {
    pub fn modes(&self) -> usize {
        self.alpha.len()
    }
}

/// `⟨0|O|0'⟩`-style local element on one pair mode: the single `(s, s')` with
/// `⟨s|O_p|s'⟩ != 0` and its value.
fn local_element(ops: &[(bool, bool)]) -> Option<(usize, usize, f64)> {
    // two-mode Fock space, bit 0 = +k, bit 1 = -k
    let apply = |(bits, amp): (u8, f64), (dagger, pos): (bool, bool)| -> Option<(u8, f64)> {
        let j = if pos { 0 } else { 1 };
        let occ = bits >> j & 1 == 1;
        if occ == dagger {
            return None;
        }
        let sign = if (bits & ((1 << j) - 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        Some((bits ^ (1 << j), amp * sign))
    };
    // |1> = η†_{-k} η†_k |00>
    let pair = |s: usize| -> (u8, f64) {
        if s == 0 {
            (0, 1.0)
        } else {
            let st = apply((0, 1.0), (true, true)).unwrap();
            apply(st, (true, false)).unwrap()
        }
    };
    for sp in 0..2 {
        let mut st = Some(pair(sp));
        for &op in ops.iter().rev() {
            st = st.and_then(|x| apply(x, op));
        }
        if let Some((bits, amp)) = st {
            for s in 0..2 {
                let (b, a) = pair(s);
                if b == bits {
                    return Some((s, sp, amp * a));
                }
            }
        }
    }
    None
}

/// Matrix elements `⟨bra|O|ket⟩` of canonical monomials between two pair states.
pub struct PairEvaluator<'a> {
    bra: &'a PairState,
    ket: &'a PairState,
    n: usize,
}

impl<'a> PairEvaluator<'a> {
    pub fn new(bra: &'a PairState, ket: &'a PairState, n: usize) -> Self {
        assert_eq!(bra.modes(), n / 2);
        assert_eq!(ket.modes(), n / 2);
        PairEvaluator { bra, ket, n }
    }

    /// Coefficients of `prod_{p not in touched} (conj(a_p) a'_p + z conj(b_p) b'_p)`.
    fn untouched(&self, touched: &[usize]) -> Vec<C64> {
        let m = self.n / 2;
        let mut poly = vec![ZERO; m + 1];
        poly[0] = ONE;
        let mut deg = 0;
        for p in 0..m {
            if touched.contains(&p) {
                continue;
            }
            let a = self.bra.alpha[p].conj() * self.ket.alpha[p];
            let b = self.bra.beta[p].conj() * self.ket.beta[p];
            deg += 1;
            for j in (0..=deg).rev() {
                let lower = if j > 0 { poly[j - 1] * b } else { ZERO };
                poly[j] = poly[j] * a + lower;
            }
        }
        poly
    }

    fn element(&self, key: &Key, cache: &mut FxHashMap<Vec<usize>, Vec<C64>>) -> C64 {
        if key.degree() % 2 != 0 || !key.is_pair_structured(self.n) {
            return ZERO;
        }
        if key.is_identity() {
            return self.overlap(cache);
        }
        // stable partition of the factor string by pair mode
        let ops: Vec<(usize, bool, bool)> = key
            .ops()
            .map(|op| {
                let (mode, pos) = pair_mode(self.n, op.k as usize);
                (mode, op.dagger, pos)
            })
            .collect();
        let mut inversions = 0;
        for i in 0..ops.len() {
            for j in i + 1..ops.len() {
                if ops[i].0 > ops[j].0 {
                    inversions += 1;
                }
            }
        }
        let mut value = C64::new(if inversions % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
        let mut touched: Vec<usize> = ops.iter().map(|o| o.0).collect();
        touched.sort_unstable();
        touched.dedup();
        let (mut occ_bra, mut occ_ket) = (0, 0);
        for &p in &touched {
            let local: Vec<(bool, bool)> = ops.iter().filter(|o| o.0 == p).map(|o| (o.1, o.2)).collect();
            let Some((s, sp, amp)) = local_element(&local) else { return ZERO };
            let ab = if s == 0 { self.bra.alpha[p] } else { self.bra.beta[p] };
            let ak = if sp == 0 { self.ket.alpha[p] } else { self.ket.beta[p] };
            value *= ab.conj() * ak * amp;
            occ_bra += s;
            occ_ket += sp;
        }
        if value == ZERO {
            return ZERO;
        }
        let poly = cache.entry(touched.clone()).or_insert_with(|| self.untouched(&touched));
        value * self.count_sum(poly, occ_bra, occ_ket)
    }

    fn count_sum(&self, poly: &[C64], occ_bra: usize, occ_ket: usize) -> C64 {
        let mut acc = ZERO;
        for (m, w) in poly.iter().enumerate() {
            let (a, b) = (m + occ_bra, m + occ_ket);
            if (self.bra.lo..=self.bra.hi).contains(&a) && (self.ket.lo..=self.ket.hi).contains(&b) {
                acc += w;
            }
        }
        acc * self.bra.phase.conj() * self.ket.phase
    }

    fn overlap(&self, cache: &mut FxHashMap<Vec<usize>, Vec<C64>>) -> C64 {
        let poly = cache.entry(Vec::new()).or_insert_with(|| self.untouched(&[]));
        let poly = poly.clone();
        self.count_sum(&poly, 0, 0)
    }

    pub fn matrix_element(&self, key: &Key) -> C64 {
        self.element(key, &mut FxHashMap::default())
    }

    /// Elements for many keys, in parallel.
    pub fn matrix_elements(&self, keys: &[Key]) -> Vec<C64> {
        keys.par_iter().map_init(FxHashMap::default, |cache, k| self.element(k, cache)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Flavor {
    /// `|ψ^n>`, built on the down-polarized state.
    Down,
    /// `|χ^n>`, built on the up-polarized state.
    Up,
}

/// Number of pairs kept in a truncated polarized state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Level {
    Pairs(usize),
    /// `N/2` pairs: the fully polarized state.
    All,
}

impl Level {
    pub fn resolve(self, n_sites: usize) -> Result<usize> {
        let m = n_sites / 2;
        match self {
            Level::All => Ok(m),
            Level::Pairs(k) if (1..=m).contains(&k) => Ok(k),
            Level::Pairs(k) => Err(Error::param(format!("truncation level {k} outside 1..={m}"))),
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Pairs(k) => write!(f, "{k}"),
            Level::All => write!(f, "max"),
        }
    }
}

impl FromStr for Level {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "max" {
            return Ok(Level::All);
        }
        s.parse().map(Level::Pairs).map_err(|_| Error::param(format!("bad truncation level {s:?}")))
    }
}

/// Elementary symmetric polynomials `e_0..e_m` of `w`.
pub fn elementary_symmetric(w: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; w.len() + 1];
    e[0] = 1.0;
    for (i, &x) in w.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            e[j] += e[j - 1] * x;
        }
    }
    e
}

/// A truncated polarized state `|ψ^n>` or `|χ^n>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PolarizedState {
    pub flavor: Flavor,
    pub n: usize,
}

impl PolarizedState {
    pub fn new(flavor: Flavor, n: usize, n_sites: usize) -> Result<Self> {
        let n = Level::Pairs(n).resolve(n_sites)?;
        Ok(PolarizedState { flavor, n })
    }

    /// `L_s = e_s(v_k^2/u_k^2)`, `s = 0..=N/2`, with `L_0 = 1`.
    pub fn l_values(table: &BogoliubovTable) -> Vec<f64> {
        let w: Vec<f64> = table.ratios().iter().map(|r| r * r).collect();
        elementary_symmetric(&w)
    }

    /// `W_n^2 = sum_{s <= n} L_s`.
    pub fn w_squared(&self, table: &BogoliubovTable) -> f64 {
        pairwise_sum(&Self::l_values(table)[..=self.n])
    }

    pub fn pair_state(&self, table: &BogoliubovTable) -> PairState {
        let m = table.n / 2;
        let beta: Vec<C64> = table.ratios().iter().map(|r| C64::new(0.0, -r)).collect();
        let ones = vec![ONE; m];
        match self.flavor {
            Flavor::Down => PairState { alpha: ones, beta, lo: 0, hi: self.n, phase: ONE },
            Flavor::Up => PairState {
                alpha: beta,
                beta: ones,
                lo: m - self.n,
                hi: m,
                phase: C64::new(0.0, -1.0).powu(m as u32),
            },
        }
    }

    /// `<D> = (1/N) sum_s 2s L_s / sum_s L_s` for `ψ^n`; `1 - <D>` of the
    /// mirror for `χ^n`.
    pub fn density(&self, table: &BogoliubovTable) -> f64 {
        let l = Self::l_values(table);
        let num: Vec<f64> = (0..=self.n).map(|s| 2.0 * s as f64 * l[s]).collect();
        let d = pairwise_sum(&num) / pairwise_sum(&l[..=self.n]) / table.n as f64;
        match self.flavor {
            Flavor::Down => d,
            Flavor::Up => 1.0 - d,
        }
    }
}

/// Smallest level whose density differs from the previous one by less than `tol`.
pub fn approximating_level(table: &BogoliubovTable, tol: f64) -> usize {
    let m = table.n / 2;
    let mut prev = PolarizedState { flavor: Flavor::Down, n: 1 }.density(table);
    for n in 2..=m {
        let d = PolarizedState { flavor: Flavor::Down, n }.density(table);
        if (d - prev).abs() < tol {
            return n;
        }
        prev = d;
    }
    m
}

/// `min(<D>, 1 - <D>) < threshold`: the few-particle (or few-hole) regime.
pub fn few_particle(density: f64, threshold: f64) -> bool {
    density.min(1.0 - density) < threshold
}

/// Initial states accepted by the simulator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialState {
    Vacuum,
    Psi(Level),
    Chi(Level),
    /// `(y1 |ψ^n> + y2 |χ^n>) / norm`.
    Superposition { y1: C64, y2: C64, level: Level },
}

impl InitialState {
    pub fn validate(&self, n_sites: usize) -> Result<()> {
        match self {
            InitialState::Vacuum => Ok(()),
            InitialState::Psi(l) | InitialState::Chi(l) => l.resolve(n_sites).map(|_| ()),
            InitialState::Superposition { y1, y2, level } => {
                level.resolve(n_sites)?;
                let s = y1.norm_sqr() + y2.norm_sqr();
                if (s - 1.0).abs() > 1e-12 {
                    return Err(Error::param(format!("|y1|^2 + |y2|^2 = {s}, expected 1")));
                }
                Ok(())
            }
        }
    }

    /// Weighted pair-state components.
    pub fn components(&self, table: &BogoliubovTable) -> Result<Vec<(C64, PairState)>> {
        let n_sites = table.n;
        self.validate(n_sites)?;
        let pol = |flavor, level: &Level| -> Result<PairState> {
            Ok(PolarizedState { flavor, n: level.resolve(n_sites)? }.pair_state(table))
        };
        Ok(match self {
            InitialState::Vacuum => {
                let m = n_sites / 2;
                vec![(ONE, PairState { alpha: vec![ONE; m], beta: vec![ZERO; m], lo: 0, hi: m, phase: ONE })]
            }
            InitialState::Psi(l) => vec![(ONE, pol(Flavor::Down, l)?)],
            InitialState::Chi(l) => vec![(ONE, pol(Flavor::Up, l)?)],
            InitialState::Superposition { y1, y2, level } => {
                let a = pol(Flavor::Down, level)?;
                let b = pol(Flavor::Up, level)?;
                // normalize each branch so y1, y2 are the branch amplitudes
                let na = PairEvaluator::new(&a, &a, n_sites).matrix_element(&Key::IDENTITY).re.sqrt();
                let nb = PairEvaluator::new(&b, &b, n_sites).matrix_element(&Key::IDENTITY).re.sqrt();
                vec![(*y1 / na, a), (*y2 / nb, b)]
            }
        })
    }

    /// `<O>` for every key; states are normalized by their actual norm.
    pub fn expectations(&self, keys: &[Key], table: &BogoliubovTable) -> Result<Vec<C64>> {
        let comps = self.components(table)?;
        let n = table.n;
        let mut out = vec![ZERO; keys.len()];
        let mut norm = ZERO;
        for (wa, a) in &comps {
            for (wb, b) in &comps {
                let ev = PairEvaluator::new(a, b, n);
                let w = wa.conj() * wb;
                norm += w * ev.matrix_element(&Key::IDENTITY);
                for (o, v) in out.iter_mut().zip(ev.matrix_elements(keys)) {
                    *o += w * v;
                }
            }
        }
        for o in out.iter_mut() {
            *o /= norm;
        }
        Ok(out)
    }

    /// `X0[i] = <O_i>` over a truncation.
    pub fn initial_vector(&self, trunc: &Truncation, table: &BogoliubovTable) -> Result<Vec<C64>> {
        if trunc.n != table.n {
            return Err(Error::param(format!("truncation has N = {} but the model has N = {}", trunc.n, table.n)));
        }
        self.expectations(trunc.keys(), table)
    }

    /// Expectation of a polynomial.
    pub fn expect(&self, poly: &Polynomial, table: &BogoliubovTable) -> Result<C64> {
        let terms = poly.sorted_terms();
        let keys: Vec<Key> = terms.iter().map(|t| t.0).collect();
        let vals = self.expectations(&keys, table)?;
        Ok(terms.iter().zip(vals).map(|((_, c), v)| c * v).sum())
    }
}

impl fmt::Display for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialState::Vacuum => write!(f, "vacuum"),
            InitialState::Psi(l) => write!(f, "psi:{l}"),
            InitialState::Chi(l) => write!(f, "chi:{l}"),
            InitialState::Superposition { y1, y2, level } => {
                write!(f, "superposition:{:?},{:?},{:?},{:?}:{level}", y1.re, y1.im, y2.re, y2.im)
            }
        }
    }
}

impl FromStr for InitialState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::param(format!("unrecognized initial state {s:?}"));
        let parts: Vec<&str> = s.trim().split(':').collect();
        match parts.as_slice() {
            ["vacuum"] => Ok(InitialState::Vacuum),
            ["psi", l] => Ok(InitialState::Psi(l.parse()?)),
            ["chi", l] => Ok(InitialState::Chi(l.parse()?)),
            ["superposition", ys, l] => {
                let y: Vec<f64> = ys.split(',').map(|x| x.trim().parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
                if y.len() != 4 {
                    return Err(bad());
                }
                Ok(InitialState::Superposition { y1: C64::new(y[0], y[1]), y2: C64::new(y[2], y[3]), level: l.parse()? })
            }
            _ => Err(bad()),
        }
    }
}

impl serde::Serialize for InitialState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for InitialState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Field-reversed parameters for the particle-hole mapping; `S^z` maps to
/// `-S^z`. The second value warns when `2|h| > |J_x|` fails, where the mapping
/// has not been validated.
pub fn particle_hole(params: &ModelParams) -> (ModelParams, Option<String>) {
    let warn = (2.0 * params.h.abs() <= params.jx.abs())
        .then(|| format!("particle-hole mapping outside 2|h| > |J_x| (h = {}, J_x = {})", params.h, params.jx));
    (params.reversed(), warn)
}

/// `ν_1` for `|ψ^1>`.
pub fn nu_psi1(coeffs: &HamiltonianCoeffs) -> f64 {
    use crate::model::Quartic;
    let t = coeffs.table();
    let n = t.n;
    let w2 = PolarizedState { flavor: Flavor::Down, n: 1 }.w_squared(t);
    let mut terms = Vec::new();
    for j in t.positive() {
        let rj = t.v[j] / t.u[j];
        terms.push((C64::new(0.0, 2.0 * rj) * coeffs.a1[j]).re + rj * rj * coeffs.a2[j]);
        for l in t.positive() {
            let rl = t.v[l] / t.u[l];
            let b = coeffs.b(Quartic::III, [l, l, j, j]) - coeffs.b(Quartic::III, [t.neg(l), t.neg(l), j, j]);
            terms.push(rj * rl * b.re);
        }
    }
    coeffs.h0 / n as f64 + 2.0 / (n as f64 * w2) * pairwise_sum(&terms)
}

/// Closed-form energy density of the supported initial states.
pub fn energy_density(state: &InitialState, params: &ModelParams) -> Result<f64> {
    use crate::model::Model;
    let n = params.n;
    let zeta = crate::model::zeta(n, params.alpha);
    let full = |up: bool| (if up { 0.5 } else { -0.5 }) * params.h + params.jz * zeta / 8.0;
    let nu1 = |p: &ModelParams| -> Result<f64> { Ok(nu_psi1(&Model::new(*p)?.coeffs)) };
    let unsupported = || Error::param(format!("no closed-form energy density for {state}"));
    match *state {
        InitialState::Vacuum => Ok(Model::new(*params)?.coeffs.h0 / n as f64),
        InitialState::Psi(l) => match l.resolve(n)? {
            1 => nu1(params),
            k if k == n / 2 => Ok(full(false)),
            _ => Err(unsupported()),
        },
        InitialState::Chi(l) => match l.resolve(n)? {
            1 => nu1(&params.reversed()),
            k if k == n / 2 => Ok(full(true)),
            _ => Err(unsupported()),
        },
        InitialState::Superposition { y1, y2, level } => {
            state.validate(n)?;
            let (p1, p2) = (y1.norm_sqr(), y2.norm_sqr());
            match level.resolve(n)? {
                k if k == n / 2 => Ok(params.h * (p2 - p1) / 2.0 + params.jz * zeta / 8.0),
                // the cross term vanishes only for N > 8
                1 if n > 8 => Ok(p1 * nu1(params)? + p2 * nu1(&params.reversed())?),
                _ => Err(unsupported()),
            }
        }
    }
}

/// `<H>/N` evaluated term by term with the pair-mode evaluator.
pub fn energy_expectation(state: &InitialState, coeffs: &HamiltonianCoeffs) -> Result<f64> {
    let h = hamiltonian_polynomial(coeffs, HamiltonianMode::Full);
    Ok(state.expect(&h, coeffs.table())?.re / coeffs.n as f64)
}

/// `out(t) = out(0) + |y1|^2 (down(t) - down(0)) - |y2|^2 (mirror(t) - mirror(0))`
/// applied to column `col` of both series.
pub fn decoupled_superposition(
    y1: C64,
    y2: C64,
    down: &TimeSeries,
    mirror: &TimeSeries,
    col: usize,
    initial: f64,
) -> Result<TimeSeries> {
    down.check_grid(mirror)?;
    if down.is_empty() {
        return Ok(TimeSeries::new(vec![down.names[col].clone()]));
    }
    let d = down.column(col);
    let m = mirror.column(col);
    let (p1, p2) = (y1.norm_sqr(), y2.norm_sqr());
    let vals = d.iter().zip(&m).map(|(dt, mt)| initial + p1 * (dt - d[0]) - p2 * (mt - m[0])).collect();
    Ok(TimeSeries::scalar(&down.names[col], down.times.clone(), vals))
}
