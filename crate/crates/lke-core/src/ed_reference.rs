//! Exact diagonalization of small chains.
//!
//! Spin configurations are bit strings: bit `l-1` set means site `l` is up,
//! which is also an occupied Jordan-Wigner fermion. Translation-invariant
//! operators are block diagonalized in momentum sectors
//! `|r,K> = P_r^{-1/2} sum_{d<P_r} e^{-iKd} T^d |r>` over orbit
//! representatives `r` with period `P_r`.
//!
//! [`FockRep`] applies the Jordan-Wigner, Fourier and Bogoliubov operators to
//! vectors of the full `2^N` space and is the independent route to every
//! fermionic quantity.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::fermion_algebra::{Key, Op, Polynomial};
use crate::kinetics::TimeSeries;
use crate::model::{BogoliubovTable, ModelParams};
use crate::states::PairState;
use crate::C64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Largest chain handled by the full-space routines.
pub const MAX_SITES: usize = 14;

fn guard(n: usize) -> Result<()> {
    if n > MAX_SITES {
        return Err(Error::Infeasible(format!("exact diagonalization limited to N <= {MAX_SITES}, got {n}")));
    }
    Ok(())
}

fn rotate(c: u32, n: usize) -> u32 {
    let mask = (1u32 << n) - 1;
    ((c << 1) | (c >> (n - 1))) & mask
}

fn sz(c: u32, l: usize) -> f64 {
    if c >> l & 1 == 1 {
        0.5
    } else {
        -0.5
    }
}

/// Diagonal value and off-diagonal `(config, amplitude)` list of the spin
/// Hamiltonian `J_x sum S^x_l S^x_{l+1} + h sum S^z_l
/// + (J_z/2) sum_l sum_{m=2}^{N-2} S^z_l S^z_{l+m} / d(m)^alpha` on one configuration.
pub fn spin_hamiltonian_action(p: &ModelParams, c: u32) -> (f64, Vec<(u32, f64)>) {
    let n = p.n;
    let mut diag = 0.0;
    for l in 0..n {
        diag += p.h * sz(c, l);
        for m in 2..n - 1 {
            diag += 0.5 * p.jz * sz(c, l) * sz(c, (l + m) % n) / (p.distance(m) as f64).powf(p.alpha);
        }
    }
    let flips = if p.jx == 0.0 {
        Vec::new()
    } else {
        (0..n).map(|l| (c ^ (1 << l) ^ (1 << ((l + 1) % n)), p.jx / 4.0)).collect()
    };
    (diag, flips)
}

/// Apply the spin Hamiltonian to a full-space vector.
pub fn apply_spin_hamiltonian(p: &ModelParams, v: &[C64]) -> Vec<C64> {
    let mut out = vec![ZERO; v.len()];
    for (c, &x) in v.iter().enumerate() {
        if x == ZERO {
            continue;
        }
        let (d, flips) = spin_hamiltonian_action(p, c as u32);
        out[c] += x * d;
        for (c2, a) in flips {
            out[c2 as usize] += x * a;
        }
    }
    out
}

/// A translation sector: momentum `2π k/N` and optional fixed parity of the
/// number of up spins.
#[derive(Clone, Debug)]
pub struct Sector {
    pub n: usize,
    pub k: usize,
    pub reps: Vec<u32>,
    pub periods: Vec<u32>,
    index: FxHashMap<u32, usize>,
}

impl Sector {
    pub fn new(n: usize, k: usize, even: Option<bool>) -> Result<Self> {
        guard(n)?;
        let mut reps = Vec::new();
        let mut periods = Vec::new();
        for c in 0..(1u32 << n) {
            if let Some(e) = even {
                if (c.count_ones() % 2 == 0) != e {
                    continue;
                }
            }
            let mut x = c;
            let mut is_rep = true;
            let mut period = n;
            for d in 1..=n {
                x = rotate(x, n);
                if x < c {
                    is_rep = false;
                    break;
                }
                if x == c {
                    period = d;
                    break;
                }
            }
            if is_rep && (k * period) % n == 0 {
                reps.push(c);
                periods.push(period as u32);
            }
        }
        let index = reps.iter().enumerate().map(|(i, &r)| (r, i)).collect();
        Ok(Sector { n, k, reps, periods, index })
    }

    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    fn momentum(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.k as f64 / self.n as f64
    }

    /// Representative of `c` and the shift `j` with `c = T^j rep`.
    fn find(&self, c: u32) -> Option<(usize, usize)> {
        let n = self.n;
        let mut best = c;
        let mut best_d = 0;
        let mut x = c;
        for d in 1..n {
            x = rotate(x, n);
            if x < best {
                best = x;
                best_d = d;
            }
        }
        self.index.get(&best).map(|&i| (i, (n - best_d) % n))
    }

    /// Sector matrix of a translation-invariant operator given its action on
    /// configurations.
    pub fn operator(&self, action: &(dyn Fn(u32) -> (f64, Vec<(u32, f64)>) + Sync)) -> DMatrix<C64> {
        let dim = self.dim();
        let kk = self.momentum();
        let cols: Vec<Vec<(usize, C64)>> = (0..dim)
            .into_par_iter()
            .map(|r| {
                let (d, flips) = action(self.reps[r]);
                let mut col = vec![(r, C64::new(d, 0.0))];
                for (c, a) in flips {
                    if let Some((s, j)) = self.find(c) {
                        let f = (self.periods[r] as f64 / self.periods[s] as f64).sqrt();
                        col.push((s, C64::from_polar(a * f, kk * j as f64)));
                    }
                }
                col
            })
            .collect();
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        for (r, col) in cols.into_iter().enumerate() {
            for (s, v) in col {
                m[(s, r)] += v;
            }
        }
        m
    }

    pub fn spin_hamiltonian(&self, p: &ModelParams) -> DMatrix<C64> {
        self.operator(&|c| spin_hamiltonian_action(p, c))
    }

    /// `(1/N) sum_l S^z_l`.
    pub fn spin_z(&self) -> DMatrix<C64> {
        let n = self.n;
        self.operator(&|c| ((c.count_ones() as f64 - n as f64 / 2.0) / n as f64, Vec::new()))
    }

    /// `(1/N) sum_l S^z_l S^z_{l+m}`.
    pub fn szsz(&self, m: i64) -> DMatrix<C64> {
        let n = self.n;
        let mm = m.rem_euclid(n as i64) as usize;
        self.operator(&|c| ((0..n).map(|l| sz(c, l) * sz(c, (l + mm) % n)).sum::<f64>() / n as f64, Vec::new()))
    }

    /// `(1/N) sum_l S^x_l S^x_{l+1}`.
    pub fn sxsx_nn(&self) -> DMatrix<C64> {
        let n = self.n;
        self.operator(&|c| (0.0, (0..n).map(|l| (c ^ (1 << l) ^ (1 << ((l + 1) % n)), 0.25 / n as f64)).collect()))
    }

    /// Full-space vector of the basis state `|r,K>`.
    pub fn basis_vector(&self, r: usize) -> Vec<C64> {
        let mut v = vec![ZERO; 1 << self.n];
        let p = self.periods[r] as usize;
        let norm = 1.0 / (p as f64).sqrt();
        let mut c = self.reps[r];
        for d in 0..p {
            v[c as usize] += C64::from_polar(norm, -self.momentum() * d as f64);
            c = rotate(c, self.n);
        }
        v
    }

    /// Coefficients `<r,K|v>` of a full-space vector.
    pub fn project(&self, v: &[C64]) -> DVector<C64> {
        DVector::from_iterator(
            self.dim(),
            (0..self.dim()).map(|r| {
                let p = self.periods[r] as usize;
                let mut c = self.reps[r];
                let mut acc = ZERO;
                for d in 0..p {
                    acc += C64::from_polar(1.0, self.momentum() * d as f64) * v[c as usize];
                    c = rotate(c, self.n);
                }
                acc / (p as f64).sqrt()
            }),
        )
    }

    /// Sector matrix of a fermionic polynomial, built column by column in the
    /// full space.
    pub fn fermionic_operator(&self, fock: &FockRep, poly: &Polynomial) -> DMatrix<C64> {
        let cols: Vec<DVector<C64>> =
            (0..self.dim()).into_par_iter().map(|r| self.project(&fock.apply_polynomial(poly, &self.basis_vector(r)))).collect();
        DMatrix::from_columns(&cols)
    }
}

/// Fermion operators on the full `2^N` space.
#[derive(Clone, Debug)]
pub struct FockRep {
    pub n: usize,
    pub table: BogoliubovTable,
}

impl FockRep {
    pub fn new(p: &ModelParams) -> Result<Self> {
        guard(p.n)?;
        p.validate()?;
        Ok(FockRep { n: p.n, table: BogoliubovTable::new(p) })
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// `out += coeff * μ_l v` (or `μ†_l`), site `l` in `1..=N`.
    fn add_site(&self, l: usize, dagger: bool, coeff: C64, v: &[C64], out: &mut [C64]) {
        let bit = 1usize << (l - 1);
        let below = bit - 1;
        for (s, &x) in v.iter().enumerate() {
            if x == ZERO || ((s & bit != 0) == dagger) {
                continue;
            }
            let sign = if (s & below).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            out[s ^ bit] += coeff * x * sign;
        }
    }

    /// Jordan-Wigner fermion `μ_l` or `μ†_l`.
    pub fn apply_site(&self, l: usize, dagger: bool, v: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; v.len()];
        self.add_site(l, dagger, C64::new(1.0, 0.0), v, &mut out);
        out
    }

    /// `η_k = N^{-1/2} sum_l e^{-ikl} (u_k μ_l + i v_k μ†_l)` and its adjoint.
    pub fn apply(&self, op: Op, v: &[C64]) -> Vec<C64> {
        let t = &self.table;
        let i = op.k as usize;
        let (k, u, w) = (t.k[i], t.u[i], t.v[i]);
        let s = 1.0 / (self.n as f64).sqrt();
        let mut out = vec![ZERO; v.len()];
        for l in 1..=self.n {
            let ph = C64::from_polar(s, if op.dagger { k * l as f64 } else { -k * l as f64 });
            if op.dagger {
                self.add_site(l, true, ph * u, v, &mut out);
                self.add_site(l, false, ph * C64::new(0.0, -w), v, &mut out);
            } else {
                self.add_site(l, false, ph * u, v, &mut out);
                self.add_site(l, true, ph * C64::new(0.0, w), v, &mut out);
            }
        }
        out
    }

    /// Apply a factor string, rightmost factor first.
    pub fn apply_ops(&self, ops: &[Op], v: &[C64]) -> Vec<C64> {
        let mut x = v.to_vec();
        for &op in ops.iter().rev() {
            x = self.apply(op, &x);
        }
        x
    }

    pub fn apply_key(&self, key: &Key, v: &[C64]) -> Vec<C64> {
        let ops: Vec<Op> = key.ops().collect();
        self.apply_ops(&ops, v)
    }

    pub fn apply_polynomial(&self, poly: &Polynomial, v: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; v.len()];
        for (k, c) in poly.sorted_terms() {
            let w = self.apply_key(&k, v);
            for (o, x) in out.iter_mut().zip(w) {
                *o += c * x;
            }
        }
        out
    }

    /// Dense matrix of a factor string (small N only).
    pub fn dense(&self, ops: &[Op]) -> DMatrix<C64> {
        let d = self.dim();
        let mut m = DMatrix::from_element(d, d, ZERO);
        for c in 0..d {
            let mut e = vec![ZERO; d];
            e[c] = C64::new(1.0, 0.0);
            for (r, x) in self.apply_ops(ops, &e).into_iter().enumerate() {
                m[(r, c)] = x;
            }
        }
        m
    }

    pub fn dense_polynomial(&self, poly: &Polynomial) -> DMatrix<C64> {
        let d = self.dim();
        let mut m = DMatrix::from_element(d, d, ZERO);
        for (k, c) in poly.sorted_terms() {
            let ops: Vec<Op> = k.ops().collect();
            m += self.dense(&ops) * c;
        }
        m
    }

    /// `|↓...↓>`, the configuration with no up spins.
    pub fn all_down(&self) -> Vec<C64> {
        let mut v = vec![ZERO; self.dim()];
        v[0] = C64::new(1.0, 0.0);
        v
    }

    pub fn all_up(&self) -> Vec<C64> {
        let mut v = vec![ZERO; self.dim()];
        v[self.dim() - 1] = C64::new(1.0, 0.0);
        v
    }

    /// Bogoliubov vacuum `∝ prod_k η_k η†_k |↓...↓>`, phased so that its
    /// overlap with `|↓...↓>` is positive.
    pub fn vacuum(&self) -> Result<Vec<C64>> {
        let mut v = self.all_down();
        for i in 0..self.n {
            v = self.apply(Op::cre(i), &v);
            v = self.apply(Op::ann(i), &v);
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 || v[0].norm() < 1e-14 {
            return Err(Error::Numerical("vacuum projection vanished".into()));
        }
        let phase = v[0].conj() / v[0].norm();
        Ok(v.into_iter().map(|x| x * phase / norm).collect())
    }

    /// Explicit construction of a pair state, not normalized.
    pub fn pair_state(&self, s: &PairState) -> Result<Vec<C64>> {
        let half = self.n / 2;
        let vac = self.vacuum()?;
        let mut comps: Vec<Vec<C64>> = vec![vac];
        for p in 0..half {
            let kpos = half + p;
            let kneg = half - 1 - p;
            let mut next: Vec<Vec<C64>> = comps.iter().map(|c| c.iter().map(|x| x * s.alpha[p]).collect()).collect();
            next.push(vec![ZERO; self.dim()]);
            for (j, c) in comps.iter().enumerate() {
                let raised = self.apply_ops(&[Op::cre(kneg), Op::cre(kpos)], c);
                for (o, x) in next[j + 1].iter_mut().zip(raised) {
                    *o += x * s.beta[p];
                }
            }
            comps = next;
        }
        let mut out = vec![ZERO; self.dim()];
        for c in &comps[s.lo..=s.hi.min(half)] {
            for (o, x) in out.iter_mut().zip(c) {
                *o += x * s.phase;
            }
        }
        Ok(out)
    }
}

pub fn normalize(v: &mut [C64]) -> f64 {
    let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= n;
    }
    n
}

pub fn expectation(m: &DMatrix<C64>, v: &DVector<C64>) -> C64 {
    v.dotc(&(m * v))
}

/// Spectral decomposition of a Hermitian sector Hamiltonian.
pub struct Spectrum {
    pub energies: DVector<f64>,
    pub vectors: DMatrix<C64>,
}

impl Spectrum {
    pub fn new(h: &DMatrix<C64>) -> Result<Self> {
        let herm = (h - h.adjoint()).camax();
        if herm > 1e-10 * (1.0 + h.camax()) {
            return Err(Error::Numerical(format!("Hamiltonian not Hermitian (|H - H†| = {herm:.2e})")));
        }
        let e = nalgebra::SymmetricEigen::new(h.clone());
        Ok(Spectrum { energies: e.eigenvalues, vectors: e.eigenvectors })
    }

    /// `exp(-iHt) psi0` for each time and the expectations of `ops`.
    pub fn evolve(&self, psi0: &DVector<C64>, ops: &[DMatrix<C64>], names: &[String], times: &[f64]) -> TimeSeries {
        let c0 = self.vectors.adjoint() * psi0;
        let rows: Vec<Vec<f64>> = times
            .par_iter()
            .map(|&t| {
                let ct = DVector::from_iterator(
                    c0.len(),
                    c0.iter().zip(self.energies.iter()).map(|(c, e)| c * C64::from_polar(1.0, -e * t)),
                );
                let psi = &self.vectors * ct;
                ops.iter().map(|o| expectation(o, &psi).re).collect()
            })
            .collect();
        TimeSeries { times: times.to_vec(), names: names.to_vec(), values: rows }
    }
}

/// Named sector operators for the standard observables.
pub fn standard_observables(sector: &Sector, list: &[crate::observables::Observable]) -> Vec<DMatrix<C64>> {
    use crate::observables::Observable;
    list.iter()
        .map(|o| match *o {
            Observable::Sz => sector.spin_z(),
            Observable::Cx1 => sector.sxsx_nn(),
            Observable::Czz(m) => sector.szsz(m),
            Observable::Energy | Observable::Density => DMatrix::from_element(sector.dim(), sector.dim(), ZERO),
        })
        .collect()
}

/// Exact trajectory of translation-invariant observables from an even,
/// zero-momentum state; `Czz` columns are made connected.
pub fn ed_evolve(
    p: &ModelParams,
    psi: &[C64],
    list: &[crate::observables::Observable],
    times: &[f64],
) -> Result<TimeSeries> {
    use crate::observables::Observable;
    let sector = Sector::new(p.n, 0, Some(true))?;
    let h = sector.spin_hamiltonian(p);
    let mut v = sector.project(psi);
    let kept = v.norm();
    if (kept - 1.0).abs() > 1e-10 {
        return Err(Error::Numerical(format!("initial state has weight {kept} in the even zero-momentum sector")));
    }
    v /= C64::new(kept, 0.0);
    let spec = Spectrum::new(&h)?;
    let mut ops = standard_observables(&sector, list);
    ops.push(sector.spin_z());
    let mut names: Vec<String> = list.iter().map(|o| o.name()).collect();
    names.push("_sz".into());
    let mut ts = spec.evolve(&v, &ops, &names, times);
    for row in ts.values.iter_mut() {
        let s = row.pop().unwrap();
        for (o, x) in list.iter().zip(row.iter_mut()) {
            if matches!(o, Observable::Czz(_)) {
                *x -= s * s;
            }
        }
    }
    names.pop();
    ts.names = names;
    Ok(ts)
}

/// Uniform time grid `0, dt, ..., t_max`.
pub fn time_grid(t_max: f64, dt: f64) -> Vec<f64> {
    let n = (t_max / dt).round() as usize;
    (0..=n).map(|i| i as f64 * dt).collect()
}

/// Full spectrum with the diagonal `S^z` density of every eigenstate.
#[derive(Clone, Debug)]
pub struct ThermalSpectrum {
    pub n: usize,
    pub energies: Vec<f64>,
    pub sz: Vec<f64>,
}

impl ThermalSpectrum {
    pub fn new(p: &ModelParams) -> Result<Self> {
        guard(p.n)?;
        if p.n > 12 {
            return Err(Error::Infeasible(format!("thermal spectrum limited to N <= 12, got {}", p.n)));
        }
        let parts: Vec<Result<(Vec<f64>, Vec<f64>)>> = (0..p.n)
            .into_par_iter()
            .map(|k| {
                let sector = Sector::new(p.n, k, None)?;
                let spec = Spectrum::new(&sector.spin_hamiltonian(p))?;
                let mag: Vec<f64> = sector
                    .reps
                    .iter()
                    .map(|&r| (r.count_ones() as f64 - p.n as f64 / 2.0) / p.n as f64)
                    .collect();
                let sz = (0..sector.dim())
                    .map(|j| spec.vectors.column(j).iter().zip(&mag).map(|(c, m)| c.norm_sqr() * m).sum())
                    .collect();
                Ok((spec.energies.iter().copied().collect(), sz))
            })
            .collect();
        let mut energies = Vec::with_capacity(1 << p.n);
        let mut sz = Vec::with_capacity(1 << p.n);
        for part in parts {
            let (e, s) = part?;
            energies.extend(e);
            sz.extend(s);
        }
        if energies.len() != 1 << p.n {
            return Err(Error::Numerical(format!("sectors cover {} of {} states", energies.len(), 1 << p.n)));
        }
        Ok(ThermalSpectrum { n: p.n, energies, sz })
    }

    /// `sum_n E_n^k`.
    pub fn trace_power(&self, k: i32) -> f64 {
        self.energies.iter().map(|e| e.powi(k)).sum()
    }

    fn weights(&self, beta: f64) -> Vec<f64> {
        let shift = self.energies.iter().map(|e| -beta * e).fold(f64::NEG_INFINITY, f64::max);
        self.energies.iter().map(|e| (-beta * e - shift).exp()).collect()
    }

    /// `(ν_th, <S^z>_th)` at inverse temperature `beta`.
    pub fn thermal(&self, beta: f64) -> (f64, f64) {
        let w = self.weights(beta);
        let z: f64 = w.iter().sum();
        let e: f64 = w.iter().zip(&self.energies).map(|(w, e)| w * e).sum();
        let s: f64 = w.iter().zip(&self.sz).map(|(w, s)| w * s).sum();
        (e / z / self.n as f64, s / z)
    }

    /// Bisection for `ν_th(β) = target` on `[-60, 60]`.
    pub fn match_beta(&self, target: f64) -> Result<f64> {
        let (mut lo, mut hi) = (-60.0, 60.0);
        let (top, bottom) = (self.thermal(lo).0, self.thermal(hi).0);
        if !(target <= top && target >= bottom) {
            return Err(Error::OutOfRange { target, lo: bottom, hi: top });
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.thermal(mid).0 > target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-13 {
                break;
            }
        }
        let beta = 0.5 * (lo + hi);
        let miss = (self.thermal(beta).0 - target).abs();
        if miss > 1e-8 {
            return Err(Error::Numerical(format!("bisection left a mismatch of {miss:.2e}")));
        }
        Ok(beta)
    }
}

/// Inverse temperatures at several sizes and their linear fit in `1/N`.
#[derive(Clone, Debug, serde::Serialize)]
pub struct BetaMatch {
    pub sizes: Vec<usize>,
    pub betas: Vec<f64>,
    pub spin_z: Vec<f64>,
    /// Fit evaluated at `1/n_target`.
    pub extrapolated: f64,
    pub spin_z_extrapolated: f64,
    /// Fit evaluated at `1/N = 0`.
    pub intercept: f64,
}

fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - slope * mx, slope)
}

/// Match `target` at each of `sizes` and extrapolate linearly in `1/N` to `n_target`.
pub fn match_beta_extrapolated(p: &ModelParams, target: f64, sizes: &[usize], n_target: usize) -> Result<BetaMatch> {
    let mut betas = Vec::new();
    let mut szs = Vec::new();
    for &n in sizes {
        let spec = ThermalSpectrum::new(&ModelParams { n, ..*p })?;
        let b = spec.match_beta(target)?;
        betas.push(b);
        szs.push(spec.thermal(b).1);
    }
    let x: Vec<f64> = sizes.iter().map(|&n| 1.0 / n as f64).collect();
    let (b0, b1) = linear_fit(&x, &betas);
    let (s0, s1) = linear_fit(&x, &szs);
    let xt = 1.0 / n_target as f64;
    Ok(BetaMatch {
        sizes: sizes.to_vec(),
        betas,
        spin_z: szs,
        extrapolated: b0 + b1 * xt,
        spin_z_extrapolated: s0 + s1 * xt,
        intercept: b0,
    })
}

/// Time-integrated distance
/// `sqrt(int_0^t |a - b|^2 / (1 + int_0^t |b|^2))`, trapezoid rule.
pub fn accuracy_metric(lke: &[f64], ed: &[f64], times: &[f64]) -> Result<Vec<f64>> {
    if lke.len() != times.len() || ed.len() != times.len() {
        return Err(Error::GridMismatch(format!(
            "series lengths {} and {} on a grid of {}",
            lke.len(),
            ed.len(),
            times.len()
        )));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for i in 0..times.len() {
        if i > 0 {
            let h = times[i] - times[i - 1];
            num += 0.5 * h * ((lke[i] - ed[i]).powi(2) + (lke[i - 1] - ed[i - 1]).powi(2));
            den += 0.5 * h * (ed[i].powi(2) + ed[i - 1].powi(2));
        }
        out.push((num / (1.0 + den)).sqrt());
    }
    Ok(out)
}

/// [`accuracy_metric`] on matching columns of two series.
pub fn accuracy_series(lke: &TimeSeries, ed: &TimeSeries, column: &str) -> Result<TimeSeries> {
    lke.check_grid(ed)?;
    let a = lke.named(column).ok_or_else(|| Error::param(format!("no column {column} in LKE series")))?;
    let b = ed.named(column).ok_or_else(|| Error::param(format!("no column {column} in ED series")))?;
    Ok(TimeSeries::scalar(&format!("delta_{column}"), lke.times.clone(), accuracy_metric(&a, &b, &lke.times)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sectors_cover_the_space() {
        let total: usize = (0..8).map(|k| Sector::new(8, k, None).unwrap().dim()).sum();
        assert_eq!(total, 256);
    }

    #[test]
    fn projection_is_isometric_on_invariant_states() {
        let s = Sector::new(6, 0, Some(true)).unwrap();
        for r in 0..s.dim() {
            let v = s.basis_vector(r);
            let c = s.project(&v);
            assert!((c[r] - C64::new(1.0, 0.0)).norm() < 1e-14);
            assert!((c.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn identical_series_have_zero_distance() {
        let t = [0.0, 0.5, 1.0];
        let a = [0.1, -0.2, 0.3];
        assert!(accuracy_metric(&a, &a, &t).unwrap().iter().all(|&d| d == 0.0));
        assert!(accuracy_metric(&a, &a[..2], &t).is_err());
    }

    #[test]
    fn infinite_temperature() {
        let p = ModelParams::new(6, -1.0, -1.0, -1.0, 3.0).unwrap();
        let s = ThermalSpectrum::new(&p).unwrap();
        let (nu, sz) = s.thermal(0.0);
        assert!(nu.abs() < 1e-13 && sz.abs() < 1e-14);
        assert!(s.match_beta(0.0).unwrap().abs() < 1e-10);
    }
}
