//! Chain parameters, the Brillouin grid, Bogoliubov data and the closed-form
//! coefficients of the fermionic Hamiltonian
//! `H = H0 + sum_k [A_I η_{-k}η_k + A_II η†_kη_k + A_III η†_kη†_{-k}] + sum B-terms`.
//!
//! Momentum index `i` in `0..N` stands for `k_i = 2π(i - N/2 + 1/2)/N`, so
//! `-k_i` has index `N-1-i` and the positive half-zone is `N/2..N`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fermion_algebra::Op;
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub jx: f64,
    pub jz: f64,
    pub h: f64,
    pub alpha: f64,
}

impl ModelParams {
    pub fn new(n: usize, jx: f64, jz: f64, h: f64, alpha: f64) -> Result<Self> {
        let p = ModelParams { n, jx, jz, h, alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 4 || self.n % 2 != 0 {
            return Err(Error::param(format!("N must be even and >= 4, got {}", self.n)));
        }
        if self.n > u16::MAX as usize {
            return Err(Error::param(format!("N = {} exceeds the index width", self.n)));
        }
        if !(self.alpha >= 0.0) {
            return Err(Error::param(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        for (name, x) in [("J_x", self.jx), ("J_z", self.jz), ("h", self.h)] {
            if !x.is_finite() {
                return Err(Error::param(format!("{name} is not finite")));
            }
        }
        Ok(())
    }

    /// Shortest distance around the ring.
    pub fn distance(&self, m: usize) -> usize {
        let m = m % self.n;
        m.min(self.n - m)
    }

    /// Field-reversed parameters `(h, J_x) -> (-h, -J_x)`.
    pub fn reversed(&self) -> ModelParams {
        ModelParams { h: -self.h, jx: -self.jx, ..*self }
    }
}

/// Momentum of grid index `i`.
pub fn momentum(n: usize, i: usize) -> f64 {
    2.0 * PI * (i as f64 - n as f64 / 2.0 + 0.5) / n as f64
}

/// `sgn(a) sqrt(a^2 + b^2)` with `sgn(0) = +1`.
pub fn dispersion(params: &ModelParams, k: f64) -> f64 {
    let a = params.h + 0.5 * params.jx * k.cos();
    let b = 0.5 * params.jx * k.sin();
    let r = a.hypot(b);
    if a < 0.0 {
        -r
    } else {
        r
    }
}

/// Sum with pairwise (cascade) reduction.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Truncated zeta function `sum_{m=2}^{N-2} d(m)^{-alpha}`.
pub fn zeta(n: usize, alpha: f64) -> f64 {
    let terms: Vec<f64> = (2..n.saturating_sub(1))
        .map(|m| (m.min(n - m) as f64).powf(-alpha))
        .collect();
    pairwise_sum(&terms)
}

#[derive(Clone, Debug)]
pub struct BogoliubovTable {
    pub n: usize,
    pub k: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub eps: Vec<f64>,
}

impl BogoliubovTable {
    pub fn new(params: &ModelParams) -> Self {
        let n = params.n;
        let k: Vec<f64> = (0..n).map(|i| momentum(n, i)).collect();
        let a: Vec<f64> = k.iter().map(|k| params.h + 0.5 * params.jx * k.cos()).collect();
        let b: Vec<f64> = k.iter().map(|k| 0.5 * params.jx * k.sin()).collect();
        let x: Vec<f64> = a
            .iter()
            .zip(&b)
            .map(|(&a, &b)| if a == 0.0 && b == 0.0 { 0.0 } else { 0.5 * (b / a).atan() })
            .collect();
        let u = x.iter().map(|x| x.cos()).collect();
        let v = x.iter().map(|x| x.sin()).collect();
        let eps = k.iter().map(|&k| dispersion(params, k)).collect();
        BogoliubovTable { n, k, a, b, x, u, v, eps }
    }

    pub fn neg(&self, i: usize) -> usize {
        self.n - 1 - i
    }

    /// Indices of the positive half-zone `0 < k < π`.
    pub fn positive(&self) -> std::ops::Range<usize> {
        self.n / 2..self.n
    }

    pub fn xx(&self, i: usize, j: usize) -> f64 {
        self.u[i] * self.u[j] - self.v[i] * self.v[j]
    }

    pub fn yy(&self, i: usize, j: usize) -> f64 {
        self.u[i] * self.v[j]
    }

    pub fn zz(&self, i: usize, j: usize) -> f64 {
        self.u[i] * self.u[j]
    }

    pub fn zp(&self, i: usize, j: usize) -> f64 {
        self.zz(i, j) - self.xx(i, j)
    }

    /// `Γ_N = -1/2 + (1/N) sum_k Z'_kk`, the vacuum value of `S^z`.
    pub fn gamma_n(&self) -> f64 {
        let t: Vec<f64> = (0..self.n).map(|i| self.zp(i, i)).collect();
        -0.5 + pairwise_sum(&t) / self.n as f64
    }

    /// `v_k / u_k` for the positive momenta, ordered by pair-mode index.
    pub fn ratios(&self) -> Vec<f64> {
        self.positive().map(|i| self.v[i] / self.u[i]).collect()
    }
}

/// A momentum kernel `c(k_i, k_j)` that depends only on `i - j mod N`,
/// together with the value substituted for `ζ_N`.
#[derive(Clone, Debug)]
pub struct CouplingKernel {
    pub n: usize,
    pub zeta: f64,
    pub by_diff: Vec<f64>,
}

impl CouplingKernel {
    /// `c(k,k') = sum_{m=2}^{N-2} cos(m(k-k')) / d(m)^alpha`.
    pub fn long_range(params: &ModelParams) -> Self {
        let n = params.n;
        let by_diff = (0..n)
            .map(|d| {
                let terms: Vec<f64> = (2..n - 1)
                    .map(|m| {
                        let phase = 2.0 * PI * ((m * d) % n) as f64 / n as f64;
                        phase.cos() * (params.distance(m) as f64).powf(-params.alpha)
                    })
                    .collect();
                pairwise_sum(&terms)
            })
            .collect();
        CouplingKernel { n, zeta: zeta(n, params.alpha), by_diff }
    }

    /// `γ(k,k',m) = cos(m(k-k'))` with `ζ -> 1`, used for `<S^z_l S^z_{l+m}>`.
    pub fn correlator(n: usize, m: i64) -> Self {
        let mm = m.rem_euclid(n as i64) as usize;
        let by_diff = (0..n)
            .map(|d| (2.0 * PI * ((mm * d) % n) as f64 / n as f64).cos())
            .collect();
        CouplingKernel { n, zeta: 1.0, by_diff }
    }

    pub fn c(&self, i: usize, j: usize) -> f64 {
        self.by_diff[(i + self.n - j) % self.n]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quartic {
    I,
    II,
    III,
    IV,
    V,
}

impl Quartic {
    pub const ALL: [Quartic; 5] = [Quartic::I, Quartic::II, Quartic::III, Quartic::IV, Quartic::V];

    /// The operator string multiplying `B_λ(k1,k2,k3,k4)`.
    pub fn operators(self, n: usize, k: [usize; 4]) -> [Op; 4] {
        let neg = |i: usize| n - 1 - i;
        let [k1, k2, k3, k4] = k;
        match self {
            Quartic::I => [Op::ann(neg(k1)), Op::ann(k2), Op::ann(neg(k3)), Op::ann(k4)],
            Quartic::II => [Op::cre(k1), Op::ann(k2), Op::ann(neg(k3)), Op::ann(k4)],
            Quartic::III => [Op::cre(k1), Op::cre(neg(k2)), Op::ann(neg(k3)), Op::ann(k4)],
            Quartic::IV => [Op::cre(k1), Op::cre(neg(k2)), Op::cre(k3), Op::ann(k4)],
            Quartic::V => [Op::cre(k1), Op::cre(neg(k2)), Op::cre(k3), Op::cre(neg(k4))],
        }
    }
}

/// `k4` fixed by `k1 - k2 + k3 - k4 ≡ 0 (mod 2π)`.
pub fn conserving_k4(n: usize, k1: usize, k2: usize, k3: usize) -> usize {
    (k1 + n - k2 + k3) % n
}

/// Closed-form Hamiltonian coefficients for a given kernel and coupling `g`.
///
/// With `g = J_z`, the long-range kernel and `with_eps = true` this is the
/// model Hamiltonian. The same formulas with the correlator kernel, `g = 1`
/// and `with_eps = false` give the `<S^z_l S^z_{l+m}>` coefficients.
#[derive(Clone, Debug)]
pub struct HamiltonianCoeffs {
    pub n: usize,
    pub g: f64,
    pub with_eps: bool,
    pub gamma_n: f64,
    pub h0: f64,
    pub a1: Vec<C64>,
    pub a2: Vec<f64>,
    table: BogoliubovTable,
    kernel: CouplingKernel,
}

impl HamiltonianCoeffs {
    pub fn new(table: &BogoliubovTable, kernel: &CouplingKernel, g: f64, with_eps: bool) -> Self {
        let n = table.n;
        let nf = n as f64;
        let t = table;
        let gamma_n = t.gamma_n();
        let zeta = kernel.zeta;
        let ysym = |i: usize, j: usize| t.yy(i, j) + t.yy(j, i);

        let mut h0_terms = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                h0_terms.push(kernel.c(i, j) * t.yy(j, i) * ysym(i, j));
            }
        }
        let eps_sum = pairwise_sum(&t.eps);
        let mut h0 = 0.5 * nf * g * zeta * gamma_n * gamma_n + g / (2.0 * nf) * pairwise_sum(&h0_terms);
        if with_eps {
            h0 -= 0.5 * eps_sum;
        }

        let mut a1 = Vec::with_capacity(n);
        let mut a2 = Vec::with_capacity(n);
        let mut buf1 = vec![0.0; n];
        let mut buf2 = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                let c = kernel.c(i, j);
                buf1[j] = c * t.xx(i, j) * ysym(i, j);
                buf2[j] = c * (t.xx(i, j).powi(2) - ysym(i, j).powi(2));
            }
            let im = g * zeta * t.yy(i, i) * gamma_n + g / (2.0 * nf) * pairwise_sum(&buf1);
            a1.push(C64::new(0.0, im));
            let mut re = g * zeta * t.xx(i, i) * gamma_n + g / (2.0 * nf) * pairwise_sum(&buf2);
            if with_eps {
                re += t.eps[i];
            }
            a2.push(re);
        }
        HamiltonianCoeffs {
            n,
            g,
            with_eps,
            gamma_n,
            h0,
            a1,
            a2,
            table: table.clone(),
            kernel: kernel.clone(),
        }
    }

    pub fn a3(&self, k: usize) -> C64 {
        -self.a1[k]
    }

    pub fn table(&self) -> &BogoliubovTable {
        &self.table
    }

    pub fn kernel(&self) -> &CouplingKernel {
        &self.kernel
    }

    /// `B_λ(k1,k2,k3,k4)`; zero unless momentum is conserved.
    pub fn b(&self, lam: Quartic, k: [usize; 4]) -> C64 {
        let n = self.n;
        let [k1, k2, k3, k4] = k;
        if (k1 + n - k2 + k3 + n - k4) % n != 0 {
            return C64::new(0.0, 0.0);
        }
        let t = &self.table;
        let pre = self.g / (2.0 * n as f64);
        let c12 = self.kernel.c(k1, k2);
        match lam {
            Quartic::I => C64::new(-pre * c12 * t.yy(k2, k1) * t.yy(k4, k3), 0.0),
            Quartic::II => C64::new(0.0, 2.0 * pre * c12 * t.xx(k1, k2) * t.yy(k4, k3)),
            Quartic::III => {
                let zsum = |i: usize, j: usize| t.u[i] * t.u[j] + t.v[i] * t.v[j];
                let c13 = self.kernel.c(k1, t.neg(k3));
                C64::new(
                    2.0 * pre * c12 * t.yy(k1, k2) * t.yy(k4, k3)
                        - pre * c13 * zsum(k1, k3) * zsum(k2, k4),
                    0.0,
                )
            }
            Quartic::IV => C64::new(0.0, -2.0 * pre * c12 * t.xx(k3, k4) * t.yy(k1, k2)),
            Quartic::V => C64::new(-pre * c12 * t.yy(k1, k2) * t.yy(k3, k4), 0.0),
        }
    }
}

/// Everything derived from [`ModelParams`]; immutable after construction.
#[derive(Clone, Debug)]
pub struct Model {
    pub params: ModelParams,
    pub table: BogoliubovTable,
    pub kernel: CouplingKernel,
    pub coeffs: HamiltonianCoeffs,
}

impl Model {
    pub fn new(params: ModelParams) -> Result<Self> {
        params.validate()?;
        let table = BogoliubovTable::new(&params);
        let kernel = CouplingKernel::long_range(&params);
        let coeffs = HamiltonianCoeffs::new(&table, &kernel, params.jz, true);
        Ok(Model { params, table, kernel, coeffs })
    }

    pub fn n(&self) -> usize {
        self.params.n
    }
}
