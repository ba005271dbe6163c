//! Spin observables as linear functionals of the kinetic state vector, the
//! `ψ^1` closed form, the high-temperature expansion and timescales.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fermion_algebra::{canonicalize, Op, Polynomial, PRUNE};
use crate::kinetics::{quadratic_polynomial, quartic_polynomial, Functional};
use crate::model::{pairwise_sum, zeta, BogoliubovTable, CouplingKernel, HamiltonianCoeffs, ModelParams};
use crate::operator_basis::Truncation;
use crate::states::{Flavor, PolarizedState};
use crate::C64;

fn add_ops(p: &mut Polynomial, ops: &[Op], c: C64) {
    if let Some(m) = canonicalize(ops, c) {
        p.add(m.key, m.coeff);
    }
}

/// `S^z_l = Γ_N + (1/N) sum_k [X_kk η†_kη_k + iY_kk η_{-k}η_k - iY_kk η†_kη†_{-k}]`.
pub fn spin_z_polynomial(t: &BogoliubovTable) -> Polynomial {
    let n = t.n;
    let nf = n as f64;
    let mut p = Polynomial::identity(C64::new(t.gamma_n(), 0.0));
    for k in 0..n {
        let nk = t.neg(k);
        add_ops(&mut p, &[Op::cre(k), Op::ann(k)], C64::new(t.xx(k, k) / nf, 0.0));
        add_ops(&mut p, &[Op::ann(nk), Op::ann(k)], C64::new(0.0, t.yy(k, k) / nf));
        add_ops(&mut p, &[Op::cre(k), Op::cre(nk)], C64::new(0.0, -t.yy(k, k) / nf));
    }
    p.prune(PRUNE);
    p
}

/// `S^x_l S^x_{l+1}` from the `p, q0, q_I, q_II` vectors.
pub fn cx1_polynomial(t: &BogoliubovTable) -> Polynomial {
    let n = t.n;
    let s = 1.0 / (2.0 * n as f64);
    let mut p = Polynomial::new();
    for k in 0..n {
        let nk = t.neg(k);
        let pk = [t.k[k].cos(), t.k[k].sin()];
        let q0 = [t.zp(k, k), -t.yy(k, k)];
        let q1 = [t.yy(k, k), -t.xx(k, k) / 2.0];
        let q2 = [t.xx(k, k), 2.0 * t.yy(k, k)];
        let dot = |q: [f64; 2]| pk[0] * q[0] + pk[1] * q[1];
        p.add(crate::Key::IDENTITY, C64::new(s * dot(q0), 0.0));
        add_ops(&mut p, &[Op::ann(nk), Op::ann(k)], C64::new(0.0, s * dot(q1)));
        add_ops(&mut p, &[Op::cre(k), Op::ann(k)], C64::new(s * dot(q2), 0.0));
        add_ops(&mut p, &[Op::cre(k), Op::cre(nk)], C64::new(0.0, -s * dot(q1)));
    }
    p.prune(PRUNE);
    p
}

/// `S^z_l S^z_{l+m}` (translation averaged): `2/N` times the interaction
/// Hamiltonian with the kernel `cos(m(k-k'))`, `ζ -> 1`, unit coupling and no
/// dispersion. With `pair_only`, quartic keys that are not pair structured are
/// left out.
pub fn szsz_polynomial(t: &BogoliubovTable, m: i64, pair_only: bool) -> Polynomial {
    let n = t.n;
    let kernel = CouplingKernel::correlator(n, m);
    let coeffs = HamiltonianCoeffs::new(t, &kernel, 1.0, false);
    let mut p = quadratic_polynomial(&coeffs);
    p.add_poly(&quartic_polynomial(&coeffs, |k| !pair_only || k.is_pair_structured(n)), C64::new(1.0, 0.0));
    let mut out = Polynomial::new();
    out.add_poly(&p, C64::new(2.0 / n as f64, 0.0));
    out.prune(PRUNE);
    out
}

/// Fermion density `(1/N) sum_k η†_kη_k`.
pub fn density_polynomial(n: usize) -> Polynomial {
    let mut p = Polynomial::new();
    for k in 0..n {
        add_ops(&mut p, &[Op::cre(k), Op::ann(k)], C64::new(1.0 / n as f64, 0.0));
    }
    p
}

/// `Γ_N - (2/(W_1^2 N)) sum_{k>0} r_k (2Y_kk - r_k X_kk)`, `r = v/u`.
pub fn spin_z_psi1_closed_form(t: &BogoliubovTable) -> f64 {
    let w2 = PolarizedState { flavor: Flavor::Down, n: 1 }.w_squared(t);
    let terms: Vec<f64> = t
        .positive()
        .map(|k| {
            let r = t.v[k] / t.u[k];
            r * (2.0 * t.yy(k, k) - r * t.xx(k, k))
        })
        .collect();
    t.gamma_n() - 2.0 / (w2 * t.n as f64) * pairwise_sum(&terms)
}

/// An observable that can be tracked along a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    Sz,
    Cx1,
    /// Connected `<S^z_l S^z_{l+m}> - <S^z_l>^2`.
    Czz(i64),
    /// `<H>/N` restricted to the tracked operators.
    Energy,
    Density,
}

impl Observable {
    pub fn name(&self) -> String {
        match self {
            Observable::Sz => "Sz".into(),
            Observable::Cx1 => "Cx1".into(),
            Observable::Czz(m) => format!("Czm_{m}"),
            Observable::Energy => "energy_diag".into(),
            Observable::Density => "density".into(),
        }
    }
}

/// Compiled functionals for a list of observables on one truncation.
#[derive(Clone, Debug)]
pub struct ObservableSet {
    pub list: Vec<Observable>,
    sz: Functional,
    funcs: Vec<Functional>,
}

impl ObservableSet {
    pub fn new(list: &[Observable], trunc: &Truncation, coeffs: &HamiltonianCoeffs) -> Result<Self> {
        let t = coeffs.table();
        if !trunc.scheme.contains_t2() {
            return Err(Error::MissingOperator(format!("observables need T2, truncation is {}", trunc.scheme)));
        }
        let sz = Functional::from_polynomial(&spin_z_polynomial(t), trunc)?;
        let mut funcs = Vec::with_capacity(list.len());
        for obs in list {
            let f = match *obs {
                Observable::Sz => sz.clone(),
                Observable::Cx1 => Functional::from_polynomial(&cx1_polynomial(t), trunc)?,
                Observable::Czz(m) => {
                    if m.unsigned_abs() as usize > t.n / 2 {
                        return Err(Error::param(format!("correlator distance {m} exceeds N/2")));
                    }
                    if !trunc.scheme.contains_t4() {
                        return Err(Error::MissingOperator(format!(
                            "zz-correlator needs T4, truncation is {}",
                            trunc.scheme
                        )));
                    }
                    Functional::from_polynomial(&szsz_polynomial(t, m, true), trunc)?
                }
                Observable::Energy => {
                    let mut h = quadratic_polynomial(coeffs);
                    if coeffs.g != 0.0 {
                        h.add_poly(&quartic_polynomial(coeffs, |k| k.is_pair_structured(t.n)), C64::new(1.0, 0.0));
                    }
                    let mut e = Polynomial::new();
                    e.add_poly(&h, C64::new(1.0 / t.n as f64, 0.0));
                    Functional::from_polynomial(&e, trunc)?
                }
                Observable::Density => Functional::from_polynomial(&density_polynomial(t.n), trunc)?,
            };
            funcs.push(f);
        }
        Ok(ObservableSet { list: list.to_vec(), sz, funcs })
    }

    pub fn names(&self) -> Vec<String> {
        self.list.iter().map(|o| o.name()).collect()
    }

    /// Complex values before taking real parts; `Czz` is already connected.
    pub fn eval_complex(&self, x: &[C64]) -> Vec<C64> {
        let sz = self.sz.eval(x);
        self.list
            .iter()
            .zip(&self.funcs)
            .map(|(o, f)| match o {
                Observable::Czz(_) => f.eval(x) - sz * sz,
                _ => f.eval(x),
            })
            .collect()
    }

    pub fn eval(&self, x: &[C64]) -> Vec<f64> {
        self.eval_complex(x).into_iter().map(|z| z.re).collect()
    }

    /// Largest imaginary part among the observables.
    pub fn imag_residue(&self, x: &[C64]) -> f64 {
        self.eval_complex(x).iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }
}

/// One-off `<S^z_l>` from a kinetic vector.
pub fn spin_z(x: &[C64], trunc: &Truncation, t: &BogoliubovTable) -> Result<C64> {
    Ok(Functional::from_polynomial(&spin_z_polynomial(t), trunc)?.eval(x))
}

/// One-off `<S^x_l S^x_{l+1}>`.
pub fn corr_xx_nn(x: &[C64], trunc: &Truncation, t: &BogoliubovTable) -> Result<C64> {
    Ok(Functional::from_polynomial(&cx1_polynomial(t), trunc)?.eval(x))
}

/// One-off connected `<C^z_m>`.
pub fn corr_zz(x: &[C64], trunc: &Truncation, t: &BogoliubovTable, m: i64) -> Result<C64> {
    if !trunc.scheme.contains_t4() {
        return Err(Error::MissingOperator(format!("zz-correlator needs T4, truncation is {}", trunc.scheme)));
    }
    let sz = spin_z(x, trunc, t)?;
    Ok(Functional::from_polynomial(&szsz_polynomial(t, m, true), trunc)?.eval(x) - sz * sz)
}

/// High-temperature coefficients `K1 = 2^-N Tr H^2 / N` and
/// `K2 = -2^(-N-2) Tr H^3 / N`. The Taylor series of the thermal energy
/// density is `ν_th(β) = -K1 β - 2 K2 β^2 + O(β^3)` with this `K2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThermalExpansion {
    pub k1: f64,
    pub k2: f64,
    pub h: f64,
    pub jz: f64,
    pub zeta: f64,
}

impl ThermalExpansion {
    pub fn new(p: &ModelParams) -> Self {
        let n = p.n;
        let z = zeta(n, p.alpha);
        let k1 = p.h * p.h / 4.0 + p.jx * p.jx / 16.0 + p.jz * p.jz * zeta(n, 2.0 * p.alpha) / 32.0;
        let w = |m: usize| (p.distance(m) as f64).powf(-p.alpha);
        let mut terms = Vec::new();
        for m in 2..n - 1 {
            for q in 2..n - 1 {
                if q + m == n - 1 || q + m == n || q + m == n + 1 {
                    continue;
                }
                terms.push(w(m) * w(q) * w((m + q) % n));
            }
        }
        let k2 = -3.0 / 64.0 * p.h * p.h * p.jz * z - p.jz.powi(3) / 256.0 * pairwise_sum(&terms);
        ThermalExpansion { k1, k2, h: p.h, jz: p.jz, zeta: z }
    }

    pub fn energy_density(&self, beta: f64) -> f64 {
        -self.k1 * beta - 2.0 * self.k2 * beta * beta
    }

    pub fn spin_z(&self, beta: f64) -> f64 {
        -self.h / 4.0 * beta + self.h * self.jz * self.zeta / 16.0 * beta * beta
    }

    /// Root of `ν_th(β) = target` nearest to zero.
    pub fn invert(&self, target: f64) -> Option<f64> {
        let a = 2.0 * self.k2;
        if a.abs() < 1e-300 {
            return Some(-target / self.k1);
        }
        // a β^2 + k1 β + target = 0
        let disc = self.k1 * self.k1 - 4.0 * a * target;
        if disc < 0.0 {
            return None;
        }
        let s = disc.sqrt();
        let r1 = (-self.k1 + s) / (2.0 * a);
        let r2 = (-self.k1 - s) / (2.0 * a);
        Some(if r1.abs() < r2.abs() { r1 } else { r2 })
    }
}

/// `τ = N / sum_k |ε_k|` and the traversal time `N / |J_x|`.
pub fn timescales(p: &ModelParams) -> (f64, f64) {
    let t = BogoliubovTable::new(p);
    let abs: Vec<f64> = t.eps.iter().map(|e| e.abs()).collect();
    (p.n as f64 / pairwise_sum(&abs), p.n as f64 / p.jx.abs())
}

/// Largest `|m|` with `|C_m| >= threshold`; `values[i]` belongs to `ms[i]`.
pub fn support_radius(ms: &[i64], values: &[f64], threshold: f64) -> i64 {
    ms.iter().zip(values).filter(|(_, v)| v.abs() >= threshold).map(|(m, _)| m.abs()).max().unwrap_or(0)
}

/// Mean and spread of a series over `[t0, t1]`.
pub fn plateau(times: &[f64], values: &[f64], t0: f64, t1: f64) -> Option<(f64, f64)> {
    let sel: Vec<f64> = times.iter().zip(values).filter(|(t, _)| **t >= t0 && **t <= t1).map(|(_, v)| *v).collect();
    if sel.is_empty() {
        return None;
    }
    let mean = sel.iter().sum::<f64>() / sel.len() as f64;
    let var = sel.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / sel.len() as f64;
    Some((mean, var.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_only_timescale() {
        let p = ModelParams::new(10, 0.0, 0.0, -0.5, 2.0).unwrap();
        let (tau, trav) = timescales(&p);
        assert!((tau - 2.0).abs() < 1e-14);
        assert!(trav.is_infinite());
    }

    #[test]
    fn expansion_vanishes_at_infinite_temperature() {
        let e = ThermalExpansion::new(&ModelParams::new(8, -1.0, -1.0, -1.0, 3.0).unwrap());
        assert_eq!(e.energy_density(0.0), 0.0);
        assert_eq!(e.spin_z(0.0), 0.0);
        assert!(e.k1 > 0.0);
        let b = e.invert(e.energy_density(-0.1)).unwrap();
        assert!((b + 0.1).abs() < 1e-12);
    }

    #[test]
    fn support_radius_threshold() {
        let ms = [0, 1, 2, 3];
        assert_eq!(support_radius(&ms, &[1.0, 1e-3, 2e-5, 1e-6], 1e-5), 2);
    }
}
