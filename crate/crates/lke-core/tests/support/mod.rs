//! Test-only oracles that do not go through the symbolic algebra.
#![allow(dead_code)]

use lke_core::fermion_algebra::{Key, Op, Polynomial};
use lke_core::C64;
use nalgebra::DMatrix;
use rand::Rng;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Dense matrices of abstract fermion modes `0..n` with the Jordan-Wigner
/// ordering given by the mode index.
pub struct ModeFock {
    pub n: usize,
    ann: Vec<DMatrix<C64>>,
}

impl ModeFock {
    pub fn new(n: usize) -> Self {
        let d = 1usize << n;
        let ann = (0..n)
            .map(|j| {
                let mut m = DMatrix::from_element(d, d, c(0.0));
                for s in 0..d {
                    if s >> j & 1 == 1 {
                        let sign = if (s & ((1 << j) - 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                        m[(s ^ (1 << j), s)] = c(sign);
                    }
                }
                m
            })
            .collect();
        ModeFock { n, ann }
    }

    pub fn op(&self, op: Op) -> DMatrix<C64> {
        let a = &self.ann[op.k as usize];
        if op.dagger {
            a.adjoint()
        } else {
            a.clone()
        }
    }

    pub fn key(&self, k: &Key) -> DMatrix<C64> {
        let d = 1usize << self.n;
        k.ops().fold(DMatrix::identity(d, d), |acc, o| acc * self.op(o))
    }

    pub fn poly(&self, p: &Polynomial) -> DMatrix<C64> {
        let d = 1usize << self.n;
        let mut m = DMatrix::from_element(d, d, c(0.0));
        for (k, v) in p.iter() {
            m += self.key(k) * *v;
        }
        m
    }
}

/// Random canonical key of degree at most `max_deg` over modes `0..n`.
pub fn random_key(rng: &mut impl Rng, n: usize, max_deg: usize) -> Key {
    loop {
        let deg = rng.gen_range(0..=max_deg);
        let nc = rng.gen_range(0..=deg);
        let mut pick = |count: usize| {
            let mut idx: Vec<u16> = (0..n as u16).collect();
            for i in 0..count.min(n) {
                let j = rng.gen_range(i..n);
                idx.swap(i, j);
            }
            let mut v = idx[..count.min(n)].to_vec();
            v.sort_unstable();
            v
        };
        let cre = pick(nc);
        let ann = pick(deg - nc);
        if cre.len() + ann.len() == deg {
            return Key::from_sorted(&cre, &ann);
        }
    }
}

pub fn random_coeff(rng: &mut impl Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
