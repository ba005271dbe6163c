//! Normal-ordered monomials of Bogoliubov fermions `η_k`, `η†_k` labelled by
//! grid indices, and their products and commutators via Wick contraction.
//!
//! Canonical form: creators first, then annihilators, each block with strictly
//! increasing indices. A repeated index inside a block is zero.

use std::fmt;

use rustc_hash::FxHashMap;

use crate::C64;

/// Largest number of factors a [`Key`] can hold.
pub const MAX_OPS: usize = 12;

/// Coefficients below this magnitude are removed from polynomials.
pub const PRUNE: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Op {
    pub dagger: bool,
    pub k: u16,
}

impl Op {
    pub fn cre(k: usize) -> Op {
        Op { dagger: true, k: k as u16 }
    }

    pub fn ann(k: usize) -> Op {
        Op { dagger: false, k: k as u16 }
    }

    pub fn adjoint(self) -> Op {
        Op { dagger: !self.dagger, k: self.k }
    }
}

/// A canonical factor sequence, `nc` creators followed by `na` annihilators.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Key {
    nc: u8,
    na: u8,
    idx: [u16; MAX_OPS],
}

impl Key {
    pub const IDENTITY: Key = Key { nc: 0, na: 0, idx: [0; MAX_OPS] };

    /// Build from strictly increasing creator and annihilator index lists.
    pub fn from_sorted(cre: &[u16], ann: &[u16]) -> Key {
        assert!(cre.len() + ann.len() <= MAX_OPS, "monomial degree exceeds {MAX_OPS}");
        debug_assert!(cre.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(ann.windows(2).all(|w| w[0] < w[1]));
        let mut idx = [0u16; MAX_OPS];
        idx[..cre.len()].copy_from_slice(cre);
        idx[cre.len()..cre.len() + ann.len()].copy_from_slice(ann);
        Key { nc: cre.len() as u8, na: ann.len() as u8, idx }
    }

    /// Canonical key and sign of an arbitrary creator list and annihilator list.
    pub fn from_blocks(cre: &[u16], ann: &[u16]) -> Option<(Key, f64)> {
        let mut c = [0u16; MAX_OPS];
        let mut a = [0u16; MAX_OPS];
        c[..cre.len()].copy_from_slice(cre);
        a[..ann.len()].copy_from_slice(ann);
        let sc = sort_with_sign(&mut c[..cre.len()])?;
        let sa = sort_with_sign(&mut a[..ann.len()])?;
        Some((Key::from_sorted(&c[..cre.len()], &a[..ann.len()]), sc * sa))
    }

    pub fn creators(&self) -> &[u16] {
        &self.idx[..self.nc as usize]
    }

    pub fn annihilators(&self) -> &[u16] {
        &self.idx[self.nc as usize..(self.nc + self.na) as usize]
    }

    pub fn degree(&self) -> usize {
        (self.nc + self.na) as usize
    }

    pub fn p_number(&self) -> usize {
        self.nc.max(self.na) as usize
    }

    pub fn is_identity(&self) -> bool {
        self.degree() == 0
    }

    pub fn ops(&self) -> impl Iterator<Item = Op> + '_ {
        self.creators()
            .iter()
            .map(|&k| Op { dagger: true, k })
            .chain(self.annihilators().iter().map(|&k| Op { dagger: false, k }))
    }

    /// Hermitian conjugate as `(key, sign)`.
    pub fn adjoint(&self) -> (Key, f64) {
        let p = self.nc as usize;
        let q = self.na as usize;
        let flips = p * p.saturating_sub(1) / 2 + q * q.saturating_sub(1) / 2;
        let sign = if flips % 2 == 0 { 1.0 } else { -1.0 };
        (Key::from_sorted(self.annihilators(), self.creators()), sign)
    }

    /// Total momentum in units of `π/N`, modulo `2N`.
    pub fn momentum(&self, n: usize) -> usize {
        let m = 2 * n as i64;
        let q = |i: u16| 2 * i as i64 - n as i64 + 1;
        let s: i64 = self.creators().iter().map(|&i| q(i)).sum::<i64>()
            - self.annihilators().iter().map(|&i| q(i)).sum::<i64>();
        s.rem_euclid(m) as usize
    }

    pub fn conserves_momentum(&self, n: usize) -> bool {
        self.momentum(n) == 0
    }

    /// True when the monomial maps pair-occupation states of the modes
    /// `{k, -k}` into pair-occupation states: per pair mode the factors are
    /// nothing, one `η†_k η_k`, a pair `η†_k η†_{-k}`, a pair `η_k η_{-k}`,
    /// or both pairs.
    pub fn is_pair_structured(&self, n: usize) -> bool {
        let mut masks: [(u16, u8); MAX_OPS] = [(0, 0); MAX_OPS];
        let mut used = 0;
        let mut mark = |i: u16, bit: u8| {
            let (mode, pos) = pair_mode(n, i as usize);
            let bit = if pos { bit } else { bit << 1 };
            let mode = mode as u16;
            for m in masks[..used].iter_mut() {
                if m.0 == mode {
                    m.1 |= bit;
                    return;
                }
            }
            masks[used] = (mode, bit);
            used += 1;
        };
        for &i in self.creators() {
            mark(i, 0b0001);
        }
        for &i in self.annihilators() {
            mark(i, 0b0100);
        }
        // bits: 1 = cre(+k), 2 = cre(-k), 4 = ann(+k), 8 = ann(-k)
        masks[..used]
            .iter()
            .all(|&(_, m)| matches!(m, 0b0101 | 0b1010 | 0b0011 | 0b1100 | 0b1111))
    }
}

/// Pair-mode index `0..N/2` and whether `i` is the positive member.
pub fn pair_mode(n: usize, i: usize) -> (usize, bool) {
    let half = n / 2;
    if i >= half {
        (i - half, true)
    } else {
        (half - 1 - i, false)
    }
}

impl fmt::Debug for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "1");
        }
        let mut first = true;
        for op in self.ops() {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            write!(f, "{}{}", if op.dagger { "c" } else { "a" }, op.k)?;
        }
        Ok(())
    }
}

/// Insertion sort recording the permutation parity; `None` on a repeated index.
fn sort_with_sign(xs: &mut [u16]) -> Option<f64> {
    let mut sign = 1.0;
    for i in 1..xs.len() {
        let mut j = i;
        while j > 0 && xs[j - 1] > xs[j] {
            xs.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
        if j > 0 && xs[j - 1] == xs[j] {
            return None;
        }
    }
    Some(sign)
}

fn parity(perm: &[u8]) -> f64 {
    let mut inv = 0usize;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Monomial {
    pub coeff: C64,
    pub key: Key,
}

/// Canonical form of a normal-ordered factor list; `None` when Pauli
/// exclusion makes it vanish.
///
/// # Panics
/// If a creator follows an annihilator. Use [`normal_order`] for such lists.
pub fn canonicalize(factors: &[Op], coeff: C64) -> Option<Monomial> {
    let split = factors.iter().position(|o| !o.dagger).unwrap_or(factors.len());
    assert!(
        factors[split..].iter().all(|o| !o.dagger),
        "canonicalize expects creators before annihilators"
    );
    let cre: Vec<u16> = factors[..split].iter().map(|o| o.k).collect();
    let ann: Vec<u16> = factors[split..].iter().map(|o| o.k).collect();
    let (key, sign) = Key::from_blocks(&cre, &ann)?;
    Some(Monomial { coeff: coeff * sign, key })
}

/// Expand `a * b` by Wick's theorem, calling `emit(key, sign)` for every
/// surviving canonical term with at least `min_contractions` contractions.
pub fn wick_product(a: &Key, b: &Key, min_contractions: usize, mut emit: impl FnMut(Key, f64)) {
    let aa = a.annihilators();
    let bc = b.creators();
    // contractible (position in aa, position in bc) pairs, matched by index
    let mut pairs = [(0u8, 0u8); MAX_OPS];
    let mut np = 0;
    let (mut i, mut j) = (0, 0);
    while i < aa.len() && j < bc.len() {
        match aa[i].cmp(&bc[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                pairs[np] = (i as u8, j as u8);
                np += 1;
                i += 1;
                j += 1;
            }
        }
    }
    if np < min_contractions {
        return;
    }
    let p = aa.len();
    let q = bc.len();
    for mask in 0u32..(1u32 << np) {
        let nt = mask.count_ones() as usize;
        if nt < min_contractions {
            continue;
        }
        let out_deg = a.degree() + b.degree() - 2 * nt;
        assert!(out_deg <= MAX_OPS, "product term of degree {out_deg} exceeds {MAX_OPS}");
        let mut a_used = 0u32;
        let mut b_used = 0u32;
        let mut perm = [0u8; 2 * MAX_OPS];
        let mut len = 0;
        for (t, &(ia, jb)) in pairs[..np].iter().enumerate() {
            if mask & (1 << t) != 0 {
                a_used |= 1 << ia;
                b_used |= 1 << jb;
                perm[len] = ia;
                perm[len + 1] = p as u8 + jb;
                len += 2;
            }
        }
        let mut cre = [0u16; MAX_OPS];
        let mut nc = 0;
        for &k in a.creators() {
            cre[nc] = k;
            nc += 1;
        }
        for (jb, &k) in bc.iter().enumerate() {
            if b_used & (1 << jb) == 0 {
                perm[len] = p as u8 + jb as u8;
                len += 1;
                cre[nc] = k;
                nc += 1;
            }
        }
        let mut ann = [0u16; MAX_OPS];
        let mut na = 0;
        for (ia, &k) in aa.iter().enumerate() {
            if a_used & (1 << ia) == 0 {
                perm[len] = ia as u8;
                len += 1;
                ann[na] = k;
                na += 1;
            }
        }
        debug_assert_eq!(len, p + q);
        for &k in b.annihilators() {
            ann[na] = k;
            na += 1;
        }
        let s0 = parity(&perm[..len]);
        let Some(sc) = sort_with_sign(&mut cre[..nc]) else { continue };
        let Some(sa) = sort_with_sign(&mut ann[..na]) else { continue };
        emit(Key::from_sorted(&cre[..nc], &ann[..na]), s0 * sc * sa);
    }
}

/// A linear combination of canonical monomials.
#[derive(Clone, Debug, Default)]
pub struct Polynomial {
    terms: FxHashMap<Key, C64>,
}

impl Polynomial {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn identity(c: C64) -> Self {
        let mut p = Self::new();
        p.add(Key::IDENTITY, c);
        p
    }

    pub fn from_monomial(m: Monomial) -> Self {
        let mut p = Self::new();
        p.add(m.key, m.coeff);
        p
    }

    pub fn add(&mut self, key: Key, c: C64) {
        *self.terms.entry(key).or_insert(C64::new(0.0, 0.0)) += c;
    }

    pub fn add_poly(&mut self, other: &Polynomial, scale: C64) {
        for (k, c) in &other.terms {
            self.add(*k, c * scale);
        }
    }

    /// Drop coefficients with magnitude below `tol`.
    pub fn prune(&mut self, tol: f64) {
        self.terms.retain(|_, c| c.norm() >= tol);
    }

    pub fn get(&self, key: &Key) -> C64 {
        self.terms.get(key).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_degree(&self) -> usize {
        self.terms.keys().map(|k| k.degree()).max().unwrap_or(0)
    }

    /// Terms in key order.
    pub fn sorted_terms(&self) -> Vec<(Key, C64)> {
        let mut v: Vec<(Key, C64)> = self.terms.iter().map(|(k, c)| (*k, *c)).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Key, &C64)> {
        self.terms.iter()
    }

    pub fn adjoint(&self) -> Polynomial {
        let mut out = Polynomial::new();
        for (k, c) in &self.terms {
            let (ka, s) = k.adjoint();
            out.add(ka, c.conj() * s);
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Polynomial) -> f64 {
        let mut d: f64 = 0.0;
        for (k, c) in &self.terms {
            d = d.max((c - other.get(k)).norm());
        }
        for (k, c) in &other.terms {
            if !self.terms.contains_key(k) {
                d = d.max(c.norm());
            }
        }
        d
    }
}

/// Normal-ordered product `a * b`.
pub fn normal_order_product(a: &Monomial, b: &Monomial) -> Polynomial {
    let mut out = Polynomial::new();
    let c = a.coeff * b.coeff;
    wick_product(&a.key, &b.key, 0, |k, s| out.add(k, c * s));
    out.prune(PRUNE);
    out
}

/// Normal-ordered form of an arbitrary factor string.
pub fn normal_order(factors: &[Op], coeff: C64) -> Polynomial {
    let mut acc = Polynomial::identity(coeff);
    for &op in factors {
        let key = if op.dagger {
            Key::from_sorted(&[op.k], &[])
        } else {
            Key::from_sorted(&[], &[op.k])
        };
        let mut next = Polynomial::new();
        for (k, c) in acc.iter() {
            wick_product(k, &key, 0, |kk, s| next.add(kk, c * s));
        }
        next.prune(PRUNE);
        acc = next;
    }
    acc
}

pub fn product(a: &Polynomial, b: &Polynomial) -> Polynomial {
    let mut out = Polynomial::new();
    for (ka, ca) in a.iter() {
        for (kb, cb) in b.iter() {
            let c = ca * cb;
            wick_product(ka, kb, 0, |k, s| out.add(k, c * s));
        }
    }
    out.prune(PRUNE);
    out
}

/// Normal-ordered commutator `[a, b]`.
pub fn commutator(a: &Polynomial, b: &Polynomial) -> Polynomial {
    let mut out = Polynomial::new();
    for (ka, ca) in a.iter() {
        for (kb, cb) in b.iter() {
            let c = ca * cb;
            // for two even monomials the uncontracted terms cancel exactly
            let min_c = usize::from(ka.degree() % 2 == 0 && kb.degree() % 2 == 0);
            wick_product(ka, kb, min_c, |k, s| out.add(k, c * s));
            wick_product(kb, ka, min_c, |k, s| out.add(k, -c * s));
        }
    }
    out.prune(PRUNE);
    out
}
