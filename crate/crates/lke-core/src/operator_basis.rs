//! Symmetry-reduced operator classes and the truncations built from them.
//!
//! Every basis element is a canonical monomial assembled from pair factors
//! `η_kη_{-k}`, `η†_kη†_{-k}`, `η†_kη_k` on distinct pair modes, so it is even,
//! conserves momentum and respects the `{k, -k}` pair structure. Per pair mode
//! the allowed content is one of six patterns: nothing, `N_k`, `N_{-k}`,
//! a created pair, an annihilated pair, or both pairs.

use std::fmt;
use std::str::FromStr;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::fermion_algebra::Key;

/// Hard cap on the degree of basis monomials.
pub const MAX_DEGREE: usize = 8;

/// A truncation scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// All classes up to degree `d`.
    Deg(usize),
    /// All classes up to p-number `p`.
    P(usize),
    /// Degree up to `d - 2` plus the single class of degree `d` and p-number `p`.
    DegP(usize, usize),
}

impl Scheme {
    pub fn validate(self) -> Result<Self> {
        let bad = |why: &str| Err(Error::UnsupportedScheme(format!("{self}: {why}")));
        match self {
            Scheme::Deg(d) if d % 2 != 0 || d == 0 || d > MAX_DEGREE => bad("degree must be even, 2..=8"),
            Scheme::P(p) if p == 0 || p > MAX_DEGREE / 2 => bad("p must be 1..=4"),
            Scheme::DegP(d, _) if d % 2 != 0 || d < 2 || d > MAX_DEGREE => bad("degree must be even, 2..=8"),
            Scheme::DegP(d, p) if p * 2 < d || p > d => bad("need deg/2 <= p <= deg"),
            _ => Ok(self),
        }
    }

    /// Whether the class `C̃_deg^p` belongs to this truncation.
    pub fn includes(self, deg: usize, p: usize) -> bool {
        match self {
            Scheme::Deg(d) => deg <= d,
            Scheme::P(pp) => p <= pp,
            Scheme::DegP(d, pp) => deg + 2 <= d || (deg == d && p == pp),
        }
    }

    pub fn max_degree(self) -> usize {
        match self {
            Scheme::Deg(d) | Scheme::DegP(d, _) => d,
            Scheme::P(p) => 2 * p,
        }
    }

    pub fn contains_t2(self) -> bool {
        self.includes(2, 1) && self.includes(2, 2)
    }

    pub fn contains_t4(self) -> bool {
        (0..=4usize).all(|d| (d.div_ceil(2)..=d).all(|p| self.includes(d, p)))
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Deg(d) => write!(f, "T{d}"),
            Scheme::P(p) => write!(f, "Tp{p}"),
            Scheme::DegP(d, p) => write!(f, "T{d}p{p}"),
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::UnsupportedScheme(s.to_string());
        let rest = s.trim().strip_prefix('T').ok_or_else(err)?;
        let num = |x: &str| x.parse::<usize>().map_err(|_| err());
        let scheme = if let Some(p) = rest.strip_prefix('p') {
            Scheme::P(num(p)?)
        } else if let Some((d, p)) = rest.split_once('p') {
            Scheme::DegP(num(d)?, num(p)?)
        } else {
            Scheme::Deg(num(rest)?)
        };
        scheme.validate()
    }
}

impl serde::Serialize for Scheme {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Scheme {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Per-mode content: (creators, annihilators, uses +k, uses -k) flags.
#[derive(Clone, Copy)]
struct Pattern {
    cre_pos: bool,
    cre_neg: bool,
    ann_pos: bool,
    ann_neg: bool,
}

impl Pattern {
    const ALL: [Pattern; 5] = [
        Pattern { cre_pos: true, cre_neg: false, ann_pos: true, ann_neg: false },
        Pattern { cre_pos: false, cre_neg: true, ann_pos: false, ann_neg: true },
        Pattern { cre_pos: true, cre_neg: true, ann_pos: false, ann_neg: false },
        Pattern { cre_pos: false, cre_neg: false, ann_pos: true, ann_neg: true },
        Pattern { cre_pos: true, cre_neg: true, ann_pos: true, ann_neg: true },
    ];

    fn counts(self) -> (usize, usize) {
        (
            self.cre_pos as usize + self.cre_neg as usize,
            self.ann_pos as usize + self.ann_neg as usize,
        )
    }
}

/// Visit every pair-structured key whose (creator, annihilator) counts stay
/// within `max_deg`, calling `visit` for those accepted by `keep(deg, p)`.
fn walk_pair_keys(n: usize, max_deg: usize, keep: &dyn Fn(usize, usize) -> bool, visit: &mut dyn FnMut(Key)) {
    let half = n / 2;
    let mut cre: Vec<u16> = Vec::with_capacity(MAX_DEGREE);
    let mut ann: Vec<u16> = Vec::with_capacity(MAX_DEGREE);

    #[allow(clippy::too_many_arguments)]
    fn rec(
        mode: usize,
        half: usize,
        max_deg: usize,
        cre: &mut Vec<u16>,
        ann: &mut Vec<u16>,
        keep: &dyn Fn(usize, usize) -> bool,
        visit: &mut dyn FnMut(Key),
    ) {
        let deg = cre.len() + ann.len();
        if keep(deg, cre.len().max(ann.len())) {
            let mut c = cre.clone();
            let mut a = ann.clone();
            c.sort_unstable();
            a.sort_unstable();
            visit(Key::from_sorted(&c, &a));
        }
        for m in mode..half {
            let pos = (half + m) as u16;
            let neg = (half - 1 - m) as u16;
            for pat in Pattern::ALL {
                let (dc, da) = pat.counts();
                if deg + dc + da > max_deg {
                    continue;
                }
                let (lc, la) = (cre.len(), ann.len());
                if pat.cre_pos {
                    cre.push(pos);
                }
                if pat.cre_neg {
                    cre.push(neg);
                }
                if pat.ann_pos {
                    ann.push(pos);
                }
                if pat.ann_neg {
                    ann.push(neg);
                }
                rec(m + 1, half, max_deg, cre, ann, keep, visit);
                cre.truncate(lc);
                ann.truncate(la);
            }
        }
    }

    rec(0, half, max_deg, &mut cre, &mut ann, keep, visit);
}

/// The class `C̃_deg^p`, sorted by key. Empty for odd degree.
pub fn enumerate_class(n: usize, deg: usize, p: usize) -> Vec<Key> {
    if deg % 2 != 0 || deg > MAX_DEGREE {
        return Vec::new();
    }
    let mut out = Vec::new();
    walk_pair_keys(n, deg, &|d, pp| d == deg && pp == p, &mut |k| out.push(k));
    out.sort();
    out
}

/// Number of basis elements a scheme produces at size `n`, without building it.
pub fn cardinality(scheme: Scheme, n: usize) -> u128 {
    // counts[c][a] over modes processed so far
    let dim = MAX_DEGREE + 1;
    let mut counts = vec![vec![0u128; dim]; dim];
    counts[0][0] = 1;
    for _ in 0..n / 2 {
        let mut next = counts.clone();
        for c in 0..dim {
            for a in 0..dim {
                let x = counts[c][a];
                if x == 0 {
                    continue;
                }
                for pat in Pattern::ALL {
                    let (dc, da) = pat.counts();
                    if c + dc < dim && a + da < dim {
                        next[c + dc][a + da] += x;
                    }
                }
            }
        }
        counts = next;
    }
    let mut total = 0;
    for (c, row) in counts.iter().enumerate() {
        for (a, &x) in row.iter().enumerate() {
            if c + a <= MAX_DEGREE && scheme.includes(c + a, c.max(a)) {
                total += x;
            }
        }
    }
    total
}

/// An indexed, conjugation-closed operator basis.
#[derive(Clone, Debug)]
pub struct Truncation {
    pub scheme: Scheme,
    pub n: usize,
    basis: Vec<Key>,
    index: FxHashMap<Key, usize>,
    conj: Vec<(usize, f64)>,
}

impl Truncation {
    /// Build the basis, ordered by degree then key; the identity is index 0.
    pub fn new(scheme: Scheme, n: usize) -> Result<Self> {
        let scheme = scheme.validate()?;
        if n < 4 || n % 2 != 0 {
            return Err(Error::param(format!("N must be even and >= 4, got {n}")));
        }
        let mut basis = Vec::new();
        walk_pair_keys(n, scheme.max_degree(), &|d, p| scheme.includes(d, p), &mut |k| basis.push(k));
        basis.sort_by(|a, b| a.degree().cmp(&b.degree()).then(a.cmp(b)));
        let index: FxHashMap<Key, usize> = basis.iter().enumerate().map(|(i, k)| (*k, i)).collect();
        let conj = basis
            .iter()
            .map(|k| {
                let (ka, s) = k.adjoint();
                (index[&ka], s)
            })
            .collect();
        Ok(Truncation { scheme, n, basis, index, conj })
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn keys(&self) -> &[Key] {
        &self.basis
    }

    pub fn key(&self, i: usize) -> Key {
        self.basis[i]
    }

    pub fn position(&self, key: &Key) -> Option<usize> {
        self.index.get(key).copied()
    }

    /// Index and sign of the Hermitian conjugate: `O_i† = sign * O_j`.
    pub fn conj_index(&self, i: usize) -> (usize, f64) {
        self.conj[i]
    }

    pub fn identity_index(&self) -> usize {
        0
    }

    pub fn max_degree(&self) -> usize {
        self.basis.last().map(|k| k.degree()).unwrap_or(0)
    }
}
