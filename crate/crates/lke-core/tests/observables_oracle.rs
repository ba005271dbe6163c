mod support;

use lke_core::ed_reference::{FockRep, ThermalSpectrum};
use lke_core::observables::{
    cx1_polynomial, spin_z_polynomial, spin_z_psi1_closed_form, szsz_polynomial, Observable, ObservableSet,
    ThermalExpansion,
};
use lke_core::operator_basis::{Scheme, Truncation};
use lke_core::states::InitialState;
use lke_core::{Model, ModelParams, C64};
use rand::rngs::StdRng;
use rand::SeedableRng;
use support::{max_diff, random_coeff};

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn sz(c: usize, l: usize) -> f64 {
    if c >> l & 1 == 1 {
        0.5
    } else {
        -0.5
    }
}

/// Translation-averaged spin operators applied in the configuration basis.
fn spin_z_avg(n: usize, v: &[C64]) -> Vec<C64> {
    v.iter().enumerate().map(|(c, x)| x * (0..n).map(|l| sz(c, l)).sum::<f64>() / n as f64).collect()
}

fn szsz_avg(n: usize, m: usize, v: &[C64]) -> Vec<C64> {
    v.iter().enumerate().map(|(c, x)| x * (0..n).map(|l| sz(c, l) * sz(c, (l + m) % n)).sum::<f64>() / n as f64).collect()
}

fn sxsx_avg(n: usize, v: &[C64]) -> Vec<C64> {
    let mut out = vec![zero(); v.len()];
    for (c, x) in v.iter().enumerate() {
        for l in 0..n {
            out[c ^ (1 << l) ^ (1 << ((l + 1) % n))] += x * (0.25 / n as f64);
        }
    }
    out
}

fn even_random(n: usize, rng: &mut StdRng) -> Vec<C64> {
    (0..1usize << n).map(|s| if s.count_ones() % 2 == 0 { random_coeff(rng) } else { zero() }).collect()
}

#[test]
fn observable_polynomials_match_spin_operators() {
    let mut rng = StdRng::seed_from_u64(21);
    for n in [6usize, 8] {
        let p = ModelParams::new(n, -1.0, 0.5, -0.7, 1.0).unwrap();
        let fock = FockRep::new(&p).unwrap();
        let t = &fock.table;
        for _ in 0..3 {
            let v = even_random(n, &mut rng);
            assert!(max_diff(&fock.apply_polynomial(&spin_z_polynomial(t), &v), &spin_z_avg(n, &v)) < 1e-12);
            assert!(max_diff(&fock.apply_polynomial(&cx1_polynomial(t), &v), &sxsx_avg(n, &v)) < 1e-12);
            for m in 1..=(n / 2) as i64 {
                let got = fock.apply_polynomial(&szsz_polynomial(t, m, false), &v);
                assert!(max_diff(&got, &szsz_avg(n, m as usize, &v)) < 1e-12, "m = {m}");
            }
        }
    }
}

#[test]
fn observable_set_matches_exact_expectations() {
    let n = 8;
    let p = ModelParams::new(n, -1.0, -0.6, -0.8, 2.0).unwrap();
    let m = Model::new(p).unwrap();
    let fock = FockRep::new(&p).unwrap();
    let trunc = Truncation::new(Scheme::Deg(4), n).unwrap();
    let list = [Observable::Sz, Observable::Cx1, Observable::Czz(1), Observable::Czz(2), Observable::Czz(4)];
    let set = ObservableSet::new(&list, &trunc, &m.coeffs).unwrap();
    for name in ["psi:1", "psi:3", "chi:2", "superposition:0.6,0,0,0.8:2"] {
        let s: InitialState = name.parse().unwrap();
        let x0 = s.initial_vector(&trunc, &m.table).unwrap();
        let comps = s.components(&m.table).unwrap();
        let mut v = vec![zero(); fock.dim()];
        for (w, ps) in comps {
            for (o, x) in v.iter_mut().zip(fock.pair_state(&ps).unwrap()) {
                *o += w * x;
            }
        }
        lke_core::ed_reference::normalize(&mut v);
        let ex = |w: Vec<C64>| v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum::<C64>().re;
        let szv = ex(spin_z_avg(n, &v));
        let want =
            [szv, ex(sxsx_avg(n, &v)), ex(szsz_avg(n, 1, &v)) - szv * szv, ex(szsz_avg(n, 2, &v)) - szv * szv, ex(szsz_avg(n, 4, &v)) - szv * szv];
        let got = set.eval(&x0);
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-12, "{name}: {got:?} vs {want:?}");
        }
        assert!(set.imag_residue(&x0) < 1e-12);
    }
}

#[test]
fn psi1_spin_z_closed_form() {
    for n in [8usize, 20, 60] {
        let p = ModelParams::new(n, -1.0, -1.0, -0.8, 3.0).unwrap();
        let t = lke_core::BogoliubovTable::new(&p);
        let s: InitialState = "psi:1".parse().unwrap();
        let via = s.expect(&spin_z_polynomial(&t), &t).unwrap();
        assert!((via.re - spin_z_psi1_closed_form(&t)).abs() < 1e-12);
        assert!(via.im.abs() < 1e-12);
    }
}

#[test]
fn thermal_coefficients_match_traces() {
    for (n, alpha) in [(8usize, 1.5), (10, 3.0)] {
        let p = ModelParams::new(n, -1.0, -0.9, -0.6, alpha).unwrap();
        let spec = ThermalSpectrum::new(&p).unwrap();
        let dim = (1u64 << n) as f64;
        let th = ThermalExpansion::new(&p);
        assert!(spec.trace_power(1).abs() < 1e-9);
        let k1 = spec.trace_power(2) / (n as f64 * dim);
        let k2 = -spec.trace_power(3) / (4.0 * n as f64 * dim);
        assert!((th.k1 - k1).abs() < 1e-10, "K1 at N = {n}: {} vs {k1}", th.k1);
        assert!((th.k2 - k2).abs() < 1e-10, "K2 at N = {n}: {} vs {k2}", th.k2);
        // small beta agreement of the full thermal average
        let beta = 1e-3;
        assert!((spec.thermal(beta).0 - th.energy_density(beta)).abs() < 1e-8);
        assert!((spec.thermal(beta).1 - th.spin_z(beta)).abs() < 1e-8);
    }
}

#[test]
fn thermal_inversion_round_trips() {
    let p = ModelParams::new(60, -1.0, -1.0, -0.8, 3.0).unwrap();
    let th = ThermalExpansion::new(&p);
    for beta in [-0.2, -0.05, 0.0, 0.1, 0.3] {
        let b = th.invert(th.energy_density(beta)).unwrap();
        assert!((b - beta).abs() < 1e-12);
    }
}

/// Largest `|exact - series| / |β|^3` on `[-b, b]`.
fn remainder_constant(spec: &ThermalSpectrum, th: &ThermalExpansion, b: f64, spin: bool) -> f64 {
    (1..=20)
        .flat_map(|i| [i as f64 * b / 20.0, -(i as f64) * b / 20.0])
        .map(|beta| {
            let (nu, s) = spec.thermal(beta);
            let miss = if spin { s - th.spin_z(beta) } else { nu - th.energy_density(beta) };
            miss.abs() / beta.abs().powi(3)
        })
        .fold(0.0, f64::max)
}

#[test]
fn thermal_series_has_cubic_remainder() {
    let p = ModelParams::new(8, -1.0, -0.9, -0.6, 1.5).unwrap();
    let spec = ThermalSpectrum::new(&p).unwrap();
    let th = ThermalExpansion::new(&p);
    for spin in [false, true] {
        let c = [0.3, 0.15, 0.075].map(|b| remainder_constant(&spec, &th, b, spin));
        assert!(c[1] <= 1.5 * c[0] && c[2] <= 1.5 * c[1], "spin = {spin}: {c:?}");
    }
}
