mod support;

use lke_core::ed_reference::FockRep;
use lke_core::fermion_algebra::Key;
use lke_core::observables::density_polynomial;
use lke_core::operator_basis::{Scheme, Truncation};
use lke_core::states::{energy_density, energy_expectation, Flavor, InitialState, PairEvaluator, PairState, PolarizedState};
use lke_core::{Model, ModelParams, C64};
use proptest::prelude::*;
use support::max_diff;

fn params(n: usize, h: f64) -> ModelParams {
    ModelParams::new(n, -1.0, -0.6, h, 2.0).unwrap()
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Fock vector of an initial state built by explicit operator application.
fn fock_state(fock: &FockRep, state: &InitialState) -> Vec<C64> {
    let comps = state.components(&fock.table).unwrap();
    let mut v = vec![C64::new(0.0, 0.0); fock.dim()];
    for (w, ps) in comps {
        for (o, x) in v.iter_mut().zip(fock.pair_state(&ps).unwrap()) {
            *o += w * x;
        }
    }
    lke_core::ed_reference::normalize(&mut v);
    v
}

fn fock_expect(fock: &FockRep, v: &[C64], key: &Key) -> C64 {
    dot(v, &fock.apply_key(key, v))
}

#[test]
fn fully_polarized_limits_are_product_states() {
    for n in [6usize, 8] {
        let fock = FockRep::new(&params(n, -0.8)).unwrap();
        let down = fock_state(&fock, &"psi:max".parse().unwrap());
        let up = fock_state(&fock, &"chi:max".parse().unwrap());
        assert!((dot(&fock.all_down(), &down).norm() - 1.0).abs() < 1e-12);
        assert!((dot(&fock.all_up(), &up).norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn w_squared_is_the_norm() {
    let n = 8;
    let fock = FockRep::new(&params(n, -0.7)).unwrap();
    for level in 0..=n / 2 {
        let s = PolarizedState::new(Flavor::Down, level.max(1), n).unwrap();
        let s = PolarizedState { n: level, ..s };
        let v = fock.pair_state(&s.pair_state(&fock.table)).unwrap();
        let norm2 = dot(&v, &v).re;
        assert!((norm2 - s.w_squared(&fock.table)).abs() < 1e-12 * norm2.max(1.0));
    }
}

#[test]
fn initial_vectors_match_fock_construction() {
    let states = ["vacuum", "psi:1", "psi:2", "psi:max", "chi:1", "chi:2", "chi:max", "superposition:0.6,0,0,0.8:1"];
    for n in [6usize, 8] {
        let p = params(n, -0.8);
        let fock = FockRep::new(&p).unwrap();
        let trunc = Truncation::new(Scheme::Deg(4), n).unwrap();
        for name in states {
            let state: InitialState = name.parse().unwrap();
            let x0 = state.initial_vector(&trunc, &fock.table).unwrap();
            let v = fock_state(&fock, &state);
            let exact: Vec<C64> = trunc.keys().iter().map(|k| fock_expect(&fock, &v, k)).collect();
            let err = max_diff(&x0, &exact);
            assert!(err < 1e-12, "{name}, N = {n}: {err:e}");
        }
    }
}

#[test]
fn density_matches_fock_expectation() {
    let n = 8;
    let fock = FockRep::new(&params(n, -0.6)).unwrap();
    let dens = density_polynomial(n);
    for (flavor, name) in [(Flavor::Down, "psi"), (Flavor::Up, "chi")] {
        for level in 1..=n / 2 {
            let state: InitialState = format!("{name}:{level}").parse().unwrap();
            let v = fock_state(&fock, &state);
            let exact = dot(&v, &fock.apply_polynomial(&dens, &v)).re;
            let s = PolarizedState::new(flavor, level, n).unwrap();
            assert!((s.density(&fock.table) - exact).abs() < 1e-12, "{name}:{level}");
        }
    }
}

#[test]
fn psi1_breaks_wick_factorization() {
    let n = 12;
    let t = lke_core::BogoliubovTable::new(&params(n, -0.8));
    let state = InitialState::Psi(lke_core::states::Level::Pairs(1));
    let (k, q) = (n / 2, n / 2 + 2);
    let keys = [Key::from_sorted(&[k as u16], &[k as u16]), Key::from_sorted(&[q as u16], &[q as u16])];
    let mut both = vec![k as u16, q as u16];
    both.sort_unstable();
    let pair = Key::from_sorted(&both, &both);
    let vals = state.expectations(&[keys[0], keys[1], pair], &t).unwrap();
    // at most one pair is occupied, so the joint occupation vanishes
    assert!(vals[2].norm() < 1e-14);
    assert!((vals[0] * vals[1]).norm() > 1e-8, "{vals:?}");
}

#[test]
fn energy_closed_forms_match_term_by_term() {
    for n in [10usize, 12] {
        let p = params(n, -0.8);
        let m = Model::new(p).unwrap();
        for name in ["vacuum", "psi:1", "psi:max", "chi:1", "chi:max", "superposition:0.6,0,0,0.8:max", "superposition:0,0.6,0.8,0:1"] {
            let s: InitialState = name.parse().unwrap();
            let a = energy_density(&s, &p).unwrap();
            let b = energy_expectation(&s, &m.coeffs).unwrap();
            assert!((a - b).abs() < 1e-11, "{name}, N = {n}: {a} vs {b}");
        }
    }
}

#[test]
fn energy_expectation_matches_fock() {
    let n = 8;
    let p = params(n, -0.8);
    let m = Model::new(p).unwrap();
    let fock = FockRep::new(&p).unwrap();
    for name in ["psi:2", "chi:3", "superposition:0.6,0,0,0.8:2"] {
        let s: InitialState = name.parse().unwrap();
        let v = fock_state(&fock, &s);
        let exact = dot(&v, &lke_core::ed_reference::apply_spin_hamiltonian(&p, &v)).re / n as f64;
        assert!((energy_expectation(&s, &m.coeffs).unwrap() - exact).abs() < 1e-11, "{name}");
    }
}

fn pair_state_strategy(m: usize) -> impl Strategy<Value = PairState> {
    let amp = (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| C64::new(a, b));
    (proptest::collection::vec(amp.clone(), m), proptest::collection::vec(amp, m), 0..=m, 0..=m).prop_map(
        move |(alpha, beta, a, b)| PairState { alpha, beta, lo: a.min(b), hi: a.max(b), phase: C64::new(1.0, 0.0) },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn evaluator_matches_fock_for_random_pair_states(
        bra in pair_state_strategy(3),
        ket in pair_state_strategy(3),
    ) {
        let n = 6;
        let fock = FockRep::new(&params(n, -0.4)).unwrap();
        let vb = fock.pair_state(&bra).unwrap();
        let vk = fock.pair_state(&ket).unwrap();
        let trunc = Truncation::new(Scheme::Deg(6), n).unwrap();
        let ev = PairEvaluator::new(&bra, &ket, n);
        let got = ev.matrix_elements(trunc.keys());
        for (k, g) in trunc.keys().iter().zip(got) {
            let want = dot(&vb, &fock.apply_key(k, &vk));
            prop_assert!((g - want).norm() < 1e-11 * (1.0 + want.norm()), "{}: {} vs {}", k, g, want);
        }
    }
}
