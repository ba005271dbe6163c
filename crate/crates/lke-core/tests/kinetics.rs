mod support;

use lke_core::ed_reference::{ed_evolve, normalize, time_grid, FockRep};
use lke_core::fermion_algebra::Key;
use lke_core::kinetics::{GeneratorOptions, Integrator};
use lke_core::observables::{Observable, ObservableSet};
use lke_core::{
    HamiltonianMode, InitialState, KineticSystem, Model, ModelParams, Scheme, TrajectoryConfig, Truncation, C64,
};
use rustc_hash::FxHashMap;

fn dense_rows(sys: &KineticSystem) -> FxHashMap<(usize, usize), C64> {
    let mut m = FxHashMap::default();
    for i in 0..sys.dim() {
        for (j, c) in sys.d.row(i) {
            m.insert((i, j), c);
        }
    }
    m
}

#[test]
fn quadratic_truncation_is_closed_under_free_dynamics() {
    let m = Model::new(ModelParams::new(16, -1.0, -0.8, -0.6, 2.0).unwrap()).unwrap();
    let trunc = Truncation::new(Scheme::Deg(2), 16).unwrap();
    let opts = GeneratorOptions { audit: true, ..Default::default() };
    let sys = KineticSystem::build_with(&m.coeffs, &trunc, HamiltonianMode::QuadraticOnly, opts).unwrap();
    assert_eq!(sys.dropped.terms, 0);
}

#[test]
fn pair_amplitudes_rotate_at_twice_the_dispersion() {
    let n = 10;
    let m = Model::new(ModelParams::new(n, -1.0, 0.0, -0.7, 2.0).unwrap()).unwrap();
    let trunc = Truncation::new(Scheme::Deg(2), n).unwrap();
    let sys = KineticSystem::build(&m.coeffs, &trunc, HamiltonianMode::Full).unwrap();
    let d = dense_rows(&sys);
    for k in m.table.positive() {
        let (kp, kn) = (k as u16, m.table.neg(k) as u16);
        let (lo, hi) = (kp.min(kn), kp.max(kn));
        let ann = trunc.position(&Key::from_sorted(&[], &[lo, hi])).unwrap();
        let cre = trunc.position(&Key::from_sorted(&[lo, hi], &[])).unwrap();
        let num = trunc.position(&Key::from_sorted(&[kp], &[kp])).unwrap();
        let e = m.table.eps[k];
        assert!((d[&(ann, ann)] - C64::new(0.0, -2.0 * e)).norm() < 1e-12);
        assert!((d[&(cre, cre)] - C64::new(0.0, 2.0 * e)).norm() < 1e-12);
        assert!(!d.contains_key(&(num, num)));
        assert_eq!(sys.d.row(ann).count(), 1);
    }
}

#[test]
fn identity_row_is_empty() {
    let n = 8;
    let m = Model::new(ModelParams::new(n, -1.0, -0.7, -0.5, 1.0).unwrap()).unwrap();
    let trunc = Truncation::new(Scheme::Deg(4), n).unwrap();
    let sys = KineticSystem::build(&m.coeffs, &trunc, HamiltonianMode::Full).unwrap();
    assert_eq!(sys.d.row(0).count(), 0);
}

#[test]
fn conjugate_rows_are_covariant() {
    let n = 8;
    let m = Model::new(ModelParams::new(n, -1.0, -0.7, -0.5, 1.0).unwrap()).unwrap();
    for scheme in [Scheme::Deg(4), Scheme::DegP(6, 3)] {
        let trunc = Truncation::new(scheme, n).unwrap();
        let sys = KineticSystem::build(&m.coeffs, &trunc, HamiltonianMode::Full).unwrap();
        let d = dense_rows(&sys);
        for (&(i, j), &c) in &d {
            let (ci, si) = trunc.conj_index(i);
            let (cj, sj) = trunc.conj_index(j);
            let mirror = d.get(&(ci, cj)).copied().unwrap_or_default();
            assert!((mirror - c.conj() * (si * sj)).norm() < 1e-12, "{scheme}: ({i}, {j})");
        }
    }
}

#[test]
fn audit_mode_gives_the_same_generator() {
    let n = 8;
    let m = Model::new(ModelParams::new(n, -1.0, -0.7, -0.5, 1.0).unwrap()).unwrap();
    for scheme in [Scheme::Deg(2), Scheme::P(2), Scheme::Deg(4)] {
        let trunc = Truncation::new(scheme, n).unwrap();
        let fast = KineticSystem::build(&m.coeffs, &trunc, HamiltonianMode::Full).unwrap();
        let opts = GeneratorOptions { audit: true, ..Default::default() };
        let full = KineticSystem::build_with(&m.coeffs, &trunc, HamiltonianMode::Full, opts).unwrap();
        let (a, b) = (dense_rows(&fast), dense_rows(&full));
        assert_eq!(a.len(), b.len(), "{scheme}");
        for (k, v) in &a {
            assert!((b[k] - v).norm() < 1e-13);
        }
        assert!(full.dropped.terms >= fast.dropped.terms);
        if scheme == Scheme::Deg(2) {
            assert!(full.dropped.terms > 0);
        }
    }
}

#[test]
fn builds_and_trajectories_are_deterministic() {
    let n = 12;
    let m = Model::new(ModelParams::new(n, -1.0, -1.0, -0.8, 3.0).unwrap()).unwrap();
    let trunc = Truncation::new(Scheme::Deg(4), n).unwrap();
    let a = KineticSystem::build(&m.coeffs, &trunc, HamiltonianMode::Full).unwrap();
    let b = KineticSystem::build(&m.coeffs, &trunc, HamiltonianMode::Full).unwrap();
    assert_eq!(a.d.row_ptr, b.d.row_ptr);
    assert_eq!(a.d.cols, b.d.cols);
    assert_eq!(a.d.vals, b.d.vals);
    let x0 = InitialState::Psi(lke_core::states::Level::Pairs(1)).initial_vector(&trunc, &m.table).unwrap();
    let obs = ObservableSet::new(&[Observable::Sz], &trunc, &m.coeffs).unwrap();
    let cfg = TrajectoryConfig::new(2.0, 0.01, 10);
    let f = |x: &[C64]| obs.eval(x);
    let r1 = a.evolve(&x0, &cfg, &f, &obs.names()).unwrap();
    let r2 = a.evolve(&x0, &cfg, &f, &obs.names()).unwrap();
    assert_eq!(r1.series.values, r2.series.values);
}

#[test]
fn free_dynamics_match_exact_diagonalization() {
    let n = 8;
    let p = ModelParams::new(n, -1.0, 0.0, -0.8, 2.0).unwrap();
    let m = Model::new(p).unwrap();
    let fock = FockRep::new(&p).unwrap();
    let list = [Observable::Sz, Observable::Cx1];
    for name in ["psi:1", "chi:2", "superposition:0.6,0,0,0.8:1"] {
        let state: InitialState = name.parse().unwrap();
        let trunc = Truncation::new(Scheme::Deg(2), n).unwrap();
        let sys = KineticSystem::build(&m.coeffs, &trunc, HamiltonianMode::Full).unwrap();
        let obs = ObservableSet::new(&list, &trunc, &m.coeffs).unwrap();
        let x0 = state.initial_vector(&trunc, &m.table).unwrap();
        let mut cfg = TrajectoryConfig::new(5.0, 0.01, 10);
        cfg.method = Integrator::Rk4WithHalvingCheck;
        let lke = sys.evolve(&x0, &cfg, &|x| obs.eval(x), &obs.names()).unwrap();
        assert!(lke.halving_residual.unwrap() < 1e-8);

        let mut psi = vec![C64::new(0.0, 0.0); fock.dim()];
        for (w, ps) in state.components(&m.table).unwrap() {
            for (o, x) in psi.iter_mut().zip(fock.pair_state(&ps).unwrap()) {
                *o += w * x;
            }
        }
        normalize(&mut psi);
        let ed = ed_evolve(&p, &psi, &list, &time_grid(5.0, 0.1)).unwrap();
        lke.series.check_grid(&ed).unwrap();
        for (a, b) in lke.series.values.iter().zip(&ed.values) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-8, "{name}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn oversized_budget_is_infeasible() {
    let n = 16;
    let m = Model::new(ModelParams::new(n, -1.0, -0.7, -0.5, 1.0).unwrap()).unwrap();
    let trunc = Truncation::new(Scheme::Deg(4), n).unwrap();
    let opts = GeneratorOptions { memory_budget: 1024, ..Default::default() };
    let err = KineticSystem::build_with(&m.coeffs, &trunc, HamiltonianMode::Full, opts).unwrap_err();
    assert!(matches!(err, lke_core::Error::Infeasible(_)));
}
