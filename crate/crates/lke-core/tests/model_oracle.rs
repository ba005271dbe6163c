mod support;

use lke_core::ed_reference::{apply_spin_hamiltonian, FockRep};
use lke_core::fermion_algebra::Op;
use lke_core::kinetics::{hamiltonian_polynomial, HamiltonianMode};
use lke_core::model::{conserving_k4, Model, ModelParams, Quartic};
use lke_core::C64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use support::max_diff;

fn params(n: usize) -> ModelParams {
    ModelParams::new(n, -1.0, -0.7, -0.8, 1.5).unwrap()
}

#[test]
fn bogoliubov_table_invariants() {
    for n in [4, 8, 30] {
        let m = Model::new(ModelParams::new(n, -0.9, 0.4, 0.3, 2.0).unwrap()).unwrap();
        let t = &m.table;
        for i in 0..n {
            let j = t.neg(i);
            assert!((t.u[i].powi(2) + t.v[i].powi(2) - 1.0).abs() < 1e-12);
            assert!((t.eps[i] - t.eps[j]).abs() < 1e-15);
            assert!((t.u[i] - t.u[j]).abs() < 1e-15 && (t.v[i] + t.v[j]).abs() < 1e-15);
            assert!(t.u[i] >= std::f64::consts::FRAC_1_SQRT_2 - 1e-15);
            assert!((t.eps[i].abs() - t.a[i].hypot(t.b[i])).abs() < 1e-15);
        }
        assert!((m.kernel.c(2, 2) - m.kernel.zeta).abs() < 1e-12);
    }
}

#[test]
fn strong_negative_field_has_negative_dispersion() {
    let m = Model::new(ModelParams::new(16, -1.0, -1.0, -0.6, 3.0).unwrap()).unwrap();
    assert!(m.table.eps.iter().all(|&e| e < 0.0));
}

#[test]
fn zeta_decreases_with_alpha() {
    let z: Vec<f64> = [0.0, 0.5, 1.0, 2.0, 4.0].iter().map(|&a| lke_core::model::zeta(20, a)).collect();
    assert!(z.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn coefficient_symmetries() {
    let mut rng = StdRng::seed_from_u64(5);
    for n in [6usize, 8, 24] {
        let m = Model::new(ModelParams::new(n, -1.0, -0.8, -0.6, 1.3).unwrap()).unwrap();
        let co = &m.coeffs;
        let t = &m.table;
        for k in 0..n {
            assert_eq!(co.a1[k].re, 0.0);
            assert!((co.a1[t.neg(k)] + co.a1[k]).norm() < 1e-12);
            assert!((co.a2[t.neg(k)] - co.a2[k]).abs() < 1e-12);
        }
        let tuples: Vec<[usize; 3]> = if n <= 8 {
            (0..n).flat_map(|a| (0..n).flat_map(move |b| (0..n).map(move |c| [a, b, c]))).collect()
        } else {
            (0..10_000).map(|_| [rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n)]).collect()
        };
        for [k1, k2, k3] in tuples {
            let k4 = conserving_k4(n, k1, k2, k3);
            let b = |l, k: [usize; 4]| co.b(l, k);
            assert!((b(Quartic::I, [k1, k2, k3, k4]) - b(Quartic::V, [k2, k1, k4, k3])).norm() < 1e-12);
            assert!((b(Quartic::II, [k1, k2, k3, k4]) - b(Quartic::IV, [k4, k3, k2, k1]).conj()).norm() < 1e-12);
            assert!((b(Quartic::III, [k1, k2, k3, k4]) - b(Quartic::III, [k4, k3, k2, k1])).norm() < 1e-12);
            // a non-conserving tuple gives zero
            let bad = (k4 + 1) % n;
            assert_eq!(b(Quartic::III, [k1, k2, k3, bad]), C64::new(0.0, 0.0));
        }
    }
}

#[test]
fn bogoliubov_operators_obey_car() {
    let fock = FockRep::new(&params(4)).unwrap();
    let n = 4;
    let id = nalgebra::DMatrix::<C64>::identity(16, 16);
    for i in 0..n {
        for j in 0..n {
            let a = fock.dense(&[Op::ann(i)]);
            let bd = fock.dense(&[Op::cre(j)]);
            let b = fock.dense(&[Op::ann(j)]);
            let anti = &a * &bd + &bd * &a - if i == j { id.clone() } else { id.clone() * C64::new(0.0, 0.0) };
            assert!(anti.iter().all(|z| z.norm() < 1e-12));
            let anti2 = &a * &b + &b * &a;
            assert!(anti2.iter().all(|z| z.norm() < 1e-12));
        }
    }
}

fn even_basis(n: usize) -> Vec<usize> {
    (0..1usize << n).filter(|s| s.count_ones() % 2 == 0).collect()
}

#[test]
fn fermionic_hamiltonian_equals_spin_hamiltonian() {
    let mut rng = StdRng::seed_from_u64(9);
    for n in [4usize, 6, 8] {
        let p = params(n);
        let m = Model::new(p).unwrap();
        let fock = FockRep::new(&p).unwrap();
        let h = hamiltonian_polynomial(&m.coeffs, HamiltonianMode::Full);
        let vectors: Vec<Vec<C64>> = if n <= 6 {
            even_basis(n)
                .into_iter()
                .map(|s| {
                    let mut e = vec![C64::new(0.0, 0.0); 1 << n];
                    e[s] = C64::new(1.0, 0.0);
                    e
                })
                .collect()
        } else {
            (0..6)
                .map(|_| {
                    (0..1usize << n)
                        .map(|s| if s.count_ones() % 2 == 0 { support::random_coeff(&mut rng) } else { C64::new(0.0, 0.0) })
                        .collect()
                })
                .collect()
        };
        for v in vectors {
            let a = fock.apply_polynomial(&h, &v);
            let b = apply_spin_hamiltonian(&p, &v);
            assert!(max_diff(&a, &b) < 1e-10, "N = {n}: {}", max_diff(&a, &b));
        }
    }
}

#[test]
fn fermionic_hamiltonian_conserves_parity() {
    let p = params(6);
    let m = Model::new(p).unwrap();
    let fock = FockRep::new(&p).unwrap();
    let h = hamiltonian_polynomial(&m.coeffs, HamiltonianMode::Full);
    for s in 0..64usize {
        let mut e = vec![C64::new(0.0, 0.0); 64];
        e[s] = C64::new(1.0, 0.0);
        let out = fock.apply_polynomial(&h, &e);
        for (r, x) in out.iter().enumerate() {
            if (r.count_ones() + s.count_ones()) % 2 == 1 {
                assert!(x.norm() < 1e-12);
            }
        }
    }
}

#[test]
fn free_part_is_diagonal_in_bogoliubov_modes() {
    let n = 6;
    let p = ModelParams::new(n, -1.0, 0.0, -0.8, 1.5).unwrap();
    let fock = FockRep::new(&p).unwrap();
    let m = Model::new(p).unwrap();
    let mut rng = StdRng::seed_from_u64(1);
    let v: Vec<C64> = (0..1usize << n)
        .map(|s| if s.count_ones() % 2 == 0 { support::random_coeff(&mut rng) } else { C64::new(0.0, 0.0) })
        .collect();
    let mut want = vec![C64::new(0.0, 0.0); v.len()];
    for k in 0..n {
        let nk = fock.apply_ops(&[Op::cre(k), Op::ann(k)], &v);
        for ((w, x), y) in want.iter_mut().zip(&nk).zip(&v) {
            *w += (x - y * 0.5) * m.table.eps[k];
        }
    }
    assert!(max_diff(&apply_spin_hamiltonian(&p, &v), &want) < 1e-10);
}
