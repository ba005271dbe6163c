//! Fixtures shared by the benchmarks.

use lke_core::kinetics::hamiltonian_polynomial;
use lke_core::observables::{Observable, ObservableSet};
use lke_core::states::Level;
use lke_core::{HamiltonianMode, InitialState, KineticSystem, Model, ModelParams, Polynomial, Scheme, Truncation, C64};

/// The benchmark chain: `J_x = J_z = -1`, `h = -1`, `α = 3`.
pub fn model(n: usize) -> Model {
    Model::new(ModelParams::new(n, -1.0, -1.0, -1.0, 3.0).unwrap()).unwrap()
}

pub fn truncation(scheme: &str, n: usize) -> Truncation {
    Truncation::new(scheme.parse::<Scheme>().unwrap(), n).unwrap()
}

pub fn hamiltonian(n: usize) -> Polynomial {
    hamiltonian_polynomial(&model(n).coeffs, HamiltonianMode::Full)
}

/// A built generator with its `|ψ^1>` initial vector and the `S^z` functional.
pub struct Prepared {
    pub system: KineticSystem,
    pub x0: Vec<C64>,
    pub observables: ObservableSet,
}

pub fn prepared(scheme: &str, n: usize) -> Prepared {
    let m = model(n);
    let trunc = truncation(scheme, n);
    let system = KineticSystem::build(&m.coeffs, &trunc, HamiltonianMode::Full).unwrap();
    let x0 = InitialState::Psi(Level::Pairs(1)).initial_vector(&trunc, &m.table).unwrap();
    let observables = ObservableSet::new(&[Observable::Sz], &trunc, &m.coeffs).unwrap();
    Prepared { system, x0, observables }
}
