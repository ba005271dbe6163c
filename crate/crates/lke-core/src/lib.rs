//! Linear kinetic equations (LKE) for a transverse-field Ising chain with a
//! long-range `S^z S^z` perturbation, plus an exact-diagonalization oracle.
//!
//! The pipeline is: [`model`] builds the Bogoliubov data and the fermionic
//! Hamiltonian coefficients, [`operator_basis`] enumerates a truncated operator
//! basis, [`kinetics`] assembles and integrates `dX/dt = D X`, [`states`]
//! supplies initial expectation vectors and [`observables`] turns `X(t)` into
//! spin observables. [`ed_reference`] is the small-N reference.

pub mod ed_reference;
pub mod error;
pub mod fermion_algebra;
pub mod kinetics;
pub mod model;
pub mod observables;
pub mod operator_basis;
pub mod states;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

pub use fermion_algebra::{Key, Monomial, Op, Polynomial};
pub use kinetics::{HamiltonianMode, KineticSystem, TimeSeries, TrajectoryConfig};
pub use model::{BogoliubovTable, CouplingKernel, HamiltonianCoeffs, Model, ModelParams};
pub use operator_basis::{Scheme, Truncation};
pub use states::{Flavor, InitialState, PolarizedState};
