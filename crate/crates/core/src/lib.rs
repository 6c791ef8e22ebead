//! Rotationally invariant slave-boson (RISB) embedding of the 2D Hubbard
//! model with a simulated, optionally noisy, variational impurity solver.
//!
//! The crate is organised bottom-up: [`pauli`] and [`hamiltonian`] turn
//! second-quantised operators into qubit operators, [`circuits`] and
//! [`simulator`] prepare trial states, [`estimator`] and [`vqe`] measure and
//! optimise them, [`noization`] rotates the single-particle basis towards
//! natural orbitals, and [`embedding`] closes the RISB self-consistency with
//! either [`ed`] or a variational solver from [`impurity`].

pub mod circuits;
pub mod ed;
pub mod embedding;
pub mod error;
pub mod estimator;
pub mod hamiltonian;
pub mod impurity;
pub mod linalg;
pub mod noization;
pub mod optim;
pub mod pauli;
pub mod simulator;
pub mod vqe;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
