//! Two-mode Bose-Hubbard double well (biased Lipkin-Meshkov-Glick model).
//!
//! Exact diagonalization, time evolution, closed-form tunneling estimates,
//! entanglement measures and parameter sweeps.

pub mod analytic;
pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod figures;
pub mod fixtures;
pub mod logscalar;
pub mod model;
pub mod output;
pub mod scan;
pub mod spectrum;
pub mod validation;

pub use error::{Error, Result};
pub use logscalar::{LogScalar, Sign};
pub use model::{build_hamiltonian, initial_state_all_right, EnergyUnit, ModelParams, StateVector, SymTridiagonal};
pub use spectrum::{eigendecompose, splitting_top_pair, SpectralDecomposition};
