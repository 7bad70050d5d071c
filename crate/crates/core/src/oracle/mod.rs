//! Brute-force reference: truncated Fock-space propagation of the driven
//! Hamiltonian and direct two-point-measurement statistics.
//!
//! Nothing here uses the closed-form drive functionals; the propagation sees
//! only `ω(t)`, `G(t)` and `F`.

mod matrix;
mod propagate;
mod tpm;

pub use matrix::{
    analytic_propagator, build_hamiltonian, displacement_matrix, hamiltonian_tridiagonal, Matrix, Tridiagonal,
};
pub use propagate::{default_dt, expm_action, propagate, propagate_columns, OracleConfig, PropagationResult, Stepper};
pub use tpm::{initial_populations, oracle_distribution, tpm_charfunc, tpm_distribution, INITIAL_MASS_CUTOFF};
