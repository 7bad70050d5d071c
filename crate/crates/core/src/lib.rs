//! Work statistics of driven bosonic fields.
//!
//! A set of harmonic modes with slowly varying frequencies `ω_k(t)` is
//! coupled to a classical source through `G(t)(F* a + F a†)`. The library
//! computes the closed-form drive functionals of each mode, the work
//! characteristic function for number, thermal and coherent initial states,
//! the discrete work distribution, its moments and cumulants, a truncated
//! Fock-space reference propagator, and the regularised zero-point energy
//! between two plates.
//!
//! Everything is generic over [`Real`] (`f64` or `f32`); the aliases at the
//! crate root fix `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod casimir;
pub mod charfunc;
pub mod error;
pub mod interp;
pub mod moments;
pub mod oracle;
pub mod protocol;
pub mod scalar;
pub mod special;
pub mod workdist;

pub use error::{Error, Result};
pub use scalar::Real;

/// Complex number in double precision.
pub type C64 = num_complex::Complex<f64>;

pub type Switching = protocol::Switching<f64>;
pub type DriveProtocol = protocol::DriveProtocol<f64>;
pub type FrequencyProfile = protocol::FrequencyProfile<f64>;
pub type ModeSpec = protocol::ModeSpec<f64>;
pub type QuadratureConfig = protocol::QuadratureConfig<f64>;
pub type DriveFunctionals = protocol::DriveFunctionals<f64>;
pub type Table = interp::Table<f64>;
pub type InitialState = charfunc::InitialState<f64>;
pub type CharacteristicSample = charfunc::CharacteristicSample<f64>;
pub type WorkDistribution = workdist::WorkDistribution<f64>;
pub type WorkAtom = workdist::WorkAtom<f64>;
pub type MomentReport = moments::MomentReport<f64>;
pub type JarzynskiCheck = moments::JarzynskiCheck<f64>;
pub type CasimirResult = casimir::CasimirResult<f64>;
pub type CavitySpec = casimir::CavitySpec<f64>;
