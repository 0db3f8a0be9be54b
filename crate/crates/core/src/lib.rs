//! Numerics for negative binomial states `|eta, M>` of a single bosonic mode.
//!
//! States live in a truncated Fock space whose bound is chosen from the
//! analytic tail mass. On top of that the crate provides the SU(1,1)
//! generators and the displacement-operator construction, closed-form and
//! brute-force photon statistics, quadrature squeezing scans, Q, Wigner and
//! s-parametrized distributions on phase-space grids, and the two generation
//! schemes by time evolution.
//!
//! Grid evaluation and parameter scans run on rayon when the `parallel`
//! feature is enabled; [`par::Exec`] selects the mode per call.

pub mod dynamics;
pub mod error;
pub mod expm;
pub mod fock;
pub mod math;
pub mod par;
pub mod phasespace;
pub mod squeeze;
pub mod states;
pub mod stats;
pub mod su11;
pub mod verify;

pub use error::{Error, Result};
pub use fock::{FockVector, TruncationPolicy};
pub use par::Exec;
pub use states::{NbsParams, PairBasisVector};
