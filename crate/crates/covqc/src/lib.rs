//! Numerics for low-rank irreducibly SU(2)-covariant quantum channels.
//!
//! The crate builds the Clebsch-Gordan channels `Phi^{k->l}_m` obtained by
//! coupling an input spin to a fixed environment spin, and the three
//! one-parameter and two-parameter families mixing them:
//!
//! * `Cov1L`: qubit-to-(l+1)-level mixtures `(1-p) Phi^{1->l}_{l-1} + p Phi^{1->l}_{l+1}`,
//! * `CovL1`: the adjoint family going back down to a qubit,
//! * `Cov22`: the qutrit-to-qutrit mixtures of `Phi^{2->2}_{0,2,4}`.
//!
//! On top of the channel constructions it provides
//!
//! * PPT / entanglement-breaking region tests with closed-form spectra
//!   ([`ppt`]), including constructive separability certificates built from
//!   Haar twirl averages,
//! * minimum output entropy, Holevo quantity and single-letter coherent
//!   information scans, plus the two-copy probe used to exhibit an almost
//!   superactivated channel pair ([`capacity`]),
//! * non-degradability witnesses and positivity / decomposability region
//!   certificates ([`witnesses`]),
//! * the acceptance checks wiring all of the above to their expected values
//!   ([`verify`]).
//!
//! Entropies are natural-log throughout. All randomized routines take an
//! explicit seed and are deterministic for a fixed seed.
//!
//! # Quick start
//!
//! ```
//! use covqc::channel::{FamilyParams, QuantumChannel};
//! use covqc::ppt;
//!
//! // The qubit-to-qutrit mixture at p = 1/3 sits exactly on the PPT boundary.
//! let params = FamilyParams::Cov1L { l: 2, p: 1.0 / 3.0 };
//! let report = ppt::ppt_report(&params).unwrap();
//! assert!(report.margin.abs() < 1e-10);
//! assert!(report.closed_form_member);
//! ```

#![forbid(unsafe_code)]

pub mod capacity;
pub mod channel;
pub mod linalg;
pub mod ppt;
pub mod su2;
pub mod tol;
pub mod verify;
pub mod witnesses;

/// Errors shared by all modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:.3e})")]
    NotPsd { min_eig: f64 },

    #[error("trace is {trace:.17} but a unit trace was required")]
    InvalidTrace { trace: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("inadmissible coupling (l={l}, m={m}, k={k}): need |l-m| <= k <= l+m and k = l+m (mod 2)")]
    InadmissibleTriple { l: usize, m: usize, k: usize },

    #[error("Kraus operators are not trace preserving (defect {defect:.3e})")]
    NotTracePreserving { defect: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;
