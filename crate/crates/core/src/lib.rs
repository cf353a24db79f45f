//! Exact-diagonalization toolkit for quantum state transfer through spin
//! chains that host many-body scars.
//!
//! The crate builds three Hamiltonian families on open spin-1/2 and spin-1
//! chains:
//!
//! - the integrable transfer Hamiltonian with engineered couplings
//!   `λ_n = λ√(n(N−n))`,
//! - a *thermal* variant with generic random local interactions,
//! - a *scarred* variant where the interactions are sandwiched between local
//!   projectors that annihilate the transfer subspace.
//!
//! On top of these it provides time evolution and transfer fidelity
//! ([`dynamics`]), the effective spin-`(N−1)/2` algebra and scar-subspace
//! checks ([`scars`]), level statistics and eigenstate entanglement
//! ([`diagnostics`]), and perturbation-robustness scans ([`perturbations`]).
//!
//! Sites are labelled `1..=N` in every public API. Basis states use a
//! positional digit encoding with site 1 as the most significant digit; for
//! spin-1/2 digit 0 is `|0⟩` (Z = +1), for spin-1 the digits 0, 1, 2 are
//! `|−⟩`, `|0⟩`, `|+⟩`.
//!
//! ```
//! use scarchain::{dynamics, hilbert::ChainConfig, models};
//!
//! let cfg = ChainConfig::spin_half(4, 0.0, 1.0, 7).unwrap();
//! let h = models::build_h_pst(&cfg).unwrap();
//! let eig = dynamics::diagonalize(&h).unwrap();
//! let job = dynamics::TransferJob::at_transfer_times(&cfg, 1);
//! let trace = dynamics::transfer_fidelity(&eig, &job, &cfg).unwrap();
//! assert!((trace.fidelity[0] - 1.0).abs() < 1e-10);
//! ```

pub mod diagnostics;
pub mod dynamics;
mod error;
pub mod hilbert;
mod linalg;
pub mod models;
pub mod perturbations;
pub mod scars;

pub use error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;

/// Dense complex matrix type (column-major, from `faer`).
pub type CMat = faer::Mat<C64>;
