//! Simulation and verification of Hayden-Preskill decoding when the stored
//! early radiation is noisy.
//!
//! The crate is organised bottom-up:
//!
//! - [`tensor`], [`partition`], [`haar`]: dense complex tensors with
//!   pairwise contraction, subsystem bookkeeping and seeded Haar sampling.
//! - [`protocol`]: exact per-unitary decoding quantities (`P_EPR`, `F_EPR`,
//!   error factor, `eta`) evaluated by diagram contraction, plus Rényi-2
//!   entropy reports.
//! - [`analytic`]: closed-form Haar averages in exact rational arithmetic and
//!   the Weingarten moments they are built from.
//! - [`oracle`]: brute-force state-vector reference built from explicit
//!   EPR pairs, projections and purified noise.
//! - [`harness`]: Monte-Carlo ensembles, figure tables and the verification
//!   suite behind the `hpdecode` command-line tool.
//!
//! # Conventions
//!
//! A unitary `U` on `N` qubits maps the input `A ⊗ B` to the output `C ⊗ D`.
//! As a `d × d` matrix its row index is `(c, d)` and its column index is
//! `(a, b)`, with `B = B1 ⊗ B2` when part of the early radiation is erased.
//! Multi-index linearization is big-endian throughout: the first listed
//! subsystem varies slowest.

pub mod analytic;
pub mod error;
pub mod haar;
pub mod harness;
pub mod oracle;
pub mod partition;
pub mod protocol;
pub mod tensor;
pub mod tolerance;

pub use error::{Error, Result};
pub use haar::{sample_haar_unitary, HaarSampler, UnitaryMatrix};
pub use partition::Partition;
pub use protocol::{DecodingQuantities, EntropyReport, NoiseModel};
pub use tensor::{contract, epr_state, partial_trace, ComplexTensor};
