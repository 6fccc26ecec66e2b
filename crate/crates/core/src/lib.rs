//! Bayesian inversion of completely positive unital maps between
//! finite-dimensional C*-algebras.
//!
//! Given a CPU map `F: M_n → M_m` and a state `ω = tr(ρ ·)` on `M_m`, a
//! Bayesian inverse is a CPU map `G: M_m → M_n` with
//! `ξ(G(A)·B) = ω(A·F(B))` for all `A`, `B`, where `ξ = ω∘F`. The crate
//! decides whether such a `G` exists, constructs one when it does (via a
//! positive semidefinite completion of its Choi matrix), and verifies
//! candidates — including the degenerate regime where the densities lack
//! full support. Direct sums of matrix algebras are handled blockwise,
//! which recovers ordinary Bayes' rule for stochastic matrices as the
//! all-blocks-of-size-one case.
//!
//! Module map:
//!
//! * [`linalg`] — dense complex matrices, Hermitian eigendecomposition,
//!   supports, pseudoinverses, tensor products, partial traces.
//! * [`channel`] — Kraus/Choi representations of linear maps, CP/unital
//!   checks, duals, orthogonal Kraus decompositions.
//! * [`bayes`] — the matrix-algebra engine: corner formulas, the
//!   existence test, the completion construction, and the special cases
//!   (POVM, ensemble, wave collapse, isometry).
//! * [`cstar`] — direct sums of matrix algebras, blockwise inversion, and
//!   the classical (fully commutative) reduction.
//!
//! The crate is `no_std` (with `alloc`); all IO and file formats live in
//! the companion `qbayes` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bayes;
pub mod channel;
pub mod cstar;
pub mod linalg;


pub use channel::{Channel, ChoiMatrix, LinearMap, LinearOp};

pub use linalg::{CMatrix, HermitianSpectrum, Tolerances, C64};
