//! Determinate sublattices of the lattice of subspaces of C^n.
//!
//! For a pure state `e` and a preferred observable `R`, the crate constructs
//! the sublattice of subspaces `p` with `e_{r_i} ≤ p` or `e_{r_i} ≤ p⊥` for
//! every nonzero projection `e_{r_i}` of `e` onto an eigenspace of `R`,
//! enumerates 2-valued homomorphisms of finite sublattices, recovers a
//! probability measure over those homomorphisms reproducing the Born
//! probabilities, and runs scenario checks of the characterization.

pub mod cli;
pub mod determinate;
pub mod error;
pub mod linalg;
pub mod ortholattice;
pub mod probability;
pub mod sampling;
pub mod subspace;
pub mod verifier;

pub use determinate::{Decomposition, Observable, State, StateProjections};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, Tolerance};
pub use ortholattice::{FiniteOrtholattice, TwoValuedHom};
pub use subspace::{Ray, Subspace};
