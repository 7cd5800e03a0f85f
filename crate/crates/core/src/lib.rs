//! Entanglement measures and Bell-inequality violations for three-qubit pure states.
//!
//! - [`states`]: pure states, the five-parameter canonical family and the
//!   three-spinor subfamily, reduced density matrices, seeded samplers.
//! - [`measures`]: concurrences, the tangle τ and the monotone σ.
//! - [`bell`]: correlation tensor, Mermin and Svetlichny combinations and
//!   their maximization over measurement directions.
//! - [`bounds`]: the empirical bound relations between (τ, σ) and the maximal
//!   violations, plus the Scarani–Gisin curve.
//! - [`sweep`]: family sweeps, CSV records and aggregate bound reports.

pub mod bell;
pub mod bounds;
pub mod error;
pub mod measures;
pub mod nelder_mead;
pub mod states;
pub mod sweep;

pub use error::{Error, Result};
