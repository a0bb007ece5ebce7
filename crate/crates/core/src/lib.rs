//! Exact Krawtchouk polynomials and their uniform asymptotic expansions in
//! Hermite polynomials, with the tooling to check every residual order
//! numerically.

pub mod arith;
pub mod diffcalc;
pub mod edgeworth;
pub mod error;
pub mod expansion;
pub mod orthopoly;
pub mod stirling;
pub mod verify;

pub use error::{Error, Result};

use serde::{Deserialize, Serialize};

/// Selects between a closed form as originally displayed and the version
/// that agrees with direct computation, for the few displays where the two
/// differ.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    Printed,
    #[default]
    Corrected,
}
