//! Numerical tolerances shared by every module.
//!
//! Each level absorbs the round-off of the level below it: structural
//! identities are checked tightest, witness gaps loosest.

use serde::{Deserialize, Serialize};

/// Default upper bound on |G| for subgroup and family enumeration.
pub const DEFAULT_SUBGROUP_BOUND: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Algebraic identities (unitarity, round trips, covariance).
    pub structural: f64,
    /// Positivity and reality of KD tables, PSD checks on states.
    pub positivity: f64,
    /// Residuals of span and hull membership.
    pub membership: f64,
    /// Minimum hull gap reported as a witness.
    pub witness: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { structural: 1e-10, positivity: 1e-9, membership: 1e-8, witness: 1e-6 }
    }
}
