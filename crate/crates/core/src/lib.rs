//! Kirkwood-Dirac quasiprobability toolkit.
//!
//! Groups are finite abelian groups given as products of cyclic factors,
//! plus band-limited operators on the circle. The crate computes KD and
//! related phase-space representations, enumerates the KD-positive pure
//! states, and decides membership in the classical fragment (KD-real
//! observables, KD-positive states, their span and convex hull).

pub mod circle;
pub mod cli;
pub mod classify;
pub mod config;
pub mod error;
pub mod fragment;
pub mod group;
pub mod harmonic;
pub mod json;
pub mod kd;
pub mod operator;
pub mod phase_space;
pub mod random;
pub mod verify;
pub mod weyl_heisenberg;

pub use config::Tolerances;
pub use error::{Error, Result};
pub use group::{parse_group, Character, Element, FiniteAbelianGroup, Subgroup};
pub use harmonic::{DualFunction, GFunction};
pub use operator::Operator;
pub use phase_space::PhaseSpaceFunction;
pub use weyl_heisenberg::WHElement;
