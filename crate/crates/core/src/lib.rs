//! Exact laboratory for one-sided matching (house allocation) mechanisms.
//!
//! Every probability, valuation and welfare figure is an exact rational.
//! The crate computes allocation matrices for Probabilistic Serial, Random
//! Priority and related mechanisms, searches and certifies pure Nash
//! equilibria, runs no-regret learners toward coarse correlated equilibria,
//! and generates the adversarial instance families behind the known Price of
//! Anarchy and Price of Stability lower bounds.

pub mod constructions;
pub mod equilibrium;
pub mod format;
pub mod matching;
pub mod mechanisms;
pub mod profile;
pub mod properties;
pub mod rational;
pub mod welfare;

mod error;
mod perm;

pub use error::{Error, Result};
pub use profile::{
    induced_order, validate_profile, AssignmentMatrix, Matching, Normalization, PreferenceOrder,
    PreferenceProfile, Provenance, ValidationFailure, ValuationProfile,
};
pub use rational::Rational;
