//! Statistical separation, separation-based Bell inequalities and their
//! monogamy relations.
//!
//! The probability types are generic over [`scalar::Scalar`], implemented
//! for `f32`, `f64` and the exact [`Rational`]. Aliases below fix the scalar
//! for the common cases.

pub mod bell;
pub mod bounds;
pub mod chain;
pub mod error;
pub mod prob;
pub mod quantum;
pub mod scalar;
pub mod separation;

pub use bell::{BellExpression, MonogamyExpression, Preset, Sign, SignedTerm, Term, TermSum};
pub use error::{Error, Result};
pub use prob::{Scenario, Setting};
pub use scalar::{Rational, Scalar};
pub use separation::{Direction, Measurement, QuasiTerm, SeparationTerm};

/// Behavior with `f64` probabilities.
pub type Behavior = prob::Behavior<f64>;
/// Behavior with `f32` probabilities.
pub type Behavior32 = prob::Behavior<f32>;
/// Behavior with exact rational probabilities.
pub type ExactBehavior = prob::Behavior<Rational>;
/// Bound with an `f64` optimizer.
pub type BoundResult = bounds::BoundResult<f64>;
/// Bound with an exact optimizer.
pub type ExactBoundResult = bounds::BoundResult<Rational>;
