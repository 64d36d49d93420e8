//! Exact arithmetic for binary quadratic forms of discriminant `1 - 4m` and
//! the census of genus-1 simple knots with Alexander polynomial
//! `m t^2 + (1 - 2m) t + m`.

pub mod arith;
pub mod census;
pub mod clheuristics;
pub mod classgroup;
pub mod error;
pub mod localize;
pub mod qform;
pub mod seifert;
pub mod sieve;

pub use error::{Error, Result};
pub use qform::{apply, enumerate_classes, equivalence_witness, equivalent, reduce, DiscKind, Discriminant, GLTransform, QuadForm};
pub use sieve::{FactorSieve, Factorizer, TrialDivision};
