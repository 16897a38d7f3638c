//! Functors between countable structures, built from enumeration operators
//! and oracle programs over stage-revealed atomic diagrams.
//!
//! [`transforms`] converts between the functor kinds and effective
//! interpretations. Every conversion is checked on finite prefixes.

pub mod coding;
pub mod error;
pub mod examples;
pub mod formats;
pub mod functors;
pub mod interpretations;
pub mod operators;
pub mod programs;
pub mod report;
pub mod structures;
pub mod transforms;

pub use coding::{Fact, FactCode, FactKind, Nat};
pub use error::{Error, Result};
pub use functors::{ComputableFunctor, EnumerableFunctor, Functor};
pub use interpretations::{ComputableEquiv, EffectiveInterpretation};
pub use operators::{Budget, EnumerationOperator, Oracle, OracleProgram};
pub use report::{Report, Verdict};
pub use structures::{Presentation, SharedPresentation, Signature};
