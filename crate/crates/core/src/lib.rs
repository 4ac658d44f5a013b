//! Exact toolkit for finite k-player one-round games.
//!
//! Games carry a question distribution and, per question, a mixture over a
//! closed set of predicate atoms. On top of that model the crate provides
//! exact values by strategy enumeration, lazy parallel repetition, the
//! link-based transformations `T^i_p` with their saturation loop, structural
//! analyzers (projection, connectivity), and a verification harness that
//! checks every inequality of the decay argument exactly on small games.
//!
//! Everything is generic over the probability [`Scalar`]; the default is the
//! exact [`Rational`].

pub mod error;
pub mod experiments;
pub mod game;
pub mod generators;
pub mod io;
pub mod links;
pub mod repeated;
pub mod scalar;
pub mod strategy;
pub mod structure;
pub mod transform;
pub mod union_find;
pub mod value;

pub use error::{Error, Result};
pub use game::{Game, Label, Predicate, QuestionTuple, AnswerTuple, Tuple};
pub use repeated::RepeatedGame;
pub use scalar::{rational, Rational, Scalar};
pub use strategy::Strategy;
pub use value::{LowerBound, Solution, DEFAULT_BUDGET};

/// A game with exact rational weights.
pub type ExactGame = Game<Rational>;
/// A game with `f64` weights, for heuristic work.
pub type FloatGame = Game<f64>;
/// A game with machine-integer fractions.
pub type SmallRationalGame = Game<num_rational::Ratio<i64>>;
