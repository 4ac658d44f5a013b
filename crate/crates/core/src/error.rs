use num_bigint::BigUint;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} sums to {sum}, expected 1")]
    DistributionNotNormalized { what: String, sum: String },

    #[error("arity mismatch in {what}: expected {expected} components, found {found}")]
    ArityMismatch {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("unknown label {index} for player {player} in {what}")]
    UnknownLabel {
        what: String,
        player: usize,
        index: usize,
    },

    #[error("unknown predicate index {index} in {what}")]
    UnknownPredicate { what: String, index: usize },

    #[error("negative weight in {what}")]
    NegativeWeight { what: String },

    #[error("supported question {question} has no predicate mixture")]
    MissingMix { question: String },

    #[error("a game needs at least two players, found {0}")]
    TooFewPlayers(usize),

    #[error("player {player} has an empty {what} alphabet")]
    EmptyAlphabet { player: usize, what: &'static str },

    #[error("the question distribution has empty support")]
    EmptySupport,

    #[error("player {player} out of range for a {players}-player game")]
    PlayerOutOfRange { player: usize, players: usize },

    #[error("strategy space of size {size} exceeds the budget {budget}")]
    BudgetExceeded { size: BigUint, budget: u128 },

    #[error("uniformization needs M = {m} predicate slots, above the cap {cap}")]
    MBlowup { m: BigUint, cap: u64 },

    #[error("operation requires exact arithmetic")]
    InexactScalar,

    #[error("game is not loosely connected")]
    NotLooselyConnected,

    #[error("saturation did not stabilize within {passes} passes")]
    MaxPassesExceeded { passes: usize },

    #[error("game is not uniformized: {reason}")]
    NotUniformized { reason: String },

    #[error("game is not a projection game: {reason}")]
    NotProjection { reason: String },

    #[error("link tuples disagree at pivot player {pivot}")]
    PivotMismatch { pivot: usize },

    #[error("invalid strategy: {reason}")]
    InvalidStrategy { reason: String },

    #[error("transformation sequence is empty")]
    EmptySpec,

    #[error("variable {variable} is not covered by the clause list of instance {instance}")]
    UncoveredVariable { instance: usize, variable: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
}
