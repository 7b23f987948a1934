use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("price sequence is empty")]
    EmptySequence,

    #[error("price {price} on day {day} is outside the corridor [{lower}, {upper}]")]
    PriceOutOfRange {
        day: usize,
        price: f64,
        lower: f64,
        upper: f64,
    },

    #[error("invalid bounds: need 0 < m <= M, got m={lower}, M={upper}")]
    InvalidBounds { lower: f64, upper: f64 },

    #[error("algorithm profit {alg} exceeds optimal profit {opt}; outcomes are inconsistent")]
    InconsistentOutcomes { alg: f64, opt: f64 },

    #[error("reservation price must be positive and finite, got {0}")]
    NonpositiveThreshold(f64),

    #[error("advice budget b={b} exceeds the cap of {cap} bits (2^b policies must stay simulable)")]
    BitBudgetTooLarge { b: u32, cap: u32 },

    #[error("advice tape exhausted: needed {needed} more bit(s), {available} left")]
    TapeExhausted { needed: usize, available: usize },

    #[error("malformed advice tape: {0}")]
    MalformedTape(String),

    #[error("day {day} is outside [1, {n}]")]
    DayOutOfRange { day: usize, n: usize },

    #[error("self-delimiting day encoding needs a horizon of at least 2 days, got n={0}")]
    SelfDelimitingUnsupported(usize),

    #[error("fluctuation ratio {0} is not a power of two >= 2; strict dyadic mode rejects it")]
    NonDyadicRatio(f64),

    #[error("bounds are degenerate (m = M = {0}); no staircase exists")]
    DegenerateBounds(f64),

    #[error("no pigeonhole witness: {policies} policies cover all {n} staircase members")]
    NoWitness { policies: usize, n: usize },

    #[error("sequence budget n={n_budget} too small for the adaptive game; need at least {needed}")]
    BudgetTooSmall { n_budget: usize, needed: usize },

    #[error("expected {expected} policies, got {got}")]
    PolicyCountMismatch { expected: usize, got: usize },

    #[error("crossover undefined for fluctuation {0}: it needs M/m > 4")]
    CrossoverUndefined(f64),

    #[error("fluctuation ratio must be >= 1, got {0}")]
    InvalidFluctuation(f64),

    #[error("grid step must be positive and finite, got {0}")]
    InvalidGridStep(f64),

    #[error("malformed document: {0}")]
    MalformedDocument(String),
}
