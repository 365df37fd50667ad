use thiserror::Error;

use crate::genpoly::Violation;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("minimal polynomial must be monic with degree >= 1")]
    NonMonic,
    #[error("isolating interval contains no real root")]
    ZeroRoots,
    #[error("isolating interval contains {0} real roots")]
    MultipleRoots(usize),
    #[error("operands live over different coefficient domains")]
    FieldMismatch,
    #[error("symbolically nonzero value is indistinguishable from zero at the shadow values")]
    ShadowDegeneracy,
    #[error("precision exhausted at {bits} bits")]
    PrecisionExhausted { bits: u32 },
    #[error("integer part is only defined for non-negative exponents")]
    NegativeExponent,
    #[error("expected {expected} arguments, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("p-adic operands use different moduli")]
    MixedModuli,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("no liftable root of the polynomial modulo {0}")]
    NoSimpleRoot(u64),
    #[error("moduli {0} and {1} are not coprime")]
    NotCoprime(String, String),
    #[error("prime {0} divides the denominator but has no p-adic images")]
    PrimeNotCovered(u64),
    #[error("precision {have} at prime {prime} is below the required {need}")]
    PrecisionTooLow { prime: u64, have: u32, need: u32 },
    #[error("element is not in the ring: {0}")]
    NotInRing(String),
    #[error("element is not free over the ring: {0}")]
    NotFree(String),
    #[error("p-adic images violate a ring relation at p = {prime}: {relation}")]
    RelationViolated { prime: u64, relation: String },
    #[error("table size {estimate} exceeds the cap of {cap}")]
    CapExceeded { estimate: usize, cap: usize },
    #[error("report has no solutions")]
    EmptyReport,
    #[error("sink failure: {0}")]
    SinkFailure(String),
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{0}`")]
    UnknownIdent(String),
    #[error("line {line}, column {col}: {msg}")]
    Spec { line: usize, col: usize, msg: String },
    #[error("not a special sequence: {}", render_violations(.0))]
    NotSpecial(Vec<Violation>),
    #[error("identity polynomial is zero")]
    ZeroIdentity,
    #[error("{need} samples required, got {got}")]
    InsufficientSamples { need: usize, got: usize },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("internal check failed: {0}")]
    Internal(String),
}

fn render_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
