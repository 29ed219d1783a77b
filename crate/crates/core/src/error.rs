use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("unknown sort `{0}`")]
    UnknownSort(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("duplicate identifier `{0}`")]
    DuplicateIdentifier(String),
    #[error("sort mismatch: {0}")]
    SortMismatch(String),
    #[error("empty sort `{0}`")]
    EmptySort(String),
    #[error("function `{name}` is not total and single-valued: {detail}")]
    NotAFunction { name: String, detail: String },
    #[error("free variable problem: {0}")]
    Variable(String),
    #[error("not a permutation: {0}")]
    NotAPermutation(String),
    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("point {point} outside the domain of size {degree}")]
    PointOutOfRange { point: usize, degree: usize },
    #[error("group order {order} exceeds the configured bound {bound} (raise --max-group-order)")]
    BoundExceeded { order: u128, bound: usize },
    #[error("not a homomorphism: {0}")]
    NotAHomomorphism(String),
    #[error("not a subgroup: {0}")]
    NotASubgroup(String),
    #[error("not invariant under automorphisms: {0}")]
    NotInvariant(String),
    #[error("not an equivalence relation: {0}")]
    NotAnEquivalence(String),
    #[error("arity {arity} exceeds kmax = {kmax}")]
    ArityTooLarge { arity: usize, kmax: usize },
    #[error("not an interpretation: {0}")]
    NotAnInterpretation(String),
    #[error("not an embedding: {0}")]
    NotAnEmbedding(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("lift not unique: {0}")]
    LiftNotUnique(String),
    #[error("missing lift: {0}")]
    MissingLift(String),
    #[error("malformed cover: {0}")]
    MalformedCover(String),
    #[error("C2 violated: {0}")]
    C2Violation(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
