use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(String, String),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("graph has a directed cycle through `{0}`")]
    Cycle(String),
    #[error("node sets overlap on `{0}`")]
    OverlappingSets(String),
    #[error("cannot marginalize: `{0}` is a common cause of `{1}` and `{2}`")]
    IllegalMarginalization(String, String, String),
    #[error("path is not {0}")]
    InvalidPath(&'static str),
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("equation for `{node}`: {reason}")]
    Equation { node: String, reason: String },
    #[error("enumeration needs {needed} worlds, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("literal over `{0}` is not a parent of the target")]
    ForeignLiteral(String),
    #[error("conjunction mentions `{0}` twice")]
    RepeatedLiteral(String),
    #[error("invalid co-cause: {0}")]
    InvalidCoCause(String),
    #[error("conjunction is not sufficient")]
    NotSufficient,
    #[error("term set is not determinative")]
    NotDeterminative,
    #[error("empty candidate set")]
    EmptyCandidates,
    #[error("`{0}` is not a parent of `{1}`")]
    NotAParent(String, String),
    #[error("premise violated: {0}")]
    Premise(String),
    #[error("conditioning event has probability zero")]
    ZeroProbability,
    #[error("constraints not satisfied after {0} rejected draws")]
    SatisfiabilityTimeout(usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
