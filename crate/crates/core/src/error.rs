use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown letter {0:?}")]
    UnknownLetter(String),
    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("word not filled within budget (slack {slack}, area cap {area_cap})")]
    NotFilledWithinBudget { slack: usize, area_cap: usize },
    #[error("word is not null-homotopic")]
    NotNullHomotopic,
    #[error("index out of range: {i}..{j} on a line of length {len}")]
    IndexOutOfRange { i: usize, j: usize, len: usize },
    #[error("push-forward jump bound {observed} exceeds cap {cap}")]
    JumpBoundBlowup { observed: usize, cap: usize },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("i/o failure: {0}")]
    Io(String),
}

impl Error {
    /// Budget-type failures, reported with a distinct exit status by the CLI.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            Error::BudgetExceeded(_) | Error::NotFilledWithinBudget { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
