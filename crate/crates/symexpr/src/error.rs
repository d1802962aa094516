use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` is not in chart `{1}`")]
    NotInChart(String, String),
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("cannot evaluate: {0}")]
    Evaluation(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("singular system: no nonzero pivot for unknown {column}")]
    Singular { column: usize },
    #[error("zero test undecided for the pivot candidate of unknown {column}")]
    UndecidedPivot { column: usize },
    #[error("inconsistent system: equation {equation} leaves residual {residual}")]
    Inconsistent { equation: usize, residual: String },
    #[error("equation {equation} is not linear in unknown {unknown}")]
    NonLinear { equation: usize, unknown: String },
    #[error("shape mismatch: {0}")]
    Shape(String),
}
