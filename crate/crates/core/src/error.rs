use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A system references a variable it does not declare, or is otherwise
    /// malformed.
    #[error("structural error: {0}")]
    Structural(String),

    /// Fourier-Motzkin elimination produced more rows than allowed.
    #[error("Fourier-Motzkin row cap exceeded: {rows} rows > cap {cap}")]
    RowCap { rows: usize, cap: usize },

    #[error("strict relation not allowed in a loop body: {0}")]
    StrictBodyRow(String),

    #[error("undeclared variable `{0}`")]
    UndeclaredVariable(String),

    /// The candidate increasing function fails `c(x, x') => f(x') >= 1 + f(x)`.
    #[error("function {0} is not increasing for the loop: some transition has f(x') < 1 + f(x)")]
    NotIncreasing(String),

    /// Increasing functions are linear; an affine offset would be meaningless.
    #[error("increasing function {0} has a nonzero constant; increasing functions must be linear")]
    AffineIncreasing(String),

    #[error("could not generate a loop with a satisfiable body after {0} attempts")]
    RetryCapExhausted(usize),

    /// An invariant of the solver pipeline was violated.
    #[error("internal error: {0}")]
    Internal(String),
}
