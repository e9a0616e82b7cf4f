use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument outside the domain of the model.
    #[error("domain error: {0}")]
    Domain(String),

    /// Raw enumeration of request configurations would exceed the budget.
    #[error("enumeration needs {states:.3e} states but the budget is {budget:.3e}; use the approximation")]
    EnumerationBudget { states: f64, budget: f64 },

    #[error("quadrature on [{lo}, {hi}] did not reach tolerance {tol:e} (estimate error {err:e})")]
    Quadrature { lo: f64, hi: f64, tol: f64, err: f64 },
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
