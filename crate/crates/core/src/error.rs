use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The bordered matrix is numerically singular, which happens exactly when
    /// the eigenvalue at the expansion point is repeated or defective.
    #[error("non-simple eigenvalue at expansion point (defective or repeated A(mu0)): {detail}")]
    NonSimpleEigenvalue { detail: String },

    #[error("dense eigensolver did not converge after {iterations} iterations (n = {n})")]
    EigenNoConvergence { n: usize, iterations: usize },

    #[error("derivative matrix of order {order} unavailable: {reason}")]
    MissingDerivative { order: usize, reason: String },

    #[error("Jacobian singular (pivot {pivot:e})")]
    SingularJacobian { pivot: f64 },

    #[error("Newton iteration did not converge in {iterations} steps (residual {residual:e})")]
    NewtonNoConvergence {
        iterations: usize,
        residual: f64,
        best: Box<crate::EigenPairSeries>,
    },

    #[error("degenerate evaluation: |v(mu)| = {norm:e} at mu = {mu}")]
    DegenerateEvaluation { mu: f64, norm: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite matrix sample at quadrature node {node} (mu = {mu})")]
    NonFiniteSample { node: usize, mu: f64 },

    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier '{name}' at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input or IO).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonSimpleEigenvalue { .. }
                | Error::EigenNoConvergence { .. }
                | Error::SingularJacobian { .. }
                | Error::NewtonNoConvergence { .. }
                | Error::DegenerateEvaluation { .. }
                | Error::Domain(_)
                | Error::NonFiniteSample { .. }
                | Error::MissingDerivative { .. }
        )
    }
}
