use thiserror::Error;

/// Errors produced by the solver, its configuration layer and the
/// verification harness.
#[derive(Debug, Error)]
pub enum FbpError {
    #[error("config error: {0}")]
    Config(String),

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("root finding did not converge for {rule} rule of order {order} (node {node}, last step {last_step:e})")]
    Quadrature {
        rule: &'static str,
        order: usize,
        node: usize,
        last_step: f64,
    },

    #[error("singular collocation system at step {step} (R = {radius}, t* = {t_star}, N = {degree})")]
    SingularSystem {
        step: usize,
        radius: f64,
        t_star: f64,
        degree: usize,
    },

    #[error("collocation residual {residual:e} exceeds tolerance at step {step} (condition estimate {condition:e})")]
    Residual {
        step: usize,
        residual: f64,
        condition: f64,
    },

    #[error("non-finite value in field `{field}` at step {step}")]
    NonFinite { step: usize, field: &'static str },

    #[error("snapshot parse error at byte {offset}: {message}")]
    Snapshot { offset: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl FbpError {
    /// True for failures that originate in the numerics rather than in the
    /// user-provided inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            FbpError::Quadrature { .. }
                | FbpError::SingularSystem { .. }
                | FbpError::Residual { .. }
                | FbpError::NonFinite { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, FbpError>;
