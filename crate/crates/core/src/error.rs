use thiserror::Error;

/// Failures raised by the numerical kernels.
///
/// Every variant records the module it originated in so that batch drivers can
/// report provenance without inspecting message text.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("[{module}] domain error: {message}")]
    Domain { module: &'static str, message: String },

    /// A documented hypothesis of the operation does not hold.
    #[error("[{module}] precondition violated: {message}")]
    Precondition { module: &'static str, message: String },

    /// An iterative method failed to converge or produced unusable output.
    #[error("[{module}] numerical failure: {message}")]
    Numerical { module: &'static str, message: String },

    /// The requested discretisation cannot deliver the requested accuracy.
    #[error("[{module}] configuration error: {message}")]
    Configuration { module: &'static str, message: String },

    /// A profile or domain could not be assembled from the supplied data.
    #[error("[{module}] construction error: {message}")]
    Construction { module: &'static str, message: String },

    /// Least-squares fitting failed.
    #[error("[{module}] fit error: {message}")]
    Fit { module: &'static str, message: String },
}

impl Error {
    pub(crate) fn domain(module: &'static str, message: impl Into<String>) -> Self {
        Error::Domain { module, message: message.into() }
    }

    pub(crate) fn precondition(module: &'static str, message: impl Into<String>) -> Self {
        Error::Precondition { module, message: message.into() }
    }

    pub(crate) fn numerical(module: &'static str, message: impl Into<String>) -> Self {
        Error::Numerical { module, message: message.into() }
    }

    pub(crate) fn configuration(module: &'static str, message: impl Into<String>) -> Self {
        Error::Configuration { module, message: message.into() }
    }

    pub(crate) fn construction(module: &'static str, message: impl Into<String>) -> Self {
        Error::Construction { module, message: message.into() }
    }

    pub(crate) fn fit(module: &'static str, message: impl Into<String>) -> Self {
        Error::Fit { module, message: message.into() }
    }

    /// Name of the module that raised the error.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Domain { module, .. }
            | Error::Precondition { module, .. }
            | Error::Numerical { module, .. }
            | Error::Configuration { module, .. }
            | Error::Construction { module, .. }
            | Error::Fit { module, .. } => module,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
