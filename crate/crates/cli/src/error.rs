use std::fmt;

use possqrt_core::Error;

pub const EXIT_PARSE: u8 = 2;
pub const EXIT_NOT_POSITIVE: u8 = 3;
pub const EXIT_NO_CONVERGENCE: u8 = 4;
pub const EXIT_PROPERTY: u8 = 5;

/// A failure with its process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn parse(message: impl Into<String>) -> Self {
        Self { code: EXIT_PARSE, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }

    pub fn property(message: impl Into<String>) -> Self {
        Self { code: EXIT_PROPERTY, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NonFinite { .. }
            | Error::NotSquare { .. }
            | Error::Empty
            | Error::DimensionMismatch { .. }
            | Error::BadNodeCount(_)
            | Error::InvalidArgument(_) => EXIT_PARSE,
            Error::AsymmetryTooLarge { .. }
            | Error::NotPositive(_)
            | Error::NegativeSpectrum { .. }
            | Error::SingularShift { .. }
            | Error::InvalidBounds { .. }
            | Error::InvalidContour { .. }
            | Error::OutsideDomain(_) => EXIT_NOT_POSITIVE,
            Error::ConvergenceFailure { .. } | Error::NoConvergence { .. } => EXIT_NO_CONVERGENCE,
            Error::NonRealForm { .. } | Error::AsymmetricResult { .. } | Error::PropertyViolation(_) => {
                EXIT_PROPERTY
            }
        };
        Self { code, message: e.to_string() }
    }
}
