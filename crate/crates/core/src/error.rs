use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown material `{0}`")]
    UnknownMaterial(String),

    #[error("wavelength {wavelength_nm} nm for `{material}` is outside the tabulated span [{min_nm}, {max_nm}] nm")]
    WavelengthOutOfRange { material: String, wavelength_nm: f64, min_nm: f64, max_nm: f64 },

    #[error("material table line {line}: {reason}")]
    MaterialTableParse { line: usize, reason: String },

    #[error("invalid DFG wavelengths: pump {pump_nm} nm must be longer than signal {signal_nm} nm")]
    InvalidDfg { signal_nm: f64, pump_nm: f64 },

    #[error("both channel couplings vanish; bright mode is undefined")]
    DegenerateBrightMode,

    #[error("quadrature did not converge; last estimates {previous} and {last}")]
    Convergence { previous: f64, last: f64 },

    #[error("target efficiency {0} cannot be reached by a lossless Rabi exchange")]
    Unreachable(f64),

    #[error("grid resolution: {0}")]
    Resolution(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("config `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn config(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config { path: path.into(), reason: reason.into() }
    }

    /// Broad failure class, used by the CLI to pick an exit code.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Convergence { .. } => ErrorKind::Numerical,
            Error::Io { .. } => ErrorKind::Io,
            _ => ErrorKind::Validation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Numerical,
    Io,
}
