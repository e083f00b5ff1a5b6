use thiserror::Error;

/// Errors produced by the simulation and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The evolved (unnormalized) state or density matrix has decayed below
    /// the representable range and cannot be conditioned.
    #[error("state annihilated: norm {norm:e} after J*t = {jt}")]
    StateAnnihilated { norm: f64, jt: f64 },

    /// A closed-form expression was requested outside the regime where it holds.
    #[error("{what} requires the PT-symmetric phase (gamma/J < 1), got gamma/J = {ratio}")]
    OutsideSymmetricPhase { what: &'static str, ratio: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
