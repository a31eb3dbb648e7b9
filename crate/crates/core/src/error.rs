use thiserror::Error;

/// Errors raised while building circuits, simulating them, or validating
/// model parameters.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("qubit {qubit} out of range for a {n_qubits}-qubit circuit")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("classical bit {bit} out of range for {n_bits} classical bits")]
    BitOutOfRange { bit: usize, n_bits: usize },
    #[error("qubit {0} is used both as control and target")]
    ControlIsTarget(usize),
    #[error("qubit {0} appears more than once in the control list")]
    DuplicateControl(usize),
    #[error("rotation angle {0} is not finite")]
    NonFiniteAngle(f64),
    #[error("state norm is {norm}, expected 1")]
    NotNormalized { norm: f64 },
    #[error("amplitude vector length {0} is not a power of two")]
    BadLength(usize),
    #[error("unknown register `{0}`")]
    UnknownRegister(String),
    #[error("register `{0}` already exists")]
    DuplicateRegister(String),
    #[error("shots must be at least 1")]
    ZeroShots,
    #[error("operation is not unitary: {0}")]
    NonUnitary(&'static str),
    #[error("value {value} is not representable: {reason}")]
    Overflow { value: f64, reason: String },
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },
    #[error("qubit budget exceeded: {needed} qubits requested, limit is {limit}")]
    QubitBudget { needed: usize, limit: usize },
    #[error("histogram has {got} bins but the reference distribution has {expected}")]
    BinMismatch { got: usize, expected: usize },
    #[error("covariance matrix is not positive definite")]
    SingularCovariance,
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::QubitOutOfRange { .. } => "qubit_out_of_range",
            Error::BitOutOfRange { .. } => "bit_out_of_range",
            Error::ControlIsTarget(_) => "control_is_target",
            Error::DuplicateControl(_) => "duplicate_control",
            Error::NonFiniteAngle(_) => "non_finite_angle",
            Error::NotNormalized { .. } => "not_normalized",
            Error::BadLength(_) => "bad_length",
            Error::UnknownRegister(_) => "unknown_register",
            Error::DuplicateRegister(_) => "duplicate_register",
            Error::ZeroShots => "zero_shots",
            Error::NonUnitary(_) => "non_unitary",
            Error::Overflow { .. } => "overflow",
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::QubitBudget { .. } => "qubit_budget",
            Error::BinMismatch { .. } => "bin_mismatch",
            Error::SingularCovariance => "singular_covariance",
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
