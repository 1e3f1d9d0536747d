use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A value broke a data-model invariant.
    Validation(String),
    /// No bipartition of `job` keeps both sides within `q_target` qubits.
    InfeasibleCut { job: String, q_target: u32 },
    /// Exact integer arithmetic left the representable range.
    Overflow(String),
    /// The job does not fit on the device it was paired with.
    Capacity { job: String, device: String },
    /// A job fits no device of the fleet, even after cutting.
    Unschedulable { job: String },
    /// Division by a zero runtime.
    Domain(String),
    /// An exhaustive oracle was asked for an instance above its size limit.
    OracleLimit(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Validation(msg) => write!(f, "validation error: {msg}"),
            Error::InfeasibleCut { job, q_target } => write!(
                f,
                "job {job}: no bipartition keeps both fragments within {q_target} qubits"
            ),
            Error::Overflow(msg) => write!(f, "overflow: {msg}"),
            Error::Capacity { job, device } => {
                write!(f, "job {job} is too wide for device {device}")
            }
            Error::Unschedulable { job } => write!(f, "job {job} fits no device in the fleet"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::OracleLimit(msg) => write!(f, "oracle refused instance: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
