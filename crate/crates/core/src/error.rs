use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("allocation start={start} len={len} is outside a BWP of {num_rbs} RBs")]
    RangeViolation { start: usize, len: usize, num_rbs: usize },

    #[error("RIV {riv} is not a valid encoding for a BWP of {num_rbs} RBs")]
    InvalidRiv { riv: u32, num_rbs: usize },

    #[error("invalid BWP: {0}")]
    InvalidBwp(String),

    #[error("CQI index {0} is outside 0..=15")]
    CqiOutOfRange(u8),

    #[error("MCS index {0} is outside 0..=15")]
    McsOutOfRange(u8),

    #[error("effective MCS over an empty selection")]
    EmptyMcsList,

    #[error("RB index {rb} is outside a BWP of {num_rbs} RBs")]
    RbOutOfRange { rb: usize, num_rbs: usize },

    #[error("invalid CQI table: {0}")]
    InvalidCqiTable(String),

    #[error("historical average rate must be positive, got {0}")]
    NonPositiveAvgRate(f64),

    #[error("invalid QoS profile: {0}")]
    InvalidQos(String),

    #[error("invalid scheduler input: {0}")]
    InvalidInput(String),

    #[error("exhaustive search limited to {max_ues} UEs and {max_rbs} RBs, got {ues} UEs and {rbs} RBs")]
    OracleTooLarge { ues: usize, rbs: usize, max_ues: usize, max_rbs: usize },

    #[error("slot {slot}: {algorithm} produced an invalid decision: {details}")]
    InvalidDecision { slot: u64, algorithm: String, details: String },

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
