use alloc::string::String;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("2-density is undefined for a pattern with {0} edges")]
    UndefinedDensity(usize),
    #[error("inapplicable: {0}")]
    Inapplicable(String),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
    #[error("instance exceeds size guard: {0}")]
    TooLarge(String),
    #[error("argument out of range: {0}")]
    Domain(String),
    #[error("Q has no centre vertices")]
    MissingCentres,
    #[error("invalid Q: {0}")]
    InvalidQ(String),
    #[error("construction infeasible: {0}")]
    Infeasible(String),
    #[error("cut does not belong to the cut family")]
    NotInFamily,
}

pub type Result<T> = core::result::Result<T, Error>;
