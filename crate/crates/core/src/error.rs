use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("desk-scale limit exceeded: group order {order} is above the bound {bound}")]
    GroupTooLarge { order: usize, bound: usize },

    #[error("element index {index} out of range for a group of order {order}")]
    ElementOutOfRange { index: usize, order: usize },

    #[error("subgroup does not belong to this group: {0}")]
    SubgroupMismatch(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "alphabet blow-up: reduced output alphabet has {size} columns, above the cap of {cap}{}; \
         raise the cap or pass a quantizer size to explore approximately",
        prefix.as_ref().map(|p| format!(" (after prefix \"{p}\")")).unwrap_or_default()
    )]
    AlphabetBlowUp {
        size: usize,
        cap: usize,
        prefix: Option<String>,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
