use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid bundle spec: {0}")]
    InvalidSpec(String),

    #[error("not a bundle: s-t paths {first:?} (length {first_len}) and {second:?} (length {second_len}) differ")]
    NotABundle {
        first: Vec<usize>,
        first_len: usize,
        second: Vec<usize>,
        second_len: usize,
    },

    #[error("not a bundle: {0}")]
    NotABundleShape(String),

    #[error("graph is disconnected: vertex {to} unreachable from vertex {from}")]
    Disconnected { from: usize, to: usize },

    #[error("coding applies to diamonds only, got family {0}")]
    NotDiamond(String),

    #[error("vertex {code} is not maximal at depth {depth}")]
    NotMaximal { code: String, depth: u32 },

    #[error("vertex {code} lies outside part {part}")]
    OutsidePart { code: String, part: String },

    #[error("invalid vertex code: {0}")]
    InvalidCode(String),

    #[error("graphs are not isomorphic: {0}")]
    NotIsomorphic(String),

    #[error("vertex {0} has no image")]
    MissingImage(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("good tree is missing node {0}")]
    MissingTreeNode(String),

    #[error("cylinders overlap: {0}")]
    Overlap(String),

    #[error("base embedding not certified: {0}")]
    Uncertified(String),

    #[error("dependency union of {bits} bits exceeds the {limit}-bit guard; reduce the depth")]
    TooManyBits { bits: usize, limit: usize },

    #[error("cannot identify the depth-{0} vertex subset")]
    SubsetNotIdentifiable(u32),

    #[error("modulus table is not monotone: {0}")]
    NonMonotoneModulus(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag used by the command-line diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidSpec(_) => "invalid_spec",
            Error::NotABundle { .. } | Error::NotABundleShape(_) => "not_a_bundle",
            Error::Disconnected { .. } => "disconnected",
            Error::NotDiamond(_) => "not_diamond",
            Error::NotMaximal { .. } => "not_maximal",
            Error::OutsidePart { .. } => "outside_part",
            Error::InvalidCode(_) => "invalid_code",
            Error::NotIsomorphic(_) => "not_isomorphic",
            Error::MissingImage(_) => "missing_image",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::MissingTreeNode(_) => "missing_tree_node",
            Error::Overlap(_) => "overlap",
            Error::Uncertified(_) => "uncertified",
            Error::TooManyBits { .. } => "too_many_bits",
            Error::SubsetNotIdentifiable(_) => "subset_not_identifiable",
            Error::NonMonotoneModulus(_) => "non_monotone_modulus",
            Error::Parse(_) => "parse",
            Error::Json(_) => "json",
            Error::Io(_) => "io",
        }
    }
}
