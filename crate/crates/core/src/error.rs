use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("I/O error on {path}: {source}")]
    IoPath {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("mesh has no valid triangles")]
    EmptyMesh,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: face index {index} out of range (1..={vertices} or negative relative)")]
    IndexOutOfRange { line: usize, index: i64, vertices: usize },

    #[error("object '{0}' matches no manifest entry")]
    UnmatchedObject(String),

    #[error("object '{name}' matches several manifest entries: {patterns:?}")]
    AmbiguousObject { name: String, patterns: Vec<String> },

    #[error("class '{class}' is not part of the {taxonomy} taxonomy")]
    ClassUnknown { class: String, taxonomy: String },

    #[error("scene contains no objects")]
    EmptyScene,

    #[error("bad magic: not a point cloud file")]
    BadMagic,

    #[error("unsupported format version {0}")]
    BadVersion(u16),

    #[error("unknown taxonomy code {0}")]
    BadTaxonomy(u8),

    #[error("file truncated")]
    TruncatedFile,

    #[error("point {index}: intensity {value} outside [0, 1]")]
    IntensityOutOfRange { index: usize, value: f32 },

    #[error("point {index}: label {label} out of range for {classes} classes")]
    LabelOutOfRange { index: usize, label: u8, classes: usize },

    #[error("length mismatch: {left} vs {right} points")]
    LengthMismatch { left: usize, right: usize },

    #[error("taxonomy mismatch: cloud is {cloud}, expected {expected}")]
    TaxonomyMismatch { cloud: String, expected: String },

    #[error("point {0} is unlabeled")]
    UnlabeledPoint(usize),

    #[error("confusion matrix is empty")]
    EmptyMatrix,

    #[error("class counts sum to zero")]
    ZeroTotal,

    #[error("object {name} exits the room bounds")]
    OverlapError { name: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// Short stable identifier of the variant, for machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io(_) | Error::IoPath { .. } => "Io",
            Error::EmptyMesh => "EmptyMesh",
            Error::Parse { .. } => "ParseError",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::UnmatchedObject(_) => "UnmatchedObject",
            Error::AmbiguousObject { .. } => "AmbiguousObject",
            Error::ClassUnknown { .. } => "ClassUnknown",
            Error::EmptyScene => "EmptyScene",
            Error::BadMagic => "BadMagic",
            Error::BadVersion(_) => "BadVersion",
            Error::BadTaxonomy(_) => "BadTaxonomy",
            Error::TruncatedFile => "TruncatedFile",
            Error::IntensityOutOfRange { .. } => "IntensityOutOfRange",
            Error::LabelOutOfRange { .. } => "LabelOutOfRange",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::TaxonomyMismatch { .. } => "TaxonomyMismatch",
            Error::UnlabeledPoint(_) => "UnlabeledPoint",
            Error::EmptyMatrix => "EmptyMatrix",
            Error::ZeroTotal => "ZeroTotal",
            Error::OverlapError { .. } => "OverlapError",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Invariant(_) => "InternalInvariant",
        }
    }

    pub(crate) fn io_at(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
        let path = path.into();
        move |source| Error::IoPath { path, source }
    }
}
