use thiserror::Error;

use crate::ksets::Presentation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),

    #[error("invalid signature: {0}")]
    InvalidSignature(String),

    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("invalid embedding: {0}")]
    InvalidEmbedding(String),

    #[error("invalid class specification: {0}")]
    InvalidClass(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("structure does not belong to the class")]
    NotInClass,

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("no admissible extension: {0}")]
    NoAdmissibleExtension(String),

    #[error("class is not a transitive free amalgamation class: {0}")]
    NonTransitiveClass(String),

    #[error("hypergraph girth {found} is below the required {required}")]
    GirthTooSmall { found: usize, required: usize },

    #[error("generation failed: {0}")]
    GenerationFailed(String),

    /// The probabilistically built witness does not work for this presentation.
    #[error("extraction failed at level {level}: no monochromatic in-part copy and no disjoint transversal copy")]
    ExtractionFailed {
        level: usize,
        presentation: Box<Presentation>,
    },

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
