use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid path-loss model: {0}")]
    InvalidModel(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("snapshot has {got} readings but the layout has {expected} anchors")]
    AnchorCountMismatch { expected: usize, got: usize },

    #[error("anchors are collinear")]
    CollinearAnchors,

    #[error("invalid anchor layout: {0}")]
    InvalidLayout(String),

    #[error("workspace must have positive width and height")]
    DegenerateWorkspace,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("step length {step} m exceeds the workspace side {side} m")]
    StepTooLarge { step: f64, side: f64 },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("anchor `{0}` appears in the data but not in the scenario descriptor")]
    UnknownAnchor(String),

    #[error("calibration is rank deficient: all anchor distances are equal")]
    RankDeficient,

    #[error("unknown estimator `{0}`")]
    UnknownEstimator(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("descriptor: {0}")]
    Descriptor(#[from] toml::de::Error),
}

impl Error {
    /// Short stable identifier, used for machine-readable error reporting.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidModel(_) => "invalid_model",
            Error::NonFinite(_) => "non_finite",
            Error::AnchorCountMismatch { .. } => "anchor_count_mismatch",
            Error::CollinearAnchors => "collinear_anchors",
            Error::InvalidLayout(_) => "invalid_layout",
            Error::DegenerateWorkspace => "degenerate_workspace",
            Error::InvalidConfig(_) => "invalid_config",
            Error::Empty(_) => "empty",
            Error::StepTooLarge { .. } => "step_too_large",
            Error::Schema(_) => "schema",
            Error::UnknownAnchor(_) => "unknown_anchor",
            Error::RankDeficient => "rank_deficient",
            Error::UnknownEstimator(_) => "unknown_estimator",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Descriptor(_) => "descriptor",
        }
    }
}
