use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("ITA is undefined for b* = 0 with the arctan variant")]
    DegenerateAngle,
    #[error("histogram has fewer than two populated levels")]
    DegenerateHistogram,
    #[error("histogram has no counts")]
    EmptyHistogram,
    #[error("invalid skin type thresholds: {0}")]
    InvalidThresholds(&'static str),
    #[error("skin type {0} is outside 1..=6")]
    InvalidSkinType(u8),
    #[error("invalid GHT parameters: {0}")]
    InvalidGhtParams(&'static str),
    #[error("a {width}x{height} image needs {expected} pixels, got {actual}")]
    InvalidDimensions {
        width: usize,
        height: usize,
        expected: usize,
        actual: usize,
    },
    #[error("mask is {mask_width}x{mask_height} but image is {image_width}x{image_height}")]
    DimensionMismatch {
        mask_width: usize,
        mask_height: usize,
        image_width: usize,
        image_height: usize,
    },
    #[error("standardization side {0} is below the minimum of 40")]
    InvalidSide(usize),
    #[error("{0} channel mean is zero; grey-world gains are undefined")]
    ZeroChannel(&'static str),
    #[error("black-hat kernel side {0} must be odd and at least 3")]
    InvalidKernel(usize),
    #[error("mask selects no pixels")]
    EmptyMask,
    #[error("no pixel passed the skin colour gates")]
    NoSkinDetected,
    #[error("degenerate estimate: {0}")]
    Degenerate(&'static str),
    #[error("invalid estimator config: {0}")]
    InvalidConfig(&'static str),
    #[error("input is empty")]
    EmptyInput,
    #[error("predictions and tones share no image ids")]
    NoOverlap,
    #[error("invalid split ratios: {0}")]
    InvalidRatios(&'static str),
    #[error("image id {0:?} appears more than once")]
    DuplicateId(String),
    #[error("data-shift split has no image at or below the cutoff")]
    EmptyTestSet,
    #[error("data-shift split has no image above the cutoff")]
    EmptyTrainSet,
    #[error("Lab({l}, {a}, {b}) has no 8-bit sRGB representation")]
    OutOfGamut { l: f64, a: f64, b: f64 },
    #[error("invalid synthetic spec: {0}")]
    InvalidSyntheticSpec(&'static str),
    #[error("unknown {kind} {value:?}")]
    UnknownName { kind: &'static str, value: String },
}
