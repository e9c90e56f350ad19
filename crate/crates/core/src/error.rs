//! Crate-wide error type.

use thiserror::Error;

use crate::lattice::{SubsetId, MAX_GROUND_SET};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ground set size must be between 1 and {MAX_GROUND_SET}, got {got}")]
    GroundSetSize { got: u32 },

    #[error("element {element} is outside the ground set {{1..{n}}}")]
    ElementOutOfRange { element: u32, n: u8 },

    #[error("mask {mask:#x} does not fit a ground set of {n} elements")]
    MaskOutOfRange { mask: u32, n: u8 },

    #[error("{lo} is not a subset of {hi}")]
    NotASubset { lo: SubsetId, hi: SubsetId },

    #[error("subset families may not contain the empty set")]
    EmptyFamilyMember,

    #[error("empty subset not allowed here")]
    EmptySubset,

    #[error("mismatched ground sets: {left} vs {right}")]
    GroundSetMismatch { left: u8, right: u8 },

    #[error("negative value {value} for {what}")]
    NegativeValue { what: String, value: i64 },

    #[error("contrast level {value} exceeds the 2^31 bound")]
    LevelTooLarge { value: i64 },

    #[error("image {subset} requires positive contrast (h > l >= 0), got h={h}, l={l}")]
    NonPositiveContrast { subset: SubsetId, h: i64, l: i64 },

    #[error("delta must be >= 1 on family members and 0 elsewhere; offending subset {subset}")]
    InvalidDelta { subset: SubsetId },

    #[error("no scheme exists for these levels; violating subsets: {}", render_subsets(.violations))]
    InfeasibleLevels { violations: Vec<SubsetId> },

    #[error(
        "no non-negative solution for color assignment {{{assignment}}}; negative at {}",
        render_subsets(.violations)
    )]
    InfeasibleAssignment {
        assignment: String,
        violations: Vec<SubsetId>,
    },

    #[error("contrast targets violate the trade-off bound: weighted sum {sum} > 1")]
    TradeoffExceeded { sum: String },

    #[error("improved construction hypothesis failed: {clause}")]
    ImprovedHypothesis { clause: String },

    #[error("improved construction not applicable: {reason}")]
    NotApplicable { reason: String },

    #[error("problem too large: {detail}")]
    Tractability { detail: String },

    #[error("secret images must share one size: expected {expected_w}x{expected_h}, {subset} is {got_w}x{got_h}")]
    DimensionMismatch {
        subset: SubsetId,
        expected_w: u32,
        expected_h: u32,
        got_w: u32,
        got_h: u32,
    },

    #[error("secret image for {subset} does not belong to the scheme family")]
    UnknownSecret { subset: SubsetId },

    #[error("no secret images supplied")]
    NoSecrets,

    #[error("table is not certified (run the verifier first): {reason}")]
    UncertifiedTable { reason: String },

    #[error("subpixel layout {rows}x{cols} holds {capacity} cells, need at least {needed}")]
    LayoutTooSmall {
        rows: u32,
        cols: u32,
        capacity: u64,
        needed: u64,
    },

    #[error("block at secret pixel ({x},{y}) has {got} black subpixels, other {color} pixels have {expected}")]
    NonConstantBlock {
        x: u32,
        y: u32,
        color: &'static str,
        expected: u64,
        got: u64,
    },

    #[error("table realizes inconsistent levels for image {subset}: {detail}")]
    InconsistentLevels { subset: SubsetId, detail: String },

    #[error("unsupported matrix collection: {reason}")]
    UnsupportedCollection { reason: String },

    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },

    #[error("bitmap error: {0}")]
    Bitmap(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

fn render_subsets(subsets: &[SubsetId]) -> String {
    let parts: Vec<String> = subsets.iter().map(|s| s.to_string()).collect();
    parts.join(", ")
}
