use thiserror::Error;

/// Crate-wide error type. Variants mirror the failure modes of the exact
/// arithmetic layers and of the validation/lifting pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    /// An operation needed a leading term that is not known at the stored
    /// precision (the value is indistinguishable from zero).
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    /// A required n-th root does not exist over the rational coefficient
    /// field.
    #[error("no {n}-th root of {value} over the rationals")]
    NonSplitRoot { value: String, n: i64 },

    /// Argument of an exponential/logarithm series does not have strictly
    /// positive valuation.
    #[error("series argument is not small: {0}")]
    NotSmall(String),

    /// No single index dominates the series on the whole skeleton.
    #[error("no dominant term: {0}")]
    NoDominantTerm(String),

    #[error("window too small: {0}")]
    WindowTooSmall(String),

    /// Defensive failure of the normalization iteration; must not occur on
    /// valid input.
    #[error("normalization did not converge: {0}")]
    NonConvergent(String),

    /// Endpoint levels and edge length do not admit an integer slope.
    #[error("no integer slope on edge {edge}: levels differ by {delta} over length {length}")]
    InfiniteSlopeMismatch {
        edge: String,
        delta: String,
        length: String,
    },

    /// A denominator does not factor over the marked points.
    #[error("denominator does not split over the marked points: {0}")]
    NonSplitDenominator(String),

    #[error("zero differential form")]
    ZeroForm,

    /// Dominance cannot be certified on a chart annulus (a zero or pole of
    /// the form interferes).
    #[error("pole or zero inside chart annulus: {0}")]
    PoleInAnnulus(String),

    #[error("unsupported genus {0}: explicit lifting is genus 0 only")]
    UnsupportedGenus(i64),

    /// Residue targets disagree with the current residues at the graded
    /// level, so no small correction exists.
    #[error("residue mismatch: {0}")]
    ResidueMismatch(String),

    /// The correction form violates the strict norm inequality.
    #[error("norm violation: {0}")]
    NormViolation(String),

    /// Gluing data on the two sides of an edge is not compatible.
    #[error("incompatible binomials: {0}")]
    IncompatibleBinomials(String),

    /// A coordinate series has no strictly dominant linear coefficient.
    #[error("coordinate not dominant: {0}")]
    NotDominant(String),

    #[error("truncation order {0} too small")]
    TruncationTooSmall(i64),

    /// The input datum fails validation and cannot be lifted.
    #[error("datum fails validation: {0}")]
    DatumInvalid(String),

    /// Malformed input data (bad references, missing fields, parse errors).
    #[error("structural error: {0}")]
    Structural(String),
}

pub type Result<T> = std::result::Result<T, Error>;
