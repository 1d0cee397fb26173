//! Numerical tolerances shared by every module.

/// Relative threshold under which a pivot counts as zero when computing ranks.
pub const RANK: f64 = 1e-10;

/// Determinants of Gram matrices below this are treated as zero.
pub const DET_ZERO: f64 = 1e-12;

/// Gram eigenvalues in `(-EIG_CLAMP * scale, 0)` are clamped to zero.
pub const EIG_CLAMP: f64 = 1e-12;

/// Off-diagonal mass (relative to the Frobenius norm) at which Jacobi sweeps stop.
pub const JACOBI: f64 = 1e-15;

/// Maximum number of Jacobi sweeps before giving up.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Metric difference below which two ML candidates are considered tied.
pub const METRIC_TIE: f64 = 1e-9;

/// Slack on exponent comparisons in criterion verdicts.
pub const EXPONENT_SLACK: f64 = 0.05;

/// Default cap on the number of vectors any exhaustive enumeration may visit.
pub const ENUMERATION_CAP: u128 = 100_000_000;
