//! Numerical tolerances shared by every check in the crate.

/// Identities that hold exactly in exact arithmetic (unitarity, normalization,
/// reductions to a special case).
pub const EXACT: f64 = 1e-12;

/// Agreement between two independent numerical routes to the same quantity.
pub const CROSS_METHOD: f64 = 1e-10;

/// Statistical gate: a Monte-Carlo mean must lie within this many standard
/// errors of its analytic value.
pub const STAT_Z: f64 = 5.0;
