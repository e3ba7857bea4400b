//! Numerical tolerances shared across the crate.
//!
//! Every threshold used by a validation check lives here so callers can
//! reference (or override at their own call sites) one named constant.

/// Symmetry/antisymmetry tolerance accepted when validating a Hermitian input.
pub const HERMITIAN: f64 = 1e-12;

/// Unitarity tolerance for single-step propagators (`U U^† = I`).
pub const UNITARY: f64 = 1e-10;

/// Allowed norm deviation for a state that is claimed to be normalized.
pub const NORMALIZED: f64 = 1e-8;

/// Norm below which a decoded coefficient vector is treated as the null solution.
pub const NULL_NORM: f64 = 1e-6;

/// Slice norm below which a clock solution is considered degenerate.
pub const SLICE_NORM: f64 = 1e-6;

/// Imaginary residue allowed in expectation values of Hermitian operators.
pub const IMAG_RESIDUE: f64 = 1e-10;

/// Eigenvalue floor below which populations do not contribute to the entropy.
pub const ENTROPY_FLOOR: f64 = 1e-14;

/// Trace norms at or below `1 + NEGATIVITY_FLOOR` give zero log-negativity.
pub const NEGATIVITY_FLOOR: f64 = 1e-12;

/// Probabilities are clamped to `[0, 1]` once inside this margin.
pub const PROBABILITY_SLACK: f64 = 1e-9;

/// Consistency tolerance between incremental and recomputed QUBO energies,
/// relative to the sum of absolute coefficients.
pub const ENERGY_BOOKKEEPING: f64 = 1e-9;

/// Energies closer than this are treated as ties when ranking candidates.
pub const ENERGY_TIE: f64 = 1e-12;
