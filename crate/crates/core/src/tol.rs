//! Numerical tolerances used across the crate.
//!
//! Validation tolerances are deliberately tighter than solver tolerances so
//! that objects accepted by the constructors never trip the solver, and
//! solver output clipped at [`EIG_CLIP`] passes validation again.

/// Hermiticity check for density matrices.
pub const HERM_TOL: f64 = 1e-10;

/// Trace, marginal, PSD and completeness checks on constructed objects.
pub const VALIDATION_TOL: f64 = 1e-9;

/// Eigenvalues in [-EIG_CLIP, 0) are treated as zero when matrices are
/// cleaned up before or after a solve.
pub const EIG_CLIP: f64 = 1e-9;

/// Duality-gap target handed to the interior-point solver.
pub const SOLVER_TOL: f64 = 1e-8;

/// Largest gap accepted from a reduced-accuracy solve.
pub const SOLVER_ACCEPT: f64 = 1e-7;

/// Hard cap on the total Choi dimension (input dim times output dim).
pub const DIM_GUARD: usize = 4096;

/// Values this close to an integer are snapped before floor/ceil in the rate
/// formulas, so solver noise cannot shift a bracket end by one copy.
pub const RATE_SNAP: f64 = 1e-6;
