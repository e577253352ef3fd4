//! Pinned tolerances, default grids, and safety factors.
//!
//! Every threshold used by the verification harnesses is defined here, not
//! inline, so reports can record exactly what was enforced.

/// Default time grid half-width. Gaussian tails beyond t = 12 carry mass
/// below e^{-288}, so truncation is invisible at every tolerance below.
pub const DEFAULT_TIME_HALF_WIDTH: f64 = 12.0;

/// Default time grid step. Riemann sums of the smooth presets are
/// aliasing-limited at ~e^{-(pi/step)^2}, i.e. exact in f64 at 0.01.
pub const DEFAULT_TIME_STEP: f64 = 0.01;

/// Default phase-space grid step for field work.
pub const DEFAULT_PHASE_STEP: f64 = 0.1;

/// Default half-width of the phase-space box for unitarity-type checks.
/// The Gaussian window's transform decays like e^{-x^2/2 - pi^2 y^2/2}.
pub const DEFAULT_FIELD_HALF_WIDTH: f64 = 8.0;

/// Coarsest step that still resolves the Gaussian presets.
pub const GAUSSIAN_MAX_STEP: f64 = 0.25;

/// Coarsest step accepted by the direct Fourier transform.
pub const FOURIER_MAX_STEP: f64 = 0.1;

/// stft evaluation requires |x| <= T - STFT_WINDOW_MARGIN so the shifted
/// window's off-grid tail stays below ~1e-9 of its mass.
pub const STFT_WINDOW_MARGIN: f64 = 3.0;

/// Relative off-grid mass allowed before translate_modulate reports
/// a truncation error.
pub const TRUNCATION_TAIL_TOL: f64 = 1e-10;

/// Matching tolerance for "is this coordinate exactly on a grid node /
/// jump point" decisions; covers f64 accumulation along a 2401-node grid.
pub const ON_NODE_TOL: f64 = 1e-9;

/// Gaussian preset quadrature norm agreement with the closed form.
pub const GAUSSIAN_NORM_TOL: f64 = 1e-8;

/// Hermite preset pairwise orthonormality under quadrature.
pub const HERMITE_ORTHO_TOL: f64 = 1e-6;

/// Parseval defect allowed for the direct Fourier transform (presets that
/// satisfy the width precondition).
pub const PARSEVAL_REL_TOL: f64 = 1e-4;

/// Pointwise relative error of |V_phi phi| against the closed form.
pub const STFT_ORACLE_REL_TOL: f64 = 1e-5;

/// Field-mass unitarity defect allowed over the default box.
pub const UNITARITY_REL_TOL: f64 = 5e-3;

/// Covariance discrepancy allowed between |V g_shift| and the shifted |V g|.
pub const COVARIANCE_TOL: f64 = 1e-5;

/// Nested-box Cauchy threshold for weighted field norms: the outermost
/// shell may not contribute more than this fraction.
pub const WEIGHTED_TAIL_FRACTION: f64 = 0.05;

/// Hermitian asymmetry allowed in an assembled Gram matrix.
pub const GRAM_HERMITIAN_TOL: f64 = 1e-10;

/// Eigenvalues below RANK_REL_CUTOFF * lambda_max count as rank deficiency.
pub const RANK_REL_CUTOFF: f64 = 1e-8;

/// A Gram matrix with min eigenvalue below this is reported indefinite.
pub const GRAM_INDEFINITE_TOL: f64 = -1e-6;

/// Relative deviation of the projector trace quadrature from dim W.
pub const TRACE_REL_TOL: f64 = 0.02;

/// Biorthogonal-sum field: imaginary part, range slack, and agreement with
/// the projection-norm field.
pub const BIORTH_IM_TOL: f64 = 1e-6;
pub const BIORTH_RANGE_TOL: f64 = 1e-6;
pub const BIORTH_MATCH_TOL: f64 = 1e-5;

/// Biorthogonality defect allowed for dual systems on a finite section.
pub const DUAL_BIORTH_TOL: f64 = 1e-6;

/// Residual allowed in the translation/modulation commutation identity.
pub const COMMUTATION_RESIDUAL_TOL: f64 = 1e-6;

/// Safety factor applied to the empirically estimated point-bound constant.
pub const SAFETY_KAPPA: f64 = 2.0;

/// Default trial count for the point-bound constant estimate.
pub const DEFAULT_CONSTANT_TRIALS: u32 = 96;

/// Separation constants above this trip the covering check's geometry
/// warning (the 1/4 margins presume small separation).
pub const COVERING_GEOMETRY_LIMIT: f64 = 0.5;

/// Transported-mass ratio I_G(R)/R^2 across a dyadic ladder must end below
/// this fraction of its first value.
pub const RATIO_DECAY_FRACTION: f64 = 0.2;

/// Allowed drift of the fitted envelope constant when the radius ladder
/// is extended by one doubling.
pub const ENVELOPE_DRIFT_TOL: f64 = 0.2;

/// Slack accepted on density-inequality margins (pure float noise).
pub const MARGIN_SLACK: f64 = 1e-9;

/// Default section radius used to estimate the dual-system bound in the
/// uniform-minimality harness.
pub const DUAL_SECTION_RADIUS: f64 = 3.0;

/// Largest half-side of bound-evidence sections in the density harness;
/// counts still use every requested radius.
pub const SECTION_RADIUS_CAP: f64 = 4.0;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_sanity() {
        assert!(GAUSSIAN_NORM_TOL < HERMITE_ORTHO_TOL);
        assert!(STFT_ORACLE_REL_TOL < UNITARITY_REL_TOL);
        assert!(RANK_REL_CUTOFF > 0.0 && RANK_REL_CUTOFF < 1e-6);
        assert!(SAFETY_KAPPA >= 1.0);
    }
}
