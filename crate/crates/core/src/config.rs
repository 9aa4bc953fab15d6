//! Default tolerances shared across the pipeline.

/// Tolerances used by fitting and by the post-condition checks.
///
/// Every check in the crate defaults to the values here; callers that need
/// different behaviour construct their own record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative cutoff below which eigenvalues and singular values are zero.
    pub rank_rtol: f64,
    /// Bound on `‖P·P − P‖_F / d` for fits on full-rank data.
    pub idempotence: f64,
    /// Bound on `‖Cov(x̃, C)‖_F` relative to `‖Σ_XC‖_F`.
    pub guardedness: f64,
    /// Bound on `‖b − (μ − Pμ)‖_∞`.
    pub offset: f64,
    /// Ridge penalty of the linear probe.
    pub probe_ridge: f64,
    /// Probe scores closer than this are ties, resolved toward the more
    /// frequent class.
    pub probe_tie: f64,
}

pub const DEFAULT_RTOL: f64 = 1e-10;

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank_rtol: DEFAULT_RTOL,
            idempotence: 1e-8,
            guardedness: 1e-8,
            offset: 1e-8,
            probe_ridge: 1e-6,
            probe_tie: 1e-9,
        }
    }
}
