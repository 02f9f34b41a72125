use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by every check in the crate.
///
/// Operator residuals are Frobenius norms and vector residuals are
/// 2-norms, both absolute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Operator identities.
    pub op: f64,
    /// Vector identities.
    pub vec: f64,
    /// Normalization of unit kets.
    pub norm: f64,
    /// Probability comparisons.
    pub prob: f64,
    /// Eigenvalues closer than this belong to one eigenspace.
    pub grouping: f64,
    /// Lower edge of the indeterminate band.
    pub band_low: f64,
    /// Upper edge of the indeterminate band; residuals above it fail.
    pub band_high: f64,
    /// Relative spectral cutoff for rank decisions.
    pub rank_rel: f64,
    /// Schmidt coefficients closer than this are treated as degenerate.
    pub schmidt_group: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            op: 1e-10,
            vec: 1e-10,
            norm: 1e-12,
            prob: 1e-9,
            grouping: 1e-8,
            band_low: 1e-8,
            band_high: 1e-4,
            rank_rel: 1e-9,
            schmidt_group: 1e-8,
        }
    }
}

impl Tolerances {
    /// Scales the operator and vector tolerances jointly.
    pub fn scaled(factor: f64) -> Self {
        let base = Self::default();
        Self {
            op: base.op * factor,
            vec: base.vec * factor,
            ..base
        }
    }

    /// True when `residual` lies inside the closed indeterminate band.
    pub fn in_band(&self, residual: f64) -> bool {
        residual >= self.band_low && residual <= self.band_high
    }
}
