//! Richardson extrapolation and convergence bookkeeping.

use serde::{Deserialize, Serialize};

/// Outcome of extrapolating a sequence of resolutions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub coarse: f64,
    pub fine: f64,
    pub extrapolated: f64,
    /// Order assumed for the extrapolant.
    pub assumed_order: f64,
    /// Order observed from three resolutions, when available and finite.
    pub observed_order: Option<f64>,
    /// Set when coarse and fine agree exactly and no order can be inferred.
    pub degenerate: bool,
}

impl ConvergenceReport {
    /// Error estimate attached to the fine value.
    pub fn fine_error(&self) -> f64 {
        (self.fine - self.extrapolated).abs()
    }
}

/// Two-level extrapolant `(2ᵖ·fine − coarse)/(2ᵖ − 1)` for halved spacing.
pub fn richardson(coarse: f64, fine: f64, order: f64) -> ConvergenceReport {
    let factor = 2f64.powf(order);
    let degenerate = coarse == fine;
    let extrapolated = if degenerate { fine } else { (factor * fine - coarse) / (factor - 1.0) };
    ConvergenceReport { coarse, fine, extrapolated, assumed_order: order, observed_order: None, degenerate }
}

/// Two-level extrapolant plus the observed order from a third, coarser value.
pub fn richardson3(coarsest: f64, coarse: f64, fine: f64, order: f64) -> ConvergenceReport {
    let mut report = richardson(coarse, fine, order);
    report.observed_order = observed_order(coarsest, coarse, fine);
    report
}

/// `log2(|v0 − v1| / |v1 − v2|)` for values at spacings h, h/2, h/4.
pub fn observed_order(v0: f64, v1: f64, v2: f64) -> Option<f64> {
    let d0 = (v0 - v1).abs();
    let d1 = (v1 - v2).abs();
    if d0 == 0.0 || d1 == 0.0 {
        return None;
    }
    let p = (d0 / d1).log2();
    p.is_finite().then_some(p)
}

/// Polynomial (Neville) extrapolation of `values(h)` to `h = 0`.
///
/// For spacings halving at each level this is repeated Richardson
/// extrapolation with orders 1, 2, 3, ….
pub fn extrapolate_to_zero(h: &[f64], values: &[f64]) -> f64 {
    assert_eq!(h.len(), values.len());
    assert!(!h.is_empty());
    let mut p = values.to_vec();
    let n = h.len();
    for level in 1..n {
        for i in 0..n - level {
            let (hi, hj) = (h[i], h[i + level]);
            p[i] = (hi * p[i + 1] - hj * p[i]) / (hi - hj);
        }
    }
    p[0]
}

/// Extrapolates a sequence sampled at spacings `h` (decreasing) and reports
/// the last two raw values, the polynomial limit and the observed order.
pub fn extrapolate_sequence(h: &[f64], values: &[f64]) -> ConvergenceReport {
    let n = values.len();
    assert!(n >= 2 && h.len() == n);
    let coarse = values[n - 2];
    let fine = values[n - 1];
    let degenerate = coarse == fine;
    let extrapolated = if degenerate { fine } else { extrapolate_to_zero(h, values) };
    let observed = if n >= 3 {
        let d0 = (values[n - 3] - values[n - 2]).abs();
        let d1 = (values[n - 2] - values[n - 1]).abs();
        let ratio = h[n - 3] / h[n - 2];
        if d0 > 0.0 && d1 > 0.0 && ratio > 1.0 {
            let p = (d0 / d1).ln() / ratio.ln();
            p.is_finite().then_some(p)
        } else {
            None
        }
    } else {
        None
    };
    ConvergenceReport { coarse, fine, extrapolated, assumed_order: (n - 1) as f64, observed_order: observed, degenerate }
}
