use serde::Serialize;

/// Outcome of a log-log least-squares fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SlopeFit {
    Order { slope: f64, intercept: f64, points: usize },
    /// Every error is at rounding level; no order is reported.
    Exact,
    /// Fewer than [`MIN_FIT_POINTS`] usable points.
    Insufficient { points: usize },
}

/// Smallest number of points a slope is fitted to.
pub const MIN_FIT_POINTS: usize = 4;

impl SlopeFit {
    pub fn slope(&self) -> Option<f64> {
        match self {
            SlopeFit::Order { slope, .. } => Some(*slope),
            _ => None,
        }
    }

    pub fn status(&self) -> &'static str {
        match self {
            SlopeFit::Order { .. } => "order",
            SlopeFit::Exact => "exact",
            SlopeFit::Insufficient { .. } => "insufficient",
        }
    }
}

/// Least-squares slope of `log(err)` against `log(h)`.
///
/// Points with `err < 10 * floor` are dropped. If every error is below
/// `rounding`, the series is flagged [`SlopeFit::Exact`].
pub fn fit_slope(h: &[f64], err: &[f64], floor: f64, rounding: f64) -> SlopeFit {
    assert_eq!(h.len(), err.len());
    if !err.is_empty() && err.iter().all(|&e| e <= rounding) {
        return SlopeFit::Exact;
    }
    let pts: Vec<(f64, f64)> = h
        .iter()
        .zip(err)
        .filter(|(_, &e)| e.is_finite() && e > 0.0 && e >= 10.0 * floor)
        .map(|(&h, &e)| (h.ln(), e.ln()))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return SlopeFit::Insufficient { points: pts.len() };
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    SlopeFit::Order {
        slope,
        intercept: my - slope * mx,
        points: pts.len(),
    }
}
