use super::trace::RunTrace;
use crate::error::{Error, Result};

fn window(trace: &RunTrace, k_lo: usize, k_hi: usize) -> Result<Vec<(f64, f64)>> {
    if k_lo >= k_hi {
        return Err(Error::RateFit(format!("empty window [{k_lo}, {k_hi}]")));
    }
    let pts: Vec<(f64, f64)> =
        trace.records.iter().filter(|r| r.k >= k_lo && r.k <= k_hi).map(|r| (r.k as f64, r.loss)).collect();
    if let Some(&(k, loss)) = pts.iter().find(|(_, l)| !(*l > 0.0)) {
        return Err(Error::RateFit(format!("non-positive loss {loss:e} at k = {k} inside [{k_lo}, {k_hi}]")));
    }
    if pts.len() < 2 {
        return Err(Error::RateFit(format!("fewer than two records inside [{k_lo}, {k_hi}]")));
    }
    Ok(pts)
}

fn slope(pts: impl Iterator<Item = (f64, f64)> + Clone) -> f64 {
    let m = pts.clone().count() as f64;
    let (sx, sy) = pts.clone().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (sxy, sxx) = pts.fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    sxy / sxx
}

/// Least-squares slope of `log loss` against `log k` over `k ∈ [k_lo, k_hi]`.
pub fn fit_sublinear_rate(trace: &RunTrace, k_lo: usize, k_hi: usize) -> Result<f64> {
    if k_lo == 0 {
        return Err(Error::RateFit("log-log fit needs k_lo >= 1".into()));
    }
    let pts = window(trace, k_lo, k_hi)?;
    Ok(slope(pts.iter().map(|&(k, l)| (k.ln(), l.ln()))))
}

/// `exp` of the least-squares slope of `log loss` against `k`, i.e. the
/// per-iteration contraction factor.
pub fn fit_linear_rate(trace: &RunTrace, k_lo: usize, k_hi: usize) -> Result<f64> {
    let pts = window(trace, k_lo, k_hi)?;
    Ok(slope(pts.iter().map(|&(k, l)| (k, l.ln()))).exp())
}
