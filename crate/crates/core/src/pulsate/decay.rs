use super::frame::{ProfileFrame, SpeedStatus};
use crate::error::{Error, Result};
use crate::spectral::DecayExponents;
use crate::terrace::linear_fit;

/// Tail values used for the fits.
pub const TAIL_WINDOW: (f64, f64) = (1e-4, 1e-2);
/// Fewest grid points a tail fit accepts.
pub const MIN_TAIL_POINTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayReport {
    /// Slope of `log Φ̄` ahead of the front; compare with `μ̲`.
    pub slope_right: f64,
    /// Slope of `log(1 - Φ̄)` behind the front, negated; compare with `-μ̄`.
    pub slope_left: f64,
    pub rel_err_right: f64,
    pub rel_err_left: f64,
    pub points_right: usize,
    pub points_left: usize,
}

/// Exponential tail rates of the cell-averaged profile against the decay roots.
pub fn measure_decay(pf: &ProfileFrame, de: &DecayExponents) -> Result<DecayReport> {
    if pf.status != SpeedStatus::Converged {
        return Err(Error::Precondition("profile is not a converged wave".into()));
    }
    let avg = pf.averaged();
    let (lo, hi) = TAIL_WINDOW;
    let min_right = avg.iter().copied().fold(f64::INFINITY, f64::min);
    let min_left = avg.iter().map(|v| 1.0 - v).fold(f64::INFINITY, f64::min);
    if min_right > lo || min_left > lo {
        return Err(Error::Precondition(format!(
            "tails are not resolved inside [-W, W] (W = {})",
            pf.half_width()
        )));
    }
    let right: Vec<(f64, f64)> = pf
        .xi
        .iter()
        .zip(&avg)
        .filter(|(x, v)| **x > 0.0 && **v >= lo && **v <= hi)
        .map(|(x, v)| (*x, v.ln()))
        .collect();
    let left: Vec<(f64, f64)> = pf
        .xi
        .iter()
        .zip(&avg)
        .filter(|(x, v)| **x < 0.0 && 1.0 - **v >= lo && 1.0 - **v <= hi)
        .map(|(x, v)| (*x, (1.0 - v).ln()))
        .collect();
    for pts in [&right, &left] {
        if pts.len() < MIN_TAIL_POINTS {
            return Err(Error::WindowTooShort { points: pts.len() });
        }
    }
    let slope_right = linear_fit(&right).0;
    let slope_left = -linear_fit(&left).0;
    Ok(DecayReport {
        slope_right,
        slope_left,
        rel_err_right: ((slope_right - de.mu_minus) / de.mu_minus).abs(),
        rel_err_left: ((slope_left + de.mu_plus) / de.mu_plus).abs(),
        points_right: right.len(),
        points_left: left.len(),
    })
}
