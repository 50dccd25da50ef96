//! Power-law fits of an energy shift against the strain amplitude.
//!
//! A stationary initial state has no energy shift at first order, so the
//! fitted exponent separates "linear in h" (non-stationary states) from
//! "quadratic in h" (stationary states).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub exponent: f64,
    /// Standard error of the fitted exponent.
    pub exponent_stderr: f64,
    pub prefactor: f64,
    /// RMS residual of `ln|dE|` about the fitted line.
    pub residual_rms: f64,
    pub points: usize,
    pub decades: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ScalingVerdict {
    Exponent(ScalingFit),
    /// Every shift is at or below the noise floor.
    NullConsistent { max_abs_shift: f64, noise_floor: f64 },
}

impl ScalingVerdict {
    pub fn exponent(&self) -> Option<f64> {
        match self {
            ScalingVerdict::Exponent(f) => Some(f.exponent),
            ScalingVerdict::NullConsistent { .. } => None,
        }
    }
}

/// Least-squares slope of `ln|shift|` against `ln(amplitude)`.
///
/// Needs at least four points spanning three decades in amplitude. Points
/// with `|shift| <= noise_floor` are discarded; if all are, the verdict is
/// [`ScalingVerdict::NullConsistent`].
pub fn fit_scaling(points: &[(f64, f64)], noise_floor: f64) -> Result<ScalingVerdict> {
    if points.len() < 4 {
        return Err(Error::invalid(format!("need >= 4 sweep points, got {}", points.len())));
    }
    if points.iter().any(|&(a, s)| !(a > 0.0 && a.is_finite() && s.is_finite())) {
        return Err(Error::invalid("sweep amplitudes must be positive and shifts finite"));
    }
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &(a, _)| (lo.min(a), hi.max(a)));
    let decades = (hi / lo).log10();
    if decades < 3.0 - 1e-9 {
        return Err(Error::invalid(format!("sweep spans {decades:.2} decades, need >= 3")));
    }

    let max_abs_shift = points.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.1.abs() > noise_floor)
        .map(|&(a, s)| (a.ln(), s.abs().ln()))
        .collect();
    if usable.is_empty() {
        return Ok(ScalingVerdict::NullConsistent { max_abs_shift, noise_floor });
    }
    if usable.len() < 2 {
        return Err(Error::Numerical("fewer than two sweep points above the noise floor".into()));
    }

    let n = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = usable.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let dof = (n - 2.0).max(1.0);
    let stderr = (ss_res / dof / sxx).sqrt();

    Ok(ScalingVerdict::Exponent(ScalingFit {
        exponent: slope,
        exponent_stderr: stderr,
        prefactor: intercept.exp(),
        residual_rms: (ss_res / n).sqrt(),
        points: usable.len(),
        decades,
    }))
}

/// Log-spaced amplitudes from `lo` to `hi` inclusive.
pub fn log_sweep(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2 && lo > 0.0 && hi > lo);
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synth(c: f64, p: i32) -> Vec<(f64, f64)> {
        log_sweep(1e-7, 1e-3, 5).into_iter().map(|h| (h, c * h.powi(p))).collect()
    }

    #[test]
    fn exact_linear_law() {
        let e = fit_scaling(&synth(3.5, 1), 0.0).unwrap().exponent().unwrap();
        assert!((e - 1.0).abs() < 1e-6);
    }

    #[test]
    fn exact_quadratic_law() {
        let e = fit_scaling(&synth(-2.0, 2), 0.0).unwrap().exponent().unwrap();
        assert!((e - 2.0).abs() < 1e-6);
    }

    #[test]
    fn all_below_floor_is_null() {
        let pts: Vec<_> = log_sweep(1e-6, 1e-2, 4).into_iter().map(|h| (h, 1e-30 * h)).collect();
        assert!(matches!(fit_scaling(&pts, 1e-20).unwrap(), ScalingVerdict::NullConsistent { .. }));
    }

    #[test]
    fn degenerate_sweeps_rejected() {
        assert!(fit_scaling(&synth(1.0, 1)[..3], 0.0).is_err());
        let narrow: Vec<_> = log_sweep(1e-3, 1e-1, 5).into_iter().map(|h| (h, h)).collect();
        assert!(fit_scaling(&narrow, 0.0).is_err());
    }
}
