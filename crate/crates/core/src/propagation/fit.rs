//! Log-log power-law fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values below this are treated as numerically zero.
pub const DEFAULT_FLOOR: f64 = 1e-11;
/// Largest accepted residual RMS, in log10 units.
pub const MAX_RMS: f64 = 0.15;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub ladder: Vec<f64>,
    pub values: Vec<f64>,
    /// Which points entered the fit.
    pub used: Vec<bool>,
    pub slope: f64,
    pub intercept: f64,
    pub rms: f64,
    pub floor: f64,
}

impl DecayFit {
    /// The decay exponent `m̂ = −slope`.
    pub fn exponent(&self) -> f64 {
        -self.slope
    }

    pub fn accepted(&self) -> bool {
        self.rms <= MAX_RMS
    }
}

/// Least squares on `(log10 ladder, log10 value)` without the RMS acceptance test.
pub fn fit_loglog(ladder: &[f64], values: &[f64], floor: f64) -> Result<DecayFit> {
    if ladder.len() != values.len() {
        return Err(Error::ShapeMismatch { expected: ladder.len(), got: values.len() });
    }
    if ladder.iter().any(|s| !(s.is_finite() && *s > 0.0)) || ladder.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::DegenerateLadder("ladder must be positive and strictly increasing".into()));
    }
    let used: Vec<bool> = values.iter().map(|v| v.is_finite() && *v > floor).collect();
    let pts: Vec<(f64, f64)> =
        ladder.iter().zip(values).zip(&used).filter(|(_, u)| **u).map(|((s, v), _)| (s.log10(), v.log10())).collect();
    if pts.len() < 4 {
        return Err(Error::InsufficientPoints { needed: 4, got: pts.len() });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateLadder("all fitted points share one abscissa".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Ok(DecayFit { ladder: ladder.to_vec(), values: values.to_vec(), used, slope, intercept, rms, floor })
}

/// As [`fit_loglog`], refusing fits with residual RMS above [`MAX_RMS`].
pub fn fit_decay(ladder: &[f64], values: &[f64], floor: f64) -> Result<DecayFit> {
    let fit = fit_loglog(ladder, values, floor)?;
    if !fit.accepted() {
        return Err(Error::FitRejected { rms: fit.rms, limit: MAX_RMS });
    }
    Ok(fit)
}

/// Slope of `log10 y` against `log10 x` using every point, for trend checks on
/// small ladders.
pub fn trend_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).filter(|(a, b)| **a > 0.0 && **b > 0.0).map(|(a, b)| (a.log10(), b.log10())).collect();
    let n = pts.len() as f64;
    if n < 2.0 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let s = [8.0, 16.0, 32.0, 64.0];
        let v: Vec<f64> = s.iter().map(|s: &f64| s.powi(-3)).collect();
        let f = fit_decay(&s, &v, DEFAULT_FLOOR).unwrap();
        assert!((f.slope + 3.0).abs() < 1e-12);
        assert!(f.rms < 1e-12);
    }

    #[test]
    fn refuses_sub_floor_and_bad_ladders() {
        let s = [8.0, 16.0, 32.0, 64.0];
        assert!(matches!(fit_decay(&s, &[1e-12; 4], DEFAULT_FLOOR), Err(Error::InsufficientPoints { .. })));
        assert!(matches!(fit_decay(&[1.0, 1.0, 2.0, 3.0], &[1.0; 4], 0.0), Err(Error::DegenerateLadder(_))));
        let zigzag = [1.0, 1e-3, 1.0, 1e-3];
        assert!(matches!(fit_decay(&s, &zigzag, DEFAULT_FLOOR), Err(Error::FitRejected { .. })));
    }
}
