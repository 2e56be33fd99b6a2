//! Commutator expansions of `[B, f(A/s)]` and their remainders.
//!
//! Everything is computed in the eigenbasis of `A`, where `B` becomes `B̃`,
//! `ad_A^k B` becomes `B̃_ij (a_j − a_i)^k` and `f(A/s)` is diagonal. Norms are
//! unitarily invariant, so no back-transformation is needed for the ladders.

use std::sync::Arc;

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcalc::{apply_eig, SmoothCutoff, Support};
use crate::jet::factorial;
use crate::lattice::{hermitize, Grid, HermitianOperator};
use crate::operators::ConjugateOperator;
use crate::propagation::{fit_loglog, trend_slope, DecayFit};
use crate::quad::{adaptive, adaptive_real_line, Tolerance};
use crate::spectral::{diag_sandwich, operator_norm, Spectrum};

/// `B` expressed in the eigenbasis of `A`.
#[derive(Clone)]
pub struct ExpansionBasis {
    spectrum: Arc<Spectrum>,
    b: Mat<c64>,
}

impl ExpansionBasis {
    pub fn new(b: &HermitianOperator, a: &ConjugateOperator) -> Result<Self> {
        Self::from_matrices(b.matrix(), &a.op)
    }

    pub fn from_matrices(b: &Mat<c64>, a: &HermitianOperator) -> Result<Self> {
        if b.nrows() != a.dim() || b.ncols() != a.dim() {
            return Err(Error::ShapeMismatch { expected: a.dim(), got: b.nrows() });
        }
        let spectrum = a.spectrum()?;
        let u = &spectrum.vectors;
        let bt = u.adjoint() * b * u;
        Ok(Self { spectrum, b: bt })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum.values
    }

    pub fn dim(&self) -> usize {
        self.b.nrows()
    }

    /// `ad_A^k B` in the eigenbasis of `A`.
    pub fn ad_power(&self, k: usize) -> Mat<c64> {
        let a = &self.spectrum.values;
        Mat::from_fn(self.dim(), self.dim(), |i, j| self.b[(i, j)] * (a[j] - a[i]).powi(k as i32))
    }

    /// Back to the original basis.
    pub fn to_original(&self, m: &Mat<c64>) -> Mat<c64> {
        let u = &self.spectrum.vectors;
        u * m * u.adjoint()
    }
}

/// `W g(H) W` with the Gaussian window `W(x) = exp(−x²/(2σ²))`, keeping the
/// observable away from the walls.
pub fn windowed_observable(grid: &Grid, h: &HermitianOperator, g: &SmoothCutoff, sigma: f64) -> Result<HermitianOperator> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::OutOfRange { name: "sigma", value: sigma, reason: "window width must be positive".into() });
    }
    let gh = apply_eig(h, g)?;
    let w = grid.sample(|x| (-x * x / (2.0 * sigma * sigma)).exp());
    hermitize(diag_sandwich(&w, gh.matrix(), &w), format!("W {} W", gh.label()))
}

/// Terms and remainder of `[B, f(A/s)] = Σ_{k<n} s^{-k}/k! f^(k)(A/s) ad_A^k B + s^{-n} R_n`,
/// all in the eigenbasis of `A`.
#[derive(Clone, Debug)]
pub struct Expansion {
    pub terms: Vec<Mat<c64>>,
    /// `s^{-n} R_n`.
    pub remainder: Mat<c64>,
    pub s: f64,
    pub n: usize,
}

impl Expansion {
    /// `R_n = s^n · remainder`.
    pub fn scaled_remainder(&self) -> Mat<c64> {
        let c = self.s.powi(self.n as i32);
        Mat::from_fn(self.remainder.nrows(), self.remainder.ncols(), |i, j| self.remainder[(i, j)] * c)
    }
}

fn check_expansion_args(f: &SmoothCutoff, n: usize, s: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::OutOfRange { name: "n", value: n as f64, reason: "expansion order must be at least 2".into() });
    }
    if !(s.is_finite() && s >= 1.0) {
        return Err(Error::OutOfRange { name: "s", value: s, reason: "scale must be at least 1".into() });
    }
    if f.order() >= n as f64 {
        return Err(Error::OrderViolation { order: f.order(), n });
    }
    Ok(())
}

/// Derivatives `f^(k)(a_i/s)` for `k = 0..=n`.
fn derivative_table(a: &[f64], f: &SmoothCutoff, n: usize, s: f64) -> Vec<Vec<f64>> {
    a.iter().map(|&ai| f.derivatives(ai / s, n)).collect()
}

/// The expansion (left derivative factors), with `ad_A(B) = [B, A]`.
pub fn expand(basis: &ExpansionBasis, f: &SmoothCutoff, n: usize, s: f64) -> Result<Expansion> {
    check_expansion_args(f, n, s)?;
    let a = basis.eigenvalues();
    let d = derivative_table(a, f, n, s);
    let dim = basis.dim();
    let mut remainder = Mat::from_fn(dim, dim, |i, j| basis.b[(i, j)] * (d[j][0] - d[i][0]));
    let mut terms = Vec::with_capacity(n - 1);
    for k in 1..n {
        let c = s.powi(-(k as i32)) / factorial(k);
        let t = Mat::from_fn(dim, dim, |i, j| basis.b[(i, j)] * ((a[j] - a[i]).powi(k as i32) * d[i][k] * c));
        remainder -= &t;
        terms.push(t);
    }
    Ok(Expansion { terms, remainder, s, n })
}

/// The adjoint expansion `[B, f] = Σ (−1)^(k−1)/k! s^{-k} ad_A^k B f^(k)(A/s) − R_n*`.
/// Returns `R_n*` as the remainder (already multiplied by `s^{-n}`).
pub fn adjoint_expand(basis: &ExpansionBasis, f: &SmoothCutoff, n: usize, s: f64) -> Result<Expansion> {
    check_expansion_args(f, n, s)?;
    let a = basis.eigenvalues();
    let d = derivative_table(a, f, n, s);
    let dim = basis.dim();
    let commutator = Mat::from_fn(dim, dim, |i, j| basis.b[(i, j)] * (d[j][0] - d[i][0]));
    let mut sum = Mat::<c64>::zeros(dim, dim);
    let mut terms = Vec::with_capacity(n - 1);
    for k in 1..n {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let c = sign * s.powi(-(k as i32)) / factorial(k);
        let t = Mat::from_fn(dim, dim, |i, j| basis.b[(i, j)] * ((a[j] - a[i]).powi(k as i32) * d[j][k] * c));
        sum += &t;
        terms.push(t);
    }
    Ok(Expansion { terms, remainder: sum - commutator, s, n })
}

/// `Σ_{k=0}^{n+2} ∫ (1+|x|)^{k−n−1} |f^(k)(x)| dx`.
///
/// The tails are scanned first: if `|x| · integrand` does not decay between
/// `|x| = 10^3` and `10^6`, the integral is reported as divergent.
pub fn remainder_bound_factor(f: &SmoothCutoff, n: usize) -> Result<f64> {
    let integrand = |x: f64| -> f64 {
        let d = f.derivatives(x, n + 2);
        (0..=n + 2).map(|k| (1.0 + x.abs()).powf(k as f64 - n as f64 - 1.0) * d[k].abs()).sum()
    };
    for sign in [-1.0, 1.0] {
        let tail: Vec<f64> = [1e3, 1e4, 1e5, 1e6].iter().map(|&r| r * integrand(sign * r)).collect();
        let decaying = tail.windows(2).all(|w| w[1] <= w[0] * 0.9 || w[1] == 0.0) || tail.iter().all(|t| *t == 0.0);
        if !decaying {
            return Err(Error::DivergentIntegral(format!("{}: |x| times integrand does not decay, {tail:?}", f.label())));
        }
    }
    let tol = Tolerance { abs: 1e-12, rel: 1e-8, max_panels: 4000 };
    let value = match f.support() {
        Support::Compact(a, b) => adaptive(integrand, a, b, 16, tol)?.0,
        _ => {
            // split so the transition region is resolved
            let w = f.width().max(1e-3);
            let (lo, hi) = match f.support() {
                Support::Left(b) => (b - 4.0 * w, b),
                Support::Right(a) => (a, a + 4.0 * w),
                _ => (-4.0 * w, 4.0 * w),
            };
            let mid = adaptive(integrand, lo, hi, 16, tol)?.0;
            let outer = adaptive_real_line(|x| if x > lo && x < hi { 0.0 } else { integrand(x) }, tol)?.0;
            mid + outer
        }
    };
    if !value.is_finite() {
        return Err(Error::DivergentIntegral(f.label().to_string()));
    }
    Ok(value)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub cutoff: String,
    pub n: usize,
    pub ladder: Vec<f64>,
    /// `‖s^{-n} R_n‖` per scale.
    pub remainder_norms: Vec<f64>,
    /// `‖s^{-k}/k! f^(k)(A/s) ad^k B‖` per scale, `k = 1..n−1`.
    pub term_norms: Vec<Vec<f64>>,
    pub fit: Option<DecayFit>,
    pub ad_norm: f64,
    pub bound_factor: f64,
    /// `‖s^{-n} R_n‖ / (s^{-n} ‖ad^n B‖ · bound_factor)` per scale.
    pub c_hat: Vec<f64>,
    pub c_hat_max: f64,
    pub c_hat_trend: f64,
}

/// Remainder norms over a scale ladder, the log-log fit and the `ĉ_n` estimates.
pub fn expansion_ladder(basis: &ExpansionBasis, f: &SmoothCutoff, n: usize, ladder: &[f64]) -> Result<ExpansionReport> {
    if ladder.len() < 4 || ladder.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::DegenerateLadder("need at least 4 strictly increasing scales".into()));
    }
    let bound_factor = remainder_bound_factor(f, n)?;
    let ad_norm = operator_norm(&basis.ad_power(n))?;
    let mut remainder_norms = Vec::new();
    let mut term_norms = Vec::new();
    for &s in ladder {
        let e = expand(basis, f, n, s)?;
        remainder_norms.push(operator_norm(&e.remainder)?);
        term_norms.push(e.terms.iter().map(operator_norm).collect::<Result<Vec<_>>>()?);
    }
    let fit = fit_loglog(ladder, &remainder_norms, 1e-14).ok();
    Ok(remainder_bound_check(f.label(), n, ladder, remainder_norms, term_norms, fit, ad_norm, bound_factor))
}

/// Fills in `ĉ_n` and its trend across the ladder.
#[allow(clippy::too_many_arguments)]
pub fn remainder_bound_check(
    label: &str,
    n: usize,
    ladder: &[f64],
    remainder_norms: Vec<f64>,
    term_norms: Vec<Vec<f64>>,
    fit: Option<DecayFit>,
    ad_norm: f64,
    bound_factor: f64,
) -> ExpansionReport {
    let c_hat: Vec<f64> = ladder
        .iter()
        .zip(&remainder_norms)
        .map(|(s, r)| {
            let denom = s.powi(-(n as i32)) * ad_norm * bound_factor;
            if denom > 0.0 {
                r / denom
            } else {
                0.0
            }
        })
        .collect();
    let c_hat_max = c_hat.iter().copied().fold(0.0, f64::max);
    let c_hat_trend = if c_hat.iter().all(|c| *c > 0.0) { trend_slope(ladder, &c_hat) } else { 0.0 };
    ExpansionReport {
        cutoff: label.to_string(),
        n,
        ladder: ladder.to_vec(),
        remainder_norms,
        term_norms,
        fit,
        ad_norm,
        bound_factor,
        c_hat,
        c_hat_max,
        c_hat_trend,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportReport {
    pub shift: f64,
    pub ladder: Vec<f64>,
    /// `max_i |χ⁺(a_i − a) f((a_i − a)/s)|` over the ladder: exactly zero when the supports are disjoint.
    pub anchor_weight: f64,
    /// `‖χ⁺(A − a) f((A − a)/s)‖` formed as a matrix product, for the largest scale.
    pub anchor_norm: f64,
    pub norms: Vec<f64>,
    pub fit: Option<DecayFit>,
}

/// `‖χ⁺(A − a) B f((A − a)/s)‖` over the ladder, for `B` typically `g(H)`.
pub fn support_observation_check(basis: &ExpansionBasis, f: &SmoothCutoff, shift: f64, ladder: &[f64]) -> Result<SupportReport> {
    match f.support() {
        Support::Left(b) if b <= 0.0 => {}
        Support::Compact(_, b) if b <= 0.0 => {}
        _ => return Err(Error::Hypothesis(format!("{} must vanish on x >= 0", f.label()))),
    }
    let a: Vec<f64> = basis.eigenvalues().iter().map(|v| v - shift).collect();
    let dim = basis.dim();
    let chi: Vec<f64> = a.iter().map(|&v| if v >= 0.0 { 1.0 } else { 0.0 }).collect();
    let mut anchor_weight = 0.0f64;
    let mut norms = Vec::with_capacity(ladder.len());
    let mut anchor_norm = 0.0;
    for &s in ladder {
        let fv: Vec<f64> = a.iter().map(|&v| f.value(v / s)).collect();
        for (c, w) in chi.iter().zip(&fv) {
            anchor_weight = anchor_weight.max((c * w).abs());
        }
        let m = Mat::from_fn(dim, dim, |i, j| basis.b[(i, j)] * (chi[i] * fv[j]));
        norms.push(operator_norm(&m)?);
        let p = Mat::from_fn(dim, dim, |i, j| if i == j { c64::new(chi[i], 0.0) } else { c64::new(0.0, 0.0) });
        let q = Mat::from_fn(dim, dim, |i, j| if i == j { c64::new(fv[i], 0.0) } else { c64::new(0.0, 0.0) });
        let prod = basis.to_original(&p) * basis.to_original(&q);
        anchor_norm = operator_norm(&prod)?;
    }
    let fit = fit_loglog(ladder, &norms, 1e-14).ok();
    Ok(SupportReport { shift, ladder: ladder.to_vec(), anchor_weight, anchor_norm, norms, fit })
}
