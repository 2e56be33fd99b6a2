//! Mourre constants: analytic bound, sharp-projector obstruction, drift monitor.

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Grid, HermitianOperator};
use crate::operators::{dilation_derivatives, multi_commutator, ConjugateOperator, PotentialModel};
use crate::spectral::hermitian_eigenvalues;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MourreCertificate {
    pub interval: (f64, f64),
    /// `2 inf Δ − max(0, sup_grid(2V + xV′))`.
    pub theta_analytic: f64,
    /// `sup_grid(2V + xV′)` from the closed-form dilation derivative.
    pub grid_sup: f64,
    /// The same supremum from the Richardson λ-derivative oracle.
    pub oracle_sup: f64,
    /// Supremum over the whole line, in closed form.
    pub true_sup: f64,
    pub compression_min_eig: Option<f64>,
    pub subspace_dim: Option<usize>,
    pub method: String,
}

/// `θ = 2 inf Δ − sup(2V + xV′)`, from `i[H, A] = 2H − (2V + xV′)`.
///
/// A negative grid supremum is replaced by 0, so that `θ <= 2 inf Δ`; this
/// only weakens the bound.
pub fn analytic_lower_bound(grid: &Grid, v: &PotentialModel, delta: (f64, f64)) -> Result<MourreCertificate> {
    let (lo, hi) = delta;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::OutOfRange { name: "delta", value: hi - lo, reason: "needs finite lo < hi".into() });
    }
    let xs = grid.positions();
    let grid_sup = xs.iter().map(|&x| 2.0 * v.value(x) + v.virial(x)).fold(f64::NEG_INFINITY, f64::max);
    let oracle_sup = if v.n_max >= 1 {
        let d1 = dilation_derivatives(grid, v, 1)?;
        xs.iter().zip(&d1).map(|(&x, d)| 2.0 * v.value(x) + d).fold(f64::NEG_INFINITY, f64::max)
    } else {
        grid_sup
    };
    Ok(MourreCertificate {
        interval: delta,
        theta_analytic: 2.0 * lo - grid_sup.max(0.0),
        grid_sup,
        oracle_sup,
        true_sup: v.virial_sup(),
        compression_min_eig: None,
        subspace_dim: None,
        method: "analytic".into(),
    })
}

/// Minimum eigenvalue of `E_Δ i[H, A] E_Δ` restricted to `Ran E_Δ`, with the subspace dimension.
///
/// In finite dimensions the compression has zero diagonal in the eigenbasis of
/// `H`, so this is never positive.
pub fn compression_mineig(h: &HermitianOperator, a: &ConjugateOperator, delta: (f64, f64)) -> Result<(f64, usize)> {
    let spec = h.spectrum()?;
    let idx: Vec<usize> = (0..spec.dim()).filter(|&j| spec.values[j] >= delta.0 && spec.values[j] <= delta.1).collect();
    if idx.is_empty() {
        return Err(Error::EmptyWindow { lo: delta.0, hi: delta.1 });
    }
    let comm = multi_commutator(h, a, 1)?;
    let n = spec.dim();
    let basis = Mat::from_fn(n, idx.len(), |i, j| spec.vectors[(i, idx[j])]);
    let compressed: Mat<c64> = basis.adjoint() * comm.matrix() * &basis;
    let d = idx.len();
    let herm = Mat::from_fn(d, d, |i, j| (compressed[(i, j)] + compressed[(j, i)].conj()) * 0.5);
    let eig = hermitian_eigenvalues(&herm)?;
    Ok((eig[0], d))
}

/// Certificate with the obstruction value filled in.
pub fn certify(
    grid: &Grid,
    v: &PotentialModel,
    h: &HermitianOperator,
    a: &ConjugateOperator,
    delta: (f64, f64),
) -> Result<MourreCertificate> {
    let mut cert = analytic_lower_bound(grid, v, delta)?;
    let (m, d) = compression_mineig(h, a, delta)?;
    cert.compression_min_eig = Some(m);
    cert.subspace_dim = Some(d);
    cert.method = "analytic+compression".into();
    Ok(cert)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    /// `max |d/dt⟨A⟩ − ⟨i[H,A]⟩|` over the window.
    pub heisenberg_deviation: f64,
    /// `min d/dt⟨A⟩` over the window.
    pub min_rate: f64,
    pub margin: f64,
    pub samples: usize,
    pub pass: bool,
}

/// Checks `d/dt⟨A⟩_t = ⟨i[H,A]⟩_t` and `d/dt⟨A⟩_t >= ϑ` over the trusted window.
///
/// `a_minus` and `a_plus` are `⟨A⟩` at `t ∓ dt`; the derivative is their centered difference.
pub fn drift_monitor(a_minus: &[f64], a_plus: &[f64], dt: f64, commutator: &[f64], trusted: usize, vartheta: f64) -> Result<DriftReport> {
    let n = trusted.min(a_minus.len()).min(a_plus.len()).min(commutator.len());
    if n < 10 {
        return Err(Error::WindowTooShort { needed: 10, got: n });
    }
    let mut dev = 0.0f64;
    let mut min_rate = f64::INFINITY;
    for i in 0..n {
        let rate = (a_plus[i] - a_minus[i]) / (2.0 * dt);
        dev = dev.max((rate - commutator[i]).abs());
        min_rate = min_rate.min(rate);
    }
    let margin = min_rate - vartheta;
    Ok(DriftReport { heisenberg_deviation: dev, min_rate, margin, samples: n, pass: margin >= 0.0 && dev <= 1e-6 })
}
