//! Exact spectral evolution and the quantities tracked along a run.

use std::sync::Arc;

use faer::{c64, Col, Mat};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcalc::SmoothCutoff;
use crate::lattice::{Grid, HermitianOperator, WaveState};
use crate::operators::ConjugateOperator;
use crate::spectral::Spectrum;

/// Boundary mass above which a sample is no longer trusted.
pub const TRUST_MASS: f64 = 1e-8;

/// A Hamiltonian / conjugate-operator pair with both eigendecompositions and
/// the change of basis between them.
#[derive(Clone)]
pub struct Propagator {
    pub grid: Grid,
    pub h: HermitianOperator,
    pub a: ConjugateOperator,
    h_spec: Arc<Spectrum>,
    a_spec: Arc<Spectrum>,
    /// `U_A† U_H`.
    transfer: Arc<Mat<c64>>,
}

impl Propagator {
    pub fn new(grid: &Grid, h: &HermitianOperator, a: &ConjugateOperator) -> Result<Self> {
        if h.dim() != grid.len() || a.op.dim() != grid.len() {
            return Err(Error::ShapeMismatch { expected: grid.len(), got: h.dim() });
        }
        let h_spec = h.spectrum()?;
        let a_spec = a.op.spectrum()?;
        let transfer = a_spec.vectors.adjoint() * &h_spec.vectors;
        Ok(Self { grid: *grid, h: h.clone(), a: a.clone(), h_spec, a_spec, transfer: Arc::new(transfer) })
    }

    pub fn energies(&self) -> &[f64] {
        &self.h_spec.values
    }

    pub fn a_values(&self) -> &[f64] {
        &self.a_spec.values
    }

    pub fn h_spectrum(&self) -> &Spectrum {
        &self.h_spec
    }

    pub fn a_spectrum(&self) -> &Spectrum {
        &self.a_spec
    }

    /// `U_A† U_H`.
    pub fn transfer(&self) -> &Mat<c64> {
        &self.transfer
    }

    /// Coefficients in the eigenbasis of `H`.
    pub fn to_energy(&self, psi: &WaveState) -> Vec<c64> {
        mul_adjoint(&self.h_spec.vectors, psi.amplitudes())
    }

    pub fn from_energy(&self, c: &[c64]) -> WaveState {
        WaveState::new(mul(&self.h_spec.vectors, c), self.grid.spacing())
    }

    /// Energy-basis coefficients mapped to the eigenbasis of `A`.
    pub fn energy_to_a(&self, c: &[c64]) -> Vec<c64> {
        mul(&self.transfer, c)
    }

    pub fn a_to_energy(&self, c: &[c64]) -> Vec<c64> {
        mul_adjoint(&self.transfer, c)
    }

    pub fn apply_h(&self, psi: &WaveState, f: impl Fn(f64) -> f64) -> WaveState {
        WaveState::new(self.h_spec.apply(psi.amplitudes(), f), psi.spacing())
    }

    pub fn apply_a(&self, psi: &WaveState, f: impl Fn(f64) -> f64) -> WaveState {
        WaveState::new(self.a_spec.apply(psi.amplitudes(), f), psi.spacing())
    }

    /// `e^{-iHt}` on energy coefficients.
    pub fn advance(&self, c: &[c64], t: f64) -> Vec<c64> {
        c.iter().zip(self.energies()).map(|(z, &e)| z * c64::cis(-e * t)).collect()
    }

    pub fn evolve_state(&self, psi: &WaveState, t: f64) -> WaveState {
        self.from_energy(&self.advance(&self.to_energy(psi), t))
    }

    /// `‖f(A) ψ‖` for `ψ` given by energy coefficients.
    pub fn a_weighted_norm(&self, c: &[c64], f: impl Fn(f64) -> f64) -> f64 {
        let ca = self.energy_to_a(c);
        let s: f64 = ca.iter().zip(self.a_values()).map(|(z, &l)| z.norm_sqr() * f(l).powi(2)).sum();
        (s * self.grid.spacing()).sqrt()
    }

    /// `h Σ_{|x_j| >= L − 4h} |ψ_j|²`.
    pub fn boundary_mass(&self, psi: &WaveState) -> f64 {
        let edge = self.grid.half_width() - 4.0 * self.grid.spacing();
        psi.mass_where(&self.grid, |x| x.abs() >= edge - 1e-12)
    }
}

pub(crate) fn mul(m: &Mat<c64>, v: &[c64]) -> Vec<c64> {
    let col = Col::from_fn(v.len(), |i| v[i]);
    let r = m * &col;
    r.iter().copied().collect()
}

pub(crate) fn mul_adjoint(m: &Mat<c64>, v: &[c64]) -> Vec<c64> {
    let col = Col::from_fn(v.len(), |i| v[i]);
    let r = m.adjoint() * &col;
    r.iter().copied().collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationRun {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub energies: Vec<f64>,
    pub a_mean: Vec<f64>,
    pub x2_mean: Vec<f64>,
    pub boundary_mass: Vec<f64>,
    /// Length of the trusted prefix.
    pub trusted: usize,
    #[serde(skip)]
    pub states: Vec<WaveState>,
}

impl PropagationRun {
    pub fn max_norm_drift(&self) -> f64 {
        self.norms.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn max_energy_drift(&self) -> f64 {
        let e0 = self.energies.first().copied().unwrap_or(0.0);
        self.energies.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max)
    }

    /// Time of the last trusted sample.
    pub fn horizon(&self) -> Option<f64> {
        self.trusted.checked_sub(1).map(|i| self.times[i])
    }
}

/// `ψ_t = U e^{−iΛt} U† ψ0` on the given samples, with the tracked series.
pub fn evolve(prop: &Propagator, psi0: &WaveState, times: &[f64], keep_states: bool) -> Result<PropagationRun> {
    if (psi0.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::OutOfRange { name: "psi0", value: psi0.norm(), reason: "initial state must be normalized".into() });
    }
    if times.windows(2).any(|w| w[1] <= w[0]) || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::OutOfRange { name: "times", value: f64::NAN, reason: "sample times must increase".into() });
    }
    let c0 = prop.to_energy(psi0);
    let x2 = prop.grid.sample(|x| x * x);
    let mut run = PropagationRun {
        times: times.to_vec(),
        norms: vec![],
        energies: vec![],
        a_mean: vec![],
        x2_mean: vec![],
        boundary_mass: vec![],
        trusted: 0,
        states: vec![],
    };
    let mut trusted = true;
    for &t in times {
        let psi = prop.from_energy(&prop.advance(&c0, t));
        run.norms.push(psi.norm());
        run.energies.push(raw_mean(prop.h.matrix(), &psi));
        run.a_mean.push(raw_mean(prop.a.matrix(), &psi));
        run.x2_mean.push(psi.spacing() * psi.amplitudes().iter().zip(&x2).map(|(z, w)| z.norm_sqr() * w).sum::<f64>());
        let bm = prop.boundary_mass(&psi);
        run.boundary_mass.push(bm);
        trusted &= bm <= TRUST_MASS;
        if trusted {
            run.trusted += 1;
        }
        if keep_states {
            run.states.push(psi);
        }
    }
    Ok(run)
}

/// `h Re⟨ψ, Mψ⟩`.
pub(crate) fn raw_mean(m: &Mat<c64>, psi: &WaveState) -> f64 {
    let mv = mul(m, psi.amplitudes());
    psi.spacing() * psi.amplitudes().iter().zip(&mv).map(|(a, b)| (a.conj() * b).re).sum::<f64>()
}

/// Gaussian packet `exp(−(x−x0)²/(2σ²) + i k0 x)`, normalized.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianSeed {
    pub center: f64,
    pub momentum: f64,
    pub width: f64,
}

impl GaussianSeed {
    pub fn new(center: f64, momentum: f64, width: f64) -> Self {
        Self { center, momentum, width }
    }

    pub fn state(&self, grid: &Grid) -> Result<WaveState> {
        if !(self.width > 0.0 && self.center.is_finite() && self.momentum.is_finite()) {
            return Err(Error::OutOfRange { name: "seed.width", value: self.width, reason: "seed needs a positive width".into() });
        }
        let s = *self;
        WaveState::from_fn(grid, |x| {
            let d = x - s.center;
            c64::cis(s.momentum * x) * (-d * d / (2.0 * s.width * s.width)).exp()
        })
        .normalized()
    }
}

#[derive(Clone, Debug)]
pub struct PreparedState {
    pub state: WaveState,
    /// `‖g(H) χ⁺(A − a) φ‖` before normalization.
    pub pre_norm: f64,
    /// `‖χ⁻(A − a) g(H) χ⁺(A − a) φ‖`, normalized like `state`.
    pub leak: f64,
    /// `‖[g(H), χ⁺(A − a)] φ‖`, normalized like `state`; bounds `leak`.
    pub commutator_bound: f64,
}

/// Smallest pre-normalization norm accepted by [`prepare_state`].
pub const MIN_PREPARED_NORM: f64 = 1e-6;

/// `ψ = g(H) χ⁺(A − a) φ`, normalized.
pub fn prepare_state(prop: &Propagator, g: &SmoothCutoff, a: f64, phi: &WaveState) -> Result<PreparedState> {
    let chi = |l: f64| if l >= a { 1.0 } else { 0.0 };
    let gf = |e: f64| g.value(e);
    let cut = prop.apply_a(phi, chi);
    let raw = prop.apply_h(&cut, gf);
    let pre_norm = raw.norm();
    if !(pre_norm > MIN_PREPARED_NORM) {
        return Err(Error::VanishingNorm { norm: pre_norm, limit: MIN_PREPARED_NORM });
    }
    let leak = prop.apply_a(&raw, |l| 1.0 - chi(l)).norm() / pre_norm;
    let other = prop.apply_a(&prop.apply_h(phi, gf), chi);
    let diff: Vec<c64> = raw.amplitudes().iter().zip(other.amplitudes()).map(|(x, y)| x - y).collect();
    let commutator_bound = WaveState::new(diff, phi.spacing()).norm() / pre_norm;
    Ok(PreparedState { state: raw.normalized()?, pre_norm, leak, commutator_bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_grid;
    use crate::operators::{build_dilation_generator, build_hamiltonian, PotentialModel};

    fn free(l: f64, n: usize) -> Propagator {
        let g = build_grid(l, n).unwrap();
        let h = build_hamiltonian(&g, &PotentialModel::zero(4)).unwrap();
        let a = build_dilation_generator(&g).unwrap();
        Propagator::new(&g, &h, &a).unwrap()
    }

    #[test]
    fn time_zero_returns_the_seed() {
        let p = free(16.0, 128);
        let psi = GaussianSeed::new(0.0, 1.0, 1.5).state(&p.grid).unwrap();
        let run = evolve(&p, &psi, &[0.0, 1.0], true).unwrap();
        let d: f64 = run.states[0].amplitudes().iter().zip(psi.amplitudes()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(d <= 1e-12);
        assert!(run.max_norm_drift() <= 1e-10);
    }

    #[test]
    fn norm_and_energy_are_conserved() {
        let p = free(16.0, 128);
        let psi = GaussianSeed::new(-2.0, 1.0, 1.0).state(&p.grid).unwrap();
        let times: Vec<f64> = (0..=20).map(|i| i as f64 * 5.0).collect();
        let run = evolve(&p, &psi, &times, false).unwrap();
        assert!(run.max_norm_drift() <= 1e-10);
        assert!(run.max_energy_drift() <= 1e-10);
    }

    #[test]
    fn free_packet_follows_ehrenfest() {
        let p = free(40.0, 384);
        let psi = GaussianSeed::new(-5.0, 1.0, 2.0).state(&p.grid).unwrap();
        let times: Vec<f64> = (0..=10).map(|i| i as f64).collect();
        let run = evolve(&p, &psi, &times, true).unwrap();
        let xs = p.grid.positions();
        let mean_x = |s: &WaveState| s.spacing() * s.amplitudes().iter().zip(&xs).map(|(z, x)| z.norm_sqr() * x).sum::<f64>();
        let p0 = crate::lattice::canonical_operators(&p.grid).unwrap();
        let pm = crate::expectation(&p0.p, &psi).unwrap();
        for (t, s) in run.times.iter().zip(&run.states).take(run.trusted) {
            assert!((mean_x(s) - (-5.0 + t * pm)).abs() <= 1e-6, "t = {t}");
        }
        assert_eq!(run.trusted, times.len());
    }

    #[test]
    fn preparation_filters_and_rejects() {
        let p = free(16.0, 128);
        let g = SmoothCutoff::bump(1.0, 2.0, 0.3).unwrap();
        let phi = GaussianSeed::new(0.0, 1.7, 1.0).state(&p.grid).unwrap();
        let prep = prepare_state(&p, &g, 0.0, &phi).unwrap();
        assert!(prep.leak <= prep.commutator_bound + 1e-12);
        let outside = p.apply_h(&prep.state, |e| 1.0 - SmoothCutoff::bump(0.9, 2.1, 0.1).unwrap().value(e)).norm();
        assert!(outside <= 1e-8);
        // an A-eigenvector below the threshold is filtered to zero
        let j = p.a_values().iter().position(|&l| l < -1.0 && l > -3.0).unwrap();
        let mut c = vec![c64::new(0.0, 0.0); p.grid.len()];
        c[j] = c64::new(1.0, 0.0);
        let v = WaveState::new(p.a_spectrum().synthesize(&c), p.grid.spacing()).normalized().unwrap();
        assert!(matches!(prepare_state(&p, &g, 0.0, &v), Err(Error::VanishingNorm { .. })));
    }
}
