//! Heisenberg-derivative checks, time averages, growth fits and local-decay probes.

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use super::experiments::{x2_ts, SpectralSandwich};
use super::fit::trend_slope;
use super::run::{mul, raw_mean, PropagationRun, Propagator};
use crate::error::{Error, Result};
use crate::funcalc::SmoothCutoff;
use crate::lattice::{Grid, HermitianOperator, WaveState};
use crate::operators::multi_commutator;
use crate::spectral::{hermitian_eigenvalues, operator_norm, Spectrum};

/// Observables `Φ(t)` whose Heisenberg derivative `i[H, Φ] + ∂_tΦ` is checked.
#[derive(Clone, Debug)]
pub enum TrackedObservable {
    /// `A` itself, with `D_t A = i[H, A]`.
    Conjugate,
    /// `χ²(x²_ts)` with `x²_ts = (x² − 2at − ϑt²)/s²`.
    Position { chi: SmoothCutoff, a: f64, vartheta: f64, s: f64 },
    /// `g(H) F²(A_ts) g(H)` with `A_ts = (A − a − θt)/s`.
    Spectral { g: SmoothCutoff, f: SmoothCutoff, a: f64, theta: f64, s: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeisenbergReport {
    pub times: Vec<f64>,
    /// Centered differences of `⟨Φ(t)⟩_t`.
    pub finite_difference: Vec<f64>,
    /// `⟨i[H, Φ(t)] + ∂_tΦ(t)⟩_t`.
    pub heisenberg: Vec<f64>,
    /// The factored form `−2ts⁻² ⟨u (t⁻¹(A − a) − ϑ) u⟩` for the position observable.
    pub factored: Option<Vec<f64>>,
    pub max_deviation: f64,
    pub factored_deviation: Option<f64>,
    pub dt: f64,
    pub refined: bool,
}

/// Tolerance for `|d/dt⟨Φ⟩ − ⟨D_tΦ⟩|`.
pub const HEISENBERG_TOL: f64 = 1e-6;

struct Evaluator<'a> {
    prop: &'a Propagator,
    obs: &'a TrackedObservable,
    commutator: Option<HermitianOperator>,
}

impl<'a> Evaluator<'a> {
    fn new(prop: &'a Propagator, obs: &'a TrackedObservable) -> Result<Self> {
        let commutator = match obs {
            TrackedObservable::Conjugate => Some(multi_commutator(&prop.h, &prop.a, 1)?),
            _ => None,
        };
        Ok(Self { prop, obs, commutator })
    }

    /// `Im⟨Hw, φ w⟩` for a real diagonal or an `A`-function `φ` applied to `w`.
    fn im_h(&self, w: &WaveState, phi_w: &[c64]) -> f64 {
        let hw = mul(self.prop.h.matrix(), w.amplitudes());
        w.spacing() * hw.iter().zip(phi_w).map(|(a, b)| (a.conj() * b).im).sum::<f64>()
    }

    fn value(&self, psi: &WaveState, t: f64) -> f64 {
        match self.obs {
            TrackedObservable::Conjugate => raw_mean(self.prop.a.matrix(), psi),
            TrackedObservable::Position { chi, a, vartheta, s } => {
                let y = x2_ts(self.prop, *a, *vartheta, *s, t);
                psi.spacing() * psi.amplitudes().iter().zip(&y).map(|(z, &y)| z.norm_sqr() * chi.value(y).powi(2)).sum::<f64>()
            }
            TrackedObservable::Spectral { g, f, a, theta, s } => {
                let w = self.prop.apply_h(psi, |e| g.value(e));
                self.prop.apply_a(&w, |l| f.value((l - a - theta * t) / s)).norm_squared()
            }
        }
    }

    fn derivative(&self, psi: &WaveState, t: f64) -> Result<(f64, Option<f64>)> {
        match self.obs {
            TrackedObservable::Conjugate => {
                let c = self.commutator.as_ref().ok_or_else(|| Error::Eigen("missing commutator".into()))?;
                Ok((raw_mean(c.matrix(), psi), None))
            }
            TrackedObservable::Position { chi, a, vartheta, s } => {
                let y = x2_ts(self.prop, *a, *vartheta, *s, t);
                let d: Vec<[f64; 2]> = y
                    .iter()
                    .map(|&y| {
                        let j = chi.derivatives(y, 1);
                        [j[0] * j[0], 2.0 * j[0] * j[1]]
                    })
                    .collect();
                let phi_w: Vec<c64> = psi.amplitudes().iter().zip(&d).map(|(z, d)| z * d[0]).collect();
                let comm = -2.0 * self.im_h(psi, &phi_w);
                let rate = (-2.0 * a - 2.0 * vartheta * t) / (s * s);
                let dt: f64 = psi.spacing() * psi.amplitudes().iter().zip(&d).map(|(z, d)| z.norm_sqr() * d[1] * rate).sum::<f64>();
                // f′ = −u²
                let u: Vec<c64> = psi.amplitudes().iter().zip(&d).map(|(z, d)| z * (-d[1]).max(0.0).sqrt()).collect();
                let uw = WaveState::new(u, psi.spacing());
                let factored = -2.0 / (s * s) * (raw_mean(self.prop.a.matrix(), &uw) - (a + vartheta * t) * uw.norm_squared());
                Ok((comm + dt, Some(factored)))
            }
            TrackedObservable::Spectral { g, f, a, theta, s } => {
                let w = self.prop.apply_h(psi, |e| g.value(e));
                let shift = a + theta * t;
                let fw = self.prop.apply_a(&w, |l| f.value((l - shift) / s).powi(2));
                let comm = -2.0 * self.im_h(&w, fw.amplitudes());
                let fp = self.prop.apply_a(&w, |l| {
                    let j = f.derivatives((l - shift) / s, 1);
                    2.0 * j[0] * j[1]
                });
                let dt = -theta / s * w.inner(&fp).re;
                Ok((comm + dt, None))
            }
        }
    }

    fn sweep(&self, psi0: &WaveState, times: &[f64], dt: f64) -> Result<HeisenbergReport> {
        let c0 = self.prop.to_energy(psi0);
        let at = |t: f64| self.prop.from_energy(&self.prop.advance(&c0, t));
        let mut fd = Vec::with_capacity(times.len());
        let mut hz = Vec::with_capacity(times.len());
        let mut fac = Vec::new();
        for &t in times {
            let plus = self.value(&at(t + dt), t + dt);
            let minus = self.value(&at(t - dt), t - dt);
            fd.push((plus - minus) / (2.0 * dt));
            let (d, f) = self.derivative(&at(t), t)?;
            hz.push(d);
            if let Some(f) = f {
                fac.push(f);
            }
        }
        let max_deviation = fd.iter().zip(&hz).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let factored = if fac.is_empty() { None } else { Some(fac) };
        let factored_deviation = factored.as_ref().map(|f| f.iter().zip(&hz).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        Ok(HeisenbergReport {
            times: times.to_vec(),
            finite_difference: fd,
            heisenberg: hz,
            factored,
            max_deviation,
            factored_deviation,
            dt,
            refined: false,
        })
    }
}

/// Compares `d/dt⟨Φ(t)⟩_t`, by centered differences with step `dt`, against
/// `⟨i[H, Φ(t)] + ∂_tΦ(t)⟩_t`. Halves `dt` once if the deviation exceeds [`HEISENBERG_TOL`].
pub fn heisenberg_derivative_check(
    prop: &Propagator,
    psi0: &WaveState,
    obs: &TrackedObservable,
    times: &[f64],
    dt: f64,
) -> Result<HeisenbergReport> {
    if !(dt > 0.0) {
        return Err(Error::OutOfRange { name: "dt", value: dt, reason: "must be positive".into() });
    }
    let ev = Evaluator::new(prop, obs)?;
    let first = ev.sweep(psi0, times, dt)?;
    if first.max_deviation <= HEISENBERG_TOL {
        return Ok(first);
    }
    let mut second = ev.sweep(psi0, times, dt / 2.0)?;
    second.refined = true;
    Ok(second)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DtNormScan {
    pub ladder: Vec<f64>,
    /// `sup_t ‖D_tφ_s(t)‖` over the sampled `t <= s`.
    pub norms: Vec<f64>,
    /// Largest ratio of a norm to the first one.
    pub growth: f64,
    pub bounded: bool,
}

/// `sup_t ‖D_tφ_s(t)‖` for `φ_s(t) = g(H) f(A_ts) g(H)`, `f = F²`, over `t ∈ {s/4, s/2, 3s/4, s}`.
pub fn dt_norm_scan(prop: &Propagator, g: &SmoothCutoff, f_root: &SmoothCutoff, a: f64, theta: f64, ladder: &[f64]) -> Result<DtNormScan> {
    let f = f_root.power(2.0)?;
    let sandwich = SpectralSandwich::new(prop, g);
    let mut norms = Vec::new();
    for &s in ladder {
        let mut sup = 0.0f64;
        for k in 1..=4 {
            let t = s * k as f64 / 4.0;
            let m = sandwich.heisenberg_matrix(prop.a_values(), &f, a + theta * t, s, -theta / s);
            let herm = Mat::from_fn(m.nrows(), m.ncols(), |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
            let ev = hermitian_eigenvalues(&herm)?;
            sup = sup.max(ev.iter().map(|v| v.abs()).fold(0.0, f64::max));
        }
        norms.push(sup);
    }
    let first = norms.first().copied().unwrap_or(0.0);
    let growth = if first > 0.0 { norms.iter().map(|n| n / first).fold(0.0, f64::max) } else { f64::INFINITY };
    Ok(DtNormScan { ladder: ladder.to_vec(), norms, growth, bounded: growth <= 2.0 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuelleReport {
    pub radius: f64,
    pub times: Vec<f64>,
    /// `T⁻¹ ∫₀ᵀ ‖1_{|x| <= R} ψ_t‖² dt`; the first entry is the initial interior mass.
    pub averages: Vec<f64>,
    pub decreasing: bool,
    /// `(max − min) / max` of the averages.
    pub relative_variation: f64,
}

/// Time averages of the interior mass over the trusted part of a run with stored states.
pub fn ruelle_time_average(run: &PropagationRun, grid: &Grid, radius: f64) -> Result<RuelleReport> {
    if !(radius > 0.0 && radius < grid.half_width() / 2.0) {
        return Err(Error::OutOfRange { name: "radius", value: radius, reason: "needs 0 < R < L/2".into() });
    }
    let n = run.trusted.min(run.states.len());
    if n < 2 {
        return Err(Error::WindowTooShort { needed: 2, got: n });
    }
    let mass: Vec<f64> = run.states[..n].iter().map(|s| s.mass_where(grid, |x| x.abs() <= radius)).collect();
    let times = &run.times[..n];
    let t0 = times[0];
    let mut integral = 0.0;
    let mut averages = vec![mass[0]];
    for i in 1..n {
        integral += 0.5 * (mass[i] + mass[i - 1]) * (times[i] - times[i - 1]);
        averages.push(integral / (times[i] - t0));
    }
    let max = averages.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = averages.iter().copied().fold(f64::INFINITY, f64::min);
    let decreasing = averages.windows(2).all(|w| w[1] <= w[0] + 1e-12) && averages[n - 1] < averages[0];
    Ok(RuelleReport {
        radius,
        times: times.to_vec(),
        averages,
        decreasing,
        relative_variation: if max > 0.0 { (max - min) / max } else { 0.0 },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct X2Growth {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub vartheta: f64,
    pub pass: bool,
}

/// Least-squares fit `⟨x²⟩_t = c₀ + c₁t + c₂t²` over the trusted window; passes if `c₂ >= ϑ`.
pub fn x2_growth_check(run: &PropagationRun, vartheta: f64) -> Result<X2Growth> {
    let n = run.trusted.min(run.x2_mean.len());
    if n < 4 {
        return Err(Error::WindowTooShort { needed: 4, got: n });
    }
    let t = &run.times[..n];
    let y = &run.x2_mean[..n];
    let mut m = Mat::<f64>::zeros(3, 3);
    let mut r = [0.0; 3];
    for (ti, yi) in t.iter().zip(y) {
        let b = [1.0, *ti, ti * ti];
        for i in 0..3 {
            r[i] += b[i] * yi;
            for j in 0..3 {
                m[(i, j)] += b[i] * b[j];
            }
        }
    }
    let c = solve3(&m, &r).ok_or_else(|| Error::DegenerateLadder("quadratic fit is singular".into()))?;
    Ok(X2Growth { c0: c[0], c1: c[1], c2: c[2], vartheta, pass: c[2] >= vartheta })
}

fn solve3(m: &Mat<f64>, r: &[f64; 3]) -> Option<[f64; 3]> {
    let det = |a: [[f64; 3]; 3]| {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let base: [[f64; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]));
    let d = det(base);
    if d.abs() < 1e-300 {
        return None;
    }
    Some(std::array::from_fn(|k| {
        let mut a = base;
        for i in 0..3 {
            a[i][k] = r[i];
        }
        det(a) / d
    }))
}

/// `ρ(A)^{−α} (z − H)^{−1} g(H) ρ(A)^{−α}` restricted to the range of `g(H)`.
pub struct ResolventProbe {
    energies: Vec<f64>,
    weights: Vec<f64>,
    /// `Λ^{1/2} V†` where `V Λ V†` is the Gram matrix of the weighted range.
    factor: Mat<c64>,
}

impl ResolventProbe {
    pub fn new(prop: &Propagator, g: &SmoothCutoff, alpha: f64) -> Result<Self> {
        if !(alpha > 1.0) {
            return Err(Error::OutOfRange { name: "alpha", value: alpha, reason: "the weight needs alpha > 1".into() });
        }
        let idx: Vec<usize> = (0..prop.energies().len()).filter(|&j| g.value(prop.energies()[j]) != 0.0).collect();
        if idx.is_empty() {
            return Err(Error::EmptyWindow { lo: f64::NAN, hi: f64::NAN });
        }
        let t = prop.transfer();
        let rho2: Vec<f64> = prop.a_values().iter().map(|l| (1.0 + l * l).powf(-alpha)).collect();
        let m = idx.len();
        let ts = Mat::from_fn(t.nrows(), m, |i, j| t[(i, idx[j])]);
        let weighted = Mat::from_fn(t.nrows(), m, |i, j| ts[(i, j)] * rho2[i]);
        let gram = ts.adjoint() * &weighted;
        let gram = Mat::from_fn(m, m, |i, j| (gram[(i, j)] + gram[(j, i)].conj()) * 0.5);
        let spec = Spectrum::compute(&gram)?;
        let factor = Mat::from_fn(m, m, |i, j| spec.vectors[(j, i)].conj() * spec.values[i].max(0.0).sqrt());
        Ok(Self {
            energies: idx.iter().map(|&j| prop.energies()[j]).collect(),
            weights: idx.iter().map(|&j| g.value(prop.energies()[j])).collect(),
            factor,
        })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// The weighted resolvent norm at `z`.
    pub fn norm_at(&self, z: c64) -> Result<f64> {
        let r = &self.factor;
        let m = r.nrows();
        let d: Vec<c64> = self.energies.iter().zip(&self.weights).map(|(&e, &w)| c64::new(w, 0.0) / (z - e)).collect();
        let rd = Mat::from_fn(m, m, |i, j| r[(i, j)] * d[j]);
        operator_norm(&(&rd * r.adjoint()))
    }

    /// Supremum over `Re z` on `samples` equispaced points of `delta` together with the eigenvalues inside it.
    pub fn sup_over(&self, delta: (f64, f64), eta: f64, samples: usize) -> Result<f64> {
        let mut re: Vec<f64> = (0..samples).map(|i| delta.0 + (delta.1 - delta.0) * i as f64 / (samples - 1).max(1) as f64).collect();
        re.extend(self.energies.iter().copied().filter(|e| *e >= delta.0 && *e <= delta.1));
        let mut sup = 0.0f64;
        for x in re {
            sup = sup.max(self.norm_at(c64::new(x, eta))?);
        }
        Ok(sup)
    }
}

/// Twice the largest gap between consecutive eigenvalues of `H` inside `delta`.
pub fn spacing_floor(prop: &Propagator, delta: (f64, f64)) -> Result<f64> {
    let e: Vec<f64> = prop.energies().iter().copied().filter(|e| *e >= delta.0 && *e <= delta.1).collect();
    if e.len() < 2 {
        return Err(Error::EmptyWindow { lo: delta.0, hi: delta.1 });
    }
    Ok(2.0 * e.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalDecayReport {
    pub alpha: f64,
    pub floor: f64,
    pub etas: Vec<f64>,
    pub values: Vec<f64>,
    /// `max / min` of the values over the ladder.
    pub plateau_ratio: f64,
    pub horizon: Option<f64>,
    /// `∫₀^{T/2}` and `∫₀^T` of `‖ρ(A)^{−α} ψ_t‖²`.
    pub time_integrals: Option<(f64, f64)>,
    pub time_growth: Option<f64>,
}

/// Resolvent plateau over an `η` ladder above the spacing floor, and the time
/// integral of `‖ρ(A)^{−α} ψ_t‖²` over `[0, T]` if a state is supplied.
#[allow(clippy::too_many_arguments)]
pub fn local_decay_probe(
    prop: &Propagator,
    g: &SmoothCutoff,
    alpha: f64,
    delta: (f64, f64),
    etas: &[f64],
    samples: usize,
    time: Option<(&WaveState, f64)>,
) -> Result<LocalDecayReport> {
    let floor = spacing_floor(prop, delta)?;
    if let Some(&eta) = etas.iter().find(|e| **e < floor) {
        return Err(Error::BelowSpacingFloor { eta, floor });
    }
    let probe = ResolventProbe::new(prop, g, alpha)?;
    let values = etas.iter().map(|&eta| probe.sup_over(delta, eta, samples)).collect::<Result<Vec<_>>>()?;
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let (horizon, time_integrals, time_growth) = match time {
        Some((psi, horizon)) => {
            let (half, full) = weighted_time_integral(prop, psi, alpha, horizon)?;
            (Some(horizon), Some((half, full)), Some(full / half - 1.0))
        }
        None => (None, None, None),
    };
    Ok(LocalDecayReport { alpha, floor, etas: etas.to_vec(), values, plateau_ratio: max / min, horizon, time_integrals, time_growth })
}

/// `∫₀^{T/2}` and `∫₀^T` of `‖ρ(A)^{−α} ψ_t‖² dt` by the trapezoid rule with step `T/400`.
fn weighted_time_integral(prop: &Propagator, psi: &WaveState, alpha: f64, horizon: f64) -> Result<(f64, f64)> {
    if !(horizon > 0.0) {
        return Err(Error::OutOfRange { name: "horizon", value: horizon, reason: "must be positive".into() });
    }
    let c0 = prop.to_energy(psi);
    let steps = 400;
    let dt = horizon / steps as f64;
    let vals: Vec<f64> = (0..=steps)
        .map(|i| prop.a_weighted_norm(&prop.advance(&c0, i as f64 * dt), |l| (1.0 + l * l).powf(-alpha / 2.0)).powi(2))
        .collect();
    let trap = |v: &[f64]| v.windows(2).map(|w| 0.5 * (w[0] + w[1]) * dt).sum::<f64>();
    Ok((trap(&vals[..=steps / 2]), trap(&vals)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleDivergence {
    pub floor: f64,
    pub etas: Vec<f64>,
    pub values: Vec<f64>,
    /// Slope of `log value` against `log η`; `−1` for a simple pole.
    pub slope: f64,
}

/// The probe below the spacing floor, at `Re z` on an eigenvalue in `delta`: grows like `1/η`.
pub fn pole_divergence(prop: &Propagator, g: &SmoothCutoff, alpha: f64, delta: (f64, f64), etas: &[f64]) -> Result<PoleDivergence> {
    let floor = spacing_floor(prop, delta)?;
    let probe = ResolventProbe::new(prop, g, alpha)?;
    let mid = 0.5 * (delta.0 + delta.1);
    let e = probe
        .energies()
        .iter()
        .copied()
        .filter(|e| *e >= delta.0 && *e <= delta.1)
        .min_by(|a, b| (a - mid).abs().total_cmp(&(b - mid).abs()))
        .ok_or(Error::EmptyWindow { lo: delta.0, hi: delta.1 })?;
    let values = etas.iter().map(|&eta| probe.norm_at(c64::new(e, eta))).collect::<Result<Vec<_>>>()?;
    Ok(PoleDivergence { floor, etas: etas.to_vec(), slope: trend_slope(etas, &values), values })
}
