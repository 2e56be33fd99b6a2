//! Ladder experiments for the minimal-velocity estimates.

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use super::fit::{fit_loglog, DecayFit, DEFAULT_FLOOR};
use super::run::{prepare_state, GaussianSeed, Propagator, TRUST_MASS};
use crate::error::{Error, Result};
use crate::funcalc::{check_decreasing_left_class, SmoothCutoff};
use crate::lattice::{hermitize, HermitianOperator, WaveState};
use crate::spectral::{hermitian_eigenvalues, Spectrum};

/// Spread `max − min` of a set of slopes; NaN if the set is empty or any slope is NaN.
pub fn spread(values: &[f64]) -> f64 {
    if values.is_empty() || values.iter().any(|v| v.is_nan()) {
        return f64::NAN;
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

fn try_fit(ladder: &[f64], values: &[f64]) -> (Option<DecayFit>, Option<String>) {
    match fit_loglog(ladder, values, DEFAULT_FLOOR) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    }
}

fn check_ladder(ladder: &[f64]) -> Result<()> {
    if ladder.len() < 4 || ladder.windows(2).any(|w| w[1] <= w[0]) || ladder[0] <= 0.0 {
        return Err(Error::DegenerateLadder("need at least 4 positive, strictly increasing scales".into()));
    }
    Ok(())
}

/// Prepared seeds as energy coefficients.
fn prepared_panel(prop: &Propagator, g: &SmoothCutoff, a: f64, seeds: &[GaussianSeed]) -> Result<(Vec<Vec<c64>>, Vec<f64>)> {
    if seeds.len() < 3 {
        return Err(Error::OutOfRange { name: "seeds", value: seeds.len() as f64, reason: "the panel needs at least 3 seeds".into() });
    }
    let mut coeffs = Vec::with_capacity(seeds.len());
    let mut pre = Vec::with_capacity(seeds.len());
    for seed in seeds {
        let p = prepare_state(prop, g, a, &seed.state(&prop.grid)?)?;
        pre.push(p.pre_norm);
        coeffs.push(prop.to_energy(&p.state));
    }
    Ok((coeffs, pre))
}

/// Largest boundary mass over a panel at time `t`.
fn panel_boundary_mass(prop: &Propagator, panel: &[Vec<c64>], t: f64) -> f64 {
    panel.iter().map(|c| prop.boundary_mass(&prop.from_energy(&prop.advance(c, t)))).fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thm11Params {
    pub a: f64,
    pub theta: f64,
    pub vartheta: f64,
    pub ladder: Vec<f64>,
    /// Interior times `t = k s / (interior + 1)` checked for uniformity in `t`.
    pub interior: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thm11Report {
    pub a: f64,
    pub ladder: Vec<f64>,
    /// Panel maximum of `‖F(s⁻¹(A − a − ϑs)) ψ_s‖`.
    pub values: Vec<f64>,
    pub per_seed: Vec<Vec<f64>>,
    /// Panel maximum of `‖F(s⁻¹(A − a)) ψ‖` at `t = 0`.
    pub anchor: Vec<f64>,
    pub fit: Option<DecayFit>,
    pub fit_error: Option<String>,
    /// Fit over the whole ladder, ignoring the trusted window; informational.
    pub full_fit: Option<DecayFit>,
    pub anchor_fit: Option<DecayFit>,
    pub anchor_fit_error: Option<String>,
    /// Largest `max_{t<s} value(t) / value(s)` over the ladder.
    pub interior_ratio: f64,
    pub uniform_in_t: bool,
    pub pre_norms: Vec<f64>,
    pub boundary_mass: Vec<f64>,
    /// Number of ladder points inside the trusted window.
    pub trusted_scales: usize,
}

impl Thm11Report {
    pub fn exponent(&self) -> Option<f64> {
        self.fit.as_ref().map(DecayFit::exponent)
    }
}

/// `‖F(s⁻¹(A − a − ϑt)) e^{−iHt} g(H) χ⁺(A − a) φ‖` on the diagonal `t = s`, maximized over a seed panel.
///
/// The margin `θ − ϑ` is carried by evaluating `F` at `s⁻¹(A − a − ϑt)` instead of
/// `s⁻¹(A − a − θt)`; both are admissible since `χ⁻(· − ϑ) <= F(· − θ)` for a suitable `F`.
pub fn thm11_decay_experiment(
    prop: &Propagator,
    g: &SmoothCutoff,
    f: &SmoothCutoff,
    params: &Thm11Params,
    seeds: &[GaussianSeed],
) -> Result<Thm11Report> {
    check_ladder(&params.ladder)?;
    if f.order() > 0.5 {
        return Err(Error::Hypothesis(format!("{} has order {} > 1/2", f.label(), f.order())));
    }
    check_decreasing_left_class(f)?;
    if !(params.vartheta < params.theta) {
        return Err(Error::Hypothesis(format!("vartheta {} must be below theta {}", params.vartheta, params.theta)));
    }
    let (panel, pre_norms) = prepared_panel(prop, g, params.a, seeds)?;
    let a = params.a;
    let value = |c: &[c64], s: f64, t: f64| {
        let ct = prop.advance(c, t);
        prop.a_weighted_norm(&ct, |l| f.value((l - a - params.vartheta * t) / s))
    };
    let mut per_seed = vec![Vec::new(); panel.len()];
    let mut values = Vec::new();
    let mut anchor = Vec::new();
    let mut boundary_mass = Vec::new();
    let mut interior_ratio = 0.0f64;
    for &s in &params.ladder {
        let mut vmax = 0.0f64;
        let mut amax = 0.0f64;
        let mut imax = 0.0f64;
        for (k, c) in panel.iter().enumerate() {
            let v = value(c, s, s);
            per_seed[k].push(v);
            vmax = vmax.max(v);
            amax = amax.max(prop.a_weighted_norm(c, |l| f.value((l - a) / s)));
            for i in 1..=params.interior {
                let t = s * i as f64 / (params.interior + 1) as f64;
                imax = imax.max(value(c, s, t));
            }
        }
        values.push(vmax);
        anchor.push(amax);
        if vmax > DEFAULT_FLOOR {
            interior_ratio = interior_ratio.max(imax / vmax);
        }
        boundary_mass.push(panel_boundary_mass(prop, &panel, s));
    }
    let trusted_scales = boundary_mass.iter().take_while(|m| **m <= TRUST_MASS).count();
    let (fit, fit_error) = try_fit(&params.ladder[..trusted_scales], &values[..trusted_scales]);
    let (anchor_fit, anchor_fit_error) = try_fit(&params.ladder, &anchor);
    let full_fit = try_fit(&params.ladder, &values).0;
    Ok(Thm11Report {
        a,
        ladder: params.ladder.clone(),
        values,
        per_seed,
        anchor,
        fit,
        fit_error,
        full_fit,
        anchor_fit,
        anchor_fit_error,
        interior_ratio,
        uniform_in_t: interior_ratio <= 2.0,
        pre_norms,
        boundary_mass,
        trusted_scales,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thm12Params {
    pub a: f64,
    pub vartheta: f64,
    /// Radius speed of the mass integral `∫_{|x| <= v t}`.
    pub speed: f64,
    pub ladder: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thm12Report {
    pub a: f64,
    pub speed: f64,
    pub ladder: Vec<f64>,
    /// Panel maximum of `‖χ(x²_ss) ψ_s‖`.
    pub norm_values: Vec<f64>,
    /// Panel maximum of `∫_{|x| <= v s} |ψ_s|²`.
    pub mass_values: Vec<f64>,
    /// Largest `‖χ(x²_0s) ψ‖` at `t = 0`.
    pub anchor_max: f64,
    pub norm_fit: Option<DecayFit>,
    pub norm_fit_error: Option<String>,
    pub mass_fit: Option<DecayFit>,
    pub mass_fit_error: Option<String>,
    /// Mass fit over the whole ladder, ignoring the trusted window; informational.
    pub full_mass_fit: Option<DecayFit>,
    pub boundary_mass: Vec<f64>,
    pub trusted_scales: usize,
}

impl Thm12Report {
    /// Mass slope minus twice the norm slope; the two forms agree when this is `<= 0.4`.
    pub fn consistency_gap(&self) -> Option<f64> {
        match (&self.norm_fit, &self.mass_fit) {
            (Some(n), Some(m)) => Some(m.slope - 2.0 * n.slope),
            _ => None,
        }
    }
}

/// `x²_ts = (x² − 2at − ϑt²)/s²` on the grid.
pub fn x2_ts(prop: &Propagator, a: f64, vartheta: f64, s: f64, t: f64) -> Vec<f64> {
    prop.grid.sample(|x| (x * x - 2.0 * a * t - vartheta * t * t) / (s * s))
}

/// Position-space escape at `t = s`: the smoothed norm `‖χ(x²_ss) ψ_s‖` and the
/// sharp mass inside `|x| <= v s`.
pub fn thm12_position_experiment(
    prop: &Propagator,
    g: &SmoothCutoff,
    chi: &SmoothCutoff,
    params: &Thm12Params,
    seeds: &[GaussianSeed],
) -> Result<Thm12Report> {
    check_ladder(&params.ladder)?;
    check_decreasing_left_class(chi)?;
    if !(params.speed >= 0.0) {
        return Err(Error::OutOfRange { name: "speed", value: params.speed, reason: "must be non-negative".into() });
    }
    let (panel, _) = prepared_panel(prop, g, params.a, seeds)?;
    let mut norm_values = Vec::new();
    let mut mass_values = Vec::new();
    let mut boundary_mass = Vec::new();
    let mut anchor_max = 0.0f64;
    for &s in &params.ladder {
        let w0: Vec<f64> = x2_ts(prop, params.a, params.vartheta, s, 0.0).iter().map(|&y| chi.value(y)).collect();
        let w: Vec<f64> = x2_ts(prop, params.a, params.vartheta, s, s).iter().map(|&y| chi.value(y)).collect();
        let (mut nmax, mut mmax, mut bmax) = (0.0f64, 0.0f64, 0.0f64);
        for c in &panel {
            let psi0 = prop.from_energy(c);
            anchor_max = anchor_max.max(weighted_norm(&psi0, &w0));
            let psi = prop.from_energy(&prop.advance(c, s));
            nmax = nmax.max(weighted_norm(&psi, &w));
            mmax = mmax.max(psi.mass_where(&prop.grid, |x| x.abs() <= params.speed * s));
            bmax = bmax.max(prop.boundary_mass(&psi));
        }
        norm_values.push(nmax);
        mass_values.push(mmax);
        boundary_mass.push(bmax);
    }
    let trusted_scales = boundary_mass.iter().take_while(|m| **m <= TRUST_MASS).count();
    let (norm_fit, norm_fit_error) = try_fit(&params.ladder[..trusted_scales], &norm_values[..trusted_scales]);
    let (mass_fit, mass_fit_error) = try_fit(&params.ladder[..trusted_scales], &mass_values[..trusted_scales]);
    let full_mass_fit = try_fit(&params.ladder, &mass_values).0;
    Ok(Thm12Report {
        a: params.a,
        speed: params.speed,
        ladder: params.ladder.clone(),
        norm_values,
        mass_values,
        anchor_max,
        norm_fit,
        norm_fit_error,
        mass_fit,
        mass_fit_error,
        full_mass_fit,
        boundary_mass,
        trusted_scales,
    })
}

/// `‖w ψ‖` for a real multiplier `w` on the grid.
pub(crate) fn weighted_norm(psi: &WaveState, w: &[f64]) -> f64 {
    (psi.spacing() * psi.amplitudes().iter().zip(w).map(|(z, w)| z.norm_sqr() * w * w).sum::<f64>()).sqrt()
}

/// `H` and `g(H)` expressed in the eigenbasis of `A`.
pub struct SpectralSandwich {
    pub h: Mat<c64>,
    pub g: Mat<c64>,
}

impl SpectralSandwich {
    pub fn new(prop: &Propagator, g: &SmoothCutoff) -> Self {
        let t = prop.transfer();
        let n = prop.grid.len();
        let e = prop.energies();
        let te = Mat::from_fn(n, n, |i, j| t[(i, j)] * e[j]);
        let tg = Mat::from_fn(n, n, |i, j| t[(i, j)] * g.value(e[j]));
        Self { h: &te * t.adjoint(), g: &tg * t.adjoint() }
    }

    /// `g(H) (i[H, f(A_*)] + c f′(A_*)) g(H)` where `A_* = (A − shift)/s` and the
    /// derivative term enters with coefficient `c`.
    pub fn heisenberg_matrix(&self, a_values: &[f64], f: &SmoothCutoff, shift: f64, s: f64, c: f64) -> Mat<c64> {
        let n = a_values.len();
        let d: Vec<Vec<f64>> = a_values.iter().map(|&l| f.derivatives((l - shift) / s, 1)).collect();
        let i = c64::new(0.0, 1.0);
        let inner = Mat::from_fn(n, n, |r, k| {
            let comm = self.h[(r, k)] * i * (d[k][0] - d[r][0]);
            if r == k {
                comm + c64::new(c * d[r][1], 0.0)
            } else {
                comm
            }
        });
        &self.g * &inner * &self.g
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma21Report {
    pub theta: f64,
    pub epsilon: f64,
    pub ladder: Vec<f64>,
    pub lambda_max: Vec<f64>,
    pub floor: f64,
    pub fit: Option<DecayFit>,
    pub fit_error: Option<String>,
    /// `−(1 + ε) + 0.3`.
    pub threshold: f64,
    pub below_floor: bool,
    pub pass: bool,
}

/// `λ_max` of `M(s) = g(H) i[H, f(A_s)] g(H) − s⁻¹θ g(H) f′(A_s) g(H)` over the ladder.
pub fn lemma21_residual_experiment(
    prop: &Propagator,
    g: &SmoothCutoff,
    f: &SmoothCutoff,
    theta: f64,
    epsilon: f64,
    a: f64,
    ladder: &[f64],
) -> Result<Lemma21Report> {
    check_ladder(ladder)?;
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::OutOfRange { name: "epsilon", value: epsilon, reason: "must lie in (0, 1]".into() });
    }
    if f.order() >= 4.0 {
        return Err(Error::Hypothesis(format!("{} has order {} >= 4", f.label(), f.order())));
    }
    check_decreasing_left_class(f)?;
    let sandwich = SpectralSandwich::new(prop, g);
    let mut lambda_max = Vec::new();
    for &s in ladder {
        let m = sandwich.heisenberg_matrix(prop.a_values(), f, a, s, -theta / s);
        let ev = hermitian_eigenvalues(hermitize(m, "M(s)")?.matrix())?;
        lambda_max.push(*ev.last().unwrap_or(&0.0));
    }
    let floor = DEFAULT_FLOOR;
    let clipped: Vec<f64> = lambda_max.iter().map(|l| l.max(floor)).collect();
    let (fit, fit_error) = try_fit(ladder, &clipped);
    let threshold = -(1.0 + epsilon) + 0.3;
    // M(s) <= 0 up to the floor everywhere satisfies the bound trivially
    let below_floor = lambda_max.iter().all(|l| *l <= floor);
    let pass = below_floor || fit.as_ref().is_some_and(|f| f.slope <= threshold);
    Ok(Lemma21Report { theta, epsilon, ladder: ladder.to_vec(), lambda_max, floor, fit, fit_error, threshold, below_floor, pass })
}

/// `φ` filtered by a bump in the spectrum of the momentum operator.
pub fn momentum_filtered_seed(p: &HermitianOperator, seed: &WaveState, window: &SmoothCutoff) -> Result<WaveState> {
    let spec: std::sync::Arc<Spectrum> = p.spectrum()?;
    let out = WaveState::new(spec.apply(seed.amplitudes(), |k| window.value(k)), seed.spacing());
    let n = out.norm();
    if !(n > 1e-6) {
        return Err(Error::VanishingNorm { norm: n, limit: 1e-6 });
    }
    out.normalized()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub speed: f64,
    pub ladder: Vec<f64>,
    pub mass: Vec<f64>,
    pub fit: Option<DecayFit>,
    pub fit_error: Option<String>,
    pub boundary_mass: Vec<f64>,
    pub trusted_scales: usize,
}

/// `∫_{|x| <= v t} |ψ_t|²` at `t = s` for a given initial state.
pub fn free_particle_baseline(prop: &Propagator, psi0: &WaveState, speed: f64, ladder: &[f64]) -> Result<BaselineReport> {
    check_ladder(ladder)?;
    let c0 = prop.to_energy(psi0);
    let mut mass = Vec::new();
    let mut boundary_mass = Vec::new();
    for &s in ladder {
        let psi = prop.from_energy(&prop.advance(&c0, s));
        mass.push(if speed == 0.0 { 0.0 } else { psi.mass_where(&prop.grid, |x| x.abs() <= speed * s) });
        boundary_mass.push(prop.boundary_mass(&psi));
    }
    let trusted_scales = boundary_mass.iter().take_while(|m| **m <= TRUST_MASS).count();
    let (fit, fit_error) = try_fit(&ladder[..trusted_scales], &mass[..trusted_scales]);
    Ok(BaselineReport { speed, ladder: ladder.to_vec(), mass, fit, fit_error, boundary_mass, trusted_scales })
}
