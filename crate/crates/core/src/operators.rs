//! Hamiltonians, conjugate operators and multi-commutators.

use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::funcalc::ramp_jet;
use crate::jet::Jet;
use crate::lattice::{canonical_operators, hermitize, CanonicalOperators, Grid, HermitianOperator};
use crate::quad::gauss_legendre;

/// Built-in potential families. Each is a function of `y = x²`, which makes
/// the dilation derivatives `(x d/dx)^k V = (2 y d/dy)^k v(y)`.
#[derive(Clone, Debug, PartialEq)]
pub enum PotentialKind {
    Zero,
    /// `ω² x² / 2`
    Harmonic {
        omega: f64,
    },
    /// `-c (1 + x²)^(-β)`
    LorentzWell {
        c: f64,
        beta: f64,
    },
    /// `-c exp(-x² / (2σ²))`
    GaussWell {
        c: f64,
        sigma: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PotentialModel {
    pub name: String,
    pub kind: PotentialKind,
    /// Smoothness budget: the number of commutators the experiments may use.
    pub n_max: usize,
}

impl PotentialModel {
    pub fn zero(n_max: usize) -> Self {
        Self { name: "zero".into(), kind: PotentialKind::Zero, n_max }
    }

    pub fn harmonic(omega: f64, n_max: usize) -> Result<Self> {
        check_param("omega", omega)?;
        Ok(Self { name: format!("harmonic({omega})"), kind: PotentialKind::Harmonic { omega }, n_max })
    }

    pub fn lorentz_well(c: f64, beta: f64, n_max: usize) -> Result<Self> {
        check_param("c", c)?;
        check_param("beta", beta)?;
        Ok(Self { name: format!("lorentz_well({c}, {beta})"), kind: PotentialKind::LorentzWell { c, beta }, n_max })
    }

    pub fn gauss_well(c: f64, sigma: f64, n_max: usize) -> Result<Self> {
        check_param("c", c)?;
        check_param("sigma", sigma)?;
        Ok(Self { name: format!("gauss_well({c}, {sigma})"), kind: PotentialKind::GaussWell { c, sigma }, n_max })
    }

    /// Looks up a potential by its configuration name.
    pub fn by_name(name: &str, params: &[f64], n_max: usize) -> Result<Self> {
        let arity = |n: usize| {
            if params.len() == n {
                Ok(())
            } else {
                Err(Error::OutOfRange {
                    name: "params",
                    value: params.len() as f64,
                    reason: format!("potential `{name}` takes {n} parameters"),
                })
            }
        };
        match name {
            "zero" => {
                arity(0)?;
                Ok(Self::zero(n_max))
            }
            "harmonic" => {
                arity(1)?;
                Self::harmonic(params[0], n_max)
            }
            "lorentz_well" => {
                arity(2)?;
                Self::lorentz_well(params[0], params[1], n_max)
            }
            "gauss_well" => {
                arity(2)?;
                Self::gauss_well(params[0], params[1], n_max)
            }
            other => Err(Error::Unknown { kind: "potential", name: other.to_string() }),
        }
    }

    /// `v(y)` as a jet, where `V(x) = v(x²)`.
    fn profile(&self, y: &Jet) -> Jet {
        match self.kind {
            PotentialKind::Zero => Jet::zero(y.order()),
            PotentialKind::Harmonic { omega } => y.scale(0.5 * omega * omega),
            PotentialKind::LorentzWell { c, beta } => y.offset(1.0).powf(-beta).scale(-c),
            PotentialKind::GaussWell { c, sigma } => y.scale(-0.5 / (sigma * sigma)).exp().scale(-c),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.profile(&Jet::constant(x * x, 0)).value()
    }

    /// `V(e^λ x)` as a jet in `λ` at `λ = 0`.
    fn lambda_jet(&self, x: f64, k: usize) -> Jet {
        let y = Jet::variable(0.0, k).scale(2.0).exp().scale(x * x);
        self.profile(&y)
    }

    /// Closed form `(x d/dx)^k V(x)` through Taylor arithmetic in `λ`.
    pub fn dilation_closed_form(&self, x: f64, k: usize) -> f64 {
        self.lambda_jet(x, k).derivative(k)
    }

    /// `x V'(x)`.
    pub fn virial(&self, x: f64) -> f64 {
        self.dilation_closed_form(x, 1)
    }

    /// `sup_x (2V + x V')` over the real line, in closed form.
    pub fn virial_sup(&self) -> f64 {
        match self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::Harmonic { .. } => f64::INFINITY,
            // 2V + xV' = -2c(1+y)^{-β-1}(1 + (1-β) y); for β <= 1 this is <= 0 with sup 0 at infinity
            PotentialKind::LorentzWell { c, beta } => {
                if beta <= 1.0 {
                    0.0
                } else {
                    // in u = 1 + y the derivative vanishes at u = (β+1)/(β-1)
                    let ystar = 2.0 / (beta - 1.0);
                    let f = |y: f64| -2.0 * c * (1.0 + y).powf(-beta - 1.0) * (1.0 + (1.0 - beta) * y);
                    f(ystar).max(0.0)
                }
            }
            // 2V + xV' = -2c e^{-y/2σ²}(1 - y/(2σ²)); max at y = 4σ², value 2c e^{-2}
            PotentialKind::GaussWell { c, .. } => 2.0 * c * (-2.0f64).exp(),
        }
    }
}

fn check_param(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange { name, value: v, reason: "must be finite and positive".into() })
    }
}

/// `(x d/dx)^k V` on the grid from `d^k/dλ^k V(e^λ x)` at `λ = 0`, by central
/// differences in `λ` and Richardson extrapolation in the step.
pub fn dilation_derivatives(grid: &Grid, v: &PotentialModel, k: usize) -> Result<Vec<f64>> {
    dilation_derivatives_of(grid, |x| v.value(x), k, v.n_max)
}

/// As [`dilation_derivatives`] for an arbitrary potential evaluator.
pub fn dilation_derivatives_of(grid: &Grid, v: impl Fn(f64) -> f64, k: usize, n_max: usize) -> Result<Vec<f64>> {
    if k == 0 || k > n_max {
        return Err(Error::OutOfRange { name: "k", value: k as f64, reason: format!("must be in 1..={n_max}") });
    }
    grid.positions().into_iter().map(|x| richardson_lambda(&v, x, k)).collect()
}

fn central_difference(v: &impl Fn(f64) -> f64, x: f64, k: usize, h: f64) -> f64 {
    let mut s = 0.0;
    let mut binom = 1.0;
    for j in 0..=k {
        let lam = (k as f64 / 2.0 - j as f64) * h;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * binom * v((lam).exp() * x);
        binom = binom * (k - j) as f64 / (j + 1) as f64;
    }
    s / h.powi(k as i32)
}

fn richardson_lambda(v: &impl Fn(f64) -> f64, x: f64, k: usize) -> Result<f64> {
    const LEVELS: usize = 5;
    let mut best = (f64::INFINITY, 0.0);
    let mut magnitude = 0.0f64;
    // the λ-scale of V(e^λ x) is unknown, so try several starting steps
    for h0 in [0.8, 0.4, 0.2, 0.1, 0.05, 0.025] {
        let mut table = [[0.0f64; LEVELS]; LEVELS];
        for i in 0..LEVELS {
            let h = h0 / 2f64.powi(i as i32);
            table[i][0] = central_difference(v, x, k, h);
            magnitude = magnitude.max(table[i][0].abs());
            let mut factor = 1.0;
            for j in 1..=i {
                factor *= 4.0;
                table[i][j] = table[i][j - 1] + (table[i][j - 1] - table[i - 1][j - 1]) / (factor - 1.0);
            }
            if i >= 1 {
                let err = (table[i][i] - table[i - 1][i - 1]).abs();
                if err < best.0 {
                    best = (err, table[i][i]);
                }
            }
        }
    }
    let scale = best.1.abs().max(v(x).abs()).max(magnitude);
    if !best.1.is_finite() || best.0 > 1e-6 * scale.max(1.0) {
        return Err(Error::Extrapolation { estimate: best.0 });
    }
    Ok(best.1)
}

/// `H = ½ P2 + V(X)`.
pub fn build_hamiltonian(grid: &Grid, v: &PotentialModel) -> Result<HermitianOperator> {
    let ops = canonical_operators(grid)?;
    hamiltonian_from(&ops, &grid.sample(|x| v.value(x)), &v.name)
}

/// `½ P2 + diag(values)` from precomputed canonical operators.
pub fn hamiltonian_from(ops: &CanonicalOperators, values: &[f64], name: &str) -> Result<HermitianOperator> {
    if let Some((j, bad)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite(format!("potential value {bad} at grid index {j}")));
    }
    let p2 = ops.p2.matrix();
    let n = p2.nrows();
    let m = Mat::from_fn(n, n, |i, j| {
        let d = if i == j { values[i] } else { 0.0 };
        p2[(i, j)] * 0.5 + c64::new(d, 0.0)
    });
    hermitize(m, format!("H[{name}]"))
}

#[derive(Clone, Debug, PartialEq)]
pub enum GeneratorKind {
    PlainDilation,
    /// `G = const` on `|x| <= r`, `G = x²` on `|x| >= r + width`.
    Modified {
        r: f64,
        width: f64,
    },
}

/// The conjugate operator `A` and, for the modified kind, the sampled `G`, `G′`, `G″`.
#[derive(Clone, Debug)]
pub struct ConjugateOperator {
    pub op: HermitianOperator,
    pub kind: GeneratorKind,
    pub profile: Option<GProfile>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GProfile {
    pub g: Vec<f64>,
    pub g1: Vec<f64>,
    pub g2: Vec<f64>,
}

impl ConjugateOperator {
    pub fn matrix(&self) -> &Mat<c64> {
        self.op.matrix()
    }

    /// `A − a`.
    pub fn shifted(&self, a: f64) -> Result<Self> {
        Ok(Self { op: self.op.shifted(a)?, kind: self.kind.clone(), profile: self.profile.clone() })
    }
}

/// `A = (X P + P X) / 2`.
pub fn build_dilation_generator(grid: &Grid) -> Result<ConjugateOperator> {
    let ops = canonical_operators(grid)?;
    dilation_from(&ops, grid)
}

pub fn dilation_from(ops: &CanonicalOperators, grid: &Grid) -> Result<ConjugateOperator> {
    let op = symmetrized_product(&grid.positions(), ops.p.matrix(), 0.5, "A")?;
    Ok(ConjugateOperator { op, kind: GeneratorKind::PlainDilation, profile: None })
}

/// `scale · (diag(w) P + P diag(w))`.
fn symmetrized_product(w: &[f64], p: &Mat<c64>, scale: f64, label: &str) -> Result<HermitianOperator> {
    let n = p.nrows();
    let m = Mat::from_fn(n, n, |i, j| p[(i, j)] * ((w[i] + w[j]) * scale));
    hermitize(m, label)
}

/// `G′(x) = 2x ρ(|x|)` with `ρ` the C∞ ramp from 0 at `r` to 1 at `r + width`.
///
/// `G″ = 2ρ + 2|x|ρ′ >= 0`, so `G` is convex; the constant on `|x| <= r` is
/// chosen so that `G = x²` beyond `r + width`.
fn g_profile_at(x: f64, r: f64, width: f64, g0: f64) -> (f64, f64, f64) {
    let ax = x.abs();
    let rho = ramp_jet(&Jet::variable((ax - r) / width, 1));
    let (p0, p1) = (rho.value(), rho.derivative(1) / width);
    let g1 = 2.0 * x * p0;
    let g2 = 2.0 * p0 + 2.0 * ax * p1;
    let g = if ax >= r + width {
        x * x
    } else if ax <= r {
        g0
    } else {
        g0 + ramp_integral(r, ax, r, width)
    };
    (g, g1, g2)
}

/// `∫_a^b 2t ρ(t) dt` by 40-point Gauss–Legendre.
fn ramp_integral(a: f64, b: f64, r: f64, width: f64) -> f64 {
    let (nodes, weights) = gauss_legendre(40);
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    nodes
        .iter()
        .zip(&weights)
        .map(|(t, w)| {
            let s = c + h * t;
            w * 2.0 * s * ramp_jet(&Jet::variable((s - r) / width, 0)).value()
        })
        .sum::<f64>()
        * h
}

/// `A_G = (G′(X) P + P G′(X)) / 4`, which equals the dilation generator where `G = x²`.
pub fn build_modified_generator(grid: &Grid, r: f64, width: f64) -> Result<ConjugateOperator> {
    let ops = canonical_operators(grid)?;
    modified_from(&ops, grid, r, width)
}

pub fn modified_from(ops: &CanonicalOperators, grid: &Grid, r: f64, width: f64) -> Result<ConjugateOperator> {
    if !(r > 0.0 && width > 0.0 && r + width < grid.half_width() / 2.0) {
        return Err(Error::Geometry(format!(
            "need 0 < R, 0 < width and R + width < L/2 (R = {r}, width = {width}, L = {})",
            grid.half_width()
        )));
    }
    let g0 = (r + width).powi(2) - ramp_integral(r, r + width, r, width);
    let xs = grid.positions();
    let mut profile = GProfile { g: vec![], g1: vec![], g2: vec![] };
    for &x in &xs {
        let (g, g1, g2) = g_profile_at(x, r, width, g0);
        profile.g.push(g);
        profile.g1.push(g1);
        profile.g2.push(g2);
    }
    let op = symmetrized_product(&profile.g1, ops.p.matrix(), 0.25, "A_G")?;
    Ok(ConjugateOperator { op, kind: GeneratorKind::Modified { r, width }, profile: Some(profile) })
}

/// `i^k ad_A^k(B)` with `ad_A(B) = [B, A]`; intermediates stay unsymmetrized
/// and only the result is hermitized.
pub fn multi_commutator(b: &HermitianOperator, a: &ConjugateOperator, k: usize) -> Result<HermitianOperator> {
    let raw = multi_commutator_raw(b.matrix(), a.matrix(), k)?;
    hermitize(raw, format!("i^{k} ad^{k}({})", b.label()))
}

/// `i^k ad_A^k(B)` without the final hermitization.
pub fn multi_commutator_raw(b: &Mat<c64>, a: &Mat<c64>, k: usize) -> Result<Mat<c64>> {
    if k == 0 {
        return Err(Error::OutOfRange { name: "k", value: 0.0, reason: "must be at least 1".into() });
    }
    if b.nrows() != a.nrows() || b.ncols() != a.ncols() {
        return Err(Error::ShapeMismatch { expected: a.nrows(), got: b.nrows() });
    }
    let i = c64::new(0.0, 1.0);
    let mut cur = b.to_owned();
    for _ in 0..k {
        let next = &cur * a - a * &cur;
        cur = Mat::from_fn(next.nrows(), next.ncols(), |r, c| next[(r, c)] * i);
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_grid, expectation, WaveState};
    use std::f64::consts::PI;

    fn packet(grid: &Grid, x0: f64, k0: f64, sigma: f64) -> WaveState {
        WaveState::from_fn(grid, |x| {
            let env = (-(x - x0).powi(2) / (2.0 * sigma * sigma)).exp();
            c64::new(0.0, k0 * x).exp() * env
        })
        .normalized()
        .unwrap()
    }

    #[test]
    fn box_and_harmonic_ground_states() {
        let g = build_grid(16.0, 512).unwrap();
        let h = build_hamiltonian(&g, &PotentialModel::zero(4)).unwrap();
        let e0 = h.spectrum().unwrap().values[0];
        let exact = (PI / 32.0).powi(2) / 2.0;
        assert!((e0 - exact).abs() <= 1e-3 * exact);
        let h = build_hamiltonian(&g, &PotentialModel::harmonic(1.0, 4).unwrap()).unwrap();
        assert!((h.spectrum().unwrap().values[0] - 0.5).abs() < 1e-6);
        assert!(h.hermiticity_defect() <= 1e-12 * h.matrix().norm_l2().max(1.0));
    }

    #[test]
    fn closed_form_dilation_derivatives() {
        let v = PotentialModel::harmonic(1.0, 4).unwrap();
        for x in [-2.0f64, 0.3, 5.0] {
            assert!((v.dilation_closed_form(x, 1) - x * x).abs() < 1e-12);
            assert!((v.dilation_closed_form(x, 3) - 4.0 * x * x).abs() < 1e-10);
        }
        let v = PotentialModel::lorentz_well(1.0, 1.0, 4).unwrap();
        for x in [-2.0f64, 0.3, 5.0] {
            // V = -(1+x²)^{-1} is minus the textbook (1+x²)^{-1}, whose x V' is -2x²/(1+x²)²
            let exact = 2.0 * x * x / (1.0 + x * x).powi(2);
            assert!((v.dilation_closed_form(x, 1) - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn richardson_oracle_matches_closed_form() {
        let g = build_grid(8.0, 64).unwrap();
        for v in [
            PotentialModel::harmonic(0.7, 4).unwrap(),
            PotentialModel::lorentz_well(0.5, 1.0, 4).unwrap(),
            PotentialModel::lorentz_well(2.0, 1.5, 4).unwrap(),
            PotentialModel::gauss_well(1.0, 1.3, 4).unwrap(),
        ] {
            for k in 1..=4 {
                let num = dilation_derivatives(&g, &v, k).unwrap_or_else(|e| panic!("{} k={k}: {e}", v.name));
                for (j, x) in g.positions().into_iter().enumerate() {
                    let exact = v.dilation_closed_form(x, k);
                    let scale = v.value(x).abs().max(exact.abs()).max(1e-3);
                    assert!((num[j] - exact).abs() <= 1e-6 * scale, "{} k={k} x={x}: {} vs {exact}", v.name, num[j]);
                }
            }
        }
        let zero = dilation_derivatives(&g, &PotentialModel::zero(2), 2).unwrap();
        assert!(zero.iter().all(|v| *v == 0.0));
        assert!(dilation_derivatives(&g, &PotentialModel::zero(2), 3).is_err());
    }

    #[test]
    fn dilation_generator_expectations() {
        let g = build_grid(16.0, 512).unwrap();
        let a = build_dilation_generator(&g).unwrap();
        let real = WaveState::from_fn(&g, |x| c64::new((-(x - 2.0).powi(2)).exp(), 0.0)).normalized().unwrap();
        assert!(expectation(&a.op, &real).unwrap().abs() < 1e-10);
        let psi = packet(&g, 3.0, 1.0, 1.5);
        let v = expectation(&a.op, &psi).unwrap();
        assert!((v - 3.0).abs() <= 0.02 * 3.0, "<A> = {v}");
    }

    #[test]
    fn commutator_with_free_hamiltonian() {
        let g = build_grid(16.0, 512).unwrap();
        let ops = canonical_operators(&g).unwrap();
        let h = hamiltonian_from(&ops, &vec![0.0; g.len()], "zero").unwrap();
        let a = dilation_from(&ops, &g).unwrap();
        let psi = packet(&g, -1.0, 1.2, 1.5);
        let p2 = expectation(&ops.p2, &psi).unwrap();
        let c1 = expectation(&multi_commutator(&h, &a, 1).unwrap(), &psi).unwrap();
        let c2 = expectation(&multi_commutator(&h, &a, 2).unwrap(), &psi).unwrap();
        assert!((c1 - p2).abs() <= 0.01 * p2, "{c1} vs {p2}");
        assert!((c2 - 2.0 * p2).abs() <= 0.01 * 2.0 * p2, "{c2} vs {}", 2.0 * p2);
        let self_comm = multi_commutator(&a.op, &a, 3).unwrap();
        assert!(self_comm.matrix().norm_l2() < 1e-8);
    }

    #[test]
    fn modified_generator_profile() {
        let g = build_grid(16.0, 256).unwrap();
        let ag = build_modified_generator(&g, 2.0, 2.0).unwrap();
        let prof = ag.profile.as_ref().unwrap();
        assert!(prof.g2.iter().all(|v| *v >= -1e-10));
        for (j, x) in g.positions().into_iter().enumerate() {
            if x.abs() >= 4.0 {
                assert!((prof.g[j] - x * x).abs() < 1e-10, "x = {x}");
            }
        }
        // convexity also holds between samples: G' is non-decreasing
        assert!(prof.g1.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        let inside = WaveState::from_fn(&g, |x| if x.abs() < 1.0 { c64::new((1.0 - x * x).powi(8), 0.0) } else { c64::new(0.0, 0.0) });
        let out = ag.op.apply(inside.amplitudes());
        let norm = (out.iter().map(|z| z.norm_sqr()).sum::<f64>() * g.spacing()).sqrt();
        assert!(norm <= 1e-8, "|A_G psi| = {norm}");
        assert!(matches!(build_modified_generator(&g, 5.0, 4.0), Err(Error::Geometry(_))));
    }
}
