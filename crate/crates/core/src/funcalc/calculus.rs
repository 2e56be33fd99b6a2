//! Two realizations of `f(M)`: eigendecomposition and Helffer–Sjöstrand quadrature.

use faer::{c64, Mat};

use super::cutoff::{ramp_jet, SmoothCutoff, Support};
use crate::error::{Error, Result};
use crate::jet::{factorial, Jet};
use crate::lattice::{hermitize, HermitianOperator};
use crate::quad::{adaptive, Tolerance};

/// `U f(Λ) U†` from the cached eigendecomposition.
pub fn apply_eig(m: &HermitianOperator, f: &SmoothCutoff) -> Result<HermitianOperator> {
    apply_fn(m, |l| f.value(l), format!("{}({})", f.label(), m.label()))
}

/// `U φ(Λ) U†` for an arbitrary real spectral function.
pub fn apply_fn(m: &HermitianOperator, phi: impl Fn(f64) -> f64, label: impl Into<String>) -> Result<HermitianOperator> {
    let spec = m.spectrum()?;
    hermitize(spec.map(phi), label)
}

/// Order-`n_ext` almost-analytic extension
/// `f̃(x+iy) = Σ_{k<=n} f^(k)(x) (iy)^k / k! · σ(y / y_width)`
/// with `σ = 1` on `|t| <= 1` and `σ = 0` on `|t| >= 2`.
#[derive(Clone, Debug)]
pub struct AlmostAnalyticExtension {
    pub base: SmoothCutoff,
    pub n_ext: usize,
    pub y_width: f64,
}

impl AlmostAnalyticExtension {
    pub fn new(base: SmoothCutoff, n_ext: usize, y_width: f64) -> Result<Self> {
        if !(2..=8).contains(&n_ext) {
            return Err(Error::OutOfRange { name: "N_ext", value: n_ext as f64, reason: "must be in 2..=8".into() });
        }
        if !(y_width.is_finite() && y_width > 0.0) {
            return Err(Error::OutOfRange { name: "y_width", value: y_width, reason: "must be positive".into() });
        }
        Ok(Self { base, n_ext, y_width })
    }

    fn sigma(&self, y: f64) -> Jet {
        let t = Jet::variable(y.abs() / self.y_width, 1);
        let s = ramp_jet(&t.offset(-1.0));
        let mut c = (-&s).offset(1.0).coeffs().to_vec();
        c[1] *= y.signum() / self.y_width;
        Jet::from_coeffs(c)
    }

    pub fn value(&self, x: f64, y: f64) -> c64 {
        let d = self.base.derivatives(x, self.n_ext);
        let s = self.sigma(y).value();
        taylor_sum(&d, self.n_ext, y) * s
    }

    /// `∂̄f̃ = ½(∂_x + i ∂_y) f̃`, evaluated in closed form.
    ///
    /// The Taylor sum telescopes, leaving
    /// `½ [f^(n+1)(x) (iy)^n / n! σ + i Σ_k f^(k)(x) (iy)^k / k! σ'(y)]`.
    pub fn dbar(&self, x: f64, y: f64) -> c64 {
        let n = self.n_ext;
        let d = self.base.derivatives(x, n + 1);
        let sig = self.sigma(y);
        let (s0, s1) = (sig.value(), sig.derivative(1));
        let iy_n = ipow(y, n) * (1.0 / factorial(n));
        let mut out = iy_n * (d[n + 1] * s0);
        if s1 != 0.0 {
            out += c64::new(0.0, 1.0) * taylor_sum(&d, n, y) * s1;
        }
        out * 0.5
    }
}

fn ipow(y: f64, k: usize) -> c64 {
    let mag = y.powi(k as i32);
    match k % 4 {
        0 => c64::new(mag, 0.0),
        1 => c64::new(0.0, mag),
        2 => c64::new(-mag, 0.0),
        _ => c64::new(0.0, -mag),
    }
}

fn taylor_sum(d: &[f64], n: usize, y: f64) -> c64 {
    (0..=n).map(|k| ipow(y, k) * (d[k] / factorial(k))).sum()
}

/// Quadrature settings for [`apply_hs`].
#[derive(Clone, Copy, Debug)]
pub struct HsOptions {
    pub tolerance: Tolerance,
    /// Half-height of the strip where `σ = 1`.
    pub y_width: f64,
}

impl Default for HsOptions {
    fn default() -> Self {
        Self { tolerance: Tolerance { abs: 1e-10, rel: 1e-10, max_panels: 4000 }, y_width: 0.5 }
    }
}

/// Helffer–Sjöstrand realization `f(M) = (1/π) ∫ ∂̄f̃(z) (M − z)^{-1} dx dy`.
///
/// `M` is first reduced to Hermitian tridiagonal form `Q T Q†` by Householder
/// reflections, so each resolvent is a pivoted tridiagonal solve. The `y < 0` half-plane contributes the
/// adjoint of the `y > 0` half, so only `y > 0` is integrated. Cutoffs without
/// compact support are multiplied by a bump equal to 1 on a Gershgorin interval
/// of `M`, which leaves `f(M)` unchanged.
pub fn apply_hs(m: &HermitianOperator, f: &SmoothCutoff, n_ext: usize) -> Result<HermitianOperator> {
    apply_hs_with(m, f, n_ext, HsOptions::default())
}

pub fn apply_hs_with(m: &HermitianOperator, f: &SmoothCutoff, n_ext: usize, opts: HsOptions) -> Result<HermitianOperator> {
    let (glo, ghi) = gershgorin(m.matrix());
    let pad = 1.0;
    let (lo, hi) = match f.support() {
        Support::Compact(a, b) => (a.max(glo - pad), b.min(ghi + pad)),
        Support::Left(b) => (glo - pad, b.min(ghi + pad)),
        Support::Right(a) => (a.max(glo - pad), ghi + pad),
        Support::Full => (glo - pad, ghi + pad),
    };
    let n = m.dim();
    if lo >= hi {
        return hermitize(Mat::zeros(n, n), format!("hs:{}", f.label()));
    }
    let base = match f.support() {
        Support::Compact(..) => f.clone(),
        _ => restrict(f, glo - 0.5 * pad, ghi + 0.5 * pad)?,
    };
    let ext = AlmostAnalyticExtension::new(base, n_ext, opts.y_width)?;
    let ymax = 2.0 * opts.y_width;
    let (t, q) = tridiagonalize(m.matrix());

    let inner = |x: f64| -> Mat<c64> {
        let res = adaptive(
            |y: f64| {
                let w = ext.dbar(x, y);
                if w == c64::new(0.0, 0.0) {
                    return Mat::zeros(n, n);
                }
                t.resolvent(c64::new(x, y), w)
            },
            0.0,
            ymax,
            4,
            opts.tolerance,
        );
        match res {
            Ok((v, _)) => v,
            Err(_) => Mat::from_fn(n, n, |_, _| c64::new(f64::NAN, 0.0)),
        }
    };
    let (half, err) = adaptive(inner, lo, hi, 8, opts.tolerance)?;
    if !half.norm_l2().is_finite() {
        return Err(Error::Quadrature { residual: err });
    }
    let total = Mat::from_fn(n, n, |i, j| (half[(i, j)] + half[(j, i)].conj()) * (1.0 / std::f64::consts::PI));
    hermitize(&q * &total * q.adjoint(), format!("hs:{}({})", f.label(), m.label()))
}

/// Real symmetric tridiagonal matrix.
struct Tridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl Tridiagonal {
    /// `w (T − z)^{-1}` for `Im z > 0` from the left/right Schur recurrences.
    /// Every denominator has imaginary part at most `−Im z`, so none vanishes.
    fn resolvent(&self, z: c64, w: c64) -> Mat<c64> {
        let n = self.diag.len();
        let b2 = |i: usize| self.off[i] * self.off[i];
        let a: Vec<c64> = self.diag.iter().map(|&d| c64::new(d, 0.0) - z).collect();
        let mut gl = vec![c64::new(0.0, 0.0); n];
        let mut gr = vec![c64::new(0.0, 0.0); n];
        for i in 0..n {
            let s = if i > 0 { a[i] - gl[i - 1] * b2(i - 1) } else { a[i] };
            gl[i] = s.inv();
        }
        for i in (0..n).rev() {
            let s = if i + 1 < n { a[i] - gr[i + 1] * b2(i) } else { a[i] };
            gr[i] = s.inv();
        }
        let mut g = vec![c64::new(0.0, 0.0); n * n];
        for j in 0..n {
            let mut s = a[j];
            if j > 0 {
                s -= gl[j - 1] * b2(j - 1);
            }
            if j + 1 < n {
                s -= gr[j + 1] * b2(j);
            }
            let mut v = s.inv() * w;
            g[j * n + j] = v;
            for i in (0..j).rev() {
                v = -gl[i] * self.off[i] * v;
                g[j * n + i] = v;
                g[i * n + j] = v;
            }
        }
        Mat::from_fn(n, n, |i, j| g[j * n + i])
    }
}

/// Householder reduction `A = Q T Q†` of a Hermitian matrix, with the phases of
/// the off-diagonal absorbed into `Q` so that `T` is real.
fn tridiagonalize(a: &Mat<c64>) -> (Tridiagonal, Mat<c64>) {
    let n = a.nrows();
    let mut a = a.clone();
    let mut q = Mat::<c64>::identity(n, n);
    let zero = c64::new(0.0, 0.0);
    for k in 0..n.saturating_sub(2) {
        let norm = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0 == zero { c64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * norm;
        let mut v: Vec<c64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        v[0] -= alpha;
        let vn = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if vn == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|c| *c /= vn);
        // A ← H A H and Q ← Q H with H = I − 2 v v† on rows/columns k+1..
        for j in 0..n {
            let s: c64 = v.iter().enumerate().map(|(l, vl)| vl.conj() * a[(k + 1 + l, j)]).sum();
            for (l, vl) in v.iter().enumerate() {
                a[(k + 1 + l, j)] -= *vl * s * 2.0;
            }
        }
        for m in [&mut a, &mut q] {
            for i in 0..n {
                let s: c64 = v.iter().enumerate().map(|(l, vl)| m[(i, k + 1 + l)] * vl).sum();
                for (l, vl) in v.iter().enumerate() {
                    m[(i, k + 1 + l)] -= s * vl.conj() * 2.0;
                }
            }
        }
    }
    // T = D T_r D† with D_{k+1} = D_k e_k / |e_k|
    let mut phase = c64::new(1.0, 0.0);
    let mut off = Vec::with_capacity(n.saturating_sub(1));
    for k in 0..n {
        for i in 0..n {
            q[(i, k)] *= phase;
        }
        if k + 1 < n {
            let e = a[(k + 1, k)];
            off.push(e.norm());
            if e != zero {
                phase *= e / e.norm();
            }
        }
    }
    (Tridiagonal { diag: (0..n).map(|i| a[(i, i)].re).collect(), off }, q)
}

fn restrict(f: &SmoothCutoff, lo: f64, hi: f64) -> Result<SmoothCutoff> {
    let window = SmoothCutoff::bump(lo - 0.5, hi + 0.5, 0.5)?;
    Ok(f.times(&window))
}

/// Interval containing the spectrum of a Hermitian matrix.
pub fn gershgorin(m: &Mat<c64>) -> (f64, f64) {
    let n = m.nrows();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let radius: f64 = (0..n).filter(|&j| j != i).map(|j| m[(i, j)].norm()).sum();
        lo = lo.min(m[(i, i)].re - radius);
        hi = hi.max(m[(i, i)].re + radius);
    }
    (lo, hi)
}

/// Sharp spectral projector onto `[lo, hi]` and the number of enclosed eigenvalues.
#[derive(Clone, Debug)]
pub struct SpectralProjection {
    pub projector: HermitianOperator,
    pub count: usize,
    pub interval: (f64, f64),
}

impl SpectralProjection {
    /// Errors if the window holds no eigenvalue.
    pub fn nonempty(self) -> Result<Self> {
        if self.count == 0 {
            Err(Error::EmptyWindow { lo: self.interval.0, hi: self.interval.1 })
        } else {
            Ok(self)
        }
    }
}

pub fn spectral_projection(h: &HermitianOperator, lo: f64, hi: f64) -> Result<SpectralProjection> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::OutOfRange { name: "interval", value: hi - lo, reason: "needs finite lo < hi".into() });
    }
    let spec = h.spectrum()?;
    let count = spec.values.iter().filter(|&&l| l >= lo && l <= hi).count();
    let projector = hermitize(spec.map(|l| if l >= lo && l <= hi { 1.0 } else { 0.0 }), format!("E[{lo}, {hi}]"))?;
    Ok(SpectralProjection { projector, count, interval: (lo, hi) })
}

/// `F = √f`, `u = f^(1/4)`, `v = √(−F′)` for `f` in the class
/// `f >= 0`, `f′ <= 0`, `f = 0` on `x >= 0`.
#[derive(Clone, Debug)]
pub struct Factorization {
    pub f_root: SmoothCutoff,
    pub u: SmoothCutoff,
    pub v: SmoothCutoff,
}

/// Checks the hypothesis class on `[-100, 1]` and builds the factors.
pub fn factorize_cutoff(f: &SmoothCutoff) -> Result<Factorization> {
    check_decreasing_left_class(f)?;
    let f_root = f.power(0.5)?;
    let u = f.power(0.25)?;
    let v = f_root.neg_derivative_root();
    Ok(Factorization { f_root, u, v })
}

/// Scan for `f >= 0`, `f′ <= 0` and `f = 0` on `x >= 0`.
pub fn check_decreasing_left_class(f: &SmoothCutoff) -> Result<()> {
    for i in 0..=20_200 {
        let x = -100.0 + i as f64 * 0.005;
        let d = f.derivatives(x, 1);
        if d[0] < 0.0 {
            return Err(Error::Hypothesis(format!("{} is negative at x = {x}", f.label())));
        }
        if d[1] > 1e-14 {
            return Err(Error::Hypothesis(format!("{} is increasing at x = {x}", f.label())));
        }
        if x >= 0.0 && d[0] != 0.0 {
            return Err(Error::Hypothesis(format!("{} does not vanish at x = {x}", f.label())));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::operator_norm;

    fn random_hermitian(n: usize, seed: u64) -> HermitianOperator {
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let m = Mat::from_fn(n, n, |_, _| c64::new(next(), next()));
        let h = hermitize(m, "rand").unwrap();
        let scale = operator_norm(h.matrix()).unwrap();
        hermitize(Mat::from_fn(n, n, |i, j| h.matrix()[(i, j)] * (0.95 / scale)), "rand").unwrap()
    }

    #[test]
    fn eig_identity_and_constant() {
        let m = random_hermitian(10, 3);
        let id = apply_eig(&m, &SmoothCutoff::linear()).unwrap();
        assert!((id.matrix() - m.matrix()).norm_l2() < 1e-10);
        let one = apply_eig(&m, &SmoothCutoff::polynomial(&[1.0]).unwrap()).unwrap();
        assert!((one.matrix() - Mat::<c64>::identity(10, 10)).norm_l2() < 1e-10);
    }

    #[test]
    fn eig_spectral_mapping_of_square() {
        let m = random_hermitian(12, 5);
        let f = SmoothCutoff::smooth_step(0.0, 0.6).unwrap();
        let fm = apply_eig(&m, &f).unwrap();
        let f2 = apply_fn(&m, |l| f.value(l).powi(2), "f2").unwrap();
        let sq = fm.matrix() * fm.matrix();
        assert!((&sq - f2.matrix()).norm_l2() < 1e-10);
    }

    #[test]
    fn dbar_vanishes_to_order_n() {
        let f = SmoothCutoff::bump(-0.5, 0.5, 0.3).unwrap();
        for n in [2usize, 4] {
            let ext = AlmostAnalyticExtension::new(f.clone(), n, 0.5).unwrap();
            let a = ext.dbar(-0.33, 1e-2).norm();
            let b = ext.dbar(-0.33, 1e-3).norm();
            let slope = (a / b).log10();
            assert!(slope >= n as f64 - 0.3, "n = {n}: slope {slope}");
        }
    }

    #[test]
    fn dbar_matches_numerical_derivative() {
        let f = SmoothCutoff::gaussian(0.1, 0.5).unwrap();
        let ext = AlmostAnalyticExtension::new(f, 3, 0.4).unwrap();
        let (x, y, h) = (0.2, 0.55, 1e-5);
        let dx = (ext.value(x + h, y) - ext.value(x - h, y)) * (0.5 / h);
        let dy = (ext.value(x, y + h) - ext.value(x, y - h)) * (0.5 / h);
        let num = (dx + c64::new(0.0, 1.0) * dy) * 0.5;
        assert!((num - ext.dbar(x, y)).norm() < 1e-7);
    }

    #[test]
    fn tridiagonal_reduction_and_resolvent() {
        let m = random_hermitian(9, 4);
        let (t, q) = tridiagonalize(m.matrix());
        let n = 9;
        let dense = Mat::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => c64::new(t.diag[i], 0.0),
            1 => c64::new(t.off[i.min(j)], 0.0),
            _ => c64::new(0.0, 0.0),
        });
        assert!((&q * &dense * q.adjoint() - m.matrix()).norm_l2() < 1e-12);
        assert!((q.adjoint() * &q - Mat::<c64>::identity(n, n)).norm_l2() < 1e-12);
        let z = c64::new(0.1, 1e-3);
        let r = t.resolvent(z, c64::new(1.0, 0.0));
        let shifted = Mat::from_fn(n, n, |i, j| dense[(i, j)] - if i == j { z } else { c64::new(0.0, 0.0) });
        let resid = (&shifted * &r - Mat::<c64>::identity(n, n)).norm_l2();
        assert!(resid < 1e-10, "{resid:e}");
        let w = c64::new(0.3, -2.0);
        assert!((t.resolvent(z, w) - Mat::from_fn(n, n, |i, j| r[(i, j)] * w)).norm_l2() < 1e-12);
    }

    #[test]
    fn hs_matches_eig_for_bump() {
        let m = random_hermitian(16, 11);
        let f = SmoothCutoff::bump(-0.6, 0.7, 0.4).unwrap();
        let a = apply_hs(&m, &f, 4).unwrap();
        let b = apply_eig(&m, &f).unwrap();
        let err = operator_norm(&(a.matrix() - b.matrix())).unwrap();
        assert!(err <= 1e-6, "error {err:.3e}");
    }

    #[test]
    fn hs_disjoint_support_gives_zero() {
        let m = random_hermitian(8, 2);
        let f = SmoothCutoff::bump(5.0, 6.0, 0.3).unwrap();
        let a = apply_hs(&m, &f, 4).unwrap();
        assert!(a.matrix().norm_l2() < 1e-8);
    }

    #[test]
    fn projection_is_idempotent_and_commutes() {
        let m = random_hermitian(14, 9);
        let p = spectral_projection(&m, -0.2, 0.4).unwrap();
        let pm = p.projector.matrix();
        assert!((pm * pm - pm).norm_l2() < 1e-12);
        assert!((pm * m.matrix() - m.matrix() * pm).norm_l2() < 1e-10);
        let empty = spectral_projection(&m, 3.0, 4.0).unwrap();
        assert_eq!(empty.count, 0);
        assert!(empty.projector.matrix().norm_l2() == 0.0);
        assert!(matches!(empty.nonempty(), Err(Error::EmptyWindow { .. })));
    }

    #[test]
    fn factorize_round_trip() {
        let fh = SmoothCutoff::half_order(1.0).unwrap();
        let f = fh.power(2.0).unwrap();
        let fac = factorize_cutoff(&f).unwrap();
        let mut worst = 0.0f64;
        for i in 0..=10_100 {
            let x = -100.0 + i as f64 * 0.01;
            worst = worst.max((fac.f_root.value(x) - fh.value(x)).abs() / fh.value(x).max(1.0));
            worst = worst.max((f.value(x) - fac.f_root.value(x).powi(2)).abs() / f.value(x).max(1.0));
            worst = worst.max((fac.f_root.value(x) - fac.u.value(x).powi(2)).abs());
            let neg = -fac.f_root.derivative(x, 1);
            worst = worst.max((neg - fac.v.value(x).powi(2)).abs());
            if x >= 0.0 {
                assert_eq!(fac.u.value(x), 0.0);
                assert_eq!(fac.v.value(x), 0.0);
            }
        }
        assert!(worst <= 1e-12, "worst {worst:.3e}");
    }

    #[test]
    fn factorize_rejects_increasing_cutoff() {
        let f = SmoothCutoff::smooth_step(0.0, 1.0).unwrap();
        assert!(matches!(factorize_cutoff(&f), Err(Error::Hypothesis(_))));
    }
}
