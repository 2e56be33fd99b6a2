//! Smooth cutoff functions with exact derivatives.
//!
//! Every cutoff is evaluated through [`Jet`] arithmetic, so `f^(k)(x)` comes
//! from the same expression as `f(x)`. Outside the declared support the value
//! and all derivatives are exactly zero.

use std::fmt;

use crate::error::{Error, Result};
use crate::jet::{binomial, Jet};

/// Where a cutoff may be nonzero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Support {
    /// Vanishes for `x >= edge`.
    Left(f64),
    /// Vanishes for `x <= edge`.
    Right(f64),
    Compact(f64, f64),
    Full,
}

impl Support {
    pub fn contains(&self, x: f64) -> bool {
        match *self {
            Support::Left(b) => x < b,
            Support::Right(a) => x > a,
            Support::Compact(a, b) => x > a && x < b,
            Support::Full => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Shape {
    SmoothStep { a: f64, w: f64 },
    Window { lo: f64, hi: f64, wl: f64, wr: f64 },
    HalfOrder { w: f64 },
    ChiMinus { eps: f64, w: f64 },
    PolyStep { a: f64, w: f64, q: u32 },
    PolyWindow { lo: f64, hi: f64, wl: f64, wr: f64, q: u32 },
    PolyHalf { w: f64, q: u32 },
    PolyDrop { w: f64, q: u32 },
    Gaussian { center: f64, width: f64 },
    Polynomial(Vec<f64>),
    Power { base: Box<SmoothCutoff>, exponent: f64 },
    NegDerivRoot { base: Box<SmoothCutoff> },
    Affine { base: Box<SmoothCutoff>, scale: f64, shift: f64 },
    Product(Box<SmoothCutoff>, Box<SmoothCutoff>),
}

/// A smooth function of declared order `p`: `|f^(k)(x)| <= C_k (1+|x|)^(p-k)`.
///
/// Compactly supported and Gaussian cutoffs have order `-inf`.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothCutoff {
    shape: Shape,
    order: f64,
    support: Support,
    width: f64,
    label: String,
}

impl fmt::Display for SmoothCutoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange { name, value: v, reason: "must be finite and positive".into() })
    }
}

fn finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange { name, value: v, reason: "must be finite".into() })
    }
}

/// The C∞ ramp `S(t) = 1 / (1 + exp(1/t - 1/(1-t)))` on `(0, 1)`, 0 below, 1 above.
pub fn ramp(t: f64) -> f64 {
    ramp_jet(&Jet::variable(t, 0)).value()
}

/// [`ramp`] composed with a jet.
pub fn ramp_jet(t: &Jet) -> Jet {
    let n = t.order();
    let t0 = t.value();
    if t0 <= 0.0 {
        return Jet::zero(n);
    }
    if t0 >= 1.0 {
        return Jet::constant(1.0, n);
    }
    let one_minus = (-t).offset(1.0);
    let phi = &t.recip() - &one_minus.recip();
    if phi.value() > 700.0 {
        return Jet::zero(n);
    }
    if phi.value() < -700.0 {
        return Jet::constant(1.0, n);
    }
    if phi.value() > 0.0 {
        // exp(-phi) stays small, so the jet coefficients cannot overflow
        let e = (-&phi).exp();
        &e * &e.offset(1.0).recip()
    } else {
        phi.exp().offset(1.0).recip()
    }
}

/// Composes a Taylor series `Σ c_k (x - x0)^k` (given as a jet at `x0`) with a jet `x`.
fn compose_series(series: &Jet, x: &Jet) -> Jet {
    let dx = x.offset(-x.value());
    let c: Vec<f64> = series.coeffs()[..=x.order().min(series.order())].to_vec();
    dx.polynomial(&c)
}

/// Polynomial smoothstep of vanishing order `q`: `u^q Σ_{j<q} C(q-1+j, j)(1-u)^j`.
///
/// It is `C^(q-1)` at both ends, 0 for `u <= 0` and 1 for `u >= 1`.
pub fn poly_ramp_jet(u: &Jet, q: u32) -> Jet {
    let n = u.order();
    let u0 = u.value();
    if u0 <= 0.0 {
        return Jet::zero(n);
    }
    if u0 >= 1.0 {
        return Jet::constant(1.0, n);
    }
    let q = q as usize;
    // expand into monomial coefficients in u
    let mut c = vec![0.0; 2 * q];
    for j in 0..q {
        let w = binomial(q - 1 + j, j);
        for i in 0..=j {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            c[q + i] += w * binomial(j, i) * sign;
        }
    }
    u.polynomial(&c)
}

fn half_order_jet(x: &Jet, w: f64) -> Jet {
    let n = x.order();
    if x.value() >= 0.0 {
        return Jet::zero(n);
    }
    let y = -x;
    let s = ramp_jet(&y.scale(1.0 / w));
    if s.value() == 0.0 && s.coeffs().iter().all(|c| *c == 0.0) {
        return Jet::zero(n);
    }
    &y.sqrt() * &s
}

impl SmoothCutoff {
    fn build(shape: Shape, order: f64, support: Support, width: f64, label: String) -> Self {
        Self { shape, order, support, width, label }
    }

    /// 0 for `x <= a - w`, 1 for `x >= a`.
    pub fn smooth_step(a: f64, w: f64) -> Result<Self> {
        finite("a", a)?;
        positive("w", w)?;
        Ok(Self::build(Shape::SmoothStep { a, w }, 0.0, Support::Right(a - w), w, format!("smooth_step({a}, {w})")))
    }

    /// 1 on `[lo + w, hi - w]`, 0 outside `(lo, hi)`.
    pub fn bump(lo: f64, hi: f64, w: f64) -> Result<Self> {
        Self::window(lo, hi, w, w)
    }

    /// Bump with separate left and right transition widths.
    pub fn window(lo: f64, hi: f64, wl: f64, wr: f64) -> Result<Self> {
        finite("lo", lo)?;
        finite("hi", hi)?;
        positive("wl", wl)?;
        positive("wr", wr)?;
        if lo + wl > hi - wr {
            return Err(Error::InvalidCutoff(format!("transitions overlap on [{lo}, {hi}]")));
        }
        Ok(Self::build(
            Shape::Window { lo, hi, wl, wr },
            f64::NEG_INFINITY,
            Support::Compact(lo, hi),
            wl.min(wr),
            format!("bump([{lo}, {hi}], {wl}, {wr})"),
        ))
    }

    /// `F(x) = 0` for `x >= 0`, `√(-x)` for `x <= -w`, decreasing and C∞.
    pub fn half_order(w: f64) -> Result<Self> {
        positive("w", w)?;
        Ok(Self::build(Shape::HalfOrder { w }, 0.5, Support::Left(0.0), w, format!("F_half_order({w})")))
    }

    /// Smoothed indicator of `(-∞, -eps)`: 1 for `x <= -eps - w`, 0 for `x >= -eps`.
    pub fn chi_minus(eps: f64, w: f64) -> Result<Self> {
        finite("eps", eps)?;
        positive("w", w)?;
        Ok(Self::build(Shape::ChiMinus { eps, w }, 0.0, Support::Left(-eps), w, format!("chi_minus({eps}, {w})")))
    }

    /// Finite-smoothness step: `P_q((x - a + w) / w)`.
    pub fn poly_step(a: f64, w: f64, q: u32) -> Result<Self> {
        finite("a", a)?;
        positive("w", w)?;
        check_q(q)?;
        Ok(Self::build(Shape::PolyStep { a, w, q }, 0.0, Support::Right(a - w), w, format!("poly_step({a}, {w}, {q})")))
    }

    /// Finite-smoothness window, `C^(q-1)` at its four transition ends.
    pub fn poly_window(lo: f64, hi: f64, wl: f64, wr: f64, q: u32) -> Result<Self> {
        finite("lo", lo)?;
        finite("hi", hi)?;
        positive("wl", wl)?;
        positive("wr", wr)?;
        check_q(q)?;
        if lo + wl > hi - wr {
            return Err(Error::InvalidCutoff(format!("transitions overlap on [{lo}, {hi}]")));
        }
        Ok(Self::build(
            Shape::PolyWindow { lo, hi, wl, wr, q },
            f64::NEG_INFINITY,
            Support::Compact(lo, hi),
            wl.min(wr),
            format!("poly_window([{lo}, {hi}], {wl}, {wr}, {q})"),
        ))
    }

    /// `√(-x) P_q(-x / w)`: order ½, vanishing like `|x|^(q + 1/2)` at 0.
    pub fn poly_half(w: f64, q: u32) -> Result<Self> {
        positive("w", w)?;
        check_q(q)?;
        Ok(Self::build(Shape::PolyHalf { w, q }, 0.5, Support::Left(0.0), w, format!("poly_half({w}, {q})")))
    }

    /// `P_q(-x / w)`: 1 for `x <= -w`, 0 for `x >= 0`, vanishing to order `q` at 0.
    pub fn poly_drop(w: f64, q: u32) -> Result<Self> {
        positive("w", w)?;
        check_q(q)?;
        Ok(Self::build(Shape::PolyDrop { w, q }, 0.0, Support::Left(0.0), w, format!("poly_drop({w}, {q})")))
    }

    pub fn gaussian(center: f64, width: f64) -> Result<Self> {
        finite("center", center)?;
        positive("width", width)?;
        Ok(Self::build(Shape::Gaussian { center, width }, f64::NEG_INFINITY, Support::Full, width, format!("gaussian({center}, {width})")))
    }

    /// `Σ c_k x^k`.
    pub fn polynomial(coeffs: &[f64]) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidCutoff("polynomial needs at least one coefficient".into()));
        }
        if let Some(c) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(Error::NonFinite(format!("polynomial coefficient {c}")));
        }
        let degree = coeffs.iter().rposition(|c| *c != 0.0).unwrap_or(0);
        let order = if coeffs.iter().all(|c| *c == 0.0) { f64::NEG_INFINITY } else { degree as f64 };
        let support = if order == f64::NEG_INFINITY { Support::Compact(0.0, 0.0) } else { Support::Full };
        Ok(Self::build(Shape::Polynomial(coeffs.to_vec()), order, support, 1.0, format!("polynomial({coeffs:?})")))
    }

    pub fn linear() -> Self {
        Self::polynomial(&[0.0, 1.0]).expect("valid coefficients").with_label("linear")
    }

    /// `x ↦ f(x / scale + shift)`.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self> {
        positive("scale", scale)?;
        finite("shift", shift)?;
        let map = |e: f64| (e - shift) * scale;
        let support = match self.support {
            Support::Left(b) => Support::Left(map(b)),
            Support::Right(a) => Support::Right(map(a)),
            Support::Compact(a, b) => Support::Compact(map(a), map(b)),
            Support::Full => Support::Full,
        };
        Ok(Self::build(
            Shape::Affine { base: Box::new(self.clone()), scale, shift },
            self.order,
            support,
            self.width * scale,
            format!("{}(x/{scale} + {shift})", self.label),
        ))
    }

    /// `x ↦ f(x / scale)`.
    pub fn scaled(&self, scale: f64) -> Result<Self> {
        self.affine(scale, 0.0)
    }

    /// Pointwise product.
    pub fn times(&self, other: &SmoothCutoff) -> Self {
        let support = intersect(self.support, other.support);
        let order =
            if self.order == f64::NEG_INFINITY || other.order == f64::NEG_INFINITY { f64::NEG_INFINITY } else { self.order + other.order };
        Self::build(
            Shape::Product(Box::new(self.clone()), Box::new(other.clone())),
            order,
            support,
            self.width.min(other.width),
            format!("{}*{}", self.label, other.label),
        )
    }

    /// `f^exponent` for a non-negative cutoff.
    pub fn power(&self, exponent: f64) -> Result<Self> {
        positive("exponent", exponent)?;
        Ok(Self::build(
            Shape::Power { base: Box::new(self.clone()), exponent },
            self.order * exponent,
            self.support,
            self.width,
            format!("({})^{exponent}", self.label),
        ))
    }

    /// `√(-f')` for a non-increasing cutoff.
    pub fn neg_derivative_root(&self) -> Self {
        Self::build(
            Shape::NegDerivRoot { base: Box::new(self.clone()) },
            (self.order - 1.0) / 2.0,
            self.support,
            self.width,
            format!("sqrt(-({})')", self.label),
        )
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// Taylor jet of the cutoff at `x`, truncated after `order`.
    pub fn jet(&self, x: f64, order: usize) -> Jet {
        self.compose(&Jet::variable(x, order))
    }

    /// The cutoff composed with an arbitrary jet.
    pub fn compose(&self, x: &Jet) -> Jet {
        let n = x.order();
        if !self.support.contains(x.value()) {
            return Jet::zero(n);
        }
        match &self.shape {
            Shape::SmoothStep { a, w } => ramp_jet(&x.offset(w - a).scale(1.0 / w)),
            Shape::Window { lo, hi, wl, wr } => {
                let l = ramp_jet(&x.offset(-lo).scale(1.0 / wl));
                let r = ramp_jet(&(-x).offset(*hi).scale(1.0 / wr));
                &l * &r
            }
            Shape::HalfOrder { w } => half_order_jet(x, *w),
            Shape::ChiMinus { eps, w } => {
                let s = ramp_jet(&x.offset(eps + w).scale(1.0 / w));
                (-&s).offset(1.0)
            }
            Shape::PolyStep { a, w, q } => poly_ramp_jet(&x.offset(w - a).scale(1.0 / w), *q),
            Shape::PolyWindow { lo, hi, wl, wr, q } => {
                let l = poly_ramp_jet(&x.offset(-lo).scale(1.0 / wl), *q);
                let r = poly_ramp_jet(&(-x).offset(*hi).scale(1.0 / wr), *q);
                &l * &r
            }
            Shape::PolyHalf { w, q } => {
                let y = -x;
                &y.sqrt() * &poly_ramp_jet(&y.scale(1.0 / w), *q)
            }
            Shape::PolyDrop { w, q } => poly_ramp_jet(&x.scale(-1.0 / w), *q),
            Shape::Gaussian { center, width } => {
                let u = x.offset(-center).scale(1.0 / width);
                (&u * &u).scale(-0.5).exp()
            }
            Shape::Polynomial(c) => x.polynomial(c),
            Shape::Affine { base, scale, shift } => base.compose(&x.scale(1.0 / scale).offset(*shift)),
            Shape::Product(a, b) => &a.compose(x) * &b.compose(x),
            Shape::Power { base, exponent } => {
                let b = base.compose(x);
                if b.value() <= 0.0 {
                    Jet::zero(n)
                } else {
                    b.powf(*exponent)
                }
            }
            Shape::NegDerivRoot { base } => {
                let d = -&compose_series(&base.jet(x.value(), n + 1).differentiate(), x);
                if d.value() <= 0.0 {
                    Jet::zero(n)
                } else {
                    d.sqrt()
                }
            }
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.jet(x, 0).value()
    }

    /// `f^(k)(x)`.
    pub fn derivative(&self, x: f64, k: usize) -> f64 {
        self.jet(x, k).derivative(k)
    }

    /// `f(x), f'(x), ..., f^(k_max)(x)`.
    pub fn derivatives(&self, x: f64, k_max: usize) -> Vec<f64> {
        self.jet(x, k_max).derivatives()
    }

    /// Scans `|f^(k)(x)| / (1+|x|)^(p-k)` over `[-1000, 1000]` for `k <= k_max`.
    ///
    /// Cutoffs of order `-inf` are scanned with `p = 0`.
    pub fn order_scan(&self, k_max: usize) -> OrderScan {
        let p = if self.order.is_finite() { self.order } else { 0.0 };
        let mut coeffs = vec![0.0f64; k_max + 1];
        let mut points: Vec<f64> = Vec::with_capacity(8000);
        for i in 0..4000 {
            // dense near the origin, geometric outwards
            let t = i as f64 / 3999.0;
            let r = 1e-3 * (1e6f64).powf(t) - 1e-3;
            points.push(r);
            points.push(-r);
        }
        for &x in &points {
            let d = self.derivatives(x, k_max);
            for (k, c) in coeffs.iter_mut().enumerate() {
                let bound = (1.0 + x.abs()).powf(p - k as f64);
                let ratio = d[k].abs() / bound;
                if ratio.is_nan() {
                    *c = f64::INFINITY;
                } else {
                    *c = c.max(ratio);
                }
            }
        }
        OrderScan { order: p, coefficients: coeffs }
    }
}

fn intersect(a: Support, b: Support) -> Support {
    let bounds = |s: Support| match s {
        Support::Left(b) => (f64::NEG_INFINITY, b),
        Support::Right(a) => (a, f64::INFINITY),
        Support::Compact(a, b) => (a, b),
        Support::Full => (f64::NEG_INFINITY, f64::INFINITY),
    };
    let (a0, a1) = bounds(a);
    let (b0, b1) = bounds(b);
    let (lo, hi) = (a0.max(b0), a1.min(b1));
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => Support::Compact(lo, hi.max(lo)),
        (true, false) => Support::Right(lo),
        (false, true) => Support::Left(hi),
        (false, false) => Support::Full,
    }
}

fn check_q(q: u32) -> Result<()> {
    if (1..=12).contains(&q) {
        Ok(())
    } else {
        Err(Error::OutOfRange { name: "q", value: q as f64, reason: "vanishing order must be in 1..=12".into() })
    }
}

/// Result of [`SmoothCutoff::order_scan`]: the empirical `C_k` for each `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderScan {
    pub order: f64,
    pub coefficients: Vec<f64>,
}

impl OrderScan {
    pub fn is_finite(&self) -> bool {
        self.coefficients.iter().all(|c| c.is_finite())
    }
}

/// Builds a cutoff from its configuration name and parameter list.
pub fn make_cutoff(kind: &str, params: &[f64]) -> Result<SmoothCutoff> {
    let need = |n: usize| -> Result<()> {
        if params.len() == n {
            Ok(())
        } else {
            Err(Error::InvalidCutoff(format!("`{kind}` takes {n} parameters, got {}", params.len())))
        }
    };
    let q = |v: f64| -> Result<u32> {
        if v.fract() == 0.0 && (1.0..=12.0).contains(&v) {
            Ok(v as u32)
        } else {
            Err(Error::OutOfRange { name: "q", value: v, reason: "must be an integer in 1..=12".into() })
        }
    };
    match kind {
        "smooth_step" => {
            need(2)?;
            SmoothCutoff::smooth_step(params[0], params[1])
        }
        "bump" => {
            need(3)?;
            SmoothCutoff::bump(params[0], params[1], params[2])
        }
        "window" => {
            need(4)?;
            SmoothCutoff::window(params[0], params[1], params[2], params[3])
        }
        "F_half_order" => {
            need(1)?;
            SmoothCutoff::half_order(params[0])
        }
        "chi_minus" => {
            need(2)?;
            SmoothCutoff::chi_minus(params[0], params[1])
        }
        "poly_step" => {
            need(3)?;
            SmoothCutoff::poly_step(params[0], params[1], q(params[2])?)
        }
        "poly_window" => {
            need(5)?;
            SmoothCutoff::poly_window(params[0], params[1], params[2], params[3], q(params[4])?)
        }
        "poly_half" => {
            need(2)?;
            SmoothCutoff::poly_half(params[0], q(params[1])?)
        }
        "poly_drop" => {
            need(2)?;
            SmoothCutoff::poly_drop(params[0], q(params[1])?)
        }
        "gaussian" => {
            need(2)?;
            SmoothCutoff::gaussian(params[0], params[1])
        }
        "polynomial" => SmoothCutoff::polynomial(params),
        "linear" => {
            need(0)?;
            Ok(SmoothCutoff::linear())
        }
        other => Err(Error::Unknown { kind: "cutoff", name: other.to_string() }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(f: &SmoothCutoff, x: f64, k: usize) -> f64 {
        // central difference of the (k-1)-th analytic derivative
        let h = 1e-5;
        (f.derivative(x + h, k - 1) - f.derivative(x - h, k - 1)) / (2.0 * h)
    }

    #[test]
    fn smooth_step_limits_and_monotone() {
        let f = SmoothCutoff::smooth_step(0.0, 1.0).unwrap();
        assert_eq!(f.value(-1.0), 0.0);
        assert_eq!(f.value(-3.0), 0.0);
        assert_eq!(f.value(0.0), 1.0);
        assert_eq!(f.value(2.0), 1.0);
        let mut prev = 0.0;
        for i in 0..=200 {
            let v = f.value(-1.0 + i as f64 / 200.0);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn half_order_values_and_sign() {
        let f = SmoothCutoff::half_order(1.0).unwrap();
        assert!((f.value(-4.0) - 2.0).abs() < 1e-15);
        assert_eq!(f.value(1.0), 0.0);
        assert_eq!(f.value(0.0), 0.0);
        for i in 0..400 {
            let x = -5.0 + i as f64 * 0.0137;
            assert!(f.derivative(x, 1) <= 0.0, "x = {x}");
        }
    }

    #[test]
    fn bump_plateau_and_support() {
        let f = SmoothCutoff::bump(1.0, 2.0, 0.2).unwrap();
        for i in 0..=60 {
            let x = 1.2 + 0.6 * i as f64 / 60.0;
            assert_eq!(f.value(x), 1.0);
        }
        assert_eq!(f.value(1.0), 0.0);
        assert_eq!(f.value(0.5), 0.0);
        assert_eq!(f.value(2.0), 0.0);
        assert!(f.value(1.1) > 0.0 && f.value(1.1) < 1.0);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let cutoffs = [
            SmoothCutoff::smooth_step(0.3, 0.7).unwrap(),
            SmoothCutoff::bump(-1.0, 1.0, 0.5).unwrap(),
            SmoothCutoff::half_order(1.0).unwrap(),
            SmoothCutoff::chi_minus(0.2, 0.5).unwrap(),
            SmoothCutoff::poly_step(0.0, 1.0, 5).unwrap(),
            SmoothCutoff::poly_half(2.0, 4).unwrap(),
            SmoothCutoff::gaussian(0.1, 0.4).unwrap(),
            SmoothCutoff::bump(-1.0, 1.0, 0.5).unwrap().affine(3.0, 0.25).unwrap(),
        ];
        for f in &cutoffs {
            for &x in &[-1.7, -0.6, -0.35, 0.05, 0.42, 0.8] {
                for k in 1..=4 {
                    let a = f.derivative(x, k);
                    let b = fd(f, x, k);
                    assert!((a - b).abs() <= 1e-4 * (1.0 + a.abs()), "{f} x={x} k={k}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn poly_ramp_is_flat_to_order_q() {
        let f = SmoothCutoff::poly_step(1.0, 1.0, 4).unwrap();
        // at the left end derivatives 1..3 vanish, the 4th does not
        let d = f.derivatives(1e-9, 4);
        for k in 1..4 {
            assert!(d[k].abs() < 1e-6, "k = {k}: {}", d[k]);
        }
        assert!(d[4].abs() > 1.0);
        assert!((f.value(0.5) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn order_scan_finite_for_shipped_cutoffs() {
        for f in [
            SmoothCutoff::half_order(1.0).unwrap(),
            SmoothCutoff::bump(1.0, 2.0, 0.2).unwrap(),
            SmoothCutoff::smooth_step(0.0, 1.0).unwrap(),
            SmoothCutoff::chi_minus(0.1, 1.0).unwrap(),
        ] {
            let scan = f.order_scan(6);
            assert!(scan.is_finite(), "{f}: {:?}", scan.coefficients);
        }
        // √(-x) itself: C_0 = sup √|x| / (1+|x|)^{1/2} <= 1
        let scan = SmoothCutoff::half_order(1.0).unwrap().order_scan(0);
        assert!(scan.coefficients[0] <= 1.0);
    }

    #[test]
    fn power_and_root_identities() {
        let f = SmoothCutoff::half_order(1.0).unwrap();
        let u = f.power(0.5).unwrap();
        let v = f.neg_derivative_root();
        for i in 0..300 {
            let x = -6.0 + i as f64 * 0.02;
            let fx = f.value(x);
            assert!((u.value(x).powi(2) - fx).abs() < 1e-12);
            assert!((v.value(x).powi(2) + f.derivative(x, 1)).abs() < 1e-12);
        }
    }

    #[test]
    fn make_cutoff_by_name() {
        let f = make_cutoff("bump", &[1.0, 2.0, 0.2]).unwrap();
        assert_eq!(f.value(1.5), 1.0);
        assert!(matches!(make_cutoff("bunp", &[]), Err(Error::Unknown { .. })));
        assert!(make_cutoff("bump", &[1.0]).is_err());
        assert!(make_cutoff("smooth_step", &[0.0, -1.0]).is_err());
    }
}
