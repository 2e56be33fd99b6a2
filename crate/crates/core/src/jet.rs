//! Truncated Taylor arithmetic.
//!
//! A [`Jet`] carries the normalized Taylor coefficients `f^(k)(x0) / k!` of a
//! function at a point. Composing jets applies the chain rule exactly, so every
//! cutoff in [`crate::funcalc`] gets closed-form derivatives from the same
//! expression that defines its value.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    coeffs: Vec<f64>,
}

impl Jet {
    /// The independent variable `x` at `x0`, truncated after order `order`.
    pub fn variable(x0: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = x0;
        if order >= 1 {
            coeffs[1] = 1.0;
        }
        Self { coeffs }
    }

    pub fn constant(c: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = c;
        Self { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self::constant(0.0, order)
    }

    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty());
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// The k-th derivative `f^(k)(x0)`.
    pub fn derivative(&self, k: usize) -> f64 {
        if k > self.order() {
            return f64::NAN;
        }
        self.coeffs[k] * factorial(k)
    }

    /// All derivatives `f(x0), f'(x0), ..., f^(order)(x0)`.
    pub fn derivatives(&self) -> Vec<f64> {
        (0..=self.order()).map(|k| self.derivative(k)).collect()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    pub fn offset(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    /// Drops the constant term and shifts: the jet of `f'` truncated one order lower.
    pub fn differentiate(&self) -> Self {
        if self.order() == 0 {
            return Self::zero(0);
        }
        let coeffs = (1..=self.order()).map(|k| self.coeffs[k] * k as f64).collect();
        Self { coeffs }
    }

    pub fn truncate(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order + 1, 0.0);
        Self { coeffs }
    }

    pub fn recip(&self) -> Self {
        let a = &self.coeffs;
        let n = a.len();
        let mut b = vec![0.0; n];
        b[0] = 1.0 / a[0];
        for k in 1..n {
            let mut s = 0.0;
            for j in 1..=k {
                s += a[j] * b[k - j];
            }
            b[k] = -s * b[0];
        }
        Self { coeffs: b }
    }

    pub fn exp(&self) -> Self {
        let a = &self.coeffs;
        let n = a.len();
        let mut b = vec![0.0; n];
        b[0] = a[0].exp();
        for k in 1..n {
            let mut s = 0.0;
            for j in 1..=k {
                s += j as f64 * a[j] * b[k - j];
            }
            b[k] = s / k as f64;
        }
        Self { coeffs: b }
    }

    /// `self^alpha` for a strictly positive base value.
    pub fn powf(&self, alpha: f64) -> Self {
        let a = &self.coeffs;
        let n = a.len();
        let mut b = vec![0.0; n];
        b[0] = a[0].powf(alpha);
        for k in 1..n {
            let mut s = 0.0;
            for j in 1..=k {
                s += (alpha * j as f64 - (k - j) as f64) * a[j] * b[k - j];
            }
            b[k] = s / (k as f64 * a[0]);
        }
        Self { coeffs: b }
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut out = Self::constant(1.0, self.order());
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Evaluates the polynomial `sum_k c_k y^k` at the jet `y` (Horner).
    pub fn polynomial(&self, c: &[f64]) -> Self {
        let mut out = Self::zero(self.order());
        for &ck in c.iter().rev() {
            out = (&out * self).offset(ck);
        }
        out
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect();
        Jet { coeffs }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect();
        Jet { coeffs }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        let n = self.coeffs.len().min(rhs.coeffs.len());
        let mut coeffs = vec![0.0; n];
        for (k, ck) in coeffs.iter_mut().enumerate() {
            let mut s = 0.0;
            for j in 0..=k {
                s += self.coeffs[j] * rhs.coeffs[k - j];
            }
            *ck = s;
        }
        Jet { coeffs }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * j as f64)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_sine_like_polynomial_matches_series() {
        // d^k/dx^k exp(2x) at 0 = 2^k
        let x = Jet::variable(0.0, 6).scale(2.0);
        let e = x.exp();
        for k in 0..=6 {
            assert!((e.derivative(k) - 2f64.powi(k as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn powf_and_recip_agree_with_closed_forms() {
        // f(x) = (1+x)^(-1/2) at x = 0.3
        let x = Jet::variable(0.3, 4).offset(1.0);
        let f = x.powf(-0.5);
        let base: f64 = 1.3;
        let expected =
            [base.powf(-0.5), -0.5 * base.powf(-1.5), 0.75 * base.powf(-2.5), -1.875 * base.powf(-3.5), 6.5625 * base.powf(-4.5)];
        for (k, e) in expected.iter().enumerate() {
            assert!((f.derivative(k) - e).abs() < 1e-12 * e.abs().max(1.0), "k={k}");
        }
        let r = x.recip();
        assert!((r.derivative(3) + 6.0 / base.powi(4)).abs() < 1e-12);
    }

    #[test]
    fn product_rule() {
        let x = Jet::variable(1.5, 5);
        let f = &x * &x.exp();
        // (x e^x)^(k) = (x + k) e^x
        for k in 0..=5 {
            let e = (1.5 + k as f64) * 1.5f64.exp();
            assert!((f.derivative(k) - e).abs() < 1e-11 * e);
        }
    }
}
