//! Dense Hermitian eigendecompositions and the matrix helpers built on them.

use faer::{c64, Mat, Side};

use crate::error::{Error, Result};

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: Mat<c64>,
}

impl Spectrum {
    pub fn compute(matrix: &Mat<c64>) -> Result<Self> {
        let evd = matrix.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Eigen(format!("{e:?}")))?;
        let values: Vec<f64> = evd.S().column_vector().iter().map(|z| z.re).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Eigen("non-finite eigenvalue".into()));
        }
        Ok(Self { values, vectors: evd.U().to_owned() })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `U diag(w) U†` for complex weights.
    pub fn reconstruct(&self, weights: &[c64]) -> Mat<c64> {
        let u = &self.vectors;
        let scaled = Mat::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)] * weights[j]);
        &scaled * u.adjoint()
    }

    /// `U diag(f(λ)) U†` for a real spectral function.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Mat<c64> {
        let w: Vec<c64> = self.values.iter().map(|&l| c64::new(f(l), 0.0)).collect();
        self.reconstruct(&w)
    }

    /// Coefficients `U† v` of a vector in the eigenbasis.
    pub fn coefficients(&self, v: &[c64]) -> Vec<c64> {
        let n = self.dim();
        let mut out = vec![c64::new(0.0, 0.0); n];
        for (j, o) in out.iter_mut().enumerate() {
            let mut s = c64::new(0.0, 0.0);
            for i in 0..n {
                s += self.vectors[(i, j)].conj() * v[i];
            }
            *o = s;
        }
        out
    }

    /// `U c` for eigenbasis coefficients `c`.
    pub fn synthesize(&self, c: &[c64]) -> Vec<c64> {
        let n = self.dim();
        let mut out = vec![c64::new(0.0, 0.0); n];
        for (j, &cj) in c.iter().enumerate() {
            if cj == c64::new(0.0, 0.0) {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.vectors[(i, j)] * cj;
            }
        }
        out
    }

    /// Applies `f(M)` to a vector without forming the matrix.
    pub fn apply(&self, v: &[c64], f: impl Fn(f64) -> f64) -> Vec<c64> {
        let mut c = self.coefficients(v);
        for (cj, &l) in c.iter_mut().zip(&self.values) {
            *cj *= f(l);
        }
        self.synthesize(&c)
    }
}

/// Largest singular value.
pub fn operator_norm(m: &Mat<c64>) -> Result<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0.0);
    }
    let sv = m.singular_values().map_err(|e| Error::Eigen(format!("{e:?}")))?;
    Ok(sv.first().copied().unwrap_or(0.0))
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &Mat<c64>) -> Result<Vec<f64>> {
    m.self_adjoint_eigenvalues(Side::Lower).map_err(|e| Error::Eigen(format!("{e:?}")))
}

pub fn frobenius(m: &Mat<c64>) -> f64 {
    m.norm_l2()
}

pub fn commutator(a: &Mat<c64>, b: &Mat<c64>) -> Mat<c64> {
    a * b - b * a
}

pub fn scaled(m: &Mat<c64>, c: c64) -> Mat<c64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * c)
}

pub fn matvec(m: &Mat<c64>, v: &[c64]) -> Vec<c64> {
    let n = m.nrows();
    let mut out = vec![c64::new(0.0, 0.0); n];
    for (j, &vj) in v.iter().enumerate() {
        if vj == c64::new(0.0, 0.0) {
            continue;
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o += m[(i, j)] * vj;
        }
    }
    out
}

/// Multiplies rows by `left` and columns by `right`: `diag(left) M diag(right)`.
pub fn diag_sandwich(left: &[f64], m: &Mat<c64>, right: &[f64]) -> Mat<c64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * (left[i] * right[j]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_identity_reconstructs_matrix() {
        let m = Mat::from_fn(6, 6, |i, j| {
            let re = ((i + j) as f64).cos();
            let im = if i == j { 0.0 } else { (i as f64 - j as f64) * 0.1 };
            c64::new(re, im)
        });
        let spec = Spectrum::compute(&m).unwrap();
        let back = spec.map(|l| l);
        assert!((&back - &m).norm_l2() < 1e-12);
    }

    #[test]
    fn operator_norm_of_diagonal() {
        let m = Mat::from_fn(4, 4, |i, j| if i == j { c64::new(-(i as f64) - 1.0, 0.0) } else { c64::new(0.0, 0.0) });
        assert!((operator_norm(&m).unwrap() - 4.0).abs() < 1e-12);
    }
}
