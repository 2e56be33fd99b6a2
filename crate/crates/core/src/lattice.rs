//! One-dimensional Dirichlet grid and the dense Hermitian substrate.
//!
//! States are amplitude vectors on the interior grid points; the squared norm
//! carries the spacing, `‖ψ‖² = h Σ |ψ_j|²`. Every operator is a dense complex
//! matrix that is Hermitian with respect to that inner product.

use std::sync::{Arc, OnceLock};

use faer::{c64, Col, Mat};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::Spectrum;

const FIRST_DERIVATIVE: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
const SECOND_DERIVATIVE_CENTER: f64 = -205.0 / 72.0;
const SECOND_DERIVATIVE: [f64; 4] = [8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryMode {
    Dirichlet,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    half_width: f64,
    points: usize,
    spacing: f64,
    boundary: BoundaryMode,
}

/// Builds the grid `x_j = -L + (j+1) h`, `h = 2L/(N+1)`, with implicit zeros at `±L`.
pub fn build_grid(half_width: f64, points: usize) -> Result<Grid> {
    if !half_width.is_finite() || half_width <= 0.0 {
        return Err(Error::InvalidGrid(format!("half width must be finite and positive, got {half_width}")));
    }
    if points < 16 || !points.is_multiple_of(2) {
        return Err(Error::InvalidGrid(format!("point count too small/odd: {points} (need even N >= 16)")));
    }
    let spacing = 2.0 * half_width / (points as f64 + 1.0);
    Ok(Grid { half_width, points, spacing, boundary: BoundaryMode::Dirichlet })
}

impl Grid {
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points == 0
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn boundary(&self) -> BoundaryMode {
        self.boundary
    }

    pub fn x(&self, j: usize) -> f64 {
        // symmetric form keeps x_j = -x_{N-1-j} exactly
        (2.0 * j as f64 + 1.0 - self.points as f64) * 0.5 * self.spacing
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.x(j)).collect()
    }

    /// Samples a real function on the grid.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.points).map(|j| f(self.x(j))).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WaveState {
    amplitudes: Vec<c64>,
    spacing: f64,
}

impl WaveState {
    pub fn new(amplitudes: Vec<c64>, spacing: f64) -> Self {
        Self { amplitudes, spacing }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> c64) -> Self {
        Self { amplitudes: (0..grid.len()).map(|j| f(grid.x(j))).collect(), spacing: grid.spacing() }
    }

    pub fn amplitudes(&self) -> &[c64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<c64> {
        self.amplitudes
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_squared(&self) -> f64 {
        self.spacing * self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !n.is_finite() || n == 0.0 {
            return Err(Error::VanishingNorm { norm: n, limit: 0.0 });
        }
        Ok(Self { amplitudes: self.amplitudes.iter().map(|z| z / n).collect(), spacing: self.spacing })
    }

    /// `h Σ conj(self_j) other_j`.
    pub fn inner(&self, other: &WaveState) -> c64 {
        let s: c64 = self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum();
        s * self.spacing
    }

    /// Probability mass on grid points selected by `keep`.
    pub fn mass_where(&self, grid: &Grid, keep: impl Fn(f64) -> bool) -> f64 {
        self.amplitudes.iter().enumerate().filter(|(j, _)| keep(grid.x(*j))).map(|(_, z)| z.norm_sqr()).sum::<f64>() * self.spacing
    }

    pub fn to_col(&self) -> Col<c64> {
        Col::from_fn(self.amplitudes.len(), |i| self.amplitudes[i])
    }
}

/// Dense Hermitian matrix with a lazily computed, shared eigendecomposition.
#[derive(Clone)]
pub struct HermitianOperator {
    matrix: Arc<Mat<c64>>,
    label: String,
    discarded: f64,
    spectrum: Arc<OnceLock<std::result::Result<Arc<Spectrum>, Error>>>,
}

impl std::fmt::Debug for HermitianOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HermitianOperator")
            .field("label", &self.label)
            .field("dim", &self.dim())
            .field("discarded", &self.discarded)
            .finish()
    }
}

/// Returns `(M + M†)/2`, recording `‖(M − M†)/2‖_F` as the discarded part.
pub fn hermitize(m: Mat<c64>, label: impl Into<String>) -> Result<HermitianOperator> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    let n = m.nrows();
    for j in 0..n {
        for i in 0..n {
            let z = m[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite(format!("matrix entry ({i}, {j})")));
            }
        }
    }
    let mut herm = Mat::<c64>::zeros(n, n);
    let mut anti = 0.0;
    for j in 0..n {
        for i in 0..n {
            let a = m[(i, j)];
            let b = m[(j, i)].conj();
            herm[(i, j)] = (a + b) * 0.5;
            anti += ((a - b) * 0.5).norm_sqr();
        }
    }
    Ok(HermitianOperator::from_parts(herm, label.into(), anti.sqrt()))
}

impl HermitianOperator {
    fn from_parts(matrix: Mat<c64>, label: String, discarded: f64) -> Self {
        Self { matrix: Arc::new(matrix), label, discarded, spectrum: Arc::new(OnceLock::new()) }
    }

    /// Diagonal (multiplication) operator.
    pub fn diagonal(values: &[f64], label: impl Into<String>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("diagonal entry {v}")));
        }
        let n = values.len();
        let m = Mat::from_fn(n, n, |i, j| if i == j { c64::new(values[i], 0.0) } else { c64::new(0.0, 0.0) });
        Ok(Self::from_parts(m, label.into(), 0.0))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_parts(Mat::identity(n, n), "identity".into(), 0.0)
    }

    pub fn matrix(&self) -> &Mat<c64> {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Frobenius norm of the anti-Hermitian part removed at construction.
    pub fn discarded_norm(&self) -> f64 {
        self.discarded
    }

    /// `‖M − M†‖_F`.
    pub fn hermiticity_defect(&self) -> f64 {
        let m = &*self.matrix;
        let n = self.dim();
        let mut s = 0.0;
        for j in 0..n {
            for i in 0..n {
                s += (m[(i, j)] - m[(j, i)].conj()).norm_sqr();
            }
        }
        s.sqrt()
    }

    /// Cached eigendecomposition; computed once and shared by all clones.
    pub fn spectrum(&self) -> Result<Arc<Spectrum>> {
        self.spectrum.get_or_init(|| Spectrum::compute(&self.matrix).map(Arc::new)).clone()
    }

    pub fn apply(&self, v: &[c64]) -> Vec<c64> {
        crate::spectral::matvec(&self.matrix, v)
    }

    pub fn shifted(&self, shift: f64) -> Result<Self> {
        let n = self.dim();
        let m = Mat::from_fn(n, n, |i, j| if i == j { self.matrix[(i, j)] - shift } else { self.matrix[(i, j)] });
        hermitize(m, format!("{} - {shift}", self.label))
    }
}

/// Position, momentum and negative Laplacian on a grid.
#[derive(Clone, Debug)]
pub struct CanonicalOperators {
    pub x: HermitianOperator,
    pub p: HermitianOperator,
    pub p2: HermitianOperator,
}

/// Builds `X`, `P = -i D1` and `P2 = -D2` with eighth-order central stencils.
///
/// `D1` truncates the stencil at the walls so it stays antisymmetric. `D2` uses
/// odd mirror images across the walls, which keeps it symmetric and eighth-order
/// accurate on functions that vanish at `±L`.
pub fn canonical_operators(grid: &Grid) -> Result<CanonicalOperators> {
    let n = grid.len();
    let h = grid.spacing();
    let x = HermitianOperator::diagonal(&grid.positions(), "X")?;

    let mut d1 = Mat::<c64>::zeros(n, n);
    for j in 0..n {
        for (k, &c) in FIRST_DERIVATIVE.iter().enumerate() {
            let off = k + 1;
            if j + off < n {
                d1[(j, j + off)] += c64::new(c / h, 0.0);
            }
            if j >= off {
                d1[(j, j - off)] -= c64::new(c / h, 0.0);
            }
        }
    }
    let p = Mat::from_fn(n, n, |i, j| d1[(i, j)] * c64::new(0.0, -1.0));
    let p = hermitize(p, "P")?;

    let mut d2 = Mat::<c64>::zeros(n, n);
    let ni = n as i64;
    for j in 0..n {
        d2[(j, j)] += c64::new(SECOND_DERIVATIVE_CENTER / (h * h), 0.0);
        for (k, &c) in SECOND_DERIVATIVE.iter().enumerate() {
            let off = k as i64 + 1;
            for idx in [j as i64 - off, j as i64 + off] {
                let w = c / (h * h);
                if (0..ni).contains(&idx) {
                    d2[(j, idx as usize)] += c64::new(w, 0.0);
                } else if idx <= -2 {
                    d2[(j, (-2 - idx) as usize)] -= c64::new(w, 0.0);
                } else if idx > ni {
                    d2[(j, (2 * ni - idx) as usize)] -= c64::new(w, 0.0);
                }
            }
        }
    }
    let p2 = Mat::from_fn(n, n, |i, j| -d2[(i, j)]);
    let p2 = hermitize(p2, "P2")?;
    Ok(CanonicalOperators { x, p, p2 })
}

/// `Re(h ψ† M ψ)`.
pub fn expectation(m: &HermitianOperator, psi: &WaveState) -> Result<f64> {
    if m.dim() != psi.len() {
        return Err(Error::ShapeMismatch { expected: m.dim(), got: psi.len() });
    }
    let z = raw_expectation(m.matrix(), psi);
    debug_assert!(z.im.abs() <= 1e-10 * z.re.abs().max(1.0), "imaginary expectation {}", z.im);
    Ok(z.re)
}

pub(crate) fn raw_expectation(m: &Mat<c64>, psi: &WaveState) -> c64 {
    let a = psi.amplitudes();
    let mv = crate::spectral::matvec(m, a);
    let s: c64 = a.iter().zip(&mv).map(|(u, v)| u.conj() * v).sum();
    s * psi.spacing()
}
