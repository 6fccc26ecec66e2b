//! Dense complex linear algebra over row-major matrices.
//!
//! Everything downstream (channels, Choi matrices, the Bayes engine) is built
//! on the primitives here: Hermitian eigendecomposition, support projections,
//! pseudoinverses, Kronecker products, partial traces and PSD square roots.
//! Matrices are stored dense; the problem sizes this crate targets are tiny
//! (side lengths in the dozens at most).

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Sub};

use num_complex::Complex64;

/// Shorthand for the complex scalar used throughout.
pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Errors raised by the linear algebra layer.
#[derive(Debug, Clone, PartialEq)]
pub enum LinalgError {
    /// The operation requires a square matrix.
    NotSquare { rows: usize, cols: usize },
    /// The matrix is not Hermitian; carries the largest `|A - A†|` entry.
    NotHermitian { asymmetry: f64 },
    /// The matrix is not positive semidefinite; carries the offending eigenvalue.
    NotPsd { min_eigenvalue: f64 },
    /// The Jacobi sweep limit was exhausted before the off-diagonal mass vanished.
    NoConvergence,
    /// Operand shapes do not line up.
    DimensionMismatch { expected: (usize, usize), got: (usize, usize) },
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::NotSquare { rows, cols } => {
                write!(f, "matrix is {rows}x{cols}, expected square")
            }
            LinalgError::NotHermitian { asymmetry } => {
                write!(f, "matrix is not Hermitian (max |A - A†| entry = {asymmetry:e})")
            }
            LinalgError::NotPsd { min_eigenvalue } => {
                write!(f, "matrix is not positive semidefinite (min eigenvalue = {min_eigenvalue:e})")
            }
            LinalgError::NoConvergence => write!(f, "eigensolver failed to converge"),
            LinalgError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {}x{}, got {}x{}", expected.0, expected.1, got.0, got.1)
            }
        }
    }
}

/// Numerical thresholds shared by every rank/positivity/equality decision.
///
/// * `rank_tol` — relative: an eigenvalue counts as nonzero iff
///   `lambda > rank_tol * max(1, lambda_max)`.
/// * `psd_tol` — absolute lower bound on the minimum eigenvalue for a matrix
///   to still count as positive semidefinite.
/// * `eq_tol` — absolute entrywise (max-norm) tolerance for matrix equality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rank_tol: f64,
    pub psd_tol: f64,
    pub eq_tol: f64,
}

impl Tolerances {
    pub fn new(rank_tol: f64, psd_tol: f64, eq_tol: f64) -> Option<Self> {
        let ok = |t: f64| t > 0.0 && t <= 1e-3;
        if ok(rank_tol) && ok(psd_tol) && ok(eq_tol) {
            Some(Tolerances { rank_tol, psd_tol, eq_tol })
        } else {
            None
        }
    }

    /// Threshold below which an eigenvalue of a PSD matrix is treated as zero.
    pub fn rank_threshold(&self, lambda_max: f64) -> f64 {
        self.rank_tol * if lambda_max > 1.0 { lambda_max } else { 1.0 }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rank_tol: 1e-9, psd_tol: 1e-9, eq_tol: 1e-8 }
    }
}

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<C64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<C64>) -> Option<Self> {
        if entries.len() != rows * cols || entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return None;
        }
        Some(CMatrix { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, entries: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// The `ij`-th matrix unit `E_ij` of side `n`.
    pub fn matrix_unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        m[(i, j)] = ONE;
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            entries.extend_from_slice(row);
        }
        CMatrix { rows: r, cols: c, entries }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            entries.extend(row.iter().map(|&x| C64::new(x, 0.0)));
        }
        CMatrix { rows: r, cols: c, entries }
    }

    /// Column vector times adjoint row vector: `v · w†`.
    pub fn outer(v: &[C64], w: &[C64]) -> Self {
        let mut m = CMatrix::zeros(v.len(), w.len());
        for (i, &vi) in v.iter().enumerate() {
            for (j, &wj) in w.iter().enumerate() {
                m[(i, j)] = vi * wj.conj();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn adjoint(&self) -> Self {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)];
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        let entries = self.entries.iter().map(|&z| z * s).collect();
        CMatrix { rows: self.rows, cols: self.cols, entries }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise difference `|self - other|`; the matrices must share shape.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry of `|A - A†|`; zero for exactly Hermitian input.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.rows {
            for c in r..self.cols {
                let d = (self[(r, c)] - self[(c, r)].conj()).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// `(A + A†) / 2`.
    pub fn hermitize(&self) -> Self {
        debug_assert!(self.is_square());
        let mut out = CMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(r, c)] = (self[(r, c)] + self[(c, r)].conj()) * C64::new(0.5, 0.0);
            }
        }
        out
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// `self · other · self†`.
    pub fn conjugate_by(&self, other: &CMatrix) -> CMatrix {
        self.matmul(other).matmul(&self.adjoint())
    }

    /// Kronecker product: `(A ⊗ B)[(i·rB + k), (j·cB + l)] = A[i,j] · B[k,l]`.
    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let (ra, ca) = (self.rows, self.cols);
        let (rb, cb) = (other.rows, other.cols);
        let mut out = CMatrix::zeros(ra * rb, ca * cb);
        for i in 0..ra {
            for j in 0..ca {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..rb {
                    for l in 0..cb {
                        out[(i * rb + k, j * cb + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub(crate) fn require_square(&self) -> Result<usize, LinalgError> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(LinalgError::NotSquare { rows: self.rows, cols: self.cols })
        }
    }

    pub(crate) fn require_hermitian(&self, tol: &Tolerances) -> Result<(), LinalgError> {
        self.require_square()?;
        let asym = self.asymmetry();
        if asym > tol.eq_tol {
            return Err(LinalgError::NotHermitian { asymmetry: asym });
        }
        Ok(())
    }
}

impl core::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.entries[r * self.cols + c]
    }
}

impl core::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.entries[r * self.cols + c]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        CMatrix { rows: self.rows, cols: self.cols, entries }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect();
        CMatrix { rows: self.rows, cols: self.cols, entries }
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, other: &CMatrix) -> CMatrix {
        self.matmul(other)
    }
}

/// Result of a Hermitian eigendecomposition: `A = V · diag(λ) · V†` with the
/// eigenvalues sorted descending and the columns of `V` orthonormal.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl HermitianSpectrum {
    /// `i`-th eigenvector as a column.
    pub fn eigenvector(&self, i: usize) -> Vec<C64> {
        let n = self.eigenvectors.rows();
        (0..n).map(|r| self.eigenvectors[(r, i)]).collect()
    }

    /// Rebuild `V · diag(λ) · V†`.
    pub fn reconstruct(&self) -> CMatrix {
        self.map_eigenvalues(|lam| lam)
    }

    /// Apply `f` to each eigenvalue and reassemble `V · diag(f(λ)) · V†`.
    pub fn map_eigenvalues(&self, mut f: impl FnMut(f64) -> f64) -> CMatrix {
        let n = self.eigenvalues.len();
        let mut out = CMatrix::zeros(n, n);
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let flam = f(lam);
            if flam == 0.0 {
                continue;
            }
            let v = self.eigenvector(k);
            for i in 0..n {
                let vi = v[i] * C64::new(flam, 0.0);
                for j in 0..n {
                    out[(i, j)] += vi * v[j].conj();
                }
            }
        }
        out
    }
}

const MAX_JACOBI_SWEEPS: usize = 128;

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// Quadratically convergent and backward stable for the small dense matrices
/// this crate deals in. Degenerate eigenvalues may come back with any
/// orthonormal basis of their eigenspace; downstream consumers (supports,
/// pseudoinverses, orthogonal Kraus operators) are basis-independent.
pub fn hermitian_eig(a: &CMatrix, tol: &Tolerances) -> Result<HermitianSpectrum, LinalgError> {
    a.require_hermitian(tol)?;
    let n = a.rows();
    let mut m = a.hermitize();
    let mut v = CMatrix::identity(n);

    if n > 1 {
        let scale = m.max_abs().max(1.0);
        let stop = f64::EPSILON * scale;
        let mut off = off_diag_max(&m);
        let mut sweeps = 0;
        while off > stop {
            if sweeps == MAX_JACOBI_SWEEPS {
                return Err(LinalgError::NoConvergence);
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    jacobi_rotate(&mut m, &mut v, p, q);
                }
            }
            off = off_diag_max(&m);
            sweeps += 1;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap());

    let eigenvalues: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            eigenvectors[(r, new_col)] = v[(r, old_col)];
        }
    }
    Ok(HermitianSpectrum { eigenvalues, eigenvectors })
}

fn off_diag_max(m: &CMatrix) -> f64 {
    let n = m.rows();
    let mut worst = 0.0f64;
    for p in 0..n {
        for q in p + 1..n {
            worst = worst.max(m[(p, q)].norm());
        }
    }
    worst
}

/// One complex Jacobi rotation annihilating `m[(p, q)]`, accumulated into `v`.
fn jacobi_rotate(m: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let beta = m[(p, q)];
    let b = beta.norm();
    if b == 0.0 {
        return;
    }
    let phase = beta / C64::new(b, 0.0);
    let alpha = m[(p, p)].re;
    let gamma = m[(q, q)].re;
    let theta = (gamma - alpha) / (2.0 * b);
    // smaller-magnitude root of t² − 2θt − 1 = 0
    let t = if theta >= 0.0 {
        -1.0 / (theta + libm::sqrt(1.0 + theta * theta))
    } else {
        1.0 / (-theta + libm::sqrt(1.0 + theta * theta))
    };
    let c = 1.0 / libm::sqrt(1.0 + t * t);
    // rotation columns p, q: [c, -sz*; sz, c] with sz = t·c·conj(phase)
    let sz = C64::new(t * c, 0.0) * phase.conj();
    let n = m.rows();

    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = mkp * C64::new(c, 0.0) + mkq * sz;
        m[(k, q)] = mkq * C64::new(c, 0.0) - mkp * sz.conj();
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = mpk * C64::new(c, 0.0) + mqk * sz.conj();
        m[(q, k)] = mqk * C64::new(c, 0.0) - mpk * sz;
    }
    // clean the annihilated pair and keep the diagonal exactly real
    m[(p, q)] = ZERO;
    m[(q, p)] = ZERO;
    m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = C64::new(m[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * C64::new(c, 0.0) + vkq * sz;
        v[(k, q)] = vkq * C64::new(c, 0.0) - vkp * sz.conj();
    }
}

/// Positive semidefiniteness verdict with witness.
#[derive(Debug, Clone)]
pub struct PsdReport {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
    /// Eigenvector of the minimum eigenvalue when the test fails.
    pub witness: Option<Vec<C64>>,
}

/// `true` iff the minimum eigenvalue is at least `-psd_tol`.
pub fn is_psd(a: &CMatrix, tol: &Tolerances) -> Result<PsdReport, LinalgError> {
    let spec = hermitian_eig(a, tol)?;
    let n = spec.eigenvalues.len();
    if n == 0 {
        return Ok(PsdReport { is_psd: true, min_eigenvalue: 0.0, witness: None });
    }
    let min_eigenvalue = spec.eigenvalues[n - 1];
    let verdict = min_eigenvalue >= -tol.psd_tol;
    let witness = if verdict { None } else { Some(spec.eigenvector(n - 1)) };
    Ok(PsdReport { is_psd: verdict, min_eigenvalue, witness })
}

fn psd_spectrum(a: &CMatrix, tol: &Tolerances) -> Result<HermitianSpectrum, LinalgError> {
    let spec = hermitian_eig(a, tol)?;
    if let Some(&min) = spec.eigenvalues.last() {
        if min < -tol.psd_tol {
            return Err(LinalgError::NotPsd { min_eigenvalue: min });
        }
    }
    Ok(spec)
}

/// Orthogonal projection onto the range of a PSD matrix; the smallest
/// projection `P` with `P·A = A = A·P`.
pub fn support(a: &CMatrix, tol: &Tolerances) -> Result<CMatrix, LinalgError> {
    let spec = psd_spectrum(a, tol)?;
    let lambda_max = spec.eigenvalues.first().copied().unwrap_or(0.0);
    let thresh = tol.rank_threshold(lambda_max);
    Ok(spec.map_eigenvalues(|lam| if lam > thresh { 1.0 } else { 0.0 }))
}

/// Moore–Penrose pseudoinverse of a PSD matrix: the unique PSD `Â` with
/// `A·Â = Â·A = support(A)`.
pub fn pseudoinverse(a: &CMatrix, tol: &Tolerances) -> Result<CMatrix, LinalgError> {
    let spec = psd_spectrum(a, tol)?;
    let lambda_max = spec.eigenvalues.first().copied().unwrap_or(0.0);
    let thresh = tol.rank_threshold(lambda_max);
    Ok(spec.map_eigenvalues(|lam| if lam > thresh { 1.0 / lam } else { 0.0 }))
}

/// PSD square root: the PSD `S` with `S·S = A`.
pub fn psd_sqrt(a: &CMatrix, tol: &Tolerances) -> Result<CMatrix, LinalgError> {
    let spec = psd_spectrum(a, tol)?;
    Ok(spec.map_eigenvalues(|lam| if lam > 0.0 { libm::sqrt(lam) } else { 0.0 }))
}

/// Kronecker product under the name the operation tables use.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kron(b)
}

/// Partial trace over the first tensor factor:
/// `tr₁(A ⊗ B) = tr(A) · B`, extended linearly.
pub fn partial_trace_first(m: &CMatrix, dim_first: usize, dim_second: usize) -> Result<CMatrix, LinalgError> {
    let side = dim_first * dim_second;
    if m.rows() != side || m.cols() != side {
        return Err(LinalgError::DimensionMismatch { expected: (side, side), got: (m.rows(), m.cols()) });
    }
    let mut out = CMatrix::zeros(dim_second, dim_second);
    for i in 0..dim_first {
        for k in 0..dim_second {
            for l in 0..dim_second {
                out[(k, l)] += m[(i * dim_second + k, i * dim_second + l)];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    pub(crate) fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
        let entries = (0..rows * cols)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        CMatrix::new(rows, cols, entries).unwrap()
    }

    pub(crate) fn random_hermitian(rng: &mut impl Rng, n: usize) -> CMatrix {
        random_matrix(rng, n, n).hermitize()
    }

    pub(crate) fn random_psd(rng: &mut impl Rng, n: usize) -> CMatrix {
        let b = random_matrix(rng, n, n);
        b.adjoint().matmul(&b)
    }

    #[test]
    fn rejects_nonfinite_entries() {
        assert!(CMatrix::new(1, 1, vec![c(f64::NAN, 0.0)]).is_none());
        assert!(CMatrix::new(1, 2, vec![c(1.0, 0.0)]).is_none());
    }

    #[test]
    fn tolerances_validate_range() {
        assert!(Tolerances::new(1e-9, 1e-9, 1e-8).is_some());
        assert!(Tolerances::new(0.0, 1e-9, 1e-8).is_none());
        assert!(Tolerances::new(1e-9, 1e-2, 1e-8).is_none());
    }

    #[test]
    fn eig_diagonal_input() {
        let tol = Tolerances::default();
        let a = CMatrix::from_diag(&[1.0, 3.0]);
        let spec = hermitian_eig(&a, &tol).unwrap();
        assert!((spec.eigenvalues[0] - 3.0).abs() < 1e-14);
        assert!((spec.eigenvalues[1] - 1.0).abs() < 1e-14);
        // permuted standard basis vectors
        assert!((spec.eigenvectors[(1, 0)].norm() - 1.0).abs() < 1e-14);
        assert!((spec.eigenvectors[(0, 1)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_pauli_x() {
        let tol = Tolerances::default();
        let x = CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let spec = hermitian_eig(&x, &tol).unwrap();
        assert!((spec.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((spec.eigenvalues[1] + 1.0).abs() < 1e-14);
        let s = 1.0 / 2.0f64.sqrt();
        // eigenvectors are (1,1)/√2 and (1,−1)/√2 up to phase
        let v0 = spec.eigenvector(0);
        assert!((v0[0].norm() - s).abs() < 1e-12 && (v0[1].norm() - s).abs() < 1e-12);
        assert!((v0[0] - v0[1]).norm() < 1e-12);
        let v1 = spec.eigenvector(1);
        assert!((v1[0] + v1[1]).norm() < 1e-12);
    }

    #[test]
    fn eig_reconstruction_random_6x6() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let tol = Tolerances::default();
        for _ in 0..20 {
            let a = random_hermitian(&mut rng, 6);
            let spec = hermitian_eig(&a, &tol).unwrap();
            assert!(spec.reconstruct().max_abs_diff(&a) < 1e-10);
            let v = &spec.eigenvectors;
            let vv = v.adjoint().matmul(v);
            assert!(vv.max_abs_diff(&CMatrix::identity(6)) < 1e-12);
            let sum: f64 = spec.eigenvalues.iter().sum();
            assert!((sum - a.trace().re).abs() < 1e-10);
            for w in spec.eigenvalues.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn eig_rejects_nonhermitian() {
        let tol = Tolerances::default();
        let a = CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        match hermitian_eig(&a, &tol) {
            Err(LinalgError::NotHermitian { asymmetry }) => assert!((asymmetry - 1.0).abs() < 1e-15),
            other => panic!("expected NotHermitian, got {other:?}"),
        }
        let b = CMatrix::zeros(2, 3);
        assert!(matches!(hermitian_eig(&b, &tol), Err(LinalgError::NotSquare { .. })));
    }

    #[test]
    fn psd_identity_and_witness() {
        let tol = Tolerances::default();
        let id = CMatrix::identity(3);
        assert!(is_psd(&id, &tol).unwrap().is_psd);

        let a = CMatrix::from_diag(&[1.0, -0.5]);
        let report = is_psd(&a, &tol).unwrap();
        assert!(!report.is_psd);
        assert!((report.min_eigenvalue + 0.5).abs() < 1e-14);
        let w = report.witness.unwrap();
        assert!((w[1].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn psd_gram_construction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let tol = Tolerances::default();
        for n in 2..=6 {
            let a = random_psd(&mut rng, n);
            assert!(is_psd(&a, &tol).unwrap().is_psd);
        }
    }

    #[test]
    fn support_example_and_projector() {
        let tol = Tolerances::default();
        let q = 0.3;
        let sigma = CMatrix::from_diag(&[q, 1.0 - q, 0.0]);
        let p = support(&sigma, &tol).unwrap();
        assert!(p.max_abs_diff(&CMatrix::from_diag(&[1.0, 1.0, 0.0])) < 1e-12);

        let id = CMatrix::identity(4);
        assert!(support(&id, &tol).unwrap().max_abs_diff(&id) < 1e-12);

        // rank-1 projector is its own support
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v: Vec<C64> = (0..5).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let proj = CMatrix::outer(&v, &v).scale_re(1.0 / norm2);
        assert!(support(&proj, &tol).unwrap().max_abs_diff(&proj) < 1e-10);
    }

    #[test]
    fn support_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let tol = Tolerances::default();
        for _ in 0..10 {
            let a = random_psd(&mut rng, 5);
            let p = support(&a, &tol).unwrap();
            assert!(p.matmul(&p).max_abs_diff(&p) < 1e-10);
            assert!(p.asymmetry() < 1e-12);
            assert!(p.matmul(&a).max_abs_diff(&a) < 1e-9);
            assert!(a.matmul(&p).max_abs_diff(&a) < 1e-9);
        }
    }

    #[test]
    fn pseudoinverse_diagonal_and_identity() {
        let tol = Tolerances::default();
        let q = 0.3;
        let a = CMatrix::from_diag(&[q, 1.0 - q, 0.0]);
        let pinv = pseudoinverse(&a, &tol).unwrap();
        assert!(pinv.max_abs_diff(&CMatrix::from_diag(&[1.0 / q, 1.0 / (1.0 - q), 0.0])) < 1e-12);

        let id = CMatrix::identity(3);
        assert!(pseudoinverse(&id, &tol).unwrap().max_abs_diff(&id) < 1e-12);
    }

    #[test]
    fn pseudoinverse_penrose_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let tol = Tolerances::default();
        for n in [2usize, 5, 12] {
            // mix in a guaranteed kernel direction for the larger sizes
            let b = random_matrix(&mut rng, n, if n > 2 { n - 1 } else { n });
            let a = b.matmul(&b.adjoint());
            let pinv = pseudoinverse(&a, &tol).unwrap();
            let p = support(&a, &tol).unwrap();
            assert!(a.matmul(&pinv).max_abs_diff(&p) < 1e-9);
            assert!(pinv.matmul(&a).max_abs_diff(&p) < 1e-9);
            assert!(a.matmul(&pinv).matmul(&a).max_abs_diff(&a) < 1e-9);
            assert!(pinv.matmul(&a).matmul(&pinv).max_abs_diff(&pinv) < 1e-9);
            assert!(a.matmul(&pinv).asymmetry() < 1e-9);
            assert!(pinv.matmul(&a).asymmetry() < 1e-9);
            assert!(support(&pinv, &tol).unwrap().max_abs_diff(&p) < 1e-9);
        }
    }

    #[test]
    fn tensor_small_cases() {
        let i2 = CMatrix::identity(2);
        assert!(i2.kron(&i2).max_abs_diff(&CMatrix::identity(4)) < 1e-15);

        let e12 = CMatrix::matrix_unit(2, 0, 1);
        let e21 = CMatrix::matrix_unit(2, 1, 0);
        let t = tensor(&e12, &e21);
        // single 1 at row 0·2+1 = 1, col 1·2+0 = 2
        let mut expected = CMatrix::zeros(4, 4);
        expected[(1, 2)] = c(1.0, 0.0);
        assert!(t.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn tensor_mixed_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let a = random_matrix(&mut rng, 2, 2);
            let b = random_matrix(&mut rng, 2, 2);
            let cm = random_matrix(&mut rng, 2, 2);
            let d = random_matrix(&mut rng, 2, 2);
            let lhs = tensor(&a, &b).matmul(&tensor(&cm, &d));
            let rhs = tensor(&a.matmul(&cm), &b.matmul(&d));
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }

    #[test]
    fn partial_trace_basics() {
        let x = CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let i2 = CMatrix::identity(2);
        let t = partial_trace_first(&tensor(&i2, &x), 2, 2).unwrap();
        assert!(t.max_abs_diff(&x.scale_re(2.0)) < 1e-14);

        // traceless first factor
        let e12 = CMatrix::matrix_unit(2, 0, 1);
        let t2 = partial_trace_first(&tensor(&e12, &x), 2, 2).unwrap();
        assert!(t2.max_abs() < 1e-15);

        assert!(matches!(
            partial_trace_first(&CMatrix::zeros(3, 3), 2, 2),
            Err(LinalgError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn partial_trace_linearity_and_trace_preservation() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let (d1, d2) = (3usize, 2usize);
        let mut m = CMatrix::zeros(d1 * d2, d1 * d2);
        let mut expected = CMatrix::zeros(d2, d2);
        for _ in 0..4 {
            let a = random_matrix(&mut rng, d1, d1);
            let b = random_matrix(&mut rng, d2, d2);
            m = &m + &tensor(&a, &b);
            expected = &expected + &b.scale(a.trace());
        }
        let t = partial_trace_first(&m, d1, d2).unwrap();
        assert!(t.max_abs_diff(&expected) < 1e-12);
        assert!((t.trace() - m.trace()).norm() < 1e-10);
    }

    #[test]
    fn sqrt_diagonal_zero_and_random() {
        let tol = Tolerances::default();
        let a = CMatrix::from_diag(&[4.0, 9.0]);
        assert!(psd_sqrt(&a, &tol).unwrap().max_abs_diff(&CMatrix::from_diag(&[2.0, 3.0])) < 1e-12);

        let z = CMatrix::zeros(3, 3);
        assert!(psd_sqrt(&z, &tol).unwrap().max_abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let a = random_psd(&mut rng, 5);
            let s = psd_sqrt(&a, &tol).unwrap();
            assert!(s.matmul(&s).max_abs_diff(&a) < 1e-10);
            assert!(is_psd(&s, &tol).unwrap().is_psd);
        }
    }

    #[test]
    fn sqrt_rejects_indefinite() {
        let tol = Tolerances::default();
        let a = CMatrix::from_diag(&[1.0, -0.5]);
        assert!(matches!(psd_sqrt(&a, &tol), Err(LinalgError::NotPsd { .. })));
    }
}
