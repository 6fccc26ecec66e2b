//! Linear maps between matrix algebras.
//!
//! A [`Channel`] is stored Kraus-first with its Choi matrix cached eagerly at
//! construction, so values stay immutable and cheap to share. Maps that are
//! not (or not verifiably) completely positive are carried as Choi-only
//! [`LinearMap`] values usable through [`LinearOp::apply`] but nothing else.
//!
//! Conventions: a map `ψ: M_n → M_m` has Choi matrix
//! `Σ_ij E_ij^{(n)} ⊗ ψ(E_ij^{(n)})` of side `n·m`, with the *input* algebra
//! as the first tensor factor. The map is CP exactly when this matrix is
//! positive semidefinite.

use alloc::vec::Vec;
use core::fmt;

use crate::linalg::{
    self, hermitian_eig, is_psd, pseudoinverse, CMatrix, LinalgError, Tolerances, C64,
};

/// Errors raised when building or transforming channels.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelError {
    /// Operand shapes do not line up.
    DimensionMismatch { context: &'static str },
    /// A map expected to be completely positive is not; carries the minimum
    /// Choi eigenvalue.
    NotCp { min_eigenvalue: f64 },
    /// A conjugating matrix is not unitary; carries `‖U·U† − 1‖_max`.
    NotUnitary { residual: f64 },
    /// Corner split parameter out of range in the Choi block permutation.
    InvalidSplit { n: usize, r: usize },
    /// Bubbled-up linear algebra failure.
    Linalg(LinalgError),
}

impl fmt::Display for ChannelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelError::DimensionMismatch { context } => write!(f, "dimension mismatch in {context}"),
            ChannelError::NotCp { min_eigenvalue } => {
                write!(f, "map is not completely positive (min Choi eigenvalue = {min_eigenvalue:e})")
            }
            ChannelError::NotUnitary { residual } => {
                write!(f, "matrix is not unitary (residual = {residual:e})")
            }
            ChannelError::InvalidSplit { n, r } => write!(f, "invalid corner split r = {r} for block side {n}"),
            ChannelError::Linalg(e) => write!(f, "{e}"),
        }
    }
}

impl From<LinalgError> for ChannelError {
    fn from(e: LinalgError) -> Self {
        ChannelError::Linalg(e)
    }
}

/// Anything that acts linearly on matrices: channels and Choi-only maps.
pub trait LinearOp {
    /// Side of the input algebra `M_n`.
    fn dim_in(&self) -> usize;
    /// Side of the output algebra `M_m`.
    fn dim_out(&self) -> usize;
    /// Evaluate the map on `b` (must be `dim_in × dim_in`).
    fn apply(&self, b: &CMatrix) -> CMatrix;
}

/// Choi matrix of a linear map `M_n → M_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    pub dim_in: usize,
    pub dim_out: usize,
    pub matrix: CMatrix,
}

impl ChoiMatrix {
    pub fn new(dim_in: usize, dim_out: usize, matrix: CMatrix) -> Option<Self> {
        let side = dim_in * dim_out;
        if matrix.rows() != side || matrix.cols() != side {
            return None;
        }
        Some(ChoiMatrix { dim_in, dim_out, matrix })
    }

    /// The `m×m` block at outer position `(i, j)`, i.e. `ψ(E_ij)`.
    pub fn block(&self, i: usize, j: usize) -> CMatrix {
        let m = self.dim_out;
        let mut out = CMatrix::zeros(m, m);
        for k in 0..m {
            for l in 0..m {
                out[(k, l)] = self.matrix[(i * m + k, j * m + l)];
            }
        }
        out
    }
}

/// A completely positive map `M_n → M_m` held as Kraus operators
/// `F(B) = Σ_α V_α · B · V_α†`, with the Choi matrix cached.
#[derive(Debug, Clone)]
pub struct Channel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<CMatrix>,
    choi: ChoiMatrix,
}

impl Channel {
    /// Build from Kraus operators, all `m×n`. An empty list encodes the zero
    /// map, for which both dimensions must still be supplied.
    pub fn from_kraus(dim_in: usize, dim_out: usize, kraus: Vec<CMatrix>) -> Result<Self, ChannelError> {
        for v in &kraus {
            if v.rows() != dim_out || v.cols() != dim_in {
                return Err(ChannelError::DimensionMismatch { context: "Kraus operator shape" });
            }
        }
        let choi = choi_from_kraus(dim_in, dim_out, &kraus);
        Ok(Channel { dim_in, dim_out, kraus, choi })
    }

    /// The identity channel on `M_n`.
    pub fn identity(n: usize) -> Self {
        Channel::from_kraus(n, n, alloc::vec![CMatrix::identity(n)]).unwrap()
    }

    /// Conjugation `B ↦ V·B·V†` by a single `m×n` operator.
    pub fn ad(v: CMatrix) -> Self {
        let (m, n) = (v.rows(), v.cols());
        Channel::from_kraus(n, m, alloc::vec![v]).unwrap()
    }

    /// Multiplication by a nonnegative scalar on a 1-dimensional algebra,
    /// with the Choi cache `[f]` stored exactly.
    pub fn scalar(f: f64) -> Self {
        debug_assert!(f >= 0.0);
        let kraus = alloc::vec![CMatrix::new(1, 1, alloc::vec![C64::new(libm::sqrt(f), 0.0)]).unwrap()];
        let choi = ChoiMatrix {
            dim_in: 1,
            dim_out: 1,
            matrix: CMatrix::new(1, 1, alloc::vec![C64::new(f, 0.0)]).unwrap(),
        };
        Channel { dim_in: 1, dim_out: 1, kraus, choi }
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn choi(&self) -> &ChoiMatrix {
        &self.choi
    }

    /// Hilbert–Schmidt dual `F*`, characterised by
    /// `tr(F*(A)·B) = tr(A·F(B))`; its Kraus operators are the adjoints.
    pub fn hs_dual(&self) -> Channel {
        let kraus = self.kraus.iter().map(CMatrix::adjoint).collect();
        Channel::from_kraus(self.dim_out, self.dim_in, kraus).unwrap()
    }

    /// `‖F(1_n) − 1_m‖_max`.
    pub fn unitality_residual(&self) -> f64 {
        self.apply(&CMatrix::identity(self.dim_in)).max_abs_diff(&CMatrix::identity(self.dim_out))
    }

    pub fn is_unital(&self, tol: &Tolerances) -> bool {
        self.unitality_residual() <= tol.eq_tol
    }

    /// `‖Σ V_α†·V_α − 1_n‖_max`, i.e. unitality of the dual.
    pub fn trace_preservation_residual(&self) -> f64 {
        self.hs_dual().unitality_residual()
    }

    pub fn is_trace_preserving(&self, tol: &Tolerances) -> bool {
        self.trace_preservation_residual() <= tol.eq_tol
    }

    /// Complete positivity via positivity of the Choi matrix. True by
    /// construction for Kraus-built channels up to roundoff.
    pub fn is_cp(&self, tol: &Tolerances) -> Result<linalg::PsdReport, ChannelError> {
        Ok(is_psd(&self.choi.matrix, tol)?)
    }

    /// Conjugated channel `Ad_U ∘ F ∘ Ad_V` with Kraus operators `U·V_α·V`.
    pub fn conjugate(&self, u: &CMatrix, v: &CMatrix) -> Result<Channel, ChannelError> {
        check_unitary(u, self.dim_out)?;
        check_unitary(v, self.dim_in)?;
        let kraus = self.kraus.iter().map(|w| u.matmul(w).matmul(v)).collect();
        Channel::from_kraus(self.dim_in, self.dim_out, kraus)
    }
}

impl LinearOp for Channel {
    fn dim_in(&self) -> usize {
        self.dim_in
    }

    fn dim_out(&self) -> usize {
        self.dim_out
    }

    fn apply(&self, b: &CMatrix) -> CMatrix {
        assert_eq!((b.rows(), b.cols()), (self.dim_in, self.dim_in), "apply shape mismatch");
        let mut out = CMatrix::zeros(self.dim_out, self.dim_out);
        for v in &self.kraus {
            out = &out + &v.conjugate_by(b);
        }
        out
    }
}

/// A linear map carried only by its Choi matrix, with no positivity claim.
/// This is how Bayes maps that fail complete positivity are represented.
#[derive(Debug, Clone)]
pub struct LinearMap {
    choi: ChoiMatrix,
}

impl LinearMap {
    pub fn from_choi(choi: ChoiMatrix) -> Self {
        LinearMap { choi }
    }

    pub fn choi(&self) -> &ChoiMatrix {
        &self.choi
    }

    pub fn is_cp(&self, tol: &Tolerances) -> Result<linalg::PsdReport, ChannelError> {
        Ok(is_psd(&self.choi.matrix, tol)?)
    }
}

impl LinearOp for LinearMap {
    fn dim_in(&self) -> usize {
        self.choi.dim_in
    }

    fn dim_out(&self) -> usize {
        self.choi.dim_out
    }

    fn apply(&self, b: &CMatrix) -> CMatrix {
        let n = self.choi.dim_in;
        let m = self.choi.dim_out;
        assert_eq!((b.rows(), b.cols()), (n, n), "apply shape mismatch");
        // ψ(B) = Σ_ij B[i,j] · ψ(E_ij), read blockwise off the Choi matrix
        let mut out = CMatrix::zeros(m, m);
        for i in 0..n {
            for j in 0..n {
                let bij = b[(i, j)];
                if bij == C64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..m {
                    for l in 0..m {
                        out[(k, l)] += bij * self.choi.matrix[(i * m + k, j * m + l)];
                    }
                }
            }
        }
        out
    }
}

fn check_unitary(u: &CMatrix, side: usize) -> Result<(), ChannelError> {
    if u.rows() != side || u.cols() != side {
        return Err(ChannelError::DimensionMismatch { context: "conjugating unitary" });
    }
    let residual = u.matmul(&u.adjoint()).max_abs_diff(&CMatrix::identity(side));
    // unitarity itself is an equality assertion, so eq_tol scale applies
    if residual > 1e-8 {
        return Err(ChannelError::NotUnitary { residual });
    }
    Ok(())
}

fn choi_from_kraus(dim_in: usize, dim_out: usize, kraus: &[CMatrix]) -> ChoiMatrix {
    let side = dim_in * dim_out;
    let mut matrix = CMatrix::zeros(side, side);
    // Choi(Σ Ad_V) = Σ vec(V)·vec(V)† with vec(V)[i·m + k] = V[k, i]
    for v in kraus {
        let vecv = column_stack(v);
        for a in 0..side {
            let va = vecv[a];
            if va == C64::new(0.0, 0.0) {
                continue;
            }
            for b in 0..side {
                matrix[(a, b)] += va * vecv[b].conj();
            }
        }
    }
    ChoiMatrix { dim_in, dim_out, matrix }
}

/// Stack the columns of an `m×n` matrix into a vector of length `n·m`:
/// entry `i·m + k` is `V[k, i]`.
fn column_stack(v: &CMatrix) -> Vec<C64> {
    let (m, n) = (v.rows(), v.cols());
    let mut out = Vec::with_capacity(n * m);
    for i in 0..n {
        for k in 0..m {
            out.push(v[(k, i)]);
        }
    }
    out
}

fn unstack_column(vec: &[C64], dim_in: usize, dim_out: usize) -> CMatrix {
    let mut v = CMatrix::zeros(dim_out, dim_in);
    for i in 0..dim_in {
        for k in 0..dim_out {
            v[(k, i)] = vec[i * dim_out + k];
        }
    }
    v
}

/// Choi matrix `Σ_ij E_ij ⊗ F(E_ij)` of a channel (already cached).
pub fn choi_of(f: &Channel) -> ChoiMatrix {
    f.choi().clone()
}

/// Reconstruct a channel from a PSD Choi matrix. Kraus operators come from
/// the scaled eigenvectors; eigenvalues at or below the rank threshold are
/// dropped, matching the support convention in `linalg`.
pub fn channel_of_choi(c: &ChoiMatrix, tol: &Tolerances) -> Result<Channel, ChannelError> {
    let spec = hermitian_eig(&c.matrix, tol)?;
    if let Some(&min) = spec.eigenvalues.last() {
        if min < -tol.psd_tol {
            return Err(ChannelError::NotCp { min_eigenvalue: min });
        }
    }
    let lambda_max = spec.eigenvalues.first().copied().unwrap_or(0.0);
    let thresh = tol.rank_threshold(lambda_max);
    let mut kraus = Vec::new();
    for (k, &lam) in spec.eigenvalues.iter().enumerate() {
        if lam <= thresh {
            continue;
        }
        let scale = C64::new(libm::sqrt(lam), 0.0);
        let vec: Vec<C64> = spec.eigenvector(k).iter().map(|&z| z * scale).collect();
        kraus.push(unstack_column(&vec, c.dim_in, c.dim_out));
    }
    Channel::from_kraus(c.dim_in, c.dim_out, kraus)
}

/// Wrap a Choi matrix as an opaque linear map without any positivity check.
pub fn linear_map_of_choi(c: ChoiMatrix) -> LinearMap {
    LinearMap::from_choi(c)
}

/// An orthogonal Kraus decomposition: `tr(W_α†·W_β) = Λ_α·δ_αβ` with strictly
/// positive weights, and as many operators as the rank of the Choi matrix.
#[derive(Debug, Clone)]
pub struct OrthogonalKraus {
    pub channel: Channel,
    pub weights: Vec<f64>,
}

/// Re-decompose a CP map into Hilbert–Schmidt-orthogonal Kraus operators;
/// the weights are the nonzero Choi eigenvalues.
pub fn orthogonal_kraus(f: &Channel, tol: &Tolerances) -> Result<OrthogonalKraus, ChannelError> {
    let spec = hermitian_eig(&f.choi().matrix, tol)?;
    if let Some(&min) = spec.eigenvalues.last() {
        if min < -tol.psd_tol {
            return Err(ChannelError::NotCp { min_eigenvalue: min });
        }
    }
    let lambda_max = spec.eigenvalues.first().copied().unwrap_or(0.0);
    let thresh = tol.rank_threshold(lambda_max);
    let mut kraus = Vec::new();
    let mut weights = Vec::new();
    for (k, &lam) in spec.eigenvalues.iter().enumerate() {
        if lam <= thresh {
            continue;
        }
        let scale = C64::new(libm::sqrt(lam), 0.0);
        let vec: Vec<C64> = spec.eigenvector(k).iter().map(|&z| z * scale).collect();
        kraus.push(unstack_column(&vec, f.dim_in(), f.dim_out()));
        weights.push(lam);
    }
    let channel = Channel::from_kraus(f.dim_in(), f.dim_out(), kraus)?;
    Ok(OrthogonalKraus { channel, weights })
}

/// Pseudoinverse of the Choi matrix of a CP map, computed through the
/// orthogonal Kraus weights: the Choi matrix of `Σ_α Ad_{V_α / Λ_α}`.
pub fn choi_pseudoinverse(f: &Channel, tol: &Tolerances) -> Result<ChoiMatrix, ChannelError> {
    let ortho = orthogonal_kraus(f, tol)?;
    let kraus: Vec<CMatrix> = ortho
        .channel
        .kraus()
        .iter()
        .zip(&ortho.weights)
        .map(|(v, &lam)| v.scale_re(1.0 / lam))
        .collect();
    Ok(choi_from_kraus(f.dim_in(), f.dim_out(), &kraus))
}

/// Evaluator for the comultiplication `μ*: M_m → M_m ⊗ M_m`, the
/// Hilbert–Schmidt dual of matrix multiplication. On matrix units,
/// `μ*(E_ik) = Σ_j E_ij ⊗ E_jk`; extended linearly.
pub struct MuDual {
    m: usize,
}

pub fn mu_dual(m: usize) -> MuDual {
    MuDual { m }
}

impl MuDual {
    pub fn dim(&self) -> usize {
        self.m
    }

    /// `μ*(A)` as an `m²×m²` matrix.
    pub fn evaluate(&self, a: &CMatrix) -> CMatrix {
        let m = self.m;
        assert_eq!((a.rows(), a.cols()), (m, m), "mu_dual shape mismatch");
        let mut out = CMatrix::zeros(m * m, m * m);
        // A[i,k] contributes A[i,k]·E_ij ⊗ E_jk for every j
        for i in 0..m {
            for k in 0..m {
                let aik = a[(i, k)];
                if aik == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..m {
                    out[(i * m + j, j * m + k)] += aik;
                }
            }
        }
        out
    }
}

/// Permutation that gathers the top-left `r×r` corner of every outer block of
/// a Choi matrix (of a map `M_m → M_n`, block side `n`, split at `r`) into
/// the leading `(m·r)×(m·r)` corner under `U·M·U†`.
pub fn choi_block_permutation(m: usize, n: usize, r: usize) -> Result<CMatrix, ChannelError> {
    if r > n {
        return Err(ChannelError::InvalidSplit { n, r });
    }
    let side = m * n;
    let mut u = CMatrix::zeros(side, side);
    for i in 0..m {
        for k in 0..n {
            let old = i * n + k;
            let new = if k < r { i * r + k } else { m * r + i * (n - r) + (k - r) };
            u[(new, old)] = C64::new(1.0, 0.0);
        }
    }
    Ok(u)
}
