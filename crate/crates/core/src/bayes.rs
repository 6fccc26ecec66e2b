//! Bayesian inversion on matrix algebras.
//!
//! For a CPU map `F: M_n → M_m` and a prior state `ω = tr(ρ ·)`, the corner
//! of the inverse's Choi matrix over the support of `ξ = ω∘F` is forced by
//! the Bayes condition. Existence of a CPU inverse reduces to two checks on
//! that forced data: self-adjointness of the supported corner `𝔄`, and a
//! partial-trace bound `tr₁(𝔅†·𝔄̂·𝔅) ≤ P_ξ^⊥` that makes the remaining
//! block completable to a positive matrix with the right marginal. When both
//! hold, the canonical completion uses the uniform `1/m` trace filler and
//! the constructed inverse is verified CP, unital and Bayes-satisfying
//! before it is returned.
//!
//! The special cases with closed-form answers (POVMs, ensembles of states,
//! wave collapse, coisometric conjugations) are implemented directly with
//! their cheap decision rules and cross-checked against the general engine
//! in the tests.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::channel::{channel_of_choi, Channel, ChannelError, ChoiMatrix, LinearOp};
use crate::linalg::{
    is_psd, partial_trace_first, pseudoinverse, psd_sqrt, support, tensor, CMatrix, LinalgError,
    Tolerances, C64,
};

/// Errors raised by the Bayes engine.
#[derive(Debug, Clone, PartialEq)]
pub enum BayesError {
    /// The (F, ρ) pair is not a valid problem: F not CPU or ρ not a state.
    InvalidProblem { reason: String },
    /// Operand shapes do not line up.
    DimensionMismatch { context: &'static str },
    /// An operation requiring the self-adjoint corner was called without it.
    CornerNotSelfAdjoint { witness: f64 },
    /// A quantity the theory forces to hold failed numerically; this signals
    /// an implementation bug, not a property of the input.
    InternalInconsistency { context: &'static str, residual: f64 },
    /// The given family is not a POVM.
    NotAPovm { reason: String },
    /// The given family is not an ensemble of states.
    NotAnEnsemble { reason: String },
    /// The given projections are not a resolution of the identity.
    NotAResolution { reason: String },
    /// The given matrix is not a coisometry; carries `‖V·V† − 1‖_max`.
    NotCoisometry { residual: f64 },
    /// One of the three block-positivity conditions failed.
    PreconditionFailed { condition: SchurCondition, witness: f64 },
    Linalg(LinalgError),
    Channel(ChannelError),
}

/// The three conditions under which `[[𝔄,𝔅],[𝔅†,ℭ]] ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchurCondition {
    /// `𝔄 ≥ 0`
    BlockPositive,
    /// `ker(𝔄) ⊆ ker(𝔅†)`
    KernelContainment,
    /// `ℭ − 𝔅†·𝔄̂·𝔅 ≥ 0`
    ComplementPositive,
}

impl fmt::Display for BayesError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BayesError::InvalidProblem { reason } => write!(f, "invalid problem: {reason}"),
            BayesError::DimensionMismatch { context } => write!(f, "dimension mismatch in {context}"),
            BayesError::CornerNotSelfAdjoint { witness } => {
                write!(f, "supported corner is not self-adjoint (witness = {witness:e})")
            }
            BayesError::InternalInconsistency { context, residual } => {
                write!(f, "internal inconsistency in {context} (residual = {residual:e})")
            }
            BayesError::NotAPovm { reason } => write!(f, "not a POVM: {reason}"),
            BayesError::NotAnEnsemble { reason } => write!(f, "not an ensemble: {reason}"),
            BayesError::NotAResolution { reason } => write!(f, "not a resolution of identity: {reason}"),
            BayesError::NotCoisometry { residual } => {
                write!(f, "not a coisometry (‖V·V† − 1‖ = {residual:e})")
            }
            BayesError::PreconditionFailed { condition, witness } => {
                write!(f, "precondition {condition:?} failed (witness = {witness:e})")
            }
            BayesError::Linalg(e) => write!(f, "{e}"),
            BayesError::Channel(e) => write!(f, "{e}"),
        }
    }
}

impl From<LinalgError> for BayesError {
    fn from(e: LinalgError) -> Self {
        BayesError::Linalg(e)
    }
}

impl From<ChannelError> for BayesError {
    fn from(e: ChannelError) -> Self {
        BayesError::Channel(e)
    }
}

/// A validated inversion problem: `F: M_n → M_m` CPU and `ρ` a density
/// matrix on the output algebra `M_m`.
#[derive(Debug, Clone)]
pub struct BayesProblem {
    pub channel: Channel,
    pub rho: CMatrix,
    pub tol: Tolerances,
}

impl BayesProblem {
    pub fn new(channel: Channel, rho: CMatrix, tol: Tolerances) -> Result<Self, BayesError> {
        let m = channel.dim_out();
        if rho.rows() != m || rho.cols() != m {
            return Err(BayesError::InvalidProblem {
                reason: String::from("density matrix side does not match the channel output"),
            });
        }
        let cp = channel.is_cp(&tol)?;
        if !cp.is_psd {
            return Err(BayesError::InvalidProblem { reason: String::from("channel is not completely positive") });
        }
        if !channel.is_unital(&tol) {
            return Err(BayesError::InvalidProblem { reason: String::from("channel is not unital") });
        }
        validate_density(&rho, &tol).map_err(|reason| BayesError::InvalidProblem { reason })?;
        Ok(BayesProblem { channel, rho, tol })
    }

    pub fn dim_in(&self) -> usize {
        self.channel.dim_in()
    }

    pub fn dim_out(&self) -> usize {
        self.channel.dim_out()
    }
}

fn validate_density(rho: &CMatrix, tol: &Tolerances) -> Result<(), String> {
    if !rho.is_square() {
        return Err(String::from("density matrix is not square"));
    }
    if rho.asymmetry() > tol.eq_tol {
        return Err(String::from("density matrix is not Hermitian"));
    }
    match is_psd(rho, tol) {
        Ok(report) if report.is_psd => {}
        _ => return Err(String::from("density matrix is not positive semidefinite")),
    }
    if (rho.trace().re - 1.0).abs() > tol.eq_tol {
        return Err(String::from("density matrix does not have unit trace"));
    }
    Ok(())
}

/// The data forced by the Bayes condition: the marginal `σ = F*(ρ)`, its
/// pseudoinverse and support, and the two determined blocks of the inverse's
/// Choi matrix,
/// `𝔄 = Σ E_ij ⊗ σ̂·F*(ρ·E_ij)·P_ξ` and `𝔅 = Σ E_ij ⊗ σ̂·F*(ρ·E_ij)·P_ξ^⊥`.
#[derive(Debug, Clone)]
pub struct CornerData {
    pub sigma: CMatrix,
    pub sigma_hat: CMatrix,
    pub p_xi: CMatrix,
    pub p_xi_perp: CMatrix,
    pub frak_a: CMatrix,
    pub frak_b: CMatrix,
}

/// Compute the marginal state and the forced Choi blocks.
pub fn marginal(problem: &BayesProblem) -> Result<CornerData, BayesError> {
    let tol = &problem.tol;
    let n = problem.dim_in();
    let m = problem.dim_out();
    let dual = problem.channel.hs_dual();

    let sigma = dual.apply(&problem.rho).hermitize();
    let sigma_hat = pseudoinverse(&sigma, tol)?;
    let p_xi = support(&sigma, tol)?;
    let p_xi_perp = &CMatrix::identity(n) - &p_xi;

    let mut frak_a = CMatrix::zeros(m * n, m * n);
    let mut frak_b = CMatrix::zeros(m * n, m * n);
    for i in 0..m {
        for j in 0..m {
            let rho_eij = shifted_column(&problem.rho, i, j);
            let h = sigma_hat.matmul(&dual.apply(&rho_eij));
            let a_block = h.matmul(&p_xi);
            let b_block = h.matmul(&p_xi_perp);
            for k in 0..n {
                for l in 0..n {
                    frak_a[(i * n + k, j * n + l)] = a_block[(k, l)];
                    frak_b[(i * n + k, j * n + l)] = b_block[(k, l)];
                }
            }
        }
    }
    Ok(CornerData { sigma, sigma_hat, p_xi, p_xi_perp, frak_a, frak_b })
}

/// `ρ·E_ij`: column `i` of `ρ` placed in column `j`.
fn shifted_column(rho: &CMatrix, i: usize, j: usize) -> CMatrix {
    let m = rho.rows();
    let mut out = CMatrix::zeros(m, m);
    for r in 0..m {
        out[(r, j)] = rho[(r, i)];
    }
    out
}

/// The forced value of `P_ξ·G(A)` for any Bayes map `G`: `σ̂·F*(ρ·A)`.
pub fn corner_bayes_map(corner: &CornerData, problem: &BayesProblem, a: &CMatrix) -> Result<CMatrix, BayesError> {
    let m = problem.dim_out();
    if a.rows() != m || a.cols() != m {
        return Err(BayesError::DimensionMismatch { context: "corner_bayes_map input" });
    }
    let dual = problem.channel.hs_dual();
    Ok(corner.sigma_hat.matmul(&dual.apply(&problem.rho.matmul(a))))
}

/// Verdict of the corner self-adjointness test `𝔄† = 𝔄`.
#[derive(Debug, Clone, Copy)]
pub struct SelfAdjointReport {
    pub is_selfadjoint: bool,
    /// `‖𝔄 − 𝔄†‖_max`.
    pub witness: f64,
}

/// Test `𝔄† = 𝔄`. When it holds, `𝔄 ≥ 0` is forced; that implication is
/// asserted here and a violation is reported as an internal inconsistency.
pub fn check_corner_selfadjoint(corner: &CornerData, tol: &Tolerances) -> Result<SelfAdjointReport, BayesError> {
    let witness = corner.frak_a.asymmetry();
    if witness > tol.eq_tol {
        return Ok(SelfAdjointReport { is_selfadjoint: false, witness });
    }
    let report = is_psd(&corner.frak_a, tol)?;
    if !report.is_psd {
        return Err(BayesError::InternalInconsistency {
            context: "self-adjoint corner must be PSD",
            residual: report.min_eigenvalue,
        });
    }
    Ok(SelfAdjointReport { is_selfadjoint: true, witness })
}

/// The completion obstruction `D = tr₁(𝔅†·𝔄̂·𝔅)`, projected onto the
/// `P_ξ^⊥` corner where the theory confines it. A CPU inverse exists iff
/// `D ≤ P_ξ^⊥`.
pub fn completion_defect(corner: &CornerData, problem: &BayesProblem) -> Result<CMatrix, BayesError> {
    let tol = &problem.tol;
    let sa = check_corner_selfadjoint(corner, tol)?;
    if !sa.is_selfadjoint {
        return Err(BayesError::CornerNotSelfAdjoint { witness: sa.witness });
    }
    let (m, n) = (problem.dim_out(), problem.dim_in());
    let a_hat = pseudoinverse(&corner.frak_a.hermitize(), tol)?;
    let raw = corner.frak_b.adjoint().matmul(&a_hat).matmul(&corner.frak_b);
    let d_raw = partial_trace_first(&raw, m, n)?;
    let d = corner.p_xi_perp.matmul(&d_raw).matmul(&corner.p_xi_perp).hermitize();
    let leak = d.max_abs_diff(&d_raw);
    if leak > 10.0 * tol.eq_tol {
        return Err(BayesError::InternalInconsistency { context: "completion defect must live in the P_ξ^⊥ corner", residual: leak });
    }
    let psd = is_psd(&d, tol)?;
    if !psd.is_psd {
        return Err(BayesError::InternalInconsistency { context: "completion defect must be PSD", residual: psd.min_eigenvalue });
    }
    Ok(d)
}

/// Outcome of an inversion attempt.
#[derive(Debug, Clone)]
pub enum BayesOutcome {
    /// A CPU Bayesian inverse exists; `inverse` is the canonical one and
    /// `unique` records whether it is the only one (beyond a.e. equivalence).
    Exists { inverse: Channel, unique: bool },
    /// The forced corner `𝔄` is not self-adjoint; witness is `‖𝔄 − 𝔄†‖_max`.
    FailsSelfAdjoint { witness: f64 },
    /// The partial-trace bound fails; witness is the largest eigenvalue of
    /// `D − P_ξ^⊥` on the off-support corner.
    FailsCompletion { witness: f64 },
}

impl BayesOutcome {
    pub fn exists(&self) -> bool {
        matches!(self, BayesOutcome::Exists { .. })
    }

    pub fn inverse(&self) -> Option<&Channel> {
        match self {
            BayesOutcome::Exists { inverse, .. } => Some(inverse),
            _ => None,
        }
    }

    pub fn unique(&self) -> Option<bool> {
        match self {
            BayesOutcome::Exists { unique, .. } => Some(*unique),
            _ => None,
        }
    }

    pub fn witness(&self) -> Option<f64> {
        match self {
            BayesOutcome::Exists { .. } => None,
            BayesOutcome::FailsSelfAdjoint { witness } | BayesOutcome::FailsCompletion { witness } => Some(*witness),
        }
    }
}

/// Tolerances for gating a freshly assembled Choi matrix: theory guarantees
/// positivity, so only construction roundoff at the scale of the equality
/// tolerance needs absorbing.
fn construction_tol(tol: &Tolerances) -> Tolerances {
    Tolerances { psd_tol: tol.psd_tol.max(tol.eq_tol), ..*tol }
}

/// Decide existence of a CPU Bayesian inverse of `(F, ω)` and construct the
/// canonical one when it exists.
pub fn bayesian_invert(problem: &BayesProblem) -> Result<BayesOutcome, BayesError> {
    let tol = &problem.tol;
    let corner = marginal(problem)?;
    let sa = check_corner_selfadjoint(&corner, tol)?;
    if !sa.is_selfadjoint {
        return Ok(BayesOutcome::FailsSelfAdjoint { witness: sa.witness });
    }
    let d = completion_defect(&corner, problem)?;
    let slack = &corner.p_xi_perp - &d;
    let psd = is_psd(&slack, tol)?;
    if !psd.is_psd {
        // witness: the largest eigenvalue of D − P_ξ^⊥
        return Ok(BayesOutcome::FailsCompletion { witness: -psd.min_eigenvalue });
    }

    let (m, n) = (problem.dim_out(), problem.dim_in());
    let a_hat = pseudoinverse(&corner.frak_a.hermitize(), tol)?;
    let schur_term = corner.frak_b.adjoint().matmul(&a_hat).matmul(&corner.frak_b);
    let filler = tensor(&CMatrix::identity(m), &slack).scale_re(1.0 / m as f64);
    let choi_matrix = &(&(&corner.frak_a + &corner.frak_b) + &corner.frak_b.adjoint()) + &(&schur_term + &filler);
    let choi = ChoiMatrix::new(m, n, choi_matrix)
        .ok_or(BayesError::DimensionMismatch { context: "assembled Choi matrix" })?;

    let inverse = channel_of_choi(&choi, &construction_tol(tol)).map_err(|e| match e {
        ChannelError::NotCp { min_eigenvalue } => BayesError::InternalInconsistency {
            context: "assembled Choi matrix must be PSD",
            residual: min_eigenvalue,
        },
        other => BayesError::Channel(other),
    })?;
    verify_constructed_inverse(problem, &inverse)?;

    let unique = d.max_abs_diff(&corner.p_xi_perp) <= tol.eq_tol;
    Ok(BayesOutcome::Exists { inverse, unique })
}

/// Post-construction verification shared by every Exists path: the returned
/// channel must be unital and satisfy the Bayes condition.
fn verify_constructed_inverse(problem: &BayesProblem, inverse: &Channel) -> Result<(), BayesError> {
    let tol = &problem.tol;
    let unitality = inverse.unitality_residual();
    if unitality > 10.0 * tol.eq_tol {
        return Err(BayesError::InternalInconsistency { context: "constructed inverse must be unital", residual: unitality });
    }
    let residual = verify_bayes_condition(&problem.channel, inverse, &problem.rho, tol)?;
    if residual > 10.0 * tol.eq_tol {
        return Err(BayesError::InternalInconsistency { context: "constructed inverse must satisfy the Bayes condition", residual });
    }
    Ok(())
}

/// Max residual of the Bayes condition
/// `tr(σ·G(E_ij)·E_kl) = tr(ρ·E_ij·F(E_kl))` over all matrix-unit pairs.
/// Bilinearity makes this a complete check.
pub fn verify_bayes_condition(
    f: &Channel,
    g: &dyn LinearOp,
    rho: &CMatrix,
    tol: &Tolerances,
) -> Result<f64, BayesError> {
    let n = f.dim_in();
    let m = f.dim_out();
    if g.dim_in() != m || g.dim_out() != n || rho.rows() != m || rho.cols() != m {
        return Err(BayesError::DimensionMismatch { context: "verify_bayes_condition" });
    }
    let _ = tol;
    let sigma = f.hs_dual().apply(rho);

    let mut worst = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            let lhs_mat = sigma.matmul(&g.apply(&CMatrix::matrix_unit(m, i, j)));
            for k in 0..n {
                for l in 0..n {
                    let rhs_mat = f.apply(&CMatrix::matrix_unit(n, k, l)).matmul(rho);
                    let lhs = lhs_mat[(l, k)];
                    let rhs = rhs_mat[(j, i)];
                    let r = (lhs - rhs).norm();
                    if r > worst {
                        worst = r;
                    }
                }
            }
        }
    }
    Ok(worst)
}

/// `ω`-a.e. equality of two maps out of the algebra carrying `ω`:
/// `F(B)·P_ω = G(B)·P_ω` for all `B`, checked on matrix units.
pub fn ae_equal(
    f: &dyn LinearOp,
    g: &dyn LinearOp,
    omega_density: &CMatrix,
    tol: &Tolerances,
) -> Result<bool, BayesError> {
    if f.dim_in() != g.dim_in() || f.dim_out() != g.dim_out() {
        return Err(BayesError::DimensionMismatch { context: "ae_equal maps" });
    }
    if omega_density.rows() != f.dim_out() || omega_density.cols() != f.dim_out() {
        return Err(BayesError::DimensionMismatch { context: "ae_equal density" });
    }
    let p = support(&omega_density.hermitize(), tol)?;
    let n = f.dim_in();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let b = CMatrix::matrix_unit(n, i, j);
            let diff = (&f.apply(&b) - &g.apply(&b)).matmul(&p);
            worst = worst.max(diff.max_abs());
        }
    }
    Ok(worst <= tol.eq_tol)
}

/// Kraus form of the inverse restricted to the supported corner:
/// `Ad_{P_ξ}∘G = Σ_α Ad_{√σ̂·V_α†·√ρ}`. Requires the self-adjoint corner.
pub fn corner_kraus(problem: &BayesProblem, corner: &CornerData) -> Result<Channel, BayesError> {
    let tol = &problem.tol;
    let sa = check_corner_selfadjoint(corner, tol)?;
    if !sa.is_selfadjoint {
        return Err(BayesError::CornerNotSelfAdjoint { witness: sa.witness });
    }
    let sqrt_sigma_hat = psd_sqrt(&corner.sigma_hat, tol)?;
    let sqrt_rho = psd_sqrt(&problem.rho.hermitize(), tol)?;
    let kraus: Vec<CMatrix> = problem
        .channel
        .kraus()
        .iter()
        .map(|v| sqrt_sigma_hat.matmul(&v.adjoint()).matmul(&sqrt_rho))
        .collect();
    Ok(Channel::from_kraus(problem.dim_out(), problem.dim_in(), kraus)?)
}

/// The CPU map `M_|Y| → M_m` obtained from a POVM `{F_y}` by first
/// projecting onto the diagonal algebra: `B ↦ Σ_y B[y,y]·F_y`.
pub fn povm_channel(povm: &[CMatrix], tol: &Tolerances) -> Result<Channel, BayesError> {
    let m = validate_povm(povm, tol)?;
    let y_count = povm.len();
    let mut kraus = Vec::new();
    for (y, fy) in povm.iter().enumerate() {
        let root = psd_sqrt(&fy.hermitize(), tol)?;
        for a in 0..m {
            // √F_y·e_a placed in column y
            let mut w = CMatrix::zeros(m, y_count);
            for r in 0..m {
                w[(r, y)] = root[(r, a)];
            }
            kraus.push(w);
        }
    }
    Ok(Channel::from_kraus(y_count, m, kraus)?)
}

fn validate_povm(povm: &[CMatrix], tol: &Tolerances) -> Result<usize, BayesError> {
    if povm.is_empty() {
        return Err(BayesError::NotAPovm { reason: String::from("empty family") });
    }
    let m = povm[0].rows();
    let mut sum = CMatrix::zeros(m, m);
    for fy in povm {
        if fy.rows() != m || fy.cols() != m {
            return Err(BayesError::NotAPovm { reason: String::from("elements differ in size") });
        }
        if fy.asymmetry() > tol.eq_tol {
            return Err(BayesError::NotAPovm { reason: String::from("element is not Hermitian") });
        }
        match is_psd(fy, tol) {
            Ok(report) if report.is_psd => {}
            _ => return Err(BayesError::NotAPovm { reason: String::from("element is not PSD") }),
        }
        sum = &sum + fy;
    }
    if sum.max_abs_diff(&CMatrix::identity(m)) > tol.eq_tol {
        return Err(BayesError::NotAPovm { reason: String::from("elements do not sum to the identity") });
    }
    Ok(m)
}

/// Bayesian inversion of a POVM `F: C^Y → M_m` against the state `tr(ρ ·)`.
///
/// An inverse exists iff `[ρ, F_y] = 0` for every outcome with positive
/// probability; it is then `G(A)_y = tr(ρ·A·F_y)/q_y` on those outcomes and
/// the uniform `tr(A)/m` filler on null ones. The returned channel lands in
/// the diagonal algebra of `M_|Y|`.
pub fn povm_bayes(povm: &[CMatrix], rho: &CMatrix, tol: &Tolerances) -> Result<BayesOutcome, BayesError> {
    let m = validate_povm(povm, tol)?;
    if rho.rows() != m || rho.cols() != m {
        return Err(BayesError::DimensionMismatch { context: "povm_bayes density" });
    }
    validate_density(rho, tol).map_err(|reason| BayesError::InvalidProblem { reason })?;

    let y_count = povm.len();
    let q: Vec<f64> = povm.iter().map(|fy| rho.matmul(fy).trace().re).collect();
    let live = |y: usize| q[y] > tol.rank_tol;

    let mut witness = 0.0f64;
    for (y, fy) in povm.iter().enumerate() {
        if !live(y) {
            continue;
        }
        let comm = (&rho.matmul(fy) - &fy.matmul(rho)).max_abs();
        witness = witness.max(comm);
    }
    if witness > tol.eq_tol {
        return Ok(BayesOutcome::FailsSelfAdjoint { witness });
    }

    // fixed-point cross-check: Σ √F_y·ρ·√F_y = ρ on the Exists branch
    let mut luders = CMatrix::zeros(m, m);
    for fy in povm {
        let root = psd_sqrt(&fy.hermitize(), tol)?;
        luders = &luders + &root.conjugate_by(rho);
    }
    let fp_residual = luders.max_abs_diff(rho);
    if fp_residual > 10.0 * tol.eq_tol {
        return Err(BayesError::InternalInconsistency { context: "POVM fixed-point identity", residual: fp_residual });
    }

    // Choi of G: block (i,j) is Σ_y g_y(E_ij)·E_yy
    let side = m * y_count;
    let mut choi_matrix = CMatrix::zeros(side, side);
    for (y, fy) in povm.iter().enumerate() {
        let fyrho = fy.matmul(rho);
        for i in 0..m {
            for j in 0..m {
                let g = if live(y) {
                    fyrho[(j, i)] / C64::new(q[y], 0.0)
                } else if i == j {
                    C64::new(1.0 / m as f64, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                };
                choi_matrix[(i * y_count + y, j * y_count + y)] += g;
            }
        }
    }
    let choi = ChoiMatrix::new(m, y_count, choi_matrix).unwrap();
    let inverse = channel_of_choi(&choi, &construction_tol(tol))?;

    let embedded = povm_channel(povm, tol)?;
    let problem = BayesProblem::new(embedded, rho.clone(), *tol)?;
    verify_constructed_inverse(&problem, &inverse)?;

    let unique = (0..y_count).all(live);
    Ok(BayesOutcome::Exists { inverse, unique })
}

/// The CPU map `M_n → M_|X|` obtained from an ensemble `{σ_x}`:
/// `B ↦ Σ_x tr(σ_x·B)·E_xx`.
pub fn ensemble_channel(states: &[CMatrix], tol: &Tolerances) -> Result<Channel, BayesError> {
    let n = validate_ensemble_states(states, tol)?;
    let x_count = states.len();
    let mut kraus = Vec::new();
    for (x, sx) in states.iter().enumerate() {
        let root = psd_sqrt(&sx.hermitize(), tol)?;
        for a in 0..n {
            // row (√σ_x·e_a)† placed in row x
            let mut w = CMatrix::zeros(x_count, n);
            for ccol in 0..n {
                w[(x, ccol)] = root[(ccol, a)].conj();
            }
            kraus.push(w);
        }
    }
    Ok(Channel::from_kraus(n, x_count, kraus)?)
}

fn validate_ensemble_states(states: &[CMatrix], tol: &Tolerances) -> Result<usize, BayesError> {
    if states.is_empty() {
        return Err(BayesError::NotAnEnsemble { reason: String::from("empty family") });
    }
    let n = states[0].rows();
    for sx in states {
        if sx.rows() != n || sx.cols() != n {
            return Err(BayesError::NotAnEnsemble { reason: String::from("states differ in size") });
        }
        validate_density(sx, tol).map_err(|reason| BayesError::NotAnEnsemble { reason })?;
    }
    Ok(n)
}

/// Bayesian inversion of an ensemble preparation `F: M_n → C^X`,
/// `F(B)_x = tr(σ_x·B)`, against the weights `p`.
///
/// An inverse exists iff `p_x·[σ, σ_x] = 0` for all `x`, with
/// `σ = Σ p_x·σ_x`; it is then `G(e_x) = p_x·(σ̂·σ_x + P_ξ^⊥)`. The returned
/// channel maps `M_|X|` into `M_n` through the diagonal algebra.
pub fn ensemble_bayes(states: &[CMatrix], p: &[f64], tol: &Tolerances) -> Result<BayesOutcome, BayesError> {
    let n = validate_ensemble_states(states, tol)?;
    if p.len() != states.len() {
        return Err(BayesError::NotAnEnsemble { reason: String::from("weight count does not match state count") });
    }
    if p.iter().any(|&px| px < -tol.psd_tol) || (p.iter().sum::<f64>() - 1.0).abs() > tol.eq_tol {
        return Err(BayesError::NotAnEnsemble { reason: String::from("weights are not a probability vector") });
    }

    let x_count = states.len();
    let mut sigma = CMatrix::zeros(n, n);
    for (sx, &px) in states.iter().zip(p) {
        sigma = &sigma + &sx.scale_re(px);
    }
    sigma = sigma.hermitize();

    let mut witness = 0.0f64;
    for (sx, &px) in states.iter().zip(p) {
        let comm = (&sigma.matmul(sx) - &sx.matmul(&sigma)).max_abs() * px.max(0.0);
        witness = witness.max(comm);
    }
    if witness > tol.eq_tol {
        return Ok(BayesOutcome::FailsSelfAdjoint { witness });
    }

    let sigma_hat = pseudoinverse(&sigma, tol)?;
    let p_xi = support(&sigma, tol)?;
    let p_xi_perp = &CMatrix::identity(n) - &p_xi;

    let g_blocks: Vec<CMatrix> = states
        .iter()
        .zip(p)
        .map(|(sx, &px)| (&sigma_hat.matmul(sx) + &p_xi_perp).scale_re(px))
        .collect();

    let mut unital_sum = CMatrix::zeros(n, n);
    for g in &g_blocks {
        unital_sum = &unital_sum + g;
    }
    let unitality = unital_sum.max_abs_diff(&CMatrix::identity(n));
    if unitality > 10.0 * tol.eq_tol {
        return Err(BayesError::InternalInconsistency { context: "ensemble inverse must be unital", residual: unitality });
    }

    // Choi of G: block (x, x') is δ_{xx'}·G_x
    let side = x_count * n;
    let mut choi_matrix = CMatrix::zeros(side, side);
    for (x, g) in g_blocks.iter().enumerate() {
        for k in 0..n {
            for l in 0..n {
                choi_matrix[(x * n + k, x * n + l)] = g[(k, l)];
            }
        }
    }
    let choi = ChoiMatrix::new(x_count, n, choi_matrix).unwrap();
    let inverse = channel_of_choi(&choi, &construction_tol(tol))?;

    let embedded = ensemble_channel(states, tol)?;
    let problem = BayesProblem::new(embedded, CMatrix::from_diag(p), *tol)?;
    verify_constructed_inverse(&problem, &inverse)?;

    let unique = p.iter().all(|&px| px > tol.rank_tol);
    Ok(BayesOutcome::Exists { inverse, unique })
}

/// Bayesian inversion of the wave-collapse channel `F = Σ_λ Ad_{P_λ}` for a
/// resolution of the identity `{P_λ}`.
///
/// An inverse exists iff `ρ = Σ_λ P_λ·ρ·P_λ`; it is then `G = F` and unique.
/// On failure the general engine supplies the exact failing condition.
pub fn wave_collapse_invert(projections: &[CMatrix], rho: &CMatrix, tol: &Tolerances) -> Result<BayesOutcome, BayesError> {
    if projections.is_empty() {
        return Err(BayesError::NotAResolution { reason: String::from("empty family") });
    }
    let m = projections[0].rows();
    let mut sum = CMatrix::zeros(m, m);
    for (i, p) in projections.iter().enumerate() {
        if p.rows() != m || p.cols() != m {
            return Err(BayesError::NotAResolution { reason: String::from("projections differ in size") });
        }
        if p.asymmetry() > tol.eq_tol || p.matmul(p).max_abs_diff(p) > tol.eq_tol {
            return Err(BayesError::NotAResolution { reason: String::from("family member is not a projection") });
        }
        for q in &projections[i + 1..] {
            if p.matmul(q).max_abs() > tol.eq_tol {
                return Err(BayesError::NotAResolution { reason: String::from("projections are not pairwise orthogonal") });
            }
        }
        sum = &sum + p;
    }
    if sum.max_abs_diff(&CMatrix::identity(m)) > tol.eq_tol {
        return Err(BayesError::NotAResolution { reason: String::from("projections do not sum to the identity") });
    }
    if rho.rows() != m || rho.cols() != m {
        return Err(BayesError::DimensionMismatch { context: "wave_collapse_invert density" });
    }
    validate_density(rho, tol).map_err(|reason| BayesError::InvalidProblem { reason })?;

    let collapse = Channel::from_kraus(m, m, projections.to_vec())?;
    let sigma = collapse.apply(rho);
    if sigma.max_abs_diff(rho) <= tol.eq_tol {
        let problem = BayesProblem::new(collapse.clone(), rho.clone(), *tol)?;
        verify_constructed_inverse(&problem, &collapse)?;
        return Ok(BayesOutcome::Exists { inverse: collapse, unique: true });
    }
    let problem = BayesProblem::new(collapse, rho.clone(), *tol)?;
    bayesian_invert(&problem)
}

/// Bayesian inverse for `F = Ad_V` with `V` a coisometry (`V·V† = 1_m`):
/// `G(A) = V†·A·V + tr(A)/m·(V†V)^⊥`. It always exists.
pub fn isometry_bayes(v: &CMatrix, rho: &CMatrix, tol: &Tolerances) -> Result<Channel, BayesError> {
    let m = v.rows();
    let n = v.cols();
    let residual = v.matmul(&v.adjoint()).max_abs_diff(&CMatrix::identity(m));
    if residual > tol.eq_tol {
        return Err(BayesError::NotCoisometry { residual });
    }
    if rho.rows() != m || rho.cols() != m {
        return Err(BayesError::DimensionMismatch { context: "isometry_bayes density" });
    }
    validate_density(rho, tol).map_err(|reason| BayesError::InvalidProblem { reason })?;

    let vdag = v.adjoint();
    let range_proj = vdag.matmul(v);
    let complement = &CMatrix::identity(n) - &range_proj;

    // Choi: block (i, j) is V†·E_ij·V + δ_ij/m·(V†V)^⊥
    let side = m * n;
    let mut choi_matrix = CMatrix::zeros(side, side);
    for i in 0..m {
        for j in 0..m {
            let block = vdag.matmul(&CMatrix::matrix_unit(m, i, j)).matmul(v);
            for k in 0..n {
                for l in 0..n {
                    let mut val = block[(k, l)];
                    if i == j {
                        val += complement[(k, l)] / C64::new(m as f64, 0.0);
                    }
                    choi_matrix[(i * n + k, j * n + l)] = val;
                }
            }
        }
    }
    let choi = ChoiMatrix::new(m, n, choi_matrix).unwrap();
    let inverse = channel_of_choi(&choi, &construction_tol(tol))?;

    let problem = BayesProblem::new(Channel::ad(v.clone()), rho.clone(), *tol)?;
    verify_constructed_inverse(&problem, &inverse)?;

    // support lemma: P_ξ ≤ V†V
    let sigma = vdag.matmul(rho).matmul(v).hermitize();
    let p_xi = support(&sigma, tol)?;
    let containment = p_xi.matmul(&range_proj).max_abs_diff(&p_xi);
    if containment > 10.0 * tol.eq_tol {
        return Err(BayesError::InternalInconsistency { context: "support must lie under V†V", residual: containment });
    }
    Ok(inverse)
}

/// Factor a Hermitian block matrix `M = [[𝔄,𝔅],[𝔅†,ℭ]]` as `L·L†` with
/// `L = [[𝔄^½, 0],[𝔅†·𝔄̂^½, (ℭ − 𝔅†·𝔄̂·𝔅)^½]]`, after checking the three
/// positivity conditions.
pub fn schur_factor(
    frak_a: &CMatrix,
    frak_b: &CMatrix,
    frak_c: &CMatrix,
    tol: &Tolerances,
) -> Result<CMatrix, BayesError> {
    let m = frak_a.rows();
    let k = frak_c.rows();
    if !frak_a.is_square() || !frak_c.is_square() || frak_b.rows() != m || frak_b.cols() != k {
        return Err(BayesError::DimensionMismatch { context: "schur_factor blocks" });
    }

    let a_psd = is_psd(frak_a, tol)?;
    if !a_psd.is_psd {
        return Err(BayesError::PreconditionFailed {
            condition: SchurCondition::BlockPositive,
            witness: a_psd.min_eigenvalue,
        });
    }
    let p_a = support(&frak_a.hermitize(), tol)?;
    let kernel_leak = p_a.matmul(frak_b).max_abs_diff(frak_b);
    if kernel_leak > tol.eq_tol {
        return Err(BayesError::PreconditionFailed {
            condition: SchurCondition::KernelContainment,
            witness: kernel_leak,
        });
    }
    let a_hat = pseudoinverse(&frak_a.hermitize(), tol)?;
    let complement = &frak_c.hermitize() - &frak_b.adjoint().matmul(&a_hat).matmul(frak_b).hermitize();
    let c_psd = is_psd(&complement, tol)?;
    if !c_psd.is_psd {
        return Err(BayesError::PreconditionFailed {
            condition: SchurCondition::ComplementPositive,
            witness: c_psd.min_eigenvalue,
        });
    }

    let ctol = construction_tol(tol);
    let a_sqrt = psd_sqrt(&frak_a.hermitize(), &ctol)?;
    let a_hat_sqrt = psd_sqrt(&a_hat, &ctol)?;
    let comp_sqrt = psd_sqrt(&complement, &ctol)?;
    let lower_left = frak_b.adjoint().matmul(&a_hat_sqrt);

    let mut l = CMatrix::zeros(m + k, m + k);
    for r in 0..m {
        for c in 0..m {
            l[(r, c)] = a_sqrt[(r, c)];
        }
    }
    for r in 0..k {
        for c in 0..m {
            l[(m + r, c)] = lower_left[(r, c)];
        }
        for c in 0..k {
            l[(m + r, m + c)] = comp_sqrt[(r, c)];
        }
    }
    Ok(l)
}
