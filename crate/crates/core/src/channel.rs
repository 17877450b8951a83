//! Kraus-represented quantum operations and their time reversal.
//!
//! A [`KrausMap`] with operators `K_k` acts on matrices as `X ↦ Σ K_k X K_k^†`.
//! For a channel this is the Schrödinger picture, and [`apply_heisenberg`]
//! evaluates the dual `X ↦ Σ K_k^† X K_k`.
//!
//! The reversal of `E` with respect to `ρ_t` is stored on the Schrödinger side
//! with operators `ρ_t^{1/2} M_j^† ρ_{t+1}^{-1/2}`; its Heisenberg side is then
//! `Y ↦ Σ R_j Y R_j^†` with `R_j = ρ_{t+1}^{-1/2} M_j ρ_t^{1/2}`.

use std::fmt;

use nalgebra::{Complex, DMatrix, DVector};

use crate::classical::StochasticMatrix;
use crate::error::{Error, Result};
use crate::linalg::{
    c, check_dim, check_square, inverse_sqrt_psd, psd_order_holds, spectral_decompose, spectral_norm, sqrt_psd,
    support_projector, trace_distance, CMatrix, Hermitian,
};
use crate::scalar::{Real, Tolerances};

/// Unit-trace positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T: Real> {
    rho: Hermitian<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Checks positivity within `tol_psd` and unit trace within `tol_norm`.
    pub fn new(rho: Hermitian<T>, tol: &Tolerances) -> Result<Self> {
        let min = spectral_decompose(&rho).min_eigenvalue();
        if min < -T::lit(tol.tol_psd) {
            return Err(Error::NotPsd { min_eigenvalue: min.as_f64() });
        }
        let tr = rho.trace();
        if (tr - T::one()).abs() > T::lit(tol.tol_norm) {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        Ok(Self { rho })
    }

    pub fn from_matrix(m: CMatrix<T>, tol: &Tolerances) -> Result<Self> {
        Self::new(Hermitian::new(m, tol)?, tol)
    }

    /// Divides a PSD matrix by its trace.
    pub(crate) fn normalized(h: Hermitian<T>) -> Self {
        let tr = h.trace();
        Self { rho: h.scale(T::one() / tr) }
    }

    /// Wraps a matrix that is a state up to rounding.
    pub(crate) fn trusted(rho: Hermitian<T>) -> Self {
        Self { rho }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { rho: Hermitian::identity(dim).scale(T::one() / T::from_usize(dim).unwrap()) }
    }

    /// `|ψ⟩⟨ψ|` for a normalized copy of `psi`.
    pub fn pure(psi: &DVector<Complex<T>>) -> Self {
        let n = psi.norm();
        Self { rho: Hermitian::outer(&(psi / c(n))) }
    }

    pub fn diagonal(probs: &[T], tol: &Tolerances) -> Result<Self> {
        Self::new(Hermitian::from_real_diagonal(probs), tol)
    }

    /// Computational basis state `|i⟩⟨i|`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut d = vec![T::zero(); dim];
        d[i] = T::one();
        Self { rho: Hermitian::from_real_diagonal(&d) }
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn as_hermitian(&self) -> &Hermitian<T> {
        &self.rho
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        self.rho.matrix()
    }

    pub fn rank(&self, tol: &Tolerances) -> usize {
        spectral_decompose(&self.rho).rank(tol)
    }

    pub fn support_projector(&self, tol: &Tolerances) -> Hermitian<T> {
        support_projector(&self.rho, tol).expect("state is PSD")
    }
}

/// Declared normalization of a Kraus family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KrausKind {
    /// `Σ K^† K = I`.
    TracePreserving,
    /// `Σ K^† K ≤ I`.
    TraceNonIncreasing,
    /// `Σ K K^† = I`, i.e. the map sends `I` to `I`.
    IdentityPreserving,
}

impl KrausKind {
    pub fn name(self) -> &'static str {
        match self {
            KrausKind::TracePreserving => "trace_preserving",
            KrausKind::TraceNonIncreasing => "trace_non_increasing",
            KrausKind::IdentityPreserving => "identity_preserving",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [Self::TracePreserving, Self::TraceNonIncreasing, Self::IdentityPreserving]
            .into_iter()
            .find(|k| k.name() == name)
    }

    /// Kind of the adjoint family `{K^†}`.
    pub fn dual(self) -> Option<Self> {
        match self {
            KrausKind::TracePreserving => Some(KrausKind::IdentityPreserving),
            KrausKind::IdentityPreserving => Some(KrausKind::TracePreserving),
            KrausKind::TraceNonIncreasing => None,
        }
    }
}

impl fmt::Display for KrausKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Completely positive map `X ↦ Σ K_k X K_k^†` on `d × d` matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausMap<T: Real> {
    dim: usize,
    operators: Vec<CMatrix<T>>,
    kind: KrausKind,
}

/// Output of [`validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct KrausReport<T: Real> {
    /// `‖Σ K^† K - I‖` in operator norm.
    pub completeness_residual: T,
    /// `‖Σ K K^† - I‖` in operator norm.
    pub dual_completeness_residual: T,
    /// `λ_min(I - Σ K^† K)`, nonnegative for a trace-non-increasing family.
    pub contraction_slack: T,
    /// Strongest kind the family satisfies, if any.
    pub classified: Option<KrausKind>,
}

fn check_operators<T: Real>(operators: &[CMatrix<T>]) -> Result<usize> {
    let first = operators.first().ok_or_else(|| Error::InvalidKraus("empty Kraus family".into()))?;
    let dim = check_square(first)?;
    for m in operators {
        check_dim(dim, check_square(m)?)?;
    }
    Ok(dim)
}

impl<T: Real> KrausMap<T> {
    /// Validates shapes and the declared kind against `tol_recon`.
    pub fn new(operators: Vec<CMatrix<T>>, kind: KrausKind, tol: &Tolerances) -> Result<Self> {
        let dim = check_operators(&operators)?;
        let map = Self { dim, operators, kind };
        let report = validate(&map, tol)?;
        let limit = T::lit(tol.tol_recon);
        match kind {
            KrausKind::TracePreserving if report.completeness_residual > limit => {
                Err(Error::NotTracePreserving { residual: report.completeness_residual.as_f64() })
            }
            KrausKind::IdentityPreserving if report.dual_completeness_residual > limit => {
                Err(Error::CompletenessViolation { residual: report.dual_completeness_residual.as_f64() })
            }
            KrausKind::TraceNonIncreasing if report.contraction_slack < -T::lit(tol.tol_psd) => {
                Err(Error::CompletenessViolation { residual: (-report.contraction_slack).as_f64() })
            }
            _ => Ok(map),
        }
    }

    pub(crate) fn from_parts(operators: Vec<CMatrix<T>>, kind: KrausKind) -> Self {
        let dim = operators.first().map_or(0, |m| m.nrows());
        Self { dim, operators, kind }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_parts(vec![CMatrix::identity(dim, dim)], KrausKind::TracePreserving)
    }

    /// `X ↦ U X U^†`.
    pub fn unitary(u: CMatrix<T>, tol: &Tolerances) -> Result<Self> {
        Self::new(vec![u], KrausKind::TracePreserving, tol)
    }

    /// Qubit amplitude damping with decay probability `gamma`.
    pub fn amplitude_damping(gamma: T) -> Self {
        let z = T::zero();
        let m0 = CMatrix::from_row_slice(2, 2, &[c(T::one()), c(z), c(z), c((T::one() - gamma).sqrt())]);
        let m1 = CMatrix::from_row_slice(2, 2, &[c(z), c(gamma.sqrt()), c(z), c(z)]);
        Self::from_parts(vec![m0, m1], KrausKind::TracePreserving)
    }

    /// Completely depolarizing channel `X ↦ trace(X) I/d`, Kraus `{|i⟩⟨j|/√d}`.
    pub fn depolarizing(dim: usize) -> Self {
        let s = c(T::one() / T::from_usize(dim).unwrap().sqrt());
        let mut ops = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let mut m = CMatrix::zeros(dim, dim);
                m[(i, j)] = s;
                ops.push(m);
            }
        }
        Self::from_parts(ops, KrausKind::TracePreserving)
    }

    /// Projective measurement channel from orthogonal projectors.
    pub fn measurement(projectors: &[Hermitian<T>], tol: &Tolerances) -> Result<Self> {
        Self::new(projectors.iter().map(|p| p.matrix().clone()).collect(), KrausKind::TracePreserving, tol)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn operators(&self) -> &[CMatrix<T>] {
        &self.operators
    }

    pub fn kind(&self) -> KrausKind {
        self.kind
    }

    /// `Σ K^† K`.
    pub fn completeness_sum(&self) -> Hermitian<T> {
        let mut s = CMatrix::zeros(self.dim, self.dim);
        for k in &self.operators {
            s += k.adjoint() * k;
        }
        Hermitian::symmetrize(s)
    }

    /// `Σ K K^†`.
    pub fn dual_completeness_sum(&self) -> Hermitian<T> {
        let mut s = CMatrix::zeros(self.dim, self.dim);
        for k in &self.operators {
            s += k * k.adjoint();
        }
        Hermitian::symmetrize(s)
    }

    /// `X ↦ Σ K X K^†` without any normalization requirement.
    pub fn apply(&self, x: &Hermitian<T>) -> Result<Hermitian<T>> {
        check_dim(self.dim, x.dim())?;
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for k in &self.operators {
            out += k * x.matrix() * k.adjoint();
        }
        Ok(Hermitian::symmetrize(out))
    }

    /// `X ↦ Σ K^† X K`.
    pub fn apply_dual(&self, x: &Hermitian<T>) -> Result<Hermitian<T>> {
        check_dim(self.dim, x.dim())?;
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for k in &self.operators {
            out += k.adjoint() * x.matrix() * k;
        }
        Ok(Hermitian::symmetrize(out))
    }

    /// The family `{K^†}`, i.e. the dual map written as a Kraus map.
    pub fn adjoint(&self) -> Self {
        let kind = self.kind.dual().unwrap_or(KrausKind::TraceNonIncreasing);
        Self::from_parts(self.operators.iter().map(|k| k.adjoint()).collect(), kind)
    }

    /// `Σ_k (a ∘ b)`: apply `self` first, then `next`.
    pub fn then(&self, next: &Self) -> Result<Self> {
        check_dim(self.dim, next.dim)?;
        let mut ops = Vec::with_capacity(self.len() * next.len());
        for b in &next.operators {
            for a in &self.operators {
                ops.push(b * a);
            }
        }
        let kind = if self.kind == next.kind { self.kind } else { KrausKind::TraceNonIncreasing };
        Ok(Self::from_parts(ops, kind))
    }

    /// `(1-ε) self + ε other` as a Kraus family `{√(1-ε) M} ∪ {√ε N}`.
    pub fn mixture(&self, other: &Self, eps: T) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        if !(eps >= T::zero() && eps <= T::one()) {
            return Err(Error::InvalidInput(format!("mixing weight {eps} outside [0, 1]")));
        }
        let a = c((T::one() - eps).sqrt());
        let b = c(eps.sqrt());
        let mut ops: Vec<_> = self.operators.iter().map(|m| m * a).collect();
        ops.extend(other.operators.iter().map(|m| m * b));
        let kind = if self.kind == other.kind { self.kind } else { KrausKind::TraceNonIncreasing };
        Ok(Self::from_parts(ops, kind))
    }

    /// Unitary remixing `M'_i = Σ_j u_ij M_j`; `u` may be larger than the
    /// family, which is then padded with zero operators.
    pub fn remix(&self, u: &CMatrix<T>) -> Result<Self> {
        if u.nrows() != u.ncols() || u.nrows() < self.len() {
            return Err(Error::InvalidInput(format!(
                "remixing matrix is {}x{} for {} operators",
                u.nrows(),
                u.ncols(),
                self.len()
            )));
        }
        let ops = (0..u.nrows())
            .map(|i| {
                let mut m = CMatrix::zeros(self.dim, self.dim);
                for (j, op) in self.operators.iter().enumerate() {
                    m += op * u[(i, j)];
                }
                m
            })
            .collect();
        Ok(Self::from_parts(ops, self.kind))
    }
}

/// Completeness residuals and classification of a Kraus family.
pub fn validate<T: Real>(map: &KrausMap<T>, tol: &Tolerances) -> Result<KrausReport<T>> {
    let dim = check_operators(&map.operators)?;
    let id = Hermitian::identity(dim);
    let s = map.completeness_sum();
    let completeness_residual = spectral_norm(s.sub(&id).matrix());
    let dual_completeness_residual = spectral_norm(map.dual_completeness_sum().sub(&id).matrix());
    let contraction_slack = spectral_decompose(&id.sub(&s)).min_eigenvalue();
    let limit = T::lit(tol.tol_recon);
    let classified = if completeness_residual <= limit {
        Some(KrausKind::TracePreserving)
    } else if dual_completeness_residual <= limit {
        Some(KrausKind::IdentityPreserving)
    } else if psd_order_holds(&s, &id, tol)? {
        Some(KrausKind::TraceNonIncreasing)
    } else {
        None
    };
    Ok(KrausReport { completeness_residual, dual_completeness_residual, contraction_slack, classified })
}

fn require_trace_preserving<T: Real>(map: &KrausMap<T>) -> Result<()> {
    if map.kind != KrausKind::TracePreserving {
        let residual = spectral_norm(map.completeness_sum().sub(&Hermitian::identity(map.dim)).matrix());
        return Err(Error::NotTracePreserving { residual: residual.as_f64() });
    }
    Ok(())
}

/// `ρ ↦ Σ M ρ M^†` for a trace-preserving map.
pub fn apply_schrodinger<T: Real>(map: &KrausMap<T>, rho: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
    require_trace_preserving(map)?;
    Ok(DensityMatrix::trusted(map.apply(rho.as_hermitian())?))
}

/// `X ↦ Σ M^† X M`.
pub fn apply_heisenberg<T: Real>(map: &KrausMap<T>, x: &Hermitian<T>) -> Result<Hermitian<T>> {
    map.apply_dual(x)
}

/// `⟨X, Y⟩_ρ = trace(X ρ^{1/2} Y ρ^{1/2})`.
pub fn weighted_inner_product<T: Real>(
    x: &Hermitian<T>,
    y: &Hermitian<T>,
    rho: &DensityMatrix<T>,
    tol: &Tolerances,
) -> Result<T> {
    check_dim(rho.dim(), x.dim())?;
    check_dim(rho.dim(), y.dim())?;
    let s = sqrt_psd(rho.as_hermitian(), tol)?;
    Ok((x.matrix() * s.matrix() * y.matrix() * s.matrix()).trace().re)
}

/// The transform `T_ρ(F)` with Kraus operators `ρ^{1/2} F_k^† F(ρ)^{-1/2}`.
///
/// The result is trace-preserving when `F(ρ)` has full rank and
/// trace-non-increasing otherwise.
pub fn reversal_transform<T: Real>(map: &KrausMap<T>, rho: &DensityMatrix<T>, tol: &Tolerances) -> Result<KrausMap<T>> {
    check_dim(map.dim(), rho.dim())?;
    let image = map.apply(rho.as_hermitian())?;
    let s = sqrt_psd(rho.as_hermitian(), tol)?;
    let n = inverse_sqrt_psd(&image, tol)?;
    let ops = map.operators().iter().map(|m| s.matrix() * m.adjoint() * n.matrix()).collect();
    let full = spectral_decompose(&image).rank(tol) == map.dim();
    let kind = if full { KrausKind::TracePreserving } else { KrausKind::TraceNonIncreasing };
    Ok(KrausMap::from_parts(ops, kind))
}

/// Schrödinger-side reversal of a channel with respect to `ρ_t`.
pub fn time_reversal<T: Real>(map: &KrausMap<T>, rho_t: &DensityMatrix<T>, tol: &Tolerances) -> Result<KrausMap<T>> {
    require_trace_preserving(map)?;
    reversal_transform(map, rho_t, tol)
}

/// Appends `|β⟩⟨β|` for an orthonormal basis of `ker ρ_next`, making a reversal
/// with completeness sum `Π_{ρ_next}` trace-preserving.
pub fn augment_to_tpcp<T: Real>(
    reversal: &KrausMap<T>,
    rho_next: &DensityMatrix<T>,
    tol: &Tolerances,
) -> Result<KrausMap<T>> {
    check_dim(reversal.dim(), rho_next.dim())?;
    let sd = spectral_decompose(rho_next.as_hermitian());
    let rank = sd.rank(tol);
    let support = sd.projector(0..rank);
    let residual = spectral_norm(reversal.completeness_sum().sub(&support).matrix());
    if residual > T::lit(tol.tol_check) {
        return Err(Error::NotReversalShaped { residual: residual.as_f64() });
    }
    let mut ops = reversal.operators().to_vec();
    for k in rank..sd.dim() {
        let b = sd.eigenvectors.column(k);
        ops.push(&b * b.adjoint());
    }
    Ok(KrausMap::from_parts(ops, KrausKind::TracePreserving))
}

/// `tr((I - Π_ρ) σ)`, the weight of `σ` outside `supp ρ`.
pub fn support_leakage<T: Real>(sigma: &DensityMatrix<T>, rho: &DensityMatrix<T>, tol: &Tolerances) -> Result<T> {
    check_dim(rho.dim(), sigma.dim())?;
    let outside = Hermitian::identity(rho.dim()).sub(&rho.support_projector(tol));
    Ok(outside.trace_product(sigma.as_hermitian()))
}

fn require_support<T: Real>(sigma: &DensityMatrix<T>, rho: &DensityMatrix<T>, tol: &Tolerances) -> Result<()> {
    let leak = support_leakage(sigma, rho, tol)?;
    if leak > T::lit(tol.tol_check) {
        return Err(Error::SupportViolation(format!("state has weight {leak} outside the reference support")));
    }
    Ok(())
}

/// `‖T_{ρ_{t+1}}(T_{ρ_t}(E))(σ_t) - E(σ_t)‖_tr` for `supp σ_t ⊆ supp ρ_t`.
pub fn check_consistency<T: Real>(
    map: &KrausMap<T>,
    rho_t: &DensityMatrix<T>,
    sigma_t: &DensityMatrix<T>,
    tol: &Tolerances,
) -> Result<T> {
    require_support(sigma_t, rho_t, tol)?;
    let double = double_reversal(map, rho_t, tol)?;
    let forward = apply_schrodinger(map, sigma_t)?;
    Ok(trace_distance(&double.apply(sigma_t.as_hermitian())?, forward.as_hermitian()))
}

/// `T_{ρ_{t+1}}(T_{ρ_t}(E))`, with Kraus operators `Π_{t+1} M_j Π_t`.
pub fn double_reversal<T: Real>(map: &KrausMap<T>, rho_t: &DensityMatrix<T>, tol: &Tolerances) -> Result<KrausMap<T>> {
    let rho_next = apply_schrodinger(map, rho_t)?;
    let reversal = time_reversal(map, rho_t, tol)?;
    reversal_transform(&reversal, &rho_next, tol)
}

/// `|⟨E(X), Y⟩_{ρ_t} - ⟨X, R(Y)⟩_{ρ_{t+1}}|` with `E` and `R` Heisenberg sides.
pub fn check_space_time_adjointness_q<T: Real>(
    map: &KrausMap<T>,
    rho_t: &DensityMatrix<T>,
    x: &Hermitian<T>,
    y: &Hermitian<T>,
    tol: &Tolerances,
) -> Result<T> {
    check_dim(map.dim(), x.dim())?;
    check_dim(map.dim(), y.dim())?;
    let rho_next = apply_schrodinger(map, rho_t)?;
    let reversal = time_reversal(map, rho_t, tol)?;
    let lhs = weighted_inner_product(&apply_heisenberg(map, x)?, y, rho_t, tol)?;
    let rhs = weighted_inner_product(x, &apply_heisenberg(&reversal, y)?, &rho_next, tol)?;
    Ok((lhs - rhs).abs())
}

/// `‖Π_{ρ_{t+1}} Z Π_{ρ_{t+1}} - Z‖` with `Z = Σ M ρ_t^{1/2} Y ρ_t^{1/2} M^†`.
pub fn support_lemma_residual<T: Real>(
    map: &KrausMap<T>,
    rho_t: &DensityMatrix<T>,
    y: &Hermitian<T>,
    tol: &Tolerances,
) -> Result<T> {
    let rho_next = apply_schrodinger(map, rho_t)?;
    let s = sqrt_psd(rho_t.as_hermitian(), tol)?;
    let z = map.apply(&y.congruence(s.matrix()))?;
    let p = rho_next.support_projector(tol);
    Ok(spectral_norm(z.congruence(p.matrix()).sub(&z).matrix()))
}

/// Two-time measurement statistics in the eigenbases of `ρ_t` and `ρ_{t+1}`.
#[derive(Clone, Debug)]
pub struct TwoTimeProbabilities<T: Real> {
    /// `P(i, j)` from the forward map.
    pub forward: DMatrix<T>,
    /// `P(i, j)` recomputed from the reversal and `ρ_{t+1}`.
    pub reverse: DMatrix<T>,
    /// Eigenvalues `p_i` of `ρ_t`, one per eigenspace (including the kernel).
    pub p: Vec<T>,
    /// Eigenvalues `q_j` of `ρ_{t+1}`, one per eigenspace (including the kernel).
    pub q: Vec<T>,
    /// Eigenspace projectors of `ρ_t`.
    pub projectors_t: Vec<Hermitian<T>>,
    /// Eigenspace projectors of `ρ_{t+1}`.
    pub projectors_next: Vec<Hermitian<T>>,
    /// Set when some eigenvalue has multiplicity above one.
    pub degenerate: bool,
}

impl<T: Real> TwoTimeProbabilities<T> {
    /// Largest entrywise difference between the forward and reverse tables.
    pub fn residual(&self) -> T {
        (&self.forward - &self.reverse).amax()
    }

    pub fn total(&self) -> T {
        self.forward.sum()
    }
}

fn eigen_family<T: Real>(rho: &DensityMatrix<T>, tol: &Tolerances) -> (Vec<T>, Vec<Hermitian<T>>, bool) {
    let sd = spectral_decompose(rho.as_hermitian());
    let groups = sd.eigenspace_groups(tol);
    let degenerate = groups.iter().any(|g| g.len() > 1);
    let mut values = Vec::with_capacity(groups.len());
    let mut projectors = Vec::with_capacity(groups.len());
    for g in groups {
        let mean = sd.eigenvalues.rows(g.start, g.len()).sum() / T::from_usize(g.len()).unwrap();
        values.push(mean.max(T::zero()));
        projectors.push(sd.projector(g));
    }
    (values, projectors, degenerate)
}

/// `P(i, j) = trace(Π_j E(Π_i) Π_j) p_i`, together with the same table from
/// the reversal: `trace(Π_i R(Π_j) Π_i) q_j`.
pub fn two_time_probabilities<T: Real>(
    map: &KrausMap<T>,
    rho_t: &DensityMatrix<T>,
    tol: &Tolerances,
) -> Result<TwoTimeProbabilities<T>> {
    let rho_next = apply_schrodinger(map, rho_t)?;
    let reversal = time_reversal(map, rho_t, tol)?;
    let (p, projectors_t, deg_t) = eigen_family(rho_t, tol);
    let (q, projectors_next, deg_next) = eigen_family(&rho_next, tol);
    let mut forward = DMatrix::zeros(p.len(), q.len());
    let mut reverse = DMatrix::zeros(p.len(), q.len());
    for (i, pi) in projectors_t.iter().enumerate() {
        let image = map.apply(pi)?;
        for (j, pj) in projectors_next.iter().enumerate() {
            forward[(i, j)] = (image.trace_product(pj) * p[i]).max(T::zero());
        }
    }
    for (j, pj) in projectors_next.iter().enumerate() {
        let image = reversal.apply(pj)?;
        for (i, pi) in projectors_t.iter().enumerate() {
            reverse[(i, j)] = (image.trace_product(pi) * q[j]).max(T::zero());
        }
    }
    Ok(TwoTimeProbabilities { forward, reverse, p, q, projectors_t, projectors_next, degenerate: deg_t || deg_next })
}

/// Outcome probabilities `trace(M_k^† M_k ρ_t)` and their reverse-time
/// counterparts `trace(R_k R_k^† ρ_{t+1})`.
pub fn measurement_probability_reversal<T: Real>(
    map: &KrausMap<T>,
    rho_t: &DensityMatrix<T>,
    tol: &Tolerances,
) -> Result<(Vec<T>, Vec<T>)> {
    let rho_next = apply_schrodinger(map, rho_t)?;
    let reversal = time_reversal(map, rho_t, tol)?;
    let forward = map
        .operators()
        .iter()
        .map(|m| Hermitian::symmetrize(m.adjoint() * m).trace_product(rho_t.as_hermitian()))
        .collect();
    let reverse = reversal
        .operators()
        .iter()
        .map(|k| Hermitian::symmetrize(k.adjoint() * k).trace_product(rho_next.as_hermitian()))
        .collect();
    Ok((forward, reverse))
}

/// Kraus family `{√p_ij |j⟩⟨i|}` whose action on diagonal states is the chain `P`.
pub fn embed_stochastic<T: Real>(p: &StochasticMatrix<T>) -> KrausMap<T> {
    let n = p.n();
    let mut ops = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let w = p.get(i, j);
            if w > T::zero() {
                let mut m = CMatrix::zeros(n, n);
                m[(j, i)] = c(w.sqrt());
                ops.push(m);
            }
        }
    }
    KrausMap::from_parts(ops, KrausKind::TracePreserving)
}

/// `T[i][j] = ⟨j| F(|i⟩⟨i|) |j⟩`, the classical transition table read off a map.
pub fn transition_table<T: Real>(map: &KrausMap<T>) -> DMatrix<T> {
    let n = map.dim();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        let image = map.apply(DensityMatrix::basis(n, i).as_hermitian()).expect("dimension matches");
        for j in 0..n {
            out[(i, j)] = image[(j, j)].re;
        }
    }
    out
}

/// `d^2` pure states whose projectors span all `d × d` Hermitian matrices:
/// `|i⟩`, `(|i⟩ + |j⟩)/√2` and `(|i⟩ + i|j⟩)/√2`.
pub fn spanning_states<T: Real>(dim: usize) -> Vec<DensityMatrix<T>> {
    let one = c(T::one());
    let mut out = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        out.push(DensityMatrix::basis(dim, i));
    }
    for i in 0..dim {
        for j in i + 1..dim {
            for phase in [one, Complex::new(T::zero(), T::one())] {
                let mut v = DVector::zeros(dim);
                v[i] = one;
                v[j] = phase;
                out.push(DensityMatrix::pure(&v));
            }
        }
    }
    out
}

/// Initial state, trace-preserving channels and the states `ρ_0..ρ_T` they produce.
#[derive(Clone, Debug)]
pub struct ChannelFlow<T: Real> {
    channels: Vec<KrausMap<T>>,
    states: Vec<DensityMatrix<T>>,
}

impl<T: Real> ChannelFlow<T> {
    pub fn new(initial: DensityMatrix<T>, channels: Vec<KrausMap<T>>) -> Result<Self> {
        let mut states = Vec::with_capacity(channels.len() + 1);
        states.push(initial);
        for e in &channels {
            check_dim(states[0].dim(), e.dim())?;
            let next = apply_schrodinger(e, states.last().unwrap())?;
            states.push(next);
        }
        Ok(Self { channels, states })
    }

    /// Checks `ρ_{t+1} = E_t(ρ_t)` within `tol_recon` (trace norm).
    pub fn from_parts(channels: Vec<KrausMap<T>>, states: Vec<DensityMatrix<T>>, tol: &Tolerances) -> Result<Self> {
        if states.len() != channels.len() + 1 {
            return Err(Error::InvalidInput(format!(
                "{} channels need {} states, got {}",
                channels.len(),
                channels.len() + 1,
                states.len()
            )));
        }
        for (t, e) in channels.iter().enumerate() {
            check_dim(states[t].dim(), e.dim())?;
            let next = apply_schrodinger(e, &states[t])?;
            let dev = trace_distance(next.as_hermitian(), states[t + 1].as_hermitian());
            if dev > T::lit(tol.tol_recon) {
                return Err(Error::InvalidInput(format!("rho_{} differs from E(rho_{}) by {dev}", t + 1, t)));
            }
        }
        Ok(Self { channels, states })
    }

    pub fn steps(&self) -> usize {
        self.channels.len()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn channels(&self) -> &[KrausMap<T>] {
        &self.channels
    }

    pub fn states(&self) -> &[DensityMatrix<T>] {
        &self.states
    }

    /// Schrödinger-side reversals `T_{ρ_t}(E_t)` for every step.
    pub fn reversals(&self, tol: &Tolerances) -> Result<Vec<KrausMap<T>>> {
        self.channels.iter().zip(&self.states).map(|(e, rho)| time_reversal(e, rho, tol)).collect()
    }
}
