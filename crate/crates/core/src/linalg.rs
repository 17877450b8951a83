//! Dense complex Hermitian linear algebra.
//!
//! Spectral decompositions, functional calculus, Moore-Penrose pseudo-inverses,
//! support projectors and the Loewner (PSD) order. Every other module builds
//! on these primitives; all of them honour the shared rank cutoff and the
//! negative-eigenvalue clipping rule from [`Tolerances`].

use std::fmt;
use std::ops::{Bound, Deref};

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::{Real, Tolerances};

/// Dense complex matrix.
pub type CMatrix<T> = DMatrix<Complex<T>>;

pub(crate) fn c<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

pub(crate) fn check_square<T: Real>(m: &CMatrix<T>) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(m.nrows())
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// A square complex matrix equal to its conjugate transpose.
///
/// Construction through [`Hermitian::new`] checks symmetry against `tol_herm`
/// and then stores the exactly symmetrized matrix `(A + A^†)/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct Hermitian<T: Real>(CMatrix<T>);

impl<T: Real> Hermitian<T> {
    pub fn new(m: CMatrix<T>, tol: &Tolerances) -> Result<Self> {
        let n = check_square(&m)?;
        let tol_herm = T::lit(tol.tol_herm);
        let mut worst = (0, 0, T::zero());
        for i in 0..n {
            for j in i..n {
                let dev = (m[(i, j)] - m[(j, i)].conj()).norm_sqr().sqrt();
                if dev > worst.2 {
                    worst = (i, j, dev);
                }
            }
        }
        if worst.2 > tol_herm {
            return Err(Error::NotHermitian { row: worst.0, col: worst.1, deviation: worst.2.as_f64() });
        }
        Ok(Self::symmetrize(m))
    }

    /// `(m + m^†)/2` without a tolerance check; for matrices that are
    /// Hermitian by construction up to rounding.
    pub fn symmetrize(m: CMatrix<T>) -> Self {
        let half = c(T::lit(0.5));
        let adj = m.adjoint();
        Self((m + adj) * half)
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMatrix::zeros(dim, dim))
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        let v = DVector::from_iterator(diag.len(), diag.iter().map(|&x| c(x)));
        Self(CMatrix::from_diagonal(&v))
    }

    /// `|v⟩⟨v|` for a (not necessarily normalized) vector.
    pub fn outer(v: &DVector<Complex<T>>) -> Self {
        Self(v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix<T> {
        self.0
    }

    pub fn trace(&self) -> T {
        self.0.trace().re
    }

    pub fn scale(&self, s: T) -> Self {
        Self(&self.0 * c(s))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(&self.0 - &other.0)
    }

    /// `trace(self * other)`, real for two Hermitian matrices.
    pub fn trace_product(&self, other: &Self) -> T {
        // sum_ij a_ij b_ji without forming the product
        let n = self.dim();
        let mut acc = Complex::new(T::zero(), T::zero());
        for i in 0..n {
            for j in 0..n {
                acc += self.0[(i, j)] * other.0[(j, i)];
            }
        }
        acc.re
    }

    /// `B A B^†`, Hermitian for Hermitian `A`.
    pub fn congruence(&self, b: &CMatrix<T>) -> Self {
        Self::symmetrize(b * &self.0 * b.adjoint())
    }

    pub fn is_diagonal(&self, tol: T) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.0[(i, j)].norm_sqr().sqrt() <= tol))
    }

    pub fn real_diagonal(&self) -> Vec<T> {
        (0..self.dim()).map(|i| self.0[(i, i)].re).collect()
    }
}

impl<T: Real> Deref for Hermitian<T> {
    type Target = CMatrix<T>;

    fn deref(&self) -> &CMatrix<T> {
        &self.0
    }
}

/// Eigen-decomposition `A = V diag(λ) V^†` with eigenvalues sorted descending.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition<T: Real> {
    pub eigenvalues: DVector<T>,
    pub eigenvectors: CMatrix<T>,
}

impl<T: Real> SpectralDecomposition<T> {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max_eigenvalue(&self) -> T {
        self.eigenvalues[0]
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues[self.dim() - 1]
    }

    /// `V diag(g(λ_i)) V^†`.
    pub fn compose(&self, g: impl Fn(T) -> T) -> Hermitian<T> {
        let values: Vec<T> = self.eigenvalues.iter().map(|&l| g(l)).collect();
        self.compose_values(&values)
    }

    /// `V diag(values) V^†`.
    pub fn compose_values(&self, values: &[T]) -> Hermitian<T> {
        let mut scaled = self.eigenvectors.clone();
        for (j, &v) in values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(v);
        }
        Hermitian::symmetrize(scaled * self.eigenvectors.adjoint())
    }

    pub fn reconstruct(&self) -> Hermitian<T> {
        self.compose(|x| x)
    }

    /// Threshold below which an eigenvalue is treated as zero.
    pub fn cutoff(&self, tol: &Tolerances) -> T {
        let scale = self.max_eigenvalue().abs().max(self.min_eigenvalue().abs());
        T::lit(tol.rank_cutoff_rel) * scale
    }

    /// Number of eigenvalues above the rank cutoff.
    pub fn rank(&self, tol: &Tolerances) -> usize {
        let cut = self.cutoff(tol);
        self.eigenvalues.iter().filter(|&&l| l > cut && l > T::zero()).count()
    }

    /// Contiguous index ranges of (numerically) equal eigenvalues. Two
    /// neighbours belong to the same group when they differ by at most the
    /// rank cutoff.
    pub fn eigenspace_groups(&self, tol: &Tolerances) -> Vec<std::ops::Range<usize>> {
        let gap = self.cutoff(tol).max(T::lit(tol.tol_psd));
        let mut groups = Vec::new();
        let mut start = 0;
        for k in 1..=self.dim() {
            if k == self.dim() || self.eigenvalues[k - 1] - self.eigenvalues[k] > gap {
                groups.push(start..k);
                start = k;
            }
        }
        groups
    }

    /// Orthogonal projector onto the span of the eigenvectors in `range`.
    pub fn projector(&self, range: std::ops::Range<usize>) -> Hermitian<T> {
        let cols = self.eigenvectors.columns(range.start, range.len());
        Hermitian::symmetrize(&cols * cols.adjoint())
    }
}

/// Spectral decomposition of a Hermitian matrix, eigenvalues descending.
pub fn spectral_decompose<T: Real>(a: &Hermitian<T>) -> SpectralDecomposition<T> {
    let eig = SymmetricEigen::new(a.0.clone());
    let n = a.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap_or(std::cmp::Ordering::Equal));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    SpectralDecomposition { eigenvalues, eigenvectors }
}

/// A real interval, possibly open or unbounded at either end.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval<T> {
    pub lo: Bound<T>,
    pub hi: Bound<T>,
}

impl<T: Real> Interval<T> {
    pub fn all() -> Self {
        Self { lo: Bound::Unbounded, hi: Bound::Unbounded }
    }

    /// `[0, +∞)`
    pub fn nonnegative() -> Self {
        Self { lo: Bound::Included(T::zero()), hi: Bound::Unbounded }
    }

    /// `(0, +∞)`
    pub fn positive() -> Self {
        Self { lo: Bound::Excluded(T::zero()), hi: Bound::Unbounded }
    }

    pub fn contains(&self, x: T) -> bool {
        let lo_ok = match self.lo {
            Bound::Included(l) => x >= l,
            Bound::Excluded(l) => x > l,
            Bound::Unbounded => true,
        };
        let hi_ok = match self.hi {
            Bound::Included(h) => x <= h,
            Bound::Excluded(h) => x < h,
            Bound::Unbounded => true,
        };
        lo_ok && hi_ok
    }

    /// Moves `x` onto a closed endpoint when it misses it by at most `slack`.
    /// Open endpoints are never clipped onto.
    pub fn clip(&self, x: T, slack: T) -> Option<T> {
        if self.contains(x) {
            return Some(x);
        }
        if let Bound::Included(l) = self.lo {
            if x < l && l - x <= slack {
                return Some(l);
            }
        }
        if let Bound::Included(h) = self.hi {
            if x > h && x - h <= slack {
                return Some(h);
            }
        }
        None
    }
}

impl<T: Real> fmt::Display for Interval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.lo {
            Bound::Included(l) => write!(f, "[{l}, ")?,
            Bound::Excluded(l) => write!(f, "({l}, ")?,
            Bound::Unbounded => write!(f, "(-inf, ")?,
        }
        match self.hi {
            Bound::Included(h) => write!(f, "{h}]"),
            Bound::Excluded(h) => write!(f, "{h})"),
            Bound::Unbounded => write!(f, "+inf)"),
        }
    }
}

/// Standard real functions applied through the functional calculus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScalarFn {
    Sqrt,
    Log,
    /// `x log x` with `0 log 0 = 0`.
    XLogX,
    NegLog,
    Square,
    Reciprocal,
    Exp,
}

impl ScalarFn {
    pub const ALL: [ScalarFn; 7] = [
        ScalarFn::Sqrt,
        ScalarFn::Log,
        ScalarFn::XLogX,
        ScalarFn::NegLog,
        ScalarFn::Square,
        ScalarFn::Reciprocal,
        ScalarFn::Exp,
    ];

    pub fn eval<T: Real>(self, x: T) -> T {
        match self {
            ScalarFn::Sqrt => x.sqrt(),
            ScalarFn::Log => x.ln(),
            ScalarFn::XLogX => {
                if x == T::zero() {
                    T::zero()
                } else {
                    x * x.ln()
                }
            }
            ScalarFn::NegLog => -x.ln(),
            ScalarFn::Square => x * x,
            ScalarFn::Reciprocal => T::one() / x,
            ScalarFn::Exp => x.exp(),
        }
    }

    pub fn domain<T: Real>(self) -> Interval<T> {
        match self {
            ScalarFn::Sqrt | ScalarFn::XLogX => Interval::nonnegative(),
            ScalarFn::Log | ScalarFn::NegLog | ScalarFn::Reciprocal => Interval::positive(),
            ScalarFn::Square | ScalarFn::Exp => Interval::all(),
        }
    }

    /// Operator convex on its domain (as opposed to merely convex, or neither).
    pub fn is_operator_convex(self) -> bool {
        matches!(self, ScalarFn::XLogX | ScalarFn::NegLog | ScalarFn::Square | ScalarFn::Reciprocal)
    }

    pub fn is_convex(self) -> bool {
        self.is_operator_convex() || self == ScalarFn::Exp
    }

    pub fn name(self) -> &'static str {
        match self {
            ScalarFn::Sqrt => "sqrt",
            ScalarFn::Log => "log",
            ScalarFn::XLogX => "xlogx",
            ScalarFn::NegLog => "neglog",
            ScalarFn::Square => "square",
            ScalarFn::Reciprocal => "reciprocal",
            ScalarFn::Exp => "exp",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn apply<T: Real>(self, a: &Hermitian<T>, tol: &Tolerances) -> Result<Hermitian<T>> {
        matrix_function(a, |x| self.eval(x), &self.domain(), tol)
    }
}

/// `f(A) = Σ f(λ_j) Π_j`. Eigenvalues that fall outside a closed end of
/// `domain` by at most `tol_psd` are clipped onto it first.
pub fn matrix_function<T: Real>(
    a: &Hermitian<T>,
    f: impl Fn(T) -> T,
    domain: &Interval<T>,
    tol: &Tolerances,
) -> Result<Hermitian<T>> {
    let sd = spectral_decompose(a);
    matrix_function_of(&sd, f, domain, tol)
}

pub(crate) fn matrix_function_of<T: Real>(
    sd: &SpectralDecomposition<T>,
    f: impl Fn(T) -> T,
    domain: &Interval<T>,
    tol: &Tolerances,
) -> Result<Hermitian<T>> {
    let slack = T::lit(tol.tol_psd);
    let mut values = Vec::with_capacity(sd.dim());
    for &l in sd.eigenvalues.iter() {
        let x = domain
            .clip(l, slack)
            .ok_or_else(|| Error::DomainViolation { eigenvalue: l.as_f64(), domain: domain.to_string() })?;
        values.push(f(x));
    }
    Ok(sd.compose_values(&values))
}

fn require_psd<T: Real>(sd: &SpectralDecomposition<T>, tol: &Tolerances) -> Result<()> {
    let m = sd.min_eigenvalue();
    if m < -T::lit(tol.tol_psd) {
        return Err(Error::NotPsd { min_eigenvalue: m.as_f64() });
    }
    Ok(())
}

/// Applies `g` to eigenvalues above the rank cutoff and maps the rest to zero.
fn on_support<T: Real>(sd: &SpectralDecomposition<T>, tol: &Tolerances, g: impl Fn(T) -> T) -> Hermitian<T> {
    let cut = sd.cutoff(tol);
    sd.compose(|l| if l > cut && l > T::zero() { g(l) } else { T::zero() })
}

/// Moore-Penrose pseudo-inverse of a PSD matrix.
pub fn pseudo_inverse<T: Real>(a: &Hermitian<T>, tol: &Tolerances) -> Result<Hermitian<T>> {
    let sd = spectral_decompose(a);
    require_psd(&sd, tol)?;
    Ok(on_support(&sd, tol, |l| T::one() / l))
}

/// Orthogonal projector onto the support (range) of a PSD matrix.
pub fn support_projector<T: Real>(a: &Hermitian<T>, tol: &Tolerances) -> Result<Hermitian<T>> {
    let sd = spectral_decompose(a);
    require_psd(&sd, tol)?;
    Ok(on_support(&sd, tol, |_| T::one()))
}

/// PSD square root. Eigenvalues below the rank cutoff are set to zero, so
/// rounding noise in the kernel is not lifted to its square root.
pub fn sqrt_psd<T: Real>(a: &Hermitian<T>, tol: &Tolerances) -> Result<Hermitian<T>> {
    let sd = spectral_decompose(a);
    require_psd(&sd, tol)?;
    Ok(on_support(&sd, tol, |l| l.sqrt()))
}

/// Pseudo-inverse of the PSD square root, `(A^{1/2})^#`.
///
/// The support is decided on the spectrum of `A` itself, so the cutoff is
/// `rank_cutoff_rel * λ_max(A)` rather than a cutoff relative to `sqrt(λ_max)`.
pub fn inverse_sqrt_psd<T: Real>(a: &Hermitian<T>, tol: &Tolerances) -> Result<Hermitian<T>> {
    let sd = spectral_decompose(a);
    require_psd(&sd, tol)?;
    Ok(on_support(&sd, tol, |l| T::one() / l.sqrt()))
}

/// `A ≤ B` in the Loewner order: `λ_min(B - A) ≥ -tol_psd`.
pub fn psd_order_holds<T: Real>(a: &Hermitian<T>, b: &Hermitian<T>, tol: &Tolerances) -> Result<bool> {
    check_dim(a.dim(), b.dim())?;
    Ok(min_eigenvalue(&b.sub(a)) >= -T::lit(tol.tol_psd))
}

pub fn min_eigenvalue<T: Real>(a: &Hermitian<T>) -> T {
    spectral_decompose(a).min_eigenvalue()
}

/// Operator (spectral) norm of a Hermitian matrix.
pub fn operator_norm<T: Real>(a: &Hermitian<T>) -> T {
    let sd = spectral_decompose(a);
    sd.max_eigenvalue().abs().max(sd.min_eigenvalue().abs())
}

/// Largest singular value of a general complex matrix.
pub fn spectral_norm<T: Real>(m: &CMatrix<T>) -> T {
    if m.is_empty() {
        return T::zero();
    }
    let s = m.clone().svd(false, false).singular_values;
    s.iter().fold(T::zero(), |acc, &x| acc.max(x))
}

/// Trace norm `Σ |λ_i|` of a Hermitian matrix.
pub fn trace_norm<T: Real>(a: &Hermitian<T>) -> T {
    spectral_decompose(a).eigenvalues.iter().fold(T::zero(), |acc, &l| acc + l.abs())
}

/// Operator-norm distance between two Hermitian matrices.
pub fn operator_distance<T: Real>(a: &Hermitian<T>, b: &Hermitian<T>) -> T {
    operator_norm(&a.sub(b))
}

/// Trace-norm distance between two Hermitian matrices.
pub fn trace_distance<T: Real>(a: &Hermitian<T>, b: &Hermitian<T>) -> T {
    trace_norm(&a.sub(b))
}
