//! Finite-state Markov chains: forward evolution, reverse-time transition
//! matrices, the space-time inner product, space-time harmonic functions,
//! Doob ratios, Kullback-Leibler divergence and the classical H-theorem.
//!
//! Convention: `p[i][j] = P(X(t+1) = j | X(t) = i)` (row stochastic), and
//! distributions evolve as `π_{t+1} = P^T π_t`. All expectation identities are
//! evaluated by exact propagation of distributions; nothing is sampled.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::{Real, Tolerances};

/// Row-stochastic transition matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticMatrix<T: Real> {
    p: DMatrix<T>,
}

impl<T: Real> StochasticMatrix<T> {
    /// Validates a transition matrix. Entries in `[-tol_psd, 0)` are clipped to
    /// zero; every row must sum to one within `tol_norm`.
    pub fn new(mut p: DMatrix<T>, tol: &Tolerances) -> Result<Self> {
        let n = p.nrows();
        if n == 0 || p.ncols() != n {
            return Err(Error::InvalidStochastic(format!("matrix is {}x{}, expected square", n, p.ncols())));
        }
        let clip = T::lit(tol.tol_psd);
        for i in 0..n {
            for j in 0..n {
                let x = p[(i, j)];
                if !x.is_finite() {
                    return Err(Error::InvalidStochastic(format!("entry [{i}][{j}] is not finite")));
                }
                if x < T::zero() {
                    if x < -clip {
                        return Err(Error::InvalidStochastic(format!(
                            "entry ({}, {}) of P = {x} is negative",
                            i + 1,
                            j + 1
                        )));
                    }
                    p[(i, j)] = T::zero();
                }
            }
            let s = p.row(i).sum();
            if (s - T::one()).abs() > T::lit(tol.tol_norm) {
                return Err(Error::InvalidStochastic(format!("row {} of P sums to {s}", i + 1)));
            }
        }
        Ok(Self { p })
    }

    /// Wraps a matrix known to be stochastic up to rounding.
    pub(crate) fn normalized(p: DMatrix<T>) -> Self {
        Self { p }
    }

    pub fn identity(n: usize) -> Self {
        Self { p: DMatrix::identity(n, n) }
    }

    pub fn n(&self) -> usize {
        self.p.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.p
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.p[(i, j)]
    }

    /// Largest deviation of a row sum from one.
    pub fn row_sum_residual(&self) -> T {
        (0..self.n()).fold(T::zero(), |acc, i| acc.max((self.p.row(i).sum() - T::one()).abs()))
    }
}

/// Probability vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution<T: Real> {
    pi: DVector<T>,
}

impl<T: Real> Distribution<T> {
    pub fn new(values: Vec<T>, tol: &Tolerances) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidDistribution("empty vector".into()));
        }
        let clip = T::lit(tol.tol_psd);
        let mut v = values;
        for (i, x) in v.iter_mut().enumerate() {
            if !x.is_finite() {
                return Err(Error::InvalidDistribution(format!("entry {i} is not finite")));
            }
            if *x < T::zero() {
                if *x < -clip {
                    return Err(Error::InvalidDistribution(format!("entry {i} = {x} is negative")));
                }
                *x = T::zero();
            }
        }
        let s = v.iter().fold(T::zero(), |a, &b| a + b);
        if (s - T::one()).abs() > T::lit(tol.tol_norm) {
            return Err(Error::InvalidDistribution(format!("entries sum to {s}")));
        }
        Ok(Self { pi: DVector::from_vec(v) })
    }

    pub(crate) fn normalized(values: Vec<T>) -> Self {
        Self { pi: DVector::from_vec(values) }
    }

    pub fn uniform(n: usize) -> Self {
        Self { pi: DVector::from_element(n, T::one() / T::from_usize(n).unwrap()) }
    }

    pub fn n(&self) -> usize {
        self.pi.len()
    }

    pub fn vector(&self) -> &DVector<T> {
        &self.pi
    }

    pub fn as_slice(&self) -> &[T] {
        self.pi.as_slice()
    }

    pub fn get(&self, i: usize) -> T {
        self.pi[i]
    }
}

/// Transition matrices `P(0..T-1)` together with the distributions `π_0..π_T`
/// they generate.
#[derive(Clone, Debug)]
pub struct ChainFlow<T: Real> {
    transitions: Vec<StochasticMatrix<T>>,
    distributions: Vec<Distribution<T>>,
}

impl<T: Real> ChainFlow<T> {
    /// Propagates `initial` through `transitions`.
    pub fn new(initial: Distribution<T>, transitions: Vec<StochasticMatrix<T>>) -> Result<Self> {
        let mut distributions = Vec::with_capacity(transitions.len() + 1);
        distributions.push(initial);
        for p in &transitions {
            let next = evolve_forward(p, distributions.last().unwrap())?;
            distributions.push(next);
        }
        Ok(Self { transitions, distributions })
    }

    /// Time-homogeneous flow with `steps` applications of `p`.
    pub fn homogeneous(initial: Distribution<T>, p: &StochasticMatrix<T>, steps: usize) -> Result<Self> {
        Self::new(initial, vec![p.clone(); steps])
    }

    /// Checks `π_{t+1} = P(t)^T π_t` within `tol_recon` for supplied parts.
    pub fn from_parts(
        transitions: Vec<StochasticMatrix<T>>,
        distributions: Vec<Distribution<T>>,
        tol: &Tolerances,
    ) -> Result<Self> {
        if distributions.len() != transitions.len() + 1 {
            return Err(Error::InvalidInput(format!(
                "{} transitions need {} distributions, got {}",
                transitions.len(),
                transitions.len() + 1,
                distributions.len()
            )));
        }
        for (t, p) in transitions.iter().enumerate() {
            let next = evolve_forward(p, &distributions[t])?;
            let dev = (next.vector() - distributions[t + 1].vector()).amax();
            if dev > T::lit(tol.tol_recon) {
                return Err(Error::InvalidInput(format!("pi_{} differs from P^T pi_{} by {dev}", t + 1, t)));
            }
        }
        Ok(Self { transitions, distributions })
    }

    /// Number of transitions `T`.
    pub fn steps(&self) -> usize {
        self.transitions.len()
    }

    pub fn n(&self) -> usize {
        self.distributions[0].n()
    }

    pub fn transitions(&self) -> &[StochasticMatrix<T>] {
        &self.transitions
    }

    pub fn distributions(&self) -> &[Distribution<T>] {
        &self.distributions
    }

    /// `Q(t)` for every `t`.
    pub fn reverse_transitions(&self) -> Vec<StochasticMatrix<T>> {
        self.transitions
            .iter()
            .zip(&self.distributions)
            .map(|(p, pi)| reverse_transition_matrix(p, pi).expect("dimensions checked on construction"))
            .collect()
    }
}

/// Time-indexed real vectors `f_t`, aligned with the times `0..=T` of a flow.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeFunction<T: Real> {
    pub values: Vec<DVector<T>>,
}

impl<T: Real> SpaceTimeFunction<T> {
    pub fn new(values: Vec<DVector<T>>) -> Self {
        Self { values }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        Self { values: rows.into_iter().map(DVector::from_vec).collect() }
    }

    pub fn constant(times: usize, n: usize, value: T) -> Self {
        Self { values: vec![DVector::from_element(n, value); times] }
    }

    pub fn times(&self) -> usize {
        self.values.len()
    }

    pub fn at(&self, t: usize, i: usize) -> T {
        self.values[t][i]
    }

    fn check_against(&self, flow: &ChainFlow<T>) -> Result<()> {
        if self.values.len() != flow.steps() + 1 {
            return Err(Error::DimensionMismatch { expected: flow.steps() + 1, found: self.values.len() });
        }
        for v in &self.values {
            if v.len() != flow.n() {
                return Err(Error::DimensionMismatch { expected: flow.n(), found: v.len() });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput("space-time function has a non-finite value".into()));
            }
        }
        Ok(())
    }
}

/// `π_{t+1} = P^T π_t`.
pub fn evolve_forward<T: Real>(p: &StochasticMatrix<T>, pi: &Distribution<T>) -> Result<Distribution<T>> {
    if p.n() != pi.n() {
        return Err(Error::DimensionMismatch { expected: p.n(), found: pi.n() });
    }
    Ok(Distribution::normalized(p.matrix().tr_mul(pi.vector()).as_slice().to_vec()))
}

/// Reverse-time transition matrix `Q = D_{π_{t+1}}^{-1} P^T D_{π_t}`, i.e.
/// `q[j][i] = p[i][j] π_t(i) / π_{t+1}(j)`. Rows with `π_{t+1}(j) = 0` are
/// filled with the uniform distribution.
pub fn reverse_transition_matrix<T: Real>(
    p: &StochasticMatrix<T>,
    pi_t: &Distribution<T>,
) -> Result<StochasticMatrix<T>> {
    let next = evolve_forward(p, pi_t)?;
    let n = p.n();
    let uniform = T::one() / T::from_usize(n).unwrap();
    let q = DMatrix::from_fn(n, n, |j, i| {
        let mass = next.get(j);
        if mass > T::zero() {
            p.get(i, j) * pi_t.get(i) / mass
        } else {
            uniform
        }
    });
    Ok(StochasticMatrix::normalized(q))
}

/// Two-time joint law `J[i][j] = P(X(t) = i, X(t+1) = j) = π_t(i) p[i][j]`.
pub fn joint_two_time<T: Real>(p: &StochasticMatrix<T>, pi_t: &Distribution<T>) -> Result<DMatrix<T>> {
    if p.n() != pi_t.n() {
        return Err(Error::DimensionMismatch { expected: p.n(), found: pi_t.n() });
    }
    Ok(DMatrix::from_fn(p.n(), p.n(), |i, j| pi_t.get(i) * p.get(i, j)))
}

/// `⟨f, g⟩_π = Σ_t f_t^T D_{π_t} g_t`.
pub fn space_time_inner_product<T: Real>(
    f: &SpaceTimeFunction<T>,
    g: &SpaceTimeFunction<T>,
    flow: &ChainFlow<T>,
) -> Result<T> {
    f.check_against(flow)?;
    g.check_against(flow)?;
    let mut acc = T::zero();
    for (t, pi) in flow.distributions().iter().enumerate() {
        for i in 0..flow.n() {
            acc += f.at(t, i) * g.at(t, i) * pi.get(i);
        }
    }
    Ok(acc)
}

/// `Δ⁺f_t = P(t) f_{t+1} - f_t`, with `f` extended by zero after the window.
pub fn forward_difference<T: Real>(f: &SpaceTimeFunction<T>, flow: &ChainFlow<T>) -> Result<SpaceTimeFunction<T>> {
    f.check_against(flow)?;
    let last = flow.steps();
    let values = (0..=last)
        .map(|t| {
            if t < last {
                flow.transitions()[t].matrix() * &f.values[t + 1] - &f.values[t]
            } else {
                -f.values[t].clone()
            }
        })
        .collect();
    Ok(SpaceTimeFunction::new(values))
}

/// `Δ⁻g_{t+1} = Q(t) g_t - g_{t+1}`, with `g` extended by zero before the window.
pub fn backward_difference<T: Real>(g: &SpaceTimeFunction<T>, flow: &ChainFlow<T>) -> Result<SpaceTimeFunction<T>> {
    g.check_against(flow)?;
    let q = flow.reverse_transitions();
    let values = (0..=flow.steps())
        .map(|s| if s == 0 { -g.values[0].clone() } else { q[s - 1].matrix() * &g.values[s - 1] - &g.values[s] })
        .collect();
    Ok(SpaceTimeFunction::new(values))
}

/// `|⟨Δ⁺f, g⟩_π - ⟨f, Δ⁻g⟩_π|` for `f`, `g` supported in the flow's window.
pub fn check_space_time_adjointness<T: Real>(
    flow: &ChainFlow<T>,
    f: &SpaceTimeFunction<T>,
    g: &SpaceTimeFunction<T>,
) -> Result<T> {
    let lhs = space_time_inner_product(&forward_difference(f, flow)?, g, flow)?;
    let rhs = space_time_inner_product(f, &backward_difference(g, flow)?, flow)?;
    Ok((lhs - rhs).abs())
}

/// Residual of the discrete integration-by-parts formula
/// `E[X(T)Y(T) - X(0)Y(0)] = Σ_t E[Δ⁺X(t) Y(t) - X(t+1) Δ⁻Y(t+1)]`
/// for `X(t) = f(t, X_t)`, `Y(t) = g(t, X_t)` on the window `[0, T]`.
pub fn integration_by_parts_residual<T: Real>(
    flow: &ChainFlow<T>,
    f: &SpaceTimeFunction<T>,
    g: &SpaceTimeFunction<T>,
) -> Result<T> {
    f.check_against(flow)?;
    g.check_against(flow)?;
    let n = flow.n();
    let pis = flow.distributions();
    let expect = |t: usize, h: &dyn Fn(usize) -> T| (0..n).fold(T::zero(), |acc, i| acc + pis[t].get(i) * h(i));
    let last = flow.steps();
    let lhs = expect(last, &|i| f.at(last, i) * g.at(last, i)) - expect(0, &|i| f.at(0, i) * g.at(0, i));
    let q = flow.reverse_transitions();
    let mut rhs = T::zero();
    for t in 0..last {
        let dplus = flow.transitions()[t].matrix() * &f.values[t + 1] - &f.values[t];
        let dminus = q[t].matrix() * &g.values[t] - &g.values[t + 1];
        rhs += expect(t, &|i| dplus[i] * g.at(t, i)) - expect(t + 1, &|j| f.at(t + 1, j) * dminus[j]);
    }
    Ok((lhs - rhs).abs())
}

/// `max_t ‖h_t - P(t) h_{t+1}‖_∞`.
pub fn harmonic_residual<T: Real>(h: &SpaceTimeFunction<T>, transitions: &[StochasticMatrix<T>]) -> Result<T> {
    if h.times() != transitions.len() + 1 {
        return Err(Error::DimensionMismatch { expected: transitions.len() + 1, found: h.times() });
    }
    let mut worst = T::zero();
    for (t, p) in transitions.iter().enumerate() {
        if h.values[t].len() != p.n() || h.values[t + 1].len() != p.n() {
            return Err(Error::DimensionMismatch { expected: p.n(), found: h.values[t].len() });
        }
        worst = worst.max((p.matrix() * &h.values[t + 1] - &h.values[t]).amax());
    }
    Ok(worst)
}

/// Backward equation `h_t = P(t) h_{t+1}` at every step, within `tol_check`.
pub fn is_space_time_harmonic<T: Real>(
    h: &SpaceTimeFunction<T>,
    transitions: &[StochasticMatrix<T>],
    tol: &Tolerances,
) -> Result<bool> {
    Ok(harmonic_residual(h, transitions)? <= T::lit(tol.tol_check))
}

/// `max_t ‖θ_{t+1} - Q(t) θ_t‖_∞` with `Q` from the flow.
pub fn reverse_harmonic_residual<T: Real>(theta: &SpaceTimeFunction<T>, flow: &ChainFlow<T>) -> Result<T> {
    theta.check_against(flow)?;
    let q = flow.reverse_transitions();
    let mut worst = T::zero();
    for (t, qt) in q.iter().enumerate() {
        worst = worst.max((qt.matrix() * &theta.values[t] - &theta.values[t + 1]).amax());
    }
    Ok(worst)
}

/// Reverse-time equation `θ_{t+1} = Q(t) θ_t` at every step, within `tol_check`.
pub fn is_reverse_time_harmonic<T: Real>(
    theta: &SpaceTimeFunction<T>,
    flow: &ChainFlow<T>,
    tol: &Tolerances,
) -> Result<bool> {
    Ok(reverse_harmonic_residual(theta, flow)? <= T::lit(tol.tol_check))
}

/// `[E h(t, X(t))]_t` under the flow's distributions.
pub fn expectations<T: Real>(h: &SpaceTimeFunction<T>, flow: &ChainFlow<T>) -> Result<Vec<T>> {
    h.check_against(flow)?;
    Ok(flow.distributions().iter().zip(&h.values).map(|(pi, v)| pi.vector().dot(v)).collect())
}

/// Doob ratio `θ(t, i) = p_t(i) / π_t(i)` of two forward solutions driven by
/// the same transitions. Entries where both masses vanish are set to zero.
pub fn doob_ratio<T: Real>(flow_p: &ChainFlow<T>, flow_pi: &ChainFlow<T>) -> Result<SpaceTimeFunction<T>> {
    if flow_p.n() != flow_pi.n() {
        return Err(Error::DimensionMismatch { expected: flow_pi.n(), found: flow_p.n() });
    }
    if flow_p.steps() != flow_pi.steps() {
        return Err(Error::DimensionMismatch { expected: flow_pi.steps(), found: flow_p.steps() });
    }
    if flow_p.transitions() != flow_pi.transitions() {
        return Err(Error::InvalidInput("Doob ratio needs both flows to share their transitions".into()));
    }
    let mut values = Vec::with_capacity(flow_p.steps() + 1);
    for (t, (p, pi)) in flow_p.distributions().iter().zip(flow_pi.distributions()).enumerate() {
        let mut v = DVector::zeros(p.n());
        for i in 0..p.n() {
            let (num, den) = (p.get(i), pi.get(i));
            if den > T::zero() {
                v[i] = num / den;
            } else if num > T::zero() {
                return Err(Error::SupportViolation(format!("pi_{t}({i}) = 0 while p_{t}({i}) = {num}")));
            }
        }
        values.push(v);
    }
    Ok(SpaceTimeFunction::new(values))
}

/// `D(p‖q) = Σ p_i log(p_i / q_i)` in nats, `+∞` when `supp p ⊄ supp q`.
pub fn kl_divergence<T: Real>(p: &Distribution<T>, q: &Distribution<T>) -> T {
    kl_slices(p.as_slice(), q.as_slice())
}

pub(crate) fn kl_slices<T: Real>(p: &[T], q: &[T]) -> T {
    assert_eq!(p.len(), q.len(), "KL divergence of vectors of different length");
    let mut acc = T::zero();
    for (&pi, &qi) in p.iter().zip(q) {
        if pi <= T::zero() {
            continue;
        }
        if qi <= T::zero() {
            return T::infinity();
        }
        acc += pi * (pi / qi).ln();
    }
    acc
}

/// `[D(π_t ‖ π̄)]_{t=0..=steps}` for the homogeneous chain `P` started at `pi0`.
/// `pibar` must be stationary for `P` within `tol_check`.
pub fn classical_h_theorem_report<T: Real>(
    p: &StochasticMatrix<T>,
    pi0: &Distribution<T>,
    pibar: &Distribution<T>,
    steps: usize,
    tol: &Tolerances,
) -> Result<Vec<T>> {
    let moved = evolve_forward(p, pibar)?;
    let residual = (moved.vector() - pibar.vector()).amax();
    if residual > T::lit(tol.tol_check) {
        return Err(Error::NotStationary { residual: residual.as_f64() });
    }
    let flow = ChainFlow::homogeneous(pi0.clone(), p, steps)?;
    Ok(flow.distributions().iter().map(|pi| kl_divergence(pi, pibar)).collect())
}

/// A stationary distribution of `P`, from the least-squares solution of
/// `(P^T - I) π = 0`, `Σ π = 1`.
pub fn stationary_distribution<T: Real>(p: &StochasticMatrix<T>, tol: &Tolerances) -> Result<Distribution<T>> {
    let n = p.n();
    let mut a = DMatrix::zeros(n + 1, n);
    a.view_mut((0, 0), (n, n)).copy_from(&(p.matrix().transpose() - DMatrix::identity(n, n)));
    a.row_mut(n).fill(T::one());
    let mut b = DVector::zeros(n + 1);
    b[n] = T::one();
    let x = a
        .svd(true, true)
        .solve(&b, T::default_epsilon())
        .map_err(|e| Error::InvalidInput(format!("stationary solve failed: {e}")))?;
    let clipped: Vec<T> = x.iter().map(|&v| v.max(T::zero())).collect();
    let s = clipped.iter().fold(T::zero(), |a, &b| a + b);
    let pi = Distribution::new(clipped.iter().map(|&v| v / s).collect(), tol)?;
    let residual = (evolve_forward(p, &pi)?.vector() - pi.vector()).amax();
    if residual > T::lit(tol.tol_check) {
        return Err(Error::NotStationary { residual: residual.as_f64() });
    }
    Ok(pi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_distribution, random_sparse_stochastic, random_stochastic, rng};
    use proptest::prelude::*;
    use rand::Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn sm(rows: &[&[f64]]) -> StochasticMatrix<f64> {
        let n = rows.len();
        StochasticMatrix::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]), &tol()).unwrap()
    }

    fn dist(v: &[f64]) -> Distribution<f64> {
        Distribution::new(v.to_vec(), &tol()).unwrap()
    }

    #[test]
    fn validation_errors() {
        let bad = DMatrix::from_row_slice(2, 2, &[0.5, 0.47, 0.5, 0.5]);
        let err = StochasticMatrix::new(bad, &tol()).unwrap_err();
        assert!(err.to_string().contains("row 1 of P sums to 0.97"), "{err}");
        let neg = DMatrix::from_row_slice(2, 2, &[1.1, -0.1, 0.5, 0.5]);
        assert!(StochasticMatrix::new(neg, &tol()).is_err());
        let tiny = DMatrix::from_row_slice(2, 2, &[1.0, -1e-13, 0.5, 0.5]);
        let p = StochasticMatrix::new(tiny, &tol()).unwrap();
        assert_eq!(p.get(0, 1), 0.0);
        assert!(Distribution::new(vec![0.5, 0.6], &tol()).is_err());
        assert!(Distribution::<f64>::new(vec![], &tol()).is_err());
    }

    #[test]
    fn evolve_examples() {
        let pi = dist(&[0.3, 0.7]);
        let out = evolve_forward(&StochasticMatrix::identity(2), &pi).unwrap();
        assert_eq!(out.as_slice(), &[0.3, 0.7]);
        let p = sm(&[&[0.3, 0.7], &[0.6, 0.4]]);
        let out = evolve_forward(&p, &dist(&[1.0, 0.0])).unwrap();
        assert!((out.get(0) - 0.3).abs() < 1e-15 && (out.get(1) - 0.7).abs() < 1e-15);
        let ds = sm(&[&[0.2, 0.5, 0.3], &[0.5, 0.1, 0.4], &[0.3, 0.4, 0.3]]);
        let out = evolve_forward(&ds, &Distribution::uniform(3)).unwrap();
        for i in 0..3 {
            assert!((out.get(i) - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!(matches!(evolve_forward(&ds, &pi), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn reverse_examples() {
        let q = reverse_transition_matrix(&StochasticMatrix::identity(3), &dist(&[0.2, 0.3, 0.5])).unwrap();
        assert_eq!(q.matrix(), &DMatrix::identity(3, 3));
        let half = sm(&[&[0.5, 0.5], &[0.5, 0.5]]);
        let q = reverse_transition_matrix(&half, &dist(&[0.5, 0.5])).unwrap();
        assert!((q.matrix() - half.matrix()).amax() < 1e-15);
        let absorb = sm(&[&[1.0, 0.0], &[1.0, 0.0]]);
        let q = reverse_transition_matrix(&absorb, &dist(&[0.5, 0.5])).unwrap();
        assert_eq!(q.matrix(), &DMatrix::from_element(2, 2, 0.5));
    }

    #[test]
    fn inner_product_examples() {
        let mut r = rng(4);
        let p: Vec<_> = (0..4).map(|_| random_stochastic::<f64, _>(&mut r, 3)).collect();
        let flow = ChainFlow::new(random_distribution(&mut r, 3), p).unwrap();
        let one = SpaceTimeFunction::constant(5, 3, 1.0);
        assert!((space_time_inner_product(&one, &one, &flow).unwrap() - 5.0).abs() < 1e-14);
        let zero = SpaceTimeFunction::constant(5, 3, 0.0);
        assert_eq!(space_time_inner_product(&zero, &one, &flow).unwrap(), 0.0);
        let f =
            SpaceTimeFunction::from_rows((0..5).map(|_| (0..3).map(|_| r.random::<f64>() - 0.5).collect()).collect());
        let g =
            SpaceTimeFunction::from_rows((0..5).map(|_| (0..3).map(|_| r.random::<f64>() - 0.5).collect()).collect());
        let mut direct = 0.0;
        for t in 0..5 {
            for i in 0..3 {
                direct += f.at(t, i) * g.at(t, i) * flow.distributions()[t].get(i);
            }
        }
        let ip = space_time_inner_product(&f, &g, &flow).unwrap();
        assert!((ip - direct).abs() < 1e-15);
        assert!((ip - space_time_inner_product(&g, &f, &flow).unwrap()).abs() < 1e-15);
        let short = SpaceTimeFunction::constant(4, 3, 1.0);
        assert!(space_time_inner_product(&short, &one, &flow).is_err());
    }

    #[test]
    fn adjointness_examples() {
        let mut r = rng(21);
        let p: Vec<_> = (0..3).map(|_| random_sparse_stochastic::<f64, _>(&mut r, 3)).collect();
        let flow = ChainFlow::new(random_distribution(&mut r, 3), p).unwrap();
        let zero = SpaceTimeFunction::constant(4, 3, 0.0);
        assert_eq!(check_space_time_adjointness(&flow, &zero, &zero).unwrap(), 0.0);
        let f = SpaceTimeFunction::from_rows((0..4).map(|t| vec![t as f64 + 1.0; 3]).collect());
        let g = SpaceTimeFunction::from_rows((0..4).map(|t| vec![2.0 - t as f64; 3]).collect());
        assert!(check_space_time_adjointness(&flow, &f, &g).unwrap() <= 1e-12);
    }

    #[test]
    fn harmonic_examples() {
        let mut r = rng(2);
        let p: Vec<_> = (0..3).map(|_| random_stochastic::<f64, _>(&mut r, 4)).collect();
        let one = SpaceTimeFunction::constant(4, 4, 1.0);
        assert!(is_space_time_harmonic(&one, &p, &tol()).unwrap());
        let h = SpaceTimeFunction::from_rows((0..4).map(|_| (0..4).map(|_| r.random::<f64>()).collect()).collect());
        assert!(!is_space_time_harmonic(&h, &p, &tol()).unwrap());
        // pulling back a terminal function gives a harmonic one
        let mut vals = vec![DVector::from_fn(4, |_, _| r.random::<f64>())];
        for pt in p.iter().rev() {
            let next = pt.matrix() * vals.last().unwrap();
            vals.push(next);
        }
        vals.reverse();
        assert!(is_space_time_harmonic(&SpaceTimeFunction::new(vals), &p, &tol()).unwrap());
    }

    #[test]
    fn doob_ratio_examples() {
        let p = sm(&[&[0.9, 0.1], &[0.2, 0.8]]);
        let pi0 = dist(&[0.5, 0.5]);
        let same = ChainFlow::homogeneous(pi0.clone(), &p, 3).unwrap();
        let theta = doob_ratio(&same, &same).unwrap();
        assert_eq!(theta, SpaceTimeFunction::constant(4, 2, 1.0));

        let flow_p = ChainFlow::homogeneous(dist(&[1.0, 0.0]), &p, 3).unwrap();
        let theta = doob_ratio(&flow_p, &same).unwrap();
        // t = 0: (1, 0) / (0.5, 0.5); t = 1: (0.9, 0.1) / (0.55, 0.45)
        assert!((theta.at(0, 0) - 2.0).abs() < 1e-15 && theta.at(0, 1) == 0.0);
        assert!((theta.at(1, 0) - 0.9 / 0.55).abs() < 1e-14);
        assert!((theta.at(1, 1) - 0.1 / 0.45).abs() < 1e-14);
        assert!(reverse_harmonic_residual(&theta, &same).unwrap() <= 1e-12);

        // stationary vs transient
        let pibar = dist(&[2.0 / 3.0, 1.0 / 3.0]);
        let stat = ChainFlow::homogeneous(pibar, &p, 3).unwrap();
        let theta_bar = doob_ratio(&stat, &flow_p_full(&p)).unwrap();
        assert!(is_reverse_time_harmonic(&theta_bar, &flow_p_full(&p), &tol()).unwrap());

        // support violation
        let point = ChainFlow::homogeneous(dist(&[1.0, 0.0]), &StochasticMatrix::identity(2), 1).unwrap();
        let other = ChainFlow::homogeneous(dist(&[0.0, 1.0]), &StochasticMatrix::identity(2), 1).unwrap();
        assert!(matches!(doob_ratio(&other, &point), Err(Error::SupportViolation(_))));
    }

    fn flow_p_full(p: &StochasticMatrix<f64>) -> ChainFlow<f64> {
        ChainFlow::homogeneous(dist(&[0.2, 0.8]), p, 3).unwrap()
    }

    #[test]
    fn kl_examples() {
        let p = dist(&[0.75, 0.25]);
        assert_eq!(kl_divergence(&p, &p), 0.0);
        let expected = 0.75 * 1.5f64.ln() + 0.25 * 0.5f64.ln();
        let d = kl_divergence(&p, &dist(&[0.5, 0.5]));
        assert!((d - expected).abs() < 1e-15);
        assert!((d - 0.130812).abs() < 1e-6);
        assert_eq!(kl_divergence(&dist(&[1.0, 0.0]), &dist(&[0.0, 1.0])), f64::INFINITY);
    }

    #[test]
    fn h_theorem_examples() {
        let p = sm(&[&[0.9, 0.1], &[0.2, 0.8]]);
        let pibar = dist(&[2.0 / 3.0, 1.0 / 3.0]);
        let seq = classical_h_theorem_report(&p, &pibar, &pibar, 5, &tol()).unwrap();
        assert!(seq.iter().all(|&d| d.abs() < 1e-15));
        let seq = classical_h_theorem_report(&p, &dist(&[1.0, 0.0]), &pibar, 10, &tol()).unwrap();
        assert!((seq[0] - 1.5f64.ln()).abs() < 1e-12);
        assert!(seq.windows(2).all(|w| w[1] < w[0]));
        let id = StochasticMatrix::identity(2);
        let seq = classical_h_theorem_report(&id, &dist(&[0.3, 0.7]), &dist(&[0.5, 0.5]), 4, &tol()).unwrap();
        assert!(seq.windows(2).all(|w| w[0] == w[1]));
        let err = classical_h_theorem_report(&p, &pibar, &dist(&[0.5, 0.5]), 3, &tol()).unwrap_err();
        assert!(matches!(err, Error::NotStationary { .. }));
    }

    #[test]
    fn stationary_helper() {
        let p = sm(&[&[0.9, 0.1], &[0.2, 0.8]]);
        let pi = stationary_distribution(&p, &tol()).unwrap();
        assert!((pi.get(0) - 2.0 / 3.0).abs() < 1e-12);
        let mut r = rng(9);
        for n in 2..=6 {
            let p = random_stochastic::<f64, _>(&mut r, n);
            let pi = stationary_distribution(&p, &tol()).unwrap();
            let moved = evolve_forward(&p, &pi).unwrap();
            assert!((moved.vector() - pi.vector()).amax() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn bayes_consistency(seed in any::<u64>(), n in 2usize..=6) {
            let mut r = rng(seed);
            let p = random_stochastic::<f64, _>(&mut r, n);
            let pi = random_distribution::<f64, _>(&mut r, n);
            let q = reverse_transition_matrix(&p, &pi).unwrap();
            let next = evolve_forward(&p, &pi).unwrap();
            for i in 0..n {
                for j in 0..n {
                    prop_assert!((p.get(i, j) * pi.get(i) - q.get(j, i) * next.get(j)).abs() <= 1e-10);
                }
            }
            prop_assert!(q.row_sum_residual() <= 1e-12);
        }

        #[test]
        fn reverse_row_stochastic_with_null_mass(seed in any::<u64>(), n in 2usize..=6) {
            let mut r = rng(seed);
            let p = random_sparse_stochastic::<f64, _>(&mut r, n);
            let mut v = vec![0.0; n];
            v[r.random_range(0..n)] = 1.0;
            let q = reverse_transition_matrix(&p, &Distribution::new(v, &tol()).unwrap()).unwrap();
            prop_assert!(q.row_sum_residual() <= 1e-12);
            prop_assert!(q.matrix().iter().all(|&x| x >= 0.0));
        }

        #[test]
        fn adjointness_and_integration_by_parts(seed in any::<u64>(), n in 2usize..=6, steps in 1usize..=7) {
            let mut r = rng(seed);
            let p: Vec<_> = (0..steps).map(|_| random_sparse_stochastic::<f64, _>(&mut r, n)).collect();
            let flow = ChainFlow::new(random_distribution(&mut r, n), p).unwrap();
            let rnd = |r: &mut crate::random::SeededRng| SpaceTimeFunction::from_rows(
                (0..=steps).map(|_| (0..n).map(|_| r.random::<f64>() * 2.0 - 1.0).collect()).collect());
            let f = rnd(&mut r);
            let g = rnd(&mut r);
            prop_assert!(check_space_time_adjointness(&flow, &f, &g).unwrap() <= 1e-9);
            prop_assert!(integration_by_parts_residual(&flow, &f, &g).unwrap() <= 1e-9);
        }

        #[test]
        fn doob_ratio_is_reverse_harmonic(seed in any::<u64>(), n in 2usize..=6, steps in 1usize..=6) {
            let mut r = rng(seed);
            let p: Vec<_> = (0..steps).map(|_| random_stochastic::<f64, _>(&mut r, n)).collect();
            let flow_pi = ChainFlow::new(random_distribution(&mut r, n), p.clone()).unwrap();
            let flow_p = ChainFlow::new(random_distribution(&mut r, n), p).unwrap();
            let theta = doob_ratio(&flow_p, &flow_pi).unwrap();
            prop_assert!(reverse_harmonic_residual(&theta, &flow_pi).unwrap() <= 1e-9);
        }
    }
}
