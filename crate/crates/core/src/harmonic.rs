//! Space-time harmonic operator processes, Jensen inequalities, relative
//! entropies and the quantum H-theorems.
//!
//! Orientation conventions. A *forward* process satisfies
//! `Y_t = E_t(Y_{t+1})` with `E_t` the Heisenberg side `X ↦ Σ M^† X M`. A
//! *reverse* process satisfies `Y_{t+1} = R_t(Y_t)`, where `R_t` is the
//! Heisenberg side of the reversal of `E_t` with respect to the reference
//! states of a [`ChannelFlow`]. For a reverse-harmonic process the
//! expectations `trace(σ_t Y_t)` under the reference states are constant; for a
//! reverse-subharmonic one (`Y_{t+1} ≤ R_t(Y_t)`) they are nonincreasing.

use crate::channel::{
    apply_heisenberg, apply_schrodinger, time_reversal, ChannelFlow, DensityMatrix, KrausKind, KrausMap,
};
use crate::error::{Error, Result};
use crate::linalg::{
    check_dim, inverse_sqrt_psd, min_eigenvalue, operator_norm, pseudo_inverse, spectral_decompose, spectral_norm,
    sqrt_psd, CMatrix, Hermitian, Interval, ScalarFn,
};
use crate::scalar::{Real, Tolerances};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    Forward,
    Reverse,
}

impl Orientation {
    pub fn name(self) -> &'static str {
        match self {
            Orientation::Forward => "forward",
            Orientation::Reverse => "reverse",
        }
    }
}

/// Time-indexed Hermitian matrices `Y_0..Y_T`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorProcess<T: Real> {
    values: Vec<Hermitian<T>>,
    orientation: Orientation,
}

impl<T: Real> OperatorProcess<T> {
    pub fn new(values: Vec<Hermitian<T>>, orientation: Orientation) -> Result<Self> {
        let first = values.first().ok_or_else(|| Error::InvalidInput("empty operator process".into()))?;
        let dim = first.dim();
        for y in &values {
            check_dim(dim, y.dim())?;
            if y.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(Error::InvalidInput("operator process has a non-finite entry".into()));
            }
        }
        Ok(Self { values, orientation })
    }

    /// Forward-harmonic process `Y_t = E_t(Y_{t+1})` ending at `terminal`.
    pub fn pull_back(terminal: Hermitian<T>, channels: &[KrausMap<T>]) -> Result<Self> {
        let mut values = vec![terminal];
        for e in channels.iter().rev() {
            let prev = apply_heisenberg(e, values.last().unwrap())?;
            values.push(prev);
        }
        values.reverse();
        Ok(Self { values, orientation: Orientation::Forward })
    }

    /// Reverse-harmonic process `Y_{t+1} = R_t(Y_t)` starting at `initial`.
    pub fn push(initial: Hermitian<T>, flow: &ChannelFlow<T>, tol: &Tolerances) -> Result<Self> {
        check_dim(flow.dim(), initial.dim())?;
        let mut values = vec![initial];
        for rev in flow.reversals(tol)? {
            let next = apply_heisenberg(&rev, values.last().unwrap())?;
            values.push(next);
        }
        Ok(Self { values, orientation: Orientation::Reverse })
    }

    /// `Y_t ≡ I` over `times` time points.
    pub fn identity(dim: usize, times: usize, orientation: Orientation) -> Self {
        Self { values: vec![Hermitian::identity(dim); times], orientation }
    }

    pub fn values(&self) -> &[Hermitian<T>] {
        &self.values
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn dim(&self) -> usize {
        self.values[0].dim()
    }

    pub fn times(&self) -> usize {
        self.values.len()
    }

    /// `g(Y_t)` at every time, keeping the orientation.
    pub fn map(&self, g: ScalarFn, tol: &Tolerances) -> Result<Self> {
        let values = self.values.iter().map(|y| g.apply(y, tol)).collect::<Result<_>>()?;
        Ok(Self { values, orientation: self.orientation })
    }

    fn check_against(&self, flow: &ChannelFlow<T>) -> Result<()> {
        check_dim(flow.steps() + 1, self.times())?;
        check_dim(flow.dim(), self.dim())
    }
}

/// Per-step defects of the harmonic identity: `E_t(Y_{t+1}) - Y_t` for a
/// forward process, `R_t(Y_t) - Y_{t+1}` for a reverse one.
pub fn harmonic_defects<T: Real>(
    proc: &OperatorProcess<T>,
    flow: &ChannelFlow<T>,
    tol: &Tolerances,
) -> Result<Vec<Hermitian<T>>> {
    proc.check_against(flow)?;
    let y = proc.values();
    match proc.orientation {
        Orientation::Forward => {
            flow.channels().iter().enumerate().map(|(t, e)| Ok(apply_heisenberg(e, &y[t + 1])?.sub(&y[t]))).collect()
        }
        Orientation::Reverse => flow
            .reversals(tol)?
            .iter()
            .enumerate()
            .map(|(t, r)| Ok(apply_heisenberg(r, &y[t])?.sub(&y[t + 1])))
            .collect(),
    }
}

/// Largest operator-norm defect of the harmonic identity.
pub fn harmonic_residual_q<T: Real>(proc: &OperatorProcess<T>, flow: &ChannelFlow<T>, tol: &Tolerances) -> Result<T> {
    Ok(harmonic_defects(proc, flow, tol)?.iter().fold(T::zero(), |acc, d| acc.max(operator_norm(d))))
}

/// Harmonic identity within `tol_check` at every step. Forward processes use
/// the flow's channels only; reverse processes use the reversals with respect
/// to the flow's states.
pub fn is_space_time_harmonic_q<T: Real>(
    proc: &OperatorProcess<T>,
    flow: &ChannelFlow<T>,
    tol: &Tolerances,
) -> Result<bool> {
    Ok(harmonic_residual_q(proc, flow, tol)? <= T::lit(tol.tol_check))
}

/// Smallest eigenvalue over all defects; nonnegative (within slack) exactly
/// when the process is subharmonic in its orientation.
pub fn subharmonic_margin<T: Real>(proc: &OperatorProcess<T>, flow: &ChannelFlow<T>, tol: &Tolerances) -> Result<T> {
    Ok(harmonic_defects(proc, flow, tol)?.iter().fold(T::infinity(), |acc, d| acc.min(min_eigenvalue(d))))
}

/// Two flows with the same channels and different initial states.
#[derive(Clone, Debug)]
pub struct DualChannelFlow<T: Real> {
    flow_rho: ChannelFlow<T>,
    flow_sigma: ChannelFlow<T>,
}

impl<T: Real> DualChannelFlow<T> {
    pub fn new(rho0: DensityMatrix<T>, sigma0: DensityMatrix<T>, channels: Vec<KrausMap<T>>) -> Result<Self> {
        check_dim(rho0.dim(), sigma0.dim())?;
        Ok(Self {
            flow_rho: ChannelFlow::new(rho0, channels.clone())?,
            flow_sigma: ChannelFlow::new(sigma0, channels)?,
        })
    }

    pub fn from_flows(flow_rho: ChannelFlow<T>, flow_sigma: ChannelFlow<T>) -> Result<Self> {
        if flow_rho.channels() != flow_sigma.channels() {
            return Err(Error::InvalidInput("dual flow needs identical channel sequences".into()));
        }
        Ok(Self { flow_rho, flow_sigma })
    }

    pub fn flow_rho(&self) -> &ChannelFlow<T> {
        &self.flow_rho
    }

    pub fn flow_sigma(&self) -> &ChannelFlow<T> {
        &self.flow_sigma
    }

    pub fn steps(&self) -> usize {
        self.flow_rho.steps()
    }

    pub fn dim(&self) -> usize {
        self.flow_rho.dim()
    }
}

fn full_rank<T: Real>(rho: &DensityMatrix<T>, tol: &Tolerances) -> bool {
    rho.rank(tol) == rho.dim()
}

/// `Y_t = σ_t^{-1/2} ρ_t σ_t^{-1/2}`, reverse-harmonic for the σ-flow.
pub fn ratio_process<T: Real>(dual: &DualChannelFlow<T>, tol: &Tolerances) -> Result<OperatorProcess<T>> {
    let mut values = Vec::with_capacity(dual.steps() + 1);
    for (t, (rho, sigma)) in dual.flow_rho.states().iter().zip(dual.flow_sigma.states()).enumerate() {
        if !full_rank(sigma, tol) {
            return Err(Error::SingularSigma { t });
        }
        let n = inverse_sqrt_psd(sigma.as_hermitian(), tol)?;
        values.push(rho.as_hermitian().congruence(n.matrix()));
    }
    Ok(OperatorProcess { values, orientation: Orientation::Reverse })
}

fn check_family<T: Real>(operators: &[CMatrix<T>], xs: &[Hermitian<T>], tol: &Tolerances) -> Result<usize> {
    if operators.is_empty() {
        return Err(Error::InvalidFamily("empty operator family".into()));
    }
    if operators.len() != xs.len() {
        return Err(Error::FamilyMismatch);
    }
    let dim = operators[0].nrows();
    let mut sum = CMatrix::zeros(dim, dim);
    for (m, x) in operators.iter().zip(xs) {
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        check_dim(dim, x.dim())?;
        sum += m.adjoint() * m;
    }
    let residual = spectral_norm(&(sum - CMatrix::identity(dim, dim)));
    if residual > T::lit(tol.tol_recon) {
        return Err(Error::CompletenessViolation { residual: residual.as_f64() });
    }
    Ok(dim)
}

/// `Σ M_k^† f(X_k) M_k - f(Σ M_k^† X_k M_k)`.
pub fn jensen_gap<T: Real>(
    f: ScalarFn,
    operators: &[CMatrix<T>],
    xs: &[Hermitian<T>],
    tol: &Tolerances,
) -> Result<Hermitian<T>> {
    let dim = check_family(operators, xs, tol)?;
    let mut lhs = CMatrix::zeros(dim, dim);
    let mut mixed = CMatrix::zeros(dim, dim);
    for (m, x) in operators.iter().zip(xs) {
        let fx = f.apply(x, tol)?;
        lhs += m.adjoint() * fx.matrix() * m;
        mixed += m.adjoint() * x.matrix() * m;
    }
    let rhs = f.apply(&Hermitian::symmetrize(mixed), tol)?;
    Ok(Hermitian::symmetrize(lhs).sub(&rhs))
}

/// Minimum eigenvalue of [`jensen_gap`]; nonnegative for operator convex `f`.
pub fn operator_jensen_residual<T: Real>(
    f: ScalarFn,
    operators: &[CMatrix<T>],
    xs: &[Hermitian<T>],
    tol: &Tolerances,
) -> Result<T> {
    Ok(min_eigenvalue(&jensen_gap(f, operators, xs, tol)?))
}

/// Trace of [`jensen_gap`]; nonnegative for convex `f`.
pub fn trace_jensen_residual<T: Real>(
    f: ScalarFn,
    operators: &[CMatrix<T>],
    xs: &[Hermitian<T>],
    tol: &Tolerances,
) -> Result<T> {
    Ok(jensen_gap(f, operators, xs, tol)?.trace())
}

/// `trace(ρ f(X)) - f(trace(ρ X))`.
pub fn expectation_jensen_residual<T: Real>(
    f: ScalarFn,
    rho: &DensityMatrix<T>,
    x: &Hermitian<T>,
    tol: &Tolerances,
) -> Result<T> {
    check_dim(rho.dim(), x.dim())?;
    let fx = f.apply(x, tol)?;
    let mean = rho.as_hermitian().trace_product(x);
    let domain: Interval<T> = f.domain();
    let mean = domain
        .clip(mean, T::lit(tol.tol_psd))
        .ok_or_else(|| Error::DomainViolation { eigenvalue: mean.as_f64(), domain: domain.to_string() })?;
    Ok(rho.as_hermitian().trace_product(&fx) - f.eval(mean))
}

fn supported_in<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>, tol: &Tolerances) -> bool {
    let outside = Hermitian::identity(sigma.dim()).sub(&sigma.support_projector(tol));
    outside.trace_product(rho.as_hermitian()) <= T::lit(tol.tol_check)
}

/// Umegaki relative entropy `trace(ρ (log ρ - log σ))` in nats; `+∞` when
/// `supp ρ ⊄ supp σ`.
pub fn d_umegaki<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>, tol: &Tolerances) -> T {
    assert_eq!(rho.dim(), sigma.dim(), "relative entropy of states of different dimension");
    if !supported_in(rho, sigma, tol) {
        return T::infinity();
    }
    let sd_rho = spectral_decompose(rho.as_hermitian());
    let entropy_term =
        sd_rho.eigenvalues.iter().fold(T::zero(), |acc, &l| acc + ScalarFn::XLogX.eval(l.max(T::zero())));
    let sd_sigma = spectral_decompose(sigma.as_hermitian());
    let cut = sd_sigma.cutoff(tol);
    let log_sigma = sd_sigma.compose(|l| if l > cut && l > T::zero() { l.ln() } else { T::zero() });
    entropy_term - rho.as_hermitian().trace_product(&log_sigma)
}

/// Belavkin-Staszewski relative entropy `trace(σ g(σ^{-1/2} ρ σ^{-1/2}))` with
/// `g(x) = x log x`, in nats; `+∞` when `supp ρ ⊄ supp σ`.
pub fn d_belavkin_staszewski<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>, tol: &Tolerances) -> T {
    assert_eq!(rho.dim(), sigma.dim(), "relative entropy of states of different dimension");
    if !supported_in(rho, sigma, tol) {
        return T::infinity();
    }
    let n = inverse_sqrt_psd(sigma.as_hermitian(), tol).expect("state is PSD");
    let y = rho.as_hermitian().congruence(n.matrix());
    let gy = spectral_decompose(&y).compose(|l| ScalarFn::XLogX.eval(l.max(T::zero())));
    sigma.as_hermitian().trace_product(&gy)
}

fn require_invertible<T: Real>(dual: &DualChannelFlow<T>, tol: &Tolerances) -> Result<()> {
    for (t, (rho, sigma)) in dual.flow_rho.states().iter().zip(dual.flow_sigma.states()).enumerate() {
        if !full_rank(rho, tol) || !full_rank(sigma, tol) {
            return Err(Error::SingularState { t });
        }
    }
    Ok(())
}

/// `Z_t = g(Y_t)` for the ratio process and `g(x) = x log x`.
pub fn entropy_process<T: Real>(dual: &DualChannelFlow<T>, tol: &Tolerances) -> Result<OperatorProcess<T>> {
    require_invertible(dual, tol)?;
    ratio_process(dual, tol)?.map(ScalarFn::XLogX, tol)
}

/// `[λ_min(R_t(Z_t) - Z_{t+1})]_t`, nonnegative by operator Jensen.
pub fn h_theorem_operator_check<T: Real>(dual: &DualChannelFlow<T>, tol: &Tolerances) -> Result<Vec<T>> {
    let z = entropy_process(dual, tol)?;
    Ok(harmonic_defects(&z, &dual.flow_sigma, tol)?.iter().map(min_eigenvalue).collect())
}

/// Entropy sequences along a dual flow.
#[derive(Clone, Debug, PartialEq)]
pub struct EntropySequences<T: Real> {
    pub belavkin_staszewski: Vec<T>,
    pub umegaki: Vec<T>,
}

impl<T: Real> EntropySequences<T> {
    pub fn bs_nonincreasing(&self, slack: T) -> bool {
        is_nonincreasing(&self.belavkin_staszewski, slack)
    }

    pub fn umegaki_nonincreasing(&self, slack: T) -> bool {
        is_nonincreasing(&self.umegaki, slack)
    }
}

pub fn is_nonincreasing<T: Real>(values: &[T], slack: T) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] + slack)
}

pub fn is_nondecreasing<T: Real>(values: &[T], slack: T) -> bool {
    values.windows(2).all(|w| w[1] + slack >= w[0])
}

/// `[D_BS(ρ_t‖σ_t)]_t` and `[D_U(ρ_t‖σ_t)]_t`.
pub fn h_theorem_trace_check<T: Real>(dual: &DualChannelFlow<T>, tol: &Tolerances) -> Result<EntropySequences<T>> {
    require_invertible(dual, tol)?;
    let pairs = || dual.flow_rho.states().iter().zip(dual.flow_sigma.states());
    Ok(EntropySequences {
        belavkin_staszewski: pairs().map(|(r, s)| d_belavkin_staszewski(r, s, tol)).collect(),
        umegaki: pairs().map(|(r, s)| d_umegaki(r, s, tol)).collect(),
    })
}

/// One link of `trace(σ_{t+1} Z_{t+1}) ≤ trace(σ_{t+1} R_t(Z_t)) = trace(σ_t Z_t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceChainStep<T: Real> {
    pub next: T,
    pub pulled: T,
    pub current: T,
}

/// The trace chain behind Belavkin-Staszewski monotonicity, per step.
pub fn h_theorem_trace_chain<T: Real>(dual: &DualChannelFlow<T>, tol: &Tolerances) -> Result<Vec<TraceChainStep<T>>> {
    let z = entropy_process(dual, tol)?;
    let sigma = dual.flow_sigma.states();
    let reversals = dual.flow_sigma.reversals(tol)?;
    let zs = z.values();
    (0..dual.steps())
        .map(|t| {
            let pulled = apply_heisenberg(&reversals[t], &zs[t])?;
            Ok(TraceChainStep {
                next: sigma[t + 1].as_hermitian().trace_product(&zs[t + 1]),
                pulled: sigma[t + 1].as_hermitian().trace_product(&pulled),
                current: sigma[t].as_hermitian().trace_product(&zs[t]),
            })
        })
        .collect()
}

/// `[trace(ρ_t Y_t)]_t` with `ρ_t` the flow's states. Constant for a harmonic
/// process; nondecreasing for a forward-subharmonic one and nonincreasing for
/// a reverse-subharmonic one.
pub fn constant_expectation_check<T: Real>(proc: &OperatorProcess<T>, flow: &ChannelFlow<T>) -> Result<Vec<T>> {
    proc.check_against(flow)?;
    Ok(flow.states().iter().zip(proc.values()).map(|(rho, y)| rho.as_hermitian().trace_product(y)).collect())
}

/// Change of measure by `Y_t = N_t N_t^†` with `N_t = Y_t^{1/2}`.
///
/// Forward: `F_t = {N_t^{-1} M_k^† N_{t+1}}`. Reverse: `F_t = {N_{t+1}^{-1} A_k N_t}`
/// with `A_k` the Heisenberg Kraus operators of the reversal. Both families act
/// as `X ↦ Σ F X F^†` and send `I` to `I` when `Y` is harmonic.
pub fn multiplicative_transform<T: Real>(
    proc: &OperatorProcess<T>,
    flow: &ChannelFlow<T>,
    tol: &Tolerances,
) -> Result<Vec<KrausMap<T>>> {
    proc.check_against(flow)?;
    let mut roots = Vec::with_capacity(proc.times());
    let mut inverses = Vec::with_capacity(proc.times());
    for (t, y) in proc.values().iter().enumerate() {
        let sd = spectral_decompose(y);
        if sd.min_eigenvalue() <= sd.cutoff(tol) {
            return Err(Error::SingularProcess { t });
        }
        let root = sqrt_psd(y, tol)?;
        inverses.push(pseudo_inverse(&root, tol)?);
        roots.push(root);
    }
    let families: Vec<Vec<CMatrix<T>>> = match proc.orientation {
        Orientation::Forward => flow
            .channels()
            .iter()
            .enumerate()
            .map(|(t, e)| {
                e.operators().iter().map(|m| inverses[t].matrix() * m.adjoint() * roots[t + 1].matrix()).collect()
            })
            .collect(),
        Orientation::Reverse => flow
            .reversals(tol)?
            .iter()
            .enumerate()
            .map(|(t, r)| {
                r.operators().iter().map(|k| inverses[t + 1].matrix() * k.adjoint() * roots[t].matrix()).collect()
            })
            .collect(),
    };
    families
        .into_iter()
        .map(|ops| KrausMap::new(ops, KrausKind::IdentityPreserving, &Tolerances { tol_recon: tol.tol_check, ..*tol }))
        .collect()
}

/// Reversal of `E` with respect to `σ`, applied on the Heisenberg side.
pub fn reverse_pullback<T: Real>(
    map: &KrausMap<T>,
    sigma: &DensityMatrix<T>,
    z: &Hermitian<T>,
    tol: &Tolerances,
) -> Result<Hermitian<T>> {
    apply_heisenberg(&time_reversal(map, sigma, tol)?, z)
}

/// Stationarity residual `‖E(σ) - σ‖_op` of a state under a channel.
pub fn stationarity_residual<T: Real>(map: &KrausMap<T>, sigma: &DensityMatrix<T>) -> Result<T> {
    let image = apply_schrodinger(map, sigma)?;
    Ok(operator_norm(&image.as_hermitian().sub(sigma.as_hermitian())))
}

/// Fixed point of a channel by power iteration on the averaged map, started
/// from the maximally mixed state.
pub fn stationary_state<T: Real>(map: &KrausMap<T>, tol: &Tolerances) -> Result<DensityMatrix<T>> {
    let mut sigma = DensityMatrix::maximally_mixed(map.dim());
    let half = T::lit(0.5);
    for _ in 0..100_000 {
        let image = apply_schrodinger(map, &sigma)?;
        let next = DensityMatrix::trusted(image.as_hermitian().scale(half).add(&sigma.as_hermitian().scale(half)));
        let done = operator_norm(&next.as_hermitian().sub(sigma.as_hermitian())) <= T::lit(tol.tol_norm);
        sigma = next;
        if done {
            break;
        }
    }
    let residual = stationarity_residual(map, &sigma)?;
    if residual > T::lit(tol.tol_check) {
        return Err(Error::NotStationary { residual: residual.as_f64() });
    }
    Ok(sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::embed_stochastic;
    use crate::classical::{
        doob_ratio, kl_divergence, reverse_transition_matrix, ChainFlow, Distribution, StochasticMatrix,
    };
    use crate::linalg::{operator_distance, trace_distance};
    use crate::random::{
        random_channel, random_distribution, random_hermitian, random_hermitian_in, random_kraus_family, random_state,
        random_stochastic, random_unitary, rng,
    };
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn diag(v: &[f64]) -> DensityMatrix<f64> {
        DensityMatrix::diagonal(v, &tol()).unwrap()
    }

    fn random_dual(seed: u64, d: usize, steps: usize) -> DualChannelFlow<f64> {
        let mut r = rng(seed);
        let channels = (0..steps).map(|_| random_channel(&mut r, d, 1 + (seed as usize % 3))).collect();
        DualChannelFlow::new(random_state(&mut r, d), random_state(&mut r, d), channels).unwrap()
    }

    fn embedded_dual(
        p: &[StochasticMatrix<f64>],
        pi0: &Distribution<f64>,
        p0: &Distribution<f64>,
    ) -> DualChannelFlow<f64> {
        let channels: Vec<_> = p.iter().map(embed_stochastic).collect();
        DualChannelFlow::new(
            DensityMatrix::diagonal(p0.as_slice(), &tol()).unwrap(),
            DensityMatrix::diagonal(pi0.as_slice(), &tol()).unwrap(),
            channels,
        )
        .unwrap()
    }

    #[test]
    fn harmonic_examples() {
        let mut r = rng(1);
        let channels: Vec<_> = (0..3).map(|_| random_channel::<f64, _>(&mut r, 3, 2)).collect();
        let flow = ChannelFlow::new(random_state(&mut r, 3), channels.clone()).unwrap();
        let ones = OperatorProcess::identity(3, 4, Orientation::Forward);
        assert!(is_space_time_harmonic_q(&ones, &flow, &tol()).unwrap());
        let ones_rev = OperatorProcess::identity(3, 4, Orientation::Reverse);
        assert!(is_space_time_harmonic_q(&ones_rev, &flow, &tol()).unwrap());
        let noise =
            OperatorProcess::new((0..4).map(|_| random_hermitian(&mut r, 3)).collect(), Orientation::Forward).unwrap();
        assert!(!is_space_time_harmonic_q(&noise, &flow, &tol()).unwrap());
        let pulled = OperatorProcess::pull_back(random_hermitian(&mut r, 3), &channels).unwrap();
        assert!(harmonic_residual_q(&pulled, &flow, &tol()).unwrap() <= 1e-12);
        let pushed = OperatorProcess::push(random_hermitian(&mut r, 3), &flow, &tol()).unwrap();
        assert!(harmonic_residual_q(&pushed, &flow, &tol()).unwrap() <= 1e-10);
        let short = OperatorProcess::identity(3, 2, Orientation::Forward);
        assert!(matches!(is_space_time_harmonic_q(&short, &flow, &tol()), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn ratio_examples() {
        let mut r = rng(2);
        let rho = random_state::<f64, _>(&mut r, 2);
        let channels = vec![random_channel(&mut r, 2, 2); 3];
        let dual = DualChannelFlow::new(rho.clone(), rho, channels).unwrap();
        let y = ratio_process(&dual, &tol()).unwrap();
        for v in y.values() {
            assert!(operator_distance(v, &Hermitian::identity(2)) < 1e-10);
        }
        let dual = random_dual(3, 2, 4);
        let y = ratio_process(&dual, &tol()).unwrap();
        assert!(harmonic_residual_q(&y, dual.flow_sigma(), &tol()).unwrap() <= 1e-9);
        assert!(y.values().iter().all(|v| min_eigenvalue(v) >= -1e-12));

        let p: Vec<_> = (0..3).map(|_| random_stochastic::<f64, _>(&mut r, 3)).collect();
        let pi0 = random_distribution(&mut r, 3);
        let p0 = random_distribution(&mut r, 3);
        let dual = embedded_dual(&p, &pi0, &p0);
        let y = ratio_process(&dual, &tol()).unwrap();
        let theta = doob_ratio(&ChainFlow::new(p0, p.clone()).unwrap(), &ChainFlow::new(pi0, p).unwrap()).unwrap();
        for (t, v) in y.values().iter().enumerate() {
            assert!(v.is_diagonal(1e-14));
            for i in 0..3 {
                assert!((v[(i, i)].re - theta.at(t, i)).abs() < 1e-10);
            }
        }

        let sing =
            DualChannelFlow::new(random_state(&mut r, 2), diag(&[1.0, 0.0]), vec![KrausMap::identity(2)]).unwrap();
        assert!(matches!(ratio_process(&sing, &tol()), Err(Error::SingularSigma { t: 0 })));
    }

    #[test]
    fn operator_jensen_examples() {
        let mut r = rng(4);
        let u = random_unitary::<f64, _>(&mut r, 3);
        let x = random_hermitian::<f64, _>(&mut r, 3);
        let gap = jensen_gap(ScalarFn::Square, &[u], &[x], &tol()).unwrap();
        assert!(crate::linalg::operator_norm(&gap) < 1e-12);

        let p0 =
            CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![crate::linalg::c(1.0), crate::linalg::c(0.0)]));
        let p1 =
            CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![crate::linalg::c(0.0), crate::linalg::c(1.0)]));
        let flip = Hermitian::new(
            CMatrix::from_row_slice(
                2,
                2,
                &[crate::linalg::c(0.0), crate::linalg::c(1.0), crate::linalg::c(1.0), crate::linalg::c(0.0)],
            ),
            &tol(),
        )
        .unwrap();
        let gap =
            jensen_gap(ScalarFn::Square, &[p0.clone(), p1.clone()], &[flip.clone(), flip.clone()], &tol()).unwrap();
        assert!(operator_distance(&gap, &Hermitian::identity(2)) < 1e-15);
        assert!(operator_jensen_residual(ScalarFn::Square, &[p0, p1], &[flip.clone(), flip], &tol()).unwrap() > 0.5);

        let ops = random_kraus_family::<f64, _>(&mut r, 3, 3);
        let xs: Vec<_> = (0..3).map(|_| random_hermitian_in(&mut r, 3, 0.05, 2.0)).collect();
        assert!(operator_jensen_residual(ScalarFn::XLogX, &ops, &xs, &tol()).unwrap() >= -1e-9);

        let bad = vec![CMatrix::<f64>::identity(2, 2); 2];
        let hs = vec![Hermitian::identity(2); 2];
        assert!(matches!(jensen_gap(ScalarFn::Square, &bad, &hs, &tol()), Err(Error::CompletenessViolation { .. })));
        let neg = vec![Hermitian::from_real_diagonal(&[-1.0, 1.0])];
        let id = vec![CMatrix::<f64>::identity(2, 2)];
        assert!(matches!(jensen_gap(ScalarFn::NegLog, &id, &neg, &tol()), Err(Error::DomainViolation { .. })));
    }

    #[test]
    fn trace_and_expectation_jensen_examples() {
        let mut r = rng(5);
        let u = random_unitary::<f64, _>(&mut r, 2);
        let x = random_hermitian::<f64, _>(&mut r, 2);
        assert!(trace_jensen_residual(ScalarFn::Exp, &[u], &[x], &tol()).unwrap().abs() < 1e-12);
        let ops = random_kraus_family::<f64, _>(&mut r, 3, 2);
        let xs: Vec<_> = (0..2).map(|_| random_hermitian(&mut r, 3)).collect();
        assert!(trace_jensen_residual(ScalarFn::Square, &ops, &xs, &tol()).unwrap() >= -1e-9);
        assert!(trace_jensen_residual(ScalarFn::Exp, &ops, &xs, &tol()).unwrap() >= -1e-9);

        let rho = random_state::<f64, _>(&mut r, 3);
        let cx = Hermitian::identity(3).scale(0.7);
        assert!(expectation_jensen_residual(ScalarFn::Square, &rho, &cx, &tol()).unwrap().abs() < 1e-15);
        let half = DensityMatrix::<f64>::maximally_mixed(2);
        let x = Hermitian::from_real_diagonal(&[1.0, -1.0]);
        assert!((expectation_jensen_residual(ScalarFn::Square, &half, &x, &tol()).unwrap() - 1.0).abs() < 1e-15);
        let x = random_hermitian_in::<f64, _>(&mut r, 3, 0.1, 3.0);
        for f in [ScalarFn::Square, ScalarFn::Exp, ScalarFn::XLogX, ScalarFn::NegLog, ScalarFn::Reciprocal] {
            assert!(expectation_jensen_residual(f, &rho, &x, &tol()).unwrap() >= -1e-9);
        }
    }

    #[test]
    fn entropy_examples() {
        let mut r = rng(6);
        let rho = random_state::<f64, _>(&mut r, 3);
        assert!(d_umegaki(&rho, &rho, &tol()).abs() < 1e-12);
        assert!(d_belavkin_staszewski(&rho, &rho, &tol()).abs() < 1e-12);
        let a = diag(&[0.75, 0.25]);
        let b = diag(&[0.5, 0.5]);
        let kl = kl_divergence(
            &Distribution::new(vec![0.75, 0.25], &tol()).unwrap(),
            &Distribution::new(vec![0.5, 0.5], &tol()).unwrap(),
        );
        let du = d_umegaki(&a, &b, &tol());
        let dbs = d_belavkin_staszewski(&a, &b, &tol());
        assert!((du - 0.130812).abs() < 1e-6 && (dbs - 0.130812).abs() < 1e-6);
        assert!((du - kl).abs() < 1e-14 && (dbs - kl).abs() < 1e-14);
        assert_eq!(d_umegaki(&diag(&[0.5, 0.5]), &diag(&[1.0, 0.0]), &tol()), f64::INFINITY);
        assert_eq!(d_belavkin_staszewski(&diag(&[0.5, 0.5]), &diag(&[1.0, 0.0]), &tol()), f64::INFINITY);
        // contained support is finite
        assert!((d_umegaki(&diag(&[1.0, 0.0]), &diag(&[0.5, 0.5]), &tol()) - 2f64.ln()).abs() < 1e-14);
        assert!((d_belavkin_staszewski(&diag(&[1.0, 0.0]), &diag(&[0.5, 0.5]), &tol()) - 2f64.ln()).abs() < 1e-14);

        let mut strict = 0;
        for _ in 0..20 {
            let a = random_state::<f64, _>(&mut r, 2);
            let b = random_state::<f64, _>(&mut r, 2);
            let (du, dbs) = (d_umegaki(&a, &b, &tol()), d_belavkin_staszewski(&a, &b, &tol()));
            assert!(dbs >= du - 1e-9 && du >= -1e-12);
            if dbs > du + 1e-6 {
                strict += 1;
            }
        }
        assert!(strict > 10);
    }

    #[test]
    fn h_theorem_examples() {
        let mut r = rng(7);
        let rho = random_state::<f64, _>(&mut r, 2);
        let dual = DualChannelFlow::new(rho.clone(), rho, vec![random_channel(&mut r, 2, 2); 3]).unwrap();
        assert!(h_theorem_operator_check(&dual, &tol()).unwrap().iter().all(|v| v.abs() < 1e-10));
        let seq = h_theorem_trace_check(&dual, &tol()).unwrap();
        assert!(seq.belavkin_staszewski.iter().chain(&seq.umegaki).all(|v| v.abs() < 1e-10));

        let dual = random_dual(8, 2, 5);
        assert!(h_theorem_operator_check(&dual, &tol()).unwrap().iter().all(|&v| v >= -1e-9));
        let seq = h_theorem_trace_check(&dual, &tol()).unwrap();
        assert!(seq.bs_nonincreasing(1e-9) && seq.umegaki_nonincreasing(1e-9));
        for step in h_theorem_trace_chain(&dual, &tol()).unwrap() {
            assert!(step.next <= step.pulled + 1e-9);
            assert!((step.pulled - step.current).abs() < 1e-9);
        }

        let e = random_channel::<f64, _>(&mut r, 3, 2);
        let sigma = stationary_state(&e, &tol()).unwrap();
        let dual = DualChannelFlow::new(random_state(&mut r, 3), sigma, vec![e; 6]).unwrap();
        let seq = h_theorem_trace_check(&dual, &tol()).unwrap();
        assert!(seq.bs_nonincreasing(1e-9));
        assert!(seq.belavkin_staszewski[0] > seq.belavkin_staszewski[6]);

        let sing = DualChannelFlow::new(diag(&[1.0, 0.0]), diag(&[0.5, 0.5]), vec![KrausMap::identity(2)]).unwrap();
        assert!(matches!(h_theorem_operator_check(&sing, &tol()), Err(Error::SingularState { t: 0 })));
        assert!(matches!(h_theorem_trace_check(&sing, &tol()), Err(Error::SingularState { t: 0 })));
    }

    #[test]
    fn commuting_case_matches_classical() {
        let mut r = rng(9);
        let p = StochasticMatrix::new(DMatrix::from_row_slice(2, 2, &[0.9, 0.1, 0.2, 0.8]), &tol()).unwrap();
        let pibar = Distribution::new(vec![2.0 / 3.0, 1.0 / 3.0], &tol()).unwrap();
        let p0 = Distribution::new(vec![0.95, 0.05], &tol()).unwrap();
        let dual = embedded_dual(&vec![p.clone(); 6], &pibar, &p0);
        let seq = h_theorem_trace_check(&dual, &tol()).unwrap();
        let classical = crate::classical::classical_h_theorem_report(&p, &p0, &pibar, 6, &tol()).unwrap();
        for t in 0..=6 {
            assert!((seq.belavkin_staszewski[t] - classical[t]).abs() < 1e-10);
            assert!((seq.umegaki[t] - classical[t]).abs() < 1e-10);
        }

        // operator residual diagonal equals Q g(θ_t) - g(θ_{t+1})
        let ps: Vec<_> = (0..3).map(|_| random_stochastic::<f64, _>(&mut r, 3)).collect();
        let pi0 = random_distribution(&mut r, 3);
        let q0 = random_distribution(&mut r, 3);
        let dual = embedded_dual(&ps, &pi0, &q0);
        let z = entropy_process(&dual, &tol()).unwrap();
        let defects = harmonic_defects(&z, dual.flow_sigma(), &tol()).unwrap();
        let flow_pi = ChainFlow::new(pi0, ps.clone()).unwrap();
        let theta = doob_ratio(&ChainFlow::new(q0, ps).unwrap(), &flow_pi).unwrap();
        for (t, d) in defects.iter().enumerate() {
            let q = reverse_transition_matrix(&flow_pi.transitions()[t], &flow_pi.distributions()[t]).unwrap();
            let g = |v: f64| ScalarFn::XLogX.eval(v);
            for j in 0..3 {
                let pulled: f64 = (0..3).map(|i| q.get(j, i) * g(theta.at(t, i))).sum();
                assert!((d[(j, j)].re - (pulled - g(theta.at(t + 1, j)))).abs() < 1e-10);
                assert!(d[(j, j)].re >= -1e-12);
            }
        }
    }

    #[test]
    fn constant_expectation_examples() {
        let mut r = rng(10);
        let channels: Vec<_> = (0..4).map(|_| random_channel::<f64, _>(&mut r, 3, 2)).collect();
        let flow = ChannelFlow::new(random_state(&mut r, 3), channels.clone()).unwrap();
        let ones = OperatorProcess::identity(3, 5, Orientation::Forward);
        assert!(constant_expectation_check(&ones, &flow).unwrap().iter().all(|v| (v - 1.0).abs() < 1e-12));
        let pulled = OperatorProcess::pull_back(random_hermitian(&mut r, 3), &channels).unwrap();
        let ex = constant_expectation_check(&pulled, &flow).unwrap();
        assert!(ex.iter().all(|v| (v - ex[0]).abs() < 1e-12));

        let dual = random_dual(11, 3, 5);
        let z = entropy_process(&dual, &tol()).unwrap();
        let ex = constant_expectation_check(&z, dual.flow_sigma()).unwrap();
        assert!(is_nonincreasing(&ex, 1e-9));
        let y = ratio_process(&dual, &tol()).unwrap();
        let ex = constant_expectation_check(&y, dual.flow_sigma()).unwrap();
        assert!(ex.iter().all(|v| (v - 1.0).abs() < 1e-10));

        // forward-subharmonic: g(pulled-back process) under the forward flow
        let positive = OperatorProcess::pull_back(random_hermitian_in(&mut r, 3, 0.2, 2.0), &channels).unwrap();
        let g = positive.map(ScalarFn::Square, &tol()).unwrap();
        assert!(subharmonic_margin(&g, &flow, &tol()).unwrap() >= -1e-9);
        assert!(is_nondecreasing(&constant_expectation_check(&g, &flow).unwrap(), 1e-9));
    }

    #[test]
    fn multiplicative_transform_examples() {
        let mut r = rng(12);
        let channels: Vec<_> = (0..3).map(|_| random_channel::<f64, _>(&mut r, 2, 2)).collect();
        let flow = ChannelFlow::new(random_state(&mut r, 2), channels.clone()).unwrap();
        let ones = OperatorProcess::identity(2, 4, Orientation::Forward);
        let f = multiplicative_transform(&ones, &flow, &tol()).unwrap();
        for (ft, e) in f.iter().zip(&channels) {
            for (a, m) in ft.operators().iter().zip(e.operators()) {
                assert!(spectral_norm(&(a - m.adjoint())) < 1e-12);
            }
        }
        let dual = random_dual(13, 3, 4);
        let y = ratio_process(&dual, &tol()).unwrap();
        for ft in multiplicative_transform(&y, dual.flow_sigma(), &tol()).unwrap() {
            let res = crate::channel::validate(&ft, &tol()).unwrap().dual_completeness_residual;
            assert!(res <= 1e-9);
        }
        let pulled = OperatorProcess::pull_back(random_hermitian_in(&mut r, 2, 0.5, 2.0), &channels).unwrap();
        for ft in multiplicative_transform(&pulled, &flow, &tol()).unwrap() {
            assert!(crate::channel::validate(&ft, &tol()).unwrap().dual_completeness_residual <= 1e-9);
            assert_eq!(ft.kind(), KrausKind::IdentityPreserving);
        }
        let singular =
            OperatorProcess::new(vec![Hermitian::from_real_diagonal(&[1.0, 0.0]); 4], Orientation::Forward).unwrap();
        assert!(matches!(multiplicative_transform(&singular, &flow, &tol()), Err(Error::SingularProcess { t: 0 })));
    }

    #[test]
    fn stationary_state_is_fixed() {
        let mut r = rng(14);
        for d in 2..=4 {
            let e = random_channel::<f64, _>(&mut r, d, 2);
            let s = stationary_state(&e, &tol()).unwrap();
            assert!(stationarity_residual(&e, &s).unwrap() <= 1e-9);
            let back = reverse_pullback(&e, &s, &Hermitian::identity(d), &tol()).unwrap();
            assert!(operator_distance(&back, &Hermitian::identity(d)) < 1e-9);
        }
        let s = stationary_state(&KrausMap::identity(3), &tol()).unwrap();
        assert!(trace_distance(s.as_hermitian(), DensityMatrix::<f64>::maximally_mixed(3).as_hermitian()) < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ratio_process_is_reverse_harmonic(seed in any::<u64>(), d in 2usize..=4, steps in 1usize..=6) {
            let dual = random_dual(seed, d, steps);
            let y = ratio_process(&dual, &tol()).unwrap();
            let scale = y.values().iter().map(operator_norm).fold(1.0, f64::max);
            prop_assert!(harmonic_residual_q(&y, dual.flow_sigma(), &tol()).unwrap() <= 1e-9 * scale);
        }

        #[test]
        fn operator_jensen_for_operator_convex(seed in any::<u64>(), d in 2usize..=4, k in 1usize..=4) {
            let mut r = rng(seed);
            let ops = random_kraus_family::<f64, _>(&mut r, d, k);
            for f in [ScalarFn::Square, ScalarFn::XLogX, ScalarFn::NegLog, ScalarFn::Reciprocal] {
                let xs: Vec<_> = (0..k).map(|_| random_hermitian_in(&mut r, d, 0.1, 3.0)).collect();
                prop_assert!(operator_jensen_residual(f, &ops, &xs, &tol()).unwrap() >= -1e-9);
            }
        }

        #[test]
        fn entropy_ordering(seed in any::<u64>(), d in 2usize..=4) {
            let mut r = rng(seed);
            let a = random_state::<f64, _>(&mut r, d);
            let b = random_state::<f64, _>(&mut r, d);
            let du = d_umegaki(&a, &b, &tol());
            let dbs = d_belavkin_staszewski(&a, &b, &tol());
            prop_assert!(du >= -1e-12);
            prop_assert!(dbs >= du - 1e-9);
        }

        #[test]
        fn monotone_along_dual_flows(seed in any::<u64>(), d in 2usize..=3, steps in 1usize..=5) {
            let dual = random_dual(seed, d, steps);
            let seq = h_theorem_trace_check(&dual, &tol()).unwrap();
            prop_assert!(seq.bs_nonincreasing(1e-9));
            prop_assert!(seq.umegaki_nonincreasing(1e-9));
            let z = entropy_process(&dual, &tol()).unwrap();
            let scale = z.values().iter().map(operator_norm).fold(1.0, f64::max);
            prop_assert!(h_theorem_operator_check(&dual, &tol()).unwrap().iter().all(|&v| v >= -1e-9 * scale));
        }
    }
}
