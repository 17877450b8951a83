//! Seeded randomized batteries that exercise the identities and inequalities
//! of every module over many random instances.
//!
//! Each battery reports a residual per trial, oriented so that a trial passes
//! when its residual is at most the battery's tolerance. Trials run in a fixed
//! order from a seed, so results are reproducible bit for bit.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::channel::{
    apply_schrodinger, augment_to_tpcp, check_space_time_adjointness_q, double_reversal, embed_stochastic,
    spanning_states, time_reversal, transition_table, two_time_probabilities, DensityMatrix, KrausMap,
};
use crate::classical::{
    check_space_time_adjointness, classical_h_theorem_report, doob_ratio, evolve_forward,
    integration_by_parts_residual, joint_two_time, kl_divergence, reverse_transition_matrix, ChainFlow, Distribution,
    SpaceTimeFunction, StochasticMatrix,
};
use crate::harmonic::{
    d_belavkin_staszewski, d_umegaki, entropy_process, expectation_jensen_residual, h_theorem_operator_check,
    h_theorem_trace_check, harmonic_residual_q, operator_jensen_residual, ratio_process, trace_jensen_residual,
    DualChannelFlow,
};
use crate::linalg::{c, operator_norm, spectral_norm, trace_distance, CMatrix, Hermitian, ScalarFn};
use crate::pathspace::{
    admixture_perturbations, path_weights, verify_max_entropy_theorem, PathSpaceSpec, ProjectorFamily,
};
use crate::random::{
    random_channel, random_distribution, random_hermitian, random_hermitian_in, random_kraus_family,
    random_sparse_stochastic, random_state, random_state_with_rank, random_stochastic, random_unitary, rng, SeededRng,
};
use crate::scalar::Tolerances;

/// Aggregate outcome of one battery.
#[derive(Clone, Debug, PartialEq)]
pub struct BatteryResult {
    pub name: &'static str,
    pub trials: usize,
    pub failures: usize,
    /// Largest residual seen (0 when every residual is nonpositive).
    pub worst: f64,
    pub tolerance: f64,
    /// First error raised by a trial, if any. A trial that errors counts as a failure.
    pub first_error: Option<String>,
}

impl BatteryResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

struct Tally {
    name: &'static str,
    tolerance: f64,
    trials: usize,
    failures: usize,
    worst: f64,
    first_error: Option<String>,
}

impl Tally {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self { name, tolerance, trials: 0, failures: 0, worst: 0.0, first_error: None }
    }

    fn record(&mut self, outcome: crate::error::Result<f64>) {
        self.trials += 1;
        match outcome {
            Ok(r) => {
                if r.is_nan() || r > self.tolerance {
                    self.failures += 1;
                }
                if r.is_nan() || r > self.worst {
                    self.worst = r;
                }
            }
            Err(e) => {
                self.failures += 1;
                self.first_error.get_or_insert_with(|| e.to_string());
            }
        }
    }

    fn finish(self) -> BatteryResult {
        BatteryResult {
            name: self.name,
            trials: self.trials,
            failures: self.failures,
            worst: self.worst,
            tolerance: self.tolerance,
            first_error: self.first_error,
        }
    }
}

fn seeded(seed: u64, stream: u64) -> SeededRng {
    rng(seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

/// `‖R(E(ρ)) - ρ‖_tr` and `‖Σ K^†K - Π_{E(ρ)}‖` over random channels and states,
/// half of them rank-deficient. Dimensions 2..=6, Kraus ranks 1..=4.
pub fn reversal_recovery(seed: u64, trials: usize, tol: &Tolerances) -> BatteryResult {
    let mut r = seeded(seed, 1);
    let mut tally = Tally::new("reversal_recovery", tol.tol_check);
    for k in 0..trials {
        let d = r.random_range(2..=6);
        let kraus = r.random_range(1..=4);
        let e = random_channel::<f64, _>(&mut r, d, kraus);
        let rho = if k % 2 == 1 {
            {
                let rk = r.random_range(1..d);
                random_state_with_rank(&mut r, d, rk)
            }
        } else {
            random_state(&mut r, d)
        };
        tally.record((|| {
            let next = apply_schrodinger(&e, &rho)?;
            let rev = time_reversal(&e, &rho, tol)?;
            let back = rev.apply(next.as_hermitian())?;
            let completeness = spectral_norm(rev.completeness_sum().sub(&next.support_projector(tol)).matrix());
            let aug = augment_to_tpcp(&rev, &next, tol)?;
            let back_aug = aug.apply(next.as_hermitian())?;
            Ok(max_of([
                trace_distance(&back, rho.as_hermitian()),
                trace_distance(&back_aug, rho.as_hermitian()),
                completeness,
            ]))
        })());
    }
    tally.finish()
}

/// `T_{ρ_{t+1}}(T_{ρ_t}(E))` against `E` on `d^2` spanning states, full-rank `ρ_t`.
pub fn double_reversal_identity(seed: u64, trials: usize, tol: &Tolerances) -> BatteryResult {
    let mut r = seeded(seed, 2);
    let mut tally = Tally::new("double_reversal", tol.tol_check);
    for _ in 0..trials {
        let d = r.random_range(2..=5);
        let e = {
            let k = r.random_range(1..=4);
            random_channel::<f64, _>(&mut r, d, k)
        };
        let rho = random_state(&mut r, d);
        tally.record((|| {
            let dd = double_reversal(&e, &rho, tol)?;
            let mut worst = 0.0f64;
            for s in spanning_states::<f64>(d) {
                worst = worst.max(trace_distance(&dd.apply(s.as_hermitian())?, &e.apply(s.as_hermitian())?));
            }
            Ok(worst)
        })());
    }
    tally.finish()
}

fn random_function(r: &mut SeededRng, times: usize, n: usize) -> SpaceTimeFunction<f64> {
    SpaceTimeFunction::from_rows((0..times).map(|_| (0..n).map(|_| r.random_range(-1.0..1.0)).collect()).collect())
}

/// Classical space-time adjointness and integration by parts on random flows
/// with sparse transition matrices, `n` in 2..=6 and windows of up to 8 times.
pub fn classical_adjointness(seed: u64, trials: usize, tol: &Tolerances) -> BatteryResult {
    let mut r = seeded(seed, 3);
    let mut tally = Tally::new("classical_adjointness", tol.tol_check);
    for _ in 0..trials {
        let n = r.random_range(2..=6);
        let steps = r.random_range(1..=7);
        let p: Vec<_> = (0..steps).map(|_| random_sparse_stochastic::<f64, _>(&mut r, n)).collect();
        let pi0 = random_distribution(&mut r, n);
        let f = random_function(&mut r, steps + 1, n);
        let g = random_function(&mut r, steps + 1, n);
        tally.record((|| {
            let flow = ChainFlow::new(pi0, p)?;
            Ok(check_space_time_adjointness(&flow, &f, &g)?.max(integration_by_parts_residual(&flow, &f, &g)?))
        })());
    }
    tally.finish()
}

/// `|⟨E(X), Y⟩_{ρ_t} - ⟨X, R(Y)⟩_{ρ_{t+1}}|` on random triples; every third
/// state is rank-deficient.
pub fn quantum_adjointness(seed: u64, trials: usize, tol: &Tolerances) -> BatteryResult {
    let mut r = seeded(seed, 4);
    let mut tally = Tally::new("quantum_adjointness", tol.tol_check);
    for k in 0..trials {
        let d = r.random_range(2..=6);
        let e = {
            let k = r.random_range(1..=4);
            random_channel::<f64, _>(&mut r, d, k)
        };
        let rho = if k % 3 == 2 {
            {
                let rk = r.random_range(1..d);
                random_state_with_rank(&mut r, d, rk)
            }
        } else {
            random_state(&mut r, d)
        };
        let x = random_hermitian(&mut r, d);
        let y = random_hermitian(&mut r, d);
        tally.record(check_space_time_adjointness_q(&e, &rho, &x, &y, tol));
    }
    tally.finish()
}

/// `p_ij π_t(i) = q_ji π_{t+1}(j)` entrywise and row sums of `Q`; half of the
/// trials have distributions with zero entries and sparse `P`.
pub fn bayes_consistency(seed: u64, trials: usize, tol: &Tolerances) -> BatteryResult {
    let mut r = seeded(seed, 5);
    let mut tally = Tally::new("bayes_consistency", tol.tol_recon);
    for k in 0..trials {
        let n = r.random_range(2..=6);
        let (p, pi) = if k % 2 == 0 {
            (random_stochastic::<f64, _>(&mut r, n), random_distribution(&mut r, n))
        } else {
            let mut w: Vec<f64> = (0..n).map(|_| if r.random_bool(0.5) { 0.0 } else { r.random::<f64>() }).collect();
            if w.iter().all(|&x| x == 0.0) {
                w[0] = 1.0;
            }
            let s: f64 = w.iter().sum();
            (random_sparse_stochastic(&mut r, n), Distribution::new(w.iter().map(|x| x / s).collect(), tol).unwrap())
        };
        tally.record((|| {
            let q = reverse_transition_matrix(&p, &pi)?;
            let next = evolve_forward(&p, &pi)?;
            let joint = joint_two_time(&p, &pi)?;
            let mut worst = q.row_sum_residual();
            for i in 0..n {
                for j in 0..n {
                    worst = worst.max((joint[(i, j)] - q.get(j, i) * next.get(j)).abs());
                    if q.get(j, i) < 0.0 {
                        worst = worst.max(-q.get(j, i));
                    }
                }
            }
            Ok(worst)
        })());
    }
    tally.finish()
}

fn random_dual(r: &mut SeededRng, d: usize, steps: usize) -> crate::error::Result<DualChannelFlow<f64>> {
    let channels = (0..steps)
        .map(|_| {
            let k = r.random_range(1..=3);
            random_channel(r, d, k)
        })
        .collect();
    DualChannelFlow::new(random_state(r, d), random_state(r, d), channels)
}

/// Reverse harmonicity of `σ_t^{-1/2} ρ_t σ_t^{-1/2}`, dims 2..=4, up to 6 steps.
pub fn ratio_harmonicity(seed: u64, trials: usize, tol: &Tolerances) -> BatteryResult {
    let mut r = seeded(seed, 6);
    let mut tally = Tally::new("ratio_harmonicity", tol.tol_check);
    for _ in 0..trials {
        let d = r.random_range(2..=4);
        let steps = r.random_range(1..=6);
        let dual = random_dual(&mut r, d, steps);
        tally.record((|| {
            let dual = dual?;
            harmonic_residual_q(&ratio_process(&dual, tol)?, dual.flow_sigma(), tol)
        })());
    }
    tally.finish()
}

/// Operator convex functions with their test spectra.
pub const OPERATOR_CONVEX: [ScalarFn; 4] = [ScalarFn::Square, ScalarFn::XLogX, ScalarFn::NegLog, ScalarFn::Reciprocal];

fn jensen_inputs(r: &mut SeededRng, f: ScalarFn, d: usize, k: usize) -> Vec<Hermitian<f64>> {
    (0..k)
        .map(|_| if f == ScalarFn::Square { random_hermitian(r, d) } else { random_hermitian_in(r, d, 0.05, 3.0) })
        .collect()
}

/// Operator, trace and expectation Jensen gaps for one function over random
/// complete Kraus families, dims 2..=4 and 1..=4 operators. The residual is
/// the negated smallest gap.
pub fn jensen(f: ScalarFn, seed: u64, trials: usize, tol: &Tolerances) -> BatteryResult {
    let name = match f {
        ScalarFn::Square => "operator_jensen_square",
        ScalarFn::XLogX => "operator_jensen_xlogx",
        ScalarFn::NegLog => "operator_jensen_neglog",
        ScalarFn::Reciprocal => "operator_jensen_reciprocal",
        ScalarFn::Exp => "trace_jensen_exp",
        _ => "jensen",
    };
    let mut r = seeded(seed, 7 + f as u64);
    let mut tally = Tally::new(name, tol.tol_check);
    for _ in 0..trials {
        let d = r.random_range(2..=4);
        let k = r.random_range(1..=4);
        let ops = random_kraus_family::<f64, _>(&mut r, d, k);
        let xs = jensen_inputs(&mut r, f, d, k);
        let rho = random_state(&mut r, d);
        tally.record((|| {
            let tr = trace_jensen_residual(f, &ops, &xs, tol)?;
            let ex = expectation_jensen_residual(f, &rho, &xs[0], tol)?;
            let op = if f.is_operator_convex() { operator_jensen_residual(f, &ops, &xs, tol)? } else { tr };
            Ok(-op.min(tr).min(ex))
        })());
    }
    tally.finish()
}

/// `D_BS ≥ D_U ≥ 0` at every time of random dual flows and both sequences
/// nonincreasing.
pub fn entropy_monotonicity(seed: u64, trials: usize, tol: &Tolerances) -> BatteryResult {
    let mut r = seeded(seed, 20);
    let mut tally = Tally::new("entropy_monotonicity", tol.tol_check);
    for _ in 0..trials {
        let d = r.random_range(2..=4);
        let steps = r.random_range(1..=5);
        let dual = random_dual(&mut r, d, steps);
        tally.record((|| {
            let dual = dual?;
            let seq = h_theorem_trace_check(&dual, tol)?;
            let mut worst = 0.0f64;
            for (bs, u) in seq.belavkin_staszewski.iter().zip(&seq.umegaki) {
                worst = worst.max(u - bs).max(-u);
            }
            for w in seq.belavkin_staszewski.windows(2).chain(seq.umegaki.windows(2)) {
                worst = worst.max(w[1] - w[0]);
            }
            Ok(worst)
        })());
    }
    tally.finish()
}

/// `λ_min(R_t(Z_t) - Z_{t+1})` for `Z = Y log Y` on random dual flows, as a
/// residual relative to `max(1, ‖Z_{t+1}‖)`.
pub fn operator_h_theorem(seed: u64, trials: usize, tol: &Tolerances) -> BatteryResult {
    let mut r = seeded(seed, 25);
    let mut tally = Tally::new("operator_h_theorem", tol.tol_check);
    for _ in 0..trials {
        let d = r.random_range(2..=4);
        let steps = r.random_range(1..=5);
        let dual = random_dual(&mut r, d, steps);
        tally.record((|| {
            let dual = dual?;
            let z = entropy_process(&dual, tol)?;
            let margins = h_theorem_operator_check(&dual, tol)?;
            Ok(max_of(margins.iter().zip(&z.values()[1..]).map(|(m, zn)| -m / operator_norm(zn).max(1.0))))
        })());
    }
    tally.finish()
}

/// `|D(0.75, 0.25 ‖ 0.5, 0.5) - 0.130812|` for both quantum entropies on the
/// diagonal pair.
pub fn entropy_hand_value(tol: &Tolerances) -> BatteryResult {
    let mut tally = Tally::new("entropy_hand_value", 1e-6);
    tally.record((|| {
        let a = DensityMatrix::diagonal(&[0.75, 0.25], tol)?;
        let b = DensityMatrix::diagonal(&[0.5, 0.5], tol)?;
        let (du, dbs): (f64, f64) = (d_umegaki(&a, &b, tol), d_belavkin_staszewski(&a, &b, tol));
        Ok(max_of([(du - 0.130812).abs(), (dbs - 0.130812).abs()]))
    })());
    tally.finish()
}

/// The two-state chain `[[0.9, 0.1], [0.2, 0.8]]` from `(1, 0)` towards
/// `(2/3, 1/3)` over 10 steps: first value `ln 1.5` and strict decrease. The
/// residual is the larger of the first-value error and the largest
/// non-decrease (shifted so that any `D(t+1) ≥ D(t)` exceeds the tolerance).
pub fn classical_h_theorem(tol: &Tolerances) -> BatteryResult {
    let mut tally = Tally::new("classical_h_theorem", 1e-6);
    tally.record((|| {
        let p = StochasticMatrix::new(DMatrix::from_row_slice(2, 2, &[0.9, 0.1, 0.2, 0.8]), tol)?;
        let pibar = Distribution::new(vec![2.0 / 3.0, 1.0 / 3.0], tol)?;
        let pi0 = Distribution::new(vec![1.0, 0.0], tol)?;
        let seq = classical_h_theorem_report(&p, &pi0, &pibar, 10, tol)?;
        let first = (seq[0] - 1.5f64.ln()).abs();
        let strict = seq.windows(2).all(|w| w[1] < w[0]);
        Ok(if strict { first } else { f64::INFINITY })
    })());
    tally.finish()
}

/// Total path mass over random specs with dim ≤ 3 and T ≤ 3, each family
/// from a random basis.
pub fn path_normalization(seed: u64, trials: usize, tol: &Tolerances) -> BatteryResult {
    let mut r = seeded(seed, 21);
    let mut tally = Tally::new("path_normalization", tol.tol_check);
    for _ in 0..trials {
        let d = r.random_range(2..=3);
        let steps = r.random_range(0..=3);
        let bases: Vec<_> = (0..=steps).map(|_| random_unitary::<f64, _>(&mut r, d)).collect();
        let channels = (0..steps)
            .map(|_| {
                let k = r.random_range(1..=3);
                random_channel(&mut r, d, k)
            })
            .collect();
        let initial = random_state(&mut r, d);
        tally.record((|| {
            let families =
                bases.iter().map(|u| ProjectorFamily::from_basis(u, tol)).collect::<crate::error::Result<_>>()?;
            let w = path_weights(&PathSpaceSpec::new(families, channels, initial)?)?;
            Ok((w.total() - 1.0).abs())
        })());
    }
    tally.finish()
}

/// Diagonal path specs against `π_0(i_0) Π_t p_{i_t i_{t+1}}`.
pub fn path_classical_reduction(seed: u64, trials: usize, tol: &Tolerances) -> BatteryResult {
    let mut r = seeded(seed, 22);
    let mut tally = Tally::new("path_classical_reduction", tol.tol_recon);
    for _ in 0..trials {
        let n = r.random_range(2..=3);
        let steps = r.random_range(1..=3);
        let p: Vec<_> = (0..steps).map(|_| random_sparse_stochastic::<f64, _>(&mut r, n)).collect();
        let pi0 = random_distribution::<f64, _>(&mut r, n);
        tally.record((|| {
            let spec = PathSpaceSpec::new(
                vec![ProjectorFamily::computational(n); steps + 1],
                p.iter().map(embed_stochastic).collect(),
                DensityMatrix::diagonal(pi0.as_slice(), tol)?,
            )?;
            let w = path_weights(&spec)?;
            Ok(max_of(w.iter().map(|(path, wt)| {
                let expected = (0..steps).fold(pi0.get(path[0]), |acc, t| acc * p[t].get(path[t], path[t + 1]));
                (wt - expected).abs()
            })))
        })());
    }
    tally.finish()
}

/// The ε-grid used for admixture perturbations.
pub const EPSILON_GRID: [f64; 3] = [0.05, 0.1, 0.2];

fn hadamard() -> CMatrix<f64> {
    let h = c(std::f64::consts::FRAC_1_SQRT_2);
    CMatrix::from_row_slice(2, 2, &[h, h, h, -h])
}

/// Qubit references with two steps: even trials use amplitude damping with a
/// random decay, odd trials a random channel. For the computational and the
/// Hadamard-rotated path space, `D* ≤ D_p` on the ε-grid and `D* ≤ D_U + tol`;
/// the two verdicts must agree. The residual is the largest violation.
pub fn max_entropy(seed: u64, trials: usize, tol: &Tolerances) -> BatteryResult {
    let mut r = seeded(seed, 23);
    let mut tally = Tally::new("max_entropy", tol.tol_check);
    for k in 0..trials {
        let e = if k % 2 == 0 {
            KrausMap::amplitude_damping(r.random_range(0.1..0.9))
        } else {
            random_channel(&mut r, 2, 2)
        };
        let channels = vec![e; 2];
        let sigma0 = random_state::<f64, _>(&mut r, 2);
        let rho0 = random_state::<f64, _>(&mut r, 2);
        tally.record((|| {
            let perturb = admixture_perturbations(&channels, &EPSILON_GRID)?;
            let mut worst = 0.0f64;
            let mut verdicts = Vec::new();
            for family in [ProjectorFamily::computational(2), ProjectorFamily::from_basis(&hadamard(), tol)?] {
                let spec = PathSpaceSpec::new(vec![family; 3], channels.clone(), sigma0.clone())?;
                let rep = verify_max_entropy_theorem(&spec, &rho0, &perturb, tol)?;
                for d in &rep.d_perturbed {
                    worst = worst.max(rep.d_star - d);
                }
                worst = worst.max(rep.d_star - rep.umegaki_bound);
                verdicts.push(rep.passed());
            }
            Ok(if verdicts[0] == verdicts[1] { worst } else { f64::INFINITY })
        })());
    }
    tally.finish()
}

/// All-diagonal data through the quantum operations against the classical
/// module: reversal vs `Q`, two-time probabilities vs `p_ij π_i`, both
/// entropies vs KL, ratio process vs Doob ratio, path weights vs products.
pub fn commuting_embedding(seed: u64, trials: usize, tol: &Tolerances) -> BatteryResult {
    let mut r = seeded(seed, 24);
    let mut tally = Tally::new("commuting_embedding", tol.tol_recon);
    for _ in 0..trials {
        let n = r.random_range(2..=4);
        let steps = r.random_range(1..=3);
        let p: Vec<_> = (0..steps).map(|_| random_stochastic::<f64, _>(&mut r, n)).collect();
        let pi0 = random_distribution::<f64, _>(&mut r, n);
        let p0 = random_distribution::<f64, _>(&mut r, n);
        tally.record(commuting_trial(&p, &pi0, &p0, tol));
    }
    tally.finish()
}

fn basis_index(proj: &Hermitian<f64>) -> usize {
    (0..proj.dim()).max_by(|&a, &b| proj[(a, a)].re.total_cmp(&proj[(b, b)].re)).unwrap_or(0)
}

fn commuting_trial(
    p: &[StochasticMatrix<f64>],
    pi0: &Distribution<f64>,
    p0: &Distribution<f64>,
    tol: &Tolerances,
) -> crate::error::Result<f64> {
    let n = pi0.n();
    let steps = p.len();
    let chain_pi = ChainFlow::new(pi0.clone(), p.to_vec())?;
    let chain_p = ChainFlow::new(p0.clone(), p.to_vec())?;
    let channels: Vec<_> = p.iter().map(embed_stochastic).collect();
    let diag = |d: &Distribution<f64>| DensityMatrix::diagonal(d.as_slice(), tol);
    let dual = DualChannelFlow::new(diag(p0)?, diag(pi0)?, channels.clone())?;
    let mut worst = 0.0f64;

    for t in 0..steps {
        let pi_t = &chain_pi.distributions()[t];
        let rho_t = &dual.flow_sigma().states()[t];
        let q = reverse_transition_matrix(&p[t], pi_t)?;
        let rev = time_reversal(&channels[t], rho_t, tol)?;
        worst = worst.max((transition_table(&rev) - q.matrix()).amax());

        let tt = two_time_probabilities(&channels[t], rho_t, tol)?;
        if tt.projectors_t.len() == n && tt.projectors_next.len() == n {
            for (a, pa) in tt.projectors_t.iter().enumerate() {
                for (b, pb) in tt.projectors_next.iter().enumerate() {
                    let (i, j) = (basis_index(pa), basis_index(pb));
                    worst = worst.max((tt.forward[(a, b)] - pi_t.get(i) * p[t].get(i, j)).abs());
                }
            }
        }
    }

    let seq = h_theorem_trace_check(&dual, tol)?;
    for t in 0..=steps {
        let kl = kl_divergence(&chain_p.distributions()[t], &chain_pi.distributions()[t]);
        worst = worst.max((seq.belavkin_staszewski[t] - kl).abs()).max((seq.umegaki[t] - kl).abs());
    }

    let y = ratio_process(&dual, tol)?;
    let theta = doob_ratio(&chain_p, &chain_pi)?;
    for (t, v) in y.values().iter().enumerate() {
        let dv = DVector::from_iterator(n, (0..n).map(|i| v[(i, i)].re));
        worst = worst.max((dv - &theta.values[t]).amax());
    }

    let spec = PathSpaceSpec::new(vec![ProjectorFamily::computational(n); steps + 1], channels, diag(pi0)?)?;
    let w = path_weights(&spec)?;
    for (path, wt) in w.iter() {
        let expected = (0..steps).fold(pi0.get(path[0]), |acc, t| acc * p[t].get(path[t], path[t + 1]));
        worst = worst.max((wt - expected).abs());
    }
    Ok(worst)
}

/// Trial counts for [`run_all`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuiteSize {
    pub large: usize,
    pub medium: usize,
    pub small: usize,
}

impl SuiteSize {
    /// 500 / 200 / 20 trials.
    pub const FULL: SuiteSize = SuiteSize { large: 500, medium: 200, small: 20 };
}

/// Every battery in a fixed order.
pub fn run_all(seed: u64, size: SuiteSize, tol: &Tolerances) -> Vec<BatteryResult> {
    let mut out = vec![
        reversal_recovery(seed, size.large, tol),
        double_reversal_identity(seed, size.medium, tol),
        classical_adjointness(seed, size.large, tol),
        quantum_adjointness(seed, size.large, tol),
        bayes_consistency(seed, size.large, tol),
        ratio_harmonicity(seed, size.large, tol),
    ];
    for f in OPERATOR_CONVEX {
        out.push(jensen(f, seed, size.large, tol));
    }
    out.push(jensen(ScalarFn::Exp, seed, size.large, tol));
    out.extend([
        entropy_monotonicity(seed, size.large, tol),
        operator_h_theorem(seed, size.large, tol),
        entropy_hand_value(tol),
        classical_h_theorem(tol),
        path_normalization(seed, size.medium, tol),
        path_classical_reduction(seed, size.medium, tol),
        max_entropy(seed, size.small, tol),
        commuting_embedding(seed, size.medium, tol),
    ]);
    out
}
