//! Path spaces of sequential projective measurements interleaved with
//! channels, and the path-space maximum-entropy check.
//!
//! The weight of a path `(i_0, …, i_T)` is
//! `trace(Π_{i_T} E_{T-1}(… Π_{i_1} E_0(Π_{i_0} σ_0 Π_{i_0}) Π_{i_1} …) Π_{i_T})`,
//! evaluated by depth-first recursion over the explicit index grid.

use crate::channel::{support_leakage, validate, DensityMatrix, KrausKind, KrausMap};
use crate::classical::kl_slices;
use crate::error::{Error, Result};
use crate::harmonic::d_umegaki;
use crate::linalg::{check_dim, spectral_decompose, spectral_norm, CMatrix, Hermitian};
use crate::scalar::{Real, Tolerances};

/// Default upper bound on the number of enumerated paths.
pub const DEFAULT_PATH_CAP: u128 = 1_000_000;

/// Complete family of mutually orthogonal projectors.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectorFamily<T: Real> {
    projectors: Vec<Hermitian<T>>,
}

impl<T: Real> ProjectorFamily<T> {
    /// Checks idempotence, mutual orthogonality and completeness within `tol_recon`.
    pub fn new(projectors: Vec<Hermitian<T>>, tol: &Tolerances) -> Result<Self> {
        let first = projectors.first().ok_or_else(|| Error::InvalidFamily("empty projector family".into()))?;
        let dim = first.dim();
        let limit = T::lit(tol.tol_recon);
        let mut sum = CMatrix::zeros(dim, dim);
        for (i, p) in projectors.iter().enumerate() {
            check_dim(dim, p.dim())?;
            let idem = spectral_norm(&(p.matrix() * p.matrix() - p.matrix()));
            if idem > limit {
                return Err(Error::InvalidFamily(format!("projector {i} is not idempotent (residual {idem:e})")));
            }
            for (j, q) in projectors.iter().enumerate().skip(i + 1) {
                let overlap = spectral_norm(&(p.matrix() * q.matrix()));
                if overlap > limit {
                    return Err(Error::InvalidFamily(format!("projectors {i} and {j} overlap (residual {overlap:e})")));
                }
            }
            sum += p.matrix();
        }
        let completeness = spectral_norm(&(sum - CMatrix::identity(dim, dim)));
        if completeness > limit {
            return Err(Error::InvalidFamily(format!("projectors do not sum to I (residual {completeness:e})")));
        }
        Ok(Self { projectors })
    }

    /// Rank-one projectors onto the columns of a unitary.
    pub fn from_basis(u: &CMatrix<T>, tol: &Tolerances) -> Result<Self> {
        let ps = (0..u.ncols())
            .map(|k| {
                let col = u.column(k).into_owned();
                Hermitian::outer(&col)
            })
            .collect();
        Self::new(ps, tol)
    }

    pub fn computational(dim: usize) -> Self {
        let projectors = (0..dim)
            .map(|i| {
                let mut d = vec![T::zero(); dim];
                d[i] = T::one();
                Hermitian::from_real_diagonal(&d)
            })
            .collect();
        Self { projectors }
    }

    /// Eigenspace projectors of a Hermitian matrix, grouped within the rank cutoff.
    pub fn eigenfamily(a: &Hermitian<T>, tol: &Tolerances) -> Self {
        let sd = spectral_decompose(a);
        Self { projectors: sd.eigenspace_groups(tol).into_iter().map(|g| sd.projector(g)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].dim()
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn projectors(&self) -> &[Hermitian<T>] {
        &self.projectors
    }

    /// Every projector has rank one, i.e. the observable has simple spectrum.
    pub fn is_nondegenerate(&self) -> bool {
        self.len() == self.dim()
    }

    fn approx_eq(&self, other: &Self, limit: T) -> bool {
        self.len() == other.len()
            && self.dim() == other.dim()
            && self
                .projectors
                .iter()
                .zip(&other.projectors)
                .all(|(a, b)| spectral_norm(&(a.matrix() - b.matrix())) <= limit)
    }
}

/// Projector families at times `0..=T`, channels between them and the initial state.
#[derive(Clone, Debug)]
pub struct PathSpaceSpec<T: Real> {
    families: Vec<ProjectorFamily<T>>,
    channels: Vec<KrausMap<T>>,
    initial: DensityMatrix<T>,
}

impl<T: Real> PathSpaceSpec<T> {
    pub fn new(
        families: Vec<ProjectorFamily<T>>,
        channels: Vec<KrausMap<T>>,
        initial: DensityMatrix<T>,
    ) -> Result<Self> {
        if families.len() != channels.len() + 1 {
            return Err(Error::InvalidInput(format!(
                "{} channels need {} projector families, got {}",
                channels.len(),
                channels.len() + 1,
                families.len()
            )));
        }
        let dim = initial.dim();
        for f in &families {
            check_dim(dim, f.dim())?;
        }
        for e in &channels {
            check_dim(dim, e.dim())?;
        }
        Ok(Self { families, channels, initial })
    }

    pub fn families(&self) -> &[ProjectorFamily<T>] {
        &self.families
    }

    pub fn channels(&self) -> &[KrausMap<T>] {
        &self.channels
    }

    pub fn initial(&self) -> &DensityMatrix<T> {
        &self.initial
    }

    pub fn steps(&self) -> usize {
        self.channels.len()
    }

    pub fn dim(&self) -> usize {
        self.initial.dim()
    }

    /// Same families with different channels and initial state.
    pub fn with(&self, channels: Vec<KrausMap<T>>, initial: DensityMatrix<T>) -> Result<Self> {
        Self::new(self.families.clone(), channels, initial)
    }

    /// Number of index tuples, saturating.
    pub fn path_count(&self) -> u128 {
        self.families.iter().fold(1u128, |acc, f| acc.saturating_mul(f.len() as u128))
    }
}

/// Path weights stored densely in row-major order over `(i_0, …, i_T)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathDistribution<T: Real> {
    shape: Vec<usize>,
    weights: Vec<T>,
}

impl<T: Real> PathDistribution<T> {
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> T {
        self.weights.iter().fold(T::zero(), |a, &b| a + b)
    }

    fn offset(&self, path: &[usize]) -> usize {
        assert_eq!(path.len(), self.shape.len(), "path length does not match the path space");
        path.iter().zip(&self.shape).fold(0, |acc, (&i, &n)| {
            assert!(i < n, "path index out of range");
            acc * n + i
        })
    }

    pub fn get(&self, path: &[usize]) -> T {
        self.weights[self.offset(path)]
    }

    /// Index tuple of the `k`-th stored weight.
    pub fn path_of(&self, mut k: usize) -> Vec<usize> {
        let mut out = vec![0; self.shape.len()];
        for (slot, &n) in out.iter_mut().zip(&self.shape).rev() {
            *slot = k % n;
            k /= n;
        }
        out
    }

    /// `(path, weight)` pairs in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, T)> + '_ {
        self.weights.iter().enumerate().map(|(k, &w)| (self.path_of(k), w))
    }

    /// Distribution of the index at time `t`.
    pub fn marginal(&self, t: usize) -> Vec<T> {
        let mut out = vec![T::zero(); self.shape[t]];
        for (path, w) in self.iter() {
            out[path[t]] += w;
        }
        out
    }
}

/// Path weights with the default enumeration cap.
pub fn path_weights<T: Real>(spec: &PathSpaceSpec<T>) -> Result<PathDistribution<T>> {
    path_weights_capped(spec, DEFAULT_PATH_CAP)
}

pub fn path_weights_capped<T: Real>(spec: &PathSpaceSpec<T>, cap: u128) -> Result<PathDistribution<T>> {
    let paths = spec.path_count();
    if paths > cap {
        return Err(Error::EnumerationCapExceeded { paths, cap });
    }
    let shape: Vec<usize> = spec.families.iter().map(|f| f.len()).collect();
    let mut weights = Vec::with_capacity(paths as usize);
    let start = spec.initial.as_hermitian();
    for p in spec.families[0].projectors() {
        descend(spec, 0, start.congruence(p.matrix()), &mut weights)?;
    }
    Ok(PathDistribution { shape, weights })
}

fn descend<T: Real>(spec: &PathSpaceSpec<T>, t: usize, s: Hermitian<T>, out: &mut Vec<T>) -> Result<()> {
    if t == spec.steps() {
        out.push(s.trace().max(T::zero()));
        return Ok(());
    }
    let image = spec.channels[t].apply(&s)?;
    for p in spec.families[t + 1].projectors() {
        descend(spec, t + 1, image.congruence(p.matrix()), out)?;
    }
    Ok(())
}

fn require_same_families<T: Real>(a: &PathSpaceSpec<T>, b: &PathSpaceSpec<T>, tol: &Tolerances) -> Result<()> {
    let limit = T::lit(tol.tol_recon);
    if a.families.len() != b.families.len() || a.families.iter().zip(&b.families).any(|(x, y)| !x.approx_eq(y, limit)) {
        return Err(Error::FamilyMismatch);
    }
    Ok(())
}

/// `D(w^F ‖ w^E)` between two path distributions on the same path space, in nats.
pub fn path_kl<T: Real>(spec_f: &PathSpaceSpec<T>, spec_e: &PathSpaceSpec<T>, tol: &Tolerances) -> Result<T> {
    require_same_families(spec_f, spec_e, tol)?;
    let wf = path_weights(spec_f)?;
    let we = path_weights(spec_e)?;
    Ok(kl_slices(wf.weights(), we.weights()))
}

/// Outcome of [`verify_max_entropy_theorem`]. The comparison is evidence on
/// the supplied perturbations only, not a proof of global minimality.
#[derive(Clone, Debug, PartialEq)]
pub struct MaxEntropyReport<T: Real> {
    /// Path divergence with the reference channels and initial state `ρ̄_0`.
    pub d_star: T,
    /// Path divergence for each perturbed channel sequence.
    pub d_perturbed: Vec<T>,
    /// `D_U(ρ̄_0 ‖ σ_0)`.
    pub umegaki_bound: T,
    /// `d_star ≤ d_p + tol_check` for every perturbation.
    pub minimal: bool,
    /// `d_star ≤ umegaki_bound + tol_check`.
    pub bound_holds: bool,
    /// The time-0 family has rank-one projectors (the theorem's hypothesis).
    pub hypothesis_nondegenerate: bool,
}

impl<T: Real> MaxEntropyReport<T> {
    pub fn passed(&self) -> bool {
        self.minimal && self.bound_holds
    }
}

/// Compares `D(w^E(ρ̄_0) ‖ w^E(σ_0))` against `D(w^F(ρ̄_0) ‖ w^E(σ_0))` for each
/// perturbed sequence `F`, and against `D_U(ρ̄_0 ‖ σ_0)`.
pub fn verify_max_entropy_theorem<T: Real>(
    spec_e: &PathSpaceSpec<T>,
    rho0: &DensityMatrix<T>,
    perturbations: &[Vec<KrausMap<T>>],
    tol: &Tolerances,
) -> Result<MaxEntropyReport<T>> {
    check_dim(spec_e.dim(), rho0.dim())?;
    let leak = support_leakage(rho0, &spec_e.initial, tol)?;
    if leak > T::lit(tol.tol_check) {
        return Err(Error::SupportViolation(format!("initial state has weight {leak} outside supp(sigma_0)")));
    }
    let d_star = path_kl(&spec_e.with(spec_e.channels.clone(), rho0.clone())?, spec_e, tol)?;
    let mut d_perturbed = Vec::with_capacity(perturbations.len());
    for seq in perturbations {
        check_dim(spec_e.steps(), seq.len())?;
        for f in seq {
            if f.kind() != KrausKind::TracePreserving {
                let residual = validate(f, tol)?.completeness_residual;
                return Err(Error::NotTracePreserving { residual: residual.as_f64() });
            }
        }
        d_perturbed.push(path_kl(&spec_e.with(seq.clone(), rho0.clone())?, spec_e, tol)?);
    }
    let umegaki_bound = d_umegaki(rho0, &spec_e.initial, tol);
    let slack = T::lit(tol.tol_check);
    Ok(MaxEntropyReport {
        d_star,
        minimal: d_perturbed.iter().all(|&d| d_star <= d + slack),
        bound_holds: d_star <= umegaki_bound + slack,
        hypothesis_nondegenerate: spec_e.families[0].is_nondegenerate(),
        d_perturbed,
        umegaki_bound,
    })
}

/// Perturbed sequences `(1-ε) E_t + ε N` for each `ε` in `grid`, with `N` the
/// completely depolarizing channel.
pub fn admixture_perturbations<T: Real>(channels: &[KrausMap<T>], grid: &[T]) -> Result<Vec<Vec<KrausMap<T>>>> {
    grid.iter()
        .map(|&eps| channels.iter().map(|e| e.mixture(&KrausMap::depolarizing(e.dim()), eps)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{embed_stochastic, two_time_probabilities};
    use crate::classical::kl_divergence;
    use crate::linalg::c;
    use crate::random::{random_channel, random_distribution, random_state, random_stochastic, random_unitary, rng};
    use proptest::prelude::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn diag(v: &[f64]) -> DensityMatrix<f64> {
        DensityMatrix::diagonal(v, &tol()).unwrap()
    }

    fn hadamard() -> CMatrix<f64> {
        let h = c(std::f64::consts::FRAC_1_SQRT_2);
        CMatrix::from_row_slice(2, 2, &[h, h, h, -h])
    }

    #[test]
    fn family_validation() {
        let ok = ProjectorFamily::<f64>::computational(3);
        assert!(ProjectorFamily::new(ok.projectors().to_vec(), &tol()).is_ok());
        let incomplete = ok.projectors()[..2].to_vec();
        assert!(matches!(ProjectorFamily::new(incomplete, &tol()), Err(Error::InvalidFamily(_))));
        let twice = vec![Hermitian::<f64>::identity(2).scale(2.0)];
        assert!(matches!(ProjectorFamily::new(twice, &tol()), Err(Error::InvalidFamily(_))));
        let h = ProjectorFamily::from_basis(&hadamard(), &tol()).unwrap();
        assert!(h.is_nondegenerate());
        let coarse = ProjectorFamily::new(vec![Hermitian::<f64>::identity(2)], &tol()).unwrap();
        assert!(!coarse.is_nondegenerate());
    }

    #[test]
    fn weight_examples() {
        let sigma = diag(&[0.7, 0.3]);
        let fam = ProjectorFamily::eigenfamily(sigma.as_hermitian(), &tol());
        let spec =
            PathSpaceSpec::new(vec![fam.clone(), fam.clone()], vec![KrausMap::identity(2)], sigma.clone()).unwrap();
        let w = path_weights(&spec).unwrap();
        assert!((w.get(&[0, 0]) - 0.7).abs() < 1e-15 && (w.get(&[1, 1]) - 0.3).abs() < 1e-15);
        assert!(w.get(&[0, 1]).abs() < 1e-15 && w.get(&[1, 0]).abs() < 1e-15);

        let mut r = rng(1);
        let rho = random_state::<f64, _>(&mut r, 3);
        let spec = PathSpaceSpec::new(vec![ProjectorFamily::computational(3)], vec![], rho.clone()).unwrap();
        let w = path_weights(&spec).unwrap();
        for i in 0..3 {
            assert!((w.get(&[i]) - rho.matrix()[(i, i)].re).abs() < 1e-15);
        }

        let p: Vec<_> = (0..3).map(|_| random_stochastic::<f64, _>(&mut r, 3)).collect();
        let pi0 = random_distribution::<f64, _>(&mut r, 3);
        let comp = ProjectorFamily::computational(3);
        let spec =
            PathSpaceSpec::new(vec![comp; 4], p.iter().map(embed_stochastic).collect(), diag(pi0.as_slice())).unwrap();
        let w = path_weights(&spec).unwrap();
        for (path, wt) in w.iter() {
            let mut expected = pi0.get(path[0]);
            for t in 0..3 {
                expected *= p[t].get(path[t], path[t + 1]);
            }
            assert!((wt - expected).abs() < 1e-10);
        }
        assert_eq!(w.path_of(w.offset(&[2, 0, 1, 2])), vec![2, 0, 1, 2]);
    }

    #[test]
    fn cap_is_enforced() {
        let fam = ProjectorFamily::<f64>::computational(2);
        let spec = PathSpaceSpec::new(vec![fam; 5], vec![KrausMap::identity(2); 4], DensityMatrix::maximally_mixed(2))
            .unwrap();
        assert!(matches!(path_weights_capped(&spec, 16), Err(Error::EnumerationCapExceeded { paths: 32, cap: 16 })));
        assert_eq!(path_weights_capped(&spec, 32).unwrap().len(), 32);
    }

    #[test]
    fn kl_examples() {
        let mut r = rng(2);
        let e = random_channel::<f64, _>(&mut r, 2, 2);
        let comp = ProjectorFamily::computational(2);
        let spec = PathSpaceSpec::new(vec![comp.clone(); 3], vec![e.clone(); 2], random_state(&mut r, 2)).unwrap();
        assert!(path_kl(&spec, &spec, &tol()).unwrap().abs() < 1e-15);

        let a = spec.with(vec![KrausMap::identity(2); 2], diag(&[0.8, 0.2])).unwrap();
        let b = spec.with(vec![KrausMap::identity(2); 2], diag(&[0.4, 0.6])).unwrap();
        let expected = kl_divergence(
            &crate::classical::Distribution::new(vec![0.8, 0.2], &tol()).unwrap(),
            &crate::classical::Distribution::new(vec![0.4, 0.6], &tol()).unwrap(),
        );
        assert!((path_kl(&a, &b, &tol()).unwrap() - expected).abs() < 1e-14);

        let other = PathSpaceSpec::new(
            vec![ProjectorFamily::from_basis(&hadamard(), &tol()).unwrap(), comp.clone(), comp],
            vec![e; 2],
            random_state(&mut r, 2),
        )
        .unwrap();
        assert!(matches!(path_kl(&spec, &other, &tol()), Err(Error::FamilyMismatch)));
    }

    #[test]
    fn max_entropy_examples() {
        let ad = KrausMap::amplitude_damping(0.3);
        let sigma0 = diag(&[0.6, 0.4]);
        let comp = ProjectorFamily::computational(2);
        let spec = PathSpaceSpec::new(vec![comp.clone(); 3], vec![ad.clone(); 2], sigma0.clone()).unwrap();
        let perturb = admixture_perturbations(spec.channels(), &[0.05, 0.1, 0.2]).unwrap();

        let rep = verify_max_entropy_theorem(&spec, &sigma0, &perturb, &tol()).unwrap();
        assert!(rep.d_star.abs() < 1e-15);
        assert!(rep.d_perturbed.iter().all(|&d| d >= 0.0));

        let rho0 = diag(&[0.2, 0.8]);
        let rep = verify_max_entropy_theorem(&spec, &rho0, &perturb, &tol()).unwrap();
        assert!(rep.passed() && rep.hypothesis_nondegenerate);
        assert!(rep.d_perturbed.iter().all(|&d| d > rep.d_star));

        let rot = ProjectorFamily::from_basis(&hadamard(), &tol()).unwrap();
        let spec_h = PathSpaceSpec::new(vec![rot; 3], vec![ad; 2], sigma0).unwrap();
        let rep_h = verify_max_entropy_theorem(&spec_h, &rho0, &perturb, &tol()).unwrap();
        assert!(rep_h.passed());

        let pure = diag(&[1.0, 0.0]);
        let spec_pure = spec.with(spec.channels().to_vec(), pure).unwrap();
        assert!(matches!(
            verify_max_entropy_theorem(&spec_pure, &diag(&[0.5, 0.5]), &perturb, &tol()),
            Err(Error::SupportViolation(_))
        ));
    }

    #[test]
    fn marginal_matches_two_time_probabilities() {
        let mut r = rng(3);
        let e = random_channel::<f64, _>(&mut r, 3, 2);
        let sigma = random_state::<f64, _>(&mut r, 3);
        let tt = two_time_probabilities(&e, &sigma, &tol()).unwrap();
        let f0 = ProjectorFamily::new(tt.projectors_t.clone(), &tol()).unwrap();
        let f1 = ProjectorFamily::new(tt.projectors_next.clone(), &tol()).unwrap();
        let spec = PathSpaceSpec::new(vec![f0, f1], vec![e], sigma).unwrap();
        let w = path_weights(&spec).unwrap();
        for i in 0..tt.p.len() {
            for j in 0..tt.q.len() {
                assert!((w.get(&[i, j]) - tt.forward[(i, j)]).abs() < 1e-10);
            }
        }
        let m = w.marginal(1);
        for (j, pj) in tt.projectors_next.iter().enumerate() {
            assert!((m[j] - tt.q[j] * pj.trace()).abs() < 1e-10);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn total_mass_is_one(seed in any::<u64>(), d in 2usize..=3, steps in 0usize..=3) {
            let mut r = rng(seed);
            let families: Vec<_> = (0..=steps)
                .map(|_| ProjectorFamily::from_basis(&random_unitary::<f64, _>(&mut r, d), &tol()).unwrap())
                .collect();
            let channels = (0..steps).map(|_| random_channel(&mut r, d, 2)).collect();
            let spec = PathSpaceSpec::new(families, channels, random_state(&mut r, d)).unwrap();
            let w = path_weights(&spec).unwrap();
            prop_assert!((w.total() - 1.0).abs() <= 1e-9);
            prop_assert!(w.weights().iter().all(|&x| x >= 0.0));
        }

        #[test]
        fn reference_channels_minimize(seed in any::<u64>(), eps in 0.01f64..0.5) {
            let mut r = rng(seed);
            let channels: Vec<_> = (0..2).map(|_| random_channel::<f64, _>(&mut r, 2, 2)).collect();
            let fams = (0..3).map(|_| ProjectorFamily::from_basis(&random_unitary::<f64, _>(&mut r, 2), &tol()).unwrap()).collect();
            let spec = PathSpaceSpec::new(fams, channels.clone(), random_state(&mut r, 2)).unwrap();
            let perturb = admixture_perturbations(&channels, &[eps]).unwrap();
            let rep = verify_max_entropy_theorem(&spec, &random_state(&mut r, 2), &perturb, &tol()).unwrap();
            prop_assert!(rep.passed());
        }
    }
}
