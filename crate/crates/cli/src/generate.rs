//! Seeded random scenarios.

use chrono_reverse::channel::KrausMap;
use chrono_reverse::random::{
    random_channel, random_distribution, random_state, random_stochastic, random_unitary, rng,
};
use chrono_reverse::{DensityMatrix, Tolerances};
use rand::Rng;

use crate::error::{CliError, CliResult};
use crate::scenario::{
    to_complex_rows, to_real_rows, ChannelPayload, ClassicalPayload, DualFlowPayload, Kind, KrausSpec,
    PathspacePayload, Payload, Scenario,
};

fn kraus_spec(map: &KrausMap<f64>) -> KrausSpec {
    KrausSpec { kraus: map.operators().iter().map(to_complex_rows).collect(), kind: None }
}

fn state_rows(rho: &DensityMatrix<f64>) -> crate::scenario::ComplexMatrix {
    to_complex_rows(rho.matrix())
}

/// A valid scenario of the requested kind; identical inputs give identical
/// scenarios. Channels are Haar-isometry dilations with Kraus rank in
/// `1..=dim`, transition matrices row-normalized positive random matrices.
pub fn generate_random_scenario(kind: &str, dim: usize, steps: usize, seed: u64) -> CliResult<Scenario> {
    let kind = Kind::from_name(kind)?;
    if !(2..=6).contains(&dim) {
        return Err(CliError::Usage(format!("dim = {dim} must lie in [2, 6]")));
    }
    if !(1..=8).contains(&steps) {
        return Err(CliError::Usage(format!("steps = {steps} must lie in [1, 8]")));
    }
    let mut r = rng(seed);
    let channels = |r: &mut chrono_reverse::random::SeededRng| -> Vec<KrausSpec> {
        (0..steps)
            .map(|_| {
                let k = r.random_range(1..=dim);
                kraus_spec(&random_channel(r, dim, k))
            })
            .collect()
    };
    let payload = match kind {
        Kind::Classical => Payload::Classical(ClassicalPayload {
            transitions: (0..steps).map(|_| to_real_rows(random_stochastic::<f64, _>(&mut r, dim).matrix())).collect(),
            initial: random_distribution::<f64, _>(&mut r, dim).as_slice().to_vec(),
            reference: Some(random_distribution::<f64, _>(&mut r, dim).as_slice().to_vec()),
            f: None,
            g: None,
        }),
        Kind::Channel => {
            let channels = channels(&mut r);
            Payload::Channel(ChannelPayload {
                channels,
                initial: state_rows(&random_state(&mut r, dim)),
                x: None,
                y: None,
                jensen_inputs: None,
            })
        }
        Kind::DualFlow => {
            let channels = channels(&mut r);
            Payload::DualFlow(DualFlowPayload {
                channels,
                rho0: state_rows(&random_state(&mut r, dim)),
                sigma0: state_rows(&random_state(&mut r, dim)),
            })
        }
        Kind::Pathspace => {
            let channels = channels(&mut r);
            let tol = Tolerances::default();
            let families = (0..=steps)
                .map(|_| {
                    let u = random_unitary::<f64, _>(&mut r, dim);
                    let fam = chrono_reverse::ProjectorFamily::from_basis(&u, &tol)?;
                    Ok(fam.projectors().iter().map(|p| to_complex_rows(p.matrix())).collect())
                })
                .collect::<chrono_reverse::Result<Vec<_>>>()?;
            Payload::Pathspace(PathspacePayload {
                families,
                channels,
                initial: state_rows(&random_state(&mut r, dim)),
                rho0: Some(state_rows(&random_state(&mut r, dim))),
                epsilons: None,
            })
        }
    };
    Ok(Scenario { payload, tolerances: None, seed: Some(seed) })
}
