//! Scenario files: JSON with a `kind`, a kind-specific `payload`, optional
//! tolerance overrides and an optional seed.
//!
//! Complex entries are `[re, im]` pairs and matrices are row-major nested
//! arrays. Loading validates the payload against the invariants of the core
//! types; [`save_scenario`] writes the canonical form, which loads back to the
//! same bytes.

use std::path::Path;

use chrono_reverse::channel::{DensityMatrix, KrausKind, KrausMap};
use chrono_reverse::classical::{ChainFlow, Distribution, SpaceTimeFunction, StochasticMatrix};
use chrono_reverse::harmonic::DualChannelFlow;
use chrono_reverse::linalg::{CMatrix, Hermitian};
use chrono_reverse::pathspace::{PathSpaceSpec, ProjectorFamily};
use chrono_reverse::Tolerances;
use nalgebra::{Complex, DMatrix};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

pub type RealMatrix = Vec<Vec<f64>>;
pub type ComplexMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Classical,
    Channel,
    DualFlow,
    Pathspace,
}

impl Kind {
    pub const ALL: [Kind; 4] = [Kind::Classical, Kind::Channel, Kind::DualFlow, Kind::Pathspace];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Classical => "classical",
            Kind::Channel => "channel",
            Kind::DualFlow => "dual_flow",
            Kind::Pathspace => "pathspace",
        }
    }

    pub fn from_name(name: &str) -> CliResult<Kind> {
        Kind::ALL.into_iter().find(|k| k.name() == name).ok_or_else(|| {
            CliError::UnsupportedKind(format!("\"{name}\" (expected classical, channel, dual_flow or pathspace)"))
        })
    }
}

/// Partial tolerance override; absent fields keep their inherited value.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_herm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_recon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_psd: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_cutoff_rel: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_norm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_check: Option<f64>,
}

impl ToleranceOverride {
    pub fn apply(&self, base: Tolerances) -> Tolerances {
        Tolerances {
            tol_herm: self.tol_herm.unwrap_or(base.tol_herm),
            tol_recon: self.tol_recon.unwrap_or(base.tol_recon),
            tol_psd: self.tol_psd.unwrap_or(base.tol_psd),
            rank_cutoff_rel: self.rank_cutoff_rel.unwrap_or(base.rank_cutoff_rel),
            tol_norm: self.tol_norm.unwrap_or(base.tol_norm),
            tol_check: self.tol_check.unwrap_or(base.tol_check),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalPayload {
    /// One row-stochastic matrix per step.
    pub transitions: Vec<RealMatrix>,
    pub initial: Vec<f64>,
    /// Initial distribution of a second flow under the same transitions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<Vec<f64>>,
    /// Space-time functions, one row per time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<RealMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<RealMatrix>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KrausSpec {
    pub kraus: Vec<ComplexMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelPayload {
    pub channels: Vec<KrausSpec>,
    pub initial: ComplexMatrix,
    /// Observables for the adjointness check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<ComplexMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<ComplexMatrix>,
    /// One Hermitian input per Kraus operator of the first channel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jensen_inputs: Option<Vec<ComplexMatrix>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualFlowPayload {
    pub channels: Vec<KrausSpec>,
    pub rho0: ComplexMatrix,
    pub sigma0: ComplexMatrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathspacePayload {
    /// One projector family per time `0..=T`.
    pub families: Vec<Vec<ComplexMatrix>>,
    pub channels: Vec<KrausSpec>,
    pub initial: ComplexMatrix,
    /// Alternative initial state for the maximum-entropy check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho0: Option<ComplexMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Payload {
    Classical(ClassicalPayload),
    Channel(ChannelPayload),
    DualFlow(DualFlowPayload),
    Pathspace(PathspacePayload),
}

impl Payload {
    pub fn kind(&self) -> Kind {
        match self {
            Payload::Classical(_) => Kind::Classical,
            Payload::Channel(_) => Kind::Channel,
            Payload::DualFlow(_) => Kind::DualFlow,
            Payload::Pathspace(_) => Kind::Pathspace,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub payload: Payload,
    pub tolerances: Option<ToleranceOverride>,
    pub seed: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    kind: String,
    payload: Value,
    #[serde(default)]
    tolerances: Option<ToleranceOverride>,
    #[serde(default)]
    seed: Option<u64>,
}

#[derive(Serialize)]
struct OutScenario<'a> {
    kind: &'static str,
    payload: &'a Payload,
    #[serde(skip_serializing_if = "Option::is_none")]
    tolerances: &'a Option<ToleranceOverride>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

/// Validated inputs ready for the analyses.
#[derive(Clone, Debug)]
pub enum Model {
    Classical {
        flow: ChainFlow<f64>,
        reference: Option<ChainFlow<f64>>,
        f: Option<SpaceTimeFunction<f64>>,
        g: Option<SpaceTimeFunction<f64>>,
    },
    Channel {
        flow: chrono_reverse::ChannelFlow<f64>,
        x: Option<Hermitian<f64>>,
        y: Option<Hermitian<f64>>,
        jensen_inputs: Option<Vec<Hermitian<f64>>>,
    },
    DualFlow(DualChannelFlow<f64>),
    Pathspace {
        spec: PathSpaceSpec<f64>,
        rho0: Option<DensityMatrix<f64>>,
        epsilons: Vec<f64>,
    },
}

pub const DEFAULT_EPSILONS: [f64; 3] = [0.05, 0.1, 0.2];

impl Scenario {
    pub fn kind(&self) -> Kind {
        self.payload.kind()
    }

    /// Inherited tolerances with this scenario's overrides applied.
    pub fn tolerances_over(&self, base: Tolerances) -> Tolerances {
        self.tolerances.as_ref().map_or(base, |o| o.apply(base))
    }

    /// Canonical JSON text (pretty-printed, trailing newline).
    pub fn to_json(&self) -> String {
        let out = OutScenario {
            kind: self.kind().name(),
            payload: &self.payload,
            tolerances: &self.tolerances,
            seed: self.seed,
        };
        let mut s = serde_json::to_string_pretty(&out).expect("scenario serializes");
        s.push('\n');
        s
    }

    /// Validates the payload against the core invariants.
    pub fn model(&self, tol: &Tolerances) -> CliResult<Model> {
        tol.validate().map_err(|e| CliError::schema("tolerances", e))?;
        match &self.payload {
            Payload::Classical(p) => classical_model(p, tol),
            Payload::Channel(p) => channel_model(p, tol),
            Payload::DualFlow(p) => {
                let channels = kraus_maps("payload.channels", &p.channels, tol)?;
                let rho0 = state("payload.rho0", &p.rho0, tol)?;
                let sigma0 = state("payload.sigma0", &p.sigma0, tol)?;
                check_dims("payload.sigma0", rho0.dim(), sigma0.dim())?;
                check_channel_dims("payload.channels", &channels, rho0.dim())?;
                let dual = DualChannelFlow::new(rho0, sigma0, channels).map_err(|e| CliError::schema("payload", e))?;
                Ok(Model::DualFlow(dual))
            }
            Payload::Pathspace(p) => pathspace_model(p, tol),
        }
    }
}

/// Parses and validates scenario text, using `base` under the scenario's own
/// tolerance overrides.
pub fn parse_scenario(text: &str, base: Tolerances) -> CliResult<Scenario> {
    let raw: RawScenario = serde_json::from_str(text).map_err(|e| CliError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let kind = Kind::from_name(&raw.kind)?;
    let payload = match kind {
        Kind::Classical => Payload::Classical(typed(raw.payload)?),
        Kind::Channel => Payload::Channel(typed(raw.payload)?),
        Kind::DualFlow => Payload::DualFlow(typed(raw.payload)?),
        Kind::Pathspace => Payload::Pathspace(typed(raw.payload)?),
    };
    let scenario = Scenario { payload, tolerances: raw.tolerances, seed: raw.seed };
    scenario.model(&scenario.tolerances_over(base))?;
    Ok(scenario)
}

pub fn load_scenario(path: &Path, base: Tolerances) -> CliResult<Scenario> {
    parse_scenario(&read_text(path)?, base)
}

pub fn save_scenario(path: &Path, scenario: &Scenario) -> CliResult<()> {
    write_text(path, &scenario.to_json())
}

pub fn load_tolerance_override(path: &Path) -> CliResult<ToleranceOverride> {
    let text = read_text(path)?;
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let inner = e.inner();
        if inner.is_syntax() || inner.is_eof() {
            CliError::Syntax { line: inner.line(), column: inner.column(), message: inner.to_string() }
        } else {
            CliError::Field { field: format!("tolerances.{}", e.path()), message: inner.to_string() }
        }
    })
}

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })
}

fn typed<P: DeserializeOwned>(payload: Value) -> CliResult<P> {
    serde_path_to_error::deserialize(payload).map_err(|e| CliError::Field {
        field: format!("payload.{}", e.path()).trim_end_matches(".").to_string(),
        message: e.inner().to_string(),
    })
}

fn rectangular<E: Copy>(field: &str, rows: &[Vec<E>]) -> CliResult<(usize, usize)> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 {
        return Err(CliError::schema(field, "matrix is empty"));
    }
    if let Some(i) = rows.iter().position(|row| row.len() != c) {
        return Err(CliError::schema(field, format!("row {} has {} entries, expected {c}", i + 1, rows[i].len())));
    }
    Ok((r, c))
}

pub fn real_matrix(field: &str, rows: &RealMatrix) -> CliResult<DMatrix<f64>> {
    let (r, c) = rectangular(field, rows)?;
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

pub fn complex_matrix(field: &str, rows: &ComplexMatrix) -> CliResult<CMatrix<f64>> {
    let (r, c) = rectangular(field, rows)?;
    Ok(CMatrix::from_fn(r, c, |i, j| Complex::new(rows[i][j][0], rows[i][j][1])))
}

pub fn to_real_rows(m: &DMatrix<f64>) -> RealMatrix {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

pub fn to_complex_rows(m: &CMatrix<f64>) -> ComplexMatrix {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

fn hermitian(field: &str, rows: &ComplexMatrix, tol: &Tolerances) -> CliResult<Hermitian<f64>> {
    Hermitian::new(complex_matrix(field, rows)?, tol).map_err(|e| CliError::schema(field, e))
}

fn state(field: &str, rows: &ComplexMatrix, tol: &Tolerances) -> CliResult<DensityMatrix<f64>> {
    DensityMatrix::new(hermitian(field, rows, tol)?, tol).map_err(|e| CliError::schema(field, e))
}

fn kraus_maps(field: &str, specs: &[KrausSpec], tol: &Tolerances) -> CliResult<Vec<KrausMap<f64>>> {
    specs
        .iter()
        .enumerate()
        .map(|(t, spec)| {
            let f = format!("{field}[{t}]");
            let kind = match &spec.kind {
                None => KrausKind::TracePreserving,
                Some(name) => KrausKind::from_name(name)
                    .ok_or_else(|| CliError::schema(format!("{f}.kind"), format!("unknown Kraus kind \"{name}\"")))?,
            };
            if spec.kraus.is_empty() {
                return Err(CliError::schema(format!("{f}.kraus"), "no Kraus operators"));
            }
            let ops = spec
                .kraus
                .iter()
                .enumerate()
                .map(|(k, m)| complex_matrix(&format!("{f}.kraus[{k}]"), m))
                .collect::<CliResult<Vec<_>>>()?;
            KrausMap::new(ops, kind, tol).map_err(|e| CliError::schema(format!("{f}.kraus"), e))
        })
        .collect()
}

fn check_dims(field: &str, expected: usize, found: usize) -> CliResult<()> {
    if expected != found {
        return Err(CliError::schema(field, format!("dimension {found}, expected {expected}")));
    }
    Ok(())
}

fn check_channel_dims(field: &str, channels: &[KrausMap<f64>], dim: usize) -> CliResult<()> {
    for (t, e) in channels.iter().enumerate() {
        check_dims(&format!("{field}[{t}]"), dim, e.dim())?;
    }
    Ok(())
}

fn distribution(field: &str, v: &[f64], n: usize, tol: &Tolerances) -> CliResult<Distribution<f64>> {
    check_dims(field, n, v.len())?;
    Distribution::new(v.to_vec(), tol).map_err(|e| CliError::schema(field, e))
}

fn space_time(field: &str, rows: &RealMatrix, times: usize, n: usize) -> CliResult<SpaceTimeFunction<f64>> {
    let (r, c) = rectangular(field, rows)?;
    if r != times || c != n {
        return Err(CliError::schema(field, format!("shape {r}x{c}, expected {times}x{n} (times x states)")));
    }
    Ok(SpaceTimeFunction::from_rows(rows.clone()))
}

fn classical_model(p: &ClassicalPayload, tol: &Tolerances) -> CliResult<Model> {
    if p.transitions.is_empty() {
        return Err(CliError::schema("payload.transitions", "at least one transition matrix is required"));
    }
    let n = p.initial.len();
    let mut transitions = Vec::with_capacity(p.transitions.len());
    for (t, rows) in p.transitions.iter().enumerate() {
        let field = format!("payload.transitions[{t}]");
        let m = real_matrix(&field, rows)?;
        if m.nrows() != n || m.ncols() != n {
            return Err(CliError::schema(&field, format!("shape {}x{}, expected {n}x{n}", m.nrows(), m.ncols())));
        }
        transitions.push(StochasticMatrix::new(m, tol).map_err(|e| CliError::schema(&field, e))?);
    }
    let initial = distribution("payload.initial", &p.initial, n, tol)?;
    let flow = ChainFlow::new(initial, transitions.clone()).map_err(|e| CliError::schema("payload", e))?;
    let reference = match &p.reference {
        None => None,
        Some(v) => {
            let d = distribution("payload.reference", v, n, tol)?;
            Some(ChainFlow::new(d, transitions).map_err(|e| CliError::schema("payload.reference", e))?)
        }
    };
    let times = flow.steps() + 1;
    let f = p.f.as_ref().map(|rows| space_time("payload.f", rows, times, n)).transpose()?;
    let g = p.g.as_ref().map(|rows| space_time("payload.g", rows, times, n)).transpose()?;
    Ok(Model::Classical { flow, reference, f, g })
}

fn channel_model(p: &ChannelPayload, tol: &Tolerances) -> CliResult<Model> {
    let initial = state("payload.initial", &p.initial, tol)?;
    let d = initial.dim();
    let channels = kraus_maps("payload.channels", &p.channels, tol)?;
    if channels.is_empty() {
        return Err(CliError::schema("payload.channels", "at least one channel is required"));
    }
    check_channel_dims("payload.channels", &channels, d)?;
    let observable = |field: &str, m: &Option<ComplexMatrix>| -> CliResult<Option<Hermitian<f64>>> {
        let Some(rows) = m else { return Ok(None) };
        let h = hermitian(field, rows, tol)?;
        check_dims(field, d, h.dim())?;
        Ok(Some(h))
    };
    let x = observable("payload.x", &p.x)?;
    let y = observable("payload.y", &p.y)?;
    let jensen_inputs = match &p.jensen_inputs {
        None => None,
        Some(list) => {
            if list.len() != channels[0].len() {
                return Err(CliError::schema(
                    "payload.jensen_inputs",
                    format!("{} inputs for {} Kraus operators", list.len(), channels[0].len()),
                ));
            }
            let hs = list
                .iter()
                .enumerate()
                .map(|(k, m)| observable(&format!("payload.jensen_inputs[{k}]"), &Some(m.clone())).map(Option::unwrap))
                .collect::<CliResult<Vec<_>>>()?;
            Some(hs)
        }
    };
    let flow = chrono_reverse::ChannelFlow::new(initial, channels).map_err(|e| CliError::schema("payload", e))?;
    Ok(Model::Channel { flow, x, y, jensen_inputs })
}

fn pathspace_model(p: &PathspacePayload, tol: &Tolerances) -> CliResult<Model> {
    let initial = state("payload.initial", &p.initial, tol)?;
    let d = initial.dim();
    let channels = kraus_maps("payload.channels", &p.channels, tol)?;
    check_channel_dims("payload.channels", &channels, d)?;
    if p.families.len() != channels.len() + 1 {
        return Err(CliError::schema(
            "payload.families",
            format!("{} families for {} channels, expected one per time", p.families.len(), channels.len()),
        ));
    }
    let mut families = Vec::with_capacity(p.families.len());
    for (t, fam) in p.families.iter().enumerate() {
        let field = format!("payload.families[{t}]");
        let projs = fam
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let f = format!("{field}[{k}]");
                let h = hermitian(&f, m, tol)?;
                check_dims(&f, d, h.dim())?;
                Ok(h)
            })
            .collect::<CliResult<Vec<_>>>()?;
        families.push(ProjectorFamily::new(projs, tol).map_err(|e| CliError::schema(&field, e))?);
    }
    let rho0 = match &p.rho0 {
        None => None,
        Some(rows) => {
            let r = state("payload.rho0", rows, tol)?;
            check_dims("payload.rho0", d, r.dim())?;
            Some(r)
        }
    };
    let epsilons = p.epsilons.clone().unwrap_or_else(|| DEFAULT_EPSILONS.to_vec());
    if let Some(e) = epsilons.iter().find(|e| !(0.0..=1.0).contains(*e)) {
        return Err(CliError::schema("payload.epsilons", format!("{e} is outside [0, 1]")));
    }
    let spec = PathSpaceSpec::new(families, channels, initial).map_err(|e| CliError::schema("payload", e))?;
    Ok(Model::Pathspace { spec, rho0, epsilons })
}
