//! The analyses behind each subcommand.

use chrono_reverse::battery::{self, SuiteSize};
use chrono_reverse::channel::{
    apply_schrodinger, check_space_time_adjointness_q, double_reversal, spanning_states, time_reversal, validate,
};
use chrono_reverse::classical::{
    check_space_time_adjointness, doob_ratio, integration_by_parts_residual, joint_two_time, kl_divergence,
    reverse_harmonic_residual, SpaceTimeFunction,
};
use chrono_reverse::harmonic::{
    entropy_process, expectation_jensen_residual, h_theorem_operator_check, h_theorem_trace_check,
    operator_jensen_residual, trace_jensen_residual,
};
use chrono_reverse::linalg::{operator_norm, spectral_norm, trace_distance, Hermitian};
use chrono_reverse::pathspace::{admixture_perturbations, path_weights, verify_max_entropy_theorem};
use chrono_reverse::random::{random_hermitian, random_hermitian_in, rng, SeededRng};
use chrono_reverse::Tolerances;
use rand::Rng;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::report::{complex_matrix, num, nums, real_matrix, Report, Verdict};
use crate::scenario::{Kind, Model};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    ReverseChain,
    ReverseChannel,
    CheckAdjointness,
    HTheorem,
    Entropies,
    Jensen,
    PathWeights,
    VerifyMaxEntropy,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::ReverseChain => "reverse-chain",
            Command::ReverseChannel => "reverse-channel",
            Command::CheckAdjointness => "check-adjointness",
            Command::HTheorem => "h-theorem",
            Command::Entropies => "entropies",
            Command::Jensen => "jensen",
            Command::PathWeights => "path-weights",
            Command::VerifyMaxEntropy => "verify-max-entropy",
        }
    }

    fn accepts(self) -> &'static [Kind] {
        match self {
            Command::ReverseChain => &[Kind::Classical],
            Command::ReverseChannel | Command::Jensen => &[Kind::Channel],
            Command::CheckAdjointness => &[Kind::Classical, Kind::Channel],
            Command::HTheorem => &[Kind::Classical, Kind::DualFlow],
            Command::Entropies => &[Kind::DualFlow],
            Command::PathWeights | Command::VerifyMaxEntropy => &[Kind::Pathspace],
        }
    }
}

fn kind_of(model: &Model) -> Kind {
    match model {
        Model::Classical { .. } => Kind::Classical,
        Model::Channel { .. } => Kind::Channel,
        Model::DualFlow(_) => Kind::DualFlow,
        Model::Pathspace { .. } => Kind::Pathspace,
    }
}

fn summary(model: &Model) -> Value {
    let (dim, steps) = match model {
        Model::Classical { flow, .. } => (flow.n(), flow.steps()),
        Model::Channel { flow, .. } => (flow.dim(), flow.steps()),
        Model::DualFlow(d) => (d.dim(), d.steps()),
        Model::Pathspace { spec, .. } => (spec.dim(), spec.channels().len()),
    };
    json!({ "kind": kind_of(model).name(), "dim": dim, "steps": steps })
}

/// Runs `command` on a validated scenario model.
pub fn run_command(command: Command, model: &Model, seed: u64, tol: &Tolerances) -> CliResult<Report> {
    let kind = kind_of(model);
    if !command.accepts().contains(&kind) {
        let expected: Vec<_> = command.accepts().iter().map(|k| k.name()).collect();
        return Err(CliError::KindMismatch {
            command: command.name().into(),
            expected: expected.join(" or "),
            found: kind.name().into(),
        });
    }
    let mut report = Report::new(command.name(), seed, *tol, summary(model));
    let mut r = rng(seed);
    match (command, model) {
        (Command::ReverseChain, Model::Classical { flow, reference, .. }) => {
            reverse_chain(&mut report, flow, reference.as_ref(), tol)?
        }
        (Command::ReverseChannel, Model::Channel { flow, .. }) => reverse_channel(&mut report, flow, tol)?,
        (Command::CheckAdjointness, Model::Classical { flow, f, g, .. }) => {
            let f = f.clone().unwrap_or_else(|| random_function(&mut r, flow.steps() + 1, flow.n()));
            let g = g.clone().unwrap_or_else(|| random_function(&mut r, flow.steps() + 1, flow.n()));
            let adj = check_space_time_adjointness(flow, &f, &g)?;
            let ibp = integration_by_parts_residual(flow, &f, &g)?;
            report.set("adjointness_residual", num(adj));
            report.set("integration_by_parts_residual", num(ibp));
            report.verdict(Verdict::at_most("space_time_adjointness", adj, tol.tol_check));
            report.verdict(Verdict::at_most("integration_by_parts", ibp, tol.tol_check));
        }
        (Command::CheckAdjointness, Model::Channel { flow, x, y, .. }) => {
            let d = flow.dim();
            let x = x.clone().unwrap_or_else(|| random_hermitian(&mut r, d));
            let y = y.clone().unwrap_or_else(|| random_hermitian(&mut r, d));
            let mut residuals = Vec::new();
            for (t, (e, rho)) in flow.channels().iter().zip(flow.states()).enumerate() {
                let res = check_space_time_adjointness_q(e, rho, &x, &y, tol)?;
                report.verdict(Verdict::at_most(format!("space_time_adjointness_step_{t}"), res, tol.tol_check));
                residuals.push(res);
            }
            report.set("adjointness_residuals", nums(&residuals));
        }
        (Command::HTheorem, Model::Classical { flow, reference, .. }) => {
            let reference = reference.as_ref().ok_or_else(|| {
                CliError::schema("payload.reference", "h-theorem needs a reference initial distribution")
            })?;
            let seq: Vec<f64> =
                flow.distributions().iter().zip(reference.distributions()).map(|(p, q)| kl_divergence(p, q)).collect();
            report.set("relative_entropy", nums(&seq));
            report.verdict(Verdict::at_most("relative_entropy_nonincreasing", max_increase(&seq), tol.tol_check));
        }
        (Command::HTheorem, Model::DualFlow(dual)) => {
            let seq = h_theorem_trace_check(dual, tol)?;
            let margins = h_theorem_operator_check(dual, tol)?;
            let z = entropy_process(dual, tol)?;
            let scaled: Vec<f64> =
                margins.iter().zip(&z.values()[1..]).map(|(m, zn)| -m / operator_norm(zn).max(1.0)).collect();
            report.set("belavkin_staszewski", nums(&seq.belavkin_staszewski));
            report.set("umegaki", nums(&seq.umegaki));
            report.set("operator_margins", nums(&margins));
            report.verdict(Verdict::at_most(
                "belavkin_staszewski_nonincreasing",
                max_increase(&seq.belavkin_staszewski),
                tol.tol_check,
            ));
            report.verdict(Verdict::at_most("umegaki_nonincreasing", max_increase(&seq.umegaki), tol.tol_check));
            report.verdict(Verdict::at_most(
                "operator_subharmonicity_relative",
                scaled.iter().copied().fold(0.0, f64::max),
                tol.tol_check,
            ));
        }
        (Command::Entropies, Model::DualFlow(dual)) => {
            let seq = h_theorem_trace_check(dual, tol)?;
            let order = seq.umegaki.iter().zip(&seq.belavkin_staszewski).map(|(u, b)| u - b).fold(0.0, f64::max);
            let negativity = seq.umegaki.iter().map(|u| -u).fold(0.0, f64::max);
            report.set("belavkin_staszewski", nums(&seq.belavkin_staszewski));
            report.set("umegaki", nums(&seq.umegaki));
            report.verdict(Verdict::at_most("belavkin_staszewski_dominates_umegaki", order, tol.tol_check));
            report.verdict(Verdict::at_most("umegaki_nonnegative", negativity, tol.tol_check));
        }
        (Command::Jensen, Model::Channel { flow, jensen_inputs, .. }) => {
            jensen(&mut report, flow, jensen_inputs.as_deref(), &mut r, tol)?
        }
        (Command::PathWeights, Model::Pathspace { spec, .. }) => {
            let w = path_weights(spec)?;
            let paths: Vec<Value> = w.iter().map(|(p, wt)| json!({ "path": p, "weight": num(wt) })).collect();
            report.set("paths", Value::Array(paths));
            report.set("total", num(w.total()));
            report.verdict(Verdict::at_most("total_mass", (w.total() - 1.0).abs(), tol.tol_check));
        }
        (Command::VerifyMaxEntropy, Model::Pathspace { spec, rho0, epsilons }) => {
            let rho0 = rho0.as_ref().ok_or_else(|| {
                CliError::schema("payload.rho0", "verify-max-entropy needs an alternative state rho0")
            })?;
            let perturb = admixture_perturbations(spec.channels(), epsilons)?;
            let rep = verify_max_entropy_theorem(spec, rho0, &perturb, tol)?;
            report.set("d_star", num(rep.d_star));
            report.set("d_perturbed", nums(&rep.d_perturbed));
            report.set("epsilons", nums(epsilons));
            report.set("umegaki_bound", num(rep.umegaki_bound));
            report.set("hypothesis_nondegenerate", json!(rep.hypothesis_nondegenerate));
            report.set("minimality_checked", json!(rep.hypothesis_nondegenerate));
            if rep.hypothesis_nondegenerate {
                let excess = rep.d_perturbed.iter().map(|d| rep.d_star - d).fold(0.0, f64::max);
                report.verdict(Verdict::at_most("path_divergence_minimal", excess, tol.tol_check));
            }
            report.verdict(Verdict::at_most("umegaki_bound", rep.d_star - rep.umegaki_bound, tol.tol_check));
        }
        _ => unreachable!("kind checked above"),
    }
    Ok(report)
}

fn max_increase(seq: &[f64]) -> f64 {
    seq.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

fn random_function(r: &mut SeededRng, times: usize, n: usize) -> SpaceTimeFunction<f64> {
    SpaceTimeFunction::from_rows((0..times).map(|_| (0..n).map(|_| r.random_range(-1.0..1.0)).collect()).collect())
}

fn reverse_chain(
    report: &mut Report,
    flow: &chrono_reverse::ChainFlow<f64>,
    reference: Option<&chrono_reverse::ChainFlow<f64>>,
    tol: &Tolerances,
) -> CliResult<()> {
    let q = flow.reverse_transitions();
    let mut bayes = Vec::new();
    let mut rows = Vec::new();
    for (t, qt) in q.iter().enumerate() {
        let joint = joint_two_time(&flow.transitions()[t], &flow.distributions()[t])?;
        let next = &flow.distributions()[t + 1];
        let n = flow.n();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((joint[(i, j)] - qt.get(j, i) * next.get(j)).abs());
            }
        }
        bayes.push(worst);
        rows.push(qt.row_sum_residual());
        report.verdict(Verdict::at_most(format!("bayes_consistency_step_{t}"), worst, tol.tol_check));
        report.verdict(Verdict::at_most(format!("row_stochastic_step_{t}"), qt.row_sum_residual(), tol.tol_check));
    }
    report.set("reverse_transitions", Value::Array(q.iter().map(|m| real_matrix(m.matrix())).collect()));
    report.set("distributions", Value::Array(flow.distributions().iter().map(|d| nums(d.as_slice())).collect()));
    report.set("bayes_residuals", nums(&bayes));
    report.set("row_sum_residuals", nums(&rows));
    if let Some(reference) = reference {
        match doob_ratio(reference, flow) {
            Ok(theta) => {
                let res = reverse_harmonic_residual(&theta, flow)?;
                report.set("ratio_reverse_harmonic_residual", num(res));
                report.verdict(Verdict::at_most("ratio_reverse_harmonic", res, tol.tol_check));
            }
            Err(chrono_reverse::Error::SupportViolation(msg)) => {
                report.set("ratio_reverse_harmonic_residual", Value::Null);
                report.set("ratio_skipped", json!(msg));
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

fn reverse_channel(report: &mut Report, flow: &chrono_reverse::ChannelFlow<f64>, tol: &Tolerances) -> CliResult<()> {
    let mut steps = Vec::new();
    for (t, (e, rho)) in flow.channels().iter().zip(flow.states()).enumerate() {
        let next = apply_schrodinger(e, rho)?;
        let rev = time_reversal(e, rho, tol)?;
        let recovery = trace_distance(&rev.apply(next.as_hermitian())?, rho.as_hermitian());
        let completeness = spectral_norm(rev.completeness_sum().sub(&next.support_projector(tol)).matrix());
        let forward = validate(e, tol)?;
        report.verdict(Verdict::at_most(format!("recovery_step_{t}"), recovery, tol.tol_check));
        report.verdict(Verdict::at_most(format!("reversal_completeness_step_{t}"), completeness, tol.tol_check));
        let full_rank = rho.rank(tol) == rho.dim();
        let double = if full_rank {
            let dd = double_reversal(e, rho, tol)?;
            let mut worst = 0.0f64;
            for s in spanning_states::<f64>(e.dim()) {
                worst = worst.max(trace_distance(&dd.apply(s.as_hermitian())?, &e.apply(s.as_hermitian())?));
            }
            report.verdict(Verdict::at_most(format!("double_reversal_step_{t}"), worst, tol.tol_check));
            num(worst)
        } else {
            Value::Null
        };
        let reversal_kind = validate(&rev, tol)?;
        steps.push(json!({
            "t": t,
            "forward_kind": forward.classified.map(|k| k.name()),
            "forward_completeness_residual": num(forward.completeness_residual),
            "reversal_kraus": rev.operators().iter().map(complex_matrix).collect::<Vec<_>>(),
            "reversal_kind": reversal_kind.classified.map(|k| k.name()),
            "recovery_residual": num(recovery),
            "completeness_vs_support_residual": num(completeness),
            "rho_rank": rho.rank(tol),
            "double_reversal_residual": double,
        }));
    }
    report.set("steps", Value::Array(steps));
    Ok(())
}

fn jensen(
    report: &mut Report,
    flow: &chrono_reverse::ChannelFlow<f64>,
    inputs: Option<&[Hermitian<f64>]>,
    r: &mut SeededRng,
    tol: &Tolerances,
) -> CliResult<()> {
    let ops = flow.channels()[0].operators();
    let d = flow.dim();
    let rho = &flow.states()[0];
    let generated: Vec<Hermitian<f64>>;
    let xs = match inputs {
        Some(xs) => xs,
        None => {
            generated = (0..ops.len()).map(|_| random_hermitian_in(r, d, 0.05, 3.0)).collect();
            &generated
        }
    };
    let mut out = serde_json::Map::new();
    for f in battery::OPERATOR_CONVEX {
        let op = operator_jensen_residual(f, ops, xs, tol)?;
        let tr = trace_jensen_residual(f, ops, xs, tol)?;
        let ex = expectation_jensen_residual(f, rho, &xs[0], tol)?;
        out.insert(
            f.name().into(),
            json!({ "operator_min_eigenvalue": num(op), "trace_gap": num(tr), "expectation_gap": num(ex) }),
        );
        report.verdict(Verdict::at_most(format!("operator_jensen_{}", f.name()), -op, tol.tol_check));
        report.verdict(Verdict::at_most(format!("trace_jensen_{}", f.name()), -tr, tol.tol_check));
        report.verdict(Verdict::at_most(format!("expectation_jensen_{}", f.name()), -ex, tol.tol_check));
    }
    report.set("functions", Value::Object(out));
    report.set("inputs_generated", json!(inputs.is_none()));
    Ok(())
}

/// Runs every seeded battery of the core crate.
pub fn property_suite(seed: u64, size: SuiteSize, tol: &Tolerances, scenario: Value) -> Report {
    let mut report = Report::new("property-suite", seed, *tol, scenario);
    let results = battery::run_all(seed, size, tol);
    let mut rows = Vec::new();
    for b in &results {
        rows.push(json!({
            "name": b.name,
            "trials": b.trials,
            "passed": b.trials - b.failures,
            "failed": b.failures,
            "worst": num(b.worst),
            "tolerance": num(b.tolerance),
            "first_error": b.first_error,
        }));
        let mut v = Verdict::at_most(b.name, b.worst, b.tolerance);
        v.passed = b.passed();
        report.verdict(v);
    }
    report.set("batteries", Value::Array(rows));
    report.set("trial_counts", json!({ "large": size.large, "medium": size.medium, "small": size.small }));
    report
}
