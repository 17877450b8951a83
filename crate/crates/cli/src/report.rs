//! JSON reports. Keys are emitted in sorted order and no wall-clock data is
//! recorded, so identical inputs give identical bytes.

use chrono_reverse::linalg::CMatrix;
use chrono_reverse::Tolerances;
use nalgebra::DMatrix;
use serde_json::{json, Map, Value};

/// A number, or a string for non-finite values (`"inf"`, `"-inf"`, `"nan"`).
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

pub fn real_matrix(m: &DMatrix<f64>) -> Value {
    Value::Array((0..m.nrows()).map(|i| nums(&m.row(i).iter().copied().collect::<Vec<_>>())).collect())
}

pub fn complex_matrix(m: &CMatrix<f64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| json!([num(m[(i, j)].re), num(m[(i, j)].im)])).collect()))
            .collect(),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    /// `"<="`: passes when `value <= tolerance`.
    pub relation: &'static str,
    pub tolerance: f64,
}

impl Verdict {
    /// Passes when `value ≤ tolerance`; NaN fails.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), passed: value <= tolerance, value, relation: "<=", tolerance }
    }

    fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "passed": self.passed,
            "value": num(self.value),
            "relation": self.relation,
            "tolerance": num(self.tolerance),
        })
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub scenario: Value,
    pub results: Map<String, Value>,
    pub verdicts: Vec<Verdict>,
}

impl Report {
    pub fn new(command: &str, seed: u64, tolerances: Tolerances, scenario: Value) -> Self {
        Self { command: command.into(), seed, tolerances, scenario, results: Map::new(), verdicts: Vec::new() }
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.results.insert(key.into(), value);
    }

    pub fn verdict(&mut self, v: Verdict) {
        self.verdicts.push(v);
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn to_json(&self) -> Value {
        let t = &self.tolerances;
        json!({
            "command": self.command,
            "units": "nats",
            "passed": self.passed(),
            "provenance": {
                "tool": "chrono-reverse",
                "cli_version": env!("CARGO_PKG_VERSION"),
                "core_version": chrono_reverse::VERSION,
                "seed": self.seed,
            },
            "tolerances": {
                "tol_herm": num(t.tol_herm),
                "tol_recon": num(t.tol_recon),
                "tol_psd": num(t.tol_psd),
                "rank_cutoff_rel": num(t.rank_cutoff_rel),
                "tol_norm": num(t.tol_norm),
                "tol_check": num(t.tol_check),
            },
            "scenario": self.scenario,
            "results": Value::Object(self.results.clone()),
            "verdicts": self.verdicts.iter().map(Verdict::to_json).collect::<Vec<_>>(),
        })
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_values_become_strings() {
        assert_eq!(num(f64::INFINITY), json!("inf"));
        assert_eq!(num(f64::NEG_INFINITY), json!("-inf"));
        assert_eq!(num(f64::NAN), json!("nan"));
        assert_eq!(num(0.5), json!(0.5));
    }

    #[test]
    fn verdicts_cite_tolerance_and_fail_on_nan() {
        let mut r = Report::new("x", 1, Tolerances::default(), Value::Null);
        r.verdict(Verdict::at_most("a", 1e-12, 1e-9));
        assert!(r.passed());
        r.verdict(Verdict::at_most("b", f64::NAN, 1e-9));
        assert!(!r.passed());
        let v = r.to_json();
        assert_eq!(v["units"], "nats");
        assert_eq!(v["verdicts"][0]["tolerance"], json!(1e-9));
    }
}
