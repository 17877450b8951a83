//! Scenario files, seeded scenario generation and JSON reports for the
//! `chrono-reverse` command-line tool.

pub mod commands;
pub mod error;
pub mod generate;
pub mod report;
pub mod scenario;

use chrono_reverse::Tolerances;

pub use commands::{property_suite, run_command, Command};
pub use error::{CliError, CliResult};
pub use generate::generate_random_scenario;
pub use report::{Report, Verdict};
pub use scenario::{load_scenario, parse_scenario, save_scenario, Kind, Model, Scenario, ToleranceOverride};

/// Environment variable overriding the default `tol_check`.
pub const TOL_ENV: &str = "CHRONO_REVERSE_TOL";

/// Default tolerances with `tol_check` taken from `env_value` when present.
pub fn base_tolerances(env_value: Option<&str>) -> CliResult<Tolerances> {
    let mut tol = Tolerances::default();
    if let Some(raw) = env_value {
        let v: f64 = raw
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{TOL_ENV} = \"{raw}\" is not a decimal number")))?;
        if !v.is_finite() || v < 0.0 {
            return Err(CliError::Usage(format!("{TOL_ENV} = {v} must be finite and >= 0")));
        }
        tol.tol_check = v;
    }
    Ok(tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn env_tolerance_parsing() {
        assert_eq!(base_tolerances(None).unwrap(), Tolerances::default());
        assert_eq!(base_tolerances(Some(" 1e-6 ")).unwrap().tol_check, 1e-6);
        assert!(base_tolerances(Some("tight")).is_err());
        assert!(base_tolerances(Some("-1")).is_err());
    }
}
