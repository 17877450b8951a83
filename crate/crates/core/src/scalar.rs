//! Scalar abstraction shared by every module.
//!
//! All numerics are written against [`Real`], which is implemented for `f32`
//! and `f64`. Complex entries are `nalgebra::Complex<T>`.

use std::fmt::{Debug, Display, LowerExp};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

use crate::error::{Error, Result};

/// Real floating-point scalar usable by the crate (`f32` or `f64`).
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Display + LowerExp + Debug + Send + Sync + 'static
{
    /// Positive infinity, used as the divergence sentinel for relative entropies.
    fn infinity() -> Self;

    /// Converts an `f64` literal or tolerance into this scalar type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Lossy conversion for reports.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerances suited to this precision.
    fn default_tolerances() -> Tolerances;
}

impl Real for f64 {
    fn infinity() -> Self {
        f64::INFINITY
    }

    fn default_tolerances() -> Tolerances {
        Tolerances::default()
    }
}

impl Real for f32 {
    fn infinity() -> Self {
        f32::INFINITY
    }

    fn default_tolerances() -> Tolerances {
        Tolerances {
            tol_herm: 1e-5,
            tol_recon: 1e-4,
            tol_psd: 1e-5,
            rank_cutoff_rel: 1e-5,
            tol_norm: 1e-5,
            tol_check: 1e-3,
        }
    }
}

/// Numerical tolerances. Stored as `f64` and converted on use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Allowed `|a_ij - conj(a_ji)|` for a matrix to count as Hermitian.
    pub tol_herm: f64,
    /// Reconstruction and completeness residuals (operator / Frobenius norm).
    pub tol_recon: f64,
    /// Eigenvalues in `[-tol_psd, 0)` are clipped to zero.
    pub tol_psd: f64,
    /// Eigenvalues below `rank_cutoff_rel * lambda_max` are treated as zero.
    pub rank_cutoff_rel: f64,
    /// Unit-sum / unit-trace normalization slack.
    pub tol_norm: f64,
    /// Verdict tolerance for identity checks (reversal, adjointness, monotonicity).
    pub tol_check: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_herm: 1e-10,
            tol_recon: 1e-10,
            tol_psd: 1e-10,
            rank_cutoff_rel: 1e-10,
            tol_norm: 1e-12,
            tol_check: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("tol_herm", self.tol_herm),
            ("tol_recon", self.tol_recon),
            ("tol_psd", self.tol_psd),
            ("rank_cutoff_rel", self.rank_cutoff_rel),
            ("tol_norm", self.tol_norm),
            ("tol_check", self.tol_check),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidTolerance(format!("{name} = {v} must be finite and >= 0")));
            }
        }
        if self.rank_cutoff_rel >= 1.0 {
            return Err(Error::InvalidTolerance(format!("rank_cutoff_rel = {} must be < 1", self.rank_cutoff_rel)));
        }
        Ok(())
    }

    pub fn with_check(mut self, tol_check: f64) -> Self {
        self.tol_check = tol_check;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        Tolerances::default().validate().unwrap();
        <f32 as Real>::default_tolerances().validate().unwrap();
    }

    #[test]
    fn rejects_bad_tolerances() {
        let mut t = Tolerances::default();
        t.rank_cutoff_rel = 1.0;
        assert!(t.validate().is_err());
        let t = Tolerances { tol_psd: -1.0, ..Tolerances::default() };
        assert!(t.validate().is_err());
        let t = Tolerances { tol_check: f64::NAN, ..Tolerances::default() };
        assert!(t.validate().is_err());
    }
}
