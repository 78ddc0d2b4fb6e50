use num_complex::Complex64;
use thiserror::Error;

use crate::squareup::FixedModeReport;
use crate::sysmodel::{Assumption, AssumptionReport};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite entry in matrix {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is rank deficient: {0}")]
    RankDeficient(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("no stabilizing solution: {0}")]
    NoStabilizingSolution(String),

    /// One or more of the structural assumptions A1..A5 does not hold.
    #[error("assumption violated ({}): {detail}", format_assumptions(.failed))]
    AssumptionViolation {
        failed: Vec<Assumption>,
        detail: String,
        report: Option<Box<AssumptionReport>>,
    },

    /// The pseudo pair has fixed modes that are not strictly stable. These are
    /// the plant's own transmission zeros and cannot be moved by any `Ca`.
    #[error("unstabilizable: fixed modes {} are not strictly stable", format_modes(.modes))]
    Unstabilizable {
        modes: Vec<Complex64>,
        report: Option<Box<AssumptionReport>>,
        fixed_modes: Option<Box<FixedModeReport>>,
    },

    #[error("generation failed: {0}")]
    Generation(String),
}

fn format_assumptions(failed: &[Assumption]) -> String {
    failed
        .iter()
        .map(|a| a.label())
        .collect::<Vec<_>>()
        .join(", ")
}

fn format_modes(modes: &[Complex64]) -> String {
    let parts: Vec<String> = modes
        .iter()
        .map(|z| {
            if z.im == 0.0 {
                format!("{:.6}", z.re)
            } else {
                format!("{:.6}{:+.6}i", z.re, z.im)
            }
        })
        .collect();
    format!("[{}]", parts.join(", "))
}
