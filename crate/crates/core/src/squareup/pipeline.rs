use nalgebra::DMatrix;

use super::{
    assemble_augmentation, build_pseudo_pair, choose_c21, detect_fixed_modes, place_zeros_lqr,
    transform_to_controllable_coords, FixedModeReport, PseudoPair, TransformedSystem, ZeroPlacement,
};
use crate::error::{Error, Result};
use crate::numkit::{rank_tol, Tolerances};
use crate::sysmodel::{
    check_assumptions, match_zeros, transmission_zeros, transpose_system, Assumption,
    AssumptionReport, StateSpace, ZeroSet,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareUpOptions {
    /// `Q = q_scale·I` in the zero-placement LQR.
    pub q_scale: f64,
    /// `R = r_scale·I` in the zero-placement LQR.
    pub r_scale: f64,
    pub tol: Tolerances,
}

impl Default for SquareUpOptions {
    fn default() -> Self {
        Self {
            q_scale: 1.0,
            r_scale: 1.0,
            tol: Tolerances::default(),
        }
    }
}

/// Zeros of a squared plant and whether it kept the plant's zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    pub zeros: ZeroSet,
    pub minimum_phase: bool,
    /// Every plant transmission zero reappears in `zeros.transmission`.
    pub preserved: bool,
    /// `rank([C; Ca]·B)`; equals `m` for a valid augmentation.
    pub cb_rank: usize,
}

#[derive(Debug, Clone)]
pub struct SquareUpResult {
    /// Pseudo-output rows, `(m − p) × n`, original coordinates.
    pub ca: DMatrix<f64>,
    pub c21: DMatrix<f64>,
    pub c22: DMatrix<f64>,
    pub q_scale: f64,
    pub r_scale: f64,
    pub transformed: TransformedSystem,
    pub pseudo_pair: PseudoPair,
    pub fixed_modes: FixedModeReport,
    pub placement: ZeroPlacement,
    pub assumptions: AssumptionReport,
    /// `{A, B, [C; Ca]}`
    pub augmented: StateSpace,
    pub verification: Verification,
}

impl SquareUpResult {
    pub fn augmented_zero_set(&self) -> &ZeroSet {
        &self.verification.zeros
    }

    pub fn minimum_phase(&self) -> bool {
        self.verification.minimum_phase
    }
}

/// Computes `Ca` so that `{A, B, [C; Ca]}` is square and minimum phase.
///
/// A1..A5 failures come back as [`Error::AssumptionViolation`]. Plant
/// transmission zeros that are not strictly stable come back as
/// [`Error::Unstabilizable`]; they show up as fixed modes of the pseudo pair
/// and no augmentation can move them.
pub fn square_up(sys: &StateSpace, opts: &SquareUpOptions) -> Result<SquareUpResult> {
    let tol = &opts.tol;
    tol.validate()?;

    let report = check_assumptions(sys, tol)?;
    if !report.structural_pass() {
        let failed = report.failed();
        let detail = failed
            .iter()
            .map(|a| format!("{}: {}", a.label(), report.get(*a).detail))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::AssumptionViolation {
            failed,
            detail,
            report: Some(Box::new(report)),
        });
    }

    let transformed = transform_to_controllable_coords(sys, tol)?;
    let c21 = choose_c21(&transformed.c11, tol)?;
    let pseudo_pair = build_pseudo_pair(&transformed, &c21, tol)?;
    let fixed_modes = detect_fixed_modes(&pseudo_pair, &report.zeros, tol)?;

    let a6 = report.a6_stable_transmission_zeros.passed;
    if !fixed_modes.stabilizable || !a6 {
        let mut modes = fixed_modes.unstable_modes(tol);
        let offending = report
            .zeros
            .transmission
            .iter()
            .copied()
            .filter(|&z| !tol.is_strictly_stable(z));
        for z in offending {
            if modes.iter().all(|m| (m - z).norm() > tol.zero_match) {
                modes.push(z);
            }
        }
        return Err(Error::Unstabilizable {
            modes,
            report: Some(Box::new(report)),
            fixed_modes: Some(Box::new(fixed_modes)),
        });
    }

    let placement = place_zeros_lqr(&pseudo_pair, opts.q_scale, opts.r_scale, tol)?;
    let ca = assemble_augmentation(&transformed, &c21, &placement.c22)?;
    let augmented = sys.with_extra_outputs(&ca)?;
    let verification = verify_against(sys, &report.zeros, &augmented, tol)?;

    Ok(SquareUpResult {
        ca,
        c21,
        c22: placement.c22.clone(),
        q_scale: opts.q_scale,
        r_scale: opts.r_scale,
        transformed,
        pseudo_pair,
        fixed_modes,
        placement,
        assumptions: report,
        augmented,
        verification,
    })
}

/// Zeros of `{A, B, [C; Ca]}`, its minimum-phase verdict and whether the
/// plant's transmission zeros survived.
pub fn verify(sys: &StateSpace, ca: &DMatrix<f64>, tol: &Tolerances) -> Result<Verification> {
    if ca.ncols() != sys.n() || sys.p() + ca.nrows() != sys.m() {
        return Err(Error::Dimension(format!(
            "[C; Ca] must be {}x{}, got {}x{}",
            sys.m(),
            sys.n(),
            sys.p() + ca.nrows(),
            ca.ncols()
        )));
    }
    let plant = transmission_zeros(sys, tol)?;
    let augmented = sys.with_extra_outputs(ca)?;
    verify_against(sys, &plant, &augmented, tol)
}

fn verify_against(
    sys: &StateSpace,
    plant: &ZeroSet,
    augmented: &StateSpace,
    tol: &Tolerances,
) -> Result<Verification> {
    let zeros = transmission_zeros(augmented, tol)?;
    let minimum_phase = zeros.is_minimum_phase(tol);
    let matching = match_zeros(&plant.transmission, &zeros.transmission, tol.zero_match);
    let preserved = matching.unmatched_left.is_empty();
    let cb_rank = rank_tol(&(augmented.c() * sys.b()), tol)?;
    Ok(Verification {
        zeros,
        minimum_phase,
        preserved,
        cb_rank,
    })
}

/// Squaring-up of a tall plant through its dual: the fat system
/// `{Aᵀ, Cᵀ, Bᵀ}` is squared with output rows `Ca`, which become pseudo-input
/// columns `Ba = Caᵀ` of the original plant.
#[derive(Debug, Clone)]
pub struct InputAugmentation {
    /// `n × (p − m)` extra input columns.
    pub ba: DMatrix<f64>,
    /// `{A, [B, Ba], C}`
    pub augmented: StateSpace,
    /// The squaring-up of the dual system.
    pub dual: SquareUpResult,
}

pub fn square_up_by_transposition(sys: &StateSpace, opts: &SquareUpOptions) -> Result<InputAugmentation> {
    if sys.m() >= sys.p() {
        return Err(Error::AssumptionViolation {
            failed: vec![Assumption::Fat],
            detail: format!(
                "transposition path needs a tall plant (m < p), got m = {}, p = {}",
                sys.m(),
                sys.p()
            ),
            report: None,
        });
    }
    let dual = square_up(&transpose_system(sys), opts)?;
    let ba = dual.ca.transpose();
    let augmented = sys.with_extra_inputs(&ba)?;
    Ok(InputAugmentation { ba, augmented, dual })
}
