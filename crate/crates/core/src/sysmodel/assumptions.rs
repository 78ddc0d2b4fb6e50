use serde::{Deserialize, Serialize};

use super::{rosenbrock, transmission_zeros, StateSpace, ZeroSet};
use crate::error::Result;
use crate::numkit::{eigenvalues, min_singular_value, rank_tol, singular_values, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Assumption {
    /// `n > m > p`
    Fat,
    /// `D = 0`
    StrictlyProper,
    /// `(A, B)` controllable and `(A, C)` observable.
    ControllableObservable,
    /// `rank B = m`
    FullRankB,
    /// `rank CB = p`
    FullRankCB,
    /// Every transmission zero lies strictly in the open left half plane.
    StableTransmissionZeros,
}

impl Assumption {
    pub const ALL: [Assumption; 6] = [
        Assumption::Fat,
        Assumption::StrictlyProper,
        Assumption::ControllableObservable,
        Assumption::FullRankB,
        Assumption::FullRankCB,
        Assumption::StableTransmissionZeros,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Assumption::Fat => "A1",
            Assumption::StrictlyProper => "A2",
            Assumption::ControllableObservable => "A3",
            Assumption::FullRankB => "A4",
            Assumption::FullRankCB => "A5",
            Assumption::StableTransmissionZeros => "A6",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            Assumption::Fat => "fat system, n > m > p",
            Assumption::StrictlyProper => "strictly proper, D = 0",
            Assumption::ControllableObservable => "(A, B) controllable and (A, C) observable",
            Assumption::FullRankB => "B has full column rank m",
            Assumption::FullRankCB => "rank(CB) = p",
            Assumption::StableTransmissionZeros => {
                "all transmission zeros strictly in the open left half plane"
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionCheck {
    pub passed: bool,
    /// A1: m − p. A2: max |D|. A3: smallest PBH singular value over the
    /// eigenvalues of A. A4: smallest singular value of B. A5: p-th singular
    /// value of CB. A6: largest real part among transmission zeros, `None`
    /// when there are none.
    pub diagnostic: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub a1_fat: AssumptionCheck,
    pub a2_strictly_proper: AssumptionCheck,
    pub a3_controllable_observable: AssumptionCheck,
    pub a4_full_rank_b: AssumptionCheck,
    pub a5_full_rank_cb: AssumptionCheck,
    pub a6_stable_transmission_zeros: AssumptionCheck,
    pub overall_pass: bool,
    /// Zero classification computed along the way.
    pub zeros: ZeroSet,
}

impl AssumptionReport {
    pub fn get(&self, which: Assumption) -> &AssumptionCheck {
        match which {
            Assumption::Fat => &self.a1_fat,
            Assumption::StrictlyProper => &self.a2_strictly_proper,
            Assumption::ControllableObservable => &self.a3_controllable_observable,
            Assumption::FullRankB => &self.a4_full_rank_b,
            Assumption::FullRankCB => &self.a5_full_rank_cb,
            Assumption::StableTransmissionZeros => &self.a6_stable_transmission_zeros,
        }
    }

    pub fn failed(&self) -> Vec<Assumption> {
        Assumption::ALL
            .into_iter()
            .filter(|&a| !self.get(a).passed)
            .collect()
    }

    /// A1 through A5 hold; A6 is left out.
    pub fn structural_pass(&self) -> bool {
        self.failed()
            .iter()
            .all(|&a| a == Assumption::StableTransmissionZeros)
    }
}

/// Evaluates A1..A6. Failures are report content; only numerical breakdowns
/// produce an error.
///
/// A6 is read as "every transmission zero the plant already has is strictly
/// stable", which is what makes the pseudo pair stabilizable. Zeros within
/// `pbh` of the imaginary axis fail.
pub fn check_assumptions(sys: &StateSpace, tol: &Tolerances) -> Result<AssumptionReport> {
    let (n, m, p) = (sys.n(), sys.m(), sys.p());

    let a1 = AssumptionCheck {
        passed: n > m && m > p,
        diagnostic: Some(m as f64 - p as f64),
        detail: format!("n = {n}, m = {m}, p = {p}"),
    };

    let a2 = AssumptionCheck {
        passed: true,
        diagnostic: Some(0.0),
        detail: "no feedthrough term is representable".into(),
    };

    let zeros = transmission_zeros(sys, tol)?;

    let mut margin = f64::INFINITY;
    for lambda in eigenvalues(sys.a())? {
        let r = rosenbrock(sys, lambda);
        let ctrb = r.view((0, 0), (n, n + m)).into_owned();
        let obsv = r.view((0, 0), (n + p, n)).into_owned();
        margin = margin
            .min(min_singular_value(&ctrb)?)
            .min(min_singular_value(&obsv)?);
    }
    let uncontrollable = zeros.input_decoupling.len();
    let unobservable = zeros.output_decoupling.len();
    let a3 = AssumptionCheck {
        passed: uncontrollable == 0 && unobservable == 0,
        diagnostic: Some(margin),
        detail: format!(
            "{uncontrollable} uncontrollable and {unobservable} unobservable mode(s) at pbh tolerance {:e}",
            tol.pbh
        ),
    };

    let rank_b = rank_tol(sys.b(), tol)?;
    let a4 = AssumptionCheck {
        passed: rank_b == m,
        diagnostic: singular_values(sys.b())?.last().copied(),
        detail: format!("rank(B) = {rank_b}, m = {m}"),
    };

    let cb = sys.c() * sys.b();
    let rank_cb = rank_tol(&cb, tol)?;
    let sv_cb = singular_values(&cb)?;
    let a5 = AssumptionCheck {
        passed: rank_cb == p,
        diagnostic: sv_cb.get(p.saturating_sub(1).min(sv_cb.len().saturating_sub(1))).copied(),
        detail: format!("rank(CB) = {rank_cb}, p = {p}"),
    };

    let max_re = zeros
        .transmission
        .iter()
        .map(|z| z.re)
        .fold(None, |acc: Option<f64>, re| Some(acc.map_or(re, |a| a.max(re))));
    let unstable: Vec<_> = zeros
        .transmission
        .iter()
        .filter(|&&z| !tol.is_strictly_stable(z))
        .collect();
    let a6 = AssumptionCheck {
        passed: !zeros.degenerate && unstable.is_empty(),
        diagnostic: max_re,
        detail: if zeros.degenerate {
            "degenerate system: transmission zeros undefined".into()
        } else {
            format!(
                "{} transmission zero(s), {} not strictly stable (|Re| <= {:e} counts as unstable)",
                zeros.transmission.len(),
                unstable.len(),
                tol.pbh
            )
        },
    };

    let overall_pass = [&a1, &a2, &a3, &a4, &a5, &a6].iter().all(|c| c.passed);
    Ok(AssumptionReport {
        a1_fat: a1,
        a2_strictly_proper: a2,
        a3_controllable_observable: a3,
        a4_full_rank_b: a4,
        a5_full_rank_cb: a5,
        a6_stable_transmission_zeros: a6,
        overall_pass,
        zeros,
    })
}
