//! Output augmentation for fat plants.
//!
//! The plant is rotated so the input matrix becomes `[B1; 0]`, the
//! already-given output block `C11` is completed to an invertible `C1` with an
//! orthonormal `C21`, and the remaining freedom `C22` acts as a state feedback
//! gain on the pseudo pair `(Ã22, Bps2)`. The zeros of the squared plant are
//! the eigenvalues of `Ã22 − Bps2·C22`.
//!
//! Uncontrollable modes of the pseudo pair ("fixed modes") are exactly the
//! plant's own transmission zeros. They survive any augmentation, so the
//! procedure succeeds only when those zeros are already strictly stable; the
//! remaining modes are placed with an LQR gain.

mod pipeline;

pub use pipeline::{
    square_up, square_up_by_transposition, verify, InputAugmentation, SquareUpOptions,
    SquareUpResult, Verification,
};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{
    eig, null_basis, range_and_complement, rank_tol, right_inverse, smallest_right_vector,
    solve_care, to_complex, CMatrix, Tolerances,
};
use crate::sysmodel::{match_zeros, Assumption, StateSpace, ZeroSet};

/// The plant in coordinates `x̄ = T x` where `T B = [B1; 0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedSystem {
    /// Orthogonal `n × n` transform.
    pub t: DMatrix<f64>,
    pub a11: DMatrix<f64>,
    pub a12: DMatrix<f64>,
    pub a21: DMatrix<f64>,
    pub a22: DMatrix<f64>,
    pub b1: DMatrix<f64>,
    pub c11: DMatrix<f64>,
    pub c12: DMatrix<f64>,
}

impl TransformedSystem {
    /// Applies a caller-chosen orthogonal `t`. The first `m` rows of `t` must
    /// span `range(B)`; this is checked through the lower input block.
    pub fn from_transform(sys: &StateSpace, t: DMatrix<f64>, tol: &Tolerances) -> Result<Self> {
        let (n, m) = (sys.n(), sys.m());
        if t.shape() != (n, n) {
            return Err(Error::Dimension(format!(
                "transform must be {n}x{n}, got {:?}",
                t.shape()
            )));
        }
        let orth = (&t * t.transpose() - DMatrix::<f64>::identity(n, n)).amax();
        if orth > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "transform is not orthogonal (max |TTᵀ − I| = {orth:e})"
            )));
        }
        if m >= n {
            return Err(Error::AssumptionViolation {
                failed: vec![Assumption::Fat],
                detail: format!("need n > m, got n = {n}, m = {m}"),
                report: None,
            });
        }
        let a_bar = &t * sys.a() * t.transpose();
        let b_bar = &t * sys.b();
        let c_bar = sys.c() * t.transpose();

        let lower = b_bar.rows(m, n - m).amax();
        if lower > 1e-10 * (1.0 + sys.b().amax()) {
            return Err(Error::InvalidArgument(format!(
                "transform does not annihilate the lower input block (max entry {lower:e})"
            )));
        }
        let b1 = b_bar.rows(0, m).into_owned();
        if rank_tol(&b1, tol)? < m {
            return Err(Error::AssumptionViolation {
                failed: vec![Assumption::FullRankB],
                detail: "B1 is singular: B does not have full column rank".into(),
                report: None,
            });
        }
        Ok(Self {
            a11: a_bar.view((0, 0), (m, m)).into_owned(),
            a12: a_bar.view((0, m), (m, n - m)).into_owned(),
            a21: a_bar.view((m, 0), (n - m, m)).into_owned(),
            a22: a_bar.view((m, m), (n - m, n - m)).into_owned(),
            b1,
            c11: c_bar.columns(0, m).into_owned(),
            c12: c_bar.columns(m, n - m).into_owned(),
            t,
        })
    }

    pub fn n(&self) -> usize {
        self.t.nrows()
    }

    pub fn m(&self) -> usize {
        self.b1.ncols()
    }

    pub fn p(&self) -> usize {
        self.c11.nrows()
    }
}

/// Builds `T` from an orthonormal basis of `range(B)` stacked over one of its
/// orthogonal complement.
pub fn transform_to_controllable_coords(sys: &StateSpace, tol: &Tolerances) -> Result<TransformedSystem> {
    let m = sys.m();
    let rank_b = rank_tol(sys.b(), tol)?;
    if rank_b < m {
        return Err(Error::AssumptionViolation {
            failed: vec![Assumption::FullRankB],
            detail: format!("rank(B) = {rank_b} < m = {m}"),
            report: None,
        });
    }
    let (range, complement) = range_and_complement(sys.b());
    let mut t = DMatrix::zeros(sys.n(), sys.n());
    t.rows_mut(0, m).copy_from(&range.transpose());
    t.rows_mut(m, sys.n() - m).copy_from(&complement.transpose());
    TransformedSystem::from_transform(sys, t, tol)
}

/// Orthonormal rows spanning the null space of `C11`, so `[C11; C21]` is
/// invertible and `C11·C21ᵀ = 0`.
pub fn choose_c21(c11: &DMatrix<f64>, tol: &Tolerances) -> Result<DMatrix<f64>> {
    let (p, m) = c11.shape();
    let rank = rank_tol(c11, tol)?;
    if rank < p {
        return Err(Error::AssumptionViolation {
            failed: vec![Assumption::FullRankCB],
            detail: format!("rank(C11) = {rank} < p = {p}, so rank(CB) < p"),
            report: None,
        });
    }
    let basis = null_basis(c11, tol)?;
    debug_assert_eq!(basis.ncols(), m - p);
    Ok(basis.transpose())
}

/// The feedback problem whose closed loop eigenvalues become the zeros of the
/// squared plant.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoPair {
    /// `[C11; C21]`
    pub c1: DMatrix<f64>,
    /// `[C11†, C21ᵀ]`
    pub c1_inv: DMatrix<f64>,
    /// Minimum-norm right inverse of `C11`.
    pub c11_pinv: DMatrix<f64>,
    pub c21: DMatrix<f64>,
    /// `[C12; 0]`
    pub c_tilde2: DMatrix<f64>,
    /// `A22 − A21·C1⁻¹·C̃2`
    pub a22_tilde: DMatrix<f64>,
    /// `A21·C1⁻¹`
    pub bps: DMatrix<f64>,
    pub bps1: DMatrix<f64>,
    pub bps2: DMatrix<f64>,
}

pub fn build_pseudo_pair(ts: &TransformedSystem, c21: &DMatrix<f64>, tol: &Tolerances) -> Result<PseudoPair> {
    let (n, m, p) = (ts.n(), ts.m(), ts.p());
    if c21.shape() != (m - p, m) {
        return Err(Error::Dimension(format!(
            "C21 must be {}x{m}, got {:?}",
            m - p,
            c21.shape()
        )));
    }
    let c11_pinv = right_inverse(&ts.c11, tol)?;

    let mut c1 = DMatrix::zeros(m, m);
    c1.rows_mut(0, p).copy_from(&ts.c11);
    c1.rows_mut(p, m - p).copy_from(c21);
    let mut c1_inv = DMatrix::zeros(m, m);
    c1_inv.columns_mut(0, p).copy_from(&c11_pinv);
    c1_inv.columns_mut(p, m - p).copy_from(&c21.transpose());

    let defect = (&c1 * &c1_inv - DMatrix::<f64>::identity(m, m)).amax();
    if defect > 1e-10 * (c1.norm() * c1_inv.norm()).max(1.0) {
        return Err(Error::Numerical(format!(
            "C1 = [C11; C21] is singular (max |C1·C1⁻¹ − I| = {defect:e})"
        )));
    }

    let mut c_tilde2 = DMatrix::zeros(m, n - m);
    c_tilde2.rows_mut(0, p).copy_from(&ts.c12);

    let bps = &ts.a21 * &c1_inv;
    let bps1 = bps.columns(0, p).into_owned();
    let bps2 = bps.columns(p, m - p).into_owned();
    let a22_tilde = &ts.a22 - &bps * &c_tilde2;

    Ok(PseudoPair {
        c1,
        c1_inv,
        c11_pinv,
        c21: c21.clone(),
        c_tilde2,
        a22_tilde,
        bps,
        bps1,
        bps2,
    })
}

/// Uncontrollable modes of `(Ã22, Bps2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedModeReport {
    pub fixed_modes: Vec<Complex64>,
    /// Left eigenvector `w₀` for each fixed mode, unit norm.
    pub left_vectors: Vec<Vec<Complex64>>,
    /// PBH residual: `‖w₀ᵀ Bps2‖`, or `σ_min([s₀I − Ã22, Bps2])` for repeated
    /// eigenvalues.
    pub pbh_residuals: Vec<f64>,
    /// Plant transmission zero paired with each fixed mode, if any.
    pub matched_transmission_zeros: Vec<Option<Complex64>>,
    /// Every fixed mode is strictly stable.
    pub stabilizable: bool,
}

impl FixedModeReport {
    pub fn unstable_modes(&self, tol: &Tolerances) -> Vec<Complex64> {
        self.fixed_modes
            .iter()
            .copied()
            .filter(|&z| !tol.is_strictly_stable(z))
            .collect()
    }
}

/// PBH test on the pseudo pair using left eigenvectors of `Ã22`. Clusters of
/// (numerically) repeated eigenvalues fall back to a rank test of
/// `[λI − Ã22, Bps2]`.
pub fn detect_fixed_modes(pp: &PseudoPair, plant_zeros: &ZeroSet, tol: &Tolerances) -> Result<FixedModeReport> {
    let a = &pp.a22_tilde;
    let k = a.nrows();
    let bps2 = to_complex(&pp.bps2);
    let triplets = eig(a)?;

    let mut fixed_modes = Vec::new();
    let mut left_vectors = Vec::new();
    let mut pbh_residuals = Vec::new();

    let mut used = vec![false; triplets.len()];
    for i in 0..triplets.len() {
        if used[i] {
            continue;
        }
        let members: Vec<usize> = (i..triplets.len())
            .filter(|&j| !used[j] && (triplets[j].value - triplets[i].value).norm() <= tol.zero_match)
            .collect();
        for &j in &members {
            used[j] = true;
        }

        if members.len() == 1 {
            let t = &triplets[i];
            let residual = (t.left.transpose() * &bps2).norm();
            if residual < tol.pbh {
                fixed_modes.push(t.value);
                left_vectors.push(t.left.iter().copied().collect());
                pbh_residuals.push(residual);
            }
            continue;
        }

        let mut lambda = members.iter().map(|&j| triplets[j].value).sum::<Complex64>() / members.len() as f64;
        if members.iter().all(|&j| triplets[j].value.im == 0.0) {
            lambda.im = 0.0;
        }
        let mut pencil = CMatrix::zeros(k, k + bps2.ncols());
        for r in 0..k {
            for c in 0..k {
                pencil[(r, c)] = -Complex64::new(a[(r, c)], 0.0);
            }
            pencil[(r, r)] += lambda;
        }
        pencil.columns_mut(k, bps2.ncols()).copy_from(&bps2);
        let deficiency = k.saturating_sub(rank_tol(&pencil, tol)?).min(members.len());
        if deficiency > 0 {
            let w = smallest_right_vector(&pencil.transpose())?;
            let residual = crate::numkit::min_singular_value(&pencil)?;
            for _ in 0..deficiency {
                fixed_modes.push(lambda);
                left_vectors.push(w.iter().copied().collect());
                pbh_residuals.push(residual);
            }
        }
    }

    let matching = match_zeros(&fixed_modes, &plant_zeros.transmission, tol.zero_match);
    let mut matched = vec![None; fixed_modes.len()];
    for (i, j, _) in matching.pairs {
        matched[i] = Some(plant_zeros.transmission[j]);
    }
    let stabilizable = fixed_modes.iter().all(|&z| tol.is_strictly_stable(z));

    Ok(FixedModeReport {
        fixed_modes,
        left_vectors,
        pbh_residuals,
        matched_transmission_zeros: matched,
        stabilizable,
    })
}

/// Outcome of the LQR design on the pseudo pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroPlacement {
    /// The gain, used directly as `C22`.
    pub c22: DMatrix<f64>,
    /// Riccati solution.
    pub p: DMatrix<f64>,
    /// Eigenvalues of `Ã22 − Bps2·C22`: the zeros the squared plant will have.
    pub placed_zeros: Vec<Complex64>,
    pub residual: f64,
}

/// LQR on `(Ã22, Bps2)` with `Q = q_scale·I`, `R = r_scale·I`.
pub fn place_zeros_lqr(pp: &PseudoPair, q_scale: f64, r_scale: f64, tol: &Tolerances) -> Result<ZeroPlacement> {
    for (name, v) in [("q_scale", q_scale), ("r_scale", r_scale)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "{name} must be finite and positive, got {v}"
            )));
        }
    }
    let fixed = detect_fixed_modes(pp, &ZeroSet::default(), tol)?;
    if !fixed.stabilizable {
        return Err(Error::Unstabilizable {
            modes: fixed.unstable_modes(tol),
            report: None,
            fixed_modes: Some(Box::new(fixed)),
        });
    }
    let k = pp.a22_tilde.nrows();
    let j = pp.bps2.ncols();
    let q = DMatrix::<f64>::identity(k, k) * q_scale;
    let r = DMatrix::<f64>::identity(j, j) * r_scale;
    let sol = match solve_care(&pp.a22_tilde, &pp.bps2, &q, &r, tol) {
        Ok(sol) => sol,
        Err(Error::NoStabilizingSolution(msg)) => {
            let mut modes = fixed.unstable_modes(tol);
            if modes.is_empty() {
                return Err(Error::Numerical(format!(
                    "Riccati solver failed on a pair classified stabilizable: {msg}"
                )));
            }
            modes.sort_by(|a, b| a.re.total_cmp(&b.re));
            return Err(Error::Unstabilizable {
                modes,
                report: None,
                fixed_modes: Some(Box::new(fixed)),
            });
        }
        Err(e) => return Err(e),
    };
    Ok(ZeroPlacement {
        c22: sol.k,
        p: sol.p,
        placed_zeros: sol.closed_loop,
        residual: sol.residual,
    })
}

/// `Ca = [C21, C22]·T`, the pseudo outputs in original coordinates.
pub fn assemble_augmentation(ts: &TransformedSystem, c21: &DMatrix<f64>, c22: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (n, m, p) = (ts.n(), ts.m(), ts.p());
    if c21.shape() != (m - p, m) || c22.shape() != (m - p, n - m) {
        return Err(Error::Dimension(format!(
            "expected C21 {}x{m} and C22 {}x{}, got {:?} and {:?}",
            m - p,
            m - p,
            n - m,
            c21.shape(),
            c22.shape()
        )));
    }
    let mut row_block = DMatrix::zeros(m - p, n);
    row_block.columns_mut(0, m).copy_from(c21);
    row_block.columns_mut(m, n - m).copy_from(c22);
    Ok(row_block * &ts.t)
}
