//! Dense numerical kernels: tolerant rank, orthonormal bases, right inverses,
//! eigen-triplets, minimum singular values and the Riccati solver.
//!
//! Plant data is always real (`DMatrix<f64>`). Complex matrices appear only
//! where a pencil is evaluated at a complex point or an eigenvector is
//! returned.

mod care;

pub use care::{care_residual, solve_care, CareSolution};

use nalgebra::{ComplexField, DMatrix, DVector, Schur, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const SVD_MAX_ITER: usize = 10_000;
const SCHUR_MAX_ITER: usize = 10_000;

/// Every numerical threshold used by the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative singular-value threshold. The effective cutoff is
    /// `rank * sigma_max * max(rows, cols)`.
    pub rank: f64,
    /// Absolute `sigma_min` threshold for rank-drop (PBH) tests.
    pub pbh: f64,
    /// Absolute distance under which two complex zeros are the same zero.
    pub zero_match: f64,
    /// Relative residual bound accepted from the Riccati solver.
    pub care_residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank: 1e-9,
            pbh: 1e-7,
            zero_match: 1e-6,
            care_residual: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn new(rank: f64, pbh: f64, zero_match: f64, care_residual: f64) -> Result<Self> {
        let tol = Self {
            rank,
            pbh,
            zero_match,
            care_residual,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("rank", self.rank),
            ("pbh", self.pbh),
            ("zero_match", self.zero_match),
            ("care_residual", self.care_residual),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "tolerance `{name}` must be finite and strictly positive, got {value}"
                )));
            }
        }
        Ok(())
    }

    /// Singular values at or below this value count as zero.
    pub fn rank_threshold(&self, sigma_max: f64, rows: usize, cols: usize) -> f64 {
        self.rank * sigma_max * rows.max(cols) as f64
    }

    /// Strict open-left-half-plane test shared by A6, the fixed-mode
    /// stabilizability flag and the minimum-phase verdict. Anything within
    /// `pbh` of the imaginary axis is treated as not strictly stable.
    pub fn is_strictly_stable(&self, z: Complex64) -> bool {
        z.re < -self.pbh
    }
}

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Singular values sorted in descending order.
pub fn singular_values<T>(m: &DMatrix<T>) -> Result<Vec<f64>>
where
    T: ComplexField<RealField = f64>,
{
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let svd = SVD::try_new(m.clone(), false, false, f64::EPSILON, SVD_MAX_ITER)
        .ok_or_else(|| Error::Numerical("singular value decomposition did not converge".into()))?;
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// Numerical rank: number of singular values above the relative threshold.
pub fn rank_tol<T>(m: &DMatrix<T>, tol: &Tolerances) -> Result<usize>
where
    T: ComplexField<RealField = f64>,
{
    if m.is_empty() {
        return Err(Error::InvalidArgument("rank of an empty matrix".into()));
    }
    let sv = singular_values(m)?;
    let sigma_max = sv[0];
    if sigma_max == 0.0 {
        return Ok(0);
    }
    let thr = tol.rank_threshold(sigma_max, m.nrows(), m.ncols());
    Ok(sv.iter().filter(|&&s| s > thr).count())
}

/// Smallest singular value (of the `min(rows, cols)` available).
pub fn min_singular_value<T>(m: &DMatrix<T>) -> Result<f64>
where
    T: ComplexField<RealField = f64>,
{
    if m.is_empty() {
        return Err(Error::InvalidArgument(
            "minimum singular value of an empty matrix".into(),
        ));
    }
    let sv = singular_values(m)?;
    Ok(*sv.last().expect("nonempty"))
}

/// Orthonormal basis (as columns) of the right null space of `m`.
pub fn null_basis(m: &DMatrix<f64>, tol: &Tolerances) -> Result<DMatrix<f64>> {
    if m.is_empty() {
        return Err(Error::InvalidArgument("null space of an empty matrix".into()));
    }
    let (rows, cols) = m.shape();
    // The thin SVD only returns min(rows, cols) right vectors; zero rows
    // leave the null space and the nonzero spectrum unchanged.
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = SVD::try_new(padded, false, true, f64::EPSILON, SVD_MAX_ITER)
        .ok_or_else(|| Error::Numerical("singular value decomposition did not converge".into()))?;
    let v_t = svd.v_t.expect("requested v_t");
    let sigma_max = svd.singular_values.max();
    let thr = tol.rank_threshold(sigma_max, rows, cols);

    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let null_idx: Vec<usize> = idx
        .into_iter()
        .filter(|&i| sigma_max == 0.0 || svd.singular_values[i] <= thr)
        .collect();

    let mut basis = DMatrix::zeros(cols, null_idx.len());
    for (k, &i) in null_idx.iter().enumerate() {
        basis.set_column(k, &v_t.row(i).transpose());
    }
    Ok(canonical_column_signs(basis))
}

/// Minimum-norm right inverse `Mᵀ (M Mᵀ)⁻¹`, computed from the SVD.
pub fn right_inverse(m: &DMatrix<f64>, tol: &Tolerances) -> Result<DMatrix<f64>> {
    if m.is_empty() {
        return Err(Error::InvalidArgument("right inverse of an empty matrix".into()));
    }
    let (rows, cols) = m.shape();
    if rows > cols {
        return Err(Error::RankDeficient(format!(
            "a {rows}x{cols} matrix has no right inverse"
        )));
    }
    let r = rank_tol(m, tol)?;
    if r < rows {
        return Err(Error::RankDeficient(format!(
            "row rank {r} < {rows}; no right inverse"
        )));
    }
    let svd = SVD::try_new(m.clone(), true, true, f64::EPSILON, SVD_MAX_ITER)
        .ok_or_else(|| Error::Numerical("singular value decomposition did not converge".into()))?;
    let u = svd.u.as_ref().expect("requested u");
    let v_t = svd.v_t.as_ref().expect("requested v_t");
    let sigma_inv = DMatrix::from_diagonal(&svd.singular_values.map(|s| 1.0 / s));
    Ok(v_t.transpose() * sigma_inv * u.transpose())
}

/// Splits `Rⁿ` into an orthonormal basis of `range(b)` and one of its
/// orthogonal complement. Both are returned as column blocks.
///
/// Householder QR of `[b | I]` is used rather than an SVD so that a `b`
/// made of coordinate columns yields coordinate axes (up to sign).
pub fn range_and_complement(b: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let (n, m) = b.shape();
    let mut aug = DMatrix::zeros(n, m + n);
    aug.view_mut((0, 0), (n, m)).copy_from(b);
    aug.view_mut((0, m), (n, n)).fill_with_identity();
    let q = aug.qr().q();
    let q = canonical_column_signs(q);
    let range = q.columns(0, m).into_owned();
    let complement = q.columns(m, n - m).into_owned();
    (range, complement)
}

/// Flips column signs so the largest-magnitude entry of each column is
/// positive. Makes basis output deterministic across equivalent factorizations.
pub fn canonical_column_signs(mut m: DMatrix<f64>) -> DMatrix<f64> {
    for mut col in m.column_iter_mut() {
        let pivot = col
            .iter()
            .copied()
            .fold(0.0_f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if pivot < 0.0 {
            col.neg_mut();
        }
    }
    m
}

/// Random orthonormal `n × k` block (columns), `k <= n`.
pub fn random_orthonormal<R: rand::Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> DMatrix<f64> {
    use rand_distr::{Distribution, StandardNormal};
    let g = DMatrix::from_fn(n, k, |_, _| StandardNormal.sample(rng));
    g.qr().q()
}

/// Eigenvalues of a real square matrix. Complex eigenvalues come out in exact
/// conjugate pairs because a real Schur form is used.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "eigenvalues of a non-square {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or_else(|| Error::Numerical("Schur iteration did not converge".into()))?;
    let mut ev: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(ev)
}

/// An eigenvalue with unit-norm left and right eigenvectors:
/// `M v = λ v` and `wᵀ M = λ wᵀ`.
#[derive(Debug, Clone)]
pub struct EigenTriplet {
    pub value: Complex64,
    pub left: CVector,
    pub right: CVector,
}

/// Full eigen-decomposition of a real square matrix. Each eigenvector is the
/// smallest singular vector of the shifted matrix, so repeated eigenvalues
/// receive (numerically) the same vector.
pub fn eig(m: &DMatrix<f64>) -> Result<Vec<EigenTriplet>> {
    let values = eigenvalues(m)?;
    let mc = to_complex(m);
    let mt = to_complex(&m.transpose());
    values
        .into_iter()
        .map(|value| {
            let right = smallest_right_vector(&shift(&mc, value))?;
            let left = smallest_right_vector(&shift(&mt, value))?;
            Ok(EigenTriplet {
                value,
                left: canonical_phase(left),
                right: canonical_phase(right),
            })
        })
        .collect()
}

fn shift(m: &CMatrix, lambda: Complex64) -> CMatrix {
    let mut s = m.clone();
    for i in 0..s.nrows() {
        s[(i, i)] -= lambda;
    }
    s
}

/// Right singular vector belonging to the smallest singular value.
pub(crate) fn smallest_right_vector(m: &CMatrix) -> Result<CVector> {
    let (rows, cols) = m.shape();
    let padded = if rows < cols {
        let mut p = CMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = SVD::try_new(padded, false, true, f64::EPSILON, SVD_MAX_ITER)
        .ok_or_else(|| Error::Numerical("singular value decomposition did not converge".into()))?;
    let v_t = svd.v_t.expect("requested v_t");
    let i = svd.singular_values.imin();
    // rows of v_t are conj(v_i)ᵀ
    Ok(v_t.row(i).transpose().map(|z| z.conj()))
}

/// Scales a vector by a unit phase so its largest entry is real positive.
fn canonical_phase(v: CVector) -> CVector {
    let pivot = v
        .iter()
        .copied()
        .fold(Complex64::new(0.0, 0.0), |acc, z| if z.norm() > acc.norm() { z } else { acc });
    if pivot.norm() == 0.0 {
        return v;
    }
    let phase = pivot.conj() / pivot.norm();
    let mut out = v.map(|z| z * phase);
    let nrm = out.norm();
    if nrm > 0.0 {
        out /= Complex64::new(nrm, 0.0);
    }
    out
}
