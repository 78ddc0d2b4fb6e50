//! Seeded plant generators and a brute-force zero locator used as a test
//! oracle.
//!
//! Zero planting builds the plant directly in the coordinates where
//! `B = [B1; 0]`. For a planted zero `s₀` with left eigenvector `w₀` of the
//! pseudo pair matrix `Ã22`, the block `A21` is chosen so that `w₀ᵀA21` lies in
//! the row space of `C11`. That makes `w₀ᵀBps2 = 0` (a fixed mode) while
//! leaving `(A22, A21)` controllable, so `s₀` is a genuine transmission zero
//! rather than an uncontrollable mode.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{eigenvalues, random_orthonormal, rank_tol, right_inverse, Tolerances};
use crate::sysmodel::{check_assumptions, match_zeros, rosenbrock, StateSpace};

const MAX_ATTEMPTS: u64 = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub seed: u64,
    /// Conjugate-closed list of zeros to plant.
    #[serde(default)]
    pub planted_zeros: Vec<Complex64>,
    /// Make `A` Hurwitz.
    #[serde(default)]
    pub stable_a: bool,
}

impl GenSpec {
    pub fn new(n: usize, m: usize, p: usize, seed: u64) -> Self {
        Self {
            n,
            m,
            p,
            seed,
            planted_zeros: Vec::new(),
            stable_a: false,
        }
    }

    pub fn with_zeros(mut self, zeros: impl IntoIterator<Item = Complex64>) -> Self {
        self.planted_zeros = zeros.into_iter().collect();
        self
    }

    pub fn with_stable_a(mut self, stable: bool) -> Self {
        self.stable_a = stable;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n > self.m && self.m > self.p && self.p >= 1) {
            return Err(Error::InvalidArgument(format!(
                "generator needs n > m > p >= 1, got n = {}, m = {}, p = {}",
                self.n, self.m, self.p
            )));
        }
        if self.planted_zeros.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("planted zeros must be finite".into()));
        }
        let conj: Vec<Complex64> = self.planted_zeros.iter().map(|z| z.conj()).collect();
        if !match_zeros(&self.planted_zeros, &conj, 1e-12).is_perfect() {
            return Err(Error::InvalidArgument(
                "planted zeros must be closed under conjugation".into(),
            ));
        }
        if self.planted_zeros.len() > self.n - self.m {
            return Err(Error::InvalidArgument(format!(
                "at most n − m = {} zeros can be planted, got {}",
                self.n - self.m,
                self.planted_zeros.len()
            )));
        }
        Ok(())
    }
}

/// Closes a list of zeros under conjugation by appending missing partners.
pub fn conjugate_closure(zeros: &[Complex64]) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = Vec::with_capacity(zeros.len() * 2);
    for &z in zeros {
        out.push(z);
    }
    for &z in zeros {
        if z.im != 0.0 {
            let have = out.iter().filter(|w| **w == z.conj()).count();
            let need = zeros.iter().filter(|w| **w == z).count();
            if have < need {
                out.push(z.conj());
            }
        }
    }
    out
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        let x: f64 = StandardNormal.sample(rng);
        x * scale
    })
}

fn shift_hurwitz(a: &mut DMatrix<f64>) -> Result<()> {
    let max_re = eigenvalues(a)?
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if max_re > -0.5 {
        let shift = max_re + 0.5;
        for i in 0..a.nrows() {
            a[(i, i)] -= shift;
        }
    }
    Ok(())
}

/// A random fat plant satisfying A1..A5, deterministic in `spec.seed`.
/// The planted zero list must be empty; see [`plant_zero`].
pub fn random_system(spec: &GenSpec) -> Result<StateSpace> {
    spec.validate()?;
    if !spec.planted_zeros.is_empty() {
        return Err(Error::InvalidArgument(
            "random_system does not plant zeros; use plant_zero".into(),
        ));
    }
    let tol = Tolerances::default();
    let (n, m, p) = (spec.n, spec.m, spec.p);
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(attempt));
        let mut a = gaussian(&mut rng, n, n, 1.0 / (n as f64).sqrt());
        let b = gaussian(&mut rng, n, m, 1.0);
        let c = gaussian(&mut rng, p, n, 1.0);
        if spec.stable_a {
            shift_hurwitz(&mut a)?;
        }
        let sys = StateSpace::new(a, b, c)?;
        if check_assumptions(&sys, &tol)?.structural_pass() {
            return Ok(sys);
        }
    }
    Err(Error::Generation(format!(
        "no system passing A1..A5 after {MAX_ATTEMPTS} attempts"
    )))
}

/// Real block with the planted eigenvalues: `[s]` for a real zero and
/// `[[a, b], [−b, a]]` for a pair `a ± bi`.
fn planted_block(zeros: &[Complex64]) -> DMatrix<f64> {
    let mut blocks: Vec<DMatrix<f64>> = Vec::new();
    let mut taken = vec![false; zeros.len()];
    for i in 0..zeros.len() {
        if taken[i] {
            continue;
        }
        taken[i] = true;
        let z = zeros[i];
        if z.im == 0.0 {
            blocks.push(DMatrix::from_element(1, 1, z.re));
        } else {
            if let Some(j) = (0..zeros.len()).find(|&j| !taken[j] && zeros[j] == z.conj()) {
                taken[j] = true;
            }
            let b = z.im.abs();
            blocks.push(DMatrix::from_row_slice(2, 2, &[z.re, b, -b, z.re]));
        }
    }
    let dim = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(dim, dim);
    let mut k = 0;
    for b in blocks {
        let d = b.nrows();
        out.view_mut((k, k), (d, d)).copy_from(&b);
        k += d;
    }
    out
}

/// A plant whose transmission zeros include every planted zero, certified by
/// `σ_min(R(s₀)) < pbh` and by the zero finder. Structural assumptions A1..A5
/// hold.
pub fn plant_zero(spec: &GenSpec) -> Result<StateSpace> {
    spec.validate()?;
    if spec.planted_zeros.is_empty() {
        return Err(Error::InvalidArgument("plant_zero needs at least one zero".into()));
    }
    let tol = Tolerances::default();
    let (n, m, p) = (spec.n, spec.m, spec.p);
    let nz = n - m;
    let lambda = planted_block(&spec.planted_zeros);
    let r = lambda.nrows();
    let scale = 1.0 / (n as f64).sqrt();

    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(attempt));

        let b1 = gaussian(&mut rng, m, m, 1.0);
        let c11 = gaussian(&mut rng, p, m, 1.0);
        let c12 = gaussian(&mut rng, p, nz, 1.0);
        let mut a11 = gaussian(&mut rng, m, m, scale);
        let a12 = gaussian(&mut rng, m, nz, scale);
        if rank_tol(&b1, &tol)? < m || rank_tol(&c11, &tol)? < p {
            continue;
        }
        let c11_pinv = right_inverse(&c11, &tol)?;

        // Ã22 = S [[Λ, 0], [X, Z]] Sᵀ, so Wᵀ Ã22 = Λ Wᵀ with W = S[:, ..r]
        let s = random_orthonormal(&mut rng, nz, nz);
        let w = s.columns(0, r).into_owned();
        let mut core = DMatrix::zeros(nz, nz);
        core.view_mut((0, 0), (r, r)).copy_from(&lambda);
        core.view_mut((r, 0), (nz - r, r))
            .copy_from(&gaussian(&mut rng, nz - r, r, scale));
        let mut z = gaussian(&mut rng, nz - r, nz - r, scale);
        if spec.stable_a {
            for i in 0..m {
                a11[(i, i)] -= 3.0;
            }
            for i in 0..nz - r {
                z[(i, i)] -= 3.0;
            }
        }
        core.view_mut((r, r), (nz - r, nz - r)).copy_from(&z);
        let a22_tilde = &s * core * s.transpose();

        // Wᵀ A21 = Yᵀ C11 keeps Wᵀ Bps2 = 0 without making W uncontrollable
        let proj = DMatrix::<f64>::identity(nz, nz) - &w * w.transpose();
        let y = gaussian(&mut rng, p, r, 1.0);
        let a21 = proj * gaussian(&mut rng, nz, m, scale) + &w * y.transpose() * &c11;
        let a22 = a22_tilde + &a21 * &c11_pinv * &c12;

        let mut a_bar = DMatrix::zeros(n, n);
        a_bar.view_mut((0, 0), (m, m)).copy_from(&a11);
        a_bar.view_mut((0, m), (m, nz)).copy_from(&a12);
        a_bar.view_mut((m, 0), (nz, m)).copy_from(&a21);
        a_bar.view_mut((m, m), (nz, nz)).copy_from(&a22);
        let mut b_bar = DMatrix::zeros(n, m);
        b_bar.view_mut((0, 0), (m, m)).copy_from(&b1);
        let mut c_bar = DMatrix::zeros(p, n);
        c_bar.view_mut((0, 0), (p, m)).copy_from(&c11);
        c_bar.view_mut((0, m), (p, nz)).copy_from(&c12);

        let t = random_orthonormal(&mut rng, n, n);
        let a = t.transpose() * a_bar * &t;
        let b = t.transpose() * b_bar;
        let c = c_bar * &t;
        let sys = StateSpace::new(a, b, c)?;

        if spec.stable_a && eigenvalues(sys.a())?.iter().any(|z| z.re >= 0.0) {
            continue;
        }
        let report = check_assumptions(&sys, &tol)?;
        if !report.structural_pass() {
            continue;
        }
        let certified = spec
            .planted_zeros
            .iter()
            .map(|&z0| certificate(&sys, z0))
            .collect::<Result<Vec<f64>>>()?
            .iter()
            .all(|&c| c < tol.pbh);
        let found = match_zeros(&spec.planted_zeros, &report.zeros.transmission, tol.zero_match)
            .unmatched_left
            .is_empty();
        if certified && found {
            return Ok(sys);
        }
    }
    Err(Error::Generation(format!(
        "could not certify planted zeros after {MAX_ATTEMPTS} attempts"
    )))
}

/// Dispatches to [`plant_zero`] or [`random_system`].
pub fn generate(spec: &GenSpec) -> Result<StateSpace> {
    if spec.planted_zeros.is_empty() {
        random_system(spec)
    } else {
        plant_zero(spec)
    }
}

/// `σ_min(R(s₀))`: the rank-drop certificate of a zero.
pub fn certificate(sys: &StateSpace, s0: Complex64) -> Result<f64> {
    crate::numkit::min_singular_value(&rosenbrock(sys, s0))
}

/// Axis-aligned rectangle in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Region {
    pub fn square(half_width: f64) -> Self {
        Self {
            re_min: -half_width,
            re_max: half_width,
            im_min: -half_width,
            im_max: half_width,
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }
}

impl Default for Region {
    fn default() -> Self {
        Self::square(10.0)
    }
}

/// Smallest singular triplet of `R(s)` and the derivative `uᴴ (∂R/∂s) v`.
fn sigma_and_slope(sys: &StateSpace, s: Complex64) -> Result<(f64, Complex64)> {
    let r = rosenbrock(sys, s);
    let svd = nalgebra::SVD::try_new(r, true, true, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("singular value decomposition did not converge".into()))?;
    let i = svd.singular_values.imin();
    let sigma = svd.singular_values[i];
    let u = svd.u.as_ref().expect("requested u").column(i).into_owned();
    let v_t = svd.v_t.as_ref().expect("requested v_t");
    let n = sys.n();
    // ∂R/∂s = diag(I_n, 0); v_i = conj(row i of v_t)
    let mut g = Complex64::new(0.0, 0.0);
    for k in 0..n {
        g += u[k].conj() * v_t[(i, k)].conj();
    }
    Ok((sigma, g))
}

/// Newton iteration on the cone `σ_min(R(s)) ≈ c·|s − z|`.
fn refine(sys: &StateSpace, start: Complex64) -> Result<(Complex64, f64)> {
    let mut s = start;
    let (mut sigma, mut g) = sigma_and_slope(sys, s)?;
    for _ in 0..60 {
        if sigma == 0.0 || g.norm() == 0.0 {
            break;
        }
        let step = g.conj() * (sigma / g.norm_sqr());
        let mut damping = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let cand = s - step * damping;
            let (cs, cg) = sigma_and_slope(sys, cand)?;
            if cs < sigma {
                s = cand;
                sigma = cs;
                g = cg;
                accepted = true;
                break;
            }
            damping *= 0.5;
        }
        if !accepted || (step * damping).norm() < 1e-15 * (1.0 + s.norm()) {
            break;
        }
    }
    Ok((s, sigma))
}

/// Brute-force zero locator: evaluates `σ_min(R(s))` on a `grid.0 × grid.1`
/// lattice over `region`, refines every lattice local minimum, and reports
/// those that end below `pbh`. Zeros outside `region` are invisible.
///
/// Plant data is real, so `σ_min(R(s̄)) = σ_min(R(s))` and only the upper
/// half of the region (mirrored) is evaluated when the region is symmetric.
pub fn zero_sweep_oracle(
    sys: &StateSpace,
    region: &Region,
    grid: (usize, usize),
    tol: &Tolerances,
) -> Result<Vec<Complex64>> {
    let (nx, ny) = grid;
    if nx < 50 || ny < 50 {
        return Err(Error::InvalidArgument(format!(
            "sweep grid must be at least 50x50, got {nx}x{ny}"
        )));
    }
    if !(region.re_max > region.re_min && region.im_max > region.im_min) {
        return Err(Error::InvalidArgument("empty sweep region".into()));
    }
    let hx = (region.re_max - region.re_min) / (nx - 1) as f64;
    let hy = (region.im_max - region.im_min) / (ny - 1) as f64;
    let point = |i: usize, j: usize| {
        Complex64::new(region.re_min + i as f64 * hx, region.im_min + j as f64 * hy)
    };
    let symmetric = region.im_min == -region.im_max;

    let rows: Vec<usize> = (0..ny).collect();
    let values: Vec<Vec<f64>> = rows
        .par_iter()
        .map(|&j| {
            if symmetric && j < ny / 2 {
                return Ok(Vec::new());
            }
            (0..nx)
                .map(|i| crate::numkit::min_singular_value(&rosenbrock(sys, point(i, j))))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let value = |i: usize, j: usize| -> f64 {
        let jj = if symmetric && j < ny / 2 { ny - 1 - j } else { j };
        values[jj][i]
    };

    let mut starts = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let v = value(i, j);
            let mut is_min = true;
            'nb: for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if ii < 0 || jj < 0 || ii >= nx as i64 || jj >= ny as i64 {
                        continue;
                    }
                    if value(ii as usize, jj as usize) < v {
                        is_min = false;
                        break 'nb;
                    }
                }
            }
            if is_min {
                starts.push(point(i, j));
            }
        }
    }

    let refined: Vec<(Complex64, f64)> = starts
        .par_iter()
        .map(|&s| refine(sys, s))
        .collect::<Result<Vec<_>>>()?;

    let mut found: Vec<Complex64> = Vec::new();
    let merge = 10.0 * tol.zero_match;
    for (mut z, sigma) in refined {
        if sigma >= tol.pbh || !region.contains(z) {
            continue;
        }
        if z.im.abs() <= merge {
            z.im = 0.0;
        }
        if found.iter().all(|f| (f - z).norm() > merge) {
            found.push(z);
        }
    }
    crate::sysmodel::sort_zeros(&mut found);
    Ok(found)
}
