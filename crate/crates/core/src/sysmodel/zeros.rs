use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{rosenbrock, StateSpace};
use crate::error::{Error, Result};
use crate::numkit::{
    eigenvalues, min_singular_value, random_orthonormal, rank_tol, singular_values, Tolerances,
};

/// Generalized eigenvalues beyond this modulus are treated as infinite.
pub const INFINITE_ZERO_CUTOFF: f64 = 1e8;

/// Seed of the internal compression RNG. Fixed so zero computation is a
/// deterministic function of the system.
const COMPRESSION_SEED: u64 = 0x5eed_2e80;

/// Zeros of a system, classified.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ZeroSet {
    /// Uncontrollable modes.
    pub input_decoupling: Vec<Complex64>,
    /// Unobservable modes.
    pub output_decoupling: Vec<Complex64>,
    /// Points where the Rosenbrock matrix loses normal rank.
    pub invariant: Vec<Complex64>,
    /// Invariant zeros that are not decoupling zeros.
    pub transmission: Vec<Complex64>,
    /// The Rosenbrock matrix is rank deficient for every `s`.
    pub degenerate: bool,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl ZeroSet {
    /// True when every transmission zero is strictly inside the left half
    /// plane. A degenerate system is never reported minimum phase.
    pub fn is_minimum_phase(&self, tol: &Tolerances) -> bool {
        !self.degenerate && self.transmission.iter().all(|&z| tol.is_strictly_stable(z))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantZeros {
    pub zeros: Vec<Complex64>,
    pub degenerate: bool,
}

/// Result of greedy nearest-neighbour pairing of two zero lists.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ZeroMatching {
    /// `(index in left, index in right, distance)`
    pub pairs: Vec<(usize, usize, f64)>,
    pub unmatched_left: Vec<usize>,
    pub unmatched_right: Vec<usize>,
    /// Number of elements that had more than one candidate within tolerance.
    pub ambiguous: usize,
}

impl ZeroMatching {
    pub fn is_perfect(&self) -> bool {
        self.unmatched_left.is_empty() && self.unmatched_right.is_empty()
    }
}

/// Pairs closest elements first; each element is used at most once.
pub fn match_zeros(left: &[Complex64], right: &[Complex64], tolerance: f64) -> ZeroMatching {
    let mut candidates = Vec::new();
    let mut per_left = vec![0usize; left.len()];
    for (i, a) in left.iter().enumerate() {
        for (j, b) in right.iter().enumerate() {
            let d = (a - b).norm();
            if d <= tolerance {
                candidates.push((i, j, d));
                per_left[i] += 1;
            }
        }
    }
    candidates.sort_by(|x, y| x.2.total_cmp(&y.2).then(x.0.cmp(&y.0)).then(x.1.cmp(&y.1)));
    let mut used_l = vec![false; left.len()];
    let mut used_r = vec![false; right.len()];
    let mut pairs = Vec::new();
    for (i, j, d) in candidates {
        if !used_l[i] && !used_r[j] {
            used_l[i] = true;
            used_r[j] = true;
            pairs.push((i, j, d));
        }
    }
    ZeroMatching {
        pairs,
        unmatched_left: (0..left.len()).filter(|&i| !used_l[i]).collect(),
        unmatched_right: (0..right.len()).filter(|&j| !used_r[j]).collect(),
        ambiguous: per_left.iter().filter(|&&c| c > 1).count(),
    }
}

/// Groups eigenvalues closer than `tolerance` and returns `(mean, count)`.
fn cluster(values: &[Complex64], tolerance: f64) -> Vec<(Complex64, usize)> {
    let mut used = vec![false; values.len()];
    let mut out = Vec::new();
    for i in 0..values.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let mut members = vec![values[i]];
        for j in (i + 1)..values.len() {
            if !used[j] && (values[j] - values[i]).norm() <= tolerance {
                used[j] = true;
                members.push(values[j]);
            }
        }
        let mut mean = members.iter().sum::<Complex64>() / members.len() as f64;
        if members.iter().all(|z| z.im == 0.0) {
            mean.im = 0.0;
        }
        out.push((mean, members.len()));
    }
    out
}

/// Eigenvalues `λ` of `A` for which `pencil(λ)` has a singular value below
/// `pbh`. A cluster of `k` equal eigenvalues contributes at most `k` entries
/// and at most the observed rank deficiency.
fn pbh_modes<F>(sys: &StateSpace, tol: &Tolerances, pencil: F) -> Result<Vec<Complex64>>
where
    F: Fn(Complex64) -> crate::numkit::CMatrix,
{
    let n = sys.n();
    let mut out = Vec::new();
    for (lambda, multiplicity) in cluster(&eigenvalues(sys.a())?, tol.zero_match) {
        let sv = singular_values(&pencil(lambda))?;
        let rank = sv.iter().filter(|&&s| s >= tol.pbh).count();
        let deficiency = n.saturating_sub(rank).min(multiplicity);
        out.extend(std::iter::repeat_n(lambda, deficiency));
    }
    Ok(out)
}

/// Uncontrollable modes: eigenvalues where `[λI − A, −B]` drops rank.
pub fn input_decoupling_zeros(sys: &StateSpace, tol: &Tolerances) -> Result<Vec<Complex64>> {
    let n = sys.n();
    pbh_modes(sys, tol, |lambda| {
        rosenbrock(sys, lambda).view((0, 0), (n, n + sys.m())).into_owned()
    })
}

/// Unobservable modes: eigenvalues where `[λI − A; C]` drops rank.
pub fn output_decoupling_zeros(sys: &StateSpace, tol: &Tolerances) -> Result<Vec<Complex64>> {
    let n = sys.n();
    pbh_modes(sys, tol, |lambda| {
        rosenbrock(sys, lambda).view((0, 0), (n + sys.p(), n)).into_owned()
    })
}

/// Normal rank of the Rosenbrock pencil, sampled at random complex points.
pub(crate) fn normal_rank(sys: &StateSpace, tol: &Tolerances, rng: &mut impl Rng) -> Result<usize> {
    let scale = 1.0 + sys.a().norm();
    let mut best = 0;
    for _ in 0..3 {
        let s = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale;
        best = best.max(rank_tol(&rosenbrock(sys, s), tol)?);
    }
    Ok(best)
}

/// Finite invariant zeros: the points where the Rosenbrock matrix loses
/// normal rank.
///
/// The rectangular pencil is squared twice with independent random orthonormal
/// compressions of its longer side (inputs for fat systems, outputs for tall
/// ones). Each square pencil's finite generalized eigenvalues are computed;
/// compression can only add spurious eigenvalues, never remove true zeros, so
/// values found by both compressions that also pass the
/// `σ_min(R(s₀)) < pbh` certificate are kept.
pub fn invariant_zeros(sys: &StateSpace, tol: &Tolerances) -> Result<InvariantZeros> {
    let (n, m, p) = (sys.n(), sys.m(), sys.p());
    let mut rng = ChaCha8Rng::seed_from_u64(COMPRESSION_SEED);

    if normal_rank(sys, tol, &mut rng)? < (n + m).min(n + p) {
        return Ok(InvariantZeros {
            zeros: Vec::new(),
            degenerate: true,
        });
    }

    let first = compressed_pencil_zeros(sys, &mut rng)?;
    let second = compressed_pencil_zeros(sys, &mut rng)?;
    let matching = match_zeros(&first, &second, tol.zero_match);

    let mut zeros = Vec::with_capacity(matching.pairs.len());
    for &(i, _, _) in &matching.pairs {
        let z = first[i];
        if min_singular_value(&rosenbrock(sys, z))? < tol.pbh {
            zeros.push(z);
        }
    }
    sort_zeros(&mut zeros);
    Ok(InvariantZeros {
        zeros,
        degenerate: false,
    })
}

pub fn sort_zeros(z: &mut [Complex64]) {
    z.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Finite eigenvalues of one randomly compressed square pencil.
fn compressed_pencil_zeros(sys: &StateSpace, rng: &mut impl Rng) -> Result<Vec<Complex64>> {
    let (m, p) = (sys.m(), sys.p());
    let (b, c) = if m > p {
        let v = random_orthonormal(rng, m, p);
        (sys.b() * v, sys.c().clone())
    } else if p > m {
        let u = random_orthonormal(rng, p, m);
        (sys.b().clone(), u.transpose() * sys.c())
    } else {
        (sys.b().clone(), sys.c().clone())
    };
    square_pencil_zeros(sys.a(), &b, &c, rng)
}

/// Finite generalized eigenvalues of `sE − F` with `E = diag(I, 0)` and
/// `F = [[A, B], [−C, 0]]` (B and C square-compatible).
///
/// Uses the spectral transformation `(F − σE)⁻¹E`: its nonzero eigenvalues are
/// `1/(λ − σ)` and the infinite eigenvalues map to zero. The last columns of
/// `E` vanish, so only the leading `n × n` block of `(F − σE)⁻¹` is needed.
fn square_pencil_zeros(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    rng: &mut impl Rng,
) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    let k = b.ncols();
    debug_assert_eq!(c.nrows(), k);
    let scale = 1.0 + a.norm() / (n as f64).sqrt();

    for _ in 0..16 {
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let sigma = sign * scale * rng.random_range(0.3..1.7);
        let mut f = DMatrix::zeros(n + k, n + k);
        f.view_mut((0, 0), (n, n)).copy_from(a);
        for i in 0..n {
            f[(i, i)] -= sigma;
        }
        f.view_mut((0, n), (n, k)).copy_from(b);
        f.view_mut((n, 0), (k, n)).copy_from(&(-c));

        let sv = singular_values(&f)?;
        if sv[0] == 0.0 || sv[sv.len() - 1] / sv[0] < 1e-11 {
            continue;
        }
        let inv = f
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::Numerical("shifted pencil is singular".into()))?;
        let block = inv.view((0, 0), (n, n)).into_owned();
        let mut out = Vec::new();
        for mu in eigenvalues(&block)? {
            if mu.norm() == 0.0 {
                continue;
            }
            let lambda = Complex64::new(sigma, 0.0) + mu.inv();
            if lambda.norm() <= INFINITE_ZERO_CUTOFF {
                out.push(lambda);
            }
        }
        return Ok(out);
    }
    Err(Error::Numerical(
        "could not find a regular shift for the compressed pencil".into(),
    ))
}

/// Full zero classification. Transmission zeros are the invariant zeros left
/// after removing the decoupling zeros (each mode removed once even when it is
/// both uncontrollable and unobservable).
pub fn transmission_zeros(sys: &StateSpace, tol: &Tolerances) -> Result<ZeroSet> {
    let input_decoupling = input_decoupling_zeros(sys, tol)?;
    let output_decoupling = output_decoupling_zeros(sys, tol)?;
    let InvariantZeros { zeros: invariant, degenerate } = invariant_zeros(sys, tol)?;
    let mut warnings = Vec::new();

    if degenerate {
        warnings.push(
            "system is degenerate: the Rosenbrock matrix is rank deficient for every s; \
             transmission zeros are undefined"
                .to_string(),
        );
        return Ok(ZeroSet {
            input_decoupling,
            output_decoupling,
            invariant,
            transmission: Vec::new(),
            degenerate,
            warnings,
        });
    }

    // union of decoupling zeros, counting modes that are both only once
    let both = match_zeros(&input_decoupling, &output_decoupling, tol.zero_match);
    let mut decoupling = input_decoupling.clone();
    decoupling.extend(both.unmatched_right.iter().map(|&j| output_decoupling[j]));

    let removal = match_zeros(&invariant, &decoupling, tol.zero_match);
    if removal.ambiguous > 0 || both.ambiguous > 0 {
        warnings.push(format!(
            "{} zero(s) had several candidates within the matching tolerance; \
             greedy nearest pairing was used",
            removal.ambiguous + both.ambiguous
        ));
    }
    let transmission: Vec<Complex64> = removal.unmatched_left.iter().map(|&i| invariant[i]).collect();

    Ok(ZeroSet {
        input_decoupling,
        output_decoupling,
        invariant,
        transmission,
        degenerate,
        warnings,
    })
}
