use nalgebra::{Cholesky, DMatrix, Schur};
use num_complex::Complex64;

use super::{eigenvalues, min_singular_value, to_complex, CMatrix, Tolerances};
use crate::error::{Error, Result};

/// Stabilizing solution of `AᵀP + PA − PBR⁻¹BᵀP + Q = 0` and its LQR gain.
#[derive(Debug, Clone)]
pub struct CareSolution {
    pub p: DMatrix<f64>,
    /// `K = R⁻¹BᵀP`
    pub k: DMatrix<f64>,
    /// Frobenius norm of the Riccati residual at `p`.
    pub residual: f64,
    /// Eigenvalues of `A − BK`.
    pub closed_loop: Vec<Complex64>,
}

/// Solves the continuous algebraic Riccati equation through the stable
/// invariant subspace of the Hamiltonian, found by reordering a complex Schur
/// form. Stabilizable pairs with stable uncontrollable modes are handled; the
/// subspace basis simply carries those modes along.
pub fn solve_care(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
    tol: &Tolerances,
) -> Result<CareSolution> {
    let n = a.nrows();
    let k = b.ncols();
    if !a.is_square() || b.nrows() != n || q.shape() != (n, n) || r.shape() != (k, k) {
        return Err(Error::Dimension(format!(
            "CARE expects A n×n, B n×k, Q n×n, R k×k; got A {:?}, B {:?}, Q {:?}, R {:?}",
            a.shape(),
            b.shape(),
            q.shape(),
            r.shape()
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("CARE with an empty state".into()));
    }
    for (name, m) in [("A", a), ("B", b), ("Q", q), ("R", r)] {
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite(name));
        }
    }
    check_symmetric("Q", q)?;
    check_symmetric("R", r)?;

    let g = if k == 0 {
        DMatrix::zeros(n, n)
    } else {
        let r_sym = (r + r.transpose()) * 0.5;
        let chol = Cholesky::new(r_sym)
            .ok_or_else(|| Error::InvalidArgument("R must be positive definite".into()))?;
        b * chol.solve(&b.transpose())
    };

    let mut h = DMatrix::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(a);
    h.view_mut((0, n), (n, n)).copy_from(&(-&g));
    h.view_mut((n, 0), (n, n)).copy_from(&(-q));
    h.view_mut((n, n), (n, n)).copy_from(&(-a.transpose()));
    let h_norm = h.norm();

    let schur = Schur::try_new(to_complex(&h), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("Hamiltonian Schur iteration did not converge".into()))?;
    let (mut z, mut t) = schur.unpack();

    let mut lower = 0.0_f64;
    for j in 0..2 * n {
        for i in (j + 1)..2 * n {
            lower = lower.max(t[(i, j)].norm());
        }
    }
    if lower > 1e-10 * (1.0 + h_norm) {
        return Err(Error::Numerical(
            "complex Schur form of the Hamiltonian is not triangular".into(),
        ));
    }

    let axis_tol = tol.pbh * (1.0 + h_norm);
    let diag: Vec<Complex64> = (0..2 * n).map(|i| t[(i, i)]).collect();
    if let Some(z0) = diag.iter().find(|z| z.re.abs() <= axis_tol) {
        return Err(Error::NoStabilizingSolution(format!(
            "Hamiltonian eigenvalue {z0} lies on the imaginary axis"
        )));
    }
    let stable_count = diag.iter().filter(|z| z.re < 0.0).count();
    if stable_count != n {
        return Err(Error::NoStabilizingSolution(format!(
            "Hamiltonian has {stable_count} stable eigenvalues, expected {n}"
        )));
    }

    reorder_stable_first(&mut t, &mut z);

    let u1 = z.view((0, 0), (n, n)).into_owned();
    let u2 = z.view((n, 0), (n, n)).into_owned();
    if min_singular_value(&u1)? < 1e-10 {
        return Err(Error::NoStabilizingSolution(
            "stable invariant subspace is not a graph; the pair is not stabilizable".into(),
        ));
    }
    // P U1 = U2  <=>  U1ᵀ Pᵀ = U2ᵀ
    let pt = u1
        .transpose()
        .lu()
        .solve(&u2.transpose())
        .ok_or_else(|| Error::NoStabilizingSolution("singular subspace basis".into()))?;
    let pc = pt.transpose();
    let p_norm = pc.norm();
    let imag = pc.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if imag > 1e-6 * (1.0 + p_norm) {
        return Err(Error::Numerical(format!(
            "Riccati solution has a significant imaginary part ({imag:e})"
        )));
    }
    let p = pc.map(|z| z.re);
    let mut p = (&p + p.transpose()) * 0.5;

    let bound = |p: &DMatrix<f64>| tol.care_residual * (1.0 + p.norm());
    let mut residual = care_residual_with_g(a, &g, q, &p);
    for _ in 0..3 {
        if residual <= 1e-3 * bound(&p) {
            break;
        }
        let Some(refined) = newton_refine(a, &g, q, &p) else {
            break;
        };
        let res = care_residual_with_g(a, &g, q, &refined);
        if res >= residual {
            break;
        }
        p = refined;
        residual = res;
    }
    if residual > bound(&p) {
        return Err(Error::Numerical(format!(
            "Riccati residual {residual:e} exceeds {:e}",
            bound(&p)
        )));
    }

    let k_gain = if k == 0 {
        DMatrix::zeros(0, n)
    } else {
        let r_sym = (r + r.transpose()) * 0.5;
        let chol = Cholesky::new(r_sym).expect("checked above");
        chol.solve(&(b.transpose() * &p))
    };
    let closed_loop = eigenvalues(&(a - b * &k_gain))?;
    if let Some(bad) = closed_loop.iter().find(|z| z.re >= 0.0) {
        return Err(Error::NoStabilizingSolution(format!(
            "closed loop keeps eigenvalue {bad} outside the open left half plane"
        )));
    }

    Ok(CareSolution {
        p,
        k: k_gain,
        residual,
        closed_loop,
    })
}

/// Frobenius norm of `AᵀP + PA − PBR⁻¹BᵀP + Q`.
pub fn care_residual(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
    p: &DMatrix<f64>,
) -> Result<f64> {
    let r_inv = r
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidArgument("R is singular".into()))?;
    let g = b * r_inv * b.transpose();
    Ok(care_residual_with_g(a, &g, q, p))
}

fn care_residual_with_g(a: &DMatrix<f64>, g: &DMatrix<f64>, q: &DMatrix<f64>, p: &DMatrix<f64>) -> f64 {
    (a.transpose() * p + p * a - p * g * p + q).norm()
}

fn check_symmetric(name: &str, m: &DMatrix<f64>) -> Result<()> {
    let asym = (m - m.transpose()).amax();
    if asym > 1e-10 * (1.0 + m.amax()) {
        return Err(Error::InvalidArgument(format!("{name} must be symmetric")));
    }
    Ok(())
}

/// Swaps adjacent diagonal entries of the upper-triangular `t` with Givens
/// rotations until every eigenvalue with negative real part precedes the
/// others. `z` accumulates the rotations so `H = Z T Zᴴ` keeps holding.
fn reorder_stable_first(t: &mut CMatrix, z: &mut CMatrix) {
    let dim = t.nrows();
    loop {
        let mut swapped = false;
        for k in 0..dim.saturating_sub(1) {
            if t[(k, k)].re >= 0.0 && t[(k + 1, k + 1)].re < 0.0 {
                swap_adjacent(t, z, k);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
}

fn swap_adjacent(t: &mut CMatrix, z: &mut CMatrix, k: usize) {
    let dim = t.nrows();
    let a = t[(k, k)];
    let b = t[(k + 1, k + 1)];
    let c = t[(k, k + 1)];
    // eigenvector of [[a, c], [0, b]] for b
    let x0 = c;
    let x1 = b - a;
    let nrm = (x0.norm_sqr() + x1.norm_sqr()).sqrt();
    if nrm == 0.0 {
        return;
    }
    let g1 = x0 / nrm;
    let g2 = x1 / nrm;
    // G = [[g1, -conj(g2)], [g2, conj(g1)]] is unitary with first column x/|x|.
    let g = [[g1, -g2.conj()], [g2, g1.conj()]];

    // T <- Gᴴ T on rows k, k+1
    for j in 0..dim {
        let r0 = t[(k, j)];
        let r1 = t[(k + 1, j)];
        t[(k, j)] = g[0][0].conj() * r0 + g[1][0].conj() * r1;
        t[(k + 1, j)] = g[0][1].conj() * r0 + g[1][1].conj() * r1;
    }
    // T <- T G and Z <- Z G on columns k, k+1
    for m in [&mut *t, &mut *z] {
        for i in 0..dim {
            let c0 = m[(i, k)];
            let c1 = m[(i, k + 1)];
            m[(i, k)] = c0 * g[0][0] + c1 * g[1][0];
            m[(i, k + 1)] = c0 * g[0][1] + c1 * g[1][1];
        }
    }
    t[(k + 1, k)] = Complex64::new(0.0, 0.0);
    t[(k, k)] = b;
    t[(k + 1, k + 1)] = a;
}

/// One Newton step: solve `FᵀX + XF = −Res(P)` with `F = A − GP`.
fn newton_refine(a: &DMatrix<f64>, g: &DMatrix<f64>, q: &DMatrix<f64>, p: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let f = a - g * p;
    let res = a.transpose() * p + p * a - p * g * p + q;
    let delta = solve_lyapunov(&f, &(-res))?;
    let next = p + delta;
    Some((&next + next.transpose()) * 0.5)
}

/// Solves `FᵀX + XF = W` by Bartels–Stewart on the complex Schur form of `F`.
/// Returns `None` when `F` and `−F` share an eigenvalue.
pub(crate) fn solve_lyapunov(f: &DMatrix<f64>, w: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = f.nrows();
    let schur = Schur::try_new(to_complex(f), f64::EPSILON, 10_000)?;
    let (zs, s) = schur.unpack();
    // Sᴴ Y + Y S = Zᴴ W Z,  X = Z Y Zᴴ
    let rhs = zs.adjoint() * to_complex(w) * &zs;
    let sh = s.adjoint();
    let mut y = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut col = rhs.column(j).into_owned();
        for kk in 0..j {
            let skj = s[(kk, j)];
            for i in 0..n {
                col[i] -= y[(i, kk)] * skj;
            }
        }
        // (Sᴴ + s_jj I) y_j = col, lower triangular
        let sjj = s[(j, j)];
        for i in 0..n {
            let mut acc = col[i];
            for kk in 0..i {
                acc -= sh[(i, kk)] * y[(kk, j)];
            }
            let d = sh[(i, i)] + sjj;
            if d.norm() < 1e-14 {
                return None;
            }
            y[(i, j)] = acc / d;
        }
    }
    let x = &zs * y * zs.adjoint();
    Some(x.map(|z| z.re))
}
