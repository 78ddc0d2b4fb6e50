use approx::assert_relative_eq;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use squareup::numkit::{
    eig, null_basis, random_orthonormal, rank_tol, right_inverse, solve_care, to_complex, Tolerances,
};

fn randn(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.sample::<f64, _>(StandardNormal))
}

fn dims() -> impl Strategy<Value = (usize, usize, u64)> {
    (1usize..6, 0usize..4, any::<u64>()).prop_map(|(r, extra, seed)| (r, r + extra, seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn right_inverse_is_a_right_inverse((r, c, seed) in dims()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = randn(&mut rng, r, c);
        let x = right_inverse(&m, &Tolerances::default()).unwrap();
        let err = (&m * &x - DMatrix::<f64>::identity(r, r)).amax();
        prop_assert!(err < 1e-9, "|MX - I| = {err}");
        // Minimum norm: X lies in the row space of M.
        let proj = m.transpose() * (&m * m.transpose()).try_inverse().unwrap() * &m;
        prop_assert!((&proj * &x - &x).amax() < 1e-8);
    }

    #[test]
    fn null_basis_is_orthonormal_and_complete((r, c, seed) in dims(), k in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Rank r - k by construction.
        let rk = r - k.min(r - 1);
        let m = randn(&mut rng, r, rk) * randn(&mut rng, rk, c);
        let tol = Tolerances::default();
        let nb = null_basis(&m, &tol).unwrap();
        let rank = rank_tol(&m, &tol).unwrap();
        prop_assert_eq!(nb.ncols() + rank, c);
        prop_assert!((&m * &nb).amax() < 1e-9 * (1.0 + m.norm()));
        let gram = nb.transpose() * &nb;
        prop_assert!((gram - DMatrix::<f64>::identity(nb.ncols(), nb.ncols())).amax() < 1e-10);
    }

    #[test]
    fn rank_is_invariant_under_orthogonal_mixing(seed in any::<u64>(), n in 2usize..7, r in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = r.min(n);
        let m = randn(&mut rng, n, r) * randn(&mut rng, r, n);
        let u = random_orthonormal(&mut rng, n, n);
        let v = random_orthonormal(&mut rng, n, n);
        let tol = Tolerances::default();
        prop_assert_eq!(rank_tol(&m, &tol).unwrap(), r);
        prop_assert_eq!(rank_tol(&(&u * &m * &v), &tol).unwrap(), r);
    }
}

#[test]
fn eigentriplets_satisfy_both_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let n = rng.random_range(1..=7);
        let a = randn(&mut rng, n, n);
        let ac = to_complex(&a);
        for t in eig(&a).unwrap() {
            let right = &ac * &t.right - &t.right * t.value;
            let left = t.left.transpose() * &ac - t.left.transpose() * t.value;
            assert!(right.norm() < 1e-8 * (1.0 + a.norm()), "{}", right.norm());
            assert!(left.norm() < 1e-8 * (1.0 + a.norm()), "{}", left.norm());
            assert_relative_eq!(t.right.norm(), 1.0, epsilon = 1e-10);
        }
    }
}

#[test]
fn care_solutions_are_symmetric_and_positive() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let tol = Tolerances::default();
    for _ in 0..100 {
        let n = rng.random_range(1..=8);
        let k = rng.random_range(1..=n);
        let a = randn(&mut rng, n, n);
        let b = randn(&mut rng, n, k);
        let g = randn(&mut rng, n, n);
        let q = &g * g.transpose() + DMatrix::identity(n, n) * 0.1;
        let h = randn(&mut rng, k, k);
        let r = &h * h.transpose() + DMatrix::identity(k, k);
        let sol = solve_care(&a, &b, &q, &r, &tol).unwrap();
        assert!((&sol.p - sol.p.transpose()).amax() < 1e-12 * (1.0 + sol.p.norm()));
        let min_eig = sol.p.clone().symmetric_eigenvalues().min();
        assert!(min_eig > 0.0, "P not positive definite: {min_eig}");
        let k_expected = r.clone().try_inverse().unwrap() * b.transpose() * &sol.p;
        assert!((&sol.k - k_expected).amax() < 1e-8 * (1.0 + sol.k.norm()));
        assert!(sol.closed_loop.iter().all(|z| z.re < 0.0));
    }
}
