use num_complex::Complex64;

use squareup::genbench::{certificate, conjugate_closure, generate, GenSpec};
use squareup::numkit::{eigenvalues, Tolerances};
use squareup::sysmodel::check_assumptions;

#[test]
fn same_spec_same_system() {
    let spec = GenSpec::new(7, 4, 2, 99).with_zeros([Complex64::new(-1.5, 0.0)]);
    assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
    let other = GenSpec { seed: 100, ..spec.clone() };
    assert_ne!(generate(&spec).unwrap(), generate(&other).unwrap());
}

#[test]
fn planted_zeros_are_certified() {
    let zs = conjugate_closure(&[Complex64::new(-0.7, 1.2), Complex64::new(-2.0, 0.0)]);
    assert_eq!(zs.len(), 3);
    for seed in 0..20 {
        let spec = GenSpec::new(8, 4, 3, seed).with_zeros(zs.clone());
        let sys = generate(&spec).unwrap();
        for z in &zs {
            assert!(certificate(&sys, *z).unwrap() < 1e-9);
        }
        // A point away from every zero keeps full rank.
        assert!(certificate(&sys, Complex64::new(0.3, 0.0)).unwrap() > 1e-6);
    }
}

#[test]
fn generated_plants_pass_the_structural_checks() {
    let tol = Tolerances::default();
    for seed in 0..30 {
        let sys = generate(&GenSpec::new(6, 3, 2, seed)).unwrap();
        let r = check_assumptions(&sys, &tol).unwrap();
        assert!(r.structural_pass(), "seed {seed}: {:?}", r.failed());
    }
}

#[test]
fn stable_a_is_hurwitz() {
    for seed in 0..20 {
        let spec = GenSpec::new(7, 3, 1, seed)
            .with_zeros([Complex64::new(-1.0, 0.0)])
            .with_stable_a(true);
        let sys = generate(&spec).unwrap();
        assert!(eigenvalues(sys.a()).unwrap().iter().all(|z| z.re < 0.0));
    }
}

#[test]
fn invalid_specs_are_rejected() {
    assert!(generate(&GenSpec::new(3, 3, 1, 0)).is_err());
    assert!(generate(&GenSpec::new(5, 2, 2, 0)).is_err());
    let not_closed = GenSpec::new(6, 3, 1, 0).with_zeros([Complex64::new(-1.0, 1.0)]);
    assert!(generate(&not_closed).is_err());
    let too_many = GenSpec::new(5, 3, 1, 0).with_zeros(vec![Complex64::new(-1.0, 0.0); 3]);
    assert!(generate(&too_many).is_err());
}
