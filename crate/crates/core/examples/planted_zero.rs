//! Generates a plant with known zeros, squares it up and checks that the
//! planted zeros survive.

use num_complex::Complex64;
use squareup::genbench::{certificate, conjugate_closure, generate, GenSpec};
use squareup::squareup::{square_up, SquareUpOptions};

fn main() -> squareup::Result<()> {
    let zeros = conjugate_closure(&[Complex64::new(-0.5, 1.0), Complex64::new(-2.0, 0.0)]);
    let spec = GenSpec::new(8, 4, 2, 42).with_zeros(zeros.clone());
    let sys = generate(&spec)?;
    for z in &zeros {
        println!("sigma_min(R({z:.3})) = {:.2e}", certificate(&sys, *z)?);
    }

    let res = square_up(&sys, &SquareUpOptions::default())?;
    println!("fixed modes of the pseudo pair: {:?}", res.fixed_modes.fixed_modes);
    println!("zeros placed by LQR:           {:?}", res.placement.placed_zeros);
    println!("augmented transmission zeros:  {:?}", res.augmented_zero_set().transmission);
    println!("planted zeros preserved: {}", res.verification.preserved);
    Ok(())
}
