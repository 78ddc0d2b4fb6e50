//! Squares up the lateral Boeing 747-100 model (transposed to be fat).

use squareup::squareup::{square_up, SquareUpOptions};
use squareup::sysmodel::StateSpace;

fn main() -> squareup::Result<()> {
    #[rustfmt::skip]
    let sys = StateSpace::from_rows(
        4, 3, 2,
        &[-0.0605, -0.0015, 0.0011, 0.0,
          0.0, -0.4603, -0.0208, -1.0,
          -871.0, 0.28, -0.141, 0.0,
          -32.3, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0,
          1.0, 0.0, 0.0,
          0.0, 1.0, 0.0,
          0.0, 0.0, 1.0],
        &[0.0, -0.186, 0.0061, 0.0,
          4.038, 0.1, -0.4419, 0.0],
    )?;

    let res = square_up(&sys, &SquareUpOptions::default())?;
    println!("plant zeros:     {:?}", res.assumptions.zeros.transmission);
    println!("fixed modes:     {:?}", res.fixed_modes.fixed_modes);
    println!("A~22 = {:.6}, Bps2 = {}", res.pseudo_pair.a22_tilde[(0, 0)], res.pseudo_pair.bps2);
    println!("Ca = {:.4}", res.ca);
    println!("augmented zeros: {:?}", res.augmented_zero_set().transmission);
    println!("minimum phase:   {}", res.minimum_phase());
    Ok(())
}
