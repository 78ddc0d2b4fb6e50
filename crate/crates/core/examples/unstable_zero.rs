//! A right-half-plane transmission zero is a fixed mode no Ca can move.

use num_complex::Complex64;
use squareup::genbench::{generate, GenSpec};
use squareup::squareup::{square_up, SquareUpOptions};
use squareup::Error;

fn main() -> squareup::Result<()> {
    let spec = GenSpec::new(6, 3, 2, 7).with_zeros([Complex64::new(0.5, 0.0)]);
    let sys = generate(&spec)?;
    match square_up(&sys, &SquareUpOptions::default()) {
        Err(Error::Unstabilizable { modes, .. }) => println!("unstabilizable, fixed modes {modes:?}"),
        Err(e) => return Err(e),
        Ok(_) => println!("unexpectedly squared up"),
    }
    Ok(())
}
