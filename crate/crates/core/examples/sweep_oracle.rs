//! Cross-checks the pencil zero finder against a brute-force sigma_min sweep.

use nalgebra::DMatrix;
use squareup::genbench::{zero_sweep_oracle, Region};
use squareup::numkit::Tolerances;
use squareup::sysmodel::{invariant_zeros, StateSpace};

fn main() -> squareup::Result<()> {
    let tol = Tolerances::default();
    // G(s) = (s + 1)(s + 3) / (s + 2)^3 in companion form.
    let a = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, -8.0, -12.0, -6.0]);
    let b = DMatrix::from_row_slice(3, 1, &[0.0, 0.0, 1.0]);
    let c = DMatrix::from_row_slice(1, 3, &[3.0, 4.0, 1.0]);
    let sys = StateSpace::new(a, b, c)?;

    let pencil = invariant_zeros(&sys, &tol)?.zeros;
    let sweep = zero_sweep_oracle(&sys, &Region::square(5.0), (101, 101), &tol)?;
    println!("pencil: {pencil:?}");
    println!("sweep:  {sweep:?}");
    Ok(())
}
