//! Solves a Riccati equation for a double integrator and prints the gain.

use nalgebra::DMatrix;
use squareup::numkit::{solve_care, Tolerances};

fn main() -> squareup::Result<()> {
    let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
    let b = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
    let q = DMatrix::identity(2, 2);
    let r = DMatrix::identity(1, 1);
    let sol = solve_care(&a, &b, &q, &r, &Tolerances::default())?;
    // Known answer: P = [[√3, 1], [1, √3]], K = [1, √3].
    println!("P = {:.6}", sol.p);
    println!("K = {:.6}", sol.k);
    println!("closed loop: {:?}", sol.closed_loop);
    println!("residual = {:.2e}", sol.residual);
    Ok(())
}
