//! A tall plant gets extra inputs instead of extra outputs.

use squareup::genbench::{generate, GenSpec};
use squareup::squareup::{square_up_by_transposition, SquareUpOptions};
use squareup::sysmodel::transpose_system;

fn main() -> squareup::Result<()> {
    let tall = transpose_system(&generate(&GenSpec::new(6, 3, 1, 3))?);
    println!("tall plant: m = {}, p = {}", tall.m(), tall.p());
    let aug = square_up_by_transposition(&tall, &SquareUpOptions::default())?;
    println!("Ba = {:.4}", aug.ba);
    println!("squared: m = {}, p = {}", aug.augmented.m(), aug.augmented.p());
    println!("minimum phase: {}", aug.dual.minimum_phase());
    Ok(())
}
