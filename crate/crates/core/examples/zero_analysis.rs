//! Classifies the zeros of a plant with a hidden uncontrollable mode.

use squareup::numkit::Tolerances;
use squareup::sysmodel::{check_assumptions, StateSpace};

fn main() -> squareup::Result<()> {
    // x3 is driven by nothing and decays at -4, so it shows up as an input
    // decoupling zero and A3 fails. The plant has no transmission zeros.
    #[rustfmt::skip]
    let sys = StateSpace::from_rows(
        3, 2, 1,
        &[-2.0, 0.0, 0.0,
          0.0, -3.0, 0.0,
          0.0, 0.0, -4.0],
        &[1.0, 0.0,
          1.0, 1.0,
          0.0, 0.0],
        &[1.0, -1.0, 1.0],
    )?;
    let report = check_assumptions(&sys, &Tolerances::default())?;
    let z = &report.zeros;
    println!("invariant:          {:?}", z.invariant);
    println!("input decoupling:   {:?}", z.input_decoupling);
    println!("output decoupling:  {:?}", z.output_decoupling);
    println!("transmission:       {:?}", z.transmission);
    for a in squareup::sysmodel::Assumption::ALL {
        let c = report.get(a);
        println!("{} {:<5} {}", a.label(), c.passed, c.detail);
    }
    Ok(())
}
