//! Drives the command-line interface in process: gen, analyze, squareup.

use squareup::cli::{run_from_args, Report};

fn run(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run_from_args(std::iter::once("squareup").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8_lossy(&out).into_owned())
}

fn main() {
    let dir = std::env::temp_dir().join("squareup-example");
    std::fs::create_dir_all(&dir).unwrap();
    let plant = dir.join("plant.json");
    let aug = dir.join("augmented.json");
    let (plant, aug) = (plant.to_str().unwrap(), aug.to_str().unwrap());

    let (code, _) = run(&["gen", "-n", "6", "-m", "3", "-p", "1", "--seed", "1", "--plant-zero", "-1,0.5", "--out", plant]);
    println!("gen exit {code}");
    let (code, out) = run(&["squareup", plant, "--out", aug]);
    let report = Report::from_json(&out).unwrap();
    println!("squareup exit {code}, Ca = {:?}", report.squareup.map(|s| s.ca));
    let (code, out) = run(&["analyze", aug]);
    let report = Report::from_json(&out).unwrap();
    // A square result fails the fatness check, so analyze exits 1 here.
    println!(
        "analyze exit {code}, square = {:?}, minimum phase = {:?}",
        report.square, report.minimum_phase
    );
}
