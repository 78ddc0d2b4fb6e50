//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use squareup::cli::{run_from_args, Outcome, Report};
use squareup::genbench::{generate, zero_sweep_oracle, GenSpec, Region};
use squareup::numkit::{solve_care, Tolerances};
use squareup::squareup::{
    build_pseudo_pair, choose_c21, detect_fixed_modes, square_up, transform_to_controllable_coords,
    verify, SquareUpOptions, TransformedSystem,
};
use squareup::sysmodel::{check_assumptions, invariant_zeros, transmission_zeros, StateSpace};

const BOEING_ZERO: f64 = -0.0511;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(failures: Vec<String>, summary: String) -> Self {
        if failures.is_empty() {
            Verdict { pass: true, detail: summary }
        } else {
            Verdict {
                pass: false,
                detail: format!("{summary}; failed: {}", failures.join("; ")),
            }
        }
    }
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn boeing() -> StateSpace {
    let text = std::fs::read_to_string(fixture("boeing747.json")).unwrap();
    squareup::cli::parse_system(&text).unwrap()
}

fn cli(args: &[&str]) -> (i32, Option<Report>) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["squareup"];
    full.extend_from_slice(args);
    let code = run_from_args(full, &mut out, &mut err);
    let report = std::str::from_utf8(&out).ok().and_then(|s| Report::from_json(s).ok());
    (code, report)
}

fn randn(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Greedy nearest matching, written independently of the library's matcher.
fn same_set(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    for x in a {
        let best = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1));
        match best {
            Some((j, d)) if d <= tol => used[j] = true,
            _ => return false,
        }
    }
    true
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let (code, report) = cli(&["analyze", fixture("boeing747.json").to_str().unwrap()]);
    let elapsed = start.elapsed();
    let mut f = Vec::new();
    let Some(report) = report else {
        return Verdict::new(vec!["no report".into()], format!("exit {code}"));
    };
    if code != 0 {
        f.push(format!("exit code {code}"));
    }
    let zeros = report.zeros.clone().unwrap_or_default();
    if zeros.transmission.len() != 1 {
        f.push(format!("{} transmission zeros", zeros.transmission.len()));
    } else if (zeros.transmission[0] - Complex64::new(BOEING_ZERO, 0.0)).norm() > 1e-3 {
        f.push(format!("zero at {}", zeros.transmission[0]));
    }
    if !zeros.input_decoupling.is_empty() || !zeros.output_decoupling.is_empty() {
        f.push("decoupling zeros present".into());
    }
    let a = report.assumptions.as_ref();
    let all = a.is_some_and(|a| {
        [
            &a.a1_fat,
            &a.a2_strictly_proper,
            &a.a3_controllable_observable,
            &a.a4_full_rank_b,
            &a.a5_full_rank_cb,
            &a.a6_stable_transmission_zeros,
        ]
        .iter()
        .all(|c| c.passed)
    });
    if !all {
        f.push("not all of A1..A6 pass".into());
    }
    if elapsed >= Duration::from_secs(1) {
        f.push(format!("runtime {elapsed:?}"));
    }
    let z = zeros.transmission.first().copied().unwrap_or_default();
    Verdict::new(f, format!("zero {:.6}, {:?}", z.re, elapsed))
}

fn criterion_2() -> Verdict {
    let tol = Tolerances::default();
    let sys = boeing();
    // The paper's basis: range(B) rows first, then the null direction of Bᵀ
    // with the sign that reproduces its printed A21 and C̃2.
    let t = DMatrix::from_row_slice(
        4,
        4,
        &[
            0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, 1.0, 0.0, //
            0.0, 0.0, 0.0, 1.0, //
            -1.0, 0.0, 0.0, 0.0,
        ],
    );
    let ts = match TransformedSystem::from_transform(&sys, t, &tol) {
        Ok(ts) => ts,
        Err(e) => return Verdict::new(vec![e.to_string()], "transform".into()),
    };
    let c21 = choose_c21(&ts.c11, &tol).unwrap();
    let pp = build_pseudo_pair(&ts, &c21, &tol).unwrap();

    let mut f = Vec::new();
    let mut close = |name: &str, got: &[f64], want: &[f64], eps: f64| {
        let bad = got.len() != want.len() || got.iter().zip(want).any(|(g, w)| (g - w).abs() > eps);
        if bad {
            f.push(format!("{name} = {got:?}, expected {want:?} within {eps:e}"));
        }
    };
    close("A22", ts.a22.as_slice(), &[-0.0605], 1e-4);
    close("A21", &ts.a21.row(0).iter().copied().collect::<Vec<_>>(), &[0.0015, -0.0011, 0.0], 1e-4);
    close("C21", &c21.row(0).iter().copied().collect::<Vec<_>>(), &[0.0, 0.0, 1.0], 1e-4);
    close("A~22", pp.a22_tilde.as_slice(), &[-0.0511], 1e-4);
    let c1_inv_paper = [
        [-5.4171, -0.0744, 0.0],
        [-1.2263, -2.2796, 0.0],
        [0.0, 0.0, 1.0],
    ];
    for (i, row) in c1_inv_paper.iter().enumerate() {
        let got: Vec<f64> = pp.c1_inv.row(i).iter().copied().collect();
        close(&format!("C1^-1 row {i}"), &got, row, 1e-3);
    }
    let bps2 = pp.bps2.norm();
    if bps2 >= 1e-9 {
        f.push(format!("|Bps2| = {bps2:e}"));
    }
    Verdict::new(f, format!("A~22 = {:.6}, |Bps2| = {bps2:.1e}", pp.a22_tilde[(0, 0)]))
}

fn criterion_3() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("augmented.json");
    let (code, report) = cli(&[
        "squareup",
        fixture("boeing747.json").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let mut f = Vec::new();
    if code != 0 {
        return Verdict::new(vec![format!("squareup exit {code}")], String::new());
    }
    let ca = report.and_then(|r| r.squareup).map(|s| s.ca).unwrap_or_default();
    let target = [0.0, 0.0, 0.0, 1.0];
    let row_ok = ca.len() == 1
        && [1.0, -1.0].iter().any(|sgn| {
            ca[0].iter().zip(&target).all(|(g, w)| (g - sgn * w).abs() <= 1e-6)
        });
    if !row_ok {
        f.push(format!("Ca = {ca:?}"));
    }
    let (_, second) = cli(&["analyze", out.to_str().unwrap()]);
    let second = second.unwrap();
    let zeros = second.zeros.clone().unwrap_or_default();
    if zeros.transmission.len() != 1
        || (zeros.transmission[0] - Complex64::new(BOEING_ZERO, 0.0)).norm() > 1e-3
    {
        f.push(format!("augmented zeros {:?}", zeros.transmission));
    }
    if second.minimum_phase != Some(true) {
        f.push("augmented system not minimum phase".into());
    }
    if second.square != Some(true) {
        f.push("augmented system not square".into());
    }
    let shown: Vec<String> = ca.iter().flatten().map(|x| format!("{x:.3e}")).collect();
    Verdict::new(f, format!("Ca = [{}]", shown.join(", ")))
}

fn random_dims(rng: &mut ChaCha8Rng, n_max: usize) -> (usize, usize, usize) {
    random_dims_capped(rng, n_max, usize::MAX)
}

fn random_dims_capped(rng: &mut ChaCha8Rng, n_max: usize, m_max: usize) -> (usize, usize, usize) {
    let n = rng.random_range(3..=n_max);
    let m = rng.random_range(2..n.min(m_max.saturating_add(1)));
    let p = rng.random_range(1..m);
    (n, m, p)
}

fn criterion_4() -> Verdict {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let start = Instant::now();
    let mut f = Vec::new();
    let mut worst = 0.0f64;
    for case in 0..100u64 {
        let (n, m, p) = random_dims(&mut rng, 10);
        let s0 = Complex64::new(rng.random_range(-3.0..=-0.1), 0.0);
        let spec = GenSpec::new(n, m, p, 1000 + case).with_zeros([s0]);
        let outcome = generate(&spec).and_then(|sys| {
            let zeros = transmission_zeros(&sys, &tol)?;
            let ts = transform_to_controllable_coords(&sys, &tol)?;
            let c21 = choose_c21(&ts.c11, &tol)?;
            let pp = build_pseudo_pair(&ts, &c21, &tol)?;
            detect_fixed_modes(&pp, &zeros, &tol)
        });
        match outcome {
            Ok(r) => {
                let ok = r.fixed_modes.len() == 1
                    && (r.fixed_modes[0] - s0).norm() <= 1e-5
                    && r.matched_transmission_zeros[0].is_some_and(|z| (z - s0).norm() <= 1e-5);
                if let Some(fm) = r.fixed_modes.first() {
                    worst = worst.max((fm - s0).norm());
                }
                if !ok {
                    f.push(format!("case {case} (n={n}, m={m}, p={p}, s0={s0}): {:?}", r.fixed_modes));
                }
            }
            Err(e) => f.push(format!("case {case}: {e}")),
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(30) {
        f.push(format!("runtime {elapsed:?}"));
    }
    f.truncate(5);
    Verdict::new(f, format!("100 systems, worst |mode - s0| = {worst:.1e}, {elapsed:?}"))
}

fn lhp_zeros(rng: &mut ChaCha8Rng, budget: usize) -> Vec<Complex64> {
    let mut zs = Vec::new();
    while zs.len() < budget {
        let re = rng.random_range(-3.0..=-0.1);
        if budget - zs.len() >= 2 && rng.random_bool(0.5) {
            let im = rng.random_range(0.2..=3.0);
            zs.push(Complex64::new(re, im));
            zs.push(Complex64::new(re, -im));
        } else {
            zs.push(Complex64::new(re, 0.0));
        }
        if rng.random_bool(0.5) {
            break;
        }
    }
    zs
}

fn criterion_5() -> Verdict {
    let tol = Tolerances::default();
    let opts = SquareUpOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut f = Vec::new();
    let mut tested = 0;
    let mut seed = 5000u64;
    while tested < 200 && seed < 6000 {
        seed += 1;
        let (n, m, p) = random_dims_capped(&mut rng, 10, 4);
        let mut spec = GenSpec::new(n, m, p, seed);
        if seed.is_multiple_of(2) {
            spec = spec.with_zeros(lhp_zeros(&mut rng, n - m));
        }
        let Ok(sys) = generate(&spec) else { continue };
        let Ok(report) = check_assumptions(&sys, &tol) else { continue };
        if !report.overall_pass {
            continue;
        }
        tested += 1;
        match square_up(&sys, &opts).and_then(|r| verify(&sys, &r.ca, &tol)) {
            Ok(v) if v.minimum_phase => {}
            Ok(v) => f.push(format!("seed {seed}: zeros {:?}", v.zeros.transmission)),
            Err(e) => f.push(format!("seed {seed}: {e}")),
        }
    }
    if tested < 200 {
        f.push(format!("only {tested} systems passed A1..A6"));
    }
    let failures = f.len();
    f.truncate(5);
    Verdict::new(f, format!("{tested} systems, {failures} failures"))
}

fn criterion_6() -> Verdict {
    let opts = SquareUpOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut f = Vec::new();
    let mut worst = 0.0f64;
    let mut planted_total = 0;
    for case in 0..100u64 {
        let (n, m, p) = random_dims(&mut rng, 10);
        let zs = lhp_zeros(&mut rng, n - m);
        planted_total += zs.len();
        let spec = GenSpec::new(n, m, p, 6000 + case).with_zeros(zs.clone());
        let res = generate(&spec).and_then(|sys| square_up(&sys, &opts));
        match res {
            Ok(r) => {
                let got = &r.verification.zeros.transmission;
                for z in &zs {
                    let d = got.iter().map(|g| (g - z).norm()).fold(f64::INFINITY, f64::min);
                    worst = worst.max(d);
                    if d > 1e-5 {
                        f.push(format!("case {case}: planted {z} missing (nearest {d:e})"));
                    }
                }
            }
            Err(e) => f.push(format!("case {case}: {e}")),
        }
    }
    f.truncate(5);
    Verdict::new(f, format!("{planted_total} planted zeros, worst distance {worst:.1e}"))
}

fn criterion_7() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rhp.json");
    let path = path.to_str().unwrap();
    let (code, _) = cli(&["gen", "-n", "6", "-m", "3", "-p", "2", "--seed", "7", "--plant-zero", "0.5,0", "--out", path]);
    if code != 0 {
        return Verdict::new(vec![format!("gen exit {code}")], String::new());
    }
    let mut f = Vec::new();
    let (_, analysis) = cli(&["analyze", path]);
    let a6 = analysis
        .and_then(|r| r.assumptions)
        .map(|a| a.a6_stable_transmission_zeros.passed);
    if a6 != Some(false) {
        f.push(format!("A6 verdict {a6:?}"));
    }
    let (code, report) = cli(&["squareup", path]);
    if code != Outcome::Unstabilizable.exit_code() {
        f.push(format!("squareup exit {code}"));
    }
    let modes = report.map(|r| r.unstabilizable_modes).unwrap_or_default();
    if !modes.iter().any(|z| (z - Complex64::new(0.5, 0.0)).norm() <= 1e-5) {
        f.push(format!("modes {modes:?} do not name +0.5"));
    }
    let named: Vec<String> = modes.iter().map(|z| format!("{:.6}{:+.6}i", z.re, z.im)).collect();
    Verdict::new(f, format!("exit {code}, modes [{}]", named.join(", ")))
}

fn random_square(rng: &mut ChaCha8Rng) -> StateSpace {
    let n = rng.random_range(3..=8);
    let m = rng.random_range(1..n);
    StateSpace::new(randn(rng, n, n), randn(rng, n, m), randn(rng, m, n)).unwrap()
}

fn criterion_8() -> Verdict {
    let tol = Tolerances::default();
    let region = Region::square(10.0);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut f = Vec::new();
    let mut zeros_seen = 0;
    for case in 0..50u64 {
        let sys = if case % 2 == 0 {
            let (n, m, p) = random_dims(&mut rng, 8);
            let zs = lhp_zeros(&mut rng, n - m);
            generate(&GenSpec::new(n, m, p, 8000 + case).with_zeros(zs)).unwrap()
        } else {
            random_square(&mut rng)
        };
        let pencil: Vec<Complex64> = match invariant_zeros(&sys, &tol) {
            Ok(z) => z.zeros.into_iter().filter(|z| region.contains(*z)).collect(),
            Err(e) => {
                f.push(format!("case {case}: {e}"));
                continue;
            }
        };
        let sweep = match zero_sweep_oracle(&sys, &region, (201, 201), &tol) {
            Ok(z) => z,
            Err(e) => {
                f.push(format!("case {case}: {e}"));
                continue;
            }
        };
        zeros_seen += pencil.len();
        if !same_set(&pencil, &sweep, 1e-5) {
            f.push(format!("case {case}: pencil {pencil:?} vs sweep {sweep:?}"));
        }
    }
    f.truncate(5);
    Verdict::new(f, format!("50 systems, {zeros_seen} zeros in region"))
}

fn criterion_9() -> Verdict {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut f = Vec::new();
    let mut worst_ratio = 0.0f64;
    for case in 0..100 {
        let n = rng.random_range(1..=8);
        let k = rng.random_range(1..=n);
        let (a, b) = if case % 2 == 0 || n < 2 {
            (randn(&mut rng, n, n), randn(&mut rng, n, k))
        } else {
            // Controllable block plus a stable block the input cannot reach.
            let nc = rng.random_range(1..n);
            let mut a = randn(&mut rng, n, n);
            let mut b = randn(&mut rng, n, k);
            for i in nc..n {
                for j in 0..nc {
                    a[(i, j)] = 0.0;
                }
                for j in 0..k {
                    b[(i, j)] = 0.0;
                }
            }
            let shift = a.view((nc, nc), (n - nc, n - nc)).complex_eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
            for i in nc..n {
                a[(i, i)] -= shift.max(0.0) + 0.5;
            }
            (a, b)
        };
        let q = DMatrix::identity(n, n);
        let r = DMatrix::identity(k, k);
        match solve_care(&a, &b, &q, &r, &tol) {
            Ok(sol) => {
                let p = &sol.p;
                let res = a.transpose() * p + p * &a - p * &b * b.transpose() * p + &q;
                let bound = 1e-8 * (1.0 + p.norm());
                worst_ratio = worst_ratio.max(res.norm() / bound);
                let kgain = b.transpose() * p;
                let cl = (&a - &b * kgain).complex_eigenvalues();
                let max_re = cl.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
                if res.norm() > bound || max_re >= 0.0 {
                    f.push(format!("case {case}: residual {:e}, max Re {max_re:e}", res.norm()));
                }
            }
            Err(e) => f.push(format!("case {case}: {e}")),
        }
    }
    f.truncate(5);
    Verdict::new(f, format!("100 pairs, worst residual/bound {worst_ratio:.2e}"))
}

fn main() {
    type Check = fn() -> Verdict;
    let criteria: [(&str, Check); 9] = [
        ("Boeing 747 analyze", criterion_1),
        ("Boeing 747 intermediate values", criterion_2),
        ("Boeing 747 end to end", criterion_3),
        ("fixed modes equal planted zeros", criterion_4),
        ("minimum-phase guarantee", criterion_5),
        ("zero preservation", criterion_6),
        ("unstable zero is unstabilizable", criterion_7),
        ("pencil and sweep oracle agree", criterion_8),
        ("CARE kernel", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {} [{name}]: {tag} ({})", i + 1, v.detail);
        if !v.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
