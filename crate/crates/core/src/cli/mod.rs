//! Command-line front end: `analyze`, `squareup` and `gen`.

mod format;

pub use format::{
    matrix_rows, parse_system, write_system, Certificate, Dimensions, GenRecord, Outcome,
    ParseError, Report, SquareUpRecord, SystemFile,
};

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use crate::error::Error;
use crate::genbench::{certificate, conjugate_closure, generate, GenSpec};
use crate::numkit::{eigenvalues, Tolerances};
use crate::squareup::{square_up, square_up_by_transposition, SquareUpOptions, SquareUpResult};
use crate::sysmodel::{check_assumptions, transpose_system, StateSpace};

#[derive(Debug, Parser)]
#[command(name = "squareup", version, about = "Squaring-up of fat LTI plants")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct TolArgs {
    /// Relative rank threshold.
    #[arg(long, default_value_t = 1e-9)]
    pub tol_rank: f64,
    /// Absolute PBH / stability margin.
    #[arg(long, default_value_t = 1e-7)]
    pub tol_pbh: f64,
    /// Distance under which two zeros are the same.
    #[arg(long, default_value_t = 1e-6)]
    pub tol_zero_match: f64,
    /// Relative CARE residual bound.
    #[arg(long, default_value_t = 1e-8)]
    pub tol_care: f64,
}

impl TolArgs {
    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            rank: self.tol_rank,
            pbh: self.tol_pbh,
            zero_match: self.tol_zero_match,
            care_residual: self.tol_care,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check assumptions and classify zeros.
    Analyze {
        path: PathBuf,
        #[command(flatten)]
        tol: TolArgs,
        /// Analyze the dual system `{Aᵀ, Cᵀ, Bᵀ}`.
        #[arg(long)]
        transpose: bool,
    },
    /// Compute a minimum-phase output augmentation.
    Squareup {
        path: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        q_scale: f64,
        #[arg(long, default_value_t = 1.0)]
        r_scale: f64,
        #[command(flatten)]
        tol: TolArgs,
        /// Square a tall plant by adding inputs through its dual.
        #[arg(long)]
        transpose: bool,
        /// Write the squared system here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a random fat plant, optionally with planted zeros.
    Gen {
        #[arg(short = 'n')]
        n: usize,
        #[arg(short = 'm')]
        m: usize,
        #[arg(short = 'p')]
        p: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Zero to plant as `re,im`; conjugates are added automatically.
        #[arg(long = "plant-zero", value_parser = parse_complex, allow_hyphen_values = true)]
        plant_zero: Vec<Complex64>,
        /// Force `A` to be Hurwitz.
        #[arg(long)]
        stable_a: bool,
        /// Write the system here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let (re, im) = s.split_once(',').unwrap_or((s, "0"));
    let re: f64 = re.trim().parse().map_err(|e| format!("bad real part `{re}`: {e}"))?;
    let im: f64 = im.trim().parse().map_err(|e| format!("bad imaginary part `{im}`: {e}"))?;
    if !re.is_finite() || !im.is_finite() {
        return Err(format!("zero `{s}` is not finite"));
    }
    Ok(Complex64::new(re, im))
}

/// Parses `args` and runs. Usage errors map to the parse class (3); `--help`
/// and `--version` exit 0.
pub fn run_from_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli, out, err),
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    Outcome::ParseError.exit_code()
                }
            }
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let report = match cli.command {
        Command::Analyze { path, tol, transpose } => analyze(&path, tol.tolerances(), transpose),
        Command::Squareup {
            path,
            q_scale,
            r_scale,
            tol,
            transpose,
            out: dest,
        } => {
            let opts = SquareUpOptions {
                q_scale,
                r_scale,
                tol: tol.tolerances(),
            };
            squareup_cmd(&path, &opts, transpose, dest.as_deref())
        }
        Command::Gen {
            n,
            m,
            p,
            seed,
            plant_zero,
            stable_a,
            out: dest,
        } => {
            let spec = GenSpec::new(n, m, p, seed)
                .with_zeros(conjugate_closure(&plant_zero))
                .with_stable_a(stable_a);
            return gen_cmd(&spec, dest.as_deref(), out, err);
        }
    };
    emit(&report, out, err)
}

fn emit(report: &Report, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    if let Some(msg) = &report.message {
        if report.outcome != Outcome::Ok {
            let _ = writeln!(err, "error: {msg}");
        }
    }
    let _ = out.write_all(report.to_json().as_bytes());
    report.exit_code
}

fn load(path: &Path) -> Result<StateSpace, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_system(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn dims(sys: &StateSpace) -> Dimensions {
    Dimensions {
        n: sys.n(),
        m: sys.m(),
        p: sys.p(),
    }
}

fn outcome_of(e: &Error) -> Outcome {
    match e {
        Error::AssumptionViolation { .. } => Outcome::AssumptionFailure,
        Error::Unstabilizable { .. } => Outcome::Unstabilizable,
        _ => Outcome::NumericalFailure,
    }
}

fn analyze(path: &Path, tol: Tolerances, transpose: bool) -> Report {
    let mut report = Report::new("analyze", tol);
    report.transposed = transpose;
    if let Err(e) = tol.validate() {
        return report.with_outcome(Outcome::NumericalFailure, Some(e.to_string()));
    }
    let sys = match load(path) {
        Ok(s) => s,
        Err(msg) => return report.with_outcome(Outcome::ParseError, Some(msg)),
    };
    let sys = if transpose { transpose_system(&sys) } else { sys };
    report.system = Some(dims(&sys));
    match check_assumptions(&sys, &tol) {
        Ok(a) => {
            report.zeros = Some(a.zeros.clone());
            report.minimum_phase = Some(a.zeros.is_minimum_phase(&tol));
            report.square = Some(sys.is_square());
            let (outcome, msg) = if a.overall_pass {
                (Outcome::Ok, None)
            } else {
                let labels: Vec<&str> = a.failed().iter().map(|x| x.label()).collect();
                (
                    Outcome::AssumptionFailure,
                    Some(format!("assumptions not satisfied: {}", labels.join(", "))),
                )
            };
            report.assumptions = Some(a);
            report.with_outcome(outcome, msg)
        }
        Err(e) => report.with_outcome(Outcome::NumericalFailure, Some(e.to_string())),
    }
}

fn record(res: &SquareUpResult, ba: Option<&nalgebra::DMatrix<f64>>) -> SquareUpRecord {
    let v = &res.verification;
    SquareUpRecord {
        ca: matrix_rows(&res.ca),
        c21: matrix_rows(&res.c21),
        c22: matrix_rows(&res.c22),
        q_scale: res.q_scale,
        r_scale: res.r_scale,
        placed_zeros: res.placement.placed_zeros.clone(),
        augmented_zeros: v.zeros.clone(),
        minimum_phase: v.minimum_phase,
        preserved: v.preserved,
        cb_rank: v.cb_rank,
        ba: ba.map(matrix_rows),
    }
}

fn squareup_cmd(path: &Path, opts: &SquareUpOptions, transpose: bool, dest: Option<&Path>) -> Report {
    let mut report = Report::new("squareup", opts.tol);
    report.transposed = transpose;
    if let Err(e) = opts.tol.validate() {
        return report.with_outcome(Outcome::NumericalFailure, Some(e.to_string()));
    }
    if !(opts.q_scale > 0.0 && opts.q_scale.is_finite() && opts.r_scale > 0.0 && opts.r_scale.is_finite()) {
        return report.with_outcome(
            Outcome::NumericalFailure,
            Some("LQR weights must be positive and finite".into()),
        );
    }
    let sys = match load(path) {
        Ok(s) => s,
        Err(msg) => return report.with_outcome(Outcome::ParseError, Some(msg)),
    };
    report.system = Some(dims(&sys));

    let outcome = if transpose {
        square_up_by_transposition(&sys, opts).map(|aug| {
            let rec = record(&aug.dual, Some(&aug.ba));
            (aug.dual, aug.augmented, rec)
        })
    } else {
        square_up(&sys, opts).map(|res| {
            let rec = record(&res, None);
            let augmented = res.augmented.clone();
            (res, augmented, rec)
        })
    };

    match outcome {
        Ok((res, augmented, rec)) => {
            report.minimum_phase = Some(rec.minimum_phase);
            report.zeros = Some(res.assumptions.zeros.clone());
            report.assumptions = Some(res.assumptions);
            report.fixed_modes = Some(res.fixed_modes);
            report.squareup = Some(rec);
            if let Some(dest) = dest {
                if let Err(e) = std::fs::write(dest, write_system(&augmented)) {
                    return report.with_outcome(
                        Outcome::NumericalFailure,
                        Some(format!("cannot write {}: {e}", dest.display())),
                    );
                }
            }
            report.with_outcome(Outcome::Ok, None)
        }
        Err(e) => {
            let class = outcome_of(&e);
            let msg = e.to_string();
            match e {
                Error::AssumptionViolation { report: Some(a), .. } => {
                    report.zeros = Some(a.zeros.clone());
                    report.assumptions = Some(*a);
                }
                Error::Unstabilizable {
                    modes,
                    report: a,
                    fixed_modes,
                } => {
                    report.unstabilizable_modes = modes;
                    if let Some(a) = a {
                        report.zeros = Some(a.zeros.clone());
                        report.assumptions = Some(*a);
                    }
                    report.fixed_modes = fixed_modes.map(|f| *f);
                }
                _ => {}
            }
            report.with_outcome(class, Some(msg))
        }
    }
}

fn gen_cmd(spec: &GenSpec, dest: Option<&Path>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut report = Report::new("gen", Tolerances::default());
    let sys = match generate(spec) {
        Ok(s) => s,
        Err(e) => {
            let r = report.with_outcome(Outcome::NumericalFailure, Some(e.to_string()));
            let _ = writeln!(err, "error: {e}");
            return r.exit_code;
        }
    };
    let mut certs = Vec::new();
    for &z in &spec.planted_zeros {
        match certificate(&sys, z) {
            Ok(sigma) => certs.push(Certificate { zero: z, sigma_min: sigma }),
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return Outcome::NumericalFailure.exit_code();
            }
        }
    }
    report.system = Some(dims(&sys));
    report.generated = Some(GenRecord {
        spec: spec.clone(),
        certificates: certs,
    });
    let report = report.with_outcome(Outcome::Ok, None);
    let text = write_system(&sys);
    match dest {
        Some(dest) => {
            if let Err(e) = std::fs::write(dest, &text) {
                let _ = writeln!(err, "error: cannot write {}: {e}", dest.display());
                return Outcome::NumericalFailure.exit_code();
            }
            let _ = out.write_all(report.to_json().as_bytes());
        }
        None => {
            let _ = out.write_all(text.as_bytes());
            if let Some(g) = &report.generated {
                for c in &g.certificates {
                    let _ = writeln!(
                        err,
                        "planted zero {:+.6}{:+.6}i: sigma_min = {:.3e}",
                        c.zero.re, c.zero.im, c.sigma_min
                    );
                }
            }
            if spec.stable_a {
                let max_re = eigenvalues(sys.a())
                    .map(|e| e.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
                    .unwrap_or(f64::NAN);
                let _ = writeln!(err, "max Re eig(A) = {max_re:.6}");
            }
        }
    }
    0
}
