//! Command-line front end: loop files in, verdicts out.

pub mod json;
pub mod loopfile;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use elrf::detect::{
    detect_affine, detect_elrf, detect_elrf_given_f, detect_lrf, inc_space, AffineMode, Certificate,
    CertificateKind, IncreasingFn,
};
use elrf::error::Error;
use elrf::fm::Limits;
use elrf::loop_model::CandidateFn;
use elrf::oracle::{check_certificate_on_traces, DEFAULT_MAX_STEPS};
use elrf::rational::{format_rational, parse_rational, Rational};
use elrf::verify::{verify_elrf, verify_lrf};
use serde_json::json;

use crate::json::{certificate_value, emit_json, status};
use crate::loopfile::{parse_loop_file, LoopFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "elrf", version, about = "Ranking functions for linear constraint loops")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Loop file to analyze.
    file: PathBuf,
    /// Print the result as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Search for a linear ranking function.
    DetectLrf {
        #[command(flatten)]
        common: Common,
        /// Allow a constant term in the ranking function.
        #[arg(long)]
        affine: bool,
    },
    /// Search for an eventual linear ranking function, using the file's
    /// `increasing:` function when present.
    DetectElrf {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        affine: bool,
    },
    /// Print the polyhedron of increasing linear functions.
    Inc {
        #[command(flatten)]
        common: Common,
    },
    /// Check the file's `candidate:` (with `increasing:` for eventual
    /// checks).
    Verify {
        #[command(flatten)]
        common: Common,
        /// Threshold to check instead of computing one.
        #[arg(long)]
        k: Option<String>,
    },
    /// Run the loop on random traces and check a certificate on every step.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        affine: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
        max_steps: usize,
        #[arg(long)]
        k: Option<String>,
    },
}

/// A failure with its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::RowCap { .. } | Error::RetryCapExhausted(_) => EXIT_RESOURCE,
            Error::Internal(_) => EXIT_INTERNAL,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: EXIT_INTERNAL,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<(), Failure>;

fn load(path: &PathBuf) -> Result<LoopFile, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    parse_loop_file(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn parse_k(text: &Option<String>) -> Result<Option<Rational>, Failure> {
    text.as_deref()
        .map(|s| parse_rational(s).ok_or_else(|| Failure::input(format!("--k: `{s}` is not a rational"))))
        .transpose()
}

fn require<'a>(g: &'a Option<CandidateFn>, section: &str, command: &str) -> Result<&'a CandidateFn, Failure> {
    g.as_ref()
        .ok_or_else(|| Failure::input(format!("`{command}` needs an `{section}:` line in the loop file")))
}

fn write_certificate(cert: &Certificate, as_json: bool, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    if as_json {
        writeln!(out, "{}", emit_json(cert))?;
        return Ok(());
    }
    writeln!(out, "{}", status(cert.kind))?;
    if let Some(rho) = &cert.rho {
        writeln!(out, "rho: {rho}")?;
    }
    if let Some(k) = &cert.k {
        writeln!(out, "k: {}", format_rational(k))?;
    }
    match &cert.f {
        Some(IncreasingFn::Single(g)) => writeln!(out, "f: {g}")?,
        Some(IncreasingFn::MinPair {
            decrease,
            positivity,
        }) => writeln!(out, "f: min({decrease}, {positivity})")?,
        None => {}
    }
    if let Some(case) = cert.case {
        writeln!(out, "case: {}", case.label())?;
    }
    for d in &cert.diagnostics {
        writeln!(err, "note: {d}")?;
    }
    Ok(())
}

fn detect(file: &LoopFile, eventual: bool, affine: bool, limits: &Limits) -> Result<Certificate, Failure> {
    let lp = &file.lp;
    let cert = match (eventual, affine, &file.increasing) {
        (false, false, _) => detect_lrf(lp)?,
        (false, true, _) => detect_affine(lp, &AffineMode::Lrf, limits)?,
        (true, false, Some(f)) => detect_elrf_given_f(lp, f)?,
        (true, false, None) => detect_elrf(lp, limits)?,
        (true, true, Some(f)) => detect_affine(lp, &AffineMode::ElrfGivenF(f.clone()), limits)?,
        (true, true, None) => detect_affine(lp, &AffineMode::Elrf, limits)?,
    };
    Ok(cert)
}

/// The certificate `simulate` checks: the file's candidate if it has one,
/// otherwise whatever eventual detection finds.
fn simulated_certificate(
    file: &LoopFile,
    affine: bool,
    k: Option<Rational>,
    limits: &Limits,
) -> Result<Certificate, Failure> {
    let Some(rho) = &file.candidate else {
        return detect(file, true, affine, limits);
    };
    let mut cert = Certificate::none(Vec::new());
    cert.rho = Some(rho.clone());
    match &file.increasing {
        None => {
            if k.is_some() {
                return Err(Failure::input("--k needs an `increasing:` line in the loop file"));
            }
            cert.kind = CertificateKind::Lrf;
        }
        Some(f) => {
            let k = match k {
                Some(k) => k,
                None => verify_elrf(&file.lp, f, rho, None)?
                    .k
                    .ok_or_else(|| Failure::input("the candidate has no threshold to simulate"))?,
            };
            cert.kind = if rho.is_linear() {
                CertificateKind::Elrf
            } else {
                CertificateKind::EventualAffine
            };
            cert.f = Some(IncreasingFn::Single(f.clone()));
            cert.k = Some(k);
        }
    }
    Ok(cert)
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let limits = Limits::from_env();
    match cli.command {
        Command::DetectLrf { common, affine } => {
            let file = load(&common.file)?;
            let cert = detect(&file, false, affine, &limits)?;
            write_certificate(&cert, common.json, out, err)
        }
        Command::DetectElrf { common, affine } => {
            let file = load(&common.file)?;
            let cert = detect(&file, true, affine, &limits)?;
            write_certificate(&cert, common.json, out, err)
        }
        Command::Inc { common } => {
            let file = load(&common.file)?;
            let inc = inc_space(&file.lp, &limits)?;
            let empty = inc.is_empty()?;
            let rows = inc.pretty_rows();
            if common.json {
                let params: Vec<&str> = inc.params.iter().map(|p| p.name()).collect();
                writeln!(out, "{}", json!({"params": params, "empty": empty, "rows": rows}))?;
            } else if empty {
                writeln!(out, "INC is empty")?;
            } else {
                let params: Vec<&str> = inc.params.iter().map(|p| p.name()).collect();
                writeln!(out, "# f = {}", params.join(", "))?;
                for row in rows {
                    writeln!(out, "{row}")?;
                }
            }
            Ok(())
        }
        Command::Verify { common, k } => {
            let file = load(&common.file)?;
            let k = parse_k(&k)?;
            let rho = require(&file.candidate, "candidate", "verify")?;
            let (holds, k) = match &file.increasing {
                None => {
                    if k.is_some() {
                        return Err(Failure::input("--k needs an `increasing:` line in the loop file"));
                    }
                    (verify_lrf(&file.lp, rho)?, None)
                }
                Some(f) => {
                    let verdict = verify_elrf(&file.lp, f, rho, k.as_ref())?;
                    (verdict.holds, verdict.k)
                }
            };
            if common.json {
                let mut v = json!({"verified": holds});
                if let Some(k) = &k {
                    v["k"] = format_rational(k).into();
                }
                writeln!(out, "{v}")?;
            } else {
                let verdict = if holds { "VERIFIED" } else { "NOT VERIFIED" };
                match (&k, holds) {
                    (Some(k), true) => writeln!(out, "{verdict} (k = {})", format_rational(k))?,
                    _ => writeln!(out, "{verdict}")?,
                }
            }
            Ok(())
        }
        Command::Simulate {
            common,
            affine,
            seed,
            trials,
            max_steps,
            k,
        } => {
            let file = load(&common.file)?;
            let k = parse_k(&k)?;
            let cert = simulated_certificate(&file, affine, k, &limits)?;
            if cert.kind == CertificateKind::None {
                if common.json {
                    writeln!(out, "{}", json!({"certificate": certificate_value(&cert)}))?;
                } else {
                    writeln!(out, "{}: nothing to simulate", status(cert.kind))?;
                }
                return Ok(());
            }
            let report = check_certificate_on_traces(&file.lp, &cert, trials, max_steps, seed)?;
            let violations: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
            if common.json {
                let v = json!({
                    "certificate": certificate_value(&cert),
                    "trials": report.trials,
                    "transitions": report.transitions,
                    "terminated": report.terminated,
                    "violations": violations,
                });
                writeln!(out, "{v}")?;
            } else {
                write_certificate(&cert, false, out, err)?;
                writeln!(
                    out,
                    "traces: {}, transitions: {}, terminated: {}, violations: {}",
                    report.trials,
                    report.transitions,
                    report.terminated,
                    violations.len()
                )?;
                for v in violations {
                    writeln!(out, "violation: {v}")?;
                }
            }
            Ok(())
        }
    }
}

/// Runs one command. `args` excludes the program name. Returns the exit
/// code: 0 when a verdict was computed (positive or negative), 2 for bad
/// input, 3 when a resource cap was hit.
pub fn run_command<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv = std::iter::once(OsString::from("elrf")).chain(args.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{rendered}")
            } else {
                write!(out, "{rendered}")
            };
            return code;
        }
    };
    match dispatch(cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
