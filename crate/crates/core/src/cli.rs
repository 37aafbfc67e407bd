//! `halfwave` command line.
//!
//! Exit codes: 0 when the verdict is affirmative (divergent, bounded, oracle
//! gap within tolerance), 1 on any error, 2 when inconclusive.

use std::ffi::OsString;
use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::divergence::{
    angular_log_coefficient, boundedness_probe, epsilon_sweep, falsification_probe, slope_law, Verdict,
    DEFAULT_CONTRAST_KMAX,
};
use crate::error::{Error, Result};
use crate::grid::{
    dual_functional_from_kernel, dump_kernel, l1_mass, sample_mollifier_kernel, GridSpec, MovingSource,
};
use crate::profiles::{halfline_energy, CutoffLevel, Mollifier, Profile};
use crate::reduced::{
    factorized_limit, n3_remark_value, radial_separable_value, reduced_q_value, sphere_surface_measure,
    AngularDomain, ProbeConfig,
};
use crate::report::{N3Point, Payload, QPoint, RunReport, SweepPoint, Timing, TOOL_VERSION};

pub const EXIT_AFFIRMATIVE: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;

/// Largest relative gap accepted by `oracle`.
pub const ORACLE_GAP_TOLERANCE: f64 = 0.01;
const REPORT_TOL: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(name = "halfwave", version, about = "Moving-source probes of the L²_t L^∞_x Strichartz estimate for e^{it|D|}")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Emit {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Output {
    /// Output format.
    #[arg(long, value_enum, default_value = "json")]
    pub emit: Emit,
    /// Write the report here instead of stdout.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Shape {
    /// Time profile, e.g. `gaussian:width=1` or `bump:center=0,radius=1`
    /// (L²-normalized unless `amplitude=` is given).
    #[arg(long, default_value = "gaussian:width=1")]
    #[serde(serialize_with = "as_display")]
    pub profile: Profile,
    /// Radial cutoff, `inner=1,outer=2`.
    #[arg(long, default_value = "inner=1,outer=2")]
    #[serde(serialize_with = "as_display")]
    pub mollifier: Mollifier,
}

fn as_display<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Endpoint probe s = (n-1)/2: certify logarithmic growth of Q_k.
    Falsify(FalsifyArgs),
    /// L^q_t probe s = n/2 - 1/q, q > 2: check that Q_k converges.
    Contrast(ContrastArgs),
    /// Angular integral up to θ₀ - ε and its ln(1/ε) fit.
    Angular(AngularArgs),
    /// Compare the grid evaluation with the (λ, θ) engine.
    Oracle(OracleArgs),
    /// Three-dimensional unit-speed quantity E(f) ln(2/ε).
    N3(N3Args),
}

#[derive(Debug, Args, Serialize)]
pub struct FalsifyArgs {
    #[arg(long, default_value_t = 4)]
    pub n: u32,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub c: f64,
    #[arg(long, default_value_t = 24)]
    pub kmax: i32,
    #[command(flatten)]
    pub shape: Shape,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args, Serialize)]
pub struct ContrastArgs {
    #[arg(long, default_value_t = 4)]
    pub n: u32,
    #[arg(long, allow_negative_numbers = true)]
    pub q: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub c: f64,
    #[arg(long, default_value_t = DEFAULT_CONTRAST_KMAX)]
    pub kmax: i32,
    #[command(flatten)]
    pub shape: Shape,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args, Serialize)]
pub struct AngularArgs {
    #[arg(long, default_value_t = 4)]
    pub n: u32,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub c: f64,
    /// Comma-separated list, or a decade range such as `1e-1..1e-6`.
    #[arg(long, allow_hyphen_values = true)]
    pub eps: String,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args, Serialize)]
pub struct OracleArgs {
    #[arg(long, default_value_t = 2)]
    pub n: u32,
    #[arg(long, default_value_t = 4, allow_negative_numbers = true)]
    pub k: i32,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub c: f64,
    /// Points per axis.
    #[arg(long, default_value_t = 128)]
    pub grid: usize,
    /// Box half-width; by default the largest up to 8 that keeps the cutoff
    /// below Nyquist.
    #[arg(long = "box")]
    pub box_halfwidth: Option<f64>,
    /// Dump the sampled kernel h_k (SFGD format).
    #[arg(long)]
    #[serde(skip)]
    pub dump: Option<PathBuf>,
    #[command(flatten)]
    pub shape: Shape,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args, Serialize)]
pub struct N3Args {
    /// Comma-separated list, or a decade range such as `1e-1..1e-3`.
    #[arg(long, default_value = "0.2,0.02,0.002", allow_hyphen_values = true)]
    pub eps: String,
    #[command(flatten)]
    pub shape: Shape,
    #[command(flatten)]
    pub output: Output,
}

/// Parse `a,b,c` or a decade range `1e-1..1e-6` (both ends included).
pub fn parse_eps_list(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    let bad = |what: &str| Error::InvalidArgument(format!("ε list `{s}`: {what}"));
    if let Some((a, b)) = s.split_once("..") {
        let a: f64 = a.trim().parse().map_err(|_| bad("range start is not a number"))?;
        let b: f64 = b.trim().parse().map_err(|_| bad("range end is not a number"))?;
        if !(a > 0.0 && b > 0.0 && a >= b) {
            return Err(bad("a decade range runs from a larger to a smaller positive value"));
        }
        let decades = (a / b).log10();
        if (decades - decades.round()).abs() > 1e-9 {
            return Err(bad("range ends must be a whole number of decades apart"));
        }
        let (ea, steps) = (a.log10(), decades.round() as i32);
        return Ok((0..=steps)
            .map(|i| {
                let e = ea - i as f64;
                if (e - e.round()).abs() < 1e-12 {
                    format!("1e{}", e.round() as i32).parse().unwrap()
                } else {
                    a / 10f64.powi(i)
                }
            })
            .collect());
    }
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| bad(&format!("`{t}` is not a number"))))
        .collect()
}

/// Run the CLI on `args` (including the program name); returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_AFFIRMATIVE };
        }
    };
    let echo = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join(" ");
    match execute(&cli.command, echo) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn execute(cmd: &Command, echo: String) -> Result<i32> {
    let start = Instant::now();
    let (config, output, payload, code) = match cmd {
        Command::Falsify(a) => {
            let (payload, code) = falsify(a)?;
            (to_value(a)?, &a.output, payload, code)
        }
        Command::Contrast(a) => {
            let (payload, code) = contrast(a)?;
            (to_value(a)?, &a.output, payload, code)
        }
        Command::Angular(a) => {
            let (payload, code) = angular(a)?;
            (to_value(a)?, &a.output, payload, code)
        }
        Command::Oracle(a) => {
            let (payload, code) = oracle(a)?;
            (to_value(a)?, &a.output, payload, code)
        }
        Command::N3(a) => {
            let (payload, code) = n3(a)?;
            (to_value(a)?, &a.output, payload, code)
        }
    };
    let report = RunReport {
        command: echo,
        version: TOOL_VERSION.to_string(),
        config,
        payload,
        timing: Timing {
            elapsed_seconds: start.elapsed().as_secs_f64(),
        },
    };
    emit(&report, output)?;
    Ok(code)
}

fn to_value<T: Serialize>(v: &T) -> Result<serde_json::Value> {
    serde_json::to_value(v).map_err(|e| Error::Io(e.to_string()))
}

fn emit(report: &RunReport, output: &Output) -> Result<()> {
    let sink: Box<dyn Write> = match &output.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match output.emit {
        Emit::Json => report.write_json(sink),
        Emit::Csv => report.write_csv(sink),
    }
}

fn q_points(seq: Option<&crate::reduced::QSequence>) -> Vec<QPoint> {
    seq.map(|s| s.entries.iter().map(|&(k, q)| QPoint { k, q }).collect())
        .unwrap_or_default()
}

fn falsify(a: &FalsifyArgs) -> Result<(Payload, i32)> {
    let p = &a.shape.profile;
    let out = falsification_probe(a.n, a.c, p, &a.shape.mollifier, a.kmax)?;
    let law = match slope_law(a.n, a.c, 1.0) {
        Ok(unit) => Some(unit * halfline_energy(p, REPORT_TOL)?),
        Err(_) => None,
    };
    let code = match out.verdict {
        Verdict::Divergent { .. } => EXIT_AFFIRMATIVE,
        _ => EXIT_INCONCLUSIVE,
    };
    Ok((
        Payload::Falsify {
            points: q_points(out.sequence.as_ref()),
            fit: out.fit,
            slope_law: law,
            verdict: out.verdict,
        },
        code,
    ))
}

fn contrast(a: &ContrastArgs) -> Result<(Payload, i32)> {
    if !(a.q > 2.0) {
        return Err(Error::InvalidArgument(format!(
            "contrast needs q > 2, got {}; the q = 2 endpoint is handled by `falsify`",
            a.q
        )));
    }
    let p = &a.shape.profile;
    let out = boundedness_probe(a.n, a.q, a.c, p, &a.shape.mollifier, a.kmax)?;
    let cfg = ProbeConfig::time_exponent(a.n, a.q, a.c, CutoffLevel::Unbounded, AngularDomain::up_to_critical(a.c))?;
    let limit = factorized_limit(&cfg, p, REPORT_TOL)?;
    let code = match out.verdict {
        Verdict::Bounded { .. } => EXIT_AFFIRMATIVE,
        _ => EXIT_INCONCLUSIVE,
    };
    Ok((
        Payload::Contrast {
            points: q_points(out.sequence.as_ref()),
            factorized_limit: limit,
            verdict: out.verdict,
        },
        code,
    ))
}

fn angular(a: &AngularArgs) -> Result<(Payload, i32)> {
    let eps = parse_eps_list(&a.eps)?;
    let sweep = epsilon_sweep(a.n, a.c, &eps, 1e-12)?;
    let code = if sweep.fit.is_some() {
        EXIT_AFFIRMATIVE
    } else {
        EXIT_INCONCLUSIVE
    };
    Ok((
        Payload::Angular {
            points: sweep.points.iter().map(|&(eps, j)| SweepPoint { eps, j }).collect(),
            fit: sweep.fit,
            log_coefficient: angular_log_coefficient(a.n, a.c)?,
        },
        code,
    ))
}

fn oracle(a: &OracleArgs) -> Result<(Payload, i32)> {
    let p = &a.shape.profile;
    let m = &a.shape.mollifier;
    let g = match a.box_halfwidth {
        Some(l) => GridSpec::with_box(a.n, a.grid, l, a.k, a.c, p, m)?,
        None => GridSpec::for_probe(a.n, a.grid, a.k, a.c, p, m)?,
    };
    let h = sample_mollifier_kernel(m, a.k, &g)?;
    if let Some(path) = &a.dump {
        dump_kernel(path, &h)?;
    }
    let src = MovingSource::along_first_axis(*p, *m, a.k, a.c, a.n)?;
    let s = 0.5 * (a.n as f64 - 1.0);
    let direct = dual_functional_from_kernel(&src, s, &h)?.powi(2);
    let (mode, reference) = if a.c == 0.0 {
        (
            "separable",
            radial_separable_value(a.n, s, CutoffLevel::Level(a.k), p, m, REPORT_TOL)?,
        )
    } else {
        let cfg = ProbeConfig::endpoint(a.n, a.c, CutoffLevel::Level(a.k), AngularDomain::full())?;
        let q = reduced_q_value(&cfg, p, m, REPORT_TOL)?;
        ("moving", (2.0 * PI).powi(-(a.n as i32)) * sphere_surface_measure(a.n - 2) * q)
    };
    let gap = if reference > 0.0 {
        (direct / reference - 1.0).abs()
    } else {
        direct.abs()
    };
    let passed = gap <= ORACLE_GAP_TOLERANCE;
    Ok((
        Payload::Oracle {
            mode: mode.into(),
            grid: g,
            s,
            direct,
            reference,
            gap,
            kernel_mass: l1_mass(&h),
            passed,
        },
        if passed { EXIT_AFFIRMATIVE } else { EXIT_INCONCLUSIVE },
    ))
}

fn n3(a: &N3Args) -> Result<(Payload, i32)> {
    let eps = parse_eps_list(&a.eps)?;
    if eps.is_empty() {
        return Err(Error::InvalidArgument("ε list is empty".into()));
    }
    let p = &a.shape.profile;
    let points = eps
        .iter()
        .map(|&e| {
            n3_remark_value(e, p, REPORT_TOL).map(|r| N3Point {
                eps: r.eps,
                closed_form: r.closed_form,
                quadrature: r.quadrature,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((
        Payload::N3 {
            energy: halfline_energy(p, REPORT_TOL)?,
            points,
        },
        EXIT_AFFIRMATIVE,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_ranges() {
        assert_eq!(parse_eps_list("1e-1..1e-3").unwrap(), vec![0.1, 0.01, 0.001]);
        assert_eq!(parse_eps_list("0.2, 0.02").unwrap(), vec![0.2, 0.02]);
        assert_eq!(parse_eps_list("").unwrap(), Vec::<f64>::new());
        assert_eq!(parse_eps_list("5e-1..5e-2").unwrap(), vec![0.5, 0.05]);
        assert!(parse_eps_list("1e-1..3e-2").is_err());
        assert!(parse_eps_list("1e-3..1e-1").is_err());
        assert!(parse_eps_list("a,b").is_err());
    }
}
