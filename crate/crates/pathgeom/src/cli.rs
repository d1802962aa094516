//! Command-line driver.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use symexpr::Sampler;

use crate::classify::{classify, ClassifyError};
use crate::geodesics::{
    fit_circle, integrate_geodesic, sr_frame, sr_jets, GeodesicError, GriffithsState, StepControl, Trajectory,
};
use crate::lagrange::{euler_lagrange, sr_geodesic_ode, LagrangeError};
use crate::odeparse::{metric_from_components, parse_lagrangian, parse_ode, render_primes, MetricInput, ParseError};

pub const SEED_ENV: &str = "PATHGEOM_SEED";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "pathgeom",
    version,
    about = "Decide whether the solutions of y'''' = F are sub-Riemannian geodesics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Seed for the zero-test sampler.
    #[arg(long, global = true, env = SEED_ENV, default_value_t = symexpr::zero::DEFAULT_SEED)]
    pub seed: u64,
    /// Sample points per zero test.
    #[arg(long, global = true, default_value_t = symexpr::zero::DEFAULT_SAMPLES, value_parser = parse_samples)]
    pub samples: usize,
    /// Relative tolerance of the numeric zero test.
    #[arg(long, global = true, default_value_t = symexpr::zero::DEFAULT_TOL, value_parser = parse_positive)]
    pub tol: f64,
    /// Withhold verdicts that rest on a zero found only by sampling.
    #[arg(long, global = true)]
    pub strict: bool,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Shorthand for `--format json`.
    #[arg(long, global = true, conflicts_with = "format")]
    pub json: bool,
    /// Write the artifact here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the invariant ladder on `y'''' = F`.
    Classify(TextInput),
    /// Euler-Lagrange equation of a second-order Lagrangian `L(x, y, y', y'')`.
    El(TextInput),
    /// Geodesic equation `y'''' = F` of a metric on the contact planes.
    SrOde(MetricArgs),
    /// Torsion, curvature and their derivatives for a metric.
    SrFrame(MetricArgs),
    /// Integrate a geodesic of a metric.
    Geodesic(GeodesicArgs),
}

#[derive(Debug, Args)]
pub struct TextInput {
    /// Expression text; use `--file` to read it from a file.
    #[arg(required_unless_present = "file", allow_hyphen_values = true)]
    pub text: Option<String>,
    #[arg(long, conflicts_with = "text")]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MetricArgs {
    #[arg(long = "E", allow_hyphen_values = true)]
    pub e: String,
    #[arg(long = "F", allow_hyphen_values = true)]
    pub f: String,
    #[arg(long = "G", allow_hyphen_values = true)]
    pub g: String,
    /// Proceed when the definiteness check fails.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct GeodesicArgs {
    #[command(flatten)]
    pub metric: MetricArgs,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x0: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub y0: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub z0: f64,
    /// Initial direction angle against the first frame vector, in radians.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub angle: f64,
    /// Initial multiplier.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub xmult: f64,
    /// Arclength to integrate.
    #[arg(long, value_parser = parse_positive)]
    pub length: f64,
    /// Fixed step size; default is adaptive.
    #[arg(long, value_parser = parse_positive, conflicts_with = "step_tol")]
    pub step: Option<f64>,
    /// Local error tolerance of the adaptive integrator.
    #[arg(long, value_parser = parse_positive, default_value_t = 1e-10)]
    pub step_tol: f64,
}

fn parse_samples(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    if n < 5 {
        return Err("at least 5 samples are required".into());
    }
    Ok(n)
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !(x.is_finite() && x > 0.0) {
        return Err("must be a positive number".into());
    }
    Ok(x)
}

/// Exit status by outcome class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Definitive = 0,
    InputError = 1,
    Withheld = 2,
    Internal = 3,
}

/// What a command produced; `main` writes it out.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub status: Status,
    pub artifact: String,
    pub diagnostics: String,
}

impl Outcome {
    fn ok(artifact: String) -> Outcome {
        Outcome {
            status: Status::Definitive,
            artifact,
            diagnostics: String::new(),
        }
    }

    fn fail(status: Status, msg: impl Into<String>) -> Outcome {
        let mut diagnostics = msg.into();
        if !diagnostics.ends_with('\n') {
            diagnostics.push('\n');
        }
        Outcome {
            status,
            artifact: String::new(),
            diagnostics,
        }
    }
}

impl Cli {
    fn sampler(&self) -> Sampler {
        Sampler::new(self.seed, self.samples, self.tol)
    }

    fn format(&self, default: Format) -> Format {
        if self.json {
            Format::Json
        } else {
            self.format.unwrap_or(default)
        }
    }
}

fn read_text(input: &TextInput) -> Result<String, Outcome> {
    match (&input.text, &input.file) {
        (Some(t), _) => Ok(t.clone()),
        (None, Some(p)) => std::fs::read_to_string(p)
            .map(|s| s.trim().to_string())
            .map_err(|e| Outcome::fail(Status::InputError, format!("cannot read {}: {e}", p.display()))),
        (None, None) => Err(Outcome::fail(Status::InputError, "no input given")),
    }
}

fn parse_failure(text: &str, e: &ParseError) -> Outcome {
    let mut msg = format!("parse error: {e}\n");
    if let Some(pos) = e.position() {
        let _ = writeln!(msg, "  {text}\n  {}^", " ".repeat(pos.min(text.len())));
    }
    Outcome::fail(Status::InputError, msg)
}

fn metric(args: &MetricArgs, sampler: &Sampler) -> Result<(MetricInput, Vec<String>), Outcome> {
    metric_from_components(&args.e, &args.f, &args.g, sampler, args.force).map_err(|e| match e {
        ParseError::NotDefinite { .. } => Outcome::fail(Status::InputError, format!("{e}\n")),
        other => Outcome::fail(Status::InputError, format!("parse error in metric: {other}\n")),
    })
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

fn no_csv(cmd: &str) -> Outcome {
    Outcome::fail(Status::InputError, format!("`{cmd}` has no CSV output\n"))
}

pub fn execute(cli: &Cli) -> Outcome {
    let sampler = cli.sampler();
    let result = match &cli.command {
        Command::Classify(input) => cmd_classify(cli, input, &sampler),
        Command::El(input) => cmd_el(cli, input, &sampler),
        Command::SrOde(args) => cmd_sr_ode(cli, args, &sampler),
        Command::SrFrame(args) => cmd_sr_frame(cli, args, &sampler),
        Command::Geodesic(args) => cmd_geodesic(cli, args, &sampler),
    };
    result.unwrap_or_else(|o| o)
}

pub fn cmd_classify(cli: &Cli, input: &TextInput, sampler: &Sampler) -> Result<Outcome, Outcome> {
    let format = cli.format(Format::Text);
    if format == Format::Csv {
        return Err(no_csv("classify"));
    }
    let text = read_text(input)?;
    let ode = parse_ode(&text).map_err(|e| parse_failure(&text, &e))?;
    let report = classify(&ode, sampler, cli.strict).map_err(|e| match e {
        ClassifyError::Internal { .. } => Outcome::fail(Status::Internal, format!("{e}\n")),
        ClassifyError::Reduction(r) => Outcome::fail(Status::Internal, format!("reduction failed: {r}\n")),
    })?;
    let mut diagnostics = String::new();
    for (stage, t) in &report.timings {
        let _ = writeln!(diagnostics, "timing: {stage} {:.3} ms", t.as_secs_f64() * 1e3);
    }
    let artifact = match format {
        Format::Json => to_json(&report),
        _ => report.render_text(),
    };
    Ok(Outcome {
        status: if report.is_withheld() {
            Status::Withheld
        } else {
            Status::Definitive
        },
        artifact,
        diagnostics,
    })
}

#[derive(Serialize)]
struct OdeArtifact {
    rhs: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    multiplier: Option<String>,
    warnings: Vec<String>,
}

impl OdeArtifact {
    fn text(&self) -> String {
        let mut s = format!("y'''' = {}\n", self.rhs);
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }
}

fn lagrange_failure(e: LagrangeError) -> Outcome {
    Outcome::fail(Status::InputError, format!("{e}\n"))
}

pub fn cmd_el(cli: &Cli, input: &TextInput, sampler: &Sampler) -> Result<Outcome, Outcome> {
    let format = cli.format(Format::Text);
    if format == Format::Csv {
        return Err(no_csv("el"));
    }
    let text = read_text(input)?;
    let l = parse_lagrangian(&text).map_err(|e| parse_failure(&text, &e))?;
    let el = euler_lagrange(&l, sampler).map_err(lagrange_failure)?;
    let art = OdeArtifact {
        rhs: render_primes(&el.rhs),
        multiplier: Some(render_primes(&el.multiplier)),
        warnings: Vec::new(),
    };
    Ok(Outcome::ok(match format {
        Format::Json => to_json(&art),
        _ => art.text(),
    }))
}

pub fn cmd_sr_ode(cli: &Cli, args: &MetricArgs, sampler: &Sampler) -> Result<Outcome, Outcome> {
    let format = cli.format(Format::Text);
    if format == Format::Csv {
        return Err(no_csv("sr-ode"));
    }
    let (m, warnings) = metric(args, sampler)?;
    let ode = sr_geodesic_ode(&m, sampler).map_err(lagrange_failure)?;
    let art = OdeArtifact {
        rhs: render_primes(&ode.rhs),
        multiplier: None,
        warnings,
    };
    Ok(Outcome::ok(match format {
        Format::Json => to_json(&art),
        _ => art.text(),
    }))
}

fn geodesic_failure(e: GeodesicError) -> Outcome {
    let status = match e {
        GeodesicError::Internal { .. }
        | GeodesicError::Forms(_)
        | GeodesicError::Solve(_)
        | GeodesicError::Reduction(_) => Status::Internal,
        GeodesicError::NotLifted => Status::Internal,
        _ => Status::InputError,
    };
    Outcome::fail(status, format!("{e}\n"))
}

pub fn cmd_sr_frame(cli: &Cli, args: &MetricArgs, sampler: &Sampler) -> Result<Outcome, Outcome> {
    let format = cli.format(Format::Text);
    if format == Format::Csv {
        return Err(no_csv("sr-frame"));
    }
    let (m, warnings) = metric(args, sampler)?;
    let frame = sr_frame(&m, sampler).map_err(geodesic_failure)?;
    let jets = sr_jets(&frame, sampler).map_err(geodesic_failure)?;
    let mut entries: Vec<(&str, String)> = vec![
        ("a1", frame.a1.to_string()),
        ("a2", frame.a2.to_string()),
        ("K", frame.k.to_string()),
    ];
    entries.extend(jets.named().into_iter().map(|(k, v)| (k, v.to_string())));
    let artifact = match format {
        Format::Json => {
            let mut map = serde_json::Map::new();
            for (k, v) in &entries {
                map.insert((*k).into(), serde_json::Value::String(v.clone()));
            }
            map.insert("warnings".into(), serde_json::to_value(&warnings).unwrap());
            to_json(&map)
        }
        _ => {
            let mut s = String::new();
            for (k, v) in &entries {
                let _ = writeln!(s, "{k} = {v}");
            }
            for w in &warnings {
                let _ = writeln!(s, "warning: {w}");
            }
            s
        }
    };
    Ok(Outcome::ok(artifact))
}

#[derive(Serialize)]
struct CircleFit {
    center: (f64, f64),
    radius: f64,
    residual: f64,
}

#[derive(Serialize)]
struct GeodesicArtifact<'a> {
    steps: usize,
    contact_residual: f64,
    speed_residual: f64,
    circle_fit: Option<CircleFit>,
    columns: [&'a str; 5],
    samples: Vec<[f64; 5]>,
}

fn rows(t: &Trajectory) -> Vec<[f64; 5]> {
    t.samples
        .iter()
        .map(|s| [s.s, s.state.x, s.state.y, s.state.z, s.state.x_mult])
        .collect()
}

pub fn cmd_geodesic(cli: &Cli, args: &GeodesicArgs, sampler: &Sampler) -> Result<Outcome, Outcome> {
    let format = cli.format(Format::Csv);
    let (m, warnings) = metric(&args.metric, sampler)?;
    let s0 = GriffithsState {
        x: args.x0,
        y: args.y0,
        z: args.z0,
        angle: args.angle,
        x_mult: args.xmult,
    };
    let control = match args.step {
        Some(step) => StepControl::Fixed { step },
        None => StepControl::Adaptive {
            tol: args.step_tol,
            initial_step: (args.length / 100.0).min(0.05),
        },
    };
    let traj = integrate_geodesic(&m, s0, args.length, control, sampler).map_err(geodesic_failure)?;
    let mut diagnostics = String::new();
    for w in &warnings {
        let _ = writeln!(diagnostics, "warning: {w}");
    }
    let _ = writeln!(
        diagnostics,
        "steps {}, contact residual {:.3e}, speed residual {:.3e}",
        traj.steps, traj.contact_residual, traj.speed_residual
    );
    let columns = ["s", "x", "y", "z", "x_mult"];
    let artifact = match format {
        Format::Csv => {
            let mut s = columns.join(",");
            s.push('\n');
            for r in rows(&traj) {
                let line: Vec<String> = r.iter().map(|v| format!("{v:.12e}")).collect();
                s.push_str(&line.join(","));
                s.push('\n');
            }
            s
        }
        Format::Json | Format::Text => {
            let points: Vec<(f64, f64)> = traj.samples.iter().map(|s| (s.state.x, s.state.z)).collect();
            let art = GeodesicArtifact {
                steps: traj.steps,
                contact_residual: traj.contact_residual,
                speed_residual: traj.speed_residual,
                circle_fit: fit_circle(&points).map(|c| CircleFit {
                    center: c.center,
                    radius: c.radius,
                    residual: c.residual,
                }),
                columns,
                samples: rows(&traj),
            };
            if format == Format::Json {
                to_json(&art)
            } else {
                let mut s = String::new();
                let _ = writeln!(s, "steps: {}", art.steps);
                let _ = writeln!(s, "contact residual: {:.3e}", art.contact_residual);
                let _ = writeln!(s, "speed residual: {:.3e}", art.speed_residual);
                if let Some(c) = &art.circle_fit {
                    let _ = writeln!(
                        s,
                        "circle fit of (x, z): center ({:.9}, {:.9}), radius {:.9}, residual {:.3e}",
                        c.center.0, c.center.1, c.radius, c.residual
                    );
                }
                let end = traj.samples.last().unwrap().state;
                let _ = writeln!(
                    s,
                    "end: x {:.9} y {:.9} z {:.9} x_mult {:.9}",
                    end.x, end.y, end.z, end.x_mult
                );
                s
            }
        }
    };
    Ok(Outcome {
        status: Status::Definitive,
        artifact,
        diagnostics,
    })
}
