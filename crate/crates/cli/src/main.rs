use clap::{Args, Parser, Subcommand};
use homsing::analysis::{
    classify, gradient_classify, residual_at, AnalysisError, GradientReport, GridSpec, ResidualMode,
    ResidualReport, SingularityReport, SingularityType, Thresholds,
};
use homsing::families::{Solution, SolutionSpec, SpecError};
use homsing::field::SphereField;
use homsing::geometry::{north, south};
use homsing::liouville::{AsymptoticFit, LiouvilleField, LiouvilleInput};
use homsing::reduced_ode::{
    estimate_gamma_bounds_with, integrate_reduced, ReducedConstants, ReducedError, ReducedState,
};
use nalgebra::Vector3;
use rand::{rngs::StdRng, Rng, SeedableRng};
use serde::Serialize;
use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use thiserror::Error;

#[derive(Parser)]
#[command(name = "homsing", version, about = "Construct and verify (-1)-homogeneous Navier-Stokes solutions")]
struct Cli {
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Momentum residual tolerance for `verify`.
    #[arg(long, global = true, default_value_t = 1e-5)]
    tol_residual: f64,
    /// Divergence residual tolerance for `verify`.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol_divergence: f64,
    #[arg(long, global = true, default_value_t = 20)]
    grid_ntheta: usize,
    #[arg(long, global = true, default_value_t = 12)]
    grid_nphi: usize,
    /// Distance kept from the poles and from domain boundaries.
    #[arg(long, global = true, default_value_t = 0.3)]
    theta_margin: f64,
    /// Comma-separated radii for 3D residual sampling.
    #[arg(long, global = true, value_delimiter = ',', default_value = "1")]
    radii: Vec<f64>,
    /// Jitter grid nodes with this seed (off by default).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a field on the grid: theta,phi,u_r,u_theta,u_phi,p
    Eval(InputArg),
    /// 3D residual check, JSON report, exit 1 on failure
    Verify {
        #[command(flatten)]
        input: InputArg,
        /// Drop the viscous term.
        #[arg(long)]
        euler: bool,
    },
    /// Asymptotic parameters and singularity type at a pole
    Classify {
        #[command(flatten)]
        input: InputArg,
        /// `S`, `N` or a vector `x,y,z`.
        #[arg(long, default_value = "S", allow_hyphen_values = true)]
        pole: String,
        #[arg(long, default_value_t = 1e-2)]
        threshold: f64,
    },
    /// Build a field from a prescription, report fitted singular slopes
    Liouville {
        #[command(flatten)]
        input: InputArg,
        /// Also write the sampled field as CSV.
        #[arg(long)]
        field_csv: Option<PathBuf>,
    },
    /// Admissible interval of U_theta(0) for the no-swirl reduced system
    GammaBounds {
        #[command(flatten)]
        c: Constants,
        #[arg(long, default_value_t = 1e-3)]
        width: f64,
    },
    /// Integrate the reduced system: y,U_theta,U_phi,U_phi_prime
    Ode {
        #[command(flatten)]
        c: Constants,
        /// U_theta at the anchor.
        #[arg(long, allow_hyphen_values = true)]
        gamma: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        u_phi: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        u_phi_prime: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        y0: f64,
        #[arg(long, default_value_t = -0.9, allow_hyphen_values = true)]
        y_min: f64,
        #[arg(long, default_value_t = 0.9, allow_hyphen_values = true)]
        y_max: f64,
        #[arg(long, default_value_t = 37)]
        n: usize,
    },
}

#[derive(Args)]
struct InputArg {
    /// JSON file (`-` for stdin) or inline JSON.
    #[arg(long, alias = "spec")]
    input: String,
}

#[derive(Args)]
struct Constants {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    c1: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    c2: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    c3: f64,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Failed(String),
    #[error("{0}")]
    Inconclusive(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Failed(_) | CliError::Io(_) => 1,
            CliError::Input(_) => 2,
            CliError::Inconclusive(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Input(_) => "input",
            CliError::Failed(_) => "failure",
            CliError::Inconclusive(_) => "inconclusive",
            CliError::Io(_) => "io",
        }
    }
}

impl From<SpecError> for CliError {
    fn from(e: SpecError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ReducedError> for CliError {
    fn from(e: ReducedError) -> Self {
        match e {
            ReducedError::InvalidRange(..)
            | ReducedError::NonzeroAnchor
            | ReducedError::OutsideJ { .. }
            | ReducedError::BelowMinusOne => CliError::Input(e.to_string()),
            ReducedError::NoAdmissibleGamma => CliError::Inconclusive(e.to_string()),
            _ => CliError::Failed(e.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::BadPole => CliError::Input(e.to_string()),
            AnalysisError::Inconclusive { .. } | AnalysisError::EmptyGrid { .. } => {
                CliError::Inconclusive(e.to_string())
            }
            _ => CliError::Failed(e.to_string()),
        }
    }
}

/// A catalog member or a Liouville construction.
enum Model {
    Catalog(Solution),
    Liouville(LiouvilleField),
}

impl Model {
    fn field(&self) -> &dyn SphereField {
        match self {
            Model::Catalog(s) => s,
            Model::Liouville(l) => l,
        }
    }

    fn theta_range(&self) -> (f64, f64) {
        match self {
            Model::Catalog(s) => (s.domain().theta_min, s.domain().theta_max),
            Model::Liouville(_) => (0.0, PI),
        }
    }
}

fn read_json(arg: &str) -> Result<serde_json::Value, CliError> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else if arg == "-" {
        std::io::read_to_string(std::io::stdin())?
    } else {
        std::fs::read_to_string(arg).map_err(|e| CliError::Input(format!("{arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("malformed JSON: {e}")))
}

fn parse_liouville(v: serde_json::Value) -> Result<LiouvilleField, CliError> {
    let input: LiouvilleInput =
        serde_json::from_value(v).map_err(|e| CliError::Input(format!("invalid prescription: {e}")))?;
    LiouvilleField::from_input(&input).map_err(|e| CliError::Input(e.to_string()))
}

fn load_model(arg: &str) -> Result<Model, CliError> {
    let v = read_json(arg)?;
    if v.get("family").is_some() {
        let spec: SolutionSpec =
            serde_json::from_value(v).map_err(|e| CliError::Input(format!("invalid solution spec: {e}")))?;
        Ok(Model::Catalog(Solution::new(spec)?))
    } else {
        Ok(Model::Liouville(parse_liouville(v)?))
    }
}

fn parse_pole(s: &str) -> Result<Vector3<f64>, CliError> {
    match s {
        "S" | "s" => Ok(south()),
        "N" | "n" => Ok(north()),
        _ => {
            let v: Vec<f64> = s
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| CliError::Input(format!("pole must be S, N or x,y,z, got {s:?}")))?;
            let p = match v[..] {
                [x, y, z] => Vector3::new(x, y, z),
                _ => return Err(CliError::Input(format!("pole must have three components, got {s:?}"))),
            };
            if !(p.norm() > 0.0) {
                return Err(CliError::Input("pole must be nonzero".into()));
            }
            Ok(p.normalize())
        }
    }
}

struct Ctx {
    grid: GridSpec,
    seed: Option<u64>,
    out: Option<PathBuf>,
}

impl Ctx {
    /// Grid nodes over `(0, pi)`, optionally jittered inside their cells.
    fn nodes(&self) -> Vec<(f64, f64)> {
        let mut nodes = self.grid.angles(0.0, PI);
        if let Some(seed) = self.seed {
            let mut rng = StdRng::seed_from_u64(seed);
            let lo = self.grid.theta_margin;
            let hi = PI - self.grid.theta_margin;
            let dt = if self.grid.n_theta > 1 { (hi - lo) / (self.grid.n_theta - 1) as f64 } else { 0.0 };
            let dp = 2.0 * PI / self.grid.n_phi.max(1) as f64;
            for (t, p) in nodes.iter_mut() {
                *t = (*t + 0.5 * dt * rng.gen_range(-1.0..1.0)).clamp(lo, hi);
                *p = (*p + 0.5 * dp * rng.gen_range(-1.0..1.0)).rem_euclid(2.0 * PI);
            }
        }
        nodes
    }

    fn emit(&self, text: &str) -> Result<(), CliError> {
        match &self.out {
            Some(path) => std::fs::write(path, text)?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    }

    fn emit_json<T: Serialize>(&self, v: &T) -> Result<(), CliError> {
        let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Failed(e.to_string()))?;
        s.push('\n');
        self.emit(&s)
    }
}

fn e17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Field CSV and the number of nodes that could not be evaluated.
fn field_csv(model: &Model, nodes: &[(f64, f64)]) -> (String, usize) {
    let mut out = String::from("theta,phi,u_r,u_theta,u_phi,p\n");
    let mut omitted = 0;
    let (lo, hi) = model.theta_range();
    for &(t, p) in nodes {
        let s = if t > lo && t < hi { model.field().sample(t, p).ok().filter(|s| s.is_finite()) } else { None };
        match s {
            Some(s) => {
                let row = [t, p, s.u_r, s.u_theta, s.u_phi, s.p].map(e17).join(",");
                out.push_str(&row);
                out.push('\n');
            }
            None => omitted += 1,
        }
    }
    (out, omitted)
}

fn note(v: serde_json::Value) {
    eprintln!("{v}");
}

#[derive(Serialize)]
struct VerifyOutput {
    mode: ResidualMode,
    tol_momentum: f64,
    tol_divergence: f64,
    pass: bool,
    report: ResidualReport,
}

#[derive(Serialize)]
struct ClassifyOutput {
    #[serde(flatten)]
    report: SingularityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    gradient: Option<GradientReport>,
}

#[derive(Serialize)]
struct SlopeReport {
    pass: bool,
    fits: Vec<SlopeEntry>,
}

#[derive(Serialize)]
#[serde(untagged)]
enum SlopeEntry {
    Fit(AsymptoticFit),
    Error { error: String },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if cli.theta_margin <= 0.0 || cli.radii.iter().any(|r| !(*r > 0.0)) {
        return Err(CliError::Input("theta margin and radii must be positive".into()));
    }
    let ctx = Ctx {
        grid: GridSpec {
            n_theta: cli.grid_ntheta,
            n_phi: cli.grid_nphi,
            theta_margin: cli.theta_margin,
            radii: cli.radii.clone(),
        },
        seed: cli.seed,
        out: cli.out.clone(),
    };
    match cli.command {
        Command::Eval(input) => {
            let model = load_model(&input.input)?;
            let (csv, omitted) = field_csv(&model, &ctx.nodes());
            if omitted > 0 {
                note(serde_json::json!({ "omitted_rows": omitted }));
            }
            ctx.emit(&csv)
        }
        Command::Verify { input, euler } => {
            let model = load_model(&input.input)?;
            let mode = if euler { ResidualMode::Euler } else { ResidualMode::NavierStokes };
            let (lo, hi) = model.theta_range();
            let m = ctx.grid.theta_margin;
            let nodes: Vec<_> = ctx.nodes().into_iter().filter(|&(t, _)| t >= lo + m && t <= hi - m).collect();
            let report = residual_at(model.field(), &nodes, &ctx.grid.radii, mode)?;
            let pass = report.passes(cli.tol_residual, cli.tol_divergence);
            ctx.emit_json(&VerifyOutput {
                mode,
                tol_momentum: cli.tol_residual,
                tol_divergence: cli.tol_divergence,
                pass,
                report,
            })?;
            if pass {
                Ok(())
            } else {
                Err(CliError::Failed("residual above tolerance".into()))
            }
        }
        Command::Classify { input, pole, threshold } => {
            let model = load_model(&input.input)?;
            let p = parse_pole(&pole)?;
            let th = Thresholds { tau: threshold, kappa: threshold, gradient: threshold };
            let smooth = model.field().singular_points().is_empty() && matches!(model, Model::Catalog(_));
            let report = classify(model.field(), &p, &th, smooth)?;
            let gradient = match &model {
                Model::Catalog(s) if s.spec().is_axisymmetric() && (p - north()).norm().min((p - south()).norm()) < 1e-12 => {
                    gradient_classify(s, &p, &th).ok()
                }
                _ => None,
            };
            let inconclusive = report.kind == SingularityType::Inconclusive;
            ctx.emit_json(&ClassifyOutput { report, gradient })?;
            if inconclusive {
                Err(CliError::Inconclusive("asymptotic extraction did not converge".into()))
            } else {
                Ok(())
            }
        }
        Command::Liouville { input, field_csv: csv_path } => {
            let field = parse_liouville(read_json(&input.input)?)?;
            let fits: Vec<SlopeEntry> = field
                .verify_asymptotics()
                .into_iter()
                .map(|r| match r {
                    Ok(f) => SlopeEntry::Fit(f),
                    Err(e) => SlopeEntry::Error { error: e.to_string() },
                })
                .collect();
            let pass = fits.iter().all(|f| matches!(f, SlopeEntry::Fit(a) if a.within_tolerance != Some(false)));
            if let Some(path) = csv_path {
                let (csv, omitted) = field_csv(&Model::Liouville(field), &ctx.nodes());
                if omitted > 0 {
                    note(serde_json::json!({ "omitted_rows": omitted }));
                }
                std::fs::write(path, csv)?;
            }
            ctx.emit_json(&SlopeReport { pass, fits })?;
            if pass {
                Ok(())
            } else {
                Err(CliError::Failed("fitted slopes outside tolerance".into()))
            }
        }
        Command::GammaBounds { c, width } => {
            if !(width > 0.0) {
                return Err(CliError::Input("width must be positive".into()));
            }
            let probe = estimate_gamma_bounds_with((c.c1, c.c2, c.c3), width)?;
            ctx.emit_json(&probe)
        }
        Command::Ode { c, gamma, u_phi, u_phi_prime, y0, y_min, y_max, n } => {
            let init = ReducedState { y: y0, u_theta: gamma, u_phi, u_phi_prime, ..Default::default() };
            let traj = integrate_reduced(init, ReducedConstants::from_c(c.c1, c.c2, c.c3), (y_min, y_max))?;
            ctx.emit(&traj.to_csv(y_min, y_max, n))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            note(serde_json::json!({ "error": "usage", "message": e.to_string().trim_end(), "exit_code": 2 }));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            note(serde_json::json!({ "error": e.kind(), "message": e.to_string(), "exit_code": e.code() }));
            ExitCode::from(e.code())
        }
    }
}
