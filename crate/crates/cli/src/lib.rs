//! Command-line front-end for `pamcert`.
//!
//! [`run`] resolves settings (flags over config file over `PAMCERT_SEED`
//! over defaults), executes one subcommand and returns its output text.

pub mod config;
pub mod output;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use pamcert::bloch::{behavior_of, inflate, HermitianOperator, MeasurementSet, Preparation};
use pamcert::certifier::{
    iterate_visibility, vertex_states, CertificationResult, IterationConfig, VisibilityProblem, DEFAULT_POVM_T,
};
use pamcert::error::Error;
use pamcert::geometry::{measurements_from_vertices, polyhedron, PolyhedronName, PolyhedronSpec};
use pamcert::incompatibility::{mirror_symmetric, robustness, DEFAULT_GAP_TOL};
use pamcert::witnesses::{
    activation_preparations, rac_success, rac_success_from_behavior, s_threshold, s_value, subsets, ActivationFamily,
    CLASSICAL_S_BOUND,
};

pub use config::{GridSpec, RunConfig};
use output::{fmt_float, to_csv, to_json};

pub const SEED_ENV: &str = "PAMCERT_SEED";

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or invalid input: config, polyhedron file, shapes.
    #[error("{0}")]
    Input(String),
    #[error("{message}")]
    Solver { message: String, trace: Vec<f64> },
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Solver { .. } => 3,
            CliError::Other(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::IterationAborted { trace, .. } => CliError::Solver { message, trace },
            Error::Solver(_) | Error::ConicSolver(_) => CliError::Solver { message, trace: Vec::new() },
            Error::Unrepresentable | Error::IndexOutOfRange { .. } | Error::PopulationExceeded { .. } => {
                CliError::Other(message)
            }
            _ => CliError::Input(message),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "pamcert", version, about = "Classicality certification for prepare-and-measure scenarios")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Inscribed radius and facets of a probe polyhedron.
    Eta,
    /// Visibility up to which preparations are classical (JSON), or a CSV
    /// heatmap over triads {x, z, r(theta, phi)} when none are configured.
    CertifyPreparations,
    /// Noise level up to which measurements are classical (JSON).
    CertifyMeasurements,
    /// Triad visibility against the witness threshold of the activation family (CSV).
    ActivationScan,
    /// Incompatibility robustness against classicality of the mirror-symmetric triple (CSV).
    IncompatScan,
    /// Witness value and random-access-code success probability (JSON).
    Rac,
    /// Print the JSON schema of the config file.
    Schema,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Opts {
    /// JSON config file; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Built-in polyhedron or vertex file [default: icosahedron for eta and
    /// certify-preparations, rhombicuboctahedron otherwise].
    #[arg(long, global = true, value_name = "NAME|PATH")]
    pub polyhedron: Option<String>,
    /// Override the inscribed radius of the polyhedron.
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    /// RNG seed [default: $PAMCERT_SEED, else 0].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Strategies per LP round [default: 2000].
    #[arg(long, global = true)]
    pub batch_size: Option<usize>,
    /// Maximum LP rounds [default: 200].
    #[arg(long, global = true)]
    pub max_iters: Option<usize>,
    /// Stall tolerance on the visibility [default: 1e-6].
    #[arg(long, global = true)]
    pub alpha_tol: Option<f64>,
    /// Certify against all POVMs by inflating with --t.
    #[arg(long, global = true)]
    pub povm: bool,
    /// Inflation factor for --povm [default: 0.816495580928].
    #[arg(long, global = true)]
    pub t: Option<f64>,
    /// Write output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Worker threads for scans [default: all cores].
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone)]
pub struct Settings {
    pub config: RunConfig,
    pub iteration: IterationConfig,
    pub povm: bool,
    pub t: f64,
    pub jobs: usize,
    pub gap_tol: f64,
    pub out: Option<PathBuf>,
}

impl Settings {
    pub fn resolve(opts: &Opts, seed_env: Option<&str>) -> Result<Self, CliError> {
        let mut c = match &opts.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        macro_rules! flag {
            ($($f:ident),*) => { $( if opts.$f.is_some() { c.$f = opts.$f.clone(); } )* };
        }
        flag!(polyhedron, eta, seed, batch_size, max_iters, alpha_tol, t, out, jobs);
        if opts.povm {
            c.povm = Some(true);
        }
        let seed = match (c.seed, seed_env) {
            (Some(s), _) => s,
            (None, Some(v)) => {
                v.trim().parse().map_err(|_| CliError::Input(format!("{SEED_ENV}={v:?} is not an unsigned integer")))?
            }
            (None, None) => 0,
        };
        let defaults = IterationConfig::default();
        let iteration = IterationConfig {
            batch_size: c.batch_size.unwrap_or(defaults.batch_size),
            max_iters: c.max_iters.unwrap_or(defaults.max_iters),
            stall_rounds: c.stall_rounds.unwrap_or(defaults.stall_rounds),
            alpha_tol: c.alpha_tol.unwrap_or(defaults.alpha_tol),
            seed,
            exclude_active: c.exclude_active.unwrap_or(defaults.exclude_active),
            pricing_columns: c.pricing_columns.unwrap_or(defaults.pricing_columns),
            ..defaults
        };
        let t = c.t.unwrap_or(DEFAULT_POVM_T);
        if t.is_nan() || t <= 0.0 || t > 1.0 {
            return Err(CliError::Input(format!("t = {t} must lie in (0, 1]")));
        }
        if let Some(eta) = c.eta {
            if eta.is_nan() || eta <= 0.0 || eta > 1.0 {
                return Err(CliError::Input(format!("eta = {eta} must lie in (0, 1]")));
            }
        }
        if iteration.alpha_tol.is_nan() || iteration.alpha_tol < 0.0 {
            return Err(CliError::Input("alpha-tol must be non-negative".into()));
        }
        if c.jobs == Some(0) {
            return Err(CliError::Input("jobs must be positive".into()));
        }
        let gap_tol = c.gap_tol.unwrap_or(DEFAULT_GAP_TOL);
        if gap_tol.is_nan() || gap_tol <= 0.0 {
            return Err(CliError::Input("gap_tol must be positive".into()));
        }
        Ok(Self {
            povm: c.povm.unwrap_or(false),
            t,
            jobs: c.jobs.unwrap_or(0),
            gap_tol,
            out: c.out.clone(),
            iteration,
            config: c,
        })
    }

    /// Effective inflation factor: `t` with `--povm`, otherwise 1.
    fn inflation(&self) -> f64 {
        if self.povm {
            self.t
        } else {
            1.0
        }
    }

    fn polyhedron(&self, default: PolyhedronName) -> Result<PolyhedronSpec, CliError> {
        match &self.config.polyhedron {
            None => Ok(polyhedron(default)?),
            Some(arg) => load_polyhedron(arg),
        }
    }

    fn eta(&self, poly: &PolyhedronSpec) -> Result<f64, CliError> {
        match self.config.eta {
            Some(eta) => Ok(eta),
            None => Ok(poly.eta()?),
        }
    }

    fn visibility(&self) -> f64 {
        self.config.visibility.unwrap_or(1.0)
    }

    /// Maps grid points on a pool of `jobs` threads, keeping grid order.
    fn parallel<I, T, F>(&self, items: &[I], f: F) -> Result<Vec<T>, CliError>
    where
        I: Copy + Sync,
        T: Send,
        F: Fn(I) -> Result<T, CliError> + Sync + Send,
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| CliError::Other(format!("thread pool: {e}")))?;
        pool.install(|| items.par_iter().map(|&x| f(x)).collect())
    }
}

/// Built-in name, else a path to a vertex file.
pub fn load_polyhedron(arg: &str) -> Result<PolyhedronSpec, CliError> {
    if let Ok(name) = arg.parse::<PolyhedronName>() {
        return Ok(polyhedron(name)?);
    }
    let path = Path::new(arg);
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("`{arg}` is neither a built-in polyhedron nor a readable file: {e}")))?;
    let spec = PolyhedronSpec::from_json(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    spec.hull().map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(spec)
}

/// Output text and the resolved `--out` destination.
pub fn run(cli: &Cli) -> Result<(String, Option<PathBuf>), CliError> {
    let env = std::env::var(SEED_ENV).ok();
    let settings = Settings::resolve(&cli.opts, env.as_deref())?;
    Ok((execute(cli.command, &settings)?, settings.out))
}

pub fn execute(command: Command, s: &Settings) -> Result<String, CliError> {
    match command {
        Command::Eta => eta(s),
        Command::CertifyPreparations => certify_preparations(s),
        Command::CertifyMeasurements => certify_measurements(s),
        Command::ActivationScan => activation_scan(s),
        Command::IncompatScan => incompat_scan(s),
        Command::Rac => rac(s),
        Command::Schema => Ok(format!("{}\n", serde_json::to_string_pretty(&config::schema()).expect("schema"))),
    }
}

#[derive(Serialize)]
struct EtaReport {
    polyhedron: String,
    vertices: Vec<[f64; 3]>,
    facets: usize,
    eta: f64,
}

fn eta(s: &Settings) -> Result<String, CliError> {
    let poly = s.polyhedron(PolyhedronName::Icosahedron)?;
    let hull = poly.hull()?;
    Ok(to_json(&EtaReport {
        polyhedron: poly.name.to_string(),
        vertices: poly.vertices.clone(),
        facets: hull.len(),
        eta: poly.eta()?,
    }))
}

#[derive(Serialize)]
struct CertificationReport {
    polyhedron: String,
    povm: bool,
    t: f64,
    replay_error: f64,
    result: CertificationResult,
}

/// Preparation certification of qubit states given by Bloch vectors.
fn certify_states(
    s: &Settings,
    poly: &PolyhedronSpec,
    eta: f64,
    bloch: &[[f64; 3]],
) -> Result<(VisibilityProblem, CertificationResult), CliError> {
    let vis = s.visibility();
    let states: Vec<HermitianOperator> = bloch
        .iter()
        .enumerate()
        .map(|(x, r)| {
            let p = Preparation::qubit(x, [vis * r[0], vis * r[1], vis * r[2]])?;
            inflate(&p.state, s.inflation())
        })
        .collect::<Result<_, Error>>()?;
    let probes = measurements_from_vertices(poly)?;
    let problem = VisibilityProblem::for_preparations(&states, &probes, eta)?;
    s.iteration.validate(problem.scenario())?;
    let result = iterate_visibility(&problem, &s.iteration, eta)?;
    Ok((problem, result))
}

fn certify_meas(
    s: &Settings,
    poly: &PolyhedronSpec,
    eta: f64,
    meas: &[MeasurementSet],
) -> Result<(VisibilityProblem, CertificationResult), CliError> {
    let probes: Vec<HermitianOperator> =
        vertex_states(poly)?.iter().map(|rho| inflate(rho, s.inflation())).collect::<Result<_, Error>>()?;
    let problem = VisibilityProblem::for_measurements(meas, &probes, eta)?;
    s.iteration.validate(problem.scenario())?;
    let result = iterate_visibility(&problem, &s.iteration, eta)?;
    Ok((problem, result))
}

fn report(
    s: &Settings,
    poly: &PolyhedronSpec,
    problem: &VisibilityProblem,
    result: CertificationResult,
) -> Result<String, CliError> {
    Ok(to_json(&CertificationReport {
        polyhedron: poly.name.to_string(),
        povm: s.povm,
        t: s.inflation(),
        replay_error: result.replay_error(problem)?,
        result,
    }))
}

fn certify_preparations(s: &Settings) -> Result<String, CliError> {
    let poly = s.polyhedron(PolyhedronName::Icosahedron)?;
    let eta = s.eta(&poly)?;
    if let Some(preps) = &s.config.preparations {
        let (problem, result) = certify_states(s, &poly, eta, preps)?;
        return report(s, &poly, &problem, result);
    }
    let thetas = theta_grid(s);
    let phis = s.config.phi_grid.unwrap_or_else(GridSpec::quarter_turn).values();
    let points: Vec<(f64, f64)> = thetas.iter().flat_map(|&t| phis.iter().map(move |&p| (t, p))).collect();
    let rows = s.parallel(&points, |(theta, phi)| {
        let r = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
        let (_, res) = certify_states(s, &poly, eta, &[[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], r])?;
        Ok(vec![
            fmt_float(theta),
            fmt_float(phi),
            fmt_float(res.alpha_star),
            fmt_float(eta),
            res.iterations.to_string(),
            res.converged.to_string(),
            res.seed.to_string(),
        ])
    })?;
    Ok(to_csv(&["theta", "phi", "alpha_star", "eta", "iterations", "converged", "seed"], &rows))
}

fn projective(dirs: &[[f64; 3]]) -> Result<Vec<MeasurementSet>, CliError> {
    dirs.iter()
        .enumerate()
        .map(|(y, v)| {
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if (n - 1.0).abs() > 1e-9 {
                return Err(CliError::Input(format!("measurement direction {y} has norm {n}, expected 1")));
            }
            Ok(MeasurementSet::qubit_projective(y, *v)?)
        })
        .collect()
}

fn certify_measurements(s: &Settings) -> Result<String, CliError> {
    let poly = s.polyhedron(PolyhedronName::Rhombicuboctahedron)?;
    let eta = s.eta(&poly)?;
    let meas = match &s.config.measurements {
        Some(dirs) => projective(dirs)?,
        None => mirror_symmetric(s.config.theta.unwrap_or(FRAC_PI_4))?,
    };
    let (problem, result) = certify_meas(s, &poly, eta, &meas)?;
    report(s, &poly, &problem, result)
}

fn theta_grid(s: &Settings) -> Vec<f64> {
    s.config.theta_grid.unwrap_or_else(GridSpec::quarter_turn).values()
}

fn activation_scan(s: &Settings) -> Result<String, CliError> {
    let poly = s.polyhedron(PolyhedronName::Rhombicuboctahedron)?;
    let eta = s.eta(&poly)?;
    let rows = s.parallel(&theta_grid(s), |theta| {
        let fam = ActivationFamily::new(1.0, theta)?;
        let vectors = fam.bloch_vectors();
        let mut alpha = f64::INFINITY;
        for triad in subsets(&vectors, 3) {
            let (_, res) = certify_states(s, &poly, eta, &triad)?;
            alpha = alpha.min(res.alpha_star);
        }
        let threshold = s_threshold(theta);
        Ok(vec![fmt_float(theta), fmt_float(alpha), fmt_float(threshold), (alpha > threshold).to_string()])
    })?;
    Ok(to_csv(&["theta", "alpha_star_triads", "alpha_s_threshold", "activation"], &rows))
}

fn incompat_scan(s: &Settings) -> Result<String, CliError> {
    let poly = s.polyhedron(PolyhedronName::Rhombicuboctahedron)?;
    let eta = s.eta(&poly)?;
    let rows = s.parallel(&theta_grid(s), |theta| {
        let meas = mirror_symmetric(theta)?;
        let rob = robustness(&meas, s.gap_tol)?;
        let (_, res) = certify_meas(s, &poly, eta, &meas)?;
        Ok(vec![
            fmt_float(theta),
            fmt_float(rob.chi_lower),
            fmt_float(res.alpha_star),
            // Against the upper end of the bisection bracket.
            (res.alpha_star > rob.chi_upper).to_string(),
        ])
    })?;
    Ok(to_csv(&["theta", "chi_star", "classicality_lower_bound", "gap_positive"], &rows))
}

#[derive(Serialize)]
struct RacReport {
    s_value: f64,
    p_suc: f64,
    p_suc_direct: f64,
    classical_s_bound: f64,
    classical_p_suc: f64,
    violation: bool,
}

fn rac(s: &Settings) -> Result<String, CliError> {
    let c = &s.config;
    let (preps, meas) = match (&c.preparations, &c.measurements) {
        (Some(p), Some(m)) => {
            let vis = s.visibility();
            let preps = p
                .iter()
                .enumerate()
                .map(|(x, r)| Preparation::qubit(x, [vis * r[0], vis * r[1], vis * r[2]]))
                .collect::<Result<Vec<_>, Error>>()?;
            (preps, projective(m)?)
        }
        (None, None) => {
            let fam = ActivationFamily::new(c.alpha.unwrap_or(1.0), c.theta.unwrap_or(FRAC_PI_2))?;
            (activation_preparations(&fam)?, pamcert::witnesses::activation_measurements()?)
        }
        _ => return Err(CliError::Input("rac needs both preparations and measurements, or neither".into())),
    };
    let beh = behavior_of(&preps, &meas)?;
    let sv = s_value(&beh)?;
    Ok(to_json(&RacReport {
        s_value: sv,
        p_suc: rac_success(sv),
        p_suc_direct: rac_success_from_behavior(&beh)?,
        classical_s_bound: CLASSICAL_S_BOUND,
        classical_p_suc: rac_success(CLASSICAL_S_BOUND),
        violation: sv > CLASSICAL_S_BOUND + 1e-9,
    }))
}
