//! `fbheat` command line: argument parsing, job dispatch and report output.

pub mod config;
pub mod input;
pub mod report;

use clap::{Args, Parser, Subcommand};
use config::{OneOrMany, Partial, RunConfig, PRECISION_ENV};
use fbheat::diagnostics::{schatten_partial, subspace_angles};
use fbheat::evolve::propagator_norm_growth;
use fbheat::grid::{dft, EpsilonParam};
use fbheat::invsolve::{solve_explicit, solve_galerkin};
use fbheat::spectrum::{stabilized_spectrum, stabilized_spectrum_with, PrecisionMode, DEFAULT_MAX_COUNT};
use fbheat::sturm::cross_check;
use fbheat::verify::run_suite;
use fbheat::{Dd, Execution};
use report::{Format, Meta, Report, Table};
use std::ffi::OsString;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Usage(String),
    Precondition(String),
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Precondition(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Precondition(m) | Failure::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<fbheat::Error> for Failure {
    fn from(e: fbheat::Error) -> Self {
        if e.is_precondition() {
            Failure::Precondition(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "fbheat", version, about = "Spectral computations for the forward-backward heat operator on the circle")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// JSON config file; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// ε in (0, 2); a comma-separated list runs a sweep
    #[arg(long, value_delimiter = ',')]
    epsilon: Vec<f64>,
    /// truncation N
    #[arg(long)]
    truncation: Option<usize>,
    /// grid size for function samples (at least 4N)
    #[arg(long)]
    grid_size: Option<usize>,
    /// standard or extended (default from FBHEAT_PRECISION, else standard)
    #[arg(long)]
    precision: Option<String>,
    #[arg(long, value_enum)]
    output_format: Option<Format>,
    /// report file (stdout if absent)
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// sweep jobs run concurrently
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Stabilized eigenvalues of A₊
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// number of eigenvalues to track
        #[arg(long)]
        k: Option<usize>,
    },
    /// Invert L on mean-zero data by the explicit formula
    Solve {
        #[command(flatten)]
        common: Common,
        /// CSV of theta, Re f, Im f
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Invert L on mean-zero data by the truncated Galerkin system
    Galerkin {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Subspace angles and Gram conditioning of the eigenvectors
    Riesz {
        #[command(flatten)]
        common: Common,
        /// number of eigenvectors
        #[arg(long)]
        k: Option<usize>,
    },
    /// Partial Schatten sums of the inverse at N and 2N
    Schatten {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        p_list: Vec<f64>,
    },
    /// Sturm-Liouville eigenvalues against 2μ/ε
    Slcheck {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        mesh_size: Option<usize>,
    },
    /// Norm of the truncated propagator exp(−t·iA_N) over several N
    Evolve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        truncations: Vec<usize>,
    },
    /// Run the invariant suite
    Verify {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Spectrum,
    Solve,
    Galerkin,
    Riesz,
    Schatten,
    Slcheck,
    Evolve,
    Verify,
}

fn nonempty<T>(v: Vec<T>) -> Option<Vec<T>> {
    (!v.is_empty()).then_some(v)
}

impl Cmd {
    fn split(self) -> (Kind, Common, Partial) {
        let mut p = Partial::default();
        let (kind, common) = match self {
            Cmd::Spectrum { common, k } => {
                p.k = k;
                (Kind::Spectrum, common)
            }
            Cmd::Solve { common, input } => {
                p.input = input;
                (Kind::Solve, common)
            }
            Cmd::Galerkin { common, input } => {
                p.input = input;
                (Kind::Galerkin, common)
            }
            Cmd::Riesz { common, k } => {
                p.k = k;
                (Kind::Riesz, common)
            }
            Cmd::Schatten { common, p_list } => {
                p.p_list = nonempty(p_list);
                (Kind::Schatten, common)
            }
            Cmd::Slcheck { common, k, mesh_size } => {
                p.k = k;
                p.mesh_size = mesh_size;
                (Kind::Slcheck, common)
            }
            Cmd::Evolve { common, t, truncations } => {
                p.t = t;
                p.truncations = nonempty(truncations);
                (Kind::Evolve, common)
            }
            Cmd::Verify { common } => (Kind::Verify, common),
        };
        (kind, common, p)
    }
}

/// Parse `argv`, run every job and return the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("fbheat: {f}");
            f.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<i32, Failure> {
    let (kind, common, mut flags) = cli.cmd.split();
    flags.epsilon = nonempty(common.epsilon).map(OneOrMany::Many);
    flags.truncation = common.truncation;
    flags.grid_size = common.grid_size;
    flags.precision = common.precision;
    flags.output_format = common.output_format;
    flags.output_path = common.output;
    flags.jobs = common.jobs;
    let file = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Precondition(format!("cannot read config {}: {e}", path.display())))?;
            Partial::from_json(&text)?
        }
        None => Partial::default(),
    };
    let (configs, jobs) = file.overlay(flags).resolve(std::env::var(PRECISION_ENV).ok())?;

    let results = dispatch(&configs, jobs, |c| run_job(kind, c));
    let mut code = 0;
    for (c, r) in configs.iter().zip(results) {
        match r {
            Ok((report, ok)) => {
                if c.output_path.is_none() {
                    print!("{}", report::render(&report, c.output_format));
                }
                if !ok && code == 0 {
                    code = 3;
                }
            }
            Err(f) => {
                eprintln!("fbheat (epsilon {}): {f}", c.epsilon);
                if code == 0 {
                    code = f.exit_code();
                }
            }
        }
    }
    Ok(code)
}

/// Run `f` over the configs on up to `jobs` threads; results stay in input order.
fn dispatch<F, R>(configs: &[RunConfig], jobs: usize, f: F) -> Vec<R>
where
    F: Fn(&RunConfig) -> R + Sync,
    R: Send,
{
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..configs.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs.min(configs.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(c) = configs.get(i) else { break };
                let r = f(c);
                slots.lock().unwrap()[i] = Some(r);
            });
        }
    });
    slots.into_inner().unwrap().into_iter().map(|r| r.expect("every job ran")).collect()
}

/// The report and whether the run's own checks passed (only `verify` can fail them).
fn run_job(kind: Kind, c: &RunConfig) -> Result<(Report, bool), Failure> {
    let eps = EpsilonParam::new(c.epsilon)?;
    let (data, ok) = match kind {
        Kind::Spectrum => (spectrum(eps, c)?, true),
        Kind::Solve => (solve(eps, c)?, true),
        Kind::Galerkin => (galerkin(eps, c)?, true),
        Kind::Riesz => (riesz(eps, c)?, true),
        Kind::Schatten => (schatten(eps, c)?, true),
        Kind::Slcheck => (slcheck(eps, c)?, true),
        Kind::Evolve => (evolve(eps, c)?, true),
        Kind::Verify => verify(eps),
    };
    let report = Report {
        meta: Meta {
            epsilon: c.epsilon,
            truncation: c.truncation,
            precision: c.precision.as_str().into(),
            version: env!("CARGO_PKG_VERSION").into(),
        },
        data,
    };
    if let Some(path) = &c.output_path {
        report::write_atomic(path, &report::render(&report, c.output_format))
            .map_err(|e| Failure::Numerical(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok((report, ok))
}

fn spectrum(eps: EpsilonParam, c: &RunConfig) -> Result<Table, Failure> {
    let count = c.k.unwrap_or(DEFAULT_MAX_COUNT);
    let s = stabilized_spectrum_with(eps, c.truncation, c.precision, count, Execution::default())?;
    let r = &s.records;
    Ok(Table::default()
        .num("mu_re", r.iter().map(|x| x.mu.re))
        .num("mu_im", r.iter().map(|x| x.mu.im))
        .num("mu_lo_re", r.iter().map(|x| x.mu_lo.re))
        .num("residual", r.iter().map(|x| x.residual))
        .num("gap_to_nearest", r.iter().map(|x| x.gap_to_nearest))
        .flag("stabilized", r.iter().map(|x| x.stabilized)))
}

fn read_input(c: &RunConfig) -> Result<fbheat::PeriodicGridFunction, Failure> {
    let path = c.input.as_ref().ok_or_else(|| Failure::Usage("--input is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Precondition(format!("cannot read input {}: {e}", path.display())))?;
    input::read_grid_function(&text, c.grid_size).map_err(Failure::Precondition)
}

fn solve(eps: EpsilonParam, c: &RunConfig) -> Result<Table, Failure> {
    let f = read_input(c)?;
    let sol = solve_explicit(&f, eps)?;
    let h = sol.h.samples();
    Ok(Table::default()
        .num("theta", (0..h.len()).map(|j| sol.h.theta(j)))
        .num("re", h.iter().map(|z| z.re))
        .num("im", h.iter().map(|z| z.im)))
}

fn galerkin(eps: EpsilonParam, c: &RunConfig) -> Result<Table, Failure> {
    let f = read_input(c)?;
    let n = c.truncation;
    let v = solve_galerkin(&dft(&f).with_band(n), eps, n)?;
    let ks: Vec<i64> = (-(n as i64)..=n as i64).collect();
    Ok(Table::default()
        .num("k", ks.iter().map(|&k| k as f64))
        .num("re", ks.iter().map(|&k| v.get(k).re))
        .num("im", ks.iter().map(|&k| v.get(k).im)))
}

fn riesz(eps: EpsilonParam, c: &RunConfig) -> Result<Table, Failure> {
    let k = c.k.unwrap_or(25);
    let s = stabilized_spectrum(eps, c.truncation, c.precision)?;
    let len = 2 * c.grid_size.max(4 * c.truncation);
    let d = match c.precision {
        PrecisionMode::Standard => {
            let mut v = s.eigenvectors::<f64>(len)?;
            v.truncate(k);
            subspace_angles(&v)?
        }
        PrecisionMode::Extended => {
            let mut v = s.eigenvectors::<Dd>(len)?;
            v.truncate(k);
            subspace_angles(&v)?
        }
    };
    let rows = d.angles.len().max(d.gram_condition.len());
    let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(f64::NAN);
    Ok(Table::default()
        .num("n", (0..rows).map(|i| (i + 1) as f64))
        .num("angle", (0..rows).map(|i| at(&d.angles, i)))
        .num("gram_condition", (0..rows).map(|i| at(&d.gram_condition, i))))
}

fn schatten(eps: EpsilonParam, c: &RunConfig) -> Result<Table, Failure> {
    let r = schatten_partial(eps, c.truncation, &c.p_list)?;
    Ok(Table::default()
        .num("p", r.partial_sums.iter().map(|x| x.0))
        .num("partial_sum_n", r.partial_sums.iter().map(|x| x.1))
        .num("partial_sum_2n", r.partial_sums_doubled.iter().map(|x| x.1))
        .num("relative_change", r.stabilization.iter().map(|x| x.1)))
}

fn slcheck(eps: EpsilonParam, c: &RunConfig) -> Result<Table, Failure> {
    let r = cross_check(eps, c.truncation, c.k.unwrap_or(5), c.mesh_size, c.precision)?;
    let p = &r.pairs;
    Ok(Table::default()
        .num("index", (1..=p.len()).map(|i| i as f64))
        .num("sl_eigenvalue", p.iter().map(|x| x.0))
        .num("two_mu_over_eps", p.iter().map(|x| x.1))
        .num("relative_difference", p.iter().map(|x| ((x.0 - x.1) / x.1).abs())))
}

fn evolve(eps: EpsilonParam, c: &RunConfig) -> Result<Table, Failure> {
    let r = propagator_norm_growth(eps, c.t, &c.truncations)?;
    let growth = std::iter::once(f64::NAN).chain(r.growth_ratios.iter().copied());
    Ok(Table::default()
        .num("truncation", r.truncations.iter().map(|&n| n as f64))
        .num("log_norm", r.log_norms.iter().copied())
        .num("norm", r.operator_norms.iter().copied())
        .num("growth_ratio", growth))
}

fn verify(eps: EpsilonParam) -> (Table, bool) {
    let checks = run_suite(eps);
    for ch in &checks {
        eprintln!("{:<12} {:<52} {}  {}", ch.module, ch.name, if ch.pass { "PASS" } else { "FAIL" }, ch.detail);
    }
    let ok = checks.iter().all(|c| c.pass);
    let table = Table::default()
        .text("module", checks.iter().map(|c| c.module.to_string()))
        .text("check", checks.iter().map(|c| c.name.to_string()))
        .flag("pass", checks.iter().map(|c| c.pass))
        .text("detail", checks.iter().map(|c| c.detail.clone()));
    (table, ok)
}
