//! The `tml` command line.
//!
//! Every subcommand builds one or more [`Table`]s, prints them to stdout, and
//! writes them with a `<subcommand>.manifest.json` sidecar into the output
//! directory. The directory is `--out` if given, else `$TML_OUTPUT_DIR`, else
//! `tml-output`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use tml_core::dyck::{self, Functional, Mode};
use tml_core::ensemble::{sample_symmetric_matrix, EntryDistribution};
use tml_core::gluing;
use tml_core::spectral;

use crate::output::{write_run, Cell, Format, RunManifest, Table};
use crate::parallel;
use crate::suites::{self, SuiteReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVARIANT: i32 = 2;

pub const OUTPUT_ENV: &str = "TML_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "tml-output";

#[derive(Debug, Parser)]
#[command(name = "tml", version = crate::BUILD_ID, about = "Trace-method experiments for Wigner matrices with skewed entries")]
pub struct Cli {
    /// Output directory (overrides $TML_OUTPUT_DIR).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo estimate of E[Tr A^{2s}].
    TraceMc(TraceMcArgs),
    /// Exact E[Tr A^{2s}] by path enumeration.
    TraceExact(TraceExactArgs),
    /// Largest eigenvalue and spectral norm of sampled matrices.
    Spectrum(SpectrumArgs),
    /// Fraction of trials with λ_max above 2σ + n^{-6/11+ε}.
    EdgeExceed(EdgeExceedArgs),
    /// Tail of |λ_max − mean| against 4e^{−t²/32}.
    Concentration(ConcentrationArgs),
    /// Run the gluing invariant suite.
    VerifyGluing(VerifyGluingArgs),
    /// Contribution-bound sweeps along s = ⌊n^a⌋.
    BoundsTable(BoundsTableArgs),
    /// Dyck path functionals, exact or sampled.
    DyckStats(DyckStatsArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::TraceMc(_) => "trace-mc",
            Command::TraceExact(_) => "trace-exact",
            Command::Spectrum(_) => "spectrum",
            Command::EdgeExceed(_) => "edge-exceed",
            Command::Concentration(_) => "concentration",
            Command::VerifyGluing(_) => "verify-gluing",
            Command::BoundsTable(_) => "bounds-table",
            Command::DyckStats(_) => "dyck-stats",
        }
    }
}

#[derive(Debug, Args)]
pub struct TraceMcArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub s: usize,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `rademacher`, `skew12`, or `support=a,b;probs=p,q`.
    #[arg(long, default_value = "skew12")]
    pub dist: String,
}

#[derive(Debug, Args)]
pub struct TraceExactArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub s: usize,
    #[arg(long, default_value = "skew12")]
    pub dist: String,
    /// Report E[Tr M^{2s}] instead of E[Tr A^{2s}].
    #[arg(long)]
    pub unnormalized: bool,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "skew12")]
    pub dist: String,
    /// Also write every eigenvalue.
    #[arg(long)]
    pub full: bool,
}

#[derive(Debug, Args)]
pub struct EdgeExceedArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "skew12")]
    pub dist: String,
}

#[derive(Debug, Args)]
pub struct ConcentrationArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8")]
    pub t: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "rademacher")]
    pub dist: String,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("family").required(true).args(["exhaustive", "random"])))]
pub struct VerifyGluingArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub s: usize,
    /// Every closed sequence of length 2s.
    #[arg(long)]
    pub exhaustive: bool,
    /// This many uniformly random closed paths.
    #[arg(long)]
    pub random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// With --random: re-walk an incident edge with this probability.
    #[arg(long)]
    pub revisit: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BoundsTableArgs {
    #[arg(long, value_delimiter = ',', default_value = "1000,10000,100000")]
    pub n_list: Vec<f64>,
    /// s = ⌊n^a⌋.
    #[arg(long, default_value_t = 0.45)]
    pub s_exponent: f64,
    #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
    pub sigma: f64,
    /// Bound on |entries|.
    #[arg(long, default_value_t = 2.0)]
    pub k: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c1: f64,
    /// Number of odd-edge pairs for the Case C and refined-insertion columns.
    #[arg(long, default_value_t = 1)]
    pub l: u64,
    #[arg(long, default_value_t = 1)]
    pub i1: u64,
    /// Constant of the refined insertion count.
    #[arg(long, default_value_t = 1.0)]
    pub big_c: f64,
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FunctionalArg {
    #[value(name = "K")]
    K,
    #[value(name = "Ktensor")]
    Ktensor,
    #[value(name = "pyat")]
    Pyat,
    #[value(name = "maxlevel")]
    Maxlevel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Mc,
}

#[derive(Debug, Args)]
pub struct DyckStatsArgs {
    #[arg(long)]
    pub s: usize,
    #[arg(long, value_enum, default_value = "K")]
    pub functional: FunctionalArg,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Tensor order for Ktensor.
    #[arg(long, default_value_t = 2)]
    pub i: usize,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("invariant suite failed")]
    Invariant,
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

/// Tables and manifest produced by one subcommand, before they are written.
pub struct RunOutput {
    pub tables: Vec<(String, Table)>,
    pub manifest: RunManifest,
    /// Set when an invariant suite reported violations.
    pub failed: bool,
}

/// Parses `argv` (program name first), runs the subcommand, returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(CliError::Invariant) => {
            eprintln!("tml: invariant suite failed");
            EXIT_INVARIANT
        }
        Err(e) => {
            eprintln!("tml: {e}");
            EXIT_USAGE
        }
    }
}

pub fn output_dir(flag: Option<&PathBuf>) -> PathBuf {
    if let Some(dir) = flag {
        return dir.clone();
    }
    match std::env::var_os(OUTPUT_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => PathBuf::from(DEFAULT_OUTPUT_DIR),
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    if cli.threads == Some(0) {
        return Err(CliError::Input("--threads must be positive".into()));
    }
    let mut out = parallel::with_threads(cli.threads, || build(&cli.command))?;
    if let Some(k) = cli.threads {
        out.manifest.param("threads", k);
    }
    out.manifest.param("format", cli.format.extension());
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    for (_, table) in &out.tables {
        lock.write_all(table.render(cli.format).as_bytes())?;
    }
    lock.flush()?;
    write_run(&output_dir(cli.out.as_ref()), &out.tables, cli.format, &mut out.manifest)?;
    if out.failed {
        return Err(CliError::Invariant);
    }
    Ok(())
}

fn distribution(token: &str, manifest: &mut RunManifest) -> Result<EntryDistribution, CliError> {
    let d = EntryDistribution::parse(token).map_err(input)?;
    manifest.param("dist", d.spec_string());
    Ok(d)
}

/// Runs `command` without touching the filesystem.
pub fn build(command: &Command) -> Result<RunOutput, CliError> {
    let name = command.name();
    let single = |table: Table, manifest: RunManifest| RunOutput {
        tables: vec![(name.to_string(), table)],
        manifest,
        failed: false,
    };
    match command {
        Command::TraceMc(a) => {
            let mut m = RunManifest::new(name, Some(a.seed));
            let d = distribution(&a.dist, &mut m)?;
            m.param("n", a.n);
            m.param("s", a.s);
            m.param("trials", a.trials);
            let est = parallel::mc_expected_trace(&d, a.n, a.s, a.trials, a.seed).map_err(input)?;
            let mut t = Table::new(&["n", "s", "trials", "mean", "stderr", "wigner_prediction"]);
            t.push(vec![
                a.n.into(),
                a.s.into(),
                a.trials.into(),
                est.mean.into(),
                est.stderr.into(),
                spectral::wigner_trace_prediction(a.n, a.s, d.sigma()).into(),
            ]);
            Ok(single(t, m))
        }
        Command::TraceExact(a) => {
            let mut m = RunManifest::new(name, None);
            let d = distribution(&a.dist, &mut m)?;
            m.param("n", a.n);
            m.param("s", a.s);
            m.param("normalized", !a.unnormalized);
            let split = parallel::exact_trace(&d, a.n, a.s, !a.unnormalized).map_err(input)?;
            let mut prediction = spectral::wigner_trace_prediction(a.n, a.s, d.sigma());
            if a.unnormalized {
                prediction *= (a.n as f64).powi(a.s as i32);
            }
            let mut t = Table::new(&["n", "s", "exact_total", "even_part", "odd_part", "wigner_prediction"]);
            t.push(vec![
                a.n.into(),
                a.s.into(),
                split.total.into(),
                split.even.into(),
                split.odd().into(),
                prediction.into(),
            ]);
            Ok(single(t, m))
        }
        Command::Spectrum(a) => {
            let mut m = RunManifest::new(name, Some(a.seed));
            let d = distribution(&a.dist, &mut m)?;
            m.param("n", a.n);
            m.param("trials", a.trials);
            m.param("full", a.full);
            use rayon::prelude::*;
            let per_trial = (0..a.trials as u64)
                .into_par_iter()
                .map(|k| {
                    let mat = sample_symmetric_matrix(&d, a.n, tml_core::trial_seed(a.seed, k));
                    let top = spectral::largest_eigenvalue(&mat, true)?;
                    let norm = spectral::spectral_norm(&mat, true)?;
                    let all = if a.full { spectral::spectrum(&mat, true)? } else { Vec::new() };
                    Ok((top, norm, all))
                })
                .collect::<Result<Vec<_>, spectral::SpectralError>>()
                .map_err(input)?;
            let mut t = Table::new(&["trial", "lambda_max", "spectral_norm"]);
            let mut ev = Table::new(&["trial", "index", "eigenvalue"]);
            for (k, (top, norm, all)) in per_trial.into_iter().enumerate() {
                t.push(vec![k.into(), top.into(), norm.into()]);
                for (i, x) in all.into_iter().enumerate() {
                    ev.push(vec![k.into(), i.into(), x.into()]);
                }
            }
            let mut out = single(t, m);
            if a.full {
                out.tables.push((format!("{name}-eigenvalues"), ev));
            }
            Ok(out)
        }
        Command::EdgeExceed(a) => {
            let mut m = RunManifest::new(name, Some(a.seed));
            let d = distribution(&a.dist, &mut m)?;
            m.param("n", join(&a.n));
            m.param("trials", a.trials);
            m.param("epsilon", a.epsilon);
            let rows = parallel::edge_exceedance_experiment(&d, &a.n, a.trials, a.epsilon, a.seed).map_err(input)?;
            let mut t = Table::new(&[
                "n",
                "trials",
                "epsilon",
                "threshold",
                "exceed_fraction",
                "mean_lambda",
                "max_lambda",
            ]);
            for r in rows {
                t.push(vec![
                    r.n.into(),
                    r.trials.into(),
                    r.epsilon.into(),
                    r.threshold.into(),
                    r.exceed_fraction.into(),
                    r.mean_lambda.into(),
                    r.max_lambda.into(),
                ]);
            }
            Ok(single(t, m))
        }
        Command::Concentration(a) => {
            let mut m = RunManifest::new(name, Some(a.seed));
            let d = distribution(&a.dist, &mut m)?;
            m.param("n", a.n);
            m.param("trials", a.trials);
            m.param("t", join(&a.t));
            m.note("center", "sample mean of lambda_max substitutes for its expectation");
            let rows = parallel::concentration_experiment(&d, a.n, a.trials, &a.t, a.seed).map_err(input)?;
            let mut t = Table::new(&["t", "deviation", "empirical_tail", "bound", "bound_clamped"]);
            for r in rows {
                t.push(vec![
                    r.t.into(),
                    r.deviation.into(),
                    r.empirical_tail.into(),
                    r.bound.into(),
                    r.bound_clamped.into(),
                ]);
            }
            Ok(single(t, m))
        }
        Command::VerifyGluing(a) => {
            let seed = a.random.map(|_| a.seed);
            let mut m = RunManifest::new(name, seed);
            m.param("n", a.n);
            m.param("s", a.s);
            let report = if a.exhaustive {
                m.param("family", "exhaustive");
                suites::exhaustive_gluing_suite(a.n, a.s).map_err(input)?
            } else {
                let k = a.random.expect("clap enforces the group");
                if a.n == 0 || a.s == 0 {
                    return Err(CliError::Input("--n and --s must be positive".into()));
                }
                m.param("family", "random");
                m.param("random", k);
                if let Some(p) = a.revisit {
                    if !(0.0..=1.0).contains(&p) {
                        return Err(CliError::Input("--revisit must lie in [0, 1]".into()));
                    }
                    m.param("revisit", p);
                }
                suites::random_gluing_suite(a.n, a.s, k, a.seed, a.revisit)
            };
            m.note(
                "zero_weight_unmarked_origins",
                report.unmarked_origin_zero_weight,
            );
            if let Some(r) = report.min_count_ratio {
                m.note("min_gluing_count_ratio", r);
            }
            let failed = !report.passed();
            Ok(RunOutput {
                tables: vec![
                    (format!("{name}-histogram"), histogram_table(&report)),
                    (format!("{name}-report"), report_table(&report)),
                ],
                manifest: m,
                failed,
            })
        }
        Command::BoundsTable(a) => {
            let mut m = RunManifest::new(name, None);
            m.param("n_list", join(&a.n_list));
            m.param("s_exponent", a.s_exponent);
            m.param("sigma", a.sigma);
            m.param("k", a.k);
            m.param("c1", a.c1);
            m.param("l", a.l);
            m.param("i1", a.i1);
            m.param("big_c", a.big_c);
            m.param("epsilon", a.epsilon);
            Ok(single(bounds_table(a)?, m))
        }
        Command::DyckStats(a) => {
            let (mode, seed) = match a.mode {
                ModeArg::Exact => (Mode::Exact, None),
                ModeArg::Mc => (Mode::MonteCarlo { samples: a.trials, seed: a.seed }, Some(a.seed)),
            };
            let mut m = RunManifest::new(name, seed);
            m.param("s", a.s);
            m.param("functional", a.functional.to_possible_value().expect("named").get_name());
            m.param("mode", a.mode.to_possible_value().expect("named").get_name());
            if seed.is_some() {
                m.param("trials", a.trials);
            }
            let f = match a.functional {
                FunctionalArg::K => Functional::K,
                FunctionalArg::Ktensor => {
                    m.param("i", a.i);
                    Functional::KTensor(a.i)
                }
                FunctionalArg::Pyat => Functional::StayAbove,
                FunctionalArg::Maxlevel => Functional::MaxLevel,
            };
            let mut t = Table::new(&["s", "value", "stderr", "samples", "exact_total"]);
            let est = parallel::dyck_expectation(a.s, f, mode).map_err(input)?;
            let total: Cell = match mode {
                Mode::Exact => dyck::exact_sum(a.s, f).map_err(input)?.total.into(),
                Mode::MonteCarlo { .. } => "".into(),
            };
            t.push(vec![a.s.into(), est.mean.into(), est.stderr.into(), est.samples.into(), total]);
            let mut out = single(t, m);
            if f == Functional::MaxLevel {
                let dist = match mode {
                    Mode::Exact => dyck::max_level_distribution(a.s).map_err(input)?.into_iter().enumerate().collect(),
                    Mode::MonteCarlo { .. } => parallel::max_level_tail(a.s, a.trials, a.seed),
                };
                let mut tail = Table::new(&["k", "probability"]);
                for (k, p) in dist {
                    tail.push(vec![k.into(), p.into()]);
                }
                out.tables.push((format!("{name}-maxlevel"), tail));
            }
            Ok(out)
        }
    }
}

fn join<T: ToString>(values: &[T]) -> String {
    values.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn histogram_table(report: &SuiteReport) -> Table {
    let mut t = Table::new(&["l", "J", "I", "c", "case", "count"]);
    for (k, count) in &report.histogram {
        t.push(vec![k.l.into(), k.j.into(), k.i.into(), k.c.into(), k.case.to_string().into(), (*count).into()]);
    }
    t
}

fn report_table(report: &SuiteReport) -> Table {
    let mut t = Table::new(&["check", "checked", "violations", "status"]);
    for row in report.checks() {
        let status = if row.passed() { "pass" } else { "fail" };
        t.push(vec![row.name.into(), row.checked.into(), row.violations.into(), status.into()]);
    }
    t
}

fn bounds_table(a: &BoundsTableArgs) -> Result<Table, CliError> {
    let cluster_const = gluing::catalan_tail_constant(1000);
    let mut t = Table::new(&[
        "n",
        "s",
        "ln_case_a_ratio",
        "ln_case_b_ratio",
        "ln_case_c_trivial_ratio",
        "ln_case_c_refined_ratio",
        "ln_refined_insertion",
        "odd_edge_cutoff",
    ]);
    for &n in &a.n_list {
        if !(n >= 1.0) {
            return Err(CliError::Input("--n-list entries must be >= 1".into()));
        }
        let s = n.powf(a.s_exponent).floor() as u64;
        if s < 2 {
            return Err(CliError::Input(format!("s = floor(n^a) < 2 at n = {n}")));
        }
        let case_a = gluing::case_a_contribution_bound(s, n, a.sigma, a.k, a.c1);
        let case_b = gluing::case_b_contribution_bound(s, n, a.sigma, a.k, a.c1, cluster_const);
        let case_c = gluing::case_c_reduction_bound(s, n, a.l, a.i1 + 1, a.i1, 1.0, a.big_c).map_err(input)?;
        let eta = a.s_exponent - 0.5;
        t.push(vec![
            n.into(),
            s.into(),
            case_a.ln_ratio_to_even().into(),
            case_b.ln_ratio_to_even().into(),
            (case_c.ln_trivial - case_c.ln_binomial).into(),
            (case_c.ln_refined - case_c.ln_binomial).into(),
            gluing::ln_refined_insertion_bound(s as f64, a.l, a.big_c).into(),
            gluing::odd_edge_cutoff(n, eta, a.epsilon).into(),
        ]);
    }
    Ok(t)
}
