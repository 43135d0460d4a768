//! Command-line front end. `run` parses arguments, dispatches to the
//! library and maps errors to exit codes.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dynamics::{closure_check, quorum_trajectory, time_grid, HamiltonianSpec};
use crate::error::{Error, Result};
use crate::indirect::{consistency_test, indirect_expectation, ConsistencyMode, ReconMode};
use crate::io::{format_density, format_quorum, format_state, parse_operator, parse_quorum, parse_state, read_to_string, write_string, StateFile};
use crate::measurement::{cone_axes, default_tripod, measure_exact, measure_exact_pure, measure_sampled, Axis, IntensityTable, QuorumSpec};
use crate::mixed::{certify_quorum, design_axes, reconstruct_mixed, DesignStrategy, MixedOptions};
use crate::particle::{make_counterexample, pauli_partner_check};
use crate::pure::{partners_nearby_axes, reconstruct_pure, select_by_third_axis, uniqueness_probe, PureOptions, UniquenessOptions};
use crate::selftest::run_selftest;
use crate::spin::{random_density, random_pure, SpinValue};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
/// Failed verdicts (consistency, closure, selftest) share the code of
/// inconsistent data.
pub const EXIT_CHECK_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "spintomo", version, about = "Spin-s state reconstruction from Stern-Gerlach intensities")]
pub struct Cli {
    /// Output style for summaries.
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Records,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random pure state or density matrix.
    Gen(GenArgs),
    /// Tabulate exact or sampled intensities of a state on a quorum.
    Measure(MeasureArgs),
    /// Report rank, deficit and conditioning of a quorum.
    Certify(CertifyArgs),
    /// Choose a well-conditioned quorum with a given number of axes.
    Design(DesignArgs),
    /// Reconstruct a state from an intensity table.
    #[command(subcommand)]
    Reconstruct(ReconstructCommand),
    /// Enumerate the nearby-axis partners of a pure state.
    Partners(PartnersArgs),
    /// Search for non-constant phase triples leaving a state invariant.
    Uniqueness(UniquenessArgs),
    /// Expectation of an arbitrary operator from quorum data.
    Indirect(IndirectArgs),
    /// Predict a held-out axis from the quorum and compare.
    Consistency(ConsistencyArgs),
    /// Quorum trajectory under a Hamiltonian.
    Dynamics(DynamicsArgs),
    /// Particle counterexample: an odd state and its conjugate.
    ParticleDemo(ParticleArgs),
    /// Run the built-in acceptance battery.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
pub struct SeedArg {
    #[arg(long, env = "SPINTOMO_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateKind {
    Pure,
    Mixed,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_parser = SpinValue::from_str)]
    pub spin: SpinValue,
    #[arg(long, value_enum, default_value_t = StateKind::Pure)]
    pub kind: StateKind,
    /// Rank of a mixed state; full rank by default.
    #[arg(long)]
    pub rank: Option<usize>,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Axis count and opening angle of a cone quorum, written `K=5,theta=1.0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeSpec {
    pub count: usize,
    pub theta: f64,
}

impl FromStr for ConeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut count = None;
        let mut theta = crate::mixed::DEFAULT_CONE_THETA;
        for kv in s.split(',') {
            let (key, value) = kv
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("expected key=value, got `{kv}`")))?;
            let bad = || Error::InvalidParameter(format!("bad value `{value}`"));
            match key.trim() {
                "K" | "k" => count = Some(value.trim().parse().map_err(|_| bad())?),
                "theta" => theta = value.trim().parse().map_err(|_| bad())?,
                other => return Err(Error::InvalidParameter(format!("unknown cone parameter `{other}`"))),
            }
        }
        let count = count.ok_or_else(|| Error::InvalidParameter("cone needs K".into()))?;
        Ok(ConeSpec { count, theta })
    }
}

impl ConeSpec {
    fn quorum(&self) -> Result<QuorumSpec> {
        cone_axes(self.count, self.theta)
    }
}

/// `x`, `y`, `z` or `theta,phi`.
fn parse_axis_arg(s: &str) -> Result<Axis> {
    match s {
        "x" => Ok(Axis::x()),
        "y" => Ok(Axis::y()),
        "z" => Ok(Axis::z()),
        other => {
            let (t, p) = other
                .split_once(',')
                .ok_or_else(|| Error::InvalidParameter(format!("axis `{other}`: expected x, y, z or theta,phi")))?;
            let parse = |v: &str| v.trim().parse::<f64>().map_err(|_| Error::InvalidParameter(format!("bad angle `{v}`")));
            Axis::new(parse(t)?, parse(p)?)
        }
    }
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(format!("`{s}` is not a positive number")),
    }
}

#[derive(Debug, Args)]
#[group(multiple = false)]
pub struct QuorumSource {
    /// Quorum file with one `theta phi` line per axis.
    #[arg(long)]
    pub quorum: Option<PathBuf>,
    #[arg(long, value_parser = ConeSpec::from_str)]
    pub cone: Option<ConeSpec>,
    /// Orthogonal tripod `{x, y, z}`.
    #[arg(long)]
    pub tripod: bool,
}

impl QuorumSource {
    fn resolve(&self) -> Result<Option<QuorumSpec>> {
        if let Some(path) = &self.quorum {
            return Ok(Some(parse_quorum(&read_to_string(path)?)?));
        }
        if let Some(cone) = &self.cone {
            return Ok(Some(cone.quorum()?));
        }
        Ok(self.tripod.then(default_tripod))
    }
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    #[arg(long)]
    pub state: PathBuf,
    #[command(flatten)]
    pub source: QuorumSource,
    /// Shots per axis; exact probabilities when absent.
    #[arg(long)]
    pub shots: Option<u64>,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long, value_parser = SpinValue::from_str)]
    pub spin: SpinValue,
    #[command(flatten)]
    pub source: QuorumSource,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[arg(long, value_parser = SpinValue::from_str)]
    pub spin: SpinValue,
    #[arg(long)]
    pub axes: usize,
    #[arg(long, value_parser = DesignStrategy::from_str, default_value = "cone-scan")]
    pub strategy: DesignStrategy,
    /// Candidate count for `random-frames`.
    #[arg(long, default_value_t = 256)]
    pub frames: usize,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Write the chosen quorum here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum ReconstructCommand {
    /// Linear inversion of a table into a density matrix.
    Mixed(ReconMixedArgs),
    /// Three-axis phase retrieval of a pure state.
    Pure(ReconPureArgs),
}

#[derive(Debug, Args)]
pub struct ReconMixedArgs {
    #[arg(long)]
    pub table: PathBuf,
    /// Quorum file; the table's own axes when absent.
    #[arg(long)]
    pub quorum: Option<PathBuf>,
    #[arg(long)]
    pub allow_minimum_norm: bool,
    #[arg(long, value_parser = positive, default_value_t = 1e-8)]
    pub consistency_tol: f64,
    #[arg(long, value_parser = positive, default_value_t = 1e-10)]
    pub positivity_tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReconPureArgs {
    #[arg(long)]
    pub table: PathBuf,
    #[arg(long, value_parser = positive, default_value_t = 1e-8)]
    pub tolerance: f64,
    /// Refine every sign-pattern seed before choosing.
    #[arg(long)]
    pub exhaustive: bool,
    #[arg(long, default_value_t = 64)]
    pub restarts: usize,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PartnersArgs {
    #[arg(long)]
    pub state: PathBuf,
    /// Axis whose intensities select among the partners.
    #[arg(long, value_parser = parse_axis_arg, default_value = "y")]
    pub third_axis: Axis,
    #[arg(long, value_parser = positive, default_value_t = 1e-9)]
    pub tolerance: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct UniquenessArgs {
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, value_parser = positive, default_value_t = 0.1)]
    pub nu_min: f64,
    #[arg(long, value_parser = positive, default_value_t = 1e4)]
    pub penalty: f64,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Debug, Args)]
pub struct IndirectArgs {
    #[arg(long)]
    pub table: PathBuf,
    /// Operator file with `row col Re Im` entries.
    #[arg(long)]
    pub operator: PathBuf,
    #[arg(long)]
    pub quorum: Option<PathBuf>,
    /// Reconstruct with the pure three-axis method.
    #[arg(long)]
    pub pure: bool,
}

#[derive(Debug, Args)]
pub struct ConsistencyArgs {
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long)]
    pub quorum: PathBuf,
    /// Held-out axis as `theta,phi`.
    #[arg(long, value_parser = parse_axis_arg)]
    pub holdout: Axis,
    /// Shots per axis; exact comparison when absent.
    #[arg(long)]
    pub shots: Option<u64>,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Debug, Args)]
pub struct DynamicsArgs {
    #[arg(long)]
    pub state: PathBuf,
    /// `zeeman|quadratic:omega=..,axis=x|y|z|theta/phi,kappa=..`
    #[arg(long, value_parser = HamiltonianSpec::from_str)]
    pub hamiltonian: HamiltonianSpec,
    #[arg(long, default_value_t = 0.0)]
    pub t0: f64,
    #[arg(long, default_value_t = 10.0)]
    pub t1: f64,
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    #[arg(long)]
    pub quorum: PathBuf,
    #[arg(long)]
    pub check_closure: bool,
    /// Reconstruct with the pure three-axis method in the closure check.
    #[arg(long)]
    pub pure: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ParticleArgs {
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    #[arg(long, value_parser = positive, default_value_t = 10.0)]
    pub l: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    #[command(flatten)]
    pub seed: SeedArg,
}

/// Writes `text` to `path` and a one-line note to `out`, or `text` to `out`.
fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            write_string(p, text)?;
            writeln!(out, "wrote {}", p.display())?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn load_state(path: &Path) -> Result<StateFile> {
    parse_state(&read_to_string(path)?)
}

fn load_table(path: &Path) -> Result<IntensityTable> {
    IntensityTable::from_text(&read_to_string(path)?)
}

fn table_quorum(table: &IntensityTable, path: Option<&Path>) -> Result<QuorumSpec> {
    match path {
        Some(p) => parse_quorum(&read_to_string(p)?),
        None => QuorumSpec::explicit(table.axes().to_vec()),
    }
}

fn cmd_gen(a: &GenArgs, out: &mut dyn Write) -> Result<i32> {
    let text = match a.kind {
        StateKind::Pure => format_state(&random_pure(a.spin, a.seed.seed)),
        StateKind::Mixed => format_density(&random_density(a.spin, a.seed.seed, a.rank.unwrap_or(a.spin.dim()))?),
    };
    emit(out, a.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

fn cmd_measure(a: &MeasureArgs, out: &mut dyn Write) -> Result<i32> {
    let state = load_state(&a.state)?;
    let q = a.source.resolve()?.unwrap_or_else(default_tripod);
    let table = match (a.shots, &state) {
        (Some(shots), _) => measure_sampled(&state.to_density(), &q, shots, a.seed.seed)?,
        (None, StateFile::Pure(psi)) => measure_exact_pure(psi, &q)?,
        (None, StateFile::Mixed(rho)) => measure_exact(rho, &q)?,
    };
    emit(out, a.out.as_deref(), &table.to_text())?;
    Ok(EXIT_OK)
}

fn cmd_certify(a: &CertifyArgs, format: Format, out: &mut dyn Write) -> Result<i32> {
    let q = a
        .source
        .resolve()?
        .ok_or_else(|| Error::InvalidParameter("give --quorum, --cone or --tripod".into()))?;
    let report = certify_quorum(a.spin, &q)?;
    match format {
        Format::Table => write!(out, "{report}")?,
        Format::Records => writeln!(out, "{}", report.to_record())?,
    }
    Ok(EXIT_OK)
}

fn cmd_design(a: &DesignArgs, format: Format, out: &mut dyn Write) -> Result<i32> {
    let strategy = match a.strategy {
        DesignStrategy::RandomFrames { .. } => DesignStrategy::RandomFrames { frames: a.frames, seed: a.seed.seed },
        s => s,
    };
    let design = design_axes(a.spin, a.axes, strategy)?;
    let report = certify_quorum(a.spin, &design.quorum)?;
    match format {
        Format::Table => write!(out, "{design}")?,
        Format::Records => writeln!(out, "{}", report.to_record())?,
    }
    emit(out, a.out.as_deref(), &format_quorum(&design.quorum))?;
    Ok(EXIT_OK)
}

fn cmd_reconstruct_mixed(a: &ReconMixedArgs, out: &mut dyn Write) -> Result<i32> {
    let table = load_table(&a.table)?;
    let q = table_quorum(&table, a.quorum.as_deref())?;
    let opts = MixedOptions {
        allow_minimum_norm: a.allow_minimum_norm,
        consistency_tol: a.consistency_tol,
        positivity_tol: a.positivity_tol,
    };
    let r = reconstruct_mixed(&table, &q, &opts)?;
    let mut summary = format!("# residual {:.6e}\n# injective {}\n", r.residual, r.injective);
    if let Some(d) = r.diagnostics {
        writeln!(summary, "# rank {} nullity {} condition {:.6e}", d.rank, d.nullity, d.condition_number).unwrap();
    }
    writeln!(summary, "# min_eigenvalue {:.6e} projected {}", r.min_eigenvalue, r.projected).unwrap();
    emit(out, a.out.as_deref(), &(summary + &format_density(&r.rho_hat)))?;
    Ok(EXIT_OK)
}

fn cmd_reconstruct_pure(a: &ReconPureArgs, out: &mut dyn Write) -> Result<i32> {
    let table = load_table(&a.table)?;
    let opts = PureOptions { tolerance: a.tolerance, exhaustive: a.exhaustive, random_restarts: a.restarts, seed: a.seed.seed };
    let r = reconstruct_pure(&table, &opts)?;
    let summary = format!("# residual {:.6e}\n# seed {} of {} tried\n", r.residual, r.seed_index, r.seeds_tried);
    emit(out, a.out.as_deref(), &(summary + &format_state(&r.state)))?;
    Ok(EXIT_OK)
}

fn require_pure(state: StateFile) -> Result<crate::spin::PureState> {
    match state {
        StateFile::Pure(psi) => Ok(psi),
        StateFile::Mixed(_) => Err(Error::InvalidState("a pure state file is required".into())),
    }
}

fn cmd_partners(a: &PartnersArgs, out: &mut dyn Write) -> Result<i32> {
    let psi = require_pure(load_state(&a.state)?)?;
    let mut set = partners_nearby_axes(&psi)?;
    let third = measure_exact_pure(&psi, &QuorumSpec::explicit(vec![a.third_axis])?)?;
    let (selected, _) = select_by_third_axis(&set, &third, a.tolerance)?;
    set.selected = Some(selected);
    let mut text = format!(
        "# {} candidates; third axis theta {:.6} phi {:.6} selects {}\n",
        set.len(),
        a.third_axis.theta(),
        a.third_axis.phi(),
        selected
    );
    for (i, cand) in set.candidates.iter().enumerate() {
        let mark = if i == selected { " selected" } else { "" };
        writeln!(text, "# candidate {i} pattern {}{mark}", set.pattern_string(i)).unwrap();
        text.push_str(&format_state(cand));
        text.push('\n');
    }
    emit(out, a.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

fn cmd_uniqueness(a: &UniquenessArgs, out: &mut dyn Write) -> Result<i32> {
    let psi = require_pure(load_state(&a.state)?)?;
    let opts = UniquenessOptions {
        trials: a.trials,
        seed: a.seed.seed,
        nu_min: a.nu_min,
        penalty: a.penalty,
        ..Default::default()
    };
    write!(out, "{}", uniqueness_probe(&psi, &opts)?)?;
    Ok(EXIT_OK)
}

fn cmd_indirect(a: &IndirectArgs, out: &mut dyn Write) -> Result<i32> {
    let table = load_table(&a.table)?;
    let q = table_quorum(&table, a.quorum.as_deref())?;
    let op = parse_operator(&read_to_string(&a.operator)?, Some(table.spin()))?;
    let mode = if a.pure { ReconMode::Pure(PureOptions::default()) } else { ReconMode::default() };
    let r = indirect_expectation(&table, &q, &op, &mode)?;
    writeln!(out, "value {:.16e} {:.16e}", r.value.re, r.value.im)?;
    writeln!(out, "residual {:.6e}", r.rho_source.residual)?;
    Ok(EXIT_OK)
}

fn cmd_consistency(a: &ConsistencyArgs, out: &mut dyn Write) -> Result<i32> {
    let rho = load_state(&a.state)?.to_density();
    let q = parse_quorum(&read_to_string(&a.quorum)?)?;
    let mode = match a.shots {
        Some(shots) => ConsistencyMode::Sampled { shots, seed: a.seed.seed },
        None => ConsistencyMode::Exact,
    };
    let report = consistency_test(&rho, &q, &a.holdout, mode)?;
    write!(out, "{report}")?;
    Ok(if report.pass { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn cmd_dynamics(a: &DynamicsArgs, out: &mut dyn Write) -> Result<i32> {
    let rho = load_state(&a.state)?.to_density();
    let h = a.hamiltonian.build(rho.spin())?;
    let q = parse_quorum(&read_to_string(&a.quorum)?)?;
    let traj = quorum_trajectory(&rho, &h, &time_grid(a.t0, a.t1, a.steps)?, &q)?;
    emit(out, a.out.as_deref(), &traj.to_columns())?;
    if !a.check_closure {
        return Ok(EXIT_OK);
    }
    let mode = if a.pure { ReconMode::Pure(PureOptions::default()) } else { ReconMode::default() };
    let report = closure_check(&traj, &h, &mode)?;
    write!(out, "{report}")?;
    Ok(if report.pass() { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn cmd_particle(a: &ParticleArgs, out: &mut dyn Write) -> Result<i32> {
    let report = pauli_partner_check(&make_counterexample(a.n, a.l)?)?;
    let text = format!("{report}\n{}", report.density_tables());
    match &a.out {
        Some(p) => {
            write_string(p, &text)?;
            write!(out, "{report}")?;
            writeln!(out, "wrote {}", p.display())?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(EXIT_OK)
}

fn cmd_selftest(a: &SelftestArgs, out: &mut dyn Write) -> Result<i32> {
    let report = run_selftest(a.seed.seed);
    write!(out, "{report}")?;
    Ok(if report.passed() { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Gen(a) => cmd_gen(a, out),
        Command::Measure(a) => cmd_measure(a, out),
        Command::Certify(a) => cmd_certify(a, cli.format, out),
        Command::Design(a) => cmd_design(a, cli.format, out),
        Command::Reconstruct(ReconstructCommand::Mixed(a)) => cmd_reconstruct_mixed(a, out),
        Command::Reconstruct(ReconstructCommand::Pure(a)) => cmd_reconstruct_pure(a, out),
        Command::Partners(a) => cmd_partners(a, out),
        Command::Uniqueness(a) => cmd_uniqueness(a, out),
        Command::Indirect(a) => cmd_indirect(a, out),
        Command::Consistency(a) => cmd_consistency(a, out),
        Command::Dynamics(a) => cmd_dynamics(a, out),
        Command::ParticleDemo(a) => cmd_particle(a, out),
        Command::Selftest(a) => cmd_selftest(a, out),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Reports go to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
