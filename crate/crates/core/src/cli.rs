//! The `dmdp` command line.
//!
//! Exit codes: 0 ok, 1 usage or i/o error, 2 invalid problem file,
//! 3 non-communicating, 4 cycles share an edge, 5 tied optimal cycles,
//! 6 any other computation failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bound::solve_disjoint_cycles;
use crate::cycles::enumerate_simple_cycles;
use crate::dmdp::{Dmdp, StateId};
use crate::error::Error;
use crate::generate;
use crate::problem::ProblemFile;
use crate::report::{bound_report, cycles_report, simulation_report, Format};
use crate::reward::FamilySpec;
use crate::sim::{simulate_table, PolicyKind, SUSPICIOUS_RATIO};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NOT_COMMUNICATING: i32 = 3;
pub const EXIT_NON_DISJOINT: i32 = 4;
pub const EXIT_TIE: i32 = 5;
pub const EXIT_FAILURE: i32 = 6;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Invalid(_) | Error::Parse(_) | Error::UnknownState(_) => EXIT_INVALID,
        Error::NotCommunicating { .. } => EXIT_NOT_COMMUNICATING,
        Error::NonDisjoint { .. } => EXIT_NON_DISJOINT,
        Error::DegenerateOptimum { .. } => EXIT_TIE,
        Error::Parameter(_) | Error::Io(_) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "dmdp",
    about = "Regret lower bounds and simulation for deterministic MDPs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a problem file; exit 0 iff it is valid and communicating.
    Validate { path: PathBuf },
    /// List the simple cycles of a problem.
    Cycles(ReportArgs),
    /// Per-cycle lower-bound rows and the constant C.
    Bound(ReportArgs),
    /// Emit a generated problem file.
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
    },
    /// Run a policy over seeds and horizons and report expected regret.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
struct ReportArgs {
    path: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyArg {
    Bernoulli,
    Gaussian,
}

#[derive(Debug, Args)]
struct FamilyArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::Bernoulli)]
    family: FamilyArg,
    /// Shared variance of Gaussian rewards.
    #[arg(long, default_value_t = 1.0)]
    variance: f64,
    /// Seed for randomly drawn means.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Range of randomly drawn means.
    #[arg(long, default_value_t = 0.05)]
    low: f64,
    #[arg(long, default_value_t = 0.95)]
    high: f64,
    #[arg(long)]
    initial_state: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl FamilyArgs {
    fn spec(&self) -> Result<FamilySpec, Error> {
        match self.family {
            FamilyArg::Bernoulli => Ok(FamilySpec::Bernoulli),
            FamilyArg::Gaussian if self.variance > 0.0 && self.variance.is_finite() => {
                Ok(FamilySpec::Gaussian {
                    variance: self.variance,
                })
            }
            FamilyArg::Gaussian => Err(Error::Parameter("--variance must be positive".into())),
        }
    }

    fn means(
        &self,
        given: Option<&str>,
        count: Option<usize>,
        what: &str,
    ) -> Result<Vec<f64>, Error> {
        match (given, count) {
            (Some(list), None) => parse_list(list, "--means"),
            (None, Some(k)) if k > 0 => {
                if self.low.partial_cmp(&self.high) != Some(std::cmp::Ordering::Less) {
                    return Err(Error::Parameter("--low must be below --high".into()));
                }
                Ok(generate::random_means(k, self.seed, self.low, self.high))
            }
            (None, Some(_)) => Err(Error::Parameter(format!("--{what} must be positive"))),
            _ => Err(Error::Parameter(format!(
                "give exactly one of --means and --{what}"
            ))),
        }
    }
}

#[derive(Debug, Subcommand)]
enum GenerateKind {
    /// Chain of states with forward and backward edges.
    LineSearch {
        /// 2n comma-separated means: forward, backward for each segment.
        #[arg(long)]
        means: Option<String>,
        /// Number of segments, with means drawn from --seed.
        #[arg(long)]
        segments: Option<usize>,
        #[command(flatten)]
        common: FamilyArgs,
    },
    /// Ring with self-loops; each state's reward sits on its incoming edges.
    StateRewards {
        /// k comma-separated state means.
        #[arg(long)]
        means: Option<String>,
        /// Number of states, with means drawn from --seed.
        #[arg(long)]
        states: Option<usize>,
        #[command(flatten)]
        common: FamilyArgs,
    },
}

#[derive(Debug, Args)]
struct SimulateArgs {
    path: PathBuf,
    #[arg(long, default_value = "klucb")]
    policy: String,
    /// Comma list, e.g. `1000,1e4,1e5`.
    #[arg(long)]
    horizons: String,
    /// Comma list or `count@base`.
    #[arg(long, default_value = "1")]
    seeds: String,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    initial_state: Option<String>,
}

fn parse_list(s: &str, flag: &str) -> Result<Vec<f64>, Error> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parameter(format!("{flag}: `{x}` is not a number")))
        })
        .collect()
}

/// Comma list of positive integers; `1e6` style is accepted when exact.
pub fn parse_horizons(s: &str) -> Result<Vec<u64>, Error> {
    s.split(',')
        .map(|x| {
            let x = x.trim();
            if let Ok(n) = x.parse::<u64>() {
                if n > 0 {
                    return Ok(n);
                }
            }
            match x.parse::<f64>() {
                Ok(f) if f >= 1.0 && f.fract() == 0.0 && f < u64::MAX as f64 => Ok(f as u64),
                _ => Err(Error::Parameter(format!(
                    "--horizons: `{x}` is not a positive integer"
                ))),
            }
        })
        .collect()
}

/// `1,2,7` or `count@base` for `base, base+1, ..., base+count-1`.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>, Error> {
    let bad = || Error::Parameter(format!("--seeds: cannot parse `{s}`"));
    if let Some((count, base)) = s.split_once('@') {
        let count: u64 = count.trim().parse().map_err(|_| bad())?;
        let base: u64 = base.trim().parse().map_err(|_| bad())?;
        if count == 0 {
            return Err(bad());
        }
        let last = base.checked_add(count - 1).ok_or_else(bad)?;
        return Ok((base..=last).collect());
    }
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| bad()))
        .collect()
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Io<'_> {
    fn fail(&mut self, e: &Error) -> i32 {
        let _ = writeln!(self.err, "error: {e}");
        exit_code(e)
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let mut io = Io { out, err };
    let result = match cli.command {
        Command::Validate { path } => return cmd_validate(&path, &mut io),
        Command::Cycles(a) => cmd_cycles(&a, &mut io),
        Command::Bound(a) => cmd_bound(&a, &mut io),
        Command::Generate { kind } => cmd_generate(&kind, &mut io),
        Command::Simulate(a) => cmd_simulate(&a, &mut io),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => io.fail(&e),
    }
}

fn load(path: &Path) -> Result<(Dmdp, Option<StateId>), Error> {
    let file = ProblemFile::load(path)?;
    let dmdp = file.to_draft()?.build()?;
    let initial = match &file.initial_state {
        Some(name) => Some(
            dmdp.state_id(name)
                .ok_or_else(|| Error::UnknownState(name.clone()))?,
        ),
        None => None,
    };
    if let Some((from, to)) = dmdp.unreachable_pair() {
        return Err(Error::NotCommunicating {
            from: dmdp.state_name(from).to_string(),
            to: dmdp.state_name(to).to_string(),
        });
    }
    Ok((dmdp, initial))
}

fn cmd_validate(path: &Path, io: &mut Io<'_>) -> i32 {
    match load(path) {
        Ok((d, _)) => {
            let _ = writeln!(
                io.out,
                "valid: {} states, {} edges, communicating",
                d.num_states(),
                d.num_edges()
            );
            EXIT_OK
        }
        Err(Error::Invalid(violations)) => {
            let _ = writeln!(io.err, "invalid problem file {}:", path.display());
            for v in &violations {
                let _ = writeln!(io.err, "  {v}");
            }
            EXIT_INVALID
        }
        Err(e) => io.fail(&e),
    }
}

fn emit(
    path: Option<&Path>,
    io: &mut Io<'_>,
    write: impl FnOnce(&mut dyn Write) -> Result<(), Error>,
) -> Result<(), Error> {
    match path {
        Some(p) => {
            let mut buf = Vec::new();
            write(&mut buf)?;
            std::fs::write(p, buf).map_err(|e| Error::Io(format!("{}: {e}", p.display())))
        }
        None => write(io.out),
    }
}

fn cmd_cycles(a: &ReportArgs, io: &mut Io<'_>) -> Result<(), Error> {
    let (d, _) = load(&a.path)?;
    let cycles = enumerate_simple_cycles(&d)?;
    let report = cycles_report(&d, &cycles);
    emit(a.out.as_deref(), io, |w| report.write(a.format.into(), w))
}

fn cmd_bound(a: &ReportArgs, io: &mut Io<'_>) -> Result<(), Error> {
    let (d, _) = load(&a.path)?;
    let cycles = enumerate_simple_cycles(&d)?;
    let solution = solve_disjoint_cycles(&d, &cycles)?;
    let report = bound_report(&solution, &cycles);
    emit(a.out.as_deref(), io, |w| report.write(a.format.into(), w))
}

fn cmd_generate(kind: &GenerateKind, io: &mut Io<'_>) -> Result<(), Error> {
    let (dmdp, common) = match kind {
        GenerateKind::LineSearch {
            means,
            segments,
            common,
        } => {
            let flat = common.means(means.as_deref(), segments.map(|n| 2 * n), "segments")?;
            if flat.len() % 2 != 0 {
                return Err(Error::Parameter(format!(
                    "line search needs an even number of means (2 per segment), got {}",
                    flat.len()
                )));
            }
            let pairs: Vec<(f64, f64)> = flat.chunks(2).map(|p| (p[0], p[1])).collect();
            (generate::line_search_draft(&pairs, common.spec()?)?, common)
        }
        GenerateKind::StateRewards {
            means,
            states,
            common,
        } => {
            let flat = common.means(means.as_deref(), *states, "states")?;
            (
                generate::state_rewards_draft(&flat, common.spec()?)?,
                common,
            )
        }
    };
    // parameter mistakes such as a mean of 1.5 are usage errors here
    let dmdp = dmdp.build().map_err(|e| Error::Parameter(e.to_string()))?;
    if let Some(s) = &common.initial_state {
        if dmdp.state_id(s).is_none() {
            return Err(Error::Parameter(format!("--initial-state: no state `{s}`")));
        }
    }
    let text = ProblemFile::from_dmdp(&dmdp, common.initial_state.clone()).to_json();
    emit(common.out.as_deref(), io, |w| {
        w.write_all(text.as_bytes())
            .map_err(|e| Error::Io(e.to_string()))
    })
}

fn cmd_simulate(a: &SimulateArgs, io: &mut Io<'_>) -> Result<(), Error> {
    let kind: PolicyKind = a.policy.parse()?;
    let horizons = parse_horizons(&a.horizons)?;
    let seeds = parse_seeds(&a.seeds)?;
    let (d, file_initial) = load(&a.path)?;
    let initial = match &a.initial_state {
        Some(name) => Some(
            d.state_id(name)
                .ok_or_else(|| Error::UnknownState(name.clone()))?,
        ),
        None => file_initial,
    };

    let cycles = enumerate_simple_cycles(&d)?;
    let constant = match solve_disjoint_cycles(&d, &cycles) {
        Ok(sol) if sol.constant > 0.0 => Some(sol.constant),
        Ok(_) => {
            let _ = writeln!(
                io.err,
                "note: lower-bound constant is zero, ratio column left blank"
            );
            None
        }
        Err(e) => {
            let _ = writeln!(
                io.err,
                "note: no lower bound ({e}), ratio column left blank"
            );
            None
        }
    };
    let table = simulate_table(&d, kind, &horizons, &seeds, initial, constant)?;
    if table.suspicious() {
        let _ = writeln!(
            io.err,
            "warning: mean ratio at the largest horizon is below {SUSPICIOUS_RATIO}; \
             a uniformly good policy should not beat the lower bound"
        );
    }
    let report = simulation_report(&table);
    emit(a.out.as_deref(), io, |w| report.write(a.format.into(), w))
}
