//! `tripartite`: entanglement measures, Bell maximization and bound sweeps for
//! three-qubit pure states.

mod input;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use input::{PhaseArg, StateSpec};
use tripartite::bell::{maximize, BellMode, OptimizerOptions, UnitVector3};
use tripartite::bounds::DEFAULT_SLACK;
use tripartite::measures::{measures_from_canonical, measures_from_state};
use tripartite::states::PureState3Q;
use tripartite::sweep::{
    anchor, bounds_report, format_number, read_csv, rows_from_records, run_sweep, write_csv, write_figure_data,
    BoundsReport, Family, SweepConfig, SweepRecord, Tally,
};
use tripartite::Error;

const EXIT_RUNTIME: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_VIOLATION: u8 = 3;

#[derive(Parser)]
#[command(name = "tripartite", version, about = "Three-qubit entanglement measures and Bell-inequality bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print τ, σ and the six squared concurrences of one state.
    Measure {
        #[command(flatten)]
        state: StateSpec,
        #[command(flatten)]
        phase: PhaseArg,
    },
    /// Maximize the Mermin or Svetlichny parameter of one state.
    Bell {
        #[command(flatten)]
        state: StateSpec,
        #[command(flatten)]
        phase: PhaseArg,
        #[arg(long, value_enum, default_value_t = Mode::Mermin)]
        mode: Mode,
        #[command(flatten)]
        optimizer: OptimizerArgs,
    },
    /// Sample a state family and write one CSV row per state.
    Sweep {
        #[command(flatten)]
        sweep: SweepArgs,
        /// CSV destination; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check a sweep CSV against the bounds.
    BoundsCheck {
        /// CSV written by `sweep`.
        csv: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SLACK)]
        slack: f64,
    },
    /// Run a sweep and write scatter and bound-curve files for plotting.
    FigureData {
        #[command(flatten)]
        sweep: SweepArgs,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Mermin,
    Svetlichny,
}

impl From<Mode> for BellMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Mermin => BellMode::Mermin,
            Mode::Svetlichny => BellMode::Svetlichny,
        }
    }
}

#[derive(Args, Clone)]
struct OptimizerArgs {
    /// Nelder–Mead restarts.
    #[arg(long, default_value_t = 32)]
    restarts: usize,
    /// Evaluation cap per restart.
    #[arg(long, default_value_t = 10_000)]
    max_evals: usize,
    /// Convergence tolerance on the objective.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl OptimizerArgs {
    fn options(&self) -> anyhow::Result<OptimizerOptions> {
        if self.restarts == 0 || self.max_evals == 0 || !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Parse("--restarts and --max-evals must be ≥ 1 and --tol positive".into()).into());
        }
        Ok(OptimizerOptions { restarts: self.restarts, max_evals: self.max_evals, tol: self.tol, seed: self.seed })
    }
}

#[derive(Args, Clone)]
struct SweepArgs {
    #[arg(long, default_value = "spinor3", value_parser = parse_family)]
    family: Family,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Slack on every bound comparison.
    #[arg(long, default_value_t = DEFAULT_SLACK)]
    slack: f64,
    /// Worker threads; all available cores when omitted.
    #[arg(long)]
    jobs: Option<usize>,
    #[command(flatten)]
    optimizer: OptimizerArgs,
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl SweepArgs {
    fn config(&self) -> anyhow::Result<SweepConfig> {
        if self.samples == 0 {
            return Err(Error::Parse("--samples must be ≥ 1".into()).into());
        }
        if !(self.slack >= 0.0 && self.slack.is_finite()) {
            return Err(Error::Parse("--slack must be a non-negative number".into()).into());
        }
        let mut c = SweepConfig::new(self.family, self.samples, self.optimizer.seed);
        c.optimizer = self.optimizer.options()?;
        c.slack = self.slack;
        c.jobs = self.jobs;
        Ok(c)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Io(_) | Error::Numerical(_)) | None => EXIT_RUNTIME,
        Some(_) => EXIT_INPUT,
    }
}

fn run(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Measure { state, phase } => measure(&state, &phase),
        Command::Bell { state, phase, mode, optimizer } => bell(&state, &phase, mode.into(), &optimizer.options()?),
        Command::Sweep { sweep, out } => {
            let records = sweep_records(&sweep)?;
            match &out {
                Some(path) => {
                    let file = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                    write_csv(&records, BufWriter::new(file))?;
                }
                None => write_csv(&records, io::stdout().lock())?,
            }
            let report = bounds_report(&rows_from_records(&records), sweep.slack)?;
            eprint!("{}", render_report(&report));
            Ok(ExitCode::SUCCESS)
        }
        Command::BoundsCheck { csv, slack } => {
            let file = File::open(&csv).map_err(|e| Error::Io(format!("{}: {e}", csv.display())))?;
            let rows = read_csv(BufReader::new(file))?;
            let report = bounds_report(&rows, slack)?;
            print!("{}", render_report(&report));
            Ok(if report.confirmed_violations() > 0 { ExitCode::from(EXIT_VIOLATION) } else { ExitCode::SUCCESS })
        }
        Command::FigureData { sweep, out } => {
            let records = sweep_records(&sweep)?;
            let csv_path = out.join("sweep.csv");
            std::fs::create_dir_all(&out).map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;
            let file = File::create(&csv_path).map_err(|e| Error::Io(format!("{}: {e}", csv_path.display())))?;
            write_csv(&records, BufWriter::new(file))?;
            let opts = sweep.optimizer.options()?;
            let mut anchors = vec![anchor("ghz", &PureState3Q::ghz(), &opts)?];
            if sweep.family == Family::Canonical5 {
                anchors.push(anchor("w", &PureState3Q::w(), &opts)?);
            }
            write_figure_data(&records, &anchors, &out)?;
            println!("wrote {} records and figure files to {}", records.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn sweep_records(args: &SweepArgs) -> anyhow::Result<Vec<SweepRecord>> {
    let config = args.config()?;
    run_sweep(&config).with_context(|| format!("{} sweep", config.family))
}

fn measure(spec: &StateSpec, phase: &PhaseArg) -> anyhow::Result<ExitCode> {
    let (state, parsed) = input::resolve(spec, phase)?;
    let m = match &parsed {
        input::Parsed::Canonical(p) => measures_from_canonical(p)?,
        _ => measures_from_state(&state)?,
    };
    let n = format_number;
    let [a, b, c] = m.c_sq_one_vs_two;
    let [ab, ac, bc] = m.c_sq_pairwise;
    let mut out = io::stdout().lock();
    writeln!(out, "state: {}", parsed.describe())?;
    writeln!(out, "  tangle tau        {}", n(m.tau))?;
    writeln!(out, "  sigma             {}", n(m.sigma))?;
    writeln!(out, "  C^2 A|BC  B|AC  C|AB   {}  {}  {}", n(a), n(b), n(c))?;
    writeln!(out, "  C^2 AB    AC    BC     {}  {}  {}", n(ab), n(ac), n(bc))?;
    if let Some(d) = m.delta {
        writeln!(out, "  Delta             {}", n(d))?;
    }
    writeln!(out)?;
    writeln!(out, "tau={}", n(m.tau))?;
    writeln!(out, "sigma={}", n(m.sigma))?;
    for (key, v) in [("c2_a_bc", a), ("c2_b_ac", b), ("c2_c_ab", c), ("c2_ab", ab), ("c2_ac", ac), ("c2_bc", bc)] {
        writeln!(out, "{key}={}", n(v))?;
    }
    if let Some(d) = m.delta {
        writeln!(out, "delta={}", n(d))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn vector(u: UnitVector3) -> String {
    format!("({}, {}, {})", format_number(u.x), format_number(u.y), format_number(u.z))
}

fn bell(spec: &StateSpec, phase: &PhaseArg, mode: BellMode, opts: &OptimizerOptions) -> anyhow::Result<ExitCode> {
    let (state, parsed) = input::resolve(spec, phase)?;
    let r = maximize(&state, mode, opts)?;
    let shown = format_number(r.value);
    let threshold = mode.classical_bound();
    // the verdict is taken from the printed digits so it can be checked by eye
    let violated = shown.parse::<f64>()? > threshold;
    let verdict = if violated { "violated" } else { "not violated" };
    let s = &r.settings;
    let mut out = io::stdout().lock();
    writeln!(out, "state: {}", parsed.describe())?;
    writeln!(out, "{mode} maximum {shown}  (local-realism bound {threshold}): {verdict}")?;
    writeln!(out, "  a  = {}  a' = {}", vector(s.a), vector(s.a_prime))?;
    writeln!(out, "  b  = {}  b' = {}", vector(s.b), vector(s.b_prime))?;
    writeln!(out, "  c  = {}  c' = {}", vector(s.c), vector(s.c_prime))?;
    writeln!(out, "  restarts {}, evaluations {}, converged {}", r.restarts_used, r.evaluations, r.converged)?;
    writeln!(out)?;
    writeln!(out, "mode={mode}")?;
    writeln!(out, "value={shown}")?;
    writeln!(out, "threshold={threshold}")?;
    writeln!(out, "violated={violated}")?;
    writeln!(out, "restarts={}", r.restarts_used)?;
    writeln!(out, "converged={}", r.converged)?;
    Ok(ExitCode::SUCCESS)
}

fn render_tally(name: &str, t: &Tally) -> String {
    let worst = t.worst_margin.map_or_else(|| "-".to_string(), format_number);
    let note = if t.claimed { "" } else { "  (not claimed for every record)" };
    format!("  {name:<16} pass {:>6}  fail {:>6}  worst margin {worst}{note}\n", t.pass, t.fail)
}

fn id_list(ids: &[usize]) -> String {
    if ids.is_empty() {
        return "none".to_string();
    }
    ids.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

fn render_report(r: &BoundsReport) -> String {
    let mut s = format!("records {}\n", r.records);
    s += &render_tally("tau/mermin", &r.tau_mermin);
    s += &render_tally("sigma/mermin", &r.sigma_mermin);
    s += &render_tally("tau/svetlichny", &r.tau_svet);
    s += &render_tally("sigma/svetlichny", &r.sigma_svet);
    s += &format!("svetlichny lower bound stricter on {} records\n", r.svet_lower_stricter);
    s += &format!("confirmed violations: {} [{}]\n", r.confirmed_violations(), id_list(&r.violations));
    s += &format!("unclaimed tau failures: {} [{}]\n", r.unclaimed_failures.len(), id_list(&r.unclaimed_failures));
    s += &format!("violations={}\n", r.confirmed_violations());
    s
}
