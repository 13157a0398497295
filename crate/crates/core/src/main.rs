use std::path::PathBuf;
use std::fmt::Write as _;
use std::io::Write as _;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use justcheck::harness::{
    appendix_a_script, budget_from_env, render_report, run_cell, run_matrix, run_scenario, MatrixOptions,
    PropertySelection, Report, ReportFormat, RunConfig, Suite,
};
use justcheck::interference::ConcurrencyMode;
use justcheck::registers::RegisterKind;
use justcheck::threads::catalog_entries;

#[derive(Parser)]
#[command(name = "justcheck", version, about = "Verify mutual exclusion algorithms over safe, regular and atomic registers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Safe,
    Regular,
    Atomic,
    BlockingS,
    BlockingI,
    BlockingA,
}

impl From<Kind> for RegisterKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Safe => RegisterKind::Safe,
            Kind::Regular => RegisterKind::Regular,
            Kind::Atomic => RegisterKind::Atomic,
            Kind::BlockingS => RegisterKind::BlockingS,
            Kind::BlockingI => RegisterKind::BlockingI,
            Kind::BlockingA => RegisterKind::BlockingA,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    T,
    S,
    I,
    A,
}

impl From<Mode> for ConcurrencyMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::T => ConcurrencyMode::T,
            Mode::S => ConcurrencyMode::S,
            Mode::I => ConcurrencyMode::I,
            Mode::A => ConcurrencyMode::A,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Prop {
    Mutex,
    Deadlock,
    Starvation,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum SuiteArg {
    TwoThread,
    ThreeThread,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Check one algorithm under one memory model.
    Verify {
        #[arg(long)]
        algorithm: String,
        #[arg(long, default_value = "base")]
        variant: String,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, value_enum)]
        registers: Kind,
        #[arg(long, value_enum, default_value = "t", ignore_case = true)]
        conc: Mode,
        #[arg(long, value_enum, default_value = "all")]
        property: Prop,
        /// Print the counterexample of the deciding violation.
        #[arg(long)]
        witness: bool,
        #[arg(long)]
        max_states: Option<u64>,
        /// Wall-clock budget in seconds.
        #[arg(long)]
        budget_secs: Option<f64>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run every cell of a suite and write the report.
    Matrix {
        #[arg(long, value_enum)]
        suite: SuiteArg,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Per-cell budget in seconds; defaults to $JUSTCHECK_CELL_BUDGET_SECS.
        #[arg(long)]
        budget_secs: Option<f64>,
        #[arg(long)]
        max_states: Option<u64>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        witness: bool,
    },
    /// Enumerate read outcomes of the three-thread single-register scenario.
    Scenario {
        #[arg(long, required = true)]
        appendix_a: bool,
        #[arg(long, value_enum)]
        registers: Kind,
    },
    /// List the algorithm catalog.
    List,
}

fn format(f: Format) -> ReportFormat {
    match f {
        Format::Text => ReportFormat::Text,
        Format::Json => ReportFormat::Json,
    }
}

fn run(cli: Cli) -> justcheck::Result<u8> {
    match cli.command {
        Command::Verify { algorithm, variant, threads, registers, conc, property, witness, max_states, budget_secs, format: f } => {
            let threads = match threads {
                Some(n) => n,
                None => catalog_entries()
                    .iter()
                    .find(|e| e.name == algorithm && e.variant == variant)
                    .map_or(2, |e| e.threads),
            };
            let cfg = RunConfig {
                properties: match property {
                    Prop::Mutex => PropertySelection::Mutex,
                    Prop::Deadlock => PropertySelection::Deadlock,
                    Prop::Starvation => PropertySelection::Starvation,
                    Prop::All => PropertySelection::All,
                },
                max_states,
                budget_secs,
                witness,
                ..RunConfig::new(&algorithm, &variant, threads, registers.into(), conc.into())
            };
            let cell = run_cell(&cfg)?;
            let code = cell.exit_code() as u8;
            let report = Report { suite: "verify".into(), cells: vec![cell] };
            emit(&render_report(&report, format(f))?)?;
            Ok(code)
        }
        Command::Matrix { suite, jobs, out, budget_secs, max_states, format: f, witness } => {
            let suite = match suite {
                SuiteArg::TwoThread => Suite::TwoThread,
                SuiteArg::ThreeThread => Suite::ThreeThread,
                SuiteArg::Full => Suite::Full,
            };
            let opts = MatrixOptions { jobs, budget_secs: budget_secs.or_else(budget_from_env), max_states, witness };
            let report = run_matrix(suite, &opts)?;
            std::fs::write(&out, render_report(&report, format(f))?)?;
            emit(&render_report(&report, ReportFormat::Text)?)?;
            let code = report.cells.iter().map(|c| c.exit_code()).filter(|&c| c == 2).max().unwrap_or(0);
            Ok(code as u8)
        }
        Command::Scenario { appendix_a: _, registers } => {
            let kind: RegisterKind = registers.into();
            let outcomes = run_scenario(&appendix_a_script(), kind)?;
            let mut text = String::new();
            for o in &outcomes {
                writeln!(text, "a={} b={} c={} d={} e={}", o[0], o[1], o[2], o[3], o[4]).unwrap();
            }
            let cde: std::collections::BTreeSet<_> = outcomes.iter().map(|o| (o[2], o[3], o[4])).collect();
            writeln!(text, "{} register: {} distinct (c,d,e)", kind.name(), cde.len()).unwrap();
            emit(&text)?;
            Ok(0)
        }
        Command::List => {
            let mut text = String::new();
            for e in catalog_entries() {
                let n = if e.two_only { "2".to_string() } else { format!("2..6 (table: {})", e.threads) };
                writeln!(text, "{:<16} {:<14} threads {:<18} {}", e.name, e.variant, n, e.row).unwrap();
            }
            emit(&text)?;
            Ok(0)
        }
    }
}

/// Writes to stdout; a reader that went away early is not an error.
fn emit(text: &str) -> std::io::Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => r,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
