//! Running checks on catalog algorithms and collecting the results.

mod report;
mod scenario;

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use report::{render_report, Report, ReportFormat};
pub use scenario::{appendix_a_script, run_scenario, Outcome, Scenario, ScenarioEvent};

use crate::checker::{
    check_liveness, check_mutual_exclusion, is_just_lasso, validate_liveness_witness, Model, Property,
    Stats, Verdict, Witness,
};
use crate::error::{Error, Result};
use crate::interference::{check_thread_consistency, BlockableSet, ConcurrencyMode};
use crate::lts::Limits;
use crate::registers::RegisterKind;
use crate::threads::{algorithm_catalog, catalog_entries, CatalogEntry};

/// Environment variable holding the default per-cell time budget in seconds.
pub const BUDGET_ENV: &str = "JUSTCHECK_CELL_BUDGET_SECS";

/// Which properties a run evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropertySelection {
    Mutex,
    Deadlock,
    Starvation,
    /// All three, each skipped once a weaker one fails.
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub algorithm: String,
    pub variant: String,
    pub threads: usize,
    pub registers: RegisterKind,
    pub conc: ConcurrencyMode,
    pub properties: PropertySelection,
    pub max_states: Option<u64>,
    /// Wall-clock budget for the whole cell.
    pub budget_secs: Option<f64>,
    /// Keep the witness of the deciding violation in the result.
    pub witness: bool,
}

impl RunConfig {
    pub fn new(algorithm: &str, variant: &str, threads: usize, registers: RegisterKind, conc: ConcurrencyMode) -> Self {
        Self {
            algorithm: algorithm.into(),
            variant: variant.into(),
            threads,
            registers,
            conc,
            properties: PropertySelection::All,
            max_states: None,
            budget_secs: None,
            witness: false,
        }
    }

    /// Safe and regular registers are only meaningful without blocking.
    pub fn validate(&self) -> Result<()> {
        if matches!(self.registers, RegisterKind::Safe | RegisterKind::Regular) && self.conc != ConcurrencyMode::T {
            return Err(Error::Config(format!("{} registers pair only with mode T", self.registers.name())));
        }
        if self.budget_secs.is_some_and(|b| b.is_nan() || b <= 0.0) {
            return Err(Error::Config("the time budget must be positive".into()));
        }
        Ok(())
    }

    fn limits(&self, started: Instant) -> Limits {
        Limits {
            max_states: self.max_states,
            deadline: self.budget_secs.map(|b| started + Duration::from_secs_f64(b)),
            ..Limits::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropertyStatus {
    Holds,
    Violated,
    /// Not evaluated because a weaker property already failed.
    Skipped,
    NotRequested,
    /// Ran out of budget or state cap.
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Properties {
    pub mutex: PropertyStatus,
    pub deadlock: PropertyStatus,
    pub starvation: PropertyStatus,
}

impl Properties {
    fn get_mut(&mut self, p: Property) -> &mut PropertyStatus {
        match p {
            Property::MutualExclusion => &mut self.mutex,
            Property::DeadlockFreedom => &mut self.deadlock,
            Property::StarvationFreedom => &mut self.starvation,
        }
    }

    /// `X`, `M`, `D` or `S`; `?` when a deciding check did not finish and
    /// `-` when the requested properties do not determine a letter.
    pub fn letter(&self) -> String {
        use PropertyStatus::*;
        let l = match (self.mutex, self.deadlock, self.starvation) {
            (Violated, _, _) => "X",
            (Unknown, _, _) => "?",
            (Holds, Violated, _) => "M",
            (Holds, Unknown, _) => "?",
            (Holds, Holds, Violated) => "D",
            (Holds, Holds, Holds) => "S",
            (Holds, Holds, Unknown) => "?",
            _ => "-",
        };
        l.into()
    }
}

/// A counterexample rendered with register names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub property: Property,
    /// Labels in order.
    pub steps: Vec<String>,
    /// Index of the first cycle step; equal to `steps.len()` for a finite
    /// path. Absent for safety witnesses.
    pub cycle_start: Option<usize>,
    /// Index of the triggering `noncrit` step, for liveness witnesses.
    pub trigger: Option<usize>,
    /// Result of replaying and re-checking the witness.
    pub valid: bool,
}

impl WitnessReport {
    /// Numbered `k: <label>` lines, with the cycle set off by a marker.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, s) in self.steps.iter().enumerate() {
            if self.cycle_start == Some(k) {
                out.push_str("--- cycle ---\n");
            }
            out.push_str(&format!("{k}: {s}\n"));
        }
        if self.cycle_start == Some(self.steps.len()) {
            out.push_str("--- cycle ---\n");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellResult {
    pub algorithm: String,
    pub variant: String,
    pub threads: usize,
    pub registers: RegisterKind,
    pub conc: ConcurrencyMode,
    pub verdict_letter: String,
    pub properties: Properties,
    pub stats: Stats,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CellResult {
    /// Exit status for the CLI: 0 all requested properties hold, 1 one is
    /// violated, 2 something did not finish.
    pub fn exit_code(&self) -> i32 {
        let p = [self.properties.mutex, self.properties.deadlock, self.properties.starvation];
        if p.contains(&PropertyStatus::Violated) {
            1
        } else if self.error.is_some() || p.contains(&PropertyStatus::Unknown) {
            2
        } else {
            0
        }
    }
}

fn witness_report(m: &Model, cfg: &RunConfig, v: &Verdict, blockables: &BlockableSet) -> Option<WitnessReport> {
    let names = m.register_names();
    let label = |l| m.lts().label(l).display(names).to_string();
    match v.witness.as_ref()? {
        Witness::Safety(path) => Some(WitnessReport {
            property: v.property,
            steps: path.steps.iter().map(|&(l, _)| label(l)).collect(),
            cycle_start: None,
            trigger: None,
            valid: path.replay(m.lts()).is_ok() && path.start == m.lts().initial(),
        }),
        Witness::Liveness(w) => {
            let mut valid = validate_liveness_witness(m, v.property, cfg.conc, blockables, w).is_ok();
            // The counting test is only sound on thread-consistent models.
            if !cfg.registers.is_blocking() {
                valid &= is_just_lasso(m, &w.lasso, cfg.conc, blockables).unwrap_or(false);
            }
            Some(WitnessReport {
                property: v.property,
                steps: w.lasso.all_steps().map(|(l, _)| label(l)).collect(),
                cycle_start: Some(w.lasso.prefix.steps.len()),
                trigger: Some(w.trigger),
                valid,
            })
        }
    }
}

fn unfinished(e: &Error) -> bool {
    matches!(e, Error::Timeout { .. } | Error::CapExceeded { .. })
}

/// Runs the requested checks for one cell. Running out of budget or state
/// cap yields `?` rather than an error; configuration problems are errors.
pub fn run_cell(cfg: &RunConfig) -> Result<CellResult> {
    cfg.validate()?;
    let spec = algorithm_catalog(&cfg.algorithm, &cfg.variant, cfg.threads)?;
    let started = Instant::now();
    let limits = cfg.limits(started);
    let mut props = Properties {
        mutex: PropertyStatus::NotRequested,
        deadlock: PropertyStatus::NotRequested,
        starvation: PropertyStatus::NotRequested,
    };
    let mut cell = CellResult {
        algorithm: cfg.algorithm.clone(),
        variant: cfg.variant.clone(),
        threads: cfg.threads,
        registers: cfg.registers,
        conc: cfg.conc,
        verdict_letter: String::new(),
        properties: props,
        stats: Stats::default(),
        witness: None,
        error: None,
    };
    let requested: Vec<Property> = match cfg.properties {
        PropertySelection::Mutex => vec![Property::MutualExclusion],
        PropertySelection::Deadlock => vec![Property::DeadlockFreedom],
        PropertySelection::Starvation => vec![Property::StarvationFreedom],
        PropertySelection::All => vec![Property::MutualExclusion, Property::DeadlockFreedom, Property::StarvationFreedom],
    };

    let model = match Model::build(&spec, cfg.registers, &limits) {
        Ok(m) => m,
        Err(e) if unfinished(&e) => {
            for &p in &requested {
                *props.get_mut(p) = PropertyStatus::Unknown;
            }
            cell.properties = props;
            cell.verdict_letter = props.letter();
            cell.error = Some(e.to_string());
            cell.stats.millis = started.elapsed().as_millis() as u64;
            return Ok(cell);
        }
        Err(e) => return Err(e),
    };
    let blockables = BlockableSet::noncrit(model.lts().alphabet());
    let mut iterations = 0;
    let mut failed = false;
    for &p in &requested {
        if failed && cfg.properties == PropertySelection::All {
            *props.get_mut(p) = PropertyStatus::Skipped;
            continue;
        }
        let verdict = match p {
            Property::MutualExclusion => Ok(check_mutual_exclusion(&model)),
            _ => check_liveness(&model, p, cfg.conc, &blockables, &limits),
        };
        match verdict {
            Ok(v) => {
                iterations += v.stats.iterations;
                *props.get_mut(p) = if v.holds { PropertyStatus::Holds } else { PropertyStatus::Violated };
                if !v.holds {
                    failed = true;
                    if cell.witness.is_none() {
                        cell.witness = witness_report(&model, cfg, &v, &blockables);
                    }
                }
            }
            Err(e) if unfinished(&e) => {
                *props.get_mut(p) = PropertyStatus::Unknown;
                cell.error = Some(e.to_string());
                failed = true;
            }
            Err(e) => return Err(e),
        }
    }
    if let Some(w) = &cell.witness {
        if !w.valid {
            cell.error = Some(format!("{} witness failed its replay check", w.property));
        }
    }
    if !cfg.witness {
        // keep the validity verdict visible through `error` but drop the trace
        cell.witness = None;
    }
    cell.properties = props;
    cell.verdict_letter = props.letter();
    cell.stats = Stats {
        states: model.num_states(),
        transitions: model.lts().num_transitions(),
        iterations,
        millis: started.elapsed().as_millis() as u64,
    };
    Ok(cell)
}

/// A matrix column: register kind with concurrency mode.
pub const COLUMNS: [(RegisterKind, ConcurrencyMode); 6] = [
    (RegisterKind::Safe, ConcurrencyMode::T),
    (RegisterKind::Regular, ConcurrencyMode::T),
    (RegisterKind::Atomic, ConcurrencyMode::T),
    (RegisterKind::Atomic, ConcurrencyMode::S),
    (RegisterKind::Atomic, ConcurrencyMode::I),
    (RegisterKind::Atomic, ConcurrencyMode::A),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    TwoThread,
    ThreeThread,
    Full,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::TwoThread => "two_thread",
            Suite::ThreeThread => "three_thread",
            Suite::Full => "full",
        }
    }

    pub fn rows(self) -> Vec<&'static CatalogEntry> {
        catalog_entries()
            .iter()
            .filter(|e| e.tabulated)
            .filter(|e| match self {
                Suite::TwoThread => e.threads == 2,
                Suite::ThreeThread => e.threads == 3,
                Suite::Full => true,
            })
            .collect()
    }
}

/// Options shared by every cell of a matrix run.
#[derive(Debug, Clone, Default)]
pub struct MatrixOptions {
    pub jobs: Option<usize>,
    pub budget_secs: Option<f64>,
    pub max_states: Option<u64>,
    pub witness: bool,
}

/// The per-cell budget from [`BUDGET_ENV`], if set.
pub fn budget_from_env() -> Option<f64> {
    std::env::var(BUDGET_ENV).ok()?.parse().ok()
}

/// Configurations of every cell of `rows × COLUMNS`, row-major.
pub fn matrix_cells(rows: &[&CatalogEntry], opts: &MatrixOptions) -> Vec<RunConfig> {
    rows.iter()
        .flat_map(|e| {
            COLUMNS.iter().map(move |&(kind, mode)| RunConfig {
                budget_secs: opts.budget_secs,
                max_states: opts.max_states,
                witness: opts.witness,
                ..RunConfig::new(e.name, e.variant, e.threads, kind, mode)
            })
        })
        .collect()
}

/// Runs a list of cells on a worker pool. Cell errors are recorded in the
/// cell and do not stop the run.
pub fn run_cells(suite: &str, cells: &[RunConfig], jobs: Option<usize>) -> Result<Report> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = builder.build().map_err(|e| Error::Config(e.to_string()))?;
    let results: Vec<CellResult> = pool.install(|| {
        cells
            .par_iter()
            .map(|c| {
                run_cell(c).unwrap_or_else(|e| CellResult {
                    algorithm: c.algorithm.clone(),
                    variant: c.variant.clone(),
                    threads: c.threads,
                    registers: c.registers,
                    conc: c.conc,
                    verdict_letter: "?".into(),
                    properties: Properties {
                        mutex: PropertyStatus::Unknown,
                        deadlock: PropertyStatus::Unknown,
                        starvation: PropertyStatus::Unknown,
                    },
                    stats: Stats::default(),
                    witness: None,
                    error: Some(e.to_string()),
                })
            })
            .collect()
    });
    Ok(Report { suite: suite.into(), cells: results })
}

pub fn run_matrix(suite: Suite, opts: &MatrixOptions) -> Result<Report> {
    run_cells(suite.name(), &matrix_cells(&suite.rows(), opts), opts.jobs)
}

/// Thread consistency of a catalog algorithm over one register kind.
pub fn thread_consistency(algorithm: &str, variant: &str, threads: usize, kind: RegisterKind) -> Result<bool> {
    let spec = algorithm_catalog(algorithm, variant, threads)?;
    let m = Model::build(&spec, kind, &Limits::default())?;
    Ok(check_thread_consistency(m.lts()).is_none())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn letters_follow_the_short_circuit() {
        use PropertyStatus::*;
        let p = |mutex, deadlock, starvation| Properties { mutex, deadlock, starvation }.letter();
        assert_eq!(p(Violated, Skipped, Skipped), "X");
        assert_eq!(p(Holds, Violated, Skipped), "M");
        assert_eq!(p(Holds, Holds, Violated), "D");
        assert_eq!(p(Holds, Holds, Holds), "S");
        assert_eq!(p(Holds, Unknown, Skipped), "?");
        assert_eq!(p(NotRequested, Holds, NotRequested), "-");
    }

    #[test]
    fn non_atomic_registers_need_mode_t() {
        let cfg = RunConfig::new("peterson", "base", 2, RegisterKind::Safe, ConcurrencyMode::S);
        assert!(matches!(run_cell(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn suites_partition_the_table() {
        let two = Suite::TwoThread.rows().len();
        let three = Suite::ThreeThread.rows().len();
        assert_eq!(two, 12);
        assert_eq!(three, 11);
        assert_eq!(Suite::Full.rows().len(), two + three);
    }

    #[test]
    fn witness_render_marks_the_cycle() {
        let w = WitnessReport {
            property: Property::DeadlockFreedom,
            steps: vec!["noncrit(t=0)".into(), "start_read(t=0,r=x)".into()],
            cycle_start: Some(1),
            trigger: Some(0),
            valid: true,
        };
        assert_eq!(w.render(), "0: noncrit(t=0)\n--- cycle ---\n1: start_read(t=0,r=x)\n");
    }
}
