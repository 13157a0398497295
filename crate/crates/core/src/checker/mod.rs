//! Mutual exclusion, deadlock freedom and starvation freedom.

mod brute;
mod fixpoint;
mod justness;
mod model;
pub mod random;
mod scc;
mod witness;

use std::fmt;
use std::time::Instant;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

pub use brute::brute_force_liveness;
pub use fixpoint::{nu_core, Fixpoint};
pub use justness::{is_just_lasso, is_just_lasso_by_definition};
pub use model::Model;
pub use witness::extract_lasso_witness;

use crate::error::Result;
use crate::interference::{BlockableSet, ConcurrencyMode};
use crate::lts::{ActionLabel, Lasso, LabelId, Limits, Path, StateId, ThreadId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    MutualExclusion,
    DeadlockFreedom,
    StarvationFreedom,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Property::MutualExclusion => "mutual exclusion",
            Property::DeadlockFreedom => "deadlock freedom",
            Property::StarvationFreedom => "starvation freedom",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub states: usize,
    pub transitions: usize,
    /// Fixpoint rounds, or product nodes for the brute-force oracle.
    pub iterations: usize,
    pub millis: u64,
}

/// A liveness counterexample: after step `trigger` (a `noncrit(thread)`),
/// the path never performs the property's response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LivenessWitness {
    pub lasso: Lasso,
    pub trigger: usize,
    pub thread: ThreadId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// Path to a state enabling two critical sections.
    Safety(Path),
    Liveness(LivenessWitness),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub property: Property,
    pub holds: bool,
    pub witness: Option<Witness>,
    pub stats: Stats,
}

fn base_stats(m: &Model, iterations: usize, started: Instant) -> Stats {
    Stats {
        states: m.num_states(),
        transitions: m.lts().num_transitions(),
        iterations,
        millis: started.elapsed().as_millis() as u64,
    }
}

/// Holds iff no reachable state enables two `crit` actions of different
/// threads. The witness is a shortest path to such a state.
pub fn check_mutual_exclusion(m: &Model) -> Verdict {
    let started = Instant::now();
    let lts = m.lts();
    let mut bad = FixedBitSet::with_capacity(lts.num_states());
    for s in 0..lts.num_states() as StateId {
        let mut first: Option<ThreadId> = None;
        for l in lts.enabled_ids(s) {
            let a = lts.label(l);
            if a.is_crit() {
                match first {
                    Some(t) if t != a.thread() => {
                        bad.insert(s as usize);
                        break;
                    }
                    _ => first = Some(a.thread()),
                }
            }
        }
    }
    let witness = if bad.is_clear() { None } else { m.path_from_initial(&bad).map(Witness::Safety) };
    Verdict { property: Property::MutualExclusion, holds: witness.is_none(), witness, stats: base_stats(m, 0, started) }
}

/// Labels that end a liveness obligation for `property`, given the thread
/// that left its non-critical section.
pub fn response_labels(property: Property, thread: ThreadId) -> impl Fn(&ActionLabel) -> bool {
    move |a| match property {
        Property::DeadlockFreedom => a.is_crit(),
        _ => *a == ActionLabel::crit(thread),
    }
}

struct Trigger {
    from: StateId,
    label: LabelId,
    to: StateId,
    thread: ThreadId,
}

/// First `noncrit(t)` transition (in state order) whose target lies in `into`.
fn find_trigger(m: &Model, t: ThreadId, into: &FixedBitSet) -> Option<Trigger> {
    let lts = m.lts();
    let nc = lts.label_id(&ActionLabel::noncrit(t))?;
    lts.transitions()
        .find(|(_, e)| e.label == nc && into.contains(e.target as usize))
        .map(|(s, e)| Trigger { from: s, label: nc, to: e.target, thread: t })
}

/// Shortest path to the trigger followed by the trigger step, with the
/// index of that step.
fn lead_in(m: &Model, tr: &Trigger) -> Result<(Path, usize)> {
    let mut p = m
        .path_from_initial(&m.single(tr.from))
        .ok_or_else(|| crate::Error::Witness(format!("state {} unreachable", tr.from)))?;
    let index = p.steps.len();
    p.push(tr.label, tr.to);
    Ok((p, index))
}

/// Decides deadlock or starvation freedom over just paths.
///
/// Deadlock freedom fails iff some `noncrit(t)` step leads, by a path
/// without `crit(t)`, into the fixpoint for response "any `crit`".
/// Starvation freedom fails iff some `noncrit(t)` step lands in the
/// fixpoint for response `crit(t)`.
pub fn check_liveness(
    m: &Model,
    property: Property,
    mode: ConcurrencyMode,
    blockables: &BlockableSet,
    limits: &Limits,
) -> Result<Verdict> {
    let started = Instant::now();
    let lts = m.lts();
    let rev = lts.reverse();
    let classes = fixpoint::Classes::new(lts.alphabet(), mode, blockables);
    let threads = m.threads() as ThreadId;
    let mut iterations = 0;

    let found = match property {
        Property::MutualExclusion => {
            return Err(crate::Error::Config("mutual exclusion is not a liveness property".into()));
        }
        Property::DeadlockFreedom => {
            let resp = m.label_mask(ActionLabel::is_crit);
            let fp = fixpoint::nu_core_with(lts, &rev, &classes, &resp, mode, limits)?;
            iterations += fp.iterations;
            // Prefer a lead-in without any crit so that the witness never
            // shows a response after its trigger.
            let quiet = model::backward_closure(&rev, &fp.states, |l| !resp.contains(l as usize));
            let mut hit = (0..threads).find_map(|t| find_trigger(m, t, &quiet).map(|tr| (tr, true)));
            if hit.is_none() {
                hit = (0..threads).find_map(|t| {
                    let own = lts.label_id(&ActionLabel::crit(t));
                    let reach = model::backward_closure(&rev, &fp.states, |l| Some(l) != own);
                    find_trigger(m, t, &reach).map(|tr| (tr, false))
                });
            }
            match hit {
                None => None,
                Some((tr, quiet_ok)) => {
                    let own = lts.label_id(&ActionLabel::crit(tr.thread));
                    let (mut path, trigger) = lead_in(m, &tr)?;
                    let to_core = m
                        .shortest_path(tr.to, &fp.states, |l| if quiet_ok { !resp.contains(l as usize) } else { Some(l) != own })
                        .ok_or_else(|| crate::Error::Witness("no path into the fixpoint".into()))?;
                    path.extend(&to_core);
                    Some((tr, path, trigger, fp))
                }
            }
        }
        Property::StarvationFreedom => {
            let mut hit = None;
            for t in 0..threads {
                let resp = m.label_mask(|a| *a == ActionLabel::crit(t));
                let fp = fixpoint::nu_core_with(lts, &rev, &classes, &resp, mode, limits)?;
                iterations += fp.iterations;
                if let Some(tr) = find_trigger(m, t, &fp.states) {
                    let (path, trigger) = lead_in(m, &tr)?;
                    hit = Some((tr, path, trigger, fp));
                    break;
                }
            }
            hit
        }
    };

    let witness = match found {
        None => None,
        Some((tr, path, trigger, fp)) => {
            let lasso = extract_lasso_witness(m, &fp, blockables, path)?;
            Some(Witness::Liveness(LivenessWitness { lasso, trigger, thread: tr.thread }))
        }
    };
    Ok(Verdict { property, holds: witness.is_none(), witness, stats: base_stats(m, iterations, started) })
}

/// Checks a liveness witness: it replays, is just, starts with a trigger
/// `noncrit(t)`, and performs no response after it. Justness is checked
/// from the definition, so this also holds for models that are not thread
/// consistent.
pub fn validate_liveness_witness(
    m: &Model,
    property: Property,
    mode: ConcurrencyMode,
    blockables: &BlockableSet,
    w: &LivenessWitness,
) -> Result<()> {
    let bad = |msg: &str| Err(crate::Error::Witness(msg.into()));
    w.lasso.replay(m.lts())?;
    let steps: Vec<ActionLabel> = w.lasso.all_steps().map(|(l, _)| m.lts().label(l)).collect();
    if steps.get(w.trigger) != Some(&ActionLabel::noncrit(w.thread)) {
        return bad("trigger is not a noncrit step of the witness thread");
    }
    if steps[w.trigger + 1..].iter().any(response_labels(property, w.thread)) {
        return bad("a response follows the trigger");
    }
    if !is_just_lasso_by_definition(m, &w.lasso, mode, blockables)? {
        return bad("the lasso is not just");
    }
    Ok(())
}
