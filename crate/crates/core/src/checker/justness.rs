//! Deciding justness of lassos.

use std::collections::BTreeSet;

use super::model::Model;
use crate::error::Result;
use crate::interference::{interferes, BlockableSet, ConcurrencyMode};
use crate::lts::{ActionKind, ActionLabel, Lasso, LabelId, RegisterId, ThreadId};

fn enabled_obligations(m: &Model, blockables: &BlockableSet, s: u32) -> Vec<ActionLabel> {
    let lts = m.lts();
    lts.enabled_ids(s).map(|l| lts.label(l)).filter(|a| !blockables.contains(a)).collect()
}

/// Justness by occurrence counting, valid for thread-consistent models.
///
/// Threads that act on the cycle discharge their own obligations. A thread
/// silent on the cycle keeps its enabled actions for ever, so each one must
/// be matched by a cycle action of the right shape. A finite lasso is just
/// when its last state enables blockable actions only.
pub fn is_just_lasso(m: &Model, l: &Lasso, mode: ConcurrencyMode, blockables: &BlockableSet) -> Result<bool> {
    l.replay(m.lts())?;
    let end = l.loop_state();
    let pending = enabled_obligations(m, blockables, end);
    if l.is_finite() {
        return Ok(pending.is_empty());
    }
    let lts = m.lts();
    let cycle: Vec<ActionLabel> = l.cycle.iter().map(|&(a, _)| lts.label(a)).collect();
    let active: BTreeSet<ThreadId> = cycle.iter().map(|a| a.thread()).collect();
    let writes: BTreeSet<RegisterId> =
        cycle.iter().filter(|a| a.kind() == ActionKind::StartWrite).filter_map(|a| a.register()).collect();
    let starts: BTreeSet<RegisterId> = cycle.iter().filter(|a| a.is_start()).filter_map(|a| a.register()).collect();

    Ok(pending.iter().filter(|a| !active.contains(&a.thread())).all(|a| {
        let r = a.register();
        match (mode, a.kind()) {
            (ConcurrencyMode::T, _) => false,
            (ConcurrencyMode::S, ActionKind::StartRead | ActionKind::StartWrite) => r.is_some_and(|r| writes.contains(&r)),
            (ConcurrencyMode::I, ActionKind::StartWrite) => r.is_some_and(|r| starts.contains(&r)),
            (ConcurrencyMode::I, ActionKind::StartRead) => r.is_some_and(|r| writes.contains(&r)),
            (ConcurrencyMode::A, ActionKind::StartRead | ActionKind::StartWrite) => r.is_some_and(|r| starts.contains(&r)),
            _ => false,
        }
    }))
}

/// Justness straight from the definition: at every position, every enabled
/// non-blockable action must be followed later on by an interfering action.
/// Makes no use of thread consistency.
pub fn is_just_lasso_by_definition(
    m: &Model,
    l: &Lasso,
    mode: ConcurrencyMode,
    blockables: &BlockableSet,
) -> Result<bool> {
    l.replay(m.lts())?;
    let lts = m.lts();
    let cycle: Vec<ActionLabel> = l.cycle.iter().map(|&(a, _)| lts.label(a)).collect();
    let prefix: Vec<LabelId> = l.prefix.steps.iter().map(|&(a, _)| a).collect();
    let states: Vec<u32> = l.prefix.states().collect();

    // Positions on the cycle see the whole cycle afterwards.
    for s in l.cycle_states() {
        for a in enabled_obligations(m, blockables, s) {
            if !cycle.iter().any(|b| interferes(mode, &a, b)) {
                return Ok(false);
            }
        }
    }
    // Prefix positions see the rest of the prefix and then the cycle. The
    // last prefix state is the loop state, already covered unless the
    // lasso is finite.
    for (i, &s) in states.iter().enumerate() {
        if i + 1 == states.len() && !l.is_finite() {
            break;
        }
        for a in enabled_obligations(m, blockables, s) {
            let mut later = prefix[i..].iter().map(|&b| lts.label(b)).chain(cycle.iter().copied());
            if !later.any(|b| interferes(mode, &a, &b)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
