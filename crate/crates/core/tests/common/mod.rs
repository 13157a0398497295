//! Operation schedules and register properties shared by the register
//! tests and the acceptance run.

#![allow(dead_code)]

use std::collections::BTreeSet;

use justcheck::harness::{run_scenario, Outcome, Scenario, ScenarioEvent};
use justcheck::lts::{ActionKind, ThreadId, Value};
use justcheck::registers::{register_state_space, RegisterConfig, RegisterKind};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub type Choices = Vec<(ThreadId, Option<Value>)>;

pub const DOMAIN: [Value; 3] = [0, 1, 2];

/// A completed operation: its interval in event positions and what it did.
#[derive(Debug, Clone, Copy)]
pub struct Op {
    pub start: usize,
    pub end: usize,
    pub write: Option<Value>,
    pub slot: Option<usize>,
}

/// Turns a list of (thread, value-or-read) choices into a well-formed
/// schedule: a thread with an open operation finishes it, otherwise it
/// starts a new one. Open operations are finished at the end.
pub fn schedule(choices: &[(ThreadId, Option<Value>)], threads: usize) -> (Scenario, Vec<Op>) {
    let mut events = Vec::new();
    let mut open: Vec<Option<(usize, Option<Value>)>> = vec![None; threads];
    let mut ops = Vec::new();
    let mut slots = 0;
    let mut finish = |t: ThreadId, events: &mut Vec<ScenarioEvent>, open: &mut Vec<Option<(usize, Option<Value>)>>| {
        let (start, write) = open[t as usize].take().unwrap();
        let slot = write.is_none().then(|| {
            slots += 1;
            slots - 1
        });
        events.push(match slot {
            Some(k) => ScenarioEvent::FinishRead(t, k),
            None => ScenarioEvent::FinishWrite(t),
        });
        ops.push(Op { start, end: events.len() - 1, write, slot });
    };
    for &(t, choice) in choices {
        if open[t as usize].is_some() {
            finish(t, &mut events, &mut open);
        } else {
            events.push(match choice {
                Some(v) => ScenarioEvent::StartWrite(t, v),
                None => ScenarioEvent::StartRead(t),
            });
            open[t as usize] = Some((events.len() - 1, choice));
        }
    }
    for t in 0..threads as ThreadId {
        if open[t as usize].is_some() {
            finish(t, &mut events, &mut open);
        }
    }
    let sc = Scenario { domain: DOMAIN.to_vec(), initial: 0, threads, slots, events };
    (sc, ops)
}

pub fn choices(threads: usize, writers: usize, len: usize) -> impl Strategy<Value = Vec<(ThreadId, Option<Value>)>> {
    prop::collection::vec(
        (0..threads as ThreadId, prop::option::of(0..3 as Value))
            .prop_map(move |(t, c)| (t, if (t as usize) < writers { c } else { None })),
        1..len,
    )
}

pub fn overlaps(a: &Op, b: &Op) -> bool {
    a.start < b.end && b.start < a.end
}

/// Every result of a sequential execution consistent with real-time order.
pub fn linearizable(ops: &[Op], slots: usize) -> BTreeSet<Outcome> {
    fn go(ops: &[Op], done: &mut Vec<bool>, value: Value, out: &mut Outcome, acc: &mut BTreeSet<Outcome>) {
        if done.iter().all(|d| *d) {
            acc.insert(out.clone());
            return;
        }
        for i in 0..ops.len() {
            // An operation may go next once everything that finished before
            // it started has gone.
            if done[i] || (0..ops.len()).any(|j| !done[j] && j != i && ops[j].end < ops[i].start) {
                continue;
            }
            done[i] = true;
            match ops[i].write {
                Some(v) => go(ops, done, v, out, acc),
                None => {
                    out[ops[i].slot.unwrap()] = value;
                    go(ops, done, value, out, acc);
                }
            }
            done[i] = false;
        }
    }
    let mut acc = BTreeSet::new();
    go(ops, &mut vec![false; ops.len()], 0, &mut vec![0; slots], &mut acc);
    acc
}

/// A read overlapping a write may return any domain value.
pub fn safe_overlap_is_arbitrary(c: &Choices) -> Result<(), TestCaseError> {
    let (sc, ops) = schedule(c, 3);
    let out = run_scenario(&sc, RegisterKind::Safe).unwrap();
    for r in ops.iter().filter(|o| o.write.is_none()) {
        if ops.iter().any(|w| w.write.is_some() && overlaps(r, w)) {
            let seen: BTreeSet<Value> = out.iter().map(|o| o[r.slot.unwrap()]).collect();
            prop_assert_eq!(seen, DOMAIN.into_iter().collect::<BTreeSet<_>>());
        }
    }
    Ok(())
}

/// With one writer, a regular read returns the last value written before
/// it started or the value of an overlapping write, and each such value is
/// possible.
pub fn regular_reads_return_possible_values(c: &Choices) -> Result<(), TestCaseError> {
    let (sc, ops) = schedule(c, 3);
    let out = run_scenario(&sc, RegisterKind::Regular).unwrap();
    for r in ops.iter().filter(|o| o.write.is_none()) {
        let before = ops.iter().filter(|w| w.write.is_some() && w.end < r.start).max_by_key(|w| w.end);
        let mut allowed: BTreeSet<Value> = [before.and_then(|w| w.write).unwrap_or(0)].into();
        allowed.extend(ops.iter().filter(|w| overlaps(r, w)).filter_map(|w| w.write));
        let seen: BTreeSet<Value> = out.iter().map(|o| o[r.slot.unwrap()]).collect();
        prop_assert_eq!(seen, allowed);
    }
    Ok(())
}

/// Atomic results are exactly those of some real-time-consistent
/// sequential order, for any number of writers.
pub fn atomic_results_are_linearizable(c: &Choices) -> Result<(), TestCaseError> {
    let (sc, ops) = schedule(c, 3);
    let out = run_scenario(&sc, RegisterKind::Atomic).unwrap();
    prop_assert_eq!(out, linearizable(&ops, sc.slots));
    Ok(())
}

/// Each stronger register permits a subset of the weaker one's results.
pub fn results_shrink_along_the_hierarchy(c: &Choices) -> Result<(), TestCaseError> {
    let (sc, _) = schedule(c, 3);
    let safe = run_scenario(&sc, RegisterKind::Safe).unwrap();
    let regular = run_scenario(&sc, RegisterKind::Regular).unwrap();
    let atomic = run_scenario(&sc, RegisterKind::Atomic).unwrap();
    prop_assert!(regular.is_subset(&safe));
    prop_assert!(atomic.is_subset(&regular));
    prop_assert!(!atomic.is_empty());
    Ok(())
}

/// Every regular `finish_read` leaves a status whose possible values for
/// that reader contain the returned value.
pub fn regular_finish_reads_respect_posv(domain: usize, threads: usize) -> bool {
    let config = RegisterConfig::range("r", domain as Value, 0, RegisterKind::Regular);
    let (lts, statuses) = register_state_space(&config, 0, threads).unwrap();
    let ok = lts.transitions().all(|(s, e)| {
        let a = lts.label(e.label);
        a.kind() != ActionKind::FinishRead || statuses[s as usize].posv[a.thread() as usize].contains(&a.value().unwrap())
    });
    ok
}

/// Thread 0 writes 1 over 0 while threads 1 and 2 read one after the other.
/// Returns the outcome sets for safe, regular and atomic registers.
pub fn new_old_inversion_outcomes() -> [BTreeSet<Outcome>; 3] {
    use ScenarioEvent::*;
    let sc = Scenario {
        domain: vec![0, 1],
        initial: 0,
        threads: 3,
        slots: 2,
        events: vec![StartWrite(0, 1), StartRead(1), FinishRead(1, 0), StartRead(2), FinishRead(2, 1), FinishWrite(0)],
    };
    [RegisterKind::Safe, RegisterKind::Regular, RegisterKind::Atomic].map(|k| run_scenario(&sc, k).unwrap())
}
