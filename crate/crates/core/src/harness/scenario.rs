//! Enumerating the read results a register allows for a fixed schedule.

use std::collections::{BTreeSet, HashSet};

use crate::error::{Error, Result};
use crate::lts::{ActionKind, ActionLabel, Lts, StateId, ThreadId, Value};
use crate::registers::{register_state_space, RegisterConfig, RegisterKind};

/// One invocation or response on a single register. Read results go into
/// numbered slots; order actions are interleaved freely between events.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioEvent {
    StartRead(ThreadId),
    FinishRead(ThreadId, usize),
    StartWrite(ThreadId, Value),
    FinishWrite(ThreadId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub domain: Vec<Value>,
    pub initial: Value,
    pub threads: usize,
    pub slots: usize,
    pub events: Vec<ScenarioEvent>,
}

/// Values of the read slots, in slot order.
pub type Outcome = Vec<Value>;

/// One writer (thread 0) and two readers over `{0, 1, 2}`. The writer
/// first writes 0, the readers read `a` and `b`; then a write of 2 stays
/// open while thread 1 reads `c` and both readers read again (`d`, `e`).
pub fn appendix_a_script() -> Scenario {
    use ScenarioEvent::*;
    let (a, b, c, d, e) = (0, 1, 2, 3, 4);
    Scenario {
        domain: vec![0, 1, 2],
        initial: 0,
        threads: 3,
        slots: 5,
        events: vec![
            StartWrite(0, 0),
            FinishWrite(0),
            StartRead(2),
            StartRead(1),
            FinishRead(2, b),
            FinishRead(1, a),
            StartRead(1),
            StartWrite(0, 2),
            FinishRead(1, c),
            StartRead(2),
            StartRead(1),
            FinishRead(2, e),
            FinishRead(1, d),
            FinishWrite(0),
        ],
    }
}

fn validate(sc: &Scenario) -> Result<()> {
    let mut open: Vec<Option<bool>> = vec![None; sc.threads];
    let mut filled = vec![false; sc.slots];
    let bad = |i: usize, msg: &str| Err(Error::Scenario(format!("event {i}: {msg}")));
    for (i, ev) in sc.events.iter().enumerate() {
        let (t, read, start) = match *ev {
            ScenarioEvent::StartRead(t) => (t, true, true),
            ScenarioEvent::FinishRead(t, slot) => {
                match filled.get_mut(slot) {
                    None => return bad(i, "slot out of range"),
                    Some(f) if *f => return bad(i, "slot filled twice"),
                    Some(f) => *f = true,
                }
                (t, true, false)
            }
            ScenarioEvent::StartWrite(t, v) => {
                if !sc.domain.contains(&v) {
                    return bad(i, "value outside the domain");
                }
                (t, false, true)
            }
            ScenarioEvent::FinishWrite(t) => (t, false, false),
        };
        let Some(slot) = open.get_mut(t as usize) else { return bad(i, "unknown thread") };
        match (start, *slot) {
            (true, None) => *slot = Some(read),
            (true, Some(_)) => return bad(i, "thread already has an operation in progress"),
            (false, Some(r)) if r == read => *slot = None,
            (false, _) => return bad(i, "no matching operation in progress"),
        }
    }
    if filled.iter().any(|f| !f) {
        return Err(Error::Scenario("some slot is never read".into()));
    }
    Ok(())
}

type Config = (StateId, Vec<Option<Value>>);

fn order_closure(l: &Lts, configs: HashSet<Config>) -> HashSet<Config> {
    let mut seen = configs.clone();
    let mut stack: Vec<Config> = configs.into_iter().collect();
    while let Some((s, vals)) = stack.pop() {
        for e in l.out(s) {
            let k = l.label(e.label).kind();
            if matches!(k, ActionKind::OrderRead | ActionKind::OrderWrite) {
                let next = (e.target, vals.clone());
                if seen.insert(next.clone()) {
                    stack.push(next);
                }
            }
        }
    }
    seen
}

/// Every combination of read results the register permits for the script.
pub fn run_scenario(sc: &Scenario, kind: RegisterKind) -> Result<BTreeSet<Outcome>> {
    validate(sc)?;
    let config = RegisterConfig::new("r", sc.domain.clone(), sc.initial, kind);
    let (l, _) = register_state_space(&config, 0, sc.threads)?;
    let mut current: HashSet<Config> = HashSet::from([(l.initial(), vec![None; sc.slots])]);
    for ev in &sc.events {
        current = order_closure(&l, current);
        let mut next = HashSet::new();
        for (s, vals) in &current {
            for e in l.out(*s) {
                let a = l.label(e.label);
                let slot = match *ev {
                    ScenarioEvent::StartRead(t) if a == ActionLabel::start_read(t, 0) => None,
                    ScenarioEvent::StartWrite(t, v) if a == ActionLabel::start_write(t, 0, v) => None,
                    ScenarioEvent::FinishWrite(t) if a == ActionLabel::finish_write(t, 0) => None,
                    ScenarioEvent::FinishRead(t, slot) if a.kind() == ActionKind::FinishRead && a.thread() == t => Some(slot),
                    _ => continue,
                };
                let mut vals = vals.clone();
                if let Some(slot) = slot {
                    vals[slot] = a.value();
                }
                next.insert((e.target, vals));
            }
        }
        current = next;
    }
    Ok(current.into_iter().map(|(_, v)| v.into_iter().map(|x| x.unwrap_or_default()).collect()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cde(kind: RegisterKind) -> BTreeSet<(Value, Value, Value)> {
        let out = run_scenario(&appendix_a_script(), kind).unwrap();
        assert!(out.iter().all(|o| o[0] == 0 && o[1] == 0));
        out.iter().map(|o| (o[2], o[3], o[4])).collect()
    }

    #[test]
    fn outcome_counts() {
        assert_eq!(cde(RegisterKind::Safe).len(), 27);
        let regular = cde(RegisterKind::Regular);
        assert_eq!(regular.len(), 8);
        assert!(regular.iter().all(|&(c, d, e)| [c, d, e].iter().all(|v| *v != 1)));
        let atomic = cde(RegisterKind::Atomic);
        let mut want: BTreeSet<_> = [0, 2].iter().flat_map(|&d| [0, 2].map(move |e| (0, d, e))).collect();
        want.insert((2, 2, 2));
        assert_eq!(atomic, want);
    }

    #[test]
    fn overlapping_operations_of_one_thread_are_rejected() {
        let mut sc = appendix_a_script();
        sc.events.insert(1, ScenarioEvent::StartRead(0));
        assert!(matches!(run_scenario(&sc, RegisterKind::Safe), Err(Error::Scenario(_))));
    }
}
