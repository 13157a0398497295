//! Concurrency relations, blockable actions and thread consistency.
//!
//! Everything is phrased in terms of *interference*, the complement of the
//! concurrency relation: `interferes(m, a, b)` says that `b` may disable or
//! postpone `a`, so an occurrence of `b` discharges a pending `a`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lts::{ActionKind, ActionLabel, Lts, RegisterId, StateId, ThreadId};

/// How much blocking register accesses may cause, from none (`T`) to full (`A`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ConcurrencyMode {
    /// Only actions of the same thread interfere.
    T,
    /// Start-writes also interfere with starts on the same register.
    S,
    /// Start-reads also interfere with start-writes on the same register.
    I,
    /// Start-reads also interfere with start-reads on the same register.
    A,
}

impl ConcurrencyMode {
    pub const ALL: [ConcurrencyMode; 4] = [Self::T, Self::S, Self::I, Self::A];

    pub fn letter(self) -> char {
        match self {
            Self::T => 'T',
            Self::S => 'S',
            Self::I => 'I',
            Self::A => 'A',
        }
    }
}

impl fmt::Display for ConcurrencyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for ConcurrencyMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "T" | "t" => Ok(Self::T),
            "S" | "s" => Ok(Self::S),
            "I" | "i" => Ok(Self::I),
            "A" | "a" => Ok(Self::A),
            _ => Err(Error::Config(format!("unknown concurrency mode {s:?}"))),
        }
    }
}

fn start_register(a: &ActionLabel) -> Option<RegisterId> {
    if a.is_start() {
        a.register()
    } else {
        None
    }
}

/// Whether `b` interferes with `a` under `mode`. Reflexive by construction,
/// since an action always shares its thread with itself.
pub fn interferes(mode: ConcurrencyMode, a: &ActionLabel, b: &ActionLabel) -> bool {
    if a.thread() == b.thread() {
        return true;
    }
    let Some(r) = start_register(a) else { return false };
    if b.register() != Some(r) {
        return false;
    }
    match (mode, a.kind(), b.kind()) {
        (ConcurrencyMode::T, _, _) => false,
        (_, _, ActionKind::StartWrite) => true,
        (ConcurrencyMode::I | ConcurrencyMode::A, ActionKind::StartWrite, ActionKind::StartRead) => true,
        (ConcurrencyMode::A, ActionKind::StartRead, ActionKind::StartRead) => true,
        _ => false,
    }
}

/// Building block of interferer classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Base {
    Thread(ThreadId),
    StartWriteOn(RegisterId),
    StartReadOn(RegisterId),
}

impl Base {
    pub fn matches(self, b: &ActionLabel) -> bool {
        match self {
            Base::Thread(t) => b.thread() == t,
            Base::StartWriteOn(r) => b.is_start_write_on(r),
            Base::StartReadOn(r) => b.is_start_read_on(r),
        }
    }
}

/// The set `{ b | interferes(mode, a, b) }` as a union of [`Base`]s.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InterfererClass {
    pub thread: ThreadId,
    pub start_writes_on: Option<RegisterId>,
    pub start_reads_on: Option<RegisterId>,
}

impl InterfererClass {
    pub fn matches(&self, b: &ActionLabel) -> bool {
        self.bases().any(|base| base.matches(b))
    }

    pub fn bases(&self) -> impl Iterator<Item = Base> {
        std::iter::once(Base::Thread(self.thread))
            .chain(self.start_writes_on.map(Base::StartWriteOn))
            .chain(self.start_reads_on.map(Base::StartReadOn))
    }
}

pub fn interferer_class(mode: ConcurrencyMode, a: &ActionLabel) -> InterfererClass {
    let mut class = InterfererClass { thread: a.thread(), start_writes_on: None, start_reads_on: None };
    if let Some(r) = start_register(a) {
        let write = a.kind() == ActionKind::StartWrite;
        if mode != ConcurrencyMode::T {
            class.start_writes_on = Some(r);
        }
        if (mode == ConcurrencyMode::I && write) || mode == ConcurrencyMode::A {
            class.start_reads_on = Some(r);
        }
    }
    class
}

/// Actions exempt from the justness obligation: a thread may stay in its
/// non-critical section for ever.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BlockableSet {
    labels: BTreeSet<ActionLabel>,
}

impl BlockableSet {
    /// The `noncrit` labels of an alphabet.
    pub fn noncrit(alphabet: &[ActionLabel]) -> Self {
        Self { labels: alphabet.iter().filter(|a| a.is_noncrit()).copied().collect() }
    }

    pub fn contains(&self, a: &ActionLabel) -> bool {
        self.labels.contains(a)
    }

    pub fn iter(&self) -> impl Iterator<Item = &ActionLabel> {
        self.labels.iter()
    }
}

/// A transition by one thread that disables an action of another.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConsistencyViolation {
    pub state: StateId,
    pub disabled: ActionLabel,
    pub by: ActionLabel,
    pub target: StateId,
}

/// Searches for `s -b-> s'` with `a` enabled at `s`, disabled at `s'`, and
/// `a`, `b` owned by different threads. Returns the first one in state order.
pub fn check_thread_consistency(m: &Lts) -> Option<ConsistencyViolation> {
    for s in 0..m.num_states() as StateId {
        let enabled: Vec<_> = m.enabled_ids(s).collect();
        for e in m.out(s) {
            let b = m.label(e.label);
            for &a_id in &enabled {
                let a = m.label(a_id);
                if a.thread() != b.thread() && !m.is_enabled(e.target, a_id) {
                    return Some(ConsistencyViolation { state: s, disabled: a, by: b, target: e.target });
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use ConcurrencyMode::*;

    fn sr(t: ThreadId, r: RegisterId) -> ActionLabel {
        ActionLabel::start_read(t, r)
    }
    fn sw(t: ThreadId, r: RegisterId) -> ActionLabel {
        ActionLabel::start_write(t, r, 1)
    }

    #[test]
    fn relation_examples() {
        for m in ConcurrencyMode::ALL {
            assert!(interferes(m, &sr(0, 0), &sr(0, 0)));
            assert!(interferes(m, &ActionLabel::crit(1), &ActionLabel::finish_write(1, 3)));
            assert!(!interferes(m, &ActionLabel::crit(1), &sw(0, 0)));
        }
        assert!(!interferes(S, &sw(1, 0), &sr(0, 0)));
        assert!(interferes(S, &sr(0, 0), &sw(1, 0)));
        assert!(interferes(I, &sw(1, 0), &sr(0, 0)));
        assert!(!interferes(I, &sr(1, 0), &sr(0, 0)));
        assert!(interferes(A, &sr(0, 0), &sr(1, 0)));
        assert!(!interferes(A, &sr(0, 0), &sr(1, 1)));
        assert!(!interferes(A, &ActionLabel::finish_read(0, 0, 1), &sw(1, 0)));
    }

    #[test]
    fn class_examples() {
        let crit = interferer_class(T, &ActionLabel::crit(0));
        assert_eq!(crit.bases().collect::<Vec<_>>(), vec![Base::Thread(0)]);
        let c = interferer_class(S, &sr(0, 2));
        assert_eq!(c.bases().collect::<Vec<_>>(), vec![Base::Thread(0), Base::StartWriteOn(2)]);
        assert_ne!(c, interferer_class(S, &ActionLabel::finish_read(0, 2, 0)));
        assert_eq!(interferer_class(I, &sw(0, 2)).start_reads_on, Some(2));
        assert_eq!(interferer_class(I, &sr(0, 2)).start_reads_on, None);
    }

    #[test]
    fn class_matches_relation_on_all_pairs() {
        let mut labels = Vec::new();
        for t in 0..2 {
            labels.extend([ActionLabel::noncrit(t), ActionLabel::crit(t)]);
            for r in 0..2 {
                labels.extend([
                    sr(t, r),
                    sw(t, r),
                    ActionLabel::start_write(t, r, 0),
                    ActionLabel::finish_read(t, r, 1),
                    ActionLabel::finish_write(t, r),
                    ActionLabel::order_read(t, r),
                    ActionLabel::order_write(t, r),
                ]);
            }
        }
        for m in ConcurrencyMode::ALL {
            for a in &labels {
                let class = interferer_class(m, a);
                for b in &labels {
                    assert_eq!(class.matches(b), interferes(m, a, b), "{m} {a} {b}");
                }
            }
        }
    }

    #[test]
    fn parses_modes() {
        assert_eq!("I".parse::<ConcurrencyMode>().unwrap(), I);
        assert!("X".parse::<ConcurrencyMode>().is_err());
    }

    #[test]
    fn single_component_is_consistent() {
        let mut b = crate::lts::LtsBuilder::new([ActionLabel::noncrit(0), ActionLabel::crit(0)]);
        let s0 = b.add_state();
        let s1 = b.add_state();
        b.add_transition(s0, ActionLabel::noncrit(0), s1).unwrap();
        b.add_transition(s1, ActionLabel::crit(0), s0).unwrap();
        assert_eq!(check_thread_consistency(&b.build().unwrap()), None);
    }
}
