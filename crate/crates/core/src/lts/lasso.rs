use std::fmt::Write as _;

use super::{LabelId, Lts, StateId};
use crate::error::{Error, Result};

/// A finite path: a start state followed by `(label, target)` steps.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Path {
    pub start: StateId,
    pub steps: Vec<(LabelId, StateId)>,
}

impl Path {
    pub fn new(start: StateId) -> Self {
        Self { start, steps: Vec::new() }
    }

    pub fn end(&self) -> StateId {
        self.steps.last().map_or(self.start, |&(_, s)| s)
    }

    pub fn push(&mut self, label: LabelId, target: StateId) {
        self.steps.push((label, target));
    }

    pub fn extend(&mut self, other: &Path) {
        debug_assert_eq!(self.end(), other.start);
        self.steps.extend_from_slice(&other.steps);
    }

    /// States visited, including the start.
    pub fn states(&self) -> impl Iterator<Item = StateId> + '_ {
        std::iter::once(self.start).chain(self.steps.iter().map(|&(_, s)| s))
    }

    pub fn replay(&self, lts: &Lts) -> Result<()> {
        let mut s = self.start;
        if !lts.contains_state(s) {
            return Err(Error::Replay(format!("unknown state {s}")));
        }
        for (i, &(l, t)) in self.steps.iter().enumerate() {
            if !lts.has_transition(s, l, t) {
                return Err(Error::Replay(format!("step {i}: no transition {s} -{l}-> {t}")));
            }
            s = t;
        }
        Ok(())
    }
}

/// `prefix · cycle^ω`. The cycle starts and ends at the last prefix state.
/// An empty cycle stands for a finite path that stops at the prefix end,
/// which is how maximal paths into a state without obligations are kept.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Lasso {
    pub prefix: Path,
    pub cycle: Vec<(LabelId, StateId)>,
}

impl Lasso {
    pub fn loop_state(&self) -> StateId {
        self.prefix.end()
    }

    pub fn is_finite(&self) -> bool {
        self.cycle.is_empty()
    }

    pub fn replay(&self, lts: &Lts) -> Result<()> {
        if self.prefix.start != lts.initial() {
            return Err(Error::Replay("prefix does not start at the initial state".into()));
        }
        self.prefix.replay(lts)?;
        let cycle = Path { start: self.loop_state(), steps: self.cycle.clone() };
        cycle.replay(lts)?;
        if cycle.end() != self.loop_state() {
            return Err(Error::Replay("cycle does not return to its first state".into()));
        }
        Ok(())
    }

    /// Every step in order, prefix first.
    pub fn all_steps(&self) -> impl Iterator<Item = (LabelId, StateId)> + '_ {
        self.prefix.steps.iter().chain(self.cycle.iter()).copied()
    }

    pub fn cycle_states(&self) -> impl Iterator<Item = StateId> + '_ {
        let first = std::iter::once(self.loop_state());
        let n = self.cycle.len();
        first.chain(self.cycle.iter().take(n.saturating_sub(1)).map(|&(_, s)| s))
    }

    /// Numbered `k: <label>` lines with the cycle set off by a marker.
    pub fn render(&self, lts: &Lts, names: &[String]) -> String {
        let mut out = String::new();
        let mut k = 0;
        for &(l, _) in &self.prefix.steps {
            let _ = writeln!(out, "{k}: {}", lts.label(l).display(names));
            k += 1;
        }
        let _ = writeln!(out, "--- cycle ---");
        for &(l, _) in &self.cycle {
            let _ = writeln!(out, "{k}: {}", lts.label(l).display(names));
            k += 1;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lts::{ActionLabel, LtsBuilder};

    fn ring() -> Lts {
        let (a, b) = (ActionLabel::noncrit(0), ActionLabel::crit(0));
        let mut bl = LtsBuilder::new([a, b]);
        let s0 = bl.add_state();
        let s1 = bl.add_state();
        bl.add_transition(s0, a, s1).unwrap();
        bl.add_transition(s1, b, s0).unwrap();
        bl.build().unwrap()
    }

    #[test]
    fn replay_accepts_real_lasso() {
        let l = ring();
        let nc = l.label_id(&ActionLabel::noncrit(0)).unwrap();
        let c = l.label_id(&ActionLabel::crit(0)).unwrap();
        let lasso = Lasso { prefix: Path { start: 0, steps: vec![(nc, 1)] }, cycle: vec![(c, 0), (nc, 1)] };
        lasso.replay(&l).unwrap();
        assert_eq!(lasso.cycle_states().collect::<Vec<_>>(), vec![1, 0]);
        let text = lasso.render(&l, &[]);
        assert!(text.contains("0: noncrit(t=0)\n--- cycle ---\n1: crit(t=0)"));
    }

    #[test]
    fn replay_rejects_broken_cycle() {
        let l = ring();
        let c = l.label_id(&ActionLabel::crit(0)).unwrap();
        let lasso = Lasso { prefix: Path::new(0), cycle: vec![(c, 1)] };
        assert!(lasso.replay(&l).is_err());
    }
}
