use std::collections::BTreeSet;
use std::fmt;

use crate::lts::{ActionKind, ActionLabel, Lts, StateId};

/// A state or transition breaking the thread well-formedness rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub state: StateId,
    pub reason: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "state {}: {}", self.state, self.reason)
    }
}

/// Checks that after `start_read(t,r)` exactly the `finish_read(t,r,d)`
/// actions of the alphabet are enabled, that after `start_write(t,r,d)`
/// only `finish_write(t,r)` is, that finish actions occur nowhere else,
/// and that every label belongs to one thread.
pub fn validate_thread_lts(l: &Lts) -> Vec<Violation> {
    let mut out = Vec::new();
    let threads: BTreeSet<_> = l.alphabet().iter().map(|a| a.thread()).collect();
    if threads.len() > 1 {
        out.push(Violation { state: l.initial(), reason: format!("alphabet mixes threads {threads:?}") });
    }

    // States entered by a start action, with the finish set they must offer.
    let mut expected: Vec<Option<BTreeSet<ActionLabel>>> = vec![None; l.num_states()];
    for (s, e) in l.transitions() {
        let a = l.label(e.label);
        let want: BTreeSet<ActionLabel> = match a.kind() {
            ActionKind::StartRead => l
                .alphabet()
                .iter()
                .filter(|b| b.kind() == ActionKind::FinishRead && b.thread() == a.thread() && b.register() == a.register())
                .copied()
                .collect(),
            ActionKind::StartWrite => [ActionLabel::finish_write(a.thread(), a.register().unwrap_or_default())].into(),
            _ => continue,
        };
        let slot = &mut expected[e.target as usize];
        match slot {
            Some(prev) if *prev != want => out.push(Violation {
                state: e.target,
                reason: format!("entered by {a} from {s} and by a different start action"),
            }),
            _ => *slot = Some(want),
        }
    }

    for s in 0..l.num_states() as StateId {
        let enabled: BTreeSet<ActionLabel> = l.enabled_ids(s).map(|i| l.label(i)).collect();
        match &expected[s as usize] {
            Some(want) => {
                if &enabled != want {
                    let got: Vec<String> = enabled.iter().map(|a| a.to_string()).collect();
                    out.push(Violation {
                        state: s,
                        reason: format!("after a start action expected only its finish actions, found [{}]", got.join(", ")),
                    });
                }
            }
            None => {
                for a in enabled.iter().filter(|a| matches!(a.kind(), ActionKind::FinishRead | ActionKind::FinishWrite)) {
                    out.push(Violation { state: s, reason: format!("{a} enabled outside an operation") });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lts::LtsBuilder;

    #[test]
    fn write_followed_by_crit_is_flagged() {
        let (sw, fw, c) = (ActionLabel::start_write(0, 0, 1), ActionLabel::finish_write(0, 0), ActionLabel::crit(0));
        let mut b = LtsBuilder::new([sw, fw, c]);
        let s0 = b.add_state();
        let s1 = b.add_state();
        b.add_transition(s0, sw, s1).unwrap();
        b.add_transition(s1, fw, s0).unwrap();
        b.add_transition(s1, c, s0).unwrap();
        let v = validate_thread_lts(&b.build().unwrap());
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].state, s1);
    }

    #[test]
    fn finish_read_at_initial_state_is_flagged() {
        let fr = ActionLabel::finish_read(0, 0, 0);
        let mut b = LtsBuilder::new([fr]);
        let s0 = b.add_state();
        b.add_transition(s0, fr, s0).unwrap();
        let v = validate_thread_lts(&b.build().unwrap());
        assert!(v.iter().any(|x| x.state == s0 && x.reason.contains("outside")));
    }

    #[test]
    fn read_must_offer_every_value() {
        let sr = ActionLabel::start_read(0, 0);
        let (f0, f1) = (ActionLabel::finish_read(0, 0, 0), ActionLabel::finish_read(0, 0, 1));
        let mut b = LtsBuilder::new([sr, f0, f1]);
        let s0 = b.add_state();
        let s1 = b.add_state();
        b.add_transition(s0, sr, s1).unwrap();
        b.add_transition(s1, f0, s0).unwrap();
        assert_eq!(validate_thread_lts(&b.clone().build().unwrap()).len(), 1);
        b.add_transition(s1, f1, s0).unwrap();
        assert!(validate_thread_lts(&b.build().unwrap()).is_empty());
    }

    #[test]
    fn mixed_threads_are_flagged() {
        let mut b = LtsBuilder::new([ActionLabel::crit(0), ActionLabel::crit(1)]);
        b.add_state();
        assert!(!validate_thread_lts(&b.build().unwrap()).is_empty());
    }
}
