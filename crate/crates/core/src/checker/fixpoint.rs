//! Greatest fixpoint of states that admit a just, response-free path.
//!
//! A state stays in `X` while, for every non-blockable action `a` it
//! enables, some response-free path leads to a transition that interferes
//! with `a`, is not itself a response, and lands back in `X`. Interferer
//! classes are unions of a few [`Base`] predicates, so one backward sweep
//! per base serves every class that mentions it.

use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;

use super::model::Model;
use crate::error::{Error, Result};
use crate::interference::{interferer_class, Base, BlockableSet, ConcurrencyMode, InterfererClass};
use crate::lts::{ActionLabel, Limits, Lts, Reverse, StateId};

/// Per-label interferer classes for one model and mode.
#[derive(Debug, Clone)]
pub(crate) struct Classes {
    pub bases: Vec<Base>,
    pub classes: Vec<InterfererClass>,
    /// Class of each label, `None` for blockable labels.
    pub class_of: Vec<Option<u32>>,
    pub class_bases: Vec<Vec<u32>>,
    /// Bases each label belongs to.
    pub label_bases: Vec<Vec<u32>>,
}

impl Classes {
    pub fn new(alphabet: &[ActionLabel], mode: ConcurrencyMode, blockables: &BlockableSet) -> Self {
        let mut class_ids: BTreeMap<InterfererClass, u32> = BTreeMap::new();
        let mut base_ids: BTreeMap<Base, u32> = BTreeMap::new();
        let class_of: Vec<Option<u32>> = alphabet
            .iter()
            .map(|a| {
                if blockables.contains(a) {
                    return None;
                }
                let c = interferer_class(mode, a);
                let next = class_ids.len() as u32;
                let id = *class_ids.entry(c).or_insert(next);
                for b in c.bases() {
                    let next = base_ids.len() as u32;
                    base_ids.entry(b).or_insert(next);
                }
                Some(id)
            })
            .collect();
        let mut classes = vec![None; class_ids.len()];
        for (c, &i) in &class_ids {
            classes[i as usize] = Some(*c);
        }
        let classes: Vec<InterfererClass> = classes.into_iter().map(Option::unwrap).collect();
        let mut bases = vec![Base::Thread(0); base_ids.len()];
        for (b, &i) in &base_ids {
            bases[i as usize] = *b;
        }
        let class_bases = classes.iter().map(|c| c.bases().map(|b| base_ids[&b]).collect()).collect();
        let label_bases = alphabet
            .iter()
            .map(|a| (0..bases.len() as u32).filter(|&i| bases[i as usize].matches(a)).collect())
            .collect();
        Self { bases, classes, class_of, class_bases, label_bases }
    }

    /// Classes required at `s`, in ascending order without repeats.
    pub fn required(&self, lts: &Lts, s: StateId, out: &mut Vec<u32>) {
        out.clear();
        out.extend(lts.enabled_ids(s).filter_map(|l| self.class_of[l as usize]));
        out.sort_unstable();
        out.dedup();
    }
}

/// Result of [`nu_core`].
#[derive(Debug, Clone)]
pub struct Fixpoint {
    pub states: FixedBitSet,
    pub iterations: usize,
    pub mode: ConcurrencyMode,
    pub response: FixedBitSet,
}

impl Fixpoint {
    pub fn contains(&self, s: StateId) -> bool {
        self.states.contains(s as usize)
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_clear()
    }
}

/// States with a response-free path to a qualifying transition into `x`,
/// one set per base.
fn good_sets(lts: &Lts, rev: &Reverse, cl: &Classes, response: &FixedBitSet, x: &FixedBitSet, limits: &Limits) -> Result<Vec<FixedBitSet>> {
    let n = lts.num_states();
    let mut good = vec![FixedBitSet::with_capacity(n); cl.bases.len()];
    let mut stacks: Vec<Vec<StateId>> = vec![Vec::new(); cl.bases.len()];
    for s in 0..n as StateId {
        for e in lts.out(s) {
            if response.contains(e.label as usize) || !x.contains(e.target as usize) {
                continue;
            }
            for &b in &cl.label_bases[e.label as usize] {
                if !good[b as usize].put(s as usize) {
                    stacks[b as usize].push(s);
                }
            }
        }
    }
    for (b, stack) in stacks.iter_mut().enumerate() {
        limits.check(n as u64, 0).map_err(|e| with_states(e, n))?;
        let set = &mut good[b];
        while let Some(s) = stack.pop() {
            for &(l, p) in rev.preds(s) {
                if !response.contains(l as usize) && !set.put(p as usize) {
                    stack.push(p);
                }
            }
        }
    }
    Ok(good)
}

fn with_states(e: Error, n: usize) -> Error {
    match e {
        Error::Timeout { .. } => Error::Timeout { states: n as u64 },
        other => other,
    }
}

/// Computes the greatest set of states from which a just path avoiding
/// every label in `response` exists.
pub fn nu_core(
    m: &Model,
    response: &FixedBitSet,
    mode: ConcurrencyMode,
    blockables: &BlockableSet,
    limits: &Limits,
) -> Result<Fixpoint> {
    let lts = m.lts();
    let rev = lts.reverse();
    let cl = Classes::new(lts.alphabet(), mode, blockables);
    nu_core_with(lts, &rev, &cl, response, mode, limits)
}

pub(crate) fn nu_core_with(
    lts: &Lts,
    rev: &Reverse,
    cl: &Classes,
    response: &FixedBitSet,
    mode: ConcurrencyMode,
    limits: &Limits,
) -> Result<Fixpoint> {
    let mut x = super::scc::candidates(lts, rev, cl, response, limits)?;
    let mut iterations = 0;
    let mut required = Vec::new();
    loop {
        iterations += 1;
        let good = good_sets(lts, rev, cl, response, &x, limits)?;
        let mut removed = Vec::new();
        for s in x.ones() {
            cl.required(lts, s as StateId, &mut required);
            let ok = required
                .iter()
                .all(|&c| cl.class_bases[c as usize].iter().any(|&b| good[b as usize].contains(s)));
            if !ok {
                removed.push(s);
            }
        }
        if removed.is_empty() {
            break;
        }
        for s in removed {
            x.remove(s);
        }
    }
    Ok(Fixpoint { states: x, iterations, mode, response: response.clone() })
}

/// Next-hop table for reaching a transition of one base into `X`.
#[derive(Debug, Clone)]
pub(crate) struct Hops {
    /// States from which a qualifying transition is reachable.
    pub reach: FixedBitSet,
    /// States whose recorded edge is itself the qualifying transition.
    pub seed: FixedBitSet,
    /// Global edge index to follow from each state in `reach`.
    pub next: Vec<u32>,
}

pub(crate) fn hops(lts: &Lts, rev: &Reverse, cl: &Classes, base: u32, fp: &Fixpoint) -> Hops {
    let n = lts.num_states();
    let mut reach = FixedBitSet::with_capacity(n);
    let mut seed = FixedBitSet::with_capacity(n);
    let mut next = vec![u32::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    for s in 0..n as StateId {
        let off = lts.edge_offset(s);
        for (i, e) in lts.out(s).iter().enumerate() {
            if !fp.response.contains(e.label as usize)
                && fp.contains(e.target)
                && cl.label_bases[e.label as usize].contains(&base)
            {
                reach.insert(s as usize);
                seed.insert(s as usize);
                next[s as usize] = (off + i) as u32;
                queue.push_back(s);
                break;
            }
        }
    }
    while let Some(s) = queue.pop_front() {
        for &(l, p) in rev.preds(s) {
            if fp.response.contains(l as usize) || reach.put(p as usize) {
                continue;
            }
            let out = lts.out(p);
            let i = out
                .binary_search(&crate::lts::Edge { label: l, target: s })
                .expect("reverse edge has a forward counterpart");
            next[p as usize] = (lts.edge_offset(p) + i) as u32;
            queue.push_back(p);
        }
    }
    Hops { reach, seed, next }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lts::LtsBuilder;

    fn model(edges: &[(u32, ActionLabel, u32)], states: usize) -> Model {
        let mut labels: Vec<ActionLabel> = edges.iter().map(|e| e.1).collect();
        labels.sort();
        labels.dedup();
        let mut b = LtsBuilder::new(labels);
        for _ in 0..states {
            b.add_state();
        }
        for &(s, l, t) in edges {
            b.add_transition(s, l, t).unwrap();
        }
        Model::from_lts(b.build().unwrap(), 2, vec!["r".into()])
    }

    #[test]
    fn response_on_every_cycle_empties_the_core() {
        let (nc, c) = (ActionLabel::noncrit(0), ActionLabel::crit(0));
        let m = model(&[(0, nc, 1), (1, c, 0)], 2);
        let resp = m.label_mask(|a| a.is_crit());
        let bl = BlockableSet::noncrit(m.lts().alphabet());
        let fp = nu_core(&m, &resp, ConcurrencyMode::T, &bl, &Limits::default()).unwrap();
        // state 0 enables only the blockable noncrit, so it may idle there
        assert!(fp.contains(0));
        assert!(!fp.contains(1));
    }

    #[test]
    fn busy_wait_depends_on_mode() {
        // thread 0 spins on reads of r; thread 1 could start a write
        let sr0 = ActionLabel::start_read(0, 0);
        let fr0 = ActionLabel::finish_read(0, 0, 0);
        let sw1 = ActionLabel::start_write(1, 0, 1);
        let m = model(&[(0, sr0, 1), (1, fr0, 0), (0, sw1, 2), (1, sw1, 2)], 3);
        let resp = m.label_mask(|a| a.kind() == crate::lts::ActionKind::StartWrite);
        let bl = BlockableSet::noncrit(m.lts().alphabet());
        let run = |mode| nu_core(&m, &resp, mode, &bl, &Limits::default()).unwrap();
        assert!(!run(ConcurrencyMode::T).contains(0));
        assert!(!run(ConcurrencyMode::S).contains(0));
        assert!(run(ConcurrencyMode::I).contains(0));
        assert!(run(ConcurrencyMode::A).contains(0));
    }

    #[test]
    fn core_is_idempotent_and_antitone() {
        let sr0 = ActionLabel::start_read(0, 0);
        let fr0 = ActionLabel::finish_read(0, 0, 0);
        let sw1 = ActionLabel::start_write(1, 0, 1);
        let fw1 = ActionLabel::finish_write(1, 0);
        let m = model(&[(0, sr0, 1), (1, fr0, 0), (0, sw1, 2), (2, fw1, 0), (1, sw1, 3), (3, fr0, 2)], 4);
        let bl = BlockableSet::noncrit(m.lts().alphabet());
        let small = m.label_mask(|a| *a == fw1);
        let big = m.label_mask(|a| *a == fw1 || *a == fr0);
        for mode in ConcurrencyMode::ALL {
            let a = nu_core(&m, &small, mode, &bl, &Limits::default()).unwrap();
            let b = nu_core(&m, &big, mode, &bl, &Limits::default()).unwrap();
            assert!(b.states.is_subset(&a.states));
            // a second pass starting from the result changes nothing
            let lts = m.lts();
            let cl = Classes::new(lts.alphabet(), mode, &bl);
            let good = good_sets(lts, &lts.reverse(), &cl, &small, &a.states, &Limits::default()).unwrap();
            let mut req = Vec::new();
            for s in a.states.ones() {
                cl.required(lts, s as StateId, &mut req);
                assert!(req.iter().all(|&c| cl.class_bases[c as usize].iter().any(|&b| good[b as usize].contains(s))));
            }
        }
    }
}
