//! Exhaustive liveness oracle for tiny models.
//!
//! Searches the product of the model with the set of still-undischarged
//! obligations. A product node `(s, P)` records the non-blockable labels
//! enabled earlier on the path that have not yet met an interfering action.
//! A just response-free path exists iff the product reaches a node that
//! may stop (nothing pending, nothing enabled) or a cycle along which every
//! label drops out of `P` at least once.

use std::collections::{hash_map::Entry, HashMap, VecDeque};
use std::time::Instant;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use super::model::Model;
use super::{Property, Stats, Verdict};
use crate::error::{Error, Result};
use crate::interference::{interferes, BlockableSet, ConcurrencyMode};
use crate::lts::{ActionLabel, StateId, ThreadId};

type Mask = u64;

struct Oracle<'a> {
    m: &'a Model,
    enabled: Vec<Mask>,
    kills: Vec<Mask>,
}

impl<'a> Oracle<'a> {
    fn new(m: &'a Model, mode: ConcurrencyMode, blockables: &BlockableSet) -> Result<Self> {
        let lts = m.lts();
        let alphabet = lts.alphabet();
        if alphabet.len() > Mask::BITS as usize {
            return Err(Error::TooLarge { states: alphabet.len(), bound: Mask::BITS as usize });
        }
        let obligation = |a: &ActionLabel| !blockables.contains(a);
        let enabled = (0..lts.num_states() as StateId)
            .map(|s| lts.enabled_ids(s).filter(|&l| obligation(&lts.label(l))).fold(0, |acc, l| acc | 1 << l))
            .collect();
        let kills = alphabet
            .iter()
            .map(|b| {
                alphabet
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| obligation(a) && interferes(mode, a, b))
                    .fold(0, |acc, (i, _)| acc | 1 << i)
            })
            .collect();
        Ok(Self { m, enabled, kills })
    }

    /// Whether a just path avoiding `forbidden` labels starts at one of `starts`.
    fn just_path_exists(&self, starts: &[StateId], forbidden: impl Fn(&ActionLabel) -> bool) -> (bool, usize) {
        let lts = self.m.lts();
        let mut graph: DiGraph<(StateId, Mask), ()> = DiGraph::new();
        let mut index: HashMap<(StateId, Mask), NodeIndex> = HashMap::new();
        let mut queue = VecDeque::new();
        for &s in starts {
            let key = (s, 0);
            if let Entry::Vacant(v) = index.entry(key) {
                v.insert(graph.add_node(key));
                queue.push_back(key);
            }
        }
        while let Some((s, pending)) = queue.pop_front() {
            let owed = pending | self.enabled[s as usize];
            if owed == 0 {
                return (true, graph.node_count());
            }
            let from = index[&(s, pending)];
            for e in lts.out(s) {
                if forbidden(&lts.label(e.label)) {
                    continue;
                }
                let key = (e.target, owed & !self.kills[e.label as usize]);
                let to = *index.entry(key).or_insert_with(|| {
                    queue.push_back(key);
                    graph.add_node(key)
                });
                graph.add_edge(from, to, ());
            }
        }
        let found = tarjan_scc(&graph).into_iter().any(|scc| {
            let cyclic = scc.len() > 1 || graph.contains_edge(scc[0], scc[0]);
            cyclic && scc.iter().fold(Mask::MAX, |acc, &n| acc & graph[n].1) == 0
        });
        (found, graph.node_count())
    }
}

/// Decides a liveness property by exhaustive search; models above `bound`
/// states are rejected.
pub fn brute_force_liveness(
    m: &Model,
    property: Property,
    mode: ConcurrencyMode,
    blockables: &BlockableSet,
    bound: usize,
) -> Result<Verdict> {
    if m.num_states() > bound {
        return Err(Error::TooLarge { states: m.num_states(), bound });
    }
    let started = Instant::now();
    let oracle = Oracle::new(m, mode, blockables)?;
    let lts = m.lts();
    let mut explored = 0;
    let mut violated = false;
    for t in 0..m.threads() as ThreadId {
        let nc = ActionLabel::noncrit(t);
        let entered: Vec<StateId> = lts
            .transitions()
            .filter(|(_, e)| lts.label(e.label) == nc)
            .map(|(_, e)| e.target)
            .collect();
        let (found, n) = match property {
            Property::DeadlockFreedom => {
                let starts = forward(m, &entered, |a| *a == ActionLabel::crit(t));
                oracle.just_path_exists(&starts, |a| a.is_crit())
            }
            Property::StarvationFreedom => oracle.just_path_exists(&entered, |a| *a == ActionLabel::crit(t)),
            Property::MutualExclusion => return Err(Error::Config("mutual exclusion is not a liveness property".into())),
        };
        explored += n;
        if found {
            violated = true;
            break;
        }
    }
    Ok(Verdict {
        property,
        holds: !violated,
        witness: None,
        stats: Stats { states: m.num_states(), transitions: lts.num_transitions(), iterations: explored, millis: started.elapsed().as_millis() as u64 },
    })
}

fn forward(m: &Model, from: &[StateId], forbidden: impl Fn(&ActionLabel) -> bool) -> Vec<StateId> {
    let lts = m.lts();
    let mut seen = vec![false; lts.num_states()];
    let mut stack: Vec<StateId> = Vec::new();
    for &s in from {
        if !std::mem::replace(&mut seen[s as usize], true) {
            stack.push(s);
        }
    }
    let mut out = Vec::new();
    while let Some(s) = stack.pop() {
        out.push(s);
        for e in lts.out(s) {
            if !forbidden(&lts.label(e.label)) && !std::mem::replace(&mut seen[e.target as usize], true) {
                stack.push(e.target);
            }
        }
    }
    out.sort_unstable();
    out
}
