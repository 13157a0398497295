//! Over-approximation of the liveness fixpoint by SCC refinement.
//!
//! The tail of an infinite just path stays inside one strongly connected
//! piece of the response-free graph in which every class required at a
//! visited state has an interferer on an internal edge. Repeatedly
//! splitting components and dropping states whose requirements cannot be
//! met locally finds every such piece. Any state with a response-free path
//! to one, or to a state requiring nothing, is a candidate. Candidates
//! contain the true fixpoint, so the exact iteration can start from them.

use fixedbitset::FixedBitSet;

use super::fixpoint::Classes;
use super::model::backward_closure;
use crate::error::Result;
use crate::lts::{Limits, Lts, Reverse, StateId};

const UNSEEN: u32 = u32::MAX;

/// Reusable buffers for iterative Tarjan over subsets of the states.
struct Tarjan {
    index: Vec<u32>,
    low: Vec<u32>,
    on_stack: FixedBitSet,
    stack: Vec<StateId>,
    calls: Vec<(StateId, usize)>,
    counter: u32,
}

impl Tarjan {
    fn new(n: usize) -> Self {
        Self {
            index: vec![UNSEEN; n],
            low: vec![0; n],
            on_stack: FixedBitSet::with_capacity(n),
            stack: Vec::new(),
            calls: Vec::new(),
            counter: 0,
        }
    }

    /// Components of the subgraph induced by `roots`, where `edge(s, e)`
    /// decides which out-edges count. Indices of `roots` are reset on
    /// return so the buffers can be reused.
    fn run(
        &mut self,
        lts: &Lts,
        roots: &[StateId],
        edge: impl Fn(StateId, &crate::lts::Edge) -> bool,
    ) -> Vec<Vec<StateId>> {
        let mut out = Vec::new();
        self.counter = 0;
        for &root in roots {
            if self.index[root as usize] != UNSEEN {
                continue;
            }
            self.open(root);
            while let Some(&(s, start)) = self.calls.last() {
                let edges = lts.out(s);
                let mut pos = start;
                let mut child = None;
                while pos < edges.len() {
                    let e = edges[pos];
                    pos += 1;
                    if !edge(s, &e) {
                        continue;
                    }
                    let t = e.target as usize;
                    if self.index[t] == UNSEEN {
                        child = Some(e.target);
                        break;
                    } else if self.on_stack.contains(t) {
                        self.low[s as usize] = self.low[s as usize].min(self.index[t]);
                    }
                }
                if let Some(c) = child {
                    self.calls.last_mut().expect("frame").1 = pos;
                    self.open(c);
                    continue;
                }
                self.calls.pop();
                if let Some(&(p, _)) = self.calls.last() {
                    self.low[p as usize] = self.low[p as usize].min(self.low[s as usize]);
                }
                if self.low[s as usize] == self.index[s as usize] {
                    let mut comp = Vec::new();
                    loop {
                        let x = self.stack.pop().expect("tarjan stack holds the component");
                        self.on_stack.set(x as usize, false);
                        comp.push(x);
                        if x == s {
                            break;
                        }
                    }
                    out.push(comp);
                }
            }
        }
        for &r in roots {
            self.index[r as usize] = UNSEEN;
        }
        out
    }

    fn open(&mut self, s: StateId) {
        self.index[s as usize] = self.counter;
        self.low[s as usize] = self.counter;
        self.counter += 1;
        self.stack.push(s);
        self.on_stack.insert(s as usize);
        self.calls.push((s, 0));
    }
}

/// A superset of the fixpoint for `response`, found by SCC refinement.
pub(crate) fn candidates(
    lts: &Lts,
    rev: &Reverse,
    cl: &Classes,
    response: &FixedBitSet,
    limits: &Limits,
) -> Result<FixedBitSet> {
    let n = lts.num_states();
    let mut tarjan = Tarjan::new(n);
    let mut comp = vec![0u32; n];
    let mut next_id = 1u32;
    let mut alive = FixedBitSet::with_capacity(n);
    alive.insert_range(..);
    let mut seeds = FixedBitSet::with_capacity(n);
    let mut required = Vec::new();

    // States requiring nothing end a finite just path.
    for s in 0..n as StateId {
        cl.required(lts, s, &mut required);
        if required.is_empty() {
            seeds.insert(s as usize);
        }
    }

    let all: Vec<StateId> = (0..n as StateId).collect();
    let mut work = tarjan.run(lts, &all, |_, e| !response.contains(e.label as usize));
    let mut present = vec![false; cl.bases.len()];
    let mut rounds = 0u64;
    while let Some(scc) = work.pop() {
        rounds += 1;
        if rounds.is_multiple_of(4096) {
            limits.check(n as u64, 0)?;
        }
        let id = next_id;
        next_id += 1;
        for &s in &scc {
            comp[s as usize] = id;
        }
        present.iter_mut().for_each(|p| *p = false);
        let mut internal = false;
        for &s in &scc {
            for e in lts.out(s) {
                let t = e.target as usize;
                if comp[t] == id && alive.contains(t) && !response.contains(e.label as usize) {
                    internal = true;
                    for &b in &cl.label_bases[e.label as usize] {
                        present[b as usize] = true;
                    }
                }
            }
        }
        if !internal {
            continue;
        }
        let mut rest = Vec::with_capacity(scc.len());
        for &s in &scc {
            cl.required(lts, s, &mut required);
            let ok = required
                .iter()
                .all(|&c| cl.class_bases[c as usize].iter().any(|&b| present[b as usize]));
            if ok {
                rest.push(s);
            } else {
                alive.set(s as usize, false);
            }
        }
        if rest.len() == scc.len() {
            for &s in &scc {
                seeds.insert(s as usize);
            }
            continue;
        }
        let split = tarjan.run(lts, &rest, |_, e| {
            let t = e.target as usize;
            comp[t] == id && alive.contains(t) && !response.contains(e.label as usize)
        });
        work.extend(split);
    }
    Ok(backward_closure(rev, &seeds, |l| !response.contains(l as usize)))
}
