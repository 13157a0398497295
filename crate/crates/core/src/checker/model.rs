use std::collections::VecDeque;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::lts::{compose_parallel_with, LabelId, Limits, Lts, Path, RegisterId, StateId};
use crate::registers::{blocking_variant_lts, register_lts, RegisterConfig, RegisterKind};
use crate::threads::{compile_thread, AlgorithmSpec};

/// A thread-register model: the reachable product of thread and register
/// LTSs. Components `0..threads` are the threads, the rest the registers.
#[derive(Debug, Clone)]
pub struct Model {
    lts: Lts,
    threads: usize,
    register_names: Vec<String>,
}

impl Model {
    /// Compiles and composes an algorithm over registers of one kind.
    pub fn build(spec: &AlgorithmSpec, kind: RegisterKind, limits: &Limits) -> Result<Self> {
        let table = spec.table()?;
        let threads = spec
            .programs
            .iter()
            .map(|p| compile_thread(p, &table))
            .collect::<Result<Vec<_>>>()?;
        Self::compose(threads, &table.configs(kind), limits)
    }

    /// Composes thread LTSs with one register per config; register `r` is
    /// `configs[r]`.
    pub fn compose(threads: Vec<Lts>, configs: &[RegisterConfig], limits: &Limits) -> Result<Self> {
        let n = threads.len();
        let registers = configs
            .iter()
            .enumerate()
            .map(|(r, c)| {
                let r = r as RegisterId;
                if c.kind.is_blocking() {
                    blocking_variant_lts(c, r, n)
                } else {
                    register_lts(c, r, n)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let parts: Vec<&Lts> = threads.iter().chain(registers.iter()).collect();
        let lts = compose_parallel_with(&parts, limits)?;
        Ok(Self { lts, threads: n, register_names: configs.iter().map(|c| c.id.clone()).collect() })
    }

    /// Wraps a hand-built LTS.
    pub fn from_lts(lts: Lts, threads: usize, register_names: Vec<String>) -> Self {
        Self { lts, threads, register_names }
    }

    pub fn lts(&self) -> &Lts {
        &self.lts
    }

    pub fn threads(&self) -> usize {
        self.threads
    }

    pub fn register_names(&self) -> &[String] {
        &self.register_names
    }

    pub fn num_states(&self) -> usize {
        self.lts.num_states()
    }

    /// Labels satisfying `pred`, as a bitset over label ids.
    pub fn label_mask(&self, pred: impl Fn(&crate::lts::ActionLabel) -> bool) -> FixedBitSet {
        let a = self.lts.alphabet();
        let mut m = FixedBitSet::with_capacity(a.len());
        for (i, l) in a.iter().enumerate() {
            m.set(i, pred(l));
        }
        m
    }

    /// Shortest path from `from` to a state in `targets`, using only edges
    /// whose label is allowed.
    pub fn shortest_path(
        &self,
        from: StateId,
        targets: &FixedBitSet,
        allowed: impl Fn(LabelId) -> bool,
    ) -> Option<Path> {
        let n = self.lts.num_states();
        let mut parent: Vec<Option<(StateId, LabelId)>> = vec![None; n];
        let mut seen = FixedBitSet::with_capacity(n);
        let mut queue = VecDeque::from([from]);
        seen.insert(from as usize);
        while let Some(s) = queue.pop_front() {
            if targets.contains(s as usize) {
                let mut steps = Vec::new();
                let mut cur = s;
                while let Some((p, l)) = parent[cur as usize] {
                    steps.push((l, cur));
                    cur = p;
                }
                steps.reverse();
                return Some(Path { start: from, steps });
            }
            for e in self.lts.out(s) {
                if allowed(e.label) && !seen.put(e.target as usize) {
                    parent[e.target as usize] = Some((s, e.label));
                    queue.push_back(e.target);
                }
            }
        }
        None
    }

    /// Shortest path from the initial state.
    pub fn path_from_initial(&self, targets: &FixedBitSet) -> Option<Path> {
        self.shortest_path(self.lts.initial(), targets, |_| true)
    }

    pub(crate) fn single(&self, s: StateId) -> FixedBitSet {
        let mut b = FixedBitSet::with_capacity(self.num_states());
        b.insert(s as usize);
        b
    }

    pub(crate) fn check_state(&self, s: StateId) -> Result<()> {
        if self.lts.contains_state(s) {
            Ok(())
        } else {
            Err(Error::UnknownState(s))
        }
    }
}

/// Backward closure of `seeds` along edges whose label is allowed.
pub(crate) fn backward_closure(
    rev: &crate::lts::Reverse,
    seeds: &FixedBitSet,
    allowed: impl Fn(LabelId) -> bool,
) -> FixedBitSet {
    let mut set = seeds.clone();
    let mut stack: Vec<StateId> = seeds.ones().map(|s| s as StateId).collect();
    while let Some(s) = stack.pop() {
        for &(l, p) in rev.preds(s) {
            if allowed(l) && !set.put(p as usize) {
                stack.push(p);
            }
        }
    }
    set
}
