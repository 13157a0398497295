//! Labelled transition systems in compressed adjacency form.

mod compose;
mod label;
mod lasso;

use std::fmt::Write as _;
use std::time::Instant;

pub use compose::{compose_parallel, compose_parallel_with};
pub use label::{ActionKind, ActionLabel, LabelDisplay, RegisterId, ThreadId, Value};
pub use lasso::{Lasso, Path};

use crate::error::{Error, Result};

pub type StateId = u32;
pub type LabelId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub label: LabelId,
    pub target: StateId,
}

/// Exploration budget shared by every state-space construction.
#[derive(Debug, Clone)]
pub struct Limits {
    pub max_transitions: u64,
    pub max_states: Option<u64>,
    pub deadline: Option<Instant>,
}

impl Default for Limits {
    fn default() -> Self {
        Self { max_transitions: 100_000_000, max_states: None, deadline: None }
    }
}

impl Limits {
    pub(crate) fn check(&self, states: u64, transitions: u64) -> Result<()> {
        if transitions > self.max_transitions || self.max_states.is_some_and(|m| states > m) {
            return Err(Error::CapExceeded { states, transitions });
        }
        if self.deadline.is_some_and(|d| Instant::now() >= d) {
            return Err(Error::Timeout { states });
        }
        Ok(())
    }
}

/// Bit-packed component vectors of product states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct StateVectors {
    fields: Vec<(usize, u32, u32)>,
    words: usize,
    data: Vec<u64>,
}

impl StateVectors {
    pub(crate) fn new(sizes: &[usize]) -> Self {
        let mut fields = Vec::with_capacity(sizes.len());
        let (mut word, mut used) = (0usize, 0u32);
        for &n in sizes {
            let width = (usize::BITS - n.saturating_sub(1).leading_zeros()).max(1);
            if used + width > 64 {
                word += 1;
                used = 0;
            }
            fields.push((word, used, width));
            used += width;
        }
        Self { fields, words: word + 1, data: Vec::new() }
    }

    pub(crate) fn words(&self) -> usize {
        self.words
    }

    pub(crate) fn pack(&self, v: &[u32], out: &mut [u64]) {
        out.iter_mut().for_each(|w| *w = 0);
        for (&(word, shift, _), &x) in self.fields.iter().zip(v) {
            out[word] |= (x as u64) << shift;
        }
    }

    pub(crate) fn unpack(&self, packed: &[u64], out: &mut Vec<u32>) {
        out.clear();
        for &(word, shift, width) in &self.fields {
            let mask = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
            out.push(((packed[word] >> shift) & mask) as u32);
        }
    }

    pub(crate) fn push(&mut self, packed: &[u64]) {
        self.data.extend_from_slice(packed);
    }

    pub(crate) fn packed(&self, s: StateId) -> &[u64] {
        let w = self.words;
        &self.data[s as usize * w..(s as usize + 1) * w]
    }

    fn component(&self, s: StateId, c: usize) -> u32 {
        let (word, shift, width) = self.fields[c];
        let mask = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
        ((self.packed(s)[word] >> shift) & mask) as u32
    }
}

/// A finite LTS. States are `0..num_states()`, labels index into the
/// sorted alphabet, and each state's outgoing edges are sorted by label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lts {
    alphabet: Vec<ActionLabel>,
    initial: StateId,
    offsets: Vec<usize>,
    edges: Vec<Edge>,
    vectors: Option<StateVectors>,
}

impl Lts {
    pub(crate) fn from_parts(
        alphabet: Vec<ActionLabel>,
        initial: StateId,
        offsets: Vec<usize>,
        edges: Vec<Edge>,
        vectors: Option<StateVectors>,
    ) -> Self {
        Self { alphabet, initial, offsets, edges, vectors }
    }

    pub fn num_states(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_transitions(&self) -> usize {
        self.edges.len()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn alphabet(&self) -> &[ActionLabel] {
        &self.alphabet
    }

    pub fn label(&self, id: LabelId) -> ActionLabel {
        self.alphabet[id as usize]
    }

    pub fn label_id(&self, l: &ActionLabel) -> Option<LabelId> {
        self.alphabet.binary_search(l).ok().map(|i| i as LabelId)
    }

    pub fn contains_state(&self, s: StateId) -> bool {
        (s as usize) < self.num_states()
    }

    /// Outgoing edges of `s`, sorted by label then target.
    pub fn out(&self, s: StateId) -> &[Edge] {
        &self.edges[self.offsets[s as usize]..self.offsets[s as usize + 1]]
    }

    /// Global index of the first outgoing edge of `s`.
    pub fn edge_offset(&self, s: StateId) -> usize {
        self.offsets[s as usize]
    }

    pub fn edge(&self, index: usize) -> Edge {
        self.edges[index]
    }

    pub fn out_with_label(&self, s: StateId, label: LabelId) -> &[Edge] {
        let out = self.out(s);
        let lo = out.partition_point(|e| e.label < label);
        let hi = lo + out[lo..].partition_point(|e| e.label == label);
        &out[lo..hi]
    }

    /// Distinct label ids enabled at `s`, ascending.
    pub fn enabled_ids(&self, s: StateId) -> impl Iterator<Item = LabelId> + '_ {
        let out = self.out(s);
        out.iter()
            .enumerate()
            .filter(move |(i, e)| *i == 0 || out[i - 1].label != e.label)
            .map(|(_, e)| e.label)
    }

    pub fn enabled_in(&self, s: StateId) -> Result<Vec<ActionLabel>> {
        if !self.contains_state(s) {
            return Err(Error::UnknownState(s));
        }
        Ok(self.enabled_ids(s).map(|l| self.label(l)).collect())
    }

    pub fn is_enabled(&self, s: StateId, label: LabelId) -> bool {
        !self.out_with_label(s, label).is_empty()
    }

    pub fn has_transition(&self, s: StateId, label: LabelId, t: StateId) -> bool {
        self.out_with_label(s, label).iter().any(|e| e.target == t)
    }

    pub fn transitions(&self) -> impl Iterator<Item = (StateId, Edge)> + '_ {
        (0..self.num_states() as StateId).flat_map(move |s| self.out(s).iter().map(move |e| (s, *e)))
    }

    /// Number of components for a product LTS, `None` for a plain one.
    pub fn num_components(&self) -> Option<usize> {
        self.vectors.as_ref().map(|v| v.fields.len())
    }

    pub fn component_state(&self, s: StateId, component: usize) -> Option<u32> {
        self.vectors.as_ref().map(|v| v.component(s, component))
    }

    pub fn state_vector(&self, s: StateId) -> Option<Vec<u32>> {
        self.vectors.as_ref().map(|v| {
            let mut out = Vec::new();
            v.unpack(v.packed(s), &mut out);
            out
        })
    }

    /// Predecessor lists, grouped per target state.
    pub fn reverse(&self) -> Reverse {
        let n = self.num_states();
        let mut counts = vec![0usize; n + 1];
        for e in &self.edges {
            counts[e.target as usize + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut preds = vec![(0u32, 0u32); self.edges.len()];
        for s in 0..n {
            for e in self.out(s as StateId) {
                let slot = &mut fill[e.target as usize];
                preds[*slot] = (e.label, s as StateId);
                *slot += 1;
            }
        }
        Reverse { offsets: counts, preds }
    }

    /// One line per transition: `<state> <label> <state>`.
    pub fn dump_edges(&self, register_names: &[String]) -> String {
        let mut out = String::new();
        for (s, e) in self.transitions() {
            let _ = writeln!(out, "{s} {} {}", self.label(e.label).display(register_names), e.target);
        }
        out
    }
}

/// Reverse adjacency: `(label, source)` pairs per target state.
#[derive(Debug, Clone)]
pub struct Reverse {
    offsets: Vec<usize>,
    preds: Vec<(LabelId, StateId)>,
}

impl Reverse {
    pub fn preds(&self, s: StateId) -> &[(LabelId, StateId)] {
        &self.preds[self.offsets[s as usize]..self.offsets[s as usize + 1]]
    }
}

/// Incremental construction of an explicit LTS over a fixed alphabet.
#[derive(Debug, Clone)]
pub struct LtsBuilder {
    alphabet: Vec<ActionLabel>,
    out: Vec<Vec<Edge>>,
    initial: StateId,
}

impl LtsBuilder {
    pub fn new(alphabet: impl IntoIterator<Item = ActionLabel>) -> Self {
        let mut alphabet: Vec<ActionLabel> = alphabet.into_iter().collect();
        alphabet.sort_unstable();
        alphabet.dedup();
        Self { alphabet, out: Vec::new(), initial: 0 }
    }

    pub fn add_state(&mut self) -> StateId {
        self.out.push(Vec::new());
        (self.out.len() - 1) as StateId
    }

    pub fn num_states(&self) -> usize {
        self.out.len()
    }

    pub fn set_initial(&mut self, s: StateId) {
        self.initial = s;
    }

    pub fn add_transition(&mut self, from: StateId, label: ActionLabel, to: StateId) -> Result<()> {
        let id = self
            .alphabet
            .binary_search(&label)
            .map_err(|_| Error::LabelNotInAlphabet(label.to_string()))?;
        let n = self.out.len() as StateId;
        if from >= n {
            return Err(Error::UnknownState(from));
        }
        if to >= n {
            return Err(Error::UnknownState(to));
        }
        self.out[from as usize].push(Edge { label: id as LabelId, target: to });
        Ok(())
    }

    pub fn build(self) -> Result<Lts> {
        if self.out.is_empty() || self.initial as usize >= self.out.len() {
            return Err(Error::UnknownState(self.initial));
        }
        let mut offsets = Vec::with_capacity(self.out.len() + 1);
        let mut edges = Vec::new();
        offsets.push(0);
        for mut es in self.out {
            es.sort_unstable();
            es.dedup();
            edges.extend(es);
            offsets.push(edges.len());
        }
        Ok(Lts { alphabet: self.alphabet, initial: self.initial, offsets, edges, vectors: None })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_step() -> Lts {
        let (a, b) = (ActionLabel::crit(0), ActionLabel::noncrit(0));
        let mut bld = LtsBuilder::new([a, b]);
        let s0 = bld.add_state();
        let s1 = bld.add_state();
        let s2 = bld.add_state();
        bld.add_transition(s0, b, s1).unwrap();
        bld.add_transition(s1, a, s0).unwrap();
        bld.add_transition(s1, a, s2).unwrap();
        bld.build().unwrap()
    }

    #[test]
    fn enabled_in_reports_exact_labels() {
        let l = two_step();
        assert_eq!(l.enabled_in(0).unwrap(), vec![ActionLabel::noncrit(0)]);
        assert_eq!(l.enabled_in(1).unwrap(), vec![ActionLabel::crit(0)]);
        assert!(l.enabled_in(2).unwrap().is_empty());
        assert_eq!(l.enabled_in(9), Err(Error::UnknownState(9)));
    }

    #[test]
    fn builder_rejects_foreign_labels() {
        let mut bld = LtsBuilder::new([ActionLabel::crit(0)]);
        let s = bld.add_state();
        assert!(bld.add_transition(s, ActionLabel::crit(1), s).is_err());
    }

    #[test]
    fn dump_lists_every_transition() {
        let l = two_step();
        let d = l.dump_edges(&[]);
        assert_eq!(d.lines().count(), 3);
        assert!(d.contains("0 noncrit(t=0) 1"));
        assert!(d.contains("1 crit(t=0) 2"));
    }

    #[test]
    fn reverse_matches_forward() {
        let l = two_step();
        let r = l.reverse();
        let mut back: Vec<_> = (0..3).flat_map(|t| r.preds(t).iter().map(move |&(lb, s)| (s, lb, t))).collect();
        let mut fwd: Vec<_> = l.transitions().map(|(s, e)| (s, e.label, e.target)).collect();
        back.sort();
        fwd.sort();
        assert_eq!(back, fwd);
    }

    #[test]
    fn packing_round_trips() {
        let sv = StateVectors::new(&[1, 2, 300, 1 << 20, 5, 1 << 31]);
        let v = vec![0, 1, 299, (1 << 20) - 1, 4, 12345];
        let mut packed = vec![0; sv.words()];
        sv.pack(&v, &mut packed);
        let mut out = Vec::new();
        sv.unpack(&packed, &mut out);
        assert_eq!(out, v);
    }
}
