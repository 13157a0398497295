use std::hash::BuildHasher;

use hashbrown::HashTable;
use rustc_hash::FxBuildHasher;

use super::{ActionLabel, Edge, LabelId, Limits, Lts, StateId, StateVectors};
use crate::error::{Error, Result};

/// Parallel composition with synchronisation on shared actions, using the
/// default exploration limits.
pub fn compose_parallel(components: &[&Lts]) -> Result<Lts> {
    compose_parallel_with(components, &Limits::default())
}

/// Breadth-first construction of the reachable part of the product. An
/// action fires only if every component whose alphabet contains it can
/// take it simultaneously; other components stay put.
pub fn compose_parallel_with(components: &[&Lts], limits: &Limits) -> Result<Lts> {
    if components.is_empty() {
        return Err(Error::NoComponents);
    }
    let k = components.len();

    let mut alphabet: Vec<ActionLabel> =
        components.iter().flat_map(|c| c.alphabet().iter().copied()).collect();
    alphabet.sort_unstable();
    alphabet.dedup();

    let to_global: Vec<Vec<LabelId>> = components
        .iter()
        .map(|c| {
            c.alphabet()
                .iter()
                .map(|l| alphabet.binary_search(l).unwrap() as LabelId)
                .collect()
        })
        .collect();
    let mut to_local: Vec<Vec<Option<LabelId>>> = vec![vec![None; alphabet.len()]; k];
    let mut participants: Vec<Vec<usize>> = vec![Vec::new(); alphabet.len()];
    for (c, map) in to_global.iter().enumerate() {
        for (local, &g) in map.iter().enumerate() {
            to_local[c][g as usize] = Some(local as LabelId);
            participants[g as usize].push(c);
        }
    }

    let sizes: Vec<usize> = components.iter().map(|c| c.num_states()).collect();
    let mut vectors = StateVectors::new(&sizes);
    let words = vectors.words();
    let hasher = FxBuildHasher;
    let mut table: HashTable<StateId> = HashTable::new();
    let mut count: u32 = 0;

    let mut intern = |vectors: &mut StateVectors, packed: &[u64], count: &mut u32| -> StateId {
        let h = hasher.hash_one(packed);
        if let Some(&id) = table.find(h, |&id| vectors.packed(id) == packed) {
            return id;
        }
        let id = *count;
        *count += 1;
        vectors.push(packed);
        table.insert_unique(h, id, |&id| hasher.hash_one(vectors.packed(id)));
        id
    };

    let init: Vec<u32> = components.iter().map(|c| c.initial()).collect();
    let mut packed = vec![0u64; words];
    vectors.pack(&init, &mut packed);
    let initial = intern(&mut vectors, &packed, &mut count);

    let mut offsets = vec![0usize];
    let mut edges: Vec<Edge> = Vec::new();
    let mut current = Vec::with_capacity(k);
    let mut next = vec![0u32; k];
    let mut local_edges: Vec<Edge> = Vec::new();
    let mut choices: Vec<&[Edge]> = Vec::new();
    let mut odometer: Vec<usize> = Vec::new();

    let mut s: StateId = 0;
    while s < count {
        if s.is_multiple_of(1024) {
            limits.check(count as u64, edges.len() as u64)?;
        }
        let src = vectors.packed(s).to_vec();
        vectors.unpack(&src, &mut current);
        local_edges.clear();

        for c in 0..k {
            for e in components[c].out(current[c]) {
                let g = to_global[c][e.label as usize];
                let parts = &participants[g as usize];
                if parts[0] != c {
                    continue;
                }
                choices.clear();
                let mut blocked = false;
                for &p in &parts[1..] {
                    let local = to_local[p][g as usize].unwrap();
                    let es = components[p].out_with_label(current[p], local);
                    if es.is_empty() {
                        blocked = true;
                        break;
                    }
                    choices.push(es);
                }
                if blocked {
                    continue;
                }
                odometer.clear();
                odometer.resize(choices.len(), 0);
                loop {
                    next.copy_from_slice(&current);
                    next[c] = e.target;
                    for (i, &p) in parts[1..].iter().enumerate() {
                        next[p] = choices[i][odometer[i]].target;
                    }
                    vectors.pack(&next, &mut packed);
                    let t = intern(&mut vectors, &packed, &mut count);
                    local_edges.push(Edge { label: g, target: t });

                    let mut i = 0;
                    while i < odometer.len() {
                        odometer[i] += 1;
                        if odometer[i] < choices[i].len() {
                            break;
                        }
                        odometer[i] = 0;
                        i += 1;
                    }
                    if i == odometer.len() {
                        break;
                    }
                }
            }
        }
        local_edges.sort_unstable();
        local_edges.dedup();
        edges.extend_from_slice(&local_edges);
        offsets.push(edges.len());
        s += 1;
    }
    limits.check(count as u64, edges.len() as u64)?;

    Ok(Lts::from_parts(alphabet, initial, offsets, edges, Some(vectors)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lts::LtsBuilder;

    fn single(label: ActionLabel) -> Lts {
        let mut b = LtsBuilder::new([label]);
        let s0 = b.add_state();
        let s1 = b.add_state();
        b.add_transition(s0, label, s1).unwrap();
        b.build().unwrap()
    }

    #[test]
    fn disjoint_alphabets_interleave() {
        let a = single(ActionLabel::crit(0));
        let b = single(ActionLabel::crit(1));
        let p = compose_parallel(&[&a, &b]).unwrap();
        assert_eq!(p.num_states(), 4);
        assert_eq!(p.num_transitions(), 4);
        let ab: Vec<_> = p.enabled_in(p.initial()).unwrap();
        assert_eq!(ab, vec![ActionLabel::crit(0), ActionLabel::crit(1)]);
    }

    #[test]
    fn shared_action_needs_every_participant() {
        let a = single(ActionLabel::start_read(0, 0));
        let mut b = LtsBuilder::new([ActionLabel::start_read(0, 0), ActionLabel::crit(1)]);
        let s0 = b.add_state();
        let s1 = b.add_state();
        b.add_transition(s0, ActionLabel::crit(1), s1).unwrap();
        b.add_transition(s1, ActionLabel::start_read(0, 0), s0).unwrap();
        let b = b.build().unwrap();
        let p = compose_parallel(&[&a, &b]).unwrap();
        assert_eq!(p.enabled_in(p.initial()).unwrap(), vec![ActionLabel::crit(1)]);
        let (_, e) = p.transitions().next().unwrap();
        assert_eq!(p.enabled_in(e.target).unwrap(), vec![ActionLabel::start_read(0, 0)]);
    }

    #[test]
    fn nondeterministic_partners_multiply() {
        let l = ActionLabel::start_write(0, 0, 1);
        let a = single(l);
        let mut b = LtsBuilder::new([l]);
        let s0 = b.add_state();
        let s1 = b.add_state();
        let s2 = b.add_state();
        b.add_transition(s0, l, s1).unwrap();
        b.add_transition(s0, l, s2).unwrap();
        let b = b.build().unwrap();
        let p = compose_parallel(&[&a, &b]).unwrap();
        assert_eq!(p.num_states(), 3);
        assert_eq!(p.out(p.initial()).len(), 2);
        let tgt = p.out(p.initial())[1].target;
        assert_eq!(p.state_vector(tgt).unwrap().len(), 2);
    }

    #[test]
    fn cap_is_reported() {
        let a = single(ActionLabel::crit(0));
        let b = single(ActionLabel::crit(1));
        let limits = Limits { max_transitions: 1, ..Limits::default() };
        assert!(matches!(
            compose_parallel_with(&[&a, &b], &limits),
            Err(Error::CapExceeded { .. })
        ));
    }
}
