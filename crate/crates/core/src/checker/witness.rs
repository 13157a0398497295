use std::collections::HashMap;

use fixedbitset::FixedBitSet;

use super::fixpoint::{hops, Classes, Fixpoint, Hops};
use super::model::Model;
use crate::error::{Error, Result};
use crate::interference::BlockableSet;
use crate::lts::{Lasso, LabelId, Path, StateId};

/// Extends `lead_in`, which must end inside the fixpoint, into a just
/// lasso that avoids the fixpoint's response labels after `lead_in`.
///
/// The construction tracks the classes owed an interferer: every state
/// adds the classes it requires, every step clears those it interferes
/// with. A round-robin pointer picks the next owed class and the recorded
/// next hops discharge it. In a thread-consistent model owed classes stay
/// required until discharged, but blocking registers can disable an action
/// without interference, so the debt is kept explicitly. A repeated
/// (state, debt, pointer) triple closes the cycle; a full round with
/// nothing owed means the path may stop there.
pub fn extract_lasso_witness(m: &Model, fp: &Fixpoint, blockables: &BlockableSet, lead_in: Path) -> Result<Lasso> {
    let lts = m.lts();
    let entry = lead_in.end();
    m.check_state(entry)?;
    if !fp.contains(entry) {
        return Err(Error::Witness(format!("entry state {entry} is outside the fixpoint")));
    }
    let cl = Classes::new(lts.alphabet(), fp.mode, blockables);
    let k = cl.classes.len();
    if k == 0 {
        return Ok(Lasso { prefix: lead_in, cycle: Vec::new() });
    }
    let mut required = Vec::new();
    let mut owed = FixedBitSet::with_capacity(k);
    let owe = |s: StateId, owed: &mut FixedBitSet, required: &mut Vec<u32>| {
        cl.required(lts, s, required);
        required.iter().for_each(|&c| owed.insert(c as usize));
    };
    let pay = |l: LabelId, owed: &mut FixedBitSet| {
        let bases = &cl.label_bases[l as usize];
        for c in 0..k {
            if owed.contains(c) && cl.class_bases[c].iter().any(|b| bases.contains(b)) {
                owed.set(c, false);
            }
        }
    };
    let mut at = lead_in.start;
    for &(l, t) in &lead_in.steps {
        owe(at, &mut owed, &mut required);
        pay(l, &mut owed);
        at = t;
    }

    let rev = lts.reverse();
    let mut cache: HashMap<u32, Hops> = HashMap::new();
    let mut steps: Vec<(LabelId, StateId)> = Vec::new();
    let mut seen: HashMap<(StateId, FixedBitSet, usize), usize> = HashMap::new();
    let (mut s, mut p) = (entry, 0usize);

    let split = loop {
        owe(s, &mut owed, &mut required);
        let key = (s, owed.clone(), p);
        if let Some(&i) = seen.get(&key) {
            break i;
        }
        seen.insert(key, steps.len());
        if owed.contains(p) {
            let mut chosen = None;
            for &b in &cl.class_bases[p] {
                let h = cache.entry(b).or_insert_with(|| hops(lts, &rev, &cl, b, fp));
                if h.reach.contains(s as usize) {
                    chosen = Some(b);
                    break;
                }
            }
            let b = chosen.ok_or_else(|| Error::Witness(format!("state {s} has no discharge for class {p}")))?;
            let h = &cache[&b];
            loop {
                let e = lts.edge(h.next[s as usize] as usize);
                let last = h.seed.contains(s as usize);
                pay(e.label, &mut owed);
                steps.push((e.label, e.target));
                s = e.target;
                if last {
                    break;
                }
                owe(s, &mut owed, &mut required);
            }
            if !fp.contains(s) {
                return Err(Error::Witness(format!("discharge for class {p} leaves the fixpoint at {s}")));
            }
        }
        p = (p + 1) % k;
    };

    let mut prefix = lead_in;
    prefix.steps.extend_from_slice(&steps[..split]);
    Ok(Lasso { prefix, cycle: steps[split..].to_vec() })
}
