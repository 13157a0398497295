use std::collections::BTreeSet;
use std::fmt;

use crate::lts::{ThreadId, Value};

/// A set of thread ids, one bit per thread.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ThreadSet(u32);

impl ThreadSet {
    pub const EMPTY: ThreadSet = ThreadSet(0);

    pub fn contains(self, t: ThreadId) -> bool {
        self.0 >> t & 1 == 1
    }
    pub fn with(self, t: ThreadId) -> Self {
        ThreadSet(self.0 | 1 << t)
    }
    pub fn without(self, t: ThreadId) -> Self {
        ThreadSet(self.0 & !(1 << t))
    }
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }
    pub fn union(self, o: Self) -> Self {
        ThreadSet(self.0 | o.0)
    }
    pub fn intersection(self, o: Self) -> Self {
        ThreadSet(self.0 & o.0)
    }
    pub fn difference(self, o: Self) -> Self {
        ThreadSet(self.0 & !o.0)
    }
    pub fn iter(self) -> impl Iterator<Item = ThreadId> {
        (0..32u8).filter(move |&t| self.contains(t))
    }
}

impl FromIterator<ThreadId> for ThreadSet {
    fn from_iter<I: IntoIterator<Item = ThreadId>>(iter: I) -> Self {
        iter.into_iter().fold(ThreadSet::EMPTY, ThreadSet::with)
    }
}

impl fmt::Debug for ThreadSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// The finite memory of one register.
///
/// `rds`/`wrts` hold threads with a read/write in progress, `pend` those
/// whose operation has not yet taken effect, `rec` a per-thread recorded
/// value (the value being written, or the value a read will return),
/// `ovrl` whether the thread's operation has overlapped a write, and `posv`
/// the values a regular read may still return.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RegisterStatus {
    pub stor: Value,
    pub rds: ThreadSet,
    pub wrts: ThreadSet,
    pub pend: ThreadSet,
    pub rec: Vec<Value>,
    pub ovrl: ThreadSet,
    pub posv: Vec<BTreeSet<Value>>,
}

impl RegisterStatus {
    pub fn initial(init: Value, threads: usize) -> Self {
        Self {
            stor: init,
            rds: ThreadSet::EMPTY,
            wrts: ThreadSet::EMPTY,
            pend: ThreadSet::EMPTY,
            rec: vec![init; threads],
            ovrl: ThreadSet::EMPTY,
            posv: vec![BTreeSet::new(); threads],
        }
    }

    pub fn threads(&self) -> usize {
        self.rec.len()
    }

    pub fn active(&self) -> ThreadSet {
        self.rds.union(self.wrts)
    }

    /// Start of a read by `t`.
    pub fn u_sr(&self, t: ThreadId) -> Self {
        let mut s = self.clone();
        s.rds = s.rds.with(t);
        s.pend = s.pend.with(t);
        s.ovrl = set_bit(s.ovrl, t, !self.wrts.is_empty());
        let mut pv: BTreeSet<Value> = self.wrts.iter().map(|w| self.rec[w as usize]).collect();
        pv.insert(self.stor);
        s.posv[t as usize] = pv;
        s
    }

    /// Finish of a read by `t`.
    pub fn u_fr(&self, t: ThreadId) -> Self {
        let mut s = self.clone();
        s.rds = s.rds.without(t);
        s
    }

    /// Start of a write of `d` by `t`. Every other thread now overlaps a
    /// write and may observe `d`.
    pub fn u_sw(&self, t: ThreadId, d: Value) -> Self {
        let mut s = self.clone();
        s.wrts = s.wrts.with(t);
        s.pend = s.pend.with(t);
        s.rec[t as usize] = d;
        s.ovrl = set_bit(s.ovrl, t, !self.wrts.is_empty());
        for u in 0..self.threads() as ThreadId {
            if u != t {
                s.ovrl = s.ovrl.with(u);
                s.posv[u as usize].insert(d);
            }
        }
        s
    }

    /// Finish of a write by `t`, leaving `d` stored.
    pub fn u_fw(&self, t: ThreadId, d: Value) -> Self {
        let mut s = self.clone();
        s.stor = d;
        s.wrts = s.wrts.without(t);
        s
    }

    /// Linearisation point of a read: the current value is fixed.
    pub fn u_or(&self, t: ThreadId) -> Self {
        let mut s = self.clone();
        s.pend = s.pend.without(t);
        s.rec[t as usize] = self.stor;
        s
    }

    /// Linearisation point of a write of `d`.
    pub fn u_ow(&self, t: ThreadId, d: Value) -> Self {
        let mut s = self.clone();
        s.stor = d;
        s.pend = s.pend.without(t);
        s
    }
}

fn set_bit(set: ThreadSet, t: ThreadId, on: bool) -> ThreadSet {
    if on {
        set.with(t)
    } else {
        set.without(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn start_write_on_idle_register() {
        let s = RegisterStatus::initial(0, 2).u_sw(1, 1);
        assert_eq!(s.wrts, [1].into_iter().collect());
        assert_eq!(s.rec[1], 1);
        assert!(!s.ovrl.contains(1));
        assert!(s.ovrl.contains(0));
        assert!(s.posv[0].contains(&1));
    }

    #[test]
    fn finish_read_only_drops_reader() {
        let s = RegisterStatus::initial(0, 2).u_sr(0);
        let f = s.u_fr(0);
        assert!(f.rds.is_empty());
        assert_eq!(f.pend, s.pend);
        assert_eq!(f.posv, s.posv);
    }

    #[test]
    fn order_write_stores_recorded_value() {
        let s = RegisterStatus::initial(0, 3).u_sw(2, 1);
        let o = s.u_ow(2, s.rec[2]);
        assert_eq!(o.stor, 1);
        assert!(!o.pend.contains(2));
    }

    #[test]
    fn read_start_collects_possible_values() {
        let s = RegisterStatus::initial(0, 3).u_sw(1, 2).u_sr(0);
        assert_eq!(s.posv[0], [0, 2].into_iter().collect());
        assert!(s.ovrl.contains(0));
    }
}
