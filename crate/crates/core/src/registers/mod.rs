//! Shared multi-writer registers as labelled transition systems.

mod status;

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Deserializer, Serialize};

pub use status::{RegisterStatus, ThreadSet};

use crate::error::{Error, Result};
use crate::lts::{ActionKind, ActionLabel, Lts, LtsBuilder, RegisterId, ThreadId, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegisterKind {
    Safe,
    Regular,
    Atomic,
    /// No operation starts while any other is in progress.
    BlockingA,
    /// Reads may run together; writes exclude everything.
    BlockingI,
    /// Only writes block; reads never delay a write.
    BlockingS,
}

impl RegisterKind {
    pub fn name(self) -> &'static str {
        match self {
            RegisterKind::Safe => "safe",
            RegisterKind::Regular => "regular",
            RegisterKind::Atomic => "atomic",
            RegisterKind::BlockingA => "blocking_a",
            RegisterKind::BlockingI => "blocking_i",
            RegisterKind::BlockingS => "blocking_s",
        }
    }

    pub fn is_blocking(self) -> bool {
        matches!(self, RegisterKind::BlockingA | RegisterKind::BlockingI | RegisterKind::BlockingS)
    }

    fn has_order_read(self) -> bool {
        !matches!(self, RegisterKind::Safe | RegisterKind::Regular)
    }

    fn has_order_write(self) -> bool {
        self != RegisterKind::Safe
    }
}

/// Name, finite domain, initial value and semantics of one register.
/// Booleans in JSON map to 0/1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterConfig {
    pub id: String,
    #[serde(deserialize_with = "de_values")]
    pub domain: Vec<Value>,
    #[serde(deserialize_with = "de_value")]
    pub initial: Value,
    pub kind: RegisterKind,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawValue {
    Bool(bool),
    Int(Value),
}

impl From<RawValue> for Value {
    fn from(v: RawValue) -> Value {
        match v {
            RawValue::Bool(b) => b as Value,
            RawValue::Int(i) => i,
        }
    }
}

fn de_value<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Value, D::Error> {
    RawValue::deserialize(d).map(Value::from)
}

fn de_values<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Value>, D::Error> {
    Vec::<RawValue>::deserialize(d).map(|v| v.into_iter().map(Value::from).collect())
}

impl RegisterConfig {
    pub fn new(id: impl Into<String>, domain: Vec<Value>, initial: Value, kind: RegisterKind) -> Self {
        Self { id: id.into(), domain, initial, kind }
    }

    /// Boolean register (`false` = 0, `true` = 1).
    pub fn boolean(id: impl Into<String>, initial: bool, kind: RegisterKind) -> Self {
        Self::new(id, vec![0, 1], initial as Value, kind)
    }

    /// Register over `0..n`.
    pub fn range(id: impl Into<String>, n: Value, initial: Value, kind: RegisterKind) -> Self {
        Self::new(id, (0..n).collect(), initial, kind)
    }

    pub fn validate(&self) -> Result<()> {
        let err = |reason: &str| Error::RegisterConfig { register: self.id.clone(), reason: reason.into() };
        if self.domain.is_empty() {
            return Err(err("empty domain"));
        }
        let mut sorted = self.domain.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.domain.len() {
            return Err(err("duplicate domain values"));
        }
        if !self.domain.contains(&self.initial) {
            return Err(err("initial value outside the domain"));
        }
        Ok(())
    }

    pub fn with_kind(&self, kind: RegisterKind) -> Self {
        Self { kind, ..self.clone() }
    }
}

/// The action alphabet of register `r` for threads `0..threads`.
pub fn register_alphabet(config: &RegisterConfig, r: RegisterId, threads: usize) -> Vec<ActionLabel> {
    let mut out = Vec::new();
    for t in 0..threads as ThreadId {
        out.push(ActionLabel::start_read(t, r));
        out.push(ActionLabel::finish_write(t, r));
        for &d in &config.domain {
            out.push(ActionLabel::finish_read(t, r, d));
            out.push(ActionLabel::start_write(t, r, d));
        }
        if config.kind.has_order_read() {
            out.push(ActionLabel::order_read(t, r));
        }
        if config.kind.has_order_write() {
            out.push(ActionLabel::order_write(t, r));
        }
    }
    out
}

fn start_read_ok(kind: RegisterKind, s: &RegisterStatus, t: ThreadId) -> bool {
    match kind {
        RegisterKind::Safe | RegisterKind::Regular | RegisterKind::Atomic => !s.active().contains(t),
        RegisterKind::BlockingA => s.active().is_empty(),
        RegisterKind::BlockingI | RegisterKind::BlockingS => !s.rds.contains(t) && s.wrts.is_empty(),
    }
}

fn start_write_ok(kind: RegisterKind, s: &RegisterStatus, t: ThreadId) -> bool {
    match kind {
        RegisterKind::Safe | RegisterKind::Regular | RegisterKind::Atomic => !s.active().contains(t),
        RegisterKind::BlockingA | RegisterKind::BlockingI => s.active().is_empty(),
        // A thread never writes while its own read is open; keeping that
        // explicit preserves rds/wrts disjointness for the bare register.
        RegisterKind::BlockingS => !s.rds.contains(t) && s.wrts.is_empty(),
    }
}

/// Applies action `a` to status `s` under the rules of `config.kind`,
/// returning every possible successor (the raw update, before any state
/// reduction). A safe write overlapped by another write may leave any
/// domain value behind, hence the vector.
pub fn update_status(config: &RegisterConfig, s: &RegisterStatus, a: &ActionLabel) -> Result<Vec<RegisterStatus>> {
    successors(config, s, a).map_err(|reason| Error::Guard {
        register: config.id.clone(),
        reason: format!("{a} not enabled: {reason}"),
    })
}

fn successors(
    config: &RegisterConfig,
    s: &RegisterStatus,
    a: &ActionLabel,
) -> std::result::Result<Vec<RegisterStatus>, &'static str> {
    use ActionKind::*;
    let kind = config.kind;
    let t = a.thread();
    if t as usize >= s.threads() {
        return Err("thread id out of range");
    }
    let ensure = |ok: bool, why: &'static str| if ok { Ok(()) } else { Err(why) };
    let one = |x: RegisterStatus| Ok(vec![x]);
    match a.kind() {
        NonCrit | Crit => Err("not a register action"),
        StartRead => {
            ensure(start_read_ok(kind, s, t), "start guard")?;
            one(s.u_sr(t))
        }
        StartWrite => {
            let d = a.value().unwrap_or_default();
            ensure(config.domain.contains(&d), "value outside the domain")?;
            ensure(start_write_ok(kind, s, t), "start guard")?;
            one(s.u_sw(t, d))
        }
        FinishRead => {
            let d = a.value().unwrap_or_default();
            ensure(s.rds.contains(t), "no read in progress")?;
            let ok = match kind {
                RegisterKind::Safe => s.ovrl.contains(t) && config.domain.contains(&d) || d == s.stor,
                RegisterKind::Regular => s.posv[t as usize].contains(&d),
                _ => !s.pend.contains(t) && d == s.rec[t as usize],
            };
            ensure(ok, "value cannot be returned")?;
            one(s.u_fr(t))
        }
        FinishWrite => {
            ensure(s.wrts.contains(t), "no write in progress")?;
            match kind {
                RegisterKind::Safe if s.ovrl.contains(t) => {
                    Ok(config.domain.iter().map(|&d| s.u_fw(t, d)).collect())
                }
                RegisterKind::Safe => one(s.u_fw(t, s.rec[t as usize])),
                _ => {
                    ensure(!s.pend.contains(t), "write not yet ordered")?;
                    one(s.u_fw(t, s.stor))
                }
            }
        }
        OrderRead => {
            ensure(kind.has_order_read(), "no order actions for reads")?;
            ensure(s.rds.contains(t) && s.pend.contains(t), "no pending read")?;
            one(s.u_or(t))
        }
        OrderWrite => {
            ensure(kind.has_order_write(), "no order actions for writes")?;
            ensure(s.wrts.contains(t) && s.pend.contains(t), "no pending write")?;
            one(s.u_ow(t, s.rec[t as usize]))
        }
    }
}

/// Resets status fields that can no longer influence behaviour, so that
/// statuses differing only in dead data coincide.
pub fn normalize(kind: RegisterKind, init: Value, s: &mut RegisterStatus) {
    let active = s.active();
    match kind {
        RegisterKind::Safe => {
            s.pend = ThreadSet::EMPTY;
            s.ovrl = s.ovrl.intersection(active);
            for (t, rec) in s.rec.iter_mut().enumerate() {
                let t = t as ThreadId;
                if !(s.wrts.contains(t) && !s.ovrl.contains(t)) {
                    *rec = init;
                }
            }
            s.posv.iter_mut().for_each(|p| p.clear());
        }
        RegisterKind::Regular => {
            s.ovrl = ThreadSet::EMPTY;
            s.pend = s.pend.intersection(s.wrts);
            for t in 0..s.threads() {
                let tt = t as ThreadId;
                if !s.rds.contains(tt) {
                    s.posv[t].clear();
                }
                if !s.wrts.contains(tt) {
                    s.rec[t] = init;
                }
            }
        }
        _ => {
            s.ovrl = ThreadSet::EMPTY;
            s.posv.iter_mut().for_each(|p| p.clear());
            let keep = s.wrts.intersection(s.pend).union(s.rds.difference(s.pend));
            for (t, rec) in s.rec.iter_mut().enumerate() {
                if !keep.contains(t as ThreadId) {
                    *rec = init;
                }
            }
        }
    }
}

/// The reachable register LTS together with the (normalised) status of
/// each state.
pub fn register_state_space(
    config: &RegisterConfig,
    r: RegisterId,
    threads: usize,
) -> Result<(Lts, Vec<RegisterStatus>)> {
    config.validate()?;
    if threads == 0 || threads > 32 {
        return Err(Error::RegisterConfig { register: config.id.clone(), reason: "1 to 32 threads".into() });
    }
    let alphabet = register_alphabet(config, r, threads);
    let mut builder = LtsBuilder::new(alphabet.iter().copied());
    let mut index: HashMap<RegisterStatus, u32> = HashMap::new();
    let mut states = Vec::new();
    let mut queue = VecDeque::new();

    let init = RegisterStatus::initial(config.initial, threads);
    index.insert(init.clone(), builder.add_state());
    states.push(init.clone());
    queue.push_back(init);

    while let Some(s) = queue.pop_front() {
        let from = index[&s];
        for a in &alphabet {
            let Ok(succ) = successors(config, &s, a) else { continue };
            for mut n in succ {
                normalize(config.kind, config.initial, &mut n);
                let to = match index.get(&n) {
                    Some(&id) => id,
                    None => {
                        let id = builder.add_state();
                        index.insert(n.clone(), id);
                        states.push(n.clone());
                        queue.push_back(n);
                        id
                    }
                };
                builder.add_transition(from, *a, to)?;
            }
        }
    }
    Ok((builder.build()?, states))
}

/// LTS of a safe, regular or atomic register.
pub fn register_lts(config: &RegisterConfig, r: RegisterId, threads: usize) -> Result<Lts> {
    if config.kind.is_blocking() {
        return Err(Error::RegisterConfig {
            register: config.id.clone(),
            reason: "blocking kinds are built by blocking_variant_lts".into(),
        });
    }
    register_state_space(config, r, threads).map(|(l, _)| l)
}

/// LTS of one of the blocking refinements of the atomic register.
pub fn blocking_variant_lts(config: &RegisterConfig, r: RegisterId, threads: usize) -> Result<Lts> {
    if !config.kind.is_blocking() {
        return Err(Error::RegisterConfig {
            register: config.id.clone(),
            reason: "expected a blocking kind".into(),
        });
    }
    register_state_space(config, r, threads).map(|(l, _)| l)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(kind: RegisterKind) -> RegisterConfig {
        RegisterConfig::range("x", 3, 0, kind)
    }

    fn step(c: &RegisterConfig, s: &RegisterStatus, a: ActionLabel) -> RegisterStatus {
        let mut v = update_status(c, s, &a).unwrap();
        assert_eq!(v.len(), 1);
        v.pop().unwrap()
    }

    #[test]
    fn config_accepts_boolean_json() {
        let c: RegisterConfig =
            serde_json::from_str(r#"{"id":"flag0","domain":[false,true],"initial":false,"kind":"safe"}"#).unwrap();
        assert_eq!(c.domain, vec![0, 1]);
        assert_eq!(c.initial, 0);
        c.validate().unwrap();
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(RegisterConfig::new("x", vec![], 0, RegisterKind::Safe).validate().is_err());
        assert!(RegisterConfig::new("x", vec![0, 0], 0, RegisterKind::Safe).validate().is_err());
        assert!(RegisterConfig::new("x", vec![0, 1], 2, RegisterKind::Safe).validate().is_err());
    }

    #[test]
    fn guard_violation_is_an_error() {
        let c = cfg(RegisterKind::Atomic);
        let s = RegisterStatus::initial(0, 2);
        assert!(update_status(&c, &s, &ActionLabel::finish_read(0, 0, 0)).is_err());
        let s = step(&c, &s, ActionLabel::start_read(0, 0));
        assert!(update_status(&c, &s, &ActionLabel::start_write(0, 0, 1)).is_err());
        // not yet ordered
        assert!(update_status(&c, &s, &ActionLabel::finish_read(0, 0, 0)).is_err());
    }

    #[test]
    fn safe_read_without_overlap_returns_stored_value() {
        let c = cfg(RegisterKind::Safe);
        let s = step(&c, &RegisterStatus::initial(0, 2), ActionLabel::start_read(0, 0));
        for d in 0..3 {
            assert_eq!(update_status(&c, &s, &ActionLabel::finish_read(0, 0, d)).is_ok(), d == 0);
        }
    }

    #[test]
    fn safe_read_with_overlap_returns_anything() {
        let c = cfg(RegisterKind::Safe);
        let s = step(&c, &RegisterStatus::initial(0, 2), ActionLabel::start_write(1, 0, 1));
        let s = step(&c, &s, ActionLabel::start_read(0, 0));
        for d in 0..3 {
            assert!(update_status(&c, &s, &ActionLabel::finish_read(0, 0, d)).is_ok());
        }
    }

    #[test]
    fn overlapping_safe_writes_store_anything() {
        let c = cfg(RegisterKind::Safe);
        let s = step(&c, &RegisterStatus::initial(0, 2), ActionLabel::start_write(0, 0, 1));
        let s = step(&c, &s, ActionLabel::start_write(1, 0, 1));
        let out = update_status(&c, &s, &ActionLabel::finish_write(0, 0)).unwrap();
        let stored: Vec<_> = out.iter().map(|x| x.stor).collect();
        assert_eq!(stored, vec![0, 1, 2]);
    }

    #[test]
    fn atomic_read_returns_value_at_order_point() {
        let c = cfg(RegisterKind::Atomic);
        let mut s = RegisterStatus::initial(0, 2);
        for a in [
            ActionLabel::start_read(0, 0),
            ActionLabel::start_write(1, 0, 2),
            ActionLabel::order_read(0, 0),
            ActionLabel::order_write(1, 0),
        ] {
            s = step(&c, &s, a);
        }
        assert!(update_status(&c, &s, &ActionLabel::finish_read(0, 0, 2)).is_err());
        assert!(update_status(&c, &s, &ActionLabel::finish_read(0, 0, 0)).is_ok());
    }

    #[test]
    fn blocking_guards() {
        let base = RegisterStatus::initial(0, 2);
        let a = cfg(RegisterKind::BlockingA);
        let s = step(&a, &base, ActionLabel::start_read(0, 0));
        assert!(update_status(&a, &s, &ActionLabel::start_read(1, 0)).is_err());
        assert!(update_status(&a, &s, &ActionLabel::start_write(1, 0, 1)).is_err());

        let i = cfg(RegisterKind::BlockingI);
        let s = step(&i, &base, ActionLabel::start_read(0, 0));
        assert!(update_status(&i, &s, &ActionLabel::start_read(1, 0)).is_ok());
        assert!(update_status(&i, &s, &ActionLabel::start_write(1, 0, 1)).is_err());

        let sb = cfg(RegisterKind::BlockingS);
        let s = step(&sb, &base, ActionLabel::start_read(0, 0));
        assert!(update_status(&sb, &s, &ActionLabel::start_write(1, 0, 1)).is_ok());
        let w = step(&sb, &base, ActionLabel::start_write(0, 0, 1));
        assert!(update_status(&sb, &w, &ActionLabel::start_read(1, 0)).is_err());
    }

    #[test]
    fn lts_entry_points_check_kind() {
        assert!(register_lts(&cfg(RegisterKind::BlockingA), 0, 2).is_err());
        assert!(blocking_variant_lts(&cfg(RegisterKind::Atomic), 0, 2).is_err());
        assert!(blocking_variant_lts(&cfg(RegisterKind::BlockingI), 0, 2).is_ok());
    }

    #[test]
    fn alphabets_by_kind() {
        let n = |k| register_alphabet(&RegisterConfig::boolean("b", false, k), 0, 2).len();
        // per thread: sr, fw, 2 fr, 2 sw (+ ow, + or)
        assert_eq!(n(RegisterKind::Safe), 12);
        assert_eq!(n(RegisterKind::Regular), 14);
        assert_eq!(n(RegisterKind::Atomic), 16);
        assert_eq!(n(RegisterKind::BlockingS), 16);
    }

    #[test]
    fn idle_register_enables_every_start() {
        for kind in [RegisterKind::Safe, RegisterKind::Regular, RegisterKind::Atomic, RegisterKind::BlockingA] {
            let l = register_state_space(&cfg(kind), 0, 2).unwrap().0;
            let en = l.enabled_in(l.initial()).unwrap();
            assert_eq!(en.len(), 2 * (1 + 3), "{kind:?}");
            assert!(en.iter().all(|a| a.is_start()));
        }
    }

    #[test]
    fn reachable_statuses_keep_readers_and_writers_apart() {
        for kind in [
            RegisterKind::Safe,
            RegisterKind::Regular,
            RegisterKind::Atomic,
            RegisterKind::BlockingA,
            RegisterKind::BlockingI,
            RegisterKind::BlockingS,
        ] {
            for threads in 1..=3 {
                let (_, states) = register_state_space(&cfg(kind), 0, threads).unwrap();
                for s in &states {
                    assert!(s.rds.intersection(s.wrts).is_empty(), "{kind:?}");
                    if kind != RegisterKind::Safe {
                        assert!(s.pend.difference(s.active()).is_empty());
                    }
                }
            }
        }
    }

    #[test]
    fn safe_reader_overlapping_a_write_is_marked() {
        for threads in 1..=3 {
            let (_, states) = register_state_space(&cfg(RegisterKind::Safe), 0, threads).unwrap();
            for s in &states {
                for t in s.rds.iter() {
                    if !s.wrts.is_empty() {
                        assert!(s.ovrl.contains(t));
                    }
                }
            }
        }
    }
}
