use std::fmt;

use serde::{Deserialize, Serialize};

pub type ThreadId = u8;
pub type RegisterId = u16;
pub type Value = i32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ActionKind {
    NonCrit,
    Crit,
    StartRead,
    FinishRead,
    StartWrite,
    FinishWrite,
    OrderRead,
    OrderWrite,
}

impl ActionKind {
    pub fn name(self) -> &'static str {
        match self {
            ActionKind::NonCrit => "noncrit",
            ActionKind::Crit => "crit",
            ActionKind::StartRead => "start_read",
            ActionKind::FinishRead => "finish_read",
            ActionKind::StartWrite => "start_write",
            ActionKind::FinishWrite => "finish_write",
            ActionKind::OrderRead => "order_read",
            ActionKind::OrderWrite => "order_write",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "noncrit" => ActionKind::NonCrit,
            "crit" => ActionKind::Crit,
            "start_read" => ActionKind::StartRead,
            "finish_read" => ActionKind::FinishRead,
            "start_write" => ActionKind::StartWrite,
            "finish_write" => ActionKind::FinishWrite,
            "order_read" => ActionKind::OrderRead,
            "order_write" => ActionKind::OrderWrite,
            _ => return None,
        })
    }

    pub fn is_thread_local(self) -> bool {
        matches!(self, ActionKind::NonCrit | ActionKind::Crit)
    }

    pub fn carries_value(self) -> bool {
        matches!(self, ActionKind::StartWrite | ActionKind::FinishRead)
    }
}

/// An action of a thread-register model. Construct through the named
/// constructors so the register/value presence rules always hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionLabel {
    kind: ActionKind,
    thread: ThreadId,
    register: Option<RegisterId>,
    value: Option<Value>,
}

impl ActionLabel {
    pub fn noncrit(t: ThreadId) -> Self {
        Self { kind: ActionKind::NonCrit, thread: t, register: None, value: None }
    }
    pub fn crit(t: ThreadId) -> Self {
        Self { kind: ActionKind::Crit, thread: t, register: None, value: None }
    }
    pub fn start_read(t: ThreadId, r: RegisterId) -> Self {
        Self { kind: ActionKind::StartRead, thread: t, register: Some(r), value: None }
    }
    pub fn finish_read(t: ThreadId, r: RegisterId, d: Value) -> Self {
        Self { kind: ActionKind::FinishRead, thread: t, register: Some(r), value: Some(d) }
    }
    pub fn start_write(t: ThreadId, r: RegisterId, d: Value) -> Self {
        Self { kind: ActionKind::StartWrite, thread: t, register: Some(r), value: Some(d) }
    }
    pub fn finish_write(t: ThreadId, r: RegisterId) -> Self {
        Self { kind: ActionKind::FinishWrite, thread: t, register: Some(r), value: None }
    }
    pub fn order_read(t: ThreadId, r: RegisterId) -> Self {
        Self { kind: ActionKind::OrderRead, thread: t, register: Some(r), value: None }
    }
    pub fn order_write(t: ThreadId, r: RegisterId) -> Self {
        Self { kind: ActionKind::OrderWrite, thread: t, register: Some(r), value: None }
    }

    /// Builds a label from raw parts, rejecting combinations that break the
    /// register/value presence rules.
    pub fn from_parts(
        kind: ActionKind,
        thread: ThreadId,
        register: Option<RegisterId>,
        value: Option<Value>,
    ) -> Option<Self> {
        if kind.is_thread_local() != register.is_none() || kind.carries_value() != value.is_some() {
            return None;
        }
        Some(Self { kind, thread, register, value })
    }

    pub fn kind(&self) -> ActionKind {
        self.kind
    }
    pub fn thread(&self) -> ThreadId {
        self.thread
    }
    pub fn register(&self) -> Option<RegisterId> {
        self.register
    }
    pub fn value(&self) -> Option<Value> {
        self.value
    }

    pub fn is_crit(&self) -> bool {
        self.kind == ActionKind::Crit
    }
    pub fn is_noncrit(&self) -> bool {
        self.kind == ActionKind::NonCrit
    }
    pub fn is_start(&self) -> bool {
        matches!(self.kind, ActionKind::StartRead | ActionKind::StartWrite)
    }
    pub fn is_start_read_on(&self, r: RegisterId) -> bool {
        self.kind == ActionKind::StartRead && self.register == Some(r)
    }
    pub fn is_start_write_on(&self, r: RegisterId) -> bool {
        self.kind == ActionKind::StartWrite && self.register == Some(r)
    }

    /// Whether both the owning thread and the register take part in this action.
    pub fn is_interface(&self) -> bool {
        matches!(
            self.kind,
            ActionKind::StartRead
                | ActionKind::FinishRead
                | ActionKind::StartWrite
                | ActionKind::FinishWrite
        )
    }

    /// Renders the label with register names substituted for ids.
    pub fn display<'a>(&'a self, names: &'a [String]) -> LabelDisplay<'a> {
        LabelDisplay { label: self, names }
    }

    /// Parses the rendering produced by [`ActionLabel::display`].
    pub fn parse(s: &str, names: &[String]) -> Option<Self> {
        let open = s.find('(')?;
        let body = s[open + 1..].strip_suffix(')')?;
        let kind = ActionKind::from_name(&s[..open])?;
        let (mut thread, mut register, mut value) = (None, None, None);
        for part in body.split(',') {
            let (key, val) = part.split_once('=')?;
            match key {
                "t" => thread = Some(val.parse().ok()?),
                "r" => {
                    let idx = names.iter().position(|n| n == val).or_else(|| {
                        val.strip_prefix('#').and_then(|x| x.parse().ok())
                    })?;
                    register = Some(RegisterId::try_from(idx).ok()?);
                }
                "v" => value = Some(val.parse().ok()?),
                _ => return None,
            }
        }
        Self::from_parts(kind, thread?, register, value)
    }
}

pub struct LabelDisplay<'a> {
    label: &'a ActionLabel,
    names: &'a [String],
}

impl fmt::Display for LabelDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = self.label;
        write!(f, "{}(t={}", l.kind.name(), l.thread)?;
        if let Some(r) = l.register {
            match self.names.get(r as usize) {
                Some(name) => write!(f, ",r={name}")?,
                None => write!(f, ",r=#{r}")?,
            }
        }
        if let Some(v) = l.value {
            write!(f, ",v={v}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Display for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.display(&[]).fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names() -> Vec<String> {
        vec!["flag0".into(), "flag1".into(), "turn".into()]
    }

    #[test]
    fn renders_like_the_dump_format() {
        let n = names();
        assert_eq!(
            ActionLabel::start_write(0, 0, 1).display(&n).to_string(),
            "start_write(t=0,r=flag0,v=1)"
        );
        assert_eq!(ActionLabel::crit(1).display(&n).to_string(), "crit(t=1)");
        assert_eq!(ActionLabel::order_read(2, 2).to_string(), "order_read(t=2,r=#2)");
    }

    #[test]
    fn parse_inverts_display() {
        let n = names();
        for l in [
            ActionLabel::noncrit(0),
            ActionLabel::crit(1),
            ActionLabel::start_read(1, 2),
            ActionLabel::finish_read(0, 1, 0),
            ActionLabel::start_write(1, 0, 1),
            ActionLabel::finish_write(0, 2),
            ActionLabel::order_read(1, 1),
            ActionLabel::order_write(0, 0),
        ] {
            assert_eq!(ActionLabel::parse(&l.display(&n).to_string(), &n), Some(l));
        }
    }

    #[test]
    fn from_parts_enforces_presence_rules() {
        assert!(ActionLabel::from_parts(ActionKind::Crit, 0, Some(1), None).is_none());
        assert!(ActionLabel::from_parts(ActionKind::StartWrite, 0, Some(1), None).is_none());
        assert!(ActionLabel::from_parts(ActionKind::StartRead, 0, Some(1), Some(3)).is_none());
        assert!(ActionLabel::from_parts(ActionKind::FinishRead, 0, Some(1), Some(3)).is_some());
    }
}
