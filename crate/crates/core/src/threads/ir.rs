//! Structured pseudocode for thread programs.
//!
//! Register occurrences inside expressions are reads; each occurrence is one
//! read, performed left to right when the expression is evaluated.
//! Conditions of `if`, `while`, `until` and `await` short-circuit.

use crate::lts::{ThreadId, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mod,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Max,
    BitOr,
    BitAnd,
    Shl,
    Shr,
}

impl BinOp {
    pub fn apply(self, a: Value, b: Value) -> Value {
        match self {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mod => a.rem_euclid(b),
            BinOp::Eq => (a == b) as Value,
            BinOp::Ne => (a != b) as Value,
            BinOp::Lt => (a < b) as Value,
            BinOp::Le => (a <= b) as Value,
            BinOp::Gt => (a > b) as Value,
            BinOp::Ge => (a >= b) as Value,
            BinOp::And => (a != 0 && b != 0) as Value,
            BinOp::Or => (a != 0 || b != 0) as Value,
            BinOp::Max => a.max(b),
            BinOp::BitOr => a | b,
            BinOp::BitAnd => a & b,
            BinOp::Shl => a << b,
            BinOp::Shr => a >> b,
        }
    }
}

/// Reference to a scalar register or an element of a register array.
#[derive(Debug, Clone, PartialEq)]
pub struct RegRef {
    pub array: String,
    pub index: Option<Expr>,
}

/// `∀`/`∃` over `from..to` (exclusive), optionally skipping the running
/// thread's own id.
#[derive(Debug, Clone, PartialEq)]
pub struct Quant {
    pub all: bool,
    pub var: String,
    pub from: Expr,
    pub to: Expr,
    pub skip_me: bool,
    pub body: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(Value),
    Local(String),
    /// The running thread's id.
    Me,
    Read(Box<RegRef>),
    Not(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Quant(Box<Quant>),
    /// First element `γ(h)` of the ascending list `γ` of ids in bitmask
    /// `set` such that bit `γ(h)` of `bits` differs from the bit of its
    /// predecessor (cyclically, the first compares equal to the last).
    CyclicGapMin(Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Write(RegRef, Expr),
    Assign(String, Expr),
    /// Re-evaluates the condition, with fresh reads, until it holds.
    Await(Expr),
    If(Expr, Vec<Stmt>, Vec<Stmt>),
    While(Expr, Vec<Stmt>),
    RepeatUntil(Vec<Stmt>, Expr),
    /// Inclusive bounds evaluated once on entry; on exit the variable holds
    /// the first value past the bound.
    For { var: String, from: Expr, to: Expr, down: bool, body: Vec<Stmt> },
    Label(String),
    Goto(String),
}

/// Entry and exit protocol of one thread; the critical section sits in
/// between and the non-critical section precedes the entry.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreadProgram {
    pub thread: ThreadId,
    pub entry: Vec<Stmt>,
    pub exit: Vec<Stmt>,
}

/// Terse constructors used by the catalog.
pub mod build {
    use super::*;

    pub fn c(v: Value) -> Expr {
        Expr::Const(v)
    }
    pub fn tt() -> Expr {
        Expr::Const(1)
    }
    pub fn ff() -> Expr {
        Expr::Const(0)
    }
    pub fn l(name: &str) -> Expr {
        Expr::Local(name.into())
    }
    pub fn me() -> Expr {
        Expr::Me
    }
    pub fn at(array: &str, index: Expr) -> RegRef {
        RegRef { array: array.into(), index: Some(index) }
    }
    pub fn sc(name: &str) -> RegRef {
        RegRef { array: name.into(), index: None }
    }
    /// Read of `array[index]`.
    pub fn rd(array: &str, index: Expr) -> Expr {
        Expr::Read(Box::new(at(array, index)))
    }
    /// Read of a scalar register.
    pub fn rs(name: &str) -> Expr {
        Expr::Read(Box::new(sc(name)))
    }
    pub fn not(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }
    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }
    pub fn eq(a: Expr, b: Expr) -> Expr {
        bin(BinOp::Eq, a, b)
    }
    pub fn ne(a: Expr, b: Expr) -> Expr {
        bin(BinOp::Ne, a, b)
    }
    pub fn lt(a: Expr, b: Expr) -> Expr {
        bin(BinOp::Lt, a, b)
    }
    pub fn gt(a: Expr, b: Expr) -> Expr {
        bin(BinOp::Gt, a, b)
    }
    pub fn ge(a: Expr, b: Expr) -> Expr {
        bin(BinOp::Ge, a, b)
    }
    pub fn and(a: Expr, b: Expr) -> Expr {
        bin(BinOp::And, a, b)
    }
    pub fn or(a: Expr, b: Expr) -> Expr {
        bin(BinOp::Or, a, b)
    }
    pub fn add(a: Expr, b: Expr) -> Expr {
        bin(BinOp::Add, a, b)
    }
    pub fn sub(a: Expr, b: Expr) -> Expr {
        bin(BinOp::Sub, a, b)
    }
    pub fn modulo(a: Expr, b: Expr) -> Expr {
        bin(BinOp::Mod, a, b)
    }
    pub fn max(a: Expr, b: Expr) -> Expr {
        bin(BinOp::Max, a, b)
    }
    /// `set | (1 << bit)`.
    pub fn with_bit(set: Expr, bit: Expr) -> Expr {
        bin(BinOp::BitOr, set, bin(BinOp::Shl, c(1), bit))
    }
    /// `(set >> bit) & 1`.
    pub fn bit(set: Expr, bit: Expr) -> Expr {
        bin(BinOp::BitAnd, bin(BinOp::Shr, set, bit), c(1))
    }
    pub fn forall(var: &str, from: Expr, to: Expr, skip_me: bool, body: Expr) -> Expr {
        Expr::Quant(Box::new(Quant { all: true, var: var.into(), from, to, skip_me, body }))
    }
    pub fn exists(var: &str, from: Expr, to: Expr, skip_me: bool, body: Expr) -> Expr {
        Expr::Quant(Box::new(Quant { all: false, var: var.into(), from, to, skip_me, body }))
    }

    pub fn write(r: RegRef, v: Expr) -> Stmt {
        Stmt::Write(r, v)
    }
    pub fn set(var: &str, v: Expr) -> Stmt {
        Stmt::Assign(var.into(), v)
    }
    pub fn await_(cond: Expr) -> Stmt {
        Stmt::Await(cond)
    }
    pub fn if_(cond: Expr, then: Vec<Stmt>) -> Stmt {
        Stmt::If(cond, then, Vec::new())
    }
    pub fn if_else(cond: Expr, then: Vec<Stmt>, els: Vec<Stmt>) -> Stmt {
        Stmt::If(cond, then, els)
    }
    pub fn while_(cond: Expr, body: Vec<Stmt>) -> Stmt {
        Stmt::While(cond, body)
    }
    pub fn repeat_until(body: Vec<Stmt>, cond: Expr) -> Stmt {
        Stmt::RepeatUntil(body, cond)
    }
    pub fn for_up(var: &str, from: Expr, to: Expr, body: Vec<Stmt>) -> Stmt {
        Stmt::For { var: var.into(), from, to, down: false, body }
    }
    pub fn for_down(var: &str, from: Expr, to: Expr, body: Vec<Stmt>) -> Stmt {
        Stmt::For { var: var.into(), from, to, down: true, body }
    }
    pub fn label(name: &str) -> Stmt {
        Stmt::Label(name.into())
    }
    pub fn goto(name: &str) -> Stmt {
        Stmt::Goto(name.into())
    }
    /// Awaits `cond(j)` for each `j` in `from..=to` in ascending order,
    /// skipping the own id if asked.
    pub fn await_each(var: &str, from: Expr, to: Expr, skip_me: bool, cond: Expr) -> Stmt {
        let body = if skip_me {
            vec![if_(ne(l(var), me()), vec![await_(cond)])]
        } else {
            vec![await_(cond)]
        };
        for_up(var, from, to, body)
    }
}
