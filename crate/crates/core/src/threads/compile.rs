use std::collections::{HashMap, VecDeque};

use fixedbitset::FixedBitSet;

use super::ir::{BinOp, Expr, Quant, RegRef, Stmt, ThreadProgram};
use super::RegisterTable;
use crate::error::{Error, Result};
use crate::lts::{ActionLabel, Lts, LtsBuilder, RegisterId, StateId, ThreadId, Value};

/// Local computation steps allowed between two actions before the thread
/// is declared to diverge silently.
const FOLD_LIMIT: usize = 100_000;

type Local = u16;
type Target = u32;

/// Pure expression over locals.
#[derive(Debug, Clone)]
enum PExpr {
    Const(Value),
    Local(Local),
    Me,
    Not(Box<PExpr>),
    Bin(BinOp, Box<PExpr>, Box<PExpr>),
    Quant { all: bool, var: Local, from: Box<PExpr>, to: Box<PExpr>, skip_me: bool, body: Box<PExpr> },
    CyclicGapMin(Box<PExpr>, Box<PExpr>),
}

#[derive(Debug, Clone)]
enum Instr {
    NonCrit,
    Crit,
    Read { dst: Local, array: usize, index: Option<PExpr> },
    Write { array: usize, index: Option<PExpr>, value: PExpr },
    Assign { dst: Local, value: PExpr },
    Branch { cond: PExpr, then: Target, els: Target },
    Jump(Target),
}

impl PExpr {
    fn uses(&self, out: &mut FixedBitSet) {
        match self {
            PExpr::Const(_) | PExpr::Me => {}
            PExpr::Local(x) => out.insert(*x as usize),
            PExpr::Not(a) => a.uses(out),
            PExpr::Bin(_, a, b) | PExpr::CyclicGapMin(a, b) => {
                a.uses(out);
                b.uses(out);
            }
            PExpr::Quant { var, from, to, body, .. } => {
                from.uses(out);
                to.uses(out);
                let had = out.contains(*var as usize);
                body.uses(out);
                out.set(*var as usize, had);
            }
        }
    }

    fn eval(&self, me: ThreadId, env: &mut [Value]) -> std::result::Result<Value, String> {
        Ok(match self {
            PExpr::Const(v) => *v,
            PExpr::Local(x) => env[*x as usize],
            PExpr::Me => me as Value,
            PExpr::Not(a) => (a.eval(me, env)? == 0) as Value,
            PExpr::Bin(op, a, b) => {
                let (x, y) = (a.eval(me, env)?, b.eval(me, env)?);
                if *op == BinOp::Mod && y == 0 {
                    return Err("modulo by zero".into());
                }
                if matches!(op, BinOp::Shl | BinOp::Shr) && !(0..31).contains(&y) {
                    return Err("shift out of range".into());
                }
                op.apply(x, y)
            }
            PExpr::Quant { all, var, from, to, skip_me, body } => {
                let (lo, hi) = (from.eval(me, env)?, to.eval(me, env)?);
                let saved = env[*var as usize];
                let mut result = *all;
                for v in lo..hi {
                    if *skip_me && v == me as Value {
                        continue;
                    }
                    env[*var as usize] = v;
                    if (body.eval(me, env)? != 0) != *all {
                        result = !*all;
                        break;
                    }
                }
                env[*var as usize] = saved;
                result as Value
            }
            PExpr::CyclicGapMin(set, bits) => {
                let (set, bits) = (set.eval(me, env)?, bits.eval(me, env)?);
                let gamma: Vec<Value> = (0..31).filter(|&j| set >> j & 1 == 1).collect();
                let v = |h: usize| bits >> gamma[h] & 1;
                let m = gamma.len();
                (0..m)
                    .find(|&h| v(h) == if h == 0 { v(m - 1) } else { 1 - v(h - 1) })
                    .map(|h| gamma[h])
                    // only reachable in the isolated thread, where own reads are unconstrained
                    .unwrap_or(me as Value)
            }
        })
    }
}

fn contains_read(e: &Expr) -> bool {
    match e {
        Expr::Const(_) | Expr::Local(_) | Expr::Me => false,
        Expr::Read(_) => true,
        Expr::Not(a) => contains_read(a),
        Expr::Bin(_, a, b) | Expr::CyclicGapMin(a, b) => contains_read(a) || contains_read(b),
        Expr::Quant(q) => contains_read(&q.from) || contains_read(&q.to) || contains_read(&q.body),
    }
}

struct Lowerer<'a> {
    table: &'a RegisterTable,
    thread: ThreadId,
    code: Vec<Instr>,
    label_pos: Vec<Option<u32>>,
    named: HashMap<String, Target>,
    locals: HashMap<String, Local>,
    num_locals: usize,
}

impl<'a> Lowerer<'a> {
    fn err(&self, reason: impl Into<String>) -> Error {
        Error::Compile { thread: self.thread, reason: reason.into() }
    }

    fn new_label(&mut self) -> Target {
        self.label_pos.push(None);
        (self.label_pos.len() - 1) as Target
    }

    fn place(&mut self, l: Target) -> Result<()> {
        if self.label_pos[l as usize].is_some() {
            return Err(self.err("label placed twice"));
        }
        self.label_pos[l as usize] = Some(self.code.len() as u32);
        Ok(())
    }

    fn named_label(&mut self, name: &str) -> Target {
        if let Some(&l) = self.named.get(name) {
            return l;
        }
        let l = self.new_label();
        self.named.insert(name.to_string(), l);
        l
    }

    fn local(&mut self, name: &str) -> Local {
        if let Some(&x) = self.locals.get(name) {
            return x;
        }
        let x = self.num_locals as Local;
        self.num_locals += 1;
        self.locals.insert(name.to_string(), x);
        x
    }

    fn temp(&mut self) -> Local {
        let x = self.num_locals as Local;
        self.num_locals += 1;
        x
    }

    fn emit(&mut self, i: Instr) {
        self.code.push(i);
    }

    fn reg(&mut self, r: &RegRef) -> Result<(usize, Option<PExpr>)> {
        let array = self.table.array_index(&r.array).ok_or_else(|| self.err(format!("unknown register {}", r.array)))?;
        if self.table.is_array(array) != r.index.is_some() {
            return Err(self.err(format!("register {} used with the wrong arity", r.array)));
        }
        let index = r.index.as_ref().map(|e| self.hoist(e)).transpose()?;
        Ok((array, index))
    }

    /// Emits the reads of `e` left to right and returns the pure remainder.
    fn hoist(&mut self, e: &Expr) -> Result<PExpr> {
        Ok(match e {
            Expr::Const(v) => PExpr::Const(*v),
            Expr::Local(n) => PExpr::Local(self.local(n)),
            Expr::Me => PExpr::Me,
            Expr::Read(r) => {
                let (array, index) = self.reg(r)?;
                let dst = self.temp();
                self.emit(Instr::Read { dst, array, index });
                PExpr::Local(dst)
            }
            Expr::Not(a) => PExpr::Not(Box::new(self.hoist(a)?)),
            Expr::Bin(op, a, b) => {
                let a = self.hoist(a)?;
                PExpr::Bin(*op, Box::new(a), Box::new(self.hoist(b)?))
            }
            Expr::CyclicGapMin(a, b) => {
                let a = self.hoist(a)?;
                PExpr::CyclicGapMin(Box::new(a), Box::new(self.hoist(b)?))
            }
            Expr::Quant(q) => {
                if contains_read(e) {
                    return Err(self.err("quantified reads are only allowed in conditions"));
                }
                let var = self.local(&q.var);
                PExpr::Quant {
                    all: q.all,
                    var,
                    from: Box::new(self.hoist(&q.from)?),
                    to: Box::new(self.hoist(&q.to)?),
                    skip_me: q.skip_me,
                    body: Box::new(self.hoist(&q.body)?),
                }
            }
        })
    }

    /// Short-circuit lowering: jumps to `t` if `e` holds, else to `f`.
    fn cond(&mut self, e: &Expr, t: Target, f: Target) -> Result<()> {
        match e {
            Expr::Bin(BinOp::And, a, b) => {
                let m = self.new_label();
                self.cond(a, m, f)?;
                self.place(m)?;
                self.cond(b, t, f)
            }
            Expr::Bin(BinOp::Or, a, b) => {
                let m = self.new_label();
                self.cond(a, t, m)?;
                self.place(m)?;
                self.cond(b, t, f)
            }
            Expr::Not(a) => self.cond(a, f, t),
            Expr::Quant(q) if contains_read(e) => self.quant_cond(q, t, f),
            _ => {
                let cond = self.hoist(e)?;
                self.emit(Instr::Branch { cond, then: t, els: f });
                Ok(())
            }
        }
    }

    fn bound(&mut self, e: &Expr) -> Result<PExpr> {
        let p = self.hoist(e)?;
        if matches!(p, PExpr::Const(_)) {
            return Ok(p);
        }
        let x = self.temp();
        self.emit(Instr::Assign { dst: x, value: p });
        Ok(PExpr::Local(x))
    }

    fn quant_cond(&mut self, q: &Quant, t: Target, f: Target) -> Result<()> {
        let var = self.local(&q.var);
        let from = self.hoist(&q.from)?;
        let to = self.bound(&q.to)?;
        self.emit(Instr::Assign { dst: var, value: from });
        let (head, body, next) = (self.new_label(), self.new_label(), self.new_label());
        self.place(head)?;
        let cond = PExpr::Bin(BinOp::Lt, Box::new(PExpr::Local(var)), Box::new(to));
        self.emit(Instr::Branch { cond, then: body, els: if q.all { t } else { f } });
        self.place(body)?;
        if q.skip_me {
            let inner = self.new_label();
            let cond = PExpr::Bin(BinOp::Eq, Box::new(PExpr::Local(var)), Box::new(PExpr::Me));
            self.emit(Instr::Branch { cond, then: next, els: inner });
            self.place(inner)?;
        }
        if q.all {
            self.cond(&q.body, next, f)?;
        } else {
            self.cond(&q.body, t, next)?;
        }
        self.place(next)?;
        self.increment(var, 1);
        self.emit(Instr::Jump(head));
        Ok(())
    }

    fn increment(&mut self, var: Local, by: Value) {
        let value = PExpr::Bin(BinOp::Add, Box::new(PExpr::Local(var)), Box::new(PExpr::Const(by)));
        self.emit(Instr::Assign { dst: var, value });
    }

    fn stmts(&mut self, body: &[Stmt]) -> Result<()> {
        body.iter().try_for_each(|s| self.stmt(s))
    }

    fn stmt(&mut self, s: &Stmt) -> Result<()> {
        match s {
            Stmt::Write(r, v) => {
                let (array, index) = self.reg(r)?;
                let value = self.hoist(v)?;
                self.emit(Instr::Write { array, index, value });
            }
            Stmt::Assign(n, v) => {
                let value = self.hoist(v)?;
                let dst = self.local(n);
                self.emit(Instr::Assign { dst, value });
            }
            Stmt::Await(c) => {
                let (head, done) = (self.new_label(), self.new_label());
                self.place(head)?;
                self.cond(c, done, head)?;
                self.place(done)?;
            }
            Stmt::If(c, a, b) => {
                let (tl, el, end) = (self.new_label(), self.new_label(), self.new_label());
                self.cond(c, tl, el)?;
                self.place(tl)?;
                self.stmts(a)?;
                self.emit(Instr::Jump(end));
                self.place(el)?;
                self.stmts(b)?;
                self.place(end)?;
            }
            Stmt::While(c, body) => {
                let (head, bl, end) = (self.new_label(), self.new_label(), self.new_label());
                self.place(head)?;
                self.cond(c, bl, end)?;
                self.place(bl)?;
                self.stmts(body)?;
                self.emit(Instr::Jump(head));
                self.place(end)?;
            }
            Stmt::RepeatUntil(body, c) => {
                let (head, end) = (self.new_label(), self.new_label());
                self.place(head)?;
                self.stmts(body)?;
                self.cond(c, end, head)?;
                self.place(end)?;
            }
            Stmt::For { var, from, to, down, body } => {
                let v = self.local(var);
                let from = self.hoist(from)?;
                let to = self.bound(to)?;
                self.emit(Instr::Assign { dst: v, value: from });
                let (head, bl, end) = (self.new_label(), self.new_label(), self.new_label());
                self.place(head)?;
                let op = if *down { BinOp::Ge } else { BinOp::Le };
                let cond = PExpr::Bin(op, Box::new(PExpr::Local(v)), Box::new(to));
                self.emit(Instr::Branch { cond, then: bl, els: end });
                self.place(bl)?;
                self.stmts(body)?;
                self.increment(v, if *down { -1 } else { 1 });
                self.emit(Instr::Jump(head));
                self.place(end)?;
            }
            Stmt::Label(n) => {
                let l = self.named_label(n);
                self.place(l)?;
            }
            Stmt::Goto(n) => {
                let l = self.named_label(n);
                self.emit(Instr::Jump(l));
            }
        }
        Ok(())
    }

    fn finish(mut self) -> Result<Flat> {
        for (name, &l) in &self.named {
            if self.label_pos[l as usize].is_none() {
                return Err(self.err(format!("goto to unknown label {name}")));
            }
        }
        let pos = std::mem::take(&mut self.label_pos);
        let fix = |l: Target| pos[l as usize].expect("every generated label is placed");
        for i in &mut self.code {
            match i {
                Instr::Jump(t) => *t = fix(*t),
                Instr::Branch { then, els, .. } => {
                    *then = fix(*then);
                    *els = fix(*els);
                }
                _ => {}
            }
        }
        Ok(Flat::new(self.code, self.num_locals))
    }
}

struct Flat {
    code: Vec<Instr>,
    num_locals: usize,
    live_in: Vec<FixedBitSet>,
    live_out: Vec<FixedBitSet>,
}

impl Flat {
    fn new(code: Vec<Instr>, num_locals: usize) -> Self {
        let n = code.len();
        let succ = |pc: usize| -> Vec<usize> {
            match &code[pc] {
                Instr::Jump(t) => vec![*t as usize],
                Instr::Branch { then, els, .. } => vec![*then as usize, *els as usize],
                _ => vec![pc + 1],
            }
        };
        let mut uses = vec![FixedBitSet::with_capacity(num_locals); n];
        let mut defs = vec![FixedBitSet::with_capacity(num_locals); n];
        for (pc, i) in code.iter().enumerate() {
            match i {
                Instr::Read { dst, index, .. } => {
                    if let Some(e) = index {
                        e.uses(&mut uses[pc]);
                    }
                    defs[pc].insert(*dst as usize);
                }
                Instr::Write { index, value, .. } => {
                    if let Some(e) = index {
                        e.uses(&mut uses[pc]);
                    }
                    value.uses(&mut uses[pc]);
                }
                Instr::Assign { dst, value } => {
                    value.uses(&mut uses[pc]);
                    defs[pc].insert(*dst as usize);
                }
                Instr::Branch { cond, .. } => cond.uses(&mut uses[pc]),
                _ => {}
            }
        }
        let mut live_in = vec![FixedBitSet::with_capacity(num_locals); n];
        let mut live_out = vec![FixedBitSet::with_capacity(num_locals); n];
        let mut changed = true;
        while changed {
            changed = false;
            for pc in (0..n).rev() {
                let mut out = FixedBitSet::with_capacity(num_locals);
                for s in succ(pc) {
                    out.union_with(&live_in[s]);
                }
                let mut inn = out.clone();
                inn.difference_with(&defs[pc]);
                inn.union_with(&uses[pc]);
                if inn != live_in[pc] || out != live_out[pc] {
                    live_in[pc] = inn;
                    live_out[pc] = out;
                    changed = true;
                }
            }
        }
        Self { code, num_locals, live_in, live_out }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Phase {
    Ready,
    Reading(RegisterId),
    Writing(RegisterId),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct TState {
    pc: u32,
    phase: Phase,
    locals: Box<[Value]>,
}

struct Explorer<'a> {
    flat: Flat,
    table: &'a RegisterTable,
    thread: ThreadId,
}

impl Explorer<'_> {
    fn err(&self, reason: impl Into<String>) -> Error {
        Error::Compile { thread: self.thread, reason: reason.into() }
    }

    fn eval(&self, e: &PExpr, locals: &[Value]) -> Result<Value> {
        let mut env = locals.to_vec();
        e.eval(self.thread, &mut env).map_err(|r| self.err(r))
    }

    fn mask(locals: &mut [Value], live: &FixedBitSet) {
        for (i, v) in locals.iter_mut().enumerate() {
            if !live.contains(i) {
                *v = 0;
            }
        }
    }

    /// Runs local computation from `pc` up to the next action.
    fn settle(&self, mut pc: usize, mut locals: Vec<Value>) -> Result<TState> {
        for _ in 0..FOLD_LIMIT {
            match &self.flat.code[pc] {
                Instr::Assign { dst, value } => {
                    locals[*dst as usize] = self.eval(value, &locals)?;
                    pc += 1;
                }
                Instr::Branch { cond, then, els } => {
                    pc = if self.eval(cond, &locals)? != 0 { *then } else { *els } as usize;
                }
                Instr::Jump(t) => pc = *t as usize,
                _ => {
                    Self::mask(&mut locals, &self.flat.live_in[pc]);
                    return Ok(TState { pc: pc as u32, phase: Phase::Ready, locals: locals.into() });
                }
            }
        }
        Err(self.err(format!("local computation does not reach an action (pc {pc})")))
    }

    fn register(&self, array: usize, index: &Option<PExpr>, locals: &[Value]) -> Result<RegisterId> {
        let idx = index.as_ref().map(|e| self.eval(e, locals)).transpose()?;
        self.table.resolve(array, idx).ok_or_else(|| {
            self.err(format!("register {}[{}] does not exist", self.table.array_name(array), idx.unwrap_or(0)))
        })
    }

    fn successors(&self, s: &TState) -> Result<Vec<(ActionLabel, TState)>> {
        let t = self.thread;
        let pc = s.pc as usize;
        let after = |locals: Vec<Value>| self.settle(pc + 1, locals);
        let waiting = |phase: Phase, drop: Option<Local>| {
            let mut locals = s.locals.to_vec();
            Self::mask(&mut locals, &self.flat.live_out[pc]);
            if let Some(d) = drop {
                locals[d as usize] = 0;
            }
            TState { pc: s.pc, phase, locals: locals.into() }
        };
        let instr = &self.flat.code[pc];
        Ok(match (s.phase, instr) {
            (Phase::Ready, Instr::NonCrit) => vec![(ActionLabel::noncrit(t), after(s.locals.to_vec())?)],
            (Phase::Ready, Instr::Crit) => vec![(ActionLabel::crit(t), after(s.locals.to_vec())?)],
            (Phase::Ready, Instr::Read { dst, array, index }) => {
                let r = self.register(*array, index, &s.locals)?;
                vec![(ActionLabel::start_read(t, r), waiting(Phase::Reading(r), Some(*dst)))]
            }
            (Phase::Ready, Instr::Write { array, index, value }) => {
                let r = self.register(*array, index, &s.locals)?;
                let v = self.eval(value, &s.locals)?;
                if !self.table.domain(r).contains(&v) {
                    return Err(self.err(format!("value {v} outside the domain of {}", self.table.name(r))));
                }
                vec![(ActionLabel::start_write(t, r, v), waiting(Phase::Writing(r), None))]
            }
            (Phase::Reading(r), Instr::Read { dst, .. }) => {
                let mut out = Vec::new();
                for &d in self.table.domain(r) {
                    let mut locals = s.locals.to_vec();
                    locals[*dst as usize] = d;
                    out.push((ActionLabel::finish_read(t, r, d), after(locals)?));
                }
                out
            }
            (Phase::Writing(r), Instr::Write { .. }) => {
                vec![(ActionLabel::finish_write(t, r), after(s.locals.to_vec())?)]
            }
            _ => return Err(self.err("inconsistent control state")),
        })
    }
}

/// The action alphabet of thread `t` over the registers of `table`.
pub fn thread_alphabet(table: &RegisterTable, t: ThreadId) -> Vec<ActionLabel> {
    let mut out = vec![ActionLabel::noncrit(t), ActionLabel::crit(t)];
    for r in 0..table.len() as RegisterId {
        out.push(ActionLabel::start_read(t, r));
        out.push(ActionLabel::finish_write(t, r));
        for &d in table.domain(r) {
            out.push(ActionLabel::finish_read(t, r, d));
            out.push(ActionLabel::start_write(t, r, d));
        }
    }
    out
}

/// Compiles a thread program into its LTS. The program cycles through the
/// non-critical section, the entry protocol, the critical section and the
/// exit protocol; purely local steps are folded into the control state.
pub fn compile_thread(p: &ThreadProgram, table: &RegisterTable) -> Result<Lts> {
    let mut lw = Lowerer {
        table,
        thread: p.thread,
        code: Vec::new(),
        label_pos: Vec::new(),
        named: HashMap::new(),
        locals: HashMap::new(),
        num_locals: 0,
    };
    let start = lw.new_label();
    lw.place(start)?;
    lw.emit(Instr::NonCrit);
    lw.stmts(&p.entry)?;
    lw.emit(Instr::Crit);
    lw.stmts(&p.exit)?;
    lw.emit(Instr::Jump(start));
    let flat = lw.finish()?;

    let ex = Explorer { table, thread: p.thread, flat };
    let mut builder = LtsBuilder::new(thread_alphabet(table, p.thread));
    let mut index: HashMap<TState, StateId> = HashMap::new();
    let mut queue = VecDeque::new();
    let init = ex.settle(0, vec![0; ex.flat.num_locals])?;
    index.insert(init.clone(), builder.add_state());
    queue.push_back(init);
    while let Some(s) = queue.pop_front() {
        let from = index[&s];
        for (label, n) in ex.successors(&s)? {
            let to = match index.get(&n) {
                Some(&id) => id,
                None => {
                    let id = builder.add_state();
                    index.insert(n.clone(), id);
                    queue.push_back(n);
                    id
                }
            };
            builder.add_transition(from, label, to)?;
        }
    }
    builder.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::threads::ir::build::*;
    use crate::threads::RegisterArray;

    fn table() -> RegisterTable {
        RegisterTable::new(&[
            RegisterArray::booleans("flag", 2, false),
            RegisterArray::scalar("turn", vec![0, 1], 0),
        ])
        .unwrap()
    }

    fn prog(entry: Vec<Stmt>, exit: Vec<Stmt>) -> ThreadProgram {
        ThreadProgram { thread: 0, entry, exit }
    }

    #[test]
    fn empty_protocols_give_two_state_cycle() {
        let l = compile_thread(&prog(vec![], vec![]), &table()).unwrap();
        assert_eq!(l.num_states(), 2);
        assert_eq!(l.enabled_in(l.initial()).unwrap(), vec![ActionLabel::noncrit(0)]);
        let s1 = l.out(l.initial())[0].target;
        assert_eq!(l.enabled_in(s1).unwrap(), vec![ActionLabel::crit(0)]);
        assert_eq!(l.out(s1)[0].target, l.initial());
    }

    #[test]
    fn write_then_read() {
        let p = prog(vec![write(at("flag", me()), tt()), await_(eq(rs("turn"), c(1)))], vec![]);
        let l = compile_thread(&p, &table()).unwrap();
        // nc, sw, fw, sr, fr0 (retry), fr1, crit
        let s = l.out(l.initial())[0].target;
        assert_eq!(l.enabled_in(s).unwrap(), vec![ActionLabel::start_write(0, 0, 1)]);
        let s = l.out(s)[0].target;
        assert_eq!(l.enabled_in(s).unwrap(), vec![ActionLabel::finish_write(0, 0)]);
        let s = l.out(s)[0].target;
        assert_eq!(l.enabled_in(s).unwrap(), vec![ActionLabel::start_read(0, 2)]);
        let reading = l.out(s)[0].target;
        let fr0 = l.label_id(&ActionLabel::finish_read(0, 2, 0)).unwrap();
        assert_eq!(l.out_with_label(reading, fr0)[0].target, s);
        assert_eq!(l.num_states(), 6);
    }

    #[test]
    fn short_circuit_skips_second_read() {
        let p = prog(vec![await_(or(eq(rd("flag", c(1)), ff()), eq(rs("turn"), c(1))))], vec![]);
        let l = compile_thread(&p, &table()).unwrap();
        let s = l.out(l.initial())[0].target;
        let reading = l.out(s)[0].target;
        let fr0 = l.label_id(&ActionLabel::finish_read(0, 1, 0)).unwrap();
        let after = l.out_with_label(reading, fr0)[0].target;
        assert_eq!(l.enabled_in(after).unwrap(), vec![ActionLabel::crit(0)]);
        let fr1 = l.label_id(&ActionLabel::finish_read(0, 1, 1)).unwrap();
        let after = l.out_with_label(reading, fr1)[0].target;
        assert_eq!(l.enabled_in(after).unwrap(), vec![ActionLabel::start_read(0, 2)]);
    }

    #[test]
    fn dead_locals_do_not_split_states() {
        // x is read but never used after the branch, so both outcomes merge.
        let p = prog(vec![set("x", rs("turn")), if_(eq(l("x"), c(0)), vec![])], vec![]);
        let l = compile_thread(&p, &table()).unwrap();
        assert_eq!(l.num_states(), 4);
    }

    #[test]
    fn for_loop_exit_value_is_past_the_bound() {
        let p = prog(
            vec![for_up("j", c(0), c(1), vec![]), write(sc("turn"), sub(l("j"), c(1)))],
            vec![],
        );
        let l = compile_thread(&p, &table()).unwrap();
        let s = l.out(l.initial())[0].target;
        assert_eq!(l.enabled_in(s).unwrap(), vec![ActionLabel::start_write(0, 2, 1)]);
    }

    #[test]
    fn errors_are_reported() {
        let t = table();
        let bad_value = prog(vec![write(sc("turn"), c(5))], vec![]);
        assert!(matches!(compile_thread(&bad_value, &t), Err(Error::Compile { .. })));
        let bad_label = prog(vec![goto("nowhere")], vec![]);
        assert!(compile_thread(&bad_label, &t).is_err());
        let spin = prog(vec![while_(tt(), vec![])], vec![]);
        assert!(compile_thread(&spin, &t).is_err());
        let arity = prog(vec![write(sc("flag"), tt())], vec![]);
        assert!(compile_thread(&arity, &t).is_err());
        let oob = prog(vec![write(at("flag", c(2)), tt())], vec![]);
        assert!(compile_thread(&oob, &t).is_err());
    }

    #[test]
    fn cyclic_gap_min_matches_definition() {
        let run = |set: Value, bits: Value| {
            PExpr::CyclicGapMin(Box::new(PExpr::Const(set)), Box::new(PExpr::Const(bits)))
                .eval(0, &mut [])
                .unwrap()
        };
        // single element: v(1) = v(M)
        assert_eq!(run(0b100, 0), 2);
        // ids {0,1,2}, bits (1,1,0): h=1 needs v1=v3 (no), h=2 needs v2=¬v1 (no), h=3 needs v3=¬v2 (yes)
        assert_eq!(run(0b111, 0b011), 2);
        // bits all equal: first element qualifies
        assert_eq!(run(0b101, 0b101), 0);
    }
}
