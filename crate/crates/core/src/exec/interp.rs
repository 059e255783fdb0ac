//! Exhaustive interpreter. Every nondeterministic choice is explored; each
//! path carries its own fuel budget.

use std::collections::{BTreeMap, BTreeSet};

use super::intrinsics;
use super::{ErrorKind, ExecConfig, Outcome};
use crate::state::enumerate::default_value;
use crate::state::{canonicalize, HeapObj, Loc, State, Universe, Value};
use crate::syntax::ast::*;
use crate::syntax::pretty;

type Scope = BTreeMap<Ident, Value>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct Machine {
    st: State,
    /// One entry per active procedure call (the first is the top level);
    /// each holds a stack of block scopes.
    frames: Vec<Vec<Scope>>,
    fuel: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Flow {
    Normal,
    Return(Option<Value>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Step {
    Ok(Machine, Flow),
    Err(Outcome),
}

type Steps = Vec<Step>;

fn dedup(mut v: Steps) -> Steps {
    if v.len() > 1 {
        v.sort();
        v.dedup();
    }
    v
}

fn at(s: &Stat) -> String {
    let mut text = pretty::stat(s);
    if text.len() > 80 {
        let mut cut = 77;
        while !text.is_char_boundary(cut) {
            cut -= 1;
        }
        text.truncate(cut);
        text.push_str("...");
    }
    text
}

pub struct Interp<'a> {
    pub ctx: &'a Program,
    pub universe: &'a Universe,
    pub cfg: ExecConfig,
}

impl<'a> Interp<'a> {
    pub fn new(ctx: &'a Program, universe: &'a Universe, cfg: ExecConfig) -> Self {
        Interp { ctx, universe, cfg }
    }

    /// All outcomes of running `s` from `init`, plus the largest amount of
    /// fuel consumed by any path that terminated.
    pub fn run(&self, s: &Stat, init: &State) -> (BTreeSet<Outcome>, u64) {
        let m = Machine {
            st: init.clone(),
            frames: vec![vec![]],
            fuel: self.cfg.fuel,
        };
        let mut out = BTreeSet::new();
        let mut max_used = 0;
        for step in self.exec(s, m) {
            match step {
                Step::Ok(m, _) => {
                    max_used = max_used.max(self.cfg.fuel - m.fuel);
                    out.insert(Outcome::Final(canonicalize(&m.st)));
                }
                Step::Err(o) => {
                    out.insert(o);
                }
            }
        }
        (out, max_used)
    }

    /// Evaluates a boolean expression in a global state.
    pub fn eval_cond(&self, e: &Expr, st: &State) -> Result<bool, ErrorKind> {
        let m = Machine {
            st: st.clone(),
            frames: vec![vec![]],
            fuel: self.cfg.fuel,
        };
        self.cond(&m, e)
    }

    fn err(kind: ErrorKind, s: &Stat) -> Step {
        Step::Err(Outcome::RuntimeError { kind, at: at(s) })
    }

    fn charge(m: &mut Machine) -> bool {
        if m.fuel == 0 {
            false
        } else {
            m.fuel -= 1;
            true
        }
    }

    // ---- variables ----

    fn lookup(&self, m: &Machine, x: &str) -> Option<Value> {
        let frame = m.frames.last().expect("frame");
        for scope in frame.iter().rev() {
            if let Some(v) = scope.get(x) {
                return Some(v.clone());
            }
        }
        m.st.store.get(x).cloned()
    }

    fn set_var(&self, m: &mut Machine, x: &str, v: Value) -> Result<(), ErrorKind> {
        let frame = m.frames.last_mut().expect("frame");
        for scope in frame.iter_mut().rev() {
            if let Some(slot) = scope.get_mut(x) {
                *slot = v;
                return Ok(());
            }
        }
        let Some(dom) = self.universe.vars.get(x) else {
            return Err(ErrorKind::UndefinedVariable);
        };
        if !dom.admits(&v) {
            return Err(ErrorKind::OutOfDomainValue);
        }
        m.st.store.insert(x.to_string(), v);
        Ok(())
    }

    // ---- expressions ----

    fn deref<'m>(&self, m: &'m Machine, v: &Value) -> Result<&'m HeapObj, ErrorKind> {
        match v {
            Value::Ref(Some(l)) => m.st.heap.get(l).ok_or(ErrorKind::NilDereference),
            Value::Ref(None) => Err(ErrorKind::NilDereference),
            _ => Err(ErrorKind::TypeMismatch),
        }
    }

    fn int(&self, m: &Machine, e: &Expr) -> Result<i64, ErrorKind> {
        self.eval(m, e)?.as_int().ok_or(ErrorKind::TypeMismatch)
    }

    fn set(&self, m: &Machine, e: &Expr) -> Result<BTreeSet<i64>, ErrorKind> {
        match self.eval(m, e)? {
            Value::Set(s) => Ok(s),
            _ => Err(ErrorKind::TypeMismatch),
        }
    }

    fn int_array(&self, m: &Machine, e: &Expr) -> Result<Vec<i64>, ErrorKind> {
        let v = self.eval(m, e)?;
        match self.deref(m, &v)? {
            HeapObj::Array { elems, .. } => elems
                .iter()
                .map(|x| x.as_int().ok_or(ErrorKind::TypeMismatch))
                .collect(),
            _ => Err(ErrorKind::TypeMismatch),
        }
    }

    fn field_index(&self, ty: &str, f: &str) -> Result<usize, ErrorKind> {
        self.ctx
            .record(ty)
            .and_then(|r| r.field_index(f))
            .ok_or(ErrorKind::TypeMismatch)
    }

    pub(crate) fn eval(&self, m: &Machine, e: &Expr) -> Result<Value, ErrorKind> {
        let ovf = |r: Option<i64>| r.map(Value::Int).ok_or(ErrorKind::OutOfDomainValue);
        match e {
            Expr::Int(n) => Ok(Value::Int(*n)),
            Expr::Bool(b) => Ok(Value::Bool(*b)),
            Expr::Nil => Ok(Value::Ref(None)),
            Expr::Var(x) => self.lookup(m, x).ok_or(ErrorKind::UndefinedVariable),
            Expr::Index(a, i) => {
                let av = self.eval(m, a)?;
                let i = self.int(m, i)?;
                match self.deref(m, &av)? {
                    HeapObj::Array { elems, .. } => {
                        if i < 0 || i as usize >= elems.len() {
                            Err(ErrorKind::IndexOutOfBounds)
                        } else {
                            Ok(elems[i as usize].clone())
                        }
                    }
                    _ => Err(ErrorKind::TypeMismatch),
                }
            }
            Expr::Field(o, f) => {
                let ov = self.eval(m, o)?;
                match self.deref(m, &ov)? {
                    HeapObj::Record { ty, fields } => Ok(fields[self.field_index(ty, f)?].clone()),
                    _ => Err(ErrorKind::TypeMismatch),
                }
            }
            Expr::Unary(UnOp::Neg, x) => ovf(self.int(m, x)?.checked_neg()),
            Expr::Unary(UnOp::Not, x) => match self.eval(m, x)? {
                Value::Bool(b) => Ok(Value::Bool(!b)),
                _ => Err(ErrorKind::TypeMismatch),
            },
            Expr::Binary(op, l, r) => match op {
                BinOp::And => match self.eval(m, l)? {
                    Value::Bool(false) => Ok(Value::Bool(false)),
                    Value::Bool(true) => self.eval(m, r),
                    _ => Err(ErrorKind::TypeMismatch),
                },
                BinOp::Or => match self.eval(m, l)? {
                    Value::Bool(true) => Ok(Value::Bool(true)),
                    Value::Bool(false) => self.eval(m, r),
                    _ => Err(ErrorKind::TypeMismatch),
                },
                BinOp::Eq => Ok(Value::Bool(self.eval(m, l)? == self.eval(m, r)?)),
                BinOp::In => {
                    let x = self.int(m, l)?;
                    Ok(Value::Bool(self.set(m, r)?.contains(&x)))
                }
                BinOp::Add | BinOp::Sub => match (self.eval(m, l)?, self.eval(m, r)?) {
                    (Value::Int(a), Value::Int(b)) => ovf(if *op == BinOp::Add {
                        a.checked_add(b)
                    } else {
                        a.checked_sub(b)
                    }),
                    (Value::Set(a), Value::Set(b)) => Ok(Value::Set(if *op == BinOp::Add {
                        a.union(&b).copied().collect()
                    } else {
                        a.difference(&b).copied().collect()
                    })),
                    _ => Err(ErrorKind::TypeMismatch),
                },
                BinOp::Mul => ovf(self.int(m, l)?.checked_mul(self.int(m, r)?)),
                BinOp::Min => Ok(Value::Int(self.int(m, l)?.min(self.int(m, r)?))),
                BinOp::Lt => Ok(Value::Bool(self.int(m, l)? < self.int(m, r)?)),
            },
            Expr::SetLit(items) => items
                .iter()
                .map(|i| self.int(m, i))
                .collect::<Result<BTreeSet<_>, _>>()
                .map(Value::Set),
            Expr::SetRange(lo, hi) => {
                let (lo, hi) = (self.int(m, lo)?, self.int(m, hi)?);
                if hi.saturating_sub(lo) > 1 << 16 {
                    return Err(ErrorKind::OutOfDomainValue);
                }
                Ok(Value::Set((lo..=hi).collect()))
            }
            Expr::Intrinsic(i, args) => match i {
                Intrinsic::FindMin => {
                    let a = self.int_array(m, &args[0])?;
                    Ok(Value::Int(intrinsics::find_min(&a, &self.set(m, &args[1])?)?))
                }
                Intrinsic::FindRank => {
                    let a = self.int_array(m, &args[0])?;
                    Ok(Value::Int(intrinsics::find_rank(&a, self.int(m, &args[1])?)?))
                }
                Intrinsic::Below => Ok(Value::Set(intrinsics::below(
                    &self.set(m, &args[0])?,
                    self.int(m, &args[1])?,
                ))),
                Intrinsic::Above => Ok(Value::Set(intrinsics::above(
                    &self.set(m, &args[0])?,
                    self.int(m, &args[1])?,
                ))),
            },
        }
    }

    fn cond(&self, m: &Machine, e: &Expr) -> Result<bool, ErrorKind> {
        self.eval(m, e)?.as_bool().ok_or(ErrorKind::TypeMismatch)
    }

    // ---- writes ----

    /// Where an lvalue points, resolved before the value is stored.
    fn resolve(&self, m: &Machine, lv: &LValue) -> Result<Target, ErrorKind> {
        match lv {
            LValue::Var(x) => Ok(Target::Var(x.clone())),
            LValue::Index(a, i) => {
                let av = self.eval(m, a)?;
                let i = self.int(m, i)?;
                let Value::Ref(Some(l)) = av else {
                    return Err(ErrorKind::NilDereference);
                };
                match m.st.heap.get(&l) {
                    Some(HeapObj::Array { elems, .. }) => {
                        if i < 0 || i as usize >= elems.len() {
                            Err(ErrorKind::IndexOutOfBounds)
                        } else {
                            Ok(Target::Slot(l, i as usize))
                        }
                    }
                    Some(_) => Err(ErrorKind::TypeMismatch),
                    None => Err(ErrorKind::NilDereference),
                }
            }
            LValue::Field(o, f) => {
                let Value::Ref(Some(l)) = self.eval(m, o)? else {
                    return Err(ErrorKind::NilDereference);
                };
                match m.st.heap.get(&l) {
                    Some(HeapObj::Record { ty, .. }) => Ok(Target::Slot(l, self.field_index(ty, f)?)),
                    Some(_) => Err(ErrorKind::TypeMismatch),
                    None => Err(ErrorKind::NilDereference),
                }
            }
        }
    }

    fn store(&self, m: &mut Machine, t: Target, v: Value) -> Result<(), ErrorKind> {
        match t {
            Target::Var(x) => self.set_var(m, &x, v),
            Target::Slot(l, i) => {
                let obj = m.st.heap.get_mut(&l).ok_or(ErrorKind::NilDereference)?;
                match obj {
                    HeapObj::Array { elems, dom } => {
                        if !dom.admits(&v) {
                            return Err(ErrorKind::OutOfDomainValue);
                        }
                        elems[i] = v;
                    }
                    HeapObj::Record { ty, fields } => {
                        if let Some(rec) = self.ctx.record(ty) {
                            let fname = &rec.fields[i].0;
                            if let Some(d) = self.universe.field_domain(ty, fname) {
                                if !d.admits(&v) {
                                    return Err(ErrorKind::OutOfDomainValue);
                                }
                            }
                        }
                        fields[i] = v;
                    }
                }
                Ok(())
            }
        }
    }

    fn assign(&self, m: &mut Machine, lv: &LValue, v: Value) -> Result<(), ErrorKind> {
        let t = self.resolve(m, lv)?;
        self.store(m, t, v)
    }

    /// Drops heap objects unreachable from globals, live locals and `extra`.
    fn collect_garbage(m: &mut Machine, extra: &[Value]) {
        let mut stack: Vec<Loc> = Vec::new();
        let mut push = |v: &Value| {
            if let Value::Ref(Some(l)) = v {
                stack.push(*l);
            }
        };
        m.st.store.values().for_each(&mut push);
        m.frames.iter().flatten().flat_map(|s| s.values()).for_each(&mut push);
        extra.iter().for_each(&mut push);
        let mut live = BTreeSet::new();
        while let Some(l) = stack.pop() {
            if live.insert(l) {
                if let Some(o) = m.st.heap.get(&l) {
                    stack.extend(o.refs());
                }
            }
        }
        m.st.heap.retain(|l, _| live.contains(l));
    }

    fn new_record(&self, m: &mut Machine, rec: &str, inits: &[(Ident, Expr)]) -> Result<Value, ErrorKind> {
        let decl = self.ctx.record(rec).ok_or(ErrorKind::TypeMismatch)?;
        let mut vals = Vec::with_capacity(inits.len());
        for (_, e) in inits {
            vals.push(self.eval(m, e)?);
        }
        let mut fields: Vec<Value> = decl
            .fields
            .iter()
            .map(|(f, t)| match (t, self.universe.field_domain(rec, f)) {
                (Type::Int, Some(crate::state::Domain::Int { lo, .. })) => Value::Int(*lo),
                _ => default_value(t),
            })
            .collect();
        for ((f, _), v) in inits.iter().zip(&vals) {
            let i = decl.field_index(f).ok_or(ErrorKind::TypeMismatch)?;
            if let Some(d) = self.universe.field_domain(rec, f) {
                if !d.admits(v) {
                    return Err(ErrorKind::OutOfDomainValue);
                }
            }
            fields[i] = v.clone();
        }
        if m.st.record_count() >= self.universe.heap_budget {
            Self::collect_garbage(m, &vals);
            if m.st.record_count() >= self.universe.heap_budget {
                return Err(ErrorKind::HeapBudgetExceeded);
            }
        }
        let l = m.st.alloc_obj(HeapObj::Record {
            ty: rec.to_string(),
            fields,
        });
        Ok(Value::Ref(Some(l)))
    }

    // ---- statements ----

    fn exec(&self, s: &Stat, mut m: Machine) -> Steps {
        macro_rules! charge {
            () => {
                if !Self::charge(&mut m) {
                    return vec![Step::Err(Outcome::FuelExhausted)];
                }
            };
        }
        macro_rules! attempt {
            ($e:expr) => {
                match $e {
                    Ok(v) => v,
                    Err(k) => return vec![Self::err(k, s)],
                }
            };
        }
        match s {
            Stat::Skip => {
                charge!();
                vec![Step::Ok(m, Flow::Normal)]
            }
            Stat::Seq(a, b) => {
                let mut out = Vec::new();
                for step in self.exec(a, m) {
                    match step {
                        Step::Ok(m2, Flow::Normal) => out.extend(self.exec(b, m2)),
                        other => out.push(other),
                    }
                }
                dedup(out)
            }
            Stat::Choice(a, b) => {
                let mut out = self.exec(a, m.clone());
                out.extend(self.exec(b, m));
                dedup(out)
            }
            Stat::Assign(lv, e) => {
                charge!();
                let v = attempt!(self.eval(&m, e));
                attempt!(self.assign(&mut m, lv, v));
                vec![Step::Ok(m, Flow::Normal)]
            }
            Stat::RangeAssign(x, lo, hi) => {
                charge!();
                let lo = attempt!(self.int(&m, lo));
                let hi = attempt!(self.int(&m, hi));
                if lo > hi {
                    return vec![Self::err(ErrorKind::EmptyRange, s)];
                }
                self.branch_assign(s, &m, x, lo..=hi)
            }
            Stat::SelectIn(x, e) => {
                charge!();
                let set = attempt!(self.set(&m, e));
                if set.is_empty() {
                    return vec![Self::err(ErrorKind::EmptySelect, s)];
                }
                self.branch_assign(s, &m, x, set.into_iter())
            }
            Stat::If(c, t) => {
                if attempt!(self.cond(&m, c)) {
                    self.exec(t, m)
                } else {
                    vec![Step::Ok(m, Flow::Normal)]
                }
            }
            Stat::IfElse(c, t, e) => {
                if attempt!(self.cond(&m, c)) {
                    self.exec(t, m)
                } else {
                    self.exec(e, m)
                }
            }
            Stat::While(c, body) => self.exec_while(s, c, body, m),
            Stat::ForUp(..) | Stat::ForDown(..) => {
                let desugared = desugar_for(s).expect("counting loop");
                self.exec(&desugared, m)
            }
            Stat::ForIn(x, e, body) => {
                let set = attempt!(self.set(&m, e));
                let mut live = vec![m];
                let mut out = Vec::new();
                for v in set {
                    let mut next = Vec::new();
                    for mut mm in live {
                        if !Self::charge(&mut mm) {
                            out.push(Step::Err(Outcome::FuelExhausted));
                            continue;
                        }
                        if let Err(k) = self.set_var(&mut mm, x, Value::Int(v)) {
                            out.push(Self::err(k, s));
                            continue;
                        }
                        for step in self.exec(body, mm) {
                            match step {
                                Step::Ok(m2, Flow::Normal) => next.push(m2),
                                other => out.push(other),
                            }
                        }
                    }
                    next.sort();
                    next.dedup();
                    live = next;
                }
                out.extend(live.into_iter().map(|m| Step::Ok(m, Flow::Normal)));
                dedup(out)
            }
            Stat::Call(p, args) => {
                charge!();
                let mut out = Vec::new();
                for step in self.call(s, p, args, m) {
                    match step {
                        Ok((m2, _)) => out.push(Step::Ok(m2, Flow::Normal)),
                        Err(o) => out.push(Step::Err(o)),
                    }
                }
                dedup(out)
            }
            Stat::AssignCall(lv, p, args) => {
                charge!();
                let mut out = Vec::new();
                for step in self.call(s, p, args, m) {
                    match step {
                        Ok((mut m2, Some(v))) => match self.assign(&mut m2, lv, v) {
                            Ok(()) => out.push(Step::Ok(m2, Flow::Normal)),
                            Err(k) => out.push(Self::err(k, s)),
                        },
                        Ok((_, None)) => out.push(Self::err(ErrorKind::MissingReturn, s)),
                        Err(o) => out.push(Step::Err(o)),
                    }
                }
                dedup(out)
            }
            Stat::New(lv, rec, inits) => {
                charge!();
                let t = attempt!(self.resolve(&m, lv));
                let v = attempt!(self.new_record(&mut m, rec, inits));
                attempt!(self.store(&mut m, t, v));
                vec![Step::Ok(m, Flow::Normal)]
            }
            Stat::Return(e) => {
                charge!();
                let v = match e {
                    Some(e) => Some(attempt!(self.eval(&m, e))),
                    None => None,
                };
                vec![Step::Ok(m, Flow::Return(v))]
            }
            Stat::Block(blk) => {
                let mut scope = Scope::new();
                for d in &blk.decls {
                    let v = match &d.init {
                        Some(e) => attempt!(self.eval(&m, e)),
                        None => default_value(&d.ty),
                    };
                    scope.insert(d.name.clone(), v);
                }
                m.frames.last_mut().expect("frame").push(scope);
                let mut out = Vec::new();
                for step in self.exec(&blk.body, m) {
                    match step {
                        Step::Ok(mut m2, flow) => {
                            m2.frames.last_mut().expect("frame").pop();
                            let flow = if blk.inline { Flow::Normal } else { flow };
                            out.push(Step::Ok(m2, flow));
                        }
                        other => out.push(other),
                    }
                }
                dedup(out)
            }
        }
    }

    fn branch_assign(&self, s: &Stat, m: &Machine, x: &str, vals: impl Iterator<Item = i64>) -> Steps {
        let mut out = Vec::new();
        for v in vals {
            let mut mm = m.clone();
            match self.set_var(&mut mm, x, Value::Int(v)) {
                Ok(()) => out.push(Step::Ok(mm, Flow::Normal)),
                Err(k) => out.push(Self::err(k, s)),
            }
        }
        dedup(out)
    }

    /// Loop-head configurations are explored once each, with the budget of
    /// the first path to reach them. A cycle among them is an execution that
    /// never ends, reported as fuel exhaustion.
    fn exec_while(&self, s: &Stat, c: &Expr, body: &Stat, m: Machine) -> Steps {
        type Key = (BTreeMap<Ident, Value>, BTreeMap<Loc, HeapObj>, Vec<Vec<Scope>>);
        let key = |m: &Machine| -> Key { (m.st.store.clone(), m.st.heap.clone(), m.frames.clone()) };
        let mut succ: BTreeMap<Key, Vec<Key>> = BTreeMap::new();
        let mut out = Vec::new();
        let mut todo = vec![m];
        while let Some(mut mm) = todo.pop() {
            let k = key(&mm);
            if succ.contains_key(&k) {
                continue;
            }
            let mut next = Vec::new();
            if !Self::charge(&mut mm) {
                out.push(Step::Err(Outcome::FuelExhausted));
            } else {
                match self.cond(&mm, c) {
                    Err(e) => out.push(Self::err(e, s)),
                    Ok(false) => out.push(Step::Ok(mm, Flow::Normal)),
                    Ok(true) => {
                        for step in self.exec(body, mm) {
                            match step {
                                Step::Ok(m2, Flow::Normal) => {
                                    next.push(key(&m2));
                                    todo.push(m2);
                                }
                                other => out.push(other),
                            }
                        }
                    }
                }
            }
            succ.insert(k, next);
        }
        if has_cycle(&succ) {
            out.push(Step::Err(Outcome::FuelExhausted));
        }
        dedup(out)
    }

    /// Runs a procedure body in a fresh frame. Yields the caller-side machine
    /// and the returned value.
    fn call(&self, s: &Stat, p: &str, args: &[Expr], m: Machine) -> Vec<Result<(Machine, Option<Value>), Outcome>> {
        let err = |k: ErrorKind| vec![Err(Outcome::RuntimeError { kind: k, at: at(s) })];
        let Some(def) = self.ctx.proc(p) else {
            return err(ErrorKind::UndefinedProcedure);
        };
        if def.params.len() != args.len() {
            return err(ErrorKind::TypeMismatch);
        }
        if m.frames.len() > self.cfg.max_call_depth {
            return vec![Err(Outcome::FuelExhausted)];
        }
        let mut scope = Scope::new();
        for ((name, _), a) in def.params.iter().zip(args) {
            match self.eval(&m, a) {
                Ok(v) => {
                    scope.insert(name.clone(), v);
                }
                Err(k) => return err(k),
            }
        }
        for (name, t) in &def.locals {
            scope.insert(name.clone(), default_value(t));
        }
        let mut m = m;
        m.frames.push(vec![scope]);
        let mut out = Vec::new();
        for step in self.exec(&def.body, m) {
            match step {
                Step::Ok(mut m2, flow) => {
                    m2.frames.pop();
                    let v = match flow {
                        Flow::Return(v) => v,
                        Flow::Normal => None,
                    };
                    if def.ret != Type::Void && v.is_none() {
                        out.push(Err(Outcome::RuntimeError {
                            kind: ErrorKind::MissingReturn,
                            at: at(s),
                        }));
                    } else {
                        out.push(Ok((m2, v)));
                    }
                }
                Step::Err(o) => out.push(Err(o)),
            }
        }
        out
    }
}

enum Target {
    Var(Ident),
    Slot(Loc, usize),
}

/// The while-loop a counting `for` stands for. The bounds are re-evaluated
/// on every iteration.
/// Iterative three-colour depth-first search.
fn has_cycle<K: Ord>(g: &BTreeMap<K, Vec<K>>) -> bool {
    let mut done: BTreeSet<&K> = BTreeSet::new();
    let mut on_path: BTreeSet<&K> = BTreeSet::new();
    for root in g.keys() {
        if done.contains(root) {
            continue;
        }
        let mut stack: Vec<(&K, usize)> = vec![(root, 0)];
        on_path.insert(root);
        while let Some((n, i)) = stack.pop() {
            let succs = g.get(n).map(Vec::as_slice).unwrap_or(&[]);
            if let Some(m) = succs.get(i) {
                stack.push((n, i + 1));
                if on_path.contains(m) {
                    return true;
                }
                if !done.contains(m) {
                    on_path.insert(m);
                    stack.push((m, 0));
                }
            } else {
                on_path.remove(n);
                done.insert(n);
            }
        }
    }
    false
}

pub fn desugar_for(s: &Stat) -> Option<Stat> {
    let (x, init, cond, step, body) = match s {
        Stat::ForUp(x, lo, hi, body) => (
            x,
            lo.clone(),
            Expr::binary(
                BinOp::Lt,
                Expr::var(x),
                Expr::binary(BinOp::Add, hi.clone(), Expr::Int(1)),
            ),
            BinOp::Add,
            body,
        ),
        Stat::ForDown(x, hi, lo, body) => (
            x,
            hi.clone(),
            Expr::binary(
                BinOp::Lt,
                lo.clone(),
                Expr::binary(BinOp::Add, Expr::var(x), Expr::Int(1)),
            ),
            BinOp::Sub,
            body,
        ),
        _ => return None,
    };
    let bump = Stat::Assign(LValue::Var(x.clone()), Expr::binary(step, Expr::var(x), Expr::Int(1)));
    Some(Stat::seq(
        Stat::Assign(LValue::Var(x.clone()), init),
        Stat::While(cond, Box::new(Stat::seq((**body).clone(), bump))),
    ))
}
