//! Conservative read/write sets of statements.
//!
//! Writes through `a[i]` or `o.f` count as writes of the base identifier
//! `a`/`o`. Calls contribute every global their callee (transitively) reads
//! or writes, plus all identifiers of the actuals as both read and written,
//! since arrays and records are passed by reference.

use std::collections::BTreeSet;

use super::ast::*;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VarSets {
    pub reads: BTreeSet<Ident>,
    pub writes: BTreeSet<Ident>,
    pub heap_read: bool,
    pub heap_write: bool,
    pub has_call: bool,
}

impl VarSets {
    pub fn touches_heap(&self) -> bool {
        self.heap_read || self.heap_write
    }

    pub fn all(&self) -> BTreeSet<Ident> {
        self.reads.union(&self.writes).cloned().collect()
    }

    fn absorb(&mut self, other: VarSets) {
        self.reads.extend(other.reads);
        self.writes.extend(other.writes);
        self.heap_read |= other.heap_read;
        self.heap_write |= other.heap_write;
        self.has_call |= other.has_call;
    }

    fn remove_bound(&mut self, names: &[&str]) {
        for n in names {
            self.reads.remove(*n);
            self.writes.remove(*n);
        }
    }
}

fn expr_into(e: &Expr, vs: &mut VarSets) {
    e.visit_vars(&mut |v| {
        vs.reads.insert(v.to_string());
    });
    vs.heap_read |= e.reads_heap();
}

fn lvalue_into(lv: &LValue, vs: &mut VarSets) {
    match lv {
        LValue::Var(x) => {
            vs.writes.insert(x.clone());
        }
        LValue::Index(b, i) => {
            expr_into(b, vs);
            expr_into(i, vs);
            vs.writes.insert(lv.base().to_string());
            vs.heap_write = true;
        }
        LValue::Field(b, _) => {
            expr_into(b, vs);
            vs.writes.insert(lv.base().to_string());
            vs.heap_write = true;
        }
    }
}

struct Collector<'a> {
    ctx: &'a Program,
    visiting: Vec<Ident>,
}

impl Collector<'_> {
    fn proc_globals(&mut self, name: &str) -> VarSets {
        let mut vs = VarSets {
            heap_read: true,
            heap_write: true,
            has_call: true,
            ..Default::default()
        };
        if self.visiting.iter().any(|v| v == name) {
            return vs;
        }
        let Some(p) = self.ctx.proc(name) else {
            return vs;
        };
        self.visiting.push(name.to_string());
        let mut body = self.stat(&p.body);
        self.visiting.pop();
        let bound: Vec<&str> = p
            .params
            .iter()
            .chain(p.locals.iter())
            .map(|(n, _)| n.as_str())
            .collect();
        body.remove_bound(&bound);
        vs.absorb(body);
        vs
    }

    fn call(&mut self, name: &str, args: &[Expr], vs: &mut VarSets) {
        for a in args {
            expr_into(a, vs);
            a.visit_vars(&mut |v| {
                vs.writes.insert(v.to_string());
            });
        }
        let g = self.proc_globals(name);
        vs.absorb(g);
    }

    fn stat(&mut self, s: &Stat) -> VarSets {
        let mut vs = VarSets::default();
        match s {
            Stat::Skip | Stat::Return(None) => {}
            Stat::Return(Some(e)) => expr_into(e, &mut vs),
            Stat::Seq(a, b) | Stat::Choice(a, b) => {
                vs.absorb(self.stat(a));
                vs.absorb(self.stat(b));
            }
            Stat::Assign(lv, e) => {
                expr_into(e, &mut vs);
                lvalue_into(lv, &mut vs);
            }
            Stat::RangeAssign(x, lo, hi) => {
                expr_into(lo, &mut vs);
                expr_into(hi, &mut vs);
                vs.writes.insert(x.clone());
            }
            Stat::SelectIn(x, e) => {
                expr_into(e, &mut vs);
                vs.writes.insert(x.clone());
            }
            Stat::If(c, t) => {
                expr_into(c, &mut vs);
                vs.absorb(self.stat(t));
            }
            Stat::IfElse(c, t, e) => {
                expr_into(c, &mut vs);
                vs.absorb(self.stat(t));
                vs.absorb(self.stat(e));
            }
            Stat::While(c, b) => {
                expr_into(c, &mut vs);
                vs.absorb(self.stat(b));
            }
            Stat::ForUp(x, a, b, body) | Stat::ForDown(x, a, b, body) => {
                expr_into(a, &mut vs);
                expr_into(b, &mut vs);
                vs.reads.insert(x.clone());
                vs.writes.insert(x.clone());
                vs.absorb(self.stat(body));
            }
            Stat::ForIn(x, e, body) => {
                expr_into(e, &mut vs);
                vs.writes.insert(x.clone());
                vs.absorb(self.stat(body));
            }
            Stat::Call(p, args) => self.call(p, args, &mut vs),
            Stat::AssignCall(lv, p, args) => {
                self.call(p, args, &mut vs);
                lvalue_into(lv, &mut vs);
            }
            Stat::New(lv, _, inits) => {
                for (_, e) in inits {
                    expr_into(e, &mut vs);
                }
                lvalue_into(lv, &mut vs);
                vs.heap_write = true;
            }
            Stat::Block(blk) => {
                let mut inner = self.stat(&blk.body);
                let bound: Vec<&str> = blk.decls.iter().map(|d| d.name.as_str()).collect();
                inner.remove_bound(&bound);
                for d in &blk.decls {
                    if let Some(e) = &d.init {
                        expr_into(e, &mut vs);
                    }
                }
                vs.absorb(inner);
            }
        }
        vs
    }
}

/// Read/write sets of `s`, resolving calls against the procedures of `ctx`.
pub fn stat_vars(s: &Stat, ctx: &Program) -> VarSets {
    Collector {
        ctx,
        visiting: Vec::new(),
    }
    .stat(s)
}

/// Identifiers possibly read by `s`.
pub fn free_vars(s: &Stat, ctx: &Program) -> BTreeSet<Ident> {
    stat_vars(s, ctx).reads
}

/// Identifiers possibly written by `s`.
pub fn write_vars(s: &Stat, ctx: &Program) -> BTreeSet<Ident> {
    stat_vars(s, ctx).writes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parser::{parse_program, parse_stat};

    fn set(xs: &[&str]) -> BTreeSet<Ident> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn simple_assignments() {
        let ctx = Program::default();
        let s = parse_stat("x := y+1").unwrap();
        assert_eq!(free_vars(&s, &ctx), set(&["y"]));
        assert_eq!(write_vars(&s, &ctx), set(&["x"]));
        let s = parse_stat("skip").unwrap();
        assert!(free_vars(&s, &ctx).is_empty());
        assert!(write_vars(&s, &ctx).is_empty());
        let s = parse_stat("a[i] := 0").unwrap();
        assert_eq!(free_vars(&s, &ctx), set(&["a", "i"]));
        assert_eq!(write_vars(&s, &ctx), set(&["a"]));
    }

    #[test]
    fn block_locals_are_hidden() {
        let ctx = Program::default();
        let s = parse_stat("var t: int := a begin b := t end").unwrap();
        assert_eq!(free_vars(&s, &ctx), set(&["a"]));
        assert_eq!(write_vars(&s, &ctx), set(&["b"]));
    }

    #[test]
    fn calls_include_callee_globals() {
        let ctx = parse_program("proc f(p: int) var q: int begin q := p; g := q end").unwrap();
        let s = parse_stat("f(x)").unwrap();
        let vs = stat_vars(&s, &ctx);
        assert!(vs.writes.contains("g"));
        assert!(vs.reads.contains("x"));
        assert!(!vs.writes.contains("q"));
        assert!(vs.has_call);
    }

    #[test]
    fn recursive_calls_terminate() {
        let ctx = parse_program("proc f(p: int) begin if 0 < p then f(p-1); g := p fi end").unwrap();
        let vs = stat_vars(&parse_stat("f(3)").unwrap(), &ctx);
        assert!(vs.writes.contains("g"));
    }
}
