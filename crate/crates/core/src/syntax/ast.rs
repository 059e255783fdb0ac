//! Abstract syntax of the annotation language.
//!
//! Statement sequences are binary (`Seq`) as parsed; judgments in the proof
//! kernel compare programs after [`Stat::flatten_seq`] so that the
//! association of `;` never matters there.

use std::fmt;

pub type Ident = String;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Int,
    Bool,
    Set,
    Array(Box<Type>),
    Ref(Ident),
    Void,
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int => write!(f, "int"),
            Type::Bool => write!(f, "bool"),
            Type::Set => write!(f, "set"),
            Type::Array(elem) => write!(f, "{}[]", elem),
            Type::Ref(name) => write!(f, "{}", name),
            Type::Void => write!(f, "void"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

/// `Add`/`Sub` double as set union/difference; the operand types decide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Min,
    Lt,
    Eq,
    And,
    Or,
    In,
}

/// Pure functions available inside expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Intrinsic {
    /// `findMin(a, excluded)`: lowest index of a minimal element whose index is not excluded.
    FindMin,
    /// `findRank(a, r)`: index of the element of rank `r`, ties broken by index.
    FindRank,
    /// `below(s, x)`: elements of `s` smaller than `x`.
    Below,
    /// `above(s, x)`: elements of `s` greater than `x`.
    Above,
}

impl Intrinsic {
    pub const ALL: [Intrinsic; 4] = [
        Intrinsic::FindMin,
        Intrinsic::FindRank,
        Intrinsic::Below,
        Intrinsic::Above,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Intrinsic::FindMin => "findMin",
            Intrinsic::FindRank => "findRank",
            Intrinsic::Below => "below",
            Intrinsic::Above => "above",
        }
    }

    pub fn arity(self) -> usize {
        2
    }

    pub fn lookup(name: &str) -> Option<Intrinsic> {
        Intrinsic::ALL.into_iter().find(|i| i.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Nil,
    Var(Ident),
    Index(Box<Expr>, Box<Expr>),
    Field(Box<Expr>, Ident),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    SetLit(Vec<Expr>),
    SetRange(Box<Expr>, Box<Expr>),
    Intrinsic(Intrinsic, Vec<Expr>),
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn binary(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Expr {
        Expr::Unary(UnOp::Not, Box::new(e))
    }

    /// Calls `f` on every variable name the expression reads.
    pub fn visit_vars(&self, f: &mut impl FnMut(&str)) {
        match self {
            Expr::Int(_) | Expr::Bool(_) | Expr::Nil => {}
            Expr::Var(v) => f(v),
            Expr::Index(a, i) => {
                a.visit_vars(f);
                i.visit_vars(f);
            }
            Expr::Field(o, _) => o.visit_vars(f),
            Expr::Unary(_, e) => e.visit_vars(f),
            Expr::Binary(_, l, r) | Expr::SetRange(l, r) => {
                l.visit_vars(f);
                r.visit_vars(f);
            }
            Expr::SetLit(es) | Expr::Intrinsic(_, es) => es.iter().for_each(|e| e.visit_vars(f)),
        }
    }

    /// True when evaluating the expression may dereference the heap.
    pub fn reads_heap(&self) -> bool {
        match self {
            Expr::Int(_) | Expr::Bool(_) | Expr::Nil | Expr::Var(_) => false,
            Expr::Index(..) | Expr::Field(..) | Expr::Intrinsic(..) => true,
            Expr::Unary(_, e) => e.reads_heap(),
            Expr::Binary(_, l, r) | Expr::SetRange(l, r) => l.reads_heap() || r.reads_heap(),
            Expr::SetLit(es) => es.iter().any(Expr::reads_heap),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LValue {
    Var(Ident),
    Index(Expr, Expr),
    Field(Expr, Ident),
}

impl LValue {
    /// The identifier at the root of the access path (`a` for `a[i].f`).
    pub fn base(&self) -> &str {
        fn root(e: &Expr) -> Option<&str> {
            match e {
                Expr::Var(v) => Some(v),
                Expr::Index(b, _) | Expr::Field(b, _) => root(b),
                _ => None,
            }
        }
        match self {
            LValue::Var(v) => v,
            LValue::Index(b, _) | LValue::Field(b, _) => root(b).unwrap_or(""),
        }
    }

    pub fn to_expr(&self) -> Expr {
        match self {
            LValue::Var(v) => Expr::Var(v.clone()),
            LValue::Index(b, i) => Expr::Index(Box::new(b.clone()), Box::new(i.clone())),
            LValue::Field(b, f) => Expr::Field(Box::new(b.clone()), f.clone()),
        }
    }

    pub fn from_expr(e: &Expr) -> Option<LValue> {
        match e {
            Expr::Var(v) => Some(LValue::Var(v.clone())),
            Expr::Index(b, i) => Some(LValue::Index((**b).clone(), (**i).clone())),
            Expr::Field(b, f) => Some(LValue::Field((**b).clone(), f.clone())),
            _ => None,
        }
    }

    pub fn is_heap(&self) -> bool {
        !matches!(self, LValue::Var(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LocalDecl {
    pub name: Ident,
    pub ty: Type,
    pub init: Option<Expr>,
}

/// A scope introducing local variables. Initialisers are evaluated in the
/// enclosing scope, all before any binding. An `inline` block additionally
/// absorbs `return`, which is how inlined procedure bodies are represented.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Block {
    pub decls: Vec<LocalDecl>,
    pub body: Box<Stat>,
    pub inline: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Stat {
    Skip,
    Seq(Box<Stat>, Box<Stat>),
    Choice(Box<Stat>, Box<Stat>),
    Assign(LValue, Expr),
    RangeAssign(Ident, Expr, Expr),
    SelectIn(Ident, Expr),
    If(Expr, Box<Stat>),
    IfElse(Expr, Box<Stat>, Box<Stat>),
    While(Expr, Box<Stat>),
    /// `for x = lo to hi do body rof`
    ForUp(Ident, Expr, Expr, Box<Stat>),
    /// `for x = hi downto lo do body rof`
    ForDown(Ident, Expr, Expr, Box<Stat>),
    ForIn(Ident, Expr, Box<Stat>),
    Call(Ident, Vec<Expr>),
    AssignCall(LValue, Ident, Vec<Expr>),
    New(LValue, Ident, Vec<(Ident, Expr)>),
    Return(Option<Expr>),
    Block(Block),
}

impl Stat {
    pub fn seq(a: Stat, b: Stat) -> Stat {
        Stat::Seq(Box::new(a), Box::new(b))
    }

    /// Flattens nested `Seq` nodes into the list of their components.
    pub fn flatten_seq(&self) -> Vec<&Stat> {
        let mut out = Vec::new();
        fn go<'a>(s: &'a Stat, out: &mut Vec<&'a Stat>) {
            match s {
                Stat::Seq(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                other => out.push(other),
            }
        }
        go(self, &mut out);
        out
    }

    /// Builds a right-nested sequence. An empty list is `skip`.
    pub fn from_seq_list(items: Vec<Stat>) -> Stat {
        let mut iter = items.into_iter().rev();
        let Some(mut acc) = iter.next() else {
            return Stat::Skip;
        };
        for s in iter {
            acc = Stat::seq(s, acc);
        }
        acc
    }

    /// Canonical form modulo associativity of `;`, applied recursively.
    pub fn normalize(&self) -> Stat {
        let items = self
            .flatten_seq()
            .into_iter()
            .map(|s| s.map_children(Stat::normalize))
            .collect();
        Stat::from_seq_list(items)
    }

    /// Rebuilds this node with `f` applied to each direct child statement.
    /// Sequence nodes are treated as a unit by callers, so `Seq` maps both sides.
    pub fn map_children(&self, f: impl Fn(&Stat) -> Stat) -> Stat {
        match self {
            Stat::Seq(a, b) => Stat::seq(f(a), f(b)),
            Stat::Choice(a, b) => Stat::Choice(Box::new(f(a)), Box::new(f(b))),
            Stat::If(c, t) => Stat::If(c.clone(), Box::new(f(t))),
            Stat::IfElse(c, t, e) => Stat::IfElse(c.clone(), Box::new(f(t)), Box::new(f(e))),
            Stat::While(c, b) => Stat::While(c.clone(), Box::new(f(b))),
            Stat::ForUp(x, lo, hi, b) => Stat::ForUp(x.clone(), lo.clone(), hi.clone(), Box::new(f(b))),
            Stat::ForDown(x, hi, lo, b) => Stat::ForDown(x.clone(), hi.clone(), lo.clone(), Box::new(f(b))),
            Stat::ForIn(x, s, b) => Stat::ForIn(x.clone(), s.clone(), Box::new(f(b))),
            Stat::Block(blk) => Stat::Block(Block {
                decls: blk.decls.clone(),
                body: Box::new(f(&blk.body)),
                inline: blk.inline,
            }),
            other => other.clone(),
        }
    }

    /// Direct child statements, in the order used by rewrite paths.
    pub fn children(&self) -> Vec<&Stat> {
        match self {
            Stat::Seq(a, b) | Stat::Choice(a, b) | Stat::IfElse(_, a, b) => vec![a, b],
            Stat::If(_, b)
            | Stat::While(_, b)
            | Stat::ForUp(_, _, _, b)
            | Stat::ForDown(_, _, _, b)
            | Stat::ForIn(_, _, b) => vec![b],
            Stat::Block(blk) => vec![&blk.body],
            _ => vec![],
        }
    }

    /// Replaces the `idx`-th child (same numbering as [`Stat::children`]).
    pub fn with_child(&self, idx: usize, new: Stat) -> Option<Stat> {
        let counter = std::cell::Cell::new(0usize);
        if idx >= self.children().len() {
            return None;
        }
        Some(self.map_children(|c| {
            let i = counter.get();
            counter.set(i + 1);
            if i == idx {
                new.clone()
            } else {
                c.clone()
            }
        }))
    }

    /// True if no `Choice`, `RangeAssign` or `SelectIn` occurs anywhere,
    /// including in the bodies of the given procedures it may call.
    pub fn is_syntactically_deterministic(&self) -> bool {
        match self {
            Stat::Choice(..) | Stat::RangeAssign(..) | Stat::SelectIn(..) => false,
            other => other.children().iter().all(|c| c.is_syntactically_deterministic()),
        }
    }

    /// Names of procedures called anywhere in the statement.
    pub fn called_procs(&self) -> Vec<Ident> {
        let mut out = Vec::new();
        fn go(s: &Stat, out: &mut Vec<Ident>) {
            match s {
                Stat::Call(n, _) | Stat::AssignCall(_, n, _) => {
                    if !out.contains(n) {
                        out.push(n.clone())
                    }
                }
                other => other.children().into_iter().for_each(|c| go(c, out)),
            }
        }
        go(self, &mut out);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RecordDecl {
    pub name: Ident,
    pub fields: Vec<(Ident, Type)>,
}

impl RecordDecl {
    pub fn field_index(&self, name: &str) -> Option<usize> {
        self.fields.iter().position(|(f, _)| f == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProcDef {
    pub name: Ident,
    pub params: Vec<(Ident, Type)>,
    pub ret: Type,
    pub locals: Vec<(Ident, Type)>,
    pub body: Stat,
}

impl ProcDef {
    /// Direct recursion: the body mentions the procedure's own name.
    pub fn mentions_self(&self) -> bool {
        self.body.called_procs().contains(&self.name)
    }
}

/// A parsed `.opa` file.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Program {
    pub records: Vec<RecordDecl>,
    pub procs: Vec<ProcDef>,
    pub body: Option<Stat>,
}

impl Program {
    pub fn record(&self, name: &str) -> Option<&RecordDecl> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn proc(&self, name: &str) -> Option<&ProcDef> {
        self.procs.iter().find(|p| p.name == name)
    }

    /// Whether `name` can reach itself through the call graph.
    pub fn is_recursive(&self, name: &str) -> bool {
        let mut seen: Vec<&str> = Vec::new();
        let mut stack: Vec<&str> = match self.proc(name) {
            Some(p) => p
                .body
                .called_procs()
                .iter()
                .filter_map(|c| self.proc(c))
                .map(|p| p.name.as_str())
                .collect(),
            None => return false,
        };
        while let Some(n) = stack.pop() {
            if n == name {
                return true;
            }
            if seen.contains(&n) {
                continue;
            }
            seen.push(n);
            if let Some(p) = self.proc(n) {
                for c in p.body.called_procs() {
                    if let Some(q) = self.proc(&c) {
                        stack.push(q.name.as_str());
                    }
                }
            }
        }
        false
    }

    /// Merges declarations from another file. Identical duplicates are fine;
    /// conflicting ones are reported by name.
    pub fn merge_decls(&mut self, other: &Program) -> Result<(), String> {
        for r in &other.records {
            match self.record(&r.name) {
                Some(existing) if existing != r => {
                    return Err(format!("conflicting declarations of record `{}`", r.name))
                }
                Some(_) => {}
                None => self.records.push(r.clone()),
            }
        }
        for p in &other.procs {
            match self.proc(&p.name) {
                Some(existing) if existing != p => {
                    return Err(format!("conflicting declarations of procedure `{}`", p.name))
                }
                Some(_) => {}
                None => self.procs.push(p.clone()),
            }
        }
        Ok(())
    }
}
