//! Canonical text form. Statements print on a single line; the output
//! re-parses to the same tree.

use super::ast::*;

const P_OR: u8 = 1;
const P_AND: u8 = 2;
const P_CMP: u8 = 3;
const P_ADD: u8 = 4;
const P_MUL: u8 = 5;
const P_UNARY: u8 = 6;

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Binary(op, ..) => match op {
            BinOp::Or => P_OR,
            BinOp::And => P_AND,
            BinOp::Lt | BinOp::Eq | BinOp::In => P_CMP,
            BinOp::Add | BinOp::Sub => P_ADD,
            BinOp::Mul | BinOp::Min => P_MUL,
        },
        Expr::Unary(UnOp::Not, inner) if matches!(**inner, Expr::Binary(BinOp::Eq, ..)) => P_CMP,
        Expr::Unary(..) => P_UNARY,
        Expr::Int(n) if *n < 0 => P_UNARY,
        _ => 7,
    }
}

fn wrap(e: &Expr, min: u8) -> String {
    let s = expr(e);
    if prec(e) < min {
        format!("({})", s)
    } else {
        s
    }
}

pub fn expr(e: &Expr) -> String {
    match e {
        Expr::Int(n) => n.to_string(),
        Expr::Bool(true) => "tt".into(),
        Expr::Bool(false) => "ff".into(),
        Expr::Nil => "nil".into(),
        Expr::Var(v) => v.clone(),
        Expr::Index(a, i) => format!("{}[{}]", wrap(a, 7), expr(i)),
        Expr::Field(o, f) => format!("{}.{}", wrap(o, 7), f),
        Expr::Unary(UnOp::Not, inner) => match &**inner {
            Expr::Binary(BinOp::Eq, l, r) => format!("{} != {}", wrap(l, P_ADD), wrap(r, P_ADD)),
            other => format!("!{}", wrap(other, P_UNARY)),
        },
        Expr::Unary(UnOp::Neg, inner) => match &**inner {
            // `-3` would re-parse as a literal, so keep the negation explicit.
            Expr::Int(n) if *n >= 0 => format!("-({})", n),
            other => format!("-{}", wrap(other, P_UNARY)),
        },
        Expr::Binary(op, l, r) => {
            let p = prec(e);
            let (sym, spaced) = match op {
                BinOp::Or => ("||", true),
                BinOp::And => ("&&", true),
                BinOp::Lt => ("<", true),
                BinOp::Eq => ("=", true),
                BinOp::In => ("in", true),
                BinOp::Add => ("+", false),
                BinOp::Sub => ("-", false),
                BinOp::Mul => ("*", false),
                BinOp::Min => ("min", true),
            };
            let (lmin, rmin) = if p == P_CMP { (p + 1, p + 1) } else { (p, p + 1) };
            let mut rs = wrap(r, rmin);
            // `a--1` lexes fine, but `a-(-1)` reads better and avoids `--`.
            if !spaced && rs.starts_with('-') {
                rs = format!("({})", rs);
            }
            if spaced {
                format!("{} {} {}", wrap(l, lmin), sym, rs)
            } else {
                format!("{}{}{}", wrap(l, lmin), sym, rs)
            }
        }
        Expr::SetLit(items) => {
            if items.is_empty() {
                "{}".into()
            } else {
                format!("{{{}}}", items.iter().map(expr).collect::<Vec<_>>().join(", "))
            }
        }
        Expr::SetRange(lo, hi) => format!("{{{} .. {}}}", expr(lo), expr(hi)),
        Expr::Intrinsic(i, args) => format!("{}({})", i.name(), args_list(args)),
    }
}

fn args_list(args: &[Expr]) -> String {
    args.iter().map(expr).collect::<Vec<_>>().join(", ")
}

pub fn lvalue(lv: &LValue) -> String {
    expr(&lv.to_expr())
}

pub fn ty(t: &Type) -> String {
    t.to_string()
}

fn decl(d: &LocalDecl) -> String {
    match &d.init {
        Some(e) => format!("{}: {} := {}", d.name, d.ty, expr(e)),
        None => format!("{}: {}", d.name, d.ty),
    }
}

pub fn stat(s: &Stat) -> String {
    match s {
        Stat::Seq(a, b) => {
            let left = if matches!(**a, Stat::Seq(..)) {
                format!("{{ {} }}", stat(a))
            } else {
                choice_operand(a)
            };
            format!("{}; {}", left, stat(b))
        }
        Stat::Choice(a, b) => {
            let left = match **a {
                Stat::Choice(..) => format!("{{ {} }}", stat(a)),
                _ => choice_operand(a),
            };
            format!("{} [] {}", left, choice_operand(b))
        }
        _ => atom(s),
    }
}

fn choice_operand(s: &Stat) -> String {
    match s {
        Stat::Seq(..) => format!("{{ {} }}", stat(s)),
        _ => stat(s),
    }
}

fn atom(s: &Stat) -> String {
    match s {
        Stat::Skip => "skip".into(),
        Stat::Assign(lv, e) => format!("{} := {}", lvalue(lv), expr(e)),
        Stat::RangeAssign(x, lo, hi) => format!("{} := [{} : {}]", x, expr(lo), expr(hi)),
        Stat::SelectIn(x, e) => format!("{} := select in {}", x, expr(e)),
        Stat::If(c, t) => format!("if {} then {} fi", expr(c), stat(t)),
        Stat::IfElse(c, t, e) => format!("if {} then {} else {} fi", expr(c), stat(t), stat(e)),
        Stat::While(c, b) => format!("while {} do {} elihw", expr(c), stat(b)),
        Stat::ForUp(x, lo, hi, b) => format!("for {} = {} to {} do {} rof", x, expr(lo), expr(hi), stat(b)),
        Stat::ForDown(x, hi, lo, b) => {
            format!("for {} = {} downto {} do {} rof", x, expr(hi), expr(lo), stat(b))
        }
        Stat::ForIn(x, e, b) => format!("for {} in {} do {} rof", x, expr(e), stat(b)),
        Stat::Call(p, args) => format!("{}({})", p, args_list(args)),
        Stat::AssignCall(lv, p, args) => format!("{} := {}({})", lvalue(lv), p, args_list(args)),
        Stat::New(lv, r, inits) => format!(
            "{} := new {}({})",
            lvalue(lv),
            r,
            inits
                .iter()
                .map(|(f, e)| format!("{}: {}", f, expr(e)))
                .collect::<Vec<_>>()
                .join(", ")
        ),
        Stat::Return(None) => "return".into(),
        Stat::Return(Some(e)) => format!("return {}", expr(e)),
        Stat::Block(b) => format!(
            "{}var {} begin {} end",
            if b.inline { "inline " } else { "" },
            b.decls.iter().map(decl).collect::<Vec<_>>().join(", "),
            stat(&b.body)
        ),
        Stat::Seq(..) | Stat::Choice(..) => format!("{{ {} }}", stat(s)),
    }
}

pub fn record(r: &RecordDecl) -> String {
    format!(
        "record {} {{ {} }}",
        r.name,
        r.fields
            .iter()
            .map(|(f, t)| format!("{}: {}", f, t))
            .collect::<Vec<_>>()
            .join("; ")
    )
}

pub fn proc_def(p: &ProcDef) -> String {
    let mut out = format!(
        "proc {}({})",
        p.name,
        p.params
            .iter()
            .map(|(n, t)| format!("{}: {}", n, t))
            .collect::<Vec<_>>()
            .join(", ")
    );
    if p.ret != Type::Void {
        out.push_str(&format!(": {}", p.ret));
    }
    if !p.locals.is_empty() {
        out.push_str(&format!(
            " var {}",
            p.locals
                .iter()
                .map(|(n, t)| format!("{}: {}", n, t))
                .collect::<Vec<_>>()
                .join(", ")
        ));
    }
    out.push_str(&format!(" begin {} end", stat(&p.body)));
    out
}

/// One declaration per line, then the statement.
pub fn pretty_print(p: &Program) -> String {
    let mut lines: Vec<String> = Vec::new();
    lines.extend(p.records.iter().map(record));
    lines.extend(p.procs.iter().map(proc_def));
    if let Some(b) = &p.body {
        lines.push(stat(b));
    }
    let mut out = lines.join("\n");
    out.push('\n');
    out
}
