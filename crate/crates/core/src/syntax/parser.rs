//! Recursive-descent parser for `.opa` text.

use std::collections::BTreeSet;

use super::ast::*;
use super::lexer::{lex, Pos, Tok, Token};
use super::SyntaxError;

const STAT_END: &[&str] = &["}", "fi", "else", "elihw", "rof", "end"];

struct Parser {
    toks: Vec<Token>,
    idx: usize,
    expected: BTreeSet<String>,
}

type PResult<T> = Result<T, SyntaxError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.idx].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.idx + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.idx].pos
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.idx].tok.clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        self.expected.clear();
        t
    }

    fn note(&mut self, what: &str) {
        self.expected.insert(what.to_string());
    }

    /// Consumes a keyword or symbol if present, recording it as expected otherwise.
    fn eat(&mut self, s: &str) -> bool {
        let hit = matches!(self.peek(), Tok::Kw(k) if *k == s) || matches!(self.peek(), Tok::Sym(k) if *k == s);
        if hit {
            self.bump();
        } else {
            self.note(&format!("`{}`", s));
        }
        hit
    }

    fn at(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Kw(k) if *k == s) || matches!(self.peek(), Tok::Sym(k) if *k == s)
    }

    fn expect(&mut self, s: &str) -> PResult<()> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.error())
        }
    }

    fn error(&self) -> SyntaxError {
        SyntaxError::Parse {
            pos: self.pos(),
            expected: self.expected.iter().cloned().collect(),
            found: self.peek().to_string(),
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        if let Tok::Ident(s) = self.peek() {
            let s = s.clone();
            self.bump();
            Ok(s)
        } else {
            self.note("identifier");
            Err(self.error())
        }
    }

    // ---- declarations ----

    fn program(&mut self) -> PResult<Program> {
        let mut prog = Program::default();
        loop {
            if self.at("record") {
                prog.records.push(self.record()?);
            } else if self.at("proc") {
                prog.procs.push(self.proc_def()?);
            } else {
                self.note("`record`");
                self.note("`proc`");
                break;
            }
        }
        if !matches!(self.peek(), Tok::Eof) {
            prog.body = Some(self.stat()?);
        }
        if !matches!(self.peek(), Tok::Eof) {
            self.note("end of input");
            return Err(self.error());
        }
        Ok(prog)
    }

    fn record(&mut self) -> PResult<RecordDecl> {
        self.expect("record")?;
        let name = self.ident()?;
        self.expect("{")?;
        let mut fields = Vec::new();
        while !self.eat("}") {
            let f = self.ident()?;
            self.expect(":")?;
            let ty = self.ty()?;
            fields.push((f, ty));
            if !self.eat(";") {
                self.expect("}")?;
                break;
            }
        }
        Ok(RecordDecl { name, fields })
    }

    fn ty(&mut self) -> PResult<Type> {
        let mut t = match self.peek().clone() {
            Tok::Kw("int") => Type::Int,
            Tok::Kw("bool") => Type::Bool,
            Tok::Kw("set") => Type::Set,
            Tok::Kw("void") => Type::Void,
            Tok::Ident(s) => Type::Ref(s),
            _ => {
                self.note("type");
                return Err(self.error());
            }
        };
        self.bump();
        while self.eat("[]") {
            t = Type::Array(Box::new(t));
        }
        Ok(t)
    }

    fn proc_def(&mut self) -> PResult<ProcDef> {
        self.expect("proc")?;
        let name = self.ident()?;
        self.expect("(")?;
        let mut params = Vec::new();
        if !self.eat(")") {
            loop {
                let p = self.ident()?;
                self.expect(":")?;
                params.push((p, self.ty()?));
                if self.eat(")") {
                    break;
                }
                self.expect(",")?;
            }
        }
        let ret = if self.eat(":") { self.ty()? } else { Type::Void };
        let mut locals = Vec::new();
        if self.eat("var") {
            for d in self.decls()? {
                if d.init.is_some() {
                    return Err(SyntaxError::Type {
                        node: format!("proc {}", name),
                        msg: format!("procedure local `{}` cannot have an initialiser", d.name),
                    });
                }
                locals.push((d.name, d.ty));
            }
        }
        self.expect("begin")?;
        let body = self.stat()?;
        self.expect("end")?;
        Ok(ProcDef {
            name,
            params,
            ret,
            locals,
            body,
        })
    }

    fn decls(&mut self) -> PResult<Vec<LocalDecl>> {
        let mut out = Vec::new();
        loop {
            let name = self.ident()?;
            self.expect(":")?;
            let ty = self.ty()?;
            let init = if self.eat(":=") { Some(self.expr()?) } else { None };
            out.push(LocalDecl { name, ty, init });
            if !self.eat(",") {
                break;
            }
        }
        Ok(out)
    }

    // ---- statements ----

    fn stat(&mut self) -> PResult<Stat> {
        let first = self.choice()?;
        if self.eat(";") {
            if self.at_stat_end() {
                return Ok(first);
            }
            let rest = self.stat()?;
            return Ok(Stat::seq(first, rest));
        }
        Ok(first)
    }

    fn at_stat_end(&self) -> bool {
        matches!(self.peek(), Tok::Eof) || STAT_END.iter().any(|s| self.at(s))
    }

    fn choice(&mut self) -> PResult<Stat> {
        let first = self.atom()?;
        if self.eat("[]") {
            let rest = self.choice()?;
            return Ok(Stat::Choice(Box::new(first), Box::new(rest)));
        }
        Ok(first)
    }

    fn atom(&mut self) -> PResult<Stat> {
        match self.peek().clone() {
            Tok::Kw("skip") => {
                self.bump();
                Ok(Stat::Skip)
            }
            Tok::Sym("{") => {
                self.bump();
                let s = self.stat()?;
                self.expect("}")?;
                Ok(s)
            }
            Tok::Kw("if") => self.if_stat(),
            Tok::Kw("while") => {
                self.bump();
                let c = self.expr()?;
                self.expect("do")?;
                let body = self.stat()?;
                self.expect("elihw")?;
                Ok(Stat::While(c, Box::new(body)))
            }
            Tok::Kw("for") => self.for_stat(),
            Tok::Kw("return") => {
                self.bump();
                if self.at_stat_end() || self.at(";") || self.at("[]") {
                    Ok(Stat::Return(None))
                } else {
                    Ok(Stat::Return(Some(self.expr()?)))
                }
            }
            Tok::Kw("var") => self.block(false),
            Tok::Kw("inline") => {
                self.bump();
                self.block(true)
            }
            Tok::Ident(_) => self.ident_stat(),
            _ => {
                for w in ["skip", "{", "if", "while", "for", "return", "var", "inline"] {
                    self.note(&format!("`{}`", w));
                }
                self.note("identifier");
                Err(self.error())
            }
        }
    }

    fn if_stat(&mut self) -> PResult<Stat> {
        self.expect("if")?;
        let c = self.expr()?;
        self.expect("then")?;
        let t = self.stat()?;
        if self.eat("else") {
            let e = self.stat()?;
            self.expect("fi")?;
            Ok(Stat::IfElse(c, Box::new(t), Box::new(e)))
        } else {
            self.expect("fi")?;
            Ok(Stat::If(c, Box::new(t)))
        }
    }

    fn for_stat(&mut self) -> PResult<Stat> {
        self.expect("for")?;
        let x = self.ident()?;
        if self.eat("in") {
            let s = self.expr()?;
            self.expect("do")?;
            let body = self.stat()?;
            self.expect("rof")?;
            return Ok(Stat::ForIn(x, s, Box::new(body)));
        }
        self.expect("=")?;
        let a = self.expr()?;
        let up = if self.eat("to") {
            true
        } else if self.eat("downto") {
            false
        } else {
            return Err(self.error());
        };
        let b = self.expr()?;
        self.expect("do")?;
        let body = self.stat()?;
        self.expect("rof")?;
        Ok(if up {
            Stat::ForUp(x, a, b, Box::new(body))
        } else {
            Stat::ForDown(x, a, b, Box::new(body))
        })
    }

    fn block(&mut self, inline: bool) -> PResult<Stat> {
        self.expect("var")?;
        let decls = self.decls()?;
        self.expect("begin")?;
        let body = self.stat()?;
        self.expect("end")?;
        Ok(Stat::Block(Block {
            decls,
            body: Box::new(body),
            inline,
        }))
    }

    fn ident_stat(&mut self) -> PResult<Stat> {
        if let (Tok::Ident(name), Tok::Sym("(")) = (self.peek().clone(), self.peek_at(1).clone()) {
            if Intrinsic::lookup(&name).is_none() {
                self.bump();
                let args = self.args()?;
                return Ok(Stat::Call(name, args));
            }
        }
        let start = self.pos();
        let target = self.postfix()?;
        let lv = LValue::from_expr(&target).ok_or(SyntaxError::Parse {
            pos: start,
            expected: vec!["assignable location".into()],
            found: "expression".into(),
        })?;
        self.expect(":=")?;
        match self.peek().clone() {
            Tok::Sym("[") => {
                self.bump();
                let lo = self.expr()?;
                self.expect(":")?;
                let hi = self.expr()?;
                self.expect("]")?;
                match lv {
                    LValue::Var(x) => Ok(Stat::RangeAssign(x, lo, hi)),
                    _ => Err(SyntaxError::Type {
                        node: format!("{} := [..]", super::pretty::lvalue(&lv)),
                        msg: "range assignment needs a plain variable".into(),
                    }),
                }
            }
            Tok::Kw("select") => {
                self.bump();
                self.expect("in")?;
                let s = self.expr()?;
                match lv {
                    LValue::Var(x) => Ok(Stat::SelectIn(x, s)),
                    _ => Err(SyntaxError::Type {
                        node: format!("{} := select in ..", super::pretty::lvalue(&lv)),
                        msg: "select needs a plain variable".into(),
                    }),
                }
            }
            Tok::Kw("new") => {
                self.bump();
                let rec = self.ident()?;
                self.expect("(")?;
                let mut inits = Vec::new();
                if !self.eat(")") {
                    loop {
                        let f = self.ident()?;
                        self.expect(":")?;
                        inits.push((f, self.expr()?));
                        if self.eat(")") {
                            break;
                        }
                        self.expect(",")?;
                    }
                }
                Ok(Stat::New(lv, rec, inits))
            }
            Tok::Ident(name) if Intrinsic::lookup(&name).is_none() && matches!(self.peek_at(1), Tok::Sym("(")) => {
                self.bump();
                let args = self.args()?;
                Ok(Stat::AssignCall(lv, name, args))
            }
            _ => {
                self.note("`[`");
                self.note("`select`");
                self.note("`new`");
                Ok(Stat::Assign(lv, self.expr()?))
            }
        }
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        self.expect("(")?;
        let mut args = Vec::new();
        if self.eat(")") {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.eat(")") {
                return Ok(args);
            }
            self.expect(",")?;
        }
    }

    // ---- expressions ----

    fn expr(&mut self) -> PResult<Expr> {
        let mut l = self.and_expr()?;
        while self.eat("||") {
            let r = self.and_expr()?;
            l = Expr::binary(BinOp::Or, l, r);
        }
        Ok(l)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut l = self.cmp_expr()?;
        while self.eat("&&") {
            let r = self.cmp_expr()?;
            l = Expr::binary(BinOp::And, l, r);
        }
        Ok(l)
    }

    fn cmp_expr(&mut self) -> PResult<Expr> {
        let l = self.add_expr()?;
        if self.eat("<") {
            return Ok(Expr::binary(BinOp::Lt, l, self.add_expr()?));
        }
        if self.eat("=") {
            return Ok(Expr::binary(BinOp::Eq, l, self.add_expr()?));
        }
        if self.eat("!=") {
            return Ok(Expr::not(Expr::binary(BinOp::Eq, l, self.add_expr()?)));
        }
        if self.eat("in") {
            return Ok(Expr::binary(BinOp::In, l, self.add_expr()?));
        }
        Ok(l)
    }

    fn add_expr(&mut self) -> PResult<Expr> {
        let mut l = self.mul_expr()?;
        loop {
            if self.eat("+") {
                l = Expr::binary(BinOp::Add, l, self.mul_expr()?);
            } else if self.eat("-") {
                l = Expr::binary(BinOp::Sub, l, self.mul_expr()?);
            } else {
                return Ok(l);
            }
        }
    }

    fn mul_expr(&mut self) -> PResult<Expr> {
        let mut l = self.unary()?;
        loop {
            if self.eat("*") {
                l = Expr::binary(BinOp::Mul, l, self.unary()?);
            } else if self.eat("min") {
                l = Expr::binary(BinOp::Min, l, self.unary()?);
            } else {
                return Ok(l);
            }
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat("-") {
            if let Tok::Int(n) = *self.peek() {
                self.bump();
                return Ok(Expr::Int(-n));
            }
            return Ok(Expr::Unary(UnOp::Neg, Box::new(self.unary()?)));
        }
        if self.eat("!") {
            return Ok(Expr::Unary(UnOp::Not, Box::new(self.unary()?)));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        loop {
            if self.eat("[") {
                let i = self.expr()?;
                self.expect("]")?;
                e = Expr::Index(Box::new(e), Box::new(i));
            } else if self.eat(".") {
                let f = self.ident()?;
                e = Expr::Field(Box::new(e), f);
            } else {
                return Ok(e);
            }
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Int(n))
            }
            Tok::Kw("tt") | Tok::Kw("true") => {
                self.bump();
                Ok(Expr::Bool(true))
            }
            Tok::Kw("ff") | Tok::Kw("false") => {
                self.bump();
                Ok(Expr::Bool(false))
            }
            Tok::Kw("nil") => {
                self.bump();
                Ok(Expr::Nil)
            }
            Tok::Ident(name) => {
                self.bump();
                if self.at("(") {
                    let Some(intr) = Intrinsic::lookup(&name) else {
                        return Err(SyntaxError::Type {
                            node: format!("{}(..)", name),
                            msg: "procedure calls are not allowed inside expressions".into(),
                        });
                    };
                    let args = self.args()?;
                    if args.len() != intr.arity() {
                        return Err(SyntaxError::Type {
                            node: format!("{}(..)", name),
                            msg: format!("intrinsic takes {} arguments, got {}", intr.arity(), args.len()),
                        });
                    }
                    return Ok(Expr::Intrinsic(intr, args));
                }
                Ok(Expr::Var(name))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            Tok::Sym("{") => {
                self.bump();
                if self.eat("}") {
                    return Ok(Expr::SetLit(vec![]));
                }
                let first = self.expr()?;
                if self.eat("..") {
                    let hi = self.expr()?;
                    self.expect("}")?;
                    return Ok(Expr::SetRange(Box::new(first), Box::new(hi)));
                }
                let mut items = vec![first];
                while self.eat(",") {
                    items.push(self.expr()?);
                }
                self.expect("}")?;
                Ok(Expr::SetLit(items))
            }
            _ => {
                for w in [
                    "integer",
                    "identifier",
                    "`(`",
                    "`{`",
                    "`tt`",
                    "`ff`",
                    "`nil`",
                    "`-`",
                    "`!`",
                ] {
                    self.note(w);
                }
                Err(self.error())
            }
        }
    }
}

fn tokens(src: &str) -> PResult<Vec<Token>> {
    lex(src).map_err(|e| SyntaxError::Lex { pos: e.pos, msg: e.msg })
}

/// Parses a complete `.opa` file: records, procedures, optional statement.
pub fn parse_program(src: &str) -> PResult<Program> {
    let mut p = Parser {
        toks: tokens(src)?,
        idx: 0,
        expected: BTreeSet::new(),
    };
    p.program()
}

/// Parses a single statement (the whole input must be consumed).
pub fn parse_stat(src: &str) -> PResult<Stat> {
    let mut p = Parser {
        toks: tokens(src)?,
        idx: 0,
        expected: BTreeSet::new(),
    };
    let s = p.stat()?;
    if !matches!(p.peek(), Tok::Eof) {
        p.note("end of input");
        return Err(p.error());
    }
    Ok(s)
}

/// Parses a single expression (the whole input must be consumed).
pub fn parse_expr(src: &str) -> PResult<Expr> {
    let mut p = Parser {
        toks: tokens(src)?,
        idx: 0,
        expected: BTreeSet::new(),
    };
    let e = p.expr()?;
    if !matches!(p.peek(), Tok::Eof) {
        p.note("end of input");
        return Err(p.error());
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assign(x: &str, n: i64) -> Stat {
        Stat::Assign(LValue::Var(x.into()), Expr::Int(n))
    }

    #[test]
    fn skip() {
        assert_eq!(parse_stat("skip").unwrap(), Stat::Skip);
    }

    #[test]
    fn choice_of_assignments() {
        assert_eq!(
            parse_stat("x := 3 [] x := 5").unwrap(),
            Stat::Choice(Box::new(assign("x", 3)), Box::new(assign("x", 5)))
        );
    }

    #[test]
    fn truncated_assignment_fails_at_end() {
        match parse_stat("x :=") {
            Err(SyntaxError::Parse { pos, found, expected }) => {
                assert_eq!(pos, Pos { line: 1, col: 5 });
                assert_eq!(found, "end of input");
                assert!(expected.contains(&"identifier".to_string()));
            }
            other => panic!("unexpected {:?}", other),
        }
    }

    #[test]
    fn choice_binds_tighter_than_seq() {
        let s = parse_stat("x := 1 [] x := 2; y := 3").unwrap();
        assert!(matches!(s, Stat::Seq(ref a, _) if matches!(**a, Stat::Choice(..))));
    }

    #[test]
    fn range_assign_and_select() {
        assert_eq!(
            parse_stat("i := [0 : n-2]").unwrap(),
            Stat::RangeAssign(
                "i".into(),
                Expr::Int(0),
                Expr::binary(BinOp::Sub, Expr::var("n"), Expr::Int(2))
            )
        );
        assert!(matches!(parse_stat("x := select in s").unwrap(), Stat::SelectIn(..)));
    }

    #[test]
    fn calls_and_intrinsics() {
        assert!(matches!(parse_stat("sort(b, m)").unwrap(), Stat::Call(..)));
        assert!(matches!(parse_stat("v := listRev(l)").unwrap(), Stat::AssignCall(..)));
        assert!(matches!(
            parse_stat("j := findMin(a, {0 .. i-1})").unwrap(),
            Stat::Assign(_, Expr::Intrinsic(Intrinsic::FindMin, _))
        ));
        assert!(parse_expr("findMin(a)").is_err());
        assert!(parse_expr("p(a)").is_err());
    }

    #[test]
    fn trailing_semicolon_allowed() {
        assert_eq!(parse_stat("{ skip; }").unwrap(), Stat::Skip);
    }

    #[test]
    fn program_with_decls() {
        let p = parse_program(
            "record Node { p: Node }\n\
             proc f(h: Node): Node var s: Node begin s := h; return s end\n\
             v := f(l)",
        )
        .unwrap();
        assert_eq!(p.records.len(), 1);
        assert_eq!(p.procs[0].ret, Type::Ref("Node".into()));
        assert!(p.body.is_some());
    }

    #[test]
    fn not_equal_desugars() {
        assert_eq!(
            parse_expr("i != n-1").unwrap(),
            Expr::not(Expr::binary(
                BinOp::Eq,
                Expr::var("i"),
                Expr::binary(BinOp::Sub, Expr::var("n"), Expr::Int(1))
            ))
        );
    }
}
