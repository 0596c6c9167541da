//! Recursive-descent parser producing [`Program`] trees.

use super::ast::*;
use super::lexer::{tokenize, tokenize_fragment, Tok, Token};
use super::ParseError;

pub fn parse(source: &str) -> Result<Program, ParseError> {
    let toks = tokenize(source)?;
    let mut p = Parser { toks, pos: 0 };
    let mut prog = p.program()?;
    normalize_elif(&mut prog.body);
    Ok(prog)
}

/// Parses one expression spanning the whole fragment.
pub fn parse_expr(fragment: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::fragment(fragment)?;
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

/// Parses a comma-separated list of expressions (possibly empty).
pub fn parse_expr_list(fragment: &str) -> Result<Vec<Expr>, ParseError> {
    let mut p = Parser::fragment(fragment)?;
    let mut out = Vec::new();
    if p.at_eof() {
        return Ok(out);
    }
    loop {
        out.push(p.expr()?);
        if !p.eat_op(",") {
            break;
        }
    }
    p.expect_eof()?;
    Ok(out)
}

/// Parses a single simple statement (assignment, augmented assignment,
/// expression statement, print call or return).
pub fn parse_simple_stmt(fragment: &str) -> Result<Stmt, ParseError> {
    let mut p = Parser::fragment(fragment)?;
    let s = if p.peek_kw("return") {
        p.bump();
        if p.at_eof() {
            Stmt::Return(None)
        } else {
            Stmt::Return(Some(p.expr()?))
        }
    } else {
        p.simple_stmt()?
    };
    p.expect_eof()?;
    Ok(s)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

const AUG_OPS: &[(&str, BinOp)] = &[
    ("+=", BinOp::Add),
    ("-=", BinOp::Sub),
    ("*=", BinOp::Mul),
    ("/=", BinOp::Div),
    ("//=", BinOp::FloorDiv),
    ("%=", BinOp::Mod),
    ("**=", BinOp::Pow),
];

impl Parser {
    fn fragment(src: &str) -> Result<Parser, ParseError> {
        Ok(Parser {
            toks: tokenize_fragment(src)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn bump(&mut self) -> Token {
        let t = self.peek().clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn at_eof(&self) -> bool {
        self.peek().tok == Tok::Eof
    }

    fn peek_kw(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Kw(k) if *k == kw)
    }

    fn peek_op(&self, op: &str) -> bool {
        matches!(&self.peek().tok, Tok::Op(o) if *o == op)
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if self.peek_op(op) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.peek_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error(&self, expected: &str) -> ParseError {
        let t = self.peek();
        if let Tok::Reserved(word) = &t.tok {
            return ParseError::Unsupported {
                line: t.line,
                col: t.col,
                feature: format!("`{word}`"),
            };
        }
        ParseError::Syntax {
            line: t.line,
            col: t.col,
            message: format!("expected {expected}, found {}", describe(&t.tok)),
        }
    }

    fn unsupported_here(&self, feature: impl Into<String>) -> ParseError {
        let t = self.peek();
        ParseError::Unsupported {
            line: t.line,
            col: t.col,
            feature: feature.into(),
        }
    }

    fn expect_op(&mut self, op: &str) -> Result<(), ParseError> {
        if self.eat_op(op) {
            Ok(())
        } else {
            Err(self.error(&format!("'{op}'")))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.error(&format!("'{kw}'")))
        }
    }

    fn expect_name(&mut self, what: &str) -> Result<String, ParseError> {
        match &self.peek().tok {
            Tok::Name(n) => {
                let n = n.clone();
                self.bump();
                Ok(n)
            }
            _ => Err(self.error(what)),
        }
    }

    fn expect_newline(&mut self) -> Result<(), ParseError> {
        match self.peek().tok {
            Tok::Newline => {
                self.bump();
                Ok(())
            }
            Tok::Op(",") => Err(self.unsupported_here("tuples and multiple targets")),
            Tok::Op("=") => Err(self.unsupported_here("chained assignment")),
            _ => Err(self.error("end of line")),
        }
    }

    fn expect_eof(&mut self) -> Result<(), ParseError> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self.error("end of input"))
        }
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        while self.peek().tok == Tok::Newline {
            self.bump();
        }
        if !self.peek_kw("def") {
            if matches!(self.peek().tok, Tok::Reserved(_)) {
                return Err(self.error("'def'"));
            }
            if self.at_eof() {
                return Err(self.error("a function definition"));
            }
            return Err(self.unsupported_here("top-level statements outside the function"));
        }
        self.bump();
        let name = self.expect_name("function name")?;
        self.expect_op("(")?;
        let mut params = Vec::new();
        if !self.peek_op(")") {
            loop {
                if self.peek_op("*") || self.peek_op("**") {
                    return Err(self.unsupported_here("variadic parameters"));
                }
                let p = self.expect_name("parameter name or ')'")?;
                if self.peek_op("=") {
                    return Err(self.unsupported_here("default parameter values"));
                }
                if self.peek_op(":") {
                    return Err(self.unsupported_here("type annotations"));
                }
                if params.contains(&p) {
                    return Err(self.error("distinct parameter names"));
                }
                params.push(p);
                if !self.eat_op(",") || self.peek_op(")") {
                    break;
                }
            }
        }
        self.expect_op(")")?;
        self.expect_op(":")?;
        let body = self.suite()?;
        while self.peek().tok == Tok::Newline {
            self.bump();
        }
        if !self.at_eof() {
            if self.peek_kw("def") {
                return Err(self.unsupported_here("more than one function definition"));
            }
            return Err(self.unsupported_here("top-level statements outside the function"));
        }
        Ok(Program { name, params, body })
    }

    fn suite(&mut self) -> Result<Vec<Stmt>, ParseError> {
        if self.peek().tok != Tok::Newline {
            return Err(self.unsupported_here("single-line compound statements"));
        }
        self.bump();
        if self.peek().tok != Tok::Indent {
            return Err(self.error("an indented block"));
        }
        self.bump();
        let mut body = Vec::new();
        while !matches!(self.peek().tok, Tok::Dedent | Tok::Eof) {
            let line = self.peek().line;
            let col = self.peek().col;
            let stmt = self.statement()?;
            if body.last().is_some_and(|s: &Stmt| !s.falls_through()) {
                return Err(ParseError::Unsupported {
                    line,
                    col,
                    feature: "unreachable code after return".into(),
                });
            }
            body.push(stmt);
        }
        self.bump();
        Ok(body)
    }

    fn statement(&mut self) -> Result<Stmt, ParseError> {
        let start = self.peek().clone();
        match &start.tok {
            Tok::Kw("if") => self.if_stmt(),
            Tok::Kw("while") => {
                self.bump();
                let cond = self.expr()?;
                self.expect_op(":")?;
                let body = self.suite()?;
                if self.peek_kw("else") {
                    return Err(self.unsupported_here("while-else"));
                }
                check_loop_body(&body, &start)?;
                Ok(Stmt::While { cond, body })
            }
            Tok::Kw("for") => self.for_stmt(),
            Tok::Kw("return") => {
                self.bump();
                let value = if self.peek().tok == Tok::Newline {
                    None
                } else {
                    Some(self.expr()?)
                };
                self.expect_newline()?;
                Ok(Stmt::Return(value))
            }
            Tok::Kw("def") => Err(self.unsupported_here("nested function definitions")),
            Tok::Indent => Err(self.error("a statement (unexpected indent)")),
            _ => {
                let s = self.simple_stmt()?;
                self.expect_newline()?;
                Ok(s)
            }
        }
    }

    fn if_stmt(&mut self) -> Result<Stmt, ParseError> {
        self.expect_kw("if")?;
        let cond = self.expr()?;
        self.expect_op(":")?;
        let then_body = self.suite()?;
        let mut elifs = Vec::new();
        while self.eat_kw("elif") {
            let c = self.expr()?;
            self.expect_op(":")?;
            elifs.push((c, self.suite()?));
        }
        let else_body = if self.eat_kw("else") {
            self.expect_op(":")?;
            Some(self.suite()?)
        } else {
            None
        };
        Ok(Stmt::If {
            cond,
            then_body,
            elifs,
            else_body,
        })
    }

    fn for_stmt(&mut self) -> Result<Stmt, ParseError> {
        let start = self.bump();
        let var = self.expect_name("loop variable")?;
        if self.peek_op(",") {
            return Err(self.unsupported_here("tuple unpacking"));
        }
        self.expect_kw("in")?;
        match &self.peek().tok {
            Tok::Name(n) if n == "range" => {
                self.bump();
            }
            _ => return Err(self.unsupported_here("for loops over anything but range(...)")),
        }
        self.expect_op("(")?;
        let args_at = self.peek().clone();
        let mut args = Vec::new();
        if !self.peek_op(")") {
            loop {
                args.push(self.expr()?);
                if !self.eat_op(",") || self.peek_op(")") {
                    break;
                }
            }
        }
        self.expect_op(")")?;
        if args.is_empty() || args.len() > 3 {
            return Err(ParseError::Syntax {
                line: args_at.line,
                col: args_at.col,
                message: "range expects 1 to 3 arguments".into(),
            });
        }
        if args.len() == 3 && literal_step(&args[2]).is_none() {
            return Err(ParseError::Unsupported {
                line: args_at.line,
                col: args_at.col,
                feature: "range step that is not a non-zero integer literal".into(),
            });
        }
        self.expect_op(":")?;
        let body = self.suite()?;
        if self.peek_kw("else") {
            return Err(self.unsupported_here("for-else"));
        }
        check_loop_body(&body, &start)?;
        Ok(Stmt::ForRange { var, args, body })
    }

    fn simple_stmt(&mut self) -> Result<Stmt, ParseError> {
        if let Tok::Name(n) = &self.peek().tok {
            let is_print = n == "print" && matches!(self.toks.get(self.pos + 1).map(|t| &t.tok), Some(Tok::Op("(")));
            if is_print {
                self.bump();
                self.bump();
                let mut args = Vec::new();
                if !self.peek_op(")") {
                    loop {
                        args.push(self.expr()?);
                        if !self.eat_op(",") || self.peek_op(")") {
                            break;
                        }
                    }
                }
                if let Tok::Name(_) = self.peek().tok {
                    if matches!(self.toks.get(self.pos + 1).map(|t| &t.tok), Some(Tok::Op("="))) {
                        return Err(self.unsupported_here("keyword arguments"));
                    }
                }
                self.expect_op(")")?;
                if args.is_empty() {
                    return Err(self.unsupported_here("print() without arguments"));
                }
                return Ok(Stmt::Print(args));
            }
            let target = n.clone();
            let next = self.toks.get(self.pos + 1).map(|t| t.tok.clone());
            if let Some(Tok::Op(op)) = next {
                if op == "=" {
                    self.bump();
                    self.bump();
                    let value = self.expr()?;
                    return Ok(Stmt::Assign { target, value });
                }
                if let Some((_, bop)) = AUG_OPS.iter().find(|(o, _)| *o == op) {
                    self.bump();
                    self.bump();
                    let value = self.expr()?;
                    return Ok(Stmt::AugAssign {
                        target,
                        op: *bop,
                        value,
                    });
                }
            }
        }
        let e = self.expr()?;
        if self.peek_op("=") || AUG_OPS.iter().any(|(o, _)| self.peek_op(o)) {
            return Err(self.unsupported_here("assignment to anything but a plain name"));
        }
        Ok(Stmt::Expr(e))
    }

    pub(crate) fn expr(&mut self) -> Result<Expr, ParseError> {
        if self.peek_kw("lambda") {
            return Err(self.unsupported_here("lambda"));
        }
        let e = self.or_expr()?;
        if self.peek_kw("if") {
            return Err(self.unsupported_here("conditional expressions"));
        }
        Ok(e)
    }

    fn or_expr(&mut self) -> Result<Expr, ParseError> {
        let mut l = self.and_expr()?;
        while self.eat_kw("or") {
            let r = self.and_expr()?;
            l = Expr::BoolOp(BoolOpKind::Or, Box::new(l), Box::new(r));
        }
        Ok(l)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let mut l = self.not_expr()?;
        while self.eat_kw("and") {
            let r = self.not_expr()?;
            l = Expr::BoolOp(BoolOpKind::And, Box::new(l), Box::new(r));
        }
        Ok(l)
    }

    fn not_expr(&mut self) -> Result<Expr, ParseError> {
        if self.eat_kw("not") {
            let e = self.not_expr()?;
            return Ok(Expr::Unary(UnaryOp::Not, Box::new(e)));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<Expr, ParseError> {
        let l = self.arith()?;
        let Some(op) = self.cmp_op() else {
            if self.peek_kw("in") || matches!(&self.peek().tok, Tok::Reserved(w) if w == "is") {
                return Err(self.unsupported_here("membership and identity tests"));
            }
            return Ok(l);
        };
        self.bump();
        let r = self.arith()?;
        if self.cmp_op().is_some() {
            return Err(self.unsupported_here("chained comparisons"));
        }
        Ok(Expr::Compare(op, Box::new(l), Box::new(r)))
    }

    fn cmp_op(&self) -> Option<CmpOp> {
        match &self.peek().tok {
            Tok::Op("==") => Some(CmpOp::Eq),
            Tok::Op("!=") => Some(CmpOp::Ne),
            Tok::Op("<") => Some(CmpOp::Lt),
            Tok::Op("<=") => Some(CmpOp::Le),
            Tok::Op(">") => Some(CmpOp::Gt),
            Tok::Op(">=") => Some(CmpOp::Ge),
            _ => None,
        }
    }

    fn arith(&mut self) -> Result<Expr, ParseError> {
        let mut l = self.term()?;
        loop {
            let op = match &self.peek().tok {
                Tok::Op("+") => BinOp::Add,
                Tok::Op("-") => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let r = self.term()?;
            l = Expr::Binary(op, Box::new(l), Box::new(r));
        }
        Ok(l)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut l = self.factor()?;
        loop {
            let op = match &self.peek().tok {
                Tok::Op("*") => BinOp::Mul,
                Tok::Op("/") => BinOp::Div,
                Tok::Op("//") => BinOp::FloorDiv,
                Tok::Op("%") => BinOp::Mod,
                _ => break,
            };
            self.bump();
            let r = self.factor()?;
            l = Expr::Binary(op, Box::new(l), Box::new(r));
        }
        Ok(l)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let op = match &self.peek().tok {
            Tok::Op("-") => Some(UnaryOp::Neg),
            Tok::Op("+") => Some(UnaryOp::Pos),
            _ => None,
        };
        if let Some(op) = op {
            self.bump();
            let e = self.factor()?;
            return Ok(Expr::Unary(op, Box::new(e)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat_op("**") {
            // right-associative; the exponent may carry a unary sign
            let exp = self.factor()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::Int(v))
            }
            Tok::Str(s) => {
                self.bump();
                if matches!(self.peek().tok, Tok::Str(_)) {
                    return Err(self.unsupported_here("implicit string concatenation"));
                }
                Ok(Expr::Str(s))
            }
            Tok::Kw("True") => {
                self.bump();
                Ok(Expr::Bool(true))
            }
            Tok::Kw("False") => {
                self.bump();
                Ok(Expr::Bool(false))
            }
            Tok::Kw("None") => {
                self.bump();
                Ok(Expr::NoneLit)
            }
            Tok::Op("(") => {
                self.bump();
                if self.peek_op(")") {
                    return Err(self.unsupported_here("tuples"));
                }
                let e = self.expr()?;
                if self.peek_op(",") {
                    return Err(self.unsupported_here("tuples"));
                }
                self.expect_op(")")?;
                Ok(Expr::Paren(Box::new(e)))
            }
            Tok::Name(n) => {
                self.bump();
                if self.eat_op("(") {
                    if n == "print" {
                        return Err(ParseError::Unsupported {
                            line: t.line,
                            col: t.col,
                            feature: "print used as a value".into(),
                        });
                    }
                    if n == "range" {
                        return Err(ParseError::Unsupported {
                            line: t.line,
                            col: t.col,
                            feature: "range outside a for loop header".into(),
                        });
                    }
                    let mut args = Vec::new();
                    if !self.peek_op(")") {
                        loop {
                            if let Tok::Name(_) = self.peek().tok {
                                if matches!(self.toks.get(self.pos + 1).map(|t| &t.tok), Some(Tok::Op("="))) {
                                    return Err(self.unsupported_here("keyword arguments"));
                                }
                            }
                            args.push(self.expr()?);
                            if !self.eat_op(",") || self.peek_op(")") {
                                break;
                            }
                        }
                    }
                    self.expect_op(")")?;
                    return Ok(Expr::Call(n, args));
                }
                Ok(Expr::Name(n))
            }
            _ => Err(self.error("an expression")),
        }
    }
}

/// The step value of a `range` third argument, if it is a literal.
pub fn literal_step(e: &Expr) -> Option<i64> {
    let v = match e {
        Expr::Int(v) => *v,
        Expr::Unary(UnaryOp::Neg, inner) => match inner.as_ref() {
            Expr::Int(v) => -*v,
            _ => return None,
        },
        _ => return None,
    };
    (v != 0).then_some(v)
}

fn check_loop_body(body: &[Stmt], start: &Token) -> Result<(), ParseError> {
    if block_falls_through(body) {
        Ok(())
    } else {
        Err(ParseError::Unsupported {
            line: start.line,
            col: start.col,
            feature: "loop body that never completes an iteration".into(),
        })
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Name(n) => format!("name '{n}'"),
        Tok::Int(v) => format!("integer {v}"),
        Tok::Str(_) => "string literal".into(),
        Tok::Kw(k) => format!("'{k}'"),
        Tok::Reserved(k) => format!("'{k}'"),
        Tok::Op(o) => format!("'{o}'"),
        Tok::Newline => "end of line".into(),
        Tok::Indent => "indent".into(),
        Tok::Dedent => "dedent".into(),
        Tok::Eof => "end of input".into(),
    }
}
