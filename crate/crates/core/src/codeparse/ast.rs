//! Syntax tree for the supported program subset.

use std::fmt;

/// A single function definition; the unit every corpus sample consists of.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Program {
    pub name: String,
    pub params: Vec<String>,
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Stmt {
    Assign {
        target: String,
        value: Expr,
    },
    AugAssign {
        target: String,
        op: BinOp,
        value: Expr,
    },
    Expr(Expr),
    Return(Option<Expr>),
    Print(Vec<Expr>),
    If {
        cond: Expr,
        then_body: Vec<Stmt>,
        elifs: Vec<(Expr, Vec<Stmt>)>,
        else_body: Option<Vec<Stmt>>,
    },
    While {
        cond: Expr,
        body: Vec<Stmt>,
    },
    /// `for var in range(args):` with one to three arguments. A step, when
    /// present, is a non-zero integer literal (optionally negated).
    ForRange {
        var: String,
        args: Vec<Expr>,
        body: Vec<Stmt>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Str(String),
    NoneLit,
    Name(String),
    /// Source parentheses, kept so printing reproduces them.
    Paren(Box<Expr>),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Compare(CmpOp, Box<Expr>, Box<Expr>),
    BoolOp(BoolOpKind, Box<Expr>, Box<Expr>),
    Call(String, Vec<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Pos,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    FloorDiv,
    Mod,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoolOpKind {
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::FloorDiv => "//",
            BinOp::Mod => "%",
            BinOp::Pow => "**",
        }
    }
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

impl fmt::Display for BinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Reserved words of the host language. None of them may be used as an
/// identifier, even the ones the subset does not support.
pub const KEYWORDS: &[&str] = &[
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class", "continue", "def", "del",
    "elif", "else", "except", "finally", "for", "from", "global", "if", "import", "in", "is", "lambda", "nonlocal",
    "not", "or", "pass", "raise", "return", "try", "while", "with", "yield",
];

/// Functions every program may call without defining them.
pub const BUILTINS: &[&str] = &["len", "abs", "min", "max", "range", "print"];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

pub fn is_builtin(s: &str) -> bool {
    BUILTINS.contains(&s)
}

/// Identifier grammar: letter or underscore, then letters, digits, underscores;
/// never a keyword.
pub fn is_valid_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && !is_keyword(s)
}

impl Stmt {
    /// Whether control can reach the statement that follows this one.
    pub fn falls_through(&self) -> bool {
        match self {
            Stmt::Return(_) => false,
            Stmt::If {
                then_body,
                elifs,
                else_body,
                ..
            } => {
                block_falls_through(then_body)
                    || elifs.iter().any(|(_, b)| block_falls_through(b))
                    || else_body.as_ref().is_none_or(|b| block_falls_through(b))
            }
            _ => true,
        }
    }
}

pub fn block_falls_through(block: &[Stmt]) -> bool {
    block.last().is_none_or(Stmt::falls_through)
}

/// Folds `else:` bodies that consist of exactly one `if` into the elif chain,
/// recursively. Both spellings denote the same tree after this pass.
pub fn normalize_elif(stmts: &mut [Stmt]) {
    for s in stmts {
        match s {
            Stmt::If {
                then_body,
                elifs,
                else_body,
                ..
            } => {
                normalize_elif(then_body);
                for (_, b) in elifs.iter_mut() {
                    normalize_elif(b);
                }
                if let Some(b) = else_body.as_mut() {
                    normalize_elif(b);
                }
                while let Some(b) = else_body.as_ref() {
                    if let [Stmt::If { .. }] = b.as_slice() {
                        let Some(Stmt::If {
                            cond,
                            then_body: inner_then,
                            elifs: inner_elifs,
                            else_body: inner_else,
                        }) = else_body.take().and_then(|mut v| v.pop())
                        else {
                            unreachable!()
                        };
                        elifs.push((cond, inner_then));
                        elifs.extend(inner_elifs);
                        *else_body = inner_else;
                    } else {
                        break;
                    }
                }
            }
            Stmt::While { body, .. } | Stmt::ForRange { body, .. } => normalize_elif(body),
            _ => {}
        }
    }
}

impl Program {
    /// Visits every statement, outermost first.
    pub fn walk_stmts<'a>(&'a self, f: &mut impl FnMut(&'a Stmt)) {
        walk_block(&self.body, f);
    }
}

pub fn walk_block<'a>(block: &'a [Stmt], f: &mut impl FnMut(&'a Stmt)) {
    for s in block {
        f(s);
        match s {
            Stmt::If {
                then_body,
                elifs,
                else_body,
                ..
            } => {
                walk_block(then_body, f);
                for (_, b) in elifs {
                    walk_block(b, f);
                }
                if let Some(b) = else_body {
                    walk_block(b, f);
                }
            }
            Stmt::While { body, .. } | Stmt::ForRange { body, .. } => walk_block(body, f),
            _ => {}
        }
    }
}

impl Expr {
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Paren(e) | Expr::Unary(_, e) => e.walk(f),
            Expr::Binary(_, l, r) | Expr::Compare(_, l, r) | Expr::BoolOp(_, l, r) => {
                l.walk(f);
                r.walk(f);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.walk(f)),
            _ => {}
        }
    }

    pub fn name(s: &str) -> Expr {
        Expr::Name(s.to_string())
    }
}
