//! Canonical surface form.

use std::fmt::Write as _;

use super::ast::*;

pub fn print_canonical(p: &Program) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "def {}({}):", p.name, p.params.join(", "));
    print_block(&p.body, 1, &mut out);
    out
}

fn print_block(block: &[Stmt], depth: usize, out: &mut String) {
    for s in block {
        print_stmt_into(s, depth, out);
    }
}

fn indent(depth: usize, out: &mut String) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

fn print_stmt_into(s: &Stmt, depth: usize, out: &mut String) {
    match s {
        Stmt::If {
            cond,
            then_body,
            elifs,
            else_body,
        } => {
            indent(depth, out);
            let _ = writeln!(out, "if {}:", expr_text(cond));
            print_block(then_body, depth + 1, out);
            for (c, b) in elifs {
                indent(depth, out);
                let _ = writeln!(out, "elif {}:", expr_text(c));
                print_block(b, depth + 1, out);
            }
            if let Some(b) = else_body {
                indent(depth, out);
                out.push_str("else:\n");
                print_block(b, depth + 1, out);
            }
        }
        Stmt::While { cond, body } => {
            indent(depth, out);
            let _ = writeln!(out, "while {}:", expr_text(cond));
            print_block(body, depth + 1, out);
        }
        Stmt::ForRange { var, args, body } => {
            indent(depth, out);
            let _ = writeln!(out, "for {var} in range({}):", join_exprs(args));
            print_block(body, depth + 1, out);
        }
        simple => {
            indent(depth, out);
            out.push_str(&simple_stmt_text(simple));
            out.push('\n');
        }
    }
}

/// Single-line text of a simple statement. Compound statements yield their
/// header line.
pub fn simple_stmt_text(s: &Stmt) -> String {
    match s {
        Stmt::Assign { target, value } => format!("{target} = {}", expr_text(value)),
        Stmt::AugAssign { target, op, value } => format!("{target} {op}= {}", expr_text(value)),
        Stmt::Expr(e) => expr_text(e),
        Stmt::Return(None) => "return".into(),
        Stmt::Return(Some(e)) => format!("return {}", expr_text(e)),
        Stmt::Print(args) => format!("print({})", join_exprs(args)),
        Stmt::If { cond, .. } => format!("if {}:", expr_text(cond)),
        Stmt::While { cond, .. } => format!("while {}:", expr_text(cond)),
        Stmt::ForRange { var, args, .. } => format!("for {var} in range({}):", join_exprs(args)),
    }
}

pub fn join_exprs(args: &[Expr]) -> String {
    args.iter().map(expr_text).collect::<Vec<_>>().join(", ")
}

pub fn expr_text(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(e, &mut s);
    s
}

fn write_expr(e: &Expr, out: &mut String) {
    match e {
        Expr::Int(v) => {
            let _ = write!(out, "{v}");
        }
        Expr::Bool(true) => out.push_str("True"),
        Expr::Bool(false) => out.push_str("False"),
        Expr::NoneLit => out.push_str("None"),
        Expr::Str(s) => out.push_str(&str_repr(s)),
        Expr::Name(n) => out.push_str(n),
        Expr::Paren(inner) => {
            out.push('(');
            write_expr(inner, out);
            out.push(')');
        }
        Expr::Unary(op, inner) => {
            out.push_str(match op {
                UnaryOp::Neg => "-",
                UnaryOp::Pos => "+",
                UnaryOp::Not => "not ",
            });
            write_expr(inner, out);
        }
        Expr::Binary(op, l, r) => {
            write_expr(l, out);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(r, out);
        }
        Expr::Compare(op, l, r) => {
            write_expr(l, out);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(r, out);
        }
        Expr::BoolOp(op, l, r) => {
            write_expr(l, out);
            out.push_str(match op {
                BoolOpKind::And => " and ",
                BoolOpKind::Or => " or ",
            });
            write_expr(r, out);
        }
        Expr::Call(name, args) => {
            out.push_str(name);
            out.push('(');
            out.push_str(&join_exprs(args));
            out.push(')');
        }
    }
}

/// Python `repr` of a string: single quotes unless the text contains a single
/// quote and no double quote.
pub fn str_repr(s: &str) -> String {
    let quote = if s.contains('\'') && !s.contains('"') {
        '"'
    } else {
        '\''
    };
    let mut out = String::with_capacity(s.len() + 2);
    out.push(quote);
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c if c == quote => {
                out.push('\\');
                out.push(c);
            }
            c => out.push(c),
        }
    }
    out.push(quote);
    out
}

/// Binding strength used when building trees programmatically; higher binds
/// tighter.
pub fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::BoolOp(BoolOpKind::Or, ..) => 1,
        Expr::BoolOp(BoolOpKind::And, ..) => 2,
        Expr::Unary(UnaryOp::Not, _) => 3,
        Expr::Compare(..) => 4,
        Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 5,
        Expr::Binary(BinOp::Pow, ..) => 8,
        Expr::Binary(..) => 6,
        Expr::Unary(..) => 7,
        _ => 9,
    }
}

/// Wraps `e` in parentheses when it binds looser than `min`.
pub fn paren_if_below(e: Expr, min: u8) -> Expr {
    if precedence(&e) < min {
        Expr::Paren(Box::new(e))
    } else {
        e
    }
}
