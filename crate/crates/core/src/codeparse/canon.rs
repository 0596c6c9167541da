//! Source-level rewrites that bring a program into the form the flowchart
//! converters reproduce exactly.

use super::ast::*;
use super::parser::literal_step;
use super::printer::{paren_if_below, precedence};

/// Replaces every `for v in range(..)` with its `while` equivalent:
/// `v = start`, `while v < stop:` (or `>` for a negative step), body,
/// `v += step`.
pub fn desugar_for(p: &Program) -> Program {
    Program {
        name: p.name.clone(),
        params: p.params.clone(),
        body: desugar_block(&p.body),
    }
}

fn desugar_block(block: &[Stmt]) -> Vec<Stmt> {
    let mut out = Vec::with_capacity(block.len());
    for s in block {
        match s {
            Stmt::ForRange { var, args, body } => {
                let (start, stop) = match args.as_slice() {
                    [stop] => (Expr::Int(0), stop.clone()),
                    [start, stop, ..] => (start.clone(), stop.clone()),
                    [] => unreachable!("range has at least one argument"),
                };
                let step_expr = args.get(2).cloned().unwrap_or(Expr::Int(1));
                let descending = args.get(2).and_then(literal_step).is_some_and(|s| s < 0);
                let cmp = if descending { CmpOp::Gt } else { CmpOp::Lt };
                let compare_prec = precedence(&Expr::Compare(cmp, Box::new(Expr::Int(0)), Box::new(Expr::Int(0))));
                let cond = Expr::Compare(
                    cmp,
                    Box::new(Expr::Name(var.clone())),
                    Box::new(paren_if_below(stop, compare_prec + 1)),
                );
                let mut new_body = desugar_block(body);
                new_body.push(Stmt::AugAssign {
                    target: var.clone(),
                    op: BinOp::Add,
                    value: step_expr,
                });
                out.push(Stmt::Assign {
                    target: var.clone(),
                    value: start,
                });
                out.push(Stmt::While { cond, body: new_body });
            }
            Stmt::If {
                cond,
                then_body,
                elifs,
                else_body,
            } => out.push(Stmt::If {
                cond: cond.clone(),
                then_body: desugar_block(then_body),
                elifs: elifs.iter().map(|(c, b)| (c.clone(), desugar_block(b))).collect(),
                else_body: else_body.as_ref().map(|b| desugar_block(b)),
            }),
            Stmt::While { cond, body } => out.push(Stmt::While {
                cond: cond.clone(),
                body: desugar_block(body),
            }),
            simple => out.push(simple.clone()),
        }
    }
    out
}

/// Desugars `for` loops, then moves statements that follow an `if` with
/// exactly one returning arm into the arm that falls through. The result runs
/// identically and is the form `structure(lower(p))` produces.
pub fn canonicalize(p: &Program) -> Program {
    let mut body = desugar_block(&p.body);
    body = nest_tails(body);
    normalize_elif(&mut body);
    Program {
        name: p.name.clone(),
        params: p.params.clone(),
        body,
    }
}

fn nest_tails(block: Vec<Stmt>) -> Vec<Stmt> {
    let mut out = Vec::with_capacity(block.len());
    let mut iter = block.into_iter();
    while let Some(s) = iter.next() {
        match s {
            Stmt::If {
                cond,
                then_body,
                elifs,
                else_body,
            } => {
                let (cond, mut then_body, mut else_body) = unchain(cond, then_body, elifs, else_body);
                let tail: Vec<Stmt> = iter.by_ref().collect();
                let then_falls = block_falls_through(&then_body);
                let else_falls = else_body.as_deref().is_none_or(block_falls_through);
                if !tail.is_empty() && then_falls != else_falls {
                    if then_falls {
                        then_body.extend(tail);
                    } else {
                        else_body.get_or_insert_with(Vec::new).extend(tail);
                    }
                    out.push(Stmt::If {
                        cond,
                        then_body: nest_tails(then_body),
                        elifs: Vec::new(),
                        else_body: else_body.map(nest_tails),
                    });
                    return out;
                }
                out.push(Stmt::If {
                    cond,
                    then_body: nest_tails(then_body),
                    elifs: Vec::new(),
                    else_body: else_body.map(nest_tails),
                });
                out.extend(nest_tails(tail));
                return out;
            }
            Stmt::While { cond, body } => out.push(Stmt::While {
                cond,
                body: nest_tails(body),
            }),
            other => out.push(other),
        }
    }
    out
}

/// Rewrites an elif chain as nested `else: if` blocks.
fn unchain(
    cond: Expr,
    then_body: Vec<Stmt>,
    elifs: Vec<(Expr, Vec<Stmt>)>,
    else_body: Option<Vec<Stmt>>,
) -> (Expr, Vec<Stmt>, Option<Vec<Stmt>>) {
    let mut rest = else_body;
    for (c, b) in elifs.into_iter().rev() {
        rest = Some(vec![Stmt::If {
            cond: c,
            then_body: b,
            elifs: Vec::new(),
            else_body: rest,
        }]);
    }
    (cond, then_body, rest)
}
