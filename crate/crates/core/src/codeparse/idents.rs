//! Identifier collection and consistent renaming.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Identifiers {
    pub functions: BTreeSet<String>,
    pub variables: BTreeSet<String>,
}

/// Function names (the definition plus every called non-builtin) and
/// variables (parameters, assignment targets, loop variables).
pub fn identifiers(p: &Program) -> Identifiers {
    let mut ids = Identifiers::default();
    ids.functions.insert(p.name.clone());
    ids.variables.extend(p.params.iter().cloned());
    p.walk_stmts(&mut |s| {
        match s {
            Stmt::Assign { target, .. } | Stmt::AugAssign { target, .. } => {
                ids.variables.insert(target.clone());
            }
            Stmt::ForRange { var, .. } => {
                ids.variables.insert(var.clone());
            }
            _ => {}
        }
        for e in stmt_exprs(s) {
            e.walk(&mut |e| {
                if let Expr::Call(name, _) = e {
                    if !is_builtin(name) {
                        ids.functions.insert(name.clone());
                    }
                }
            });
        }
    });
    ids.functions.retain(|n| !is_builtin(n));
    ids.variables.retain(|n| !is_builtin(n));
    ids
}

/// Every name appearing anywhere in the program, in any role.
pub fn all_names(p: &Program) -> BTreeSet<String> {
    let ids = identifiers(p);
    let mut names: BTreeSet<String> = ids.functions.into_iter().chain(ids.variables).collect();
    p.walk_stmts(&mut |s| {
        for e in stmt_exprs(s) {
            e.walk(&mut |e| match e {
                Expr::Name(n) | Expr::Call(n, _) => {
                    names.insert(n.clone());
                }
                _ => {}
            });
        }
    });
    names
}

/// The expressions directly owned by a statement (not those of nested bodies).
pub fn stmt_exprs(s: &Stmt) -> Vec<&Expr> {
    match s {
        Stmt::Assign { value, .. } | Stmt::AugAssign { value, .. } => vec![value],
        Stmt::Expr(e) => vec![e],
        Stmt::Return(e) => e.iter().collect(),
        Stmt::Print(args) => args.iter().collect(),
        Stmt::If { cond, elifs, .. } => {
            let mut v = vec![cond];
            v.extend(elifs.iter().map(|(c, _)| c));
            v
        }
        Stmt::While { cond, .. } => vec![cond],
        Stmt::ForRange { args, .. } => args.iter().collect(),
    }
}

/// A renaming of function names (definition and call sites) and of variable
/// names (parameters, targets, loop variables and reads).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Renaming {
    pub functions: BTreeMap<String, String>,
    pub variables: BTreeMap<String, String>,
}

impl Renaming {
    pub fn inverse(&self) -> Renaming {
        let flip = |m: &BTreeMap<String, String>| m.iter().map(|(k, v)| (v.clone(), k.clone())).collect();
        Renaming {
            functions: flip(&self.functions),
            variables: flip(&self.variables),
        }
    }

    fn func(&self, n: &str) -> String {
        self.functions.get(n).cloned().unwrap_or_else(|| n.to_string())
    }

    fn var(&self, n: &str) -> String {
        self.variables.get(n).cloned().unwrap_or_else(|| n.to_string())
    }
}

pub fn apply_renaming(p: &Program, r: &Renaming) -> Program {
    Program {
        name: r.func(&p.name),
        params: p.params.iter().map(|n| r.var(n)).collect(),
        body: rename_block(&p.body, r),
    }
}

fn rename_block(block: &[Stmt], r: &Renaming) -> Vec<Stmt> {
    block.iter().map(|s| rename_stmt(s, r)).collect()
}

fn rename_stmt(s: &Stmt, r: &Renaming) -> Stmt {
    match s {
        Stmt::Assign { target, value } => Stmt::Assign {
            target: r.var(target),
            value: rename_expr(value, r),
        },
        Stmt::AugAssign { target, op, value } => Stmt::AugAssign {
            target: r.var(target),
            op: *op,
            value: rename_expr(value, r),
        },
        Stmt::Expr(e) => Stmt::Expr(rename_expr(e, r)),
        Stmt::Return(e) => Stmt::Return(e.as_ref().map(|e| rename_expr(e, r))),
        Stmt::Print(args) => Stmt::Print(args.iter().map(|e| rename_expr(e, r)).collect()),
        Stmt::If {
            cond,
            then_body,
            elifs,
            else_body,
        } => Stmt::If {
            cond: rename_expr(cond, r),
            then_body: rename_block(then_body, r),
            elifs: elifs
                .iter()
                .map(|(c, b)| (rename_expr(c, r), rename_block(b, r)))
                .collect(),
            else_body: else_body.as_ref().map(|b| rename_block(b, r)),
        },
        Stmt::While { cond, body } => Stmt::While {
            cond: rename_expr(cond, r),
            body: rename_block(body, r),
        },
        Stmt::ForRange { var, args, body } => Stmt::ForRange {
            var: r.var(var),
            args: args.iter().map(|e| rename_expr(e, r)).collect(),
            body: rename_block(body, r),
        },
    }
}

fn rename_expr(e: &Expr, r: &Renaming) -> Expr {
    let b = |e: &Expr| Box::new(rename_expr(e, r));
    match e {
        Expr::Name(n) => Expr::Name(r.var(n)),
        Expr::Call(n, args) => {
            let name = if is_builtin(n) { n.clone() } else { r.func(n) };
            Expr::Call(name, args.iter().map(|a| rename_expr(a, r)).collect())
        }
        Expr::Paren(x) => Expr::Paren(b(x)),
        Expr::Unary(op, x) => Expr::Unary(*op, b(x)),
        Expr::Binary(op, l, rr) => Expr::Binary(*op, b(l), b(rr)),
        Expr::Compare(op, l, rr) => Expr::Compare(*op, b(l), b(rr)),
        Expr::BoolOp(op, l, rr) => Expr::BoolOp(*op, b(l), b(rr)),
        lit => lit.clone(),
    }
}
