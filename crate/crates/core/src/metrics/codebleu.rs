//! CodeBLEU: n-gram, keyword-weighted n-gram, syntax-tree and data-flow
//! agreement.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::codeparse::{block_falls_through, parse, stmt_exprs, Expr, Program, Stmt};

use super::bleu::{check_lengths, pooled, weighted_ngram};
use super::MetricError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodeBleuWeights {
    pub ngram: f64,
    pub weighted_ngram: f64,
    pub ast_match: f64,
    pub dataflow_match: f64,
    /// Multiplier for keyword unigrams in the weighted n-gram component.
    pub keyword_factor: f64,
}

impl Default for CodeBleuWeights {
    fn default() -> Self {
        CodeBleuWeights {
            ngram: 0.25,
            weighted_ngram: 0.25,
            ast_match: 0.25,
            dataflow_match: 0.25,
            keyword_factor: 4.0,
        }
    }
}

/// Combined score on a 0-100 scale and its four components in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodeBleu {
    pub score: f64,
    pub ngram: f64,
    pub weighted_ngram: f64,
    pub ast_match: f64,
    pub dataflow_match: f64,
}

/// Syntax tree with identifiers replaced by a placeholder label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tree {
    pub label: String,
    pub children: Vec<Tree>,
}

const IDENT: &str = "<id>";

fn node(label: impl Into<String>, children: Vec<Tree>) -> Tree {
    Tree {
        label: label.into(),
        children,
    }
}

fn ident() -> Tree {
    node(IDENT, Vec::new())
}

fn expr_tree(e: &Expr) -> Tree {
    match e {
        Expr::Int(v) => node(format!("int:{v}"), vec![]),
        Expr::Bool(b) => node(format!("bool:{b}"), vec![]),
        Expr::Str(s) => node(format!("str:{s}"), vec![]),
        Expr::NoneLit => node("none", vec![]),
        Expr::Name(_) => ident(),
        Expr::Paren(e) => node("paren", vec![expr_tree(e)]),
        Expr::Unary(op, e) => node(format!("unary:{op:?}"), vec![expr_tree(e)]),
        Expr::Binary(op, l, r) => node(format!("binop:{op}"), vec![expr_tree(l), expr_tree(r)]),
        Expr::Compare(op, l, r) => node(format!("cmp:{}", op.symbol()), vec![expr_tree(l), expr_tree(r)]),
        Expr::BoolOp(op, l, r) => node(format!("boolop:{op:?}"), vec![expr_tree(l), expr_tree(r)]),
        Expr::Call(_, args) => node(
            "call",
            std::iter::once(ident()).chain(args.iter().map(expr_tree)).collect(),
        ),
    }
}

fn block_tree(b: &[Stmt]) -> Tree {
    node("block", b.iter().map(stmt_tree).collect())
}

fn stmt_tree(s: &Stmt) -> Tree {
    match s {
        Stmt::Assign { value, .. } => node("assign", vec![ident(), expr_tree(value)]),
        Stmt::AugAssign { op, value, .. } => node(format!("augassign:{op}"), vec![ident(), expr_tree(value)]),
        Stmt::Expr(e) => node("expr", vec![expr_tree(e)]),
        Stmt::Return(e) => node("return", e.iter().map(expr_tree).collect()),
        Stmt::Print(args) => node("print", args.iter().map(expr_tree).collect()),
        Stmt::If {
            cond,
            then_body,
            elifs,
            else_body,
        } => {
            let mut ch = vec![expr_tree(cond), block_tree(then_body)];
            ch.extend(
                elifs
                    .iter()
                    .map(|(c, b)| node("elif", vec![expr_tree(c), block_tree(b)])),
            );
            if let Some(b) = else_body {
                ch.push(node("else", vec![block_tree(b)]));
            }
            node("if", ch)
        }
        Stmt::While { cond, body } => node("while", vec![expr_tree(cond), block_tree(body)]),
        Stmt::ForRange { args, body, .. } => node(
            "for",
            vec![
                ident(),
                node("range", args.iter().map(expr_tree).collect()),
                block_tree(body),
            ],
        ),
    }
}

pub fn program_tree(p: &Program) -> Tree {
    node(
        "def",
        vec![
            ident(),
            node("params", p.params.iter().map(|_| ident()).collect()),
            block_tree(&p.body),
        ],
    )
}

impl Tree {
    pub fn height(&self) -> usize {
        1 + self.children.iter().map(Tree::height).max().unwrap_or(0)
    }

    /// Every subtree of height at least 2, outermost first.
    pub fn inner_subtrees(&self) -> Vec<&Tree> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            if !t.children.is_empty() {
                out.push(t);
                stack.extend(t.children.iter().rev());
            }
        }
        out
    }
}

/// Reference subtrees (height >= 2) that also occur in the candidate, and
/// the reference subtree count.
pub fn ast_counts(cand: Option<&Program>, reference: &Program) -> (usize, usize) {
    let rt = program_tree(reference);
    let ref_subtrees = rt.inner_subtrees();
    let Some(cand) = cand else {
        return (0, ref_subtrees.len());
    };
    let ct = program_tree(cand);
    let have: HashSet<&Tree> = ct.inner_subtrees().into_iter().collect();
    (
        ref_subtrees.iter().filter(|t| have.contains(*t)).count(),
        ref_subtrees.len(),
    )
}

/// A def-use edge: normalized variable, defining statement, using statement.
/// Statement 0 is the function header (parameters); the rest are numbered
/// in pre-order.
pub type DefUse = (usize, usize, usize);

type Reaching = BTreeMap<usize, BTreeSet<usize>>;

struct Flow {
    names: BTreeMap<String, usize>,
    stmt_index: usize,
    edges: BTreeSet<DefUse>,
}

impl Flow {
    fn var(&mut self, name: &str) -> usize {
        let n = self.names.len();
        *self.names.entry(name.to_string()).or_insert(n)
    }

    fn uses(&mut self, e: &Expr, at: usize, state: &Reaching) {
        let mut names = Vec::new();
        e.walk(&mut |e| {
            if let Expr::Name(n) = e {
                names.push(n.clone());
            }
        });
        for n in names {
            let v = self.var(&n);
            for &d in state.get(&v).into_iter().flatten() {
                self.edges.insert((v, d, at));
            }
        }
    }

    fn block(&mut self, b: &[Stmt], state: &mut Reaching) {
        for s in b {
            self.stmt(s, state);
        }
    }

    /// Iterates a loop body until the reaching definitions at the loop head
    /// settle. Every pass reuses the same statement numbers. `var` is a
    /// loop variable the header defines before each iteration.
    fn looped(&mut self, at: usize, cond: Option<&Expr>, var: Option<usize>, body: &[Stmt], state: &mut Reaching) {
        let start = self.stmt_index;
        let mut head = state.clone();
        loop {
            self.stmt_index = start;
            if let Some(c) = cond {
                self.uses(c, at, &head);
            }
            let mut inner = head.clone();
            if let Some(v) = var {
                inner.insert(v, BTreeSet::from([at]));
            }
            self.block(body, &mut inner);
            if !block_falls_through(body) {
                break;
            }
            let merged = merge(&head, &inner);
            if merged == head {
                break;
            }
            head = merged;
        }
        if let Some(v) = var {
            head.entry(v).or_default().insert(at);
        }
        *state = head;
    }

    fn stmt(&mut self, s: &Stmt, state: &mut Reaching) {
        self.stmt_index += 1;
        let at = self.stmt_index;
        match s {
            Stmt::Assign { target, value } => {
                self.uses(value, at, state);
                let v = self.var(target);
                state.insert(v, BTreeSet::from([at]));
            }
            Stmt::AugAssign { target, value, .. } => {
                self.uses(&Expr::Name(target.clone()), at, state);
                self.uses(value, at, state);
                let v = self.var(target);
                state.insert(v, BTreeSet::from([at]));
            }
            Stmt::Expr(_) | Stmt::Return(_) | Stmt::Print(_) => {
                for e in stmt_exprs(s) {
                    self.uses(e, at, state);
                }
            }
            Stmt::If {
                cond,
                then_body,
                elifs,
                else_body,
            } => {
                self.uses(cond, at, state);
                let mut out: Option<Reaching> = None;
                let mut join = |st: Reaching, falls: bool| {
                    if falls {
                        out = Some(match out.take() {
                            Some(o) => merge(&o, &st),
                            None => st,
                        });
                    }
                };
                let mut branch = state.clone();
                self.block(then_body, &mut branch);
                join(branch, block_falls_through(then_body));
                for (c, b) in elifs {
                    // elif conditions belong to the if statement
                    self.uses(c, at, state);
                    let mut branch = state.clone();
                    self.block(b, &mut branch);
                    join(branch, block_falls_through(b));
                }
                match else_body {
                    Some(b) => {
                        let mut branch = state.clone();
                        self.block(b, &mut branch);
                        join(branch, block_falls_through(b));
                    }
                    None => join(state.clone(), true),
                }
                *state = out.unwrap_or_default();
            }
            Stmt::While { cond, body } => self.looped(at, Some(cond), None, body, state),
            Stmt::ForRange { var, args, body } => {
                for a in args {
                    self.uses(a, at, state);
                }
                let v = self.var(var);
                self.looped(at, None, Some(v), body, state);
            }
        }
    }
}

fn merge(a: &Reaching, b: &Reaching) -> Reaching {
    let mut out = a.clone();
    for (k, v) in b {
        out.entry(*k).or_default().extend(v.iter().copied());
    }
    out
}

/// Def-use edges with variables numbered by first appearance (parameters
/// first), so consistently renamed programs have equal edge sets.
pub fn dataflow_edges(p: &Program) -> BTreeSet<DefUse> {
    let mut f = Flow {
        names: BTreeMap::new(),
        stmt_index: 0,
        edges: BTreeSet::new(),
    };
    let mut state = Reaching::new();
    for param in &p.params {
        let v = f.var(param);
        state.insert(v, BTreeSet::from([0]));
    }
    f.block(&p.body, &mut state);
    f.edges
}

/// Matched and total reference def-use edges. A reference without edges
/// counts as one edge, matched iff the candidate parses.
pub fn dataflow_counts(cand: Option<&Program>, reference: &Program) -> (usize, usize) {
    let re = dataflow_edges(reference);
    if re.is_empty() {
        return (cand.is_some() as usize, 1);
    }
    let Some(cand) = cand else {
        return (0, re.len());
    };
    let ce = dataflow_edges(cand);
    (re.intersection(&ce).count(), re.len())
}

pub fn codebleu<S: AsRef<str>, T: AsRef<str>>(
    candidates: &[S],
    references: &[T],
    weights: &CodeBleuWeights,
) -> Result<CodeBleu, MetricError> {
    check_lengths(candidates.len(), references.len())?;
    let refs = references
        .iter()
        .enumerate()
        .map(|(i, r)| parse(r.as_ref()).map_err(|_| MetricError::ReferenceUnparseable(i)))
        .collect::<Result<Vec<_>, _>>()?;
    let ngram = pooled(candidates, references, |_| 1.0).score();
    let weighted = weighted_ngram(candidates, references, weights.keyword_factor)?;
    let (mut am, mut at, mut dm, mut dt) = (0, 0, 0, 0);
    for (c, r) in candidates.iter().zip(&refs) {
        let cand = parse(c.as_ref()).ok();
        let (m, t) = ast_counts(cand.as_ref(), r);
        am += m;
        at += t;
        let (m, t) = dataflow_counts(cand.as_ref(), r);
        dm += m;
        dt += t;
    }
    let ratio = |m: usize, t: usize| if t == 0 { 1.0 } else { m as f64 / t as f64 };
    let (ast_match, dataflow_match) = (ratio(am, at), ratio(dm, dt));
    let score = 100.0
        * (weights.ngram * ngram
            + weights.weighted_ngram * weighted
            + weights.ast_match * ast_match
            + weights.dataflow_match * dataflow_match);
    Ok(CodeBleu {
        score,
        ngram,
        weighted_ngram: weighted,
        ast_match,
        dataflow_match,
    })
}
