//! Random PyMini program generator for corpora, tests and benchmarks.
//!
//! Generated programs are in canonical form, never place a bare `return`
//! anywhere, and keep every block text short enough to render at the default
//! font size range.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::code2flow::lower;
use crate::codeparse::{
    block_falls_through, canonicalize, expr_text, paren_if_below, parse, print_canonical, BinOp, BoolOpKind, CmpOp,
    Expr, Program, Stmt, UnaryOp,
};
use crate::flowgraph::BlockKind;

const NAMES: &[&str] = &[
    "add", "count", "total", "check", "find", "calc", "score", "scale", "step", "digits", "parity", "clamp", "mix",
    "walk", "sum_to", "fizz", "collatz", "bound", "area", "diff",
];
const PARAMS: &[&str] = &["a", "b", "n", "x", "y", "k", "m", "s"];
const LOCALS: &[&str] = &["t", "r", "c", "acc", "res", "z", "val", "cnt"];
const LOOP_VARS: &[&str] = &["i", "j", "w"];
const WORDS: &[&str] = &["yes", "no", "done", "even", "odd", "big", "small"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthConfig {
    /// Maximum nesting of compound statements.
    pub max_depth: usize,
    /// Maximum statements per block.
    pub max_block: usize,
    /// Maximum characters in a decision block text.
    pub max_decision_text: usize,
    /// Maximum characters in any other block text.
    pub max_text: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            max_depth: 3,
            max_block: 4,
            max_decision_text: 24,
            max_text: 32,
        }
    }
}

struct Gen<'a> {
    rng: ChaCha8Rng,
    cfg: &'a SynthConfig,
}

#[derive(Clone)]
struct Scope {
    defined: Vec<String>,
    frozen: Vec<String>,
}

impl Gen<'_> {
    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    fn pick<'s>(&mut self, xs: &'s [&'s str]) -> &'s str {
        xs.choose(&mut self.rng).expect("non-empty pool")
    }

    fn leaf(&mut self, scope: &Scope) -> Expr {
        if !scope.defined.is_empty() && self.chance(0.65) {
            Expr::Name(scope.defined.choose(&mut self.rng).unwrap().clone())
        } else {
            Expr::Int(self.rng.gen_range(0..=12))
        }
    }

    fn arith(&mut self, scope: &Scope, depth: usize) -> Expr {
        if depth == 0 || self.chance(0.4) {
            return self.leaf(scope);
        }
        match self.rng.gen_range(0..10) {
            0..=5 => {
                let op = *[BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::FloorDiv, BinOp::Mod]
                    .choose(&mut self.rng)
                    .unwrap();
                let l = self.arith(scope, depth - 1);
                let r = if matches!(op, BinOp::FloorDiv | BinOp::Mod) {
                    Expr::Int(self.rng.gen_range(2..=5))
                } else {
                    self.arith(scope, depth - 1)
                };
                binary(op, l, r)
            }
            6 => Expr::Call("abs".into(), vec![self.arith(scope, depth - 1)]),
            7 => {
                let f = if self.chance(0.5) { "min" } else { "max" };
                Expr::Call(f.into(), vec![self.leaf(scope), self.leaf(scope)])
            }
            8 => Expr::Unary(UnaryOp::Neg, Box::new(paren_if_below(self.leaf(scope), 7))),
            _ => binary(BinOp::Pow, self.leaf(scope), Expr::Int(self.rng.gen_range(0..=2))),
        }
    }

    fn compare(&mut self, scope: &Scope) -> Expr {
        let op = *[CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge]
            .choose(&mut self.rng)
            .unwrap();
        let l = self.arith(scope, 1);
        let r = self.arith(scope, 1);
        Expr::Compare(op, Box::new(paren_if_below(l, 5)), Box::new(paren_if_below(r, 5)))
    }

    fn cond(&mut self, scope: &Scope) -> Expr {
        loop {
            let e = match self.rng.gen_range(0..10) {
                0 => {
                    let kind = if self.chance(0.5) {
                        BoolOpKind::And
                    } else {
                        BoolOpKind::Or
                    };
                    let (l, r) = (self.compare(scope), self.compare(scope));
                    Expr::BoolOp(kind, Box::new(l), Box::new(r))
                }
                1 => Expr::Unary(UnaryOp::Not, Box::new(paren_if_below(self.compare(scope), 3))),
                _ => self.compare(scope),
            };
            if expr_text(&e).len() <= self.cfg.max_decision_text {
                return e;
            }
        }
    }

    fn value(&mut self, scope: &Scope, room: usize) -> Expr {
        loop {
            let e = self.arith(scope, 2);
            if expr_text(&e).len() <= room {
                return e;
            }
        }
    }

    fn target(&mut self, scope: &Scope) -> String {
        let assignable: Vec<&String> = scope.defined.iter().filter(|v| !scope.frozen.contains(v)).collect();
        if !assignable.is_empty() && self.chance(0.5) {
            assignable.choose(&mut self.rng).unwrap().to_string()
        } else {
            self.pick(LOCALS).to_string()
        }
    }

    fn simple(&mut self, scope: &mut Scope) -> Stmt {
        match self.rng.gen_range(0..10) {
            0..=4 => {
                let target = self.target(scope);
                let value = self.value(scope, self.cfg.max_text.saturating_sub(target.len() + 3));
                define(scope, &target);
                Stmt::Assign { target, value }
            }
            5..=6 => {
                let target = self.target(scope);
                if !scope.defined.contains(&target) {
                    let value = self.leaf(scope);
                    define(scope, &target);
                    return Stmt::Assign { target, value };
                }
                let op = *[BinOp::Add, BinOp::Sub, BinOp::Mul].choose(&mut self.rng).unwrap();
                let value = self.value(scope, self.cfg.max_text.saturating_sub(target.len() + 4));
                Stmt::AugAssign { target, op, value }
            }
            _ => {
                let room = self.cfg.max_text - "output: ".len();
                let mut args = vec![if self.chance(0.25) {
                    Expr::Str(self.pick(WORDS).to_string())
                } else {
                    self.value(scope, room)
                }];
                if self.chance(0.3) {
                    args.push(self.leaf(scope));
                }
                while crate::codeparse::join_exprs(&args).len() > room {
                    args.pop();
                    if args.is_empty() {
                        args.push(self.leaf(scope));
                    }
                }
                Stmt::Print(args)
            }
        }
    }

    fn ret(&mut self, scope: &Scope) -> Stmt {
        Stmt::Return(Some(self.value(scope, self.cfg.max_text - "output: ".len())))
    }

    fn block(&mut self, scope: &mut Scope, depth: usize, in_loop: bool) -> Vec<Stmt> {
        let n = self.rng.gen_range(1..=self.cfg.max_block.saturating_sub(depth).max(1));
        let mut out = Vec::new();
        for _ in 0..n {
            let ss = self.stmt(scope, depth, in_loop);
            let falls = block_falls_through(&ss);
            out.extend(ss);
            if !falls {
                return out;
            }
        }
        if !in_loop && depth > 0 && self.chance(0.2) {
            out.push(self.ret(scope));
        }
        out
    }

    fn stmt(&mut self, scope: &mut Scope, depth: usize, in_loop: bool) -> Vec<Stmt> {
        if depth < self.cfg.max_depth {
            match self.rng.gen_range(0..20) {
                0..=3 => return vec![self.if_stmt(scope, depth, in_loop)],
                4..=5 => return vec![self.for_stmt(scope, depth)],
                6 => return self.while_stmt(scope, depth),
                _ => {}
            }
        }
        vec![self.simple(scope)]
    }

    fn if_stmt(&mut self, scope: &mut Scope, depth: usize, in_loop: bool) -> Stmt {
        let cond = self.cond(scope);
        let arm = |g: &mut Self| {
            let mut inner = scope.clone();
            g.block(&mut inner, depth + 1, false)
        };
        let then_body = arm(self);
        let mut elifs = Vec::new();
        if self.chance(0.2) {
            let c = self.cond(scope);
            elifs.push((c, arm(self)));
        }
        let else_body = self.chance(0.5).then(|| arm(self));
        let s = Stmt::If {
            cond,
            then_body,
            elifs,
            else_body,
        };
        if in_loop && !block_falls_through(std::slice::from_ref(&s)) {
            return self.simple(scope);
        }
        s
    }

    /// A counting loop: the counter is initialized just before the loop and
    /// stepped at the end of the body, and neither it nor the bound is
    /// assigned inside.
    fn while_stmt(&mut self, scope: &mut Scope, depth: usize) -> Vec<Stmt> {
        let free: Vec<&str> = LOOP_VARS
            .iter()
            .copied()
            .filter(|v| !scope.frozen.iter().any(|f| f == v))
            .collect();
        let Some(&var) = free.choose(&mut self.rng) else {
            return vec![self.simple(scope)];
        };
        let params: Vec<String> = scope
            .defined
            .iter()
            .filter(|d| PARAMS.contains(&d.as_str()))
            .cloned()
            .collect();
        let bound = match params.choose(&mut self.rng) {
            Some(p) if self.chance(0.6) => Expr::Name(p.clone()),
            _ => Expr::Int(self.rng.gen_range(1..=6)),
        };
        let init = Stmt::Assign {
            target: var.to_string(),
            value: Expr::Int(self.rng.gen_range(0..=2)),
        };
        define(scope, var);
        let mut inner = scope.clone();
        inner.frozen.push(var.to_string());
        if let Expr::Name(b) = &bound {
            inner.frozen.push(b.clone());
        }
        let mut body = self.block(&mut inner, depth + 1, true);
        body.push(Stmt::AugAssign {
            target: var.to_string(),
            op: BinOp::Add,
            value: Expr::Int(self.rng.gen_range(1..=2)),
        });
        let cond = Expr::Compare(CmpOp::Lt, Box::new(Expr::Name(var.to_string())), Box::new(bound));
        vec![init, Stmt::While { cond, body }]
    }

    fn for_stmt(&mut self, scope: &mut Scope, depth: usize) -> Stmt {
        let free: Vec<&str> = LOOP_VARS
            .iter()
            .copied()
            .filter(|v| !scope.frozen.iter().any(|f| f == v))
            .collect();
        let Some(&var) = free.choose(&mut self.rng) else {
            return self.simple(scope);
        };
        let bound = if !scope.defined.is_empty() && self.chance(0.6) {
            Expr::Name(scope.defined.choose(&mut self.rng).unwrap().clone())
        } else {
            Expr::Int(self.rng.gen_range(1..=6))
        };
        let args = match self.rng.gen_range(0..6) {
            0 => vec![Expr::Int(self.rng.gen_range(0..=3)), bound],
            1 => vec![Expr::Int(0), bound, Expr::Int(self.rng.gen_range(2..=3))],
            2 => vec![bound, Expr::Int(0), Expr::Unary(UnaryOp::Neg, Box::new(Expr::Int(1)))],
            _ => vec![bound],
        };
        let mut inner = scope.clone();
        inner.frozen.push(var.to_string());
        define(&mut inner, var);
        let body = self.block(&mut inner, depth + 1, true);
        define(scope, var);
        Stmt::ForRange {
            var: var.to_string(),
            args,
            body,
        }
    }

    fn program(&mut self) -> Program {
        let mut name = self.pick(NAMES).to_string();
        if self.chance(0.3) {
            name.push_str(&self.rng.gen_range(1..=9).to_string());
        }
        let k = self.rng.gen_range(1..=3);
        let mut params: Vec<String> = PARAMS
            .choose_multiple(&mut self.rng, k)
            .map(|s| s.to_string())
            .collect();
        params.sort();
        let mut scope = Scope {
            defined: params.clone(),
            frozen: Vec::new(),
        };
        let mut body = self.block(&mut scope, 0, false);
        if block_falls_through(&body) && self.chance(0.75) {
            body.push(self.ret(&scope));
        }
        Program { name, params, body }
    }
}

fn binary(op: BinOp, l: Expr, r: Expr) -> Expr {
    let p = match op {
        BinOp::Add | BinOp::Sub => 5,
        BinOp::Pow => 8,
        _ => 6,
    };
    let (lmin, rmin) = if op == BinOp::Pow { (9, 7) } else { (p, p + 1) };
    Expr::Binary(op, Box::new(paren_if_below(l, lmin)), Box::new(paren_if_below(r, rmin)))
}

fn define(scope: &mut Scope, v: &str) {
    if !scope.defined.iter().any(|d| d == v) {
        scope.defined.push(v.to_string());
    }
}

fn texts_fit(p: &Program, cfg: &SynthConfig) -> bool {
    lower(p).nodes.iter().all(|n| {
        let limit = if n.kind == BlockKind::Decision {
            cfg.max_decision_text
        } else {
            cfg.max_text
        };
        n.text.chars().count() <= limit
    })
}

/// The program drawn from `seed` as its source text parses, before
/// canonicalization. It may contain `for` loops and `elif` chains.
pub fn generate_raw(seed: u64, cfg: &SynthConfig) -> Program {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        cfg,
    };
    loop {
        let p = g.program();
        if texts_fit(&canonicalize(&p), cfg) {
            return parse(&print_canonical(&p)).expect("generated programs print as valid source");
        }
    }
}

/// One canonical program drawn from `seed`.
pub fn generate(seed: u64, cfg: &SynthConfig) -> Program {
    canonicalize(&generate_raw(seed, cfg))
}

/// `n` programs with pairwise distinct canonical text.
pub fn generate_many(n: usize, seed: u64, cfg: &SynthConfig) -> Vec<Program> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(n);
    let mut i = 0u64;
    while out.len() < n {
        let p = generate(seed.wrapping_mul(0x2545_F491_4F6C_DD1D).wrapping_add(i), cfg);
        i += 1;
        if seen.insert(print_canonical(&p)) {
            out.push(p);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowgraph::validate;

    #[test]
    fn programs_are_canonical_and_reparse() {
        for p in generate_many(200, 1, &SynthConfig::default()) {
            let text = print_canonical(&p);
            assert_eq!(parse(&text).unwrap(), p, "{text}");
            assert_eq!(canonicalize(&p), p, "{text}");
            validate(&lower(&p)).unwrap();
        }
    }

    #[test]
    fn deterministic() {
        let cfg = SynthConfig::default();
        assert_eq!(generate(5, &cfg), generate(5, &cfg));
        assert_ne!(generate_many(3, 5, &cfg), generate_many(3, 6, &cfg));
    }
}
