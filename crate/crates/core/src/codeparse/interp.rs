//! Reference interpreter with Python semantics over 64-bit integers.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use super::ast::*;
use super::parser::literal_step;

pub const DEFAULT_STEP_LIMIT: u64 = 1_000_000;

const MAX_DEPTH: usize = 200;
const MAX_STR_LEN: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Str(String),
    None,
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(true) => f.write_str("True"),
            Value::Bool(false) => f.write_str("False"),
            Value::Str(s) => f.write_str(s),
            Value::None => f.write_str("None"),
        }
    }
}

impl Value {
    fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "int",
            Value::Bool(_) => "bool",
            Value::Str(_) => "str",
            Value::None => "NoneType",
        }
    }

    pub fn truthy(&self) -> bool {
        match self {
            Value::Int(v) => *v != 0,
            Value::Bool(b) => *b,
            Value::Str(s) => !s.is_empty(),
            Value::None => false,
        }
    }

    fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(*v),
            Value::Bool(b) => Some(*b as i64),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub return_value: Value,
    pub printed: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuntimeError {
    #[error("{name}() takes {expected} arguments but {given} were given")]
    ArityMismatch {
        name: String,
        expected: usize,
        given: usize,
    },
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("integer overflow")]
    Overflow,
    #[error("step limit of {0} exceeded")]
    StepLimitExceeded(u64),
    #[error("name '{0}' is not defined")]
    NameError(String),
}

impl RuntimeError {
    /// Compares errors by kind only; messages carry identifiers that change
    /// under renaming.
    pub fn same_kind(&self, other: &RuntimeError) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }
}

/// Runs `p` on `args`. Every executed statement, loop test and call costs one
/// step.
pub fn interpret(p: &Program, args: &[Value], step_limit: u64) -> Result<RunResult, RuntimeError> {
    let mut m = Machine {
        prog: p,
        steps: 0,
        limit: step_limit,
        depth: 0,
        printed: String::new(),
    };
    let ret = m.call(args)?;
    Ok(RunResult {
        return_value: ret,
        printed: m.printed,
    })
}

struct Machine<'p> {
    prog: &'p Program,
    steps: u64,
    limit: u64,
    depth: usize,
    printed: String,
}

type Env = HashMap<String, Value>;

enum Flow {
    Next,
    Return(Value),
}

impl<'p> Machine<'p> {
    fn tick(&mut self) -> Result<(), RuntimeError> {
        self.steps += 1;
        if self.steps > self.limit {
            Err(RuntimeError::StepLimitExceeded(self.limit))
        } else {
            Ok(())
        }
    }

    fn call(&mut self, args: &[Value]) -> Result<Value, RuntimeError> {
        let prog = self.prog;
        if args.len() != prog.params.len() {
            return Err(RuntimeError::ArityMismatch {
                name: prog.name.clone(),
                expected: prog.params.len(),
                given: args.len(),
            });
        }
        self.tick()?;
        if self.depth >= MAX_DEPTH {
            return Err(RuntimeError::StepLimitExceeded(self.limit));
        }
        self.depth += 1;
        let mut env: Env = prog.params.iter().cloned().zip(args.iter().cloned()).collect();
        let flow = self.block(&prog.body, &mut env);
        self.depth -= 1;
        match flow? {
            Flow::Return(v) => Ok(v),
            Flow::Next => Ok(Value::None),
        }
    }

    fn block(&mut self, stmts: &[Stmt], env: &mut Env) -> Result<Flow, RuntimeError> {
        for s in stmts {
            if let Flow::Return(v) = self.stmt(s, env)? {
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Next)
    }

    fn stmt(&mut self, s: &Stmt, env: &mut Env) -> Result<Flow, RuntimeError> {
        self.tick()?;
        match s {
            Stmt::Assign { target, value } => {
                let v = self.eval(value, env)?;
                env.insert(target.clone(), v);
            }
            Stmt::AugAssign { target, op, value } => {
                let cur = lookup(env, target)?;
                let rhs = self.eval(value, env)?;
                let v = binary(*op, cur, rhs)?;
                env.insert(target.clone(), v);
            }
            Stmt::Expr(e) => {
                self.eval(e, env)?;
            }
            Stmt::Return(e) => {
                let v = match e {
                    Some(e) => self.eval(e, env)?,
                    None => Value::None,
                };
                return Ok(Flow::Return(v));
            }
            Stmt::Print(args) => {
                let mut parts = Vec::with_capacity(args.len());
                for a in args {
                    parts.push(self.eval(a, env)?.to_string());
                }
                let line = parts.join(" ");
                if self.printed.len() + line.len() > MAX_STR_LEN {
                    return Err(RuntimeError::Overflow);
                }
                self.printed.push_str(&line);
                self.printed.push('\n');
            }
            Stmt::If {
                cond,
                then_body,
                elifs,
                else_body,
            } => {
                if self.eval(cond, env)?.truthy() {
                    return self.block(then_body, env);
                }
                for (c, b) in elifs {
                    self.tick()?;
                    if self.eval(c, env)?.truthy() {
                        return self.block(b, env);
                    }
                }
                if let Some(b) = else_body {
                    return self.block(b, env);
                }
            }
            Stmt::While { cond, body } => loop {
                if !self.eval(cond, env)?.truthy() {
                    break;
                }
                if let Flow::Return(v) = self.block(body, env)? {
                    return Ok(Flow::Return(v));
                }
                self.tick()?;
            },
            Stmt::ForRange { var, args, body } => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    let v = self.eval(a, env)?;
                    vals.push(v.as_int().ok_or_else(|| {
                        RuntimeError::TypeMismatch(format!("range() argument must be int, not {}", v.type_name()))
                    })?);
                }
                let (start, stop) = match vals.as_slice() {
                    [stop] => (0, *stop),
                    [start, stop, ..] => (*start, *stop),
                    [] => unreachable!("parser guarantees range arguments"),
                };
                let step = args.get(2).and_then(literal_step).unwrap_or(1);
                let mut i = start;
                while (step > 0 && i < stop) || (step < 0 && i > stop) {
                    env.insert(var.clone(), Value::Int(i));
                    if let Flow::Return(v) = self.block(body, env)? {
                        return Ok(Flow::Return(v));
                    }
                    self.tick()?;
                    i = match i.checked_add(step) {
                        Some(n) => n,
                        None => break,
                    };
                }
            }
        }
        Ok(Flow::Next)
    }

    fn eval(&mut self, e: &Expr, env: &Env) -> Result<Value, RuntimeError> {
        Ok(match e {
            Expr::Int(v) => Value::Int(*v),
            Expr::Bool(b) => Value::Bool(*b),
            Expr::Str(s) => Value::Str(s.clone()),
            Expr::NoneLit => Value::None,
            Expr::Name(n) => lookup(env, n)?,
            Expr::Paren(inner) => self.eval(inner, env)?,
            Expr::Unary(op, inner) => {
                let v = self.eval(inner, env)?;
                match op {
                    UnaryOp::Not => Value::Bool(!v.truthy()),
                    UnaryOp::Pos => Value::Int(int_operand(&v, "unary +")?),
                    UnaryOp::Neg => Value::Int(
                        int_operand(&v, "unary -")?
                            .checked_neg()
                            .ok_or(RuntimeError::Overflow)?,
                    ),
                }
            }
            Expr::Binary(op, l, r) => {
                let a = self.eval(l, env)?;
                let b = self.eval(r, env)?;
                binary(*op, a, b)?
            }
            Expr::Compare(op, l, r) => {
                let a = self.eval(l, env)?;
                let b = self.eval(r, env)?;
                Value::Bool(compare(*op, &a, &b)?)
            }
            Expr::BoolOp(op, l, r) => {
                let a = self.eval(l, env)?;
                match (op, a.truthy()) {
                    (BoolOpKind::And, false) | (BoolOpKind::Or, true) => a,
                    _ => self.eval(r, env)?,
                }
            }
            Expr::Call(name, args) => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval(a, env)?);
                }
                self.call_named(name, vals)?
            }
        })
    }

    fn call_named(&mut self, name: &str, args: Vec<Value>) -> Result<Value, RuntimeError> {
        let arity = |expected: usize| RuntimeError::ArityMismatch {
            name: name.to_string(),
            expected,
            given: args.len(),
        };
        match name {
            "len" => match args.as_slice() {
                [Value::Str(s)] => Ok(Value::Int(s.chars().count() as i64)),
                [v] => Err(RuntimeError::TypeMismatch(format!(
                    "object of type '{}' has no len()",
                    v.type_name()
                ))),
                _ => Err(arity(1)),
            },
            "abs" => match args.as_slice() {
                [v] => Ok(Value::Int(
                    int_operand(v, "abs()")?.checked_abs().ok_or(RuntimeError::Overflow)?,
                )),
                _ => Err(arity(1)),
            },
            "min" | "max" => {
                let want_max = name == "max";
                let items: Vec<Value> = match args.as_slice() {
                    [] => return Err(arity(1)),
                    [Value::Str(s)] => s.chars().map(|c| Value::Str(c.to_string())).collect(),
                    [v] => {
                        return Err(RuntimeError::TypeMismatch(format!(
                            "'{}' object is not iterable",
                            v.type_name()
                        )))
                    }
                    _ => args.clone(),
                };
                let mut best: Option<Value> = None;
                for v in items {
                    best = Some(match best {
                        None => v,
                        Some(b) => {
                            let better = if want_max {
                                compare(CmpOp::Gt, &v, &b)?
                            } else {
                                compare(CmpOp::Lt, &v, &b)?
                            };
                            if better {
                                v
                            } else {
                                b
                            }
                        }
                    });
                }
                best.ok_or_else(|| RuntimeError::TypeMismatch(format!("{name}() arg is an empty sequence")))
            }
            n if n == self.prog.name => self.call(&args),
            _ => Err(RuntimeError::NameError(name.to_string())),
        }
    }
}

fn lookup(env: &Env, name: &str) -> Result<Value, RuntimeError> {
    env.get(name)
        .cloned()
        .ok_or_else(|| RuntimeError::NameError(name.to_string()))
}

fn int_operand(v: &Value, what: &str) -> Result<i64, RuntimeError> {
    v.as_int()
        .ok_or_else(|| RuntimeError::TypeMismatch(format!("bad operand type for {what}: '{}'", v.type_name())))
}

fn floor_div(a: i64, b: i64) -> Result<i64, RuntimeError> {
    if b == 0 {
        return Err(RuntimeError::DivisionByZero);
    }
    let q = a.checked_div(b).ok_or(RuntimeError::Overflow)?;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        Ok(q - 1)
    } else {
        Ok(q)
    }
}

fn floor_mod(a: i64, b: i64) -> Result<i64, RuntimeError> {
    if b == 0 {
        return Err(RuntimeError::DivisionByZero);
    }
    let r = a.checked_rem(b).unwrap_or(0);
    if r != 0 && ((r < 0) != (b < 0)) {
        Ok(r + b)
    } else {
        Ok(r)
    }
}

fn repeat(s: &str, n: i64) -> Result<Value, RuntimeError> {
    if n <= 0 {
        return Ok(Value::Str(String::new()));
    }
    let len = (s.len() as u128) * (n as u128);
    if len > MAX_STR_LEN as u128 {
        return Err(RuntimeError::Overflow);
    }
    Ok(Value::Str(s.repeat(n as usize)))
}

fn binary(op: BinOp, a: Value, b: Value) -> Result<Value, RuntimeError> {
    match (&a, &b) {
        (Value::Str(x), Value::Str(y)) if op == BinOp::Add => {
            if x.len() + y.len() > MAX_STR_LEN {
                return Err(RuntimeError::Overflow);
            }
            return Ok(Value::Str(format!("{x}{y}")));
        }
        (Value::Str(s), n) | (n, Value::Str(s)) if op == BinOp::Mul => {
            if let Some(k) = n.as_int() {
                return repeat(s, k);
            }
        }
        _ => {}
    }
    let (Some(x), Some(y)) = (a.as_int(), b.as_int()) else {
        return Err(RuntimeError::TypeMismatch(format!(
            "unsupported operand types for {}: '{}' and '{}'",
            op.symbol(),
            a.type_name(),
            b.type_name()
        )));
    };
    let v = match op {
        BinOp::Add => x.checked_add(y).ok_or(RuntimeError::Overflow)?,
        BinOp::Sub => x.checked_sub(y).ok_or(RuntimeError::Overflow)?,
        BinOp::Mul => x.checked_mul(y).ok_or(RuntimeError::Overflow)?,
        BinOp::FloorDiv => floor_div(x, y)?,
        BinOp::Mod => floor_mod(x, y)?,
        BinOp::Div => {
            if y == 0 {
                return Err(RuntimeError::DivisionByZero);
            }
            // true division is only representable when exact
            if x.checked_rem(y).unwrap_or(0) != 0 {
                return Err(RuntimeError::TypeMismatch(format!("{x} / {y} is not an integer")));
            }
            x.checked_div(y).ok_or(RuntimeError::Overflow)?
        }
        BinOp::Pow => {
            if y < 0 {
                return Err(RuntimeError::TypeMismatch("negative exponent yields a float".into()));
            }
            let e = u32::try_from(y).map_err(|_| RuntimeError::Overflow)?;
            x.checked_pow(e).ok_or(RuntimeError::Overflow)?
        }
    };
    Ok(Value::Int(v))
}

fn compare(op: CmpOp, a: &Value, b: &Value) -> Result<bool, RuntimeError> {
    use std::cmp::Ordering;
    let ord: Option<Ordering> = match (a, b) {
        (Value::Str(x), Value::Str(y)) => Some(x.cmp(y)),
        (Value::None, Value::None) => {
            if matches!(op, CmpOp::Eq | CmpOp::Ne) {
                Some(Ordering::Equal)
            } else {
                None
            }
        }
        _ => match (a.as_int(), b.as_int()) {
            (Some(x), Some(y)) => Some(x.cmp(&y)),
            _ => None,
        },
    };
    match (op, ord) {
        (CmpOp::Eq, o) => Ok(o == Some(Ordering::Equal)),
        (CmpOp::Ne, o) => Ok(o != Some(Ordering::Equal)),
        (_, None) => Err(RuntimeError::TypeMismatch(format!(
            "'{}' not supported between instances of '{}' and '{}'",
            op.symbol(),
            a.type_name(),
            b.type_name()
        ))),
        (CmpOp::Lt, Some(o)) => Ok(o == Ordering::Less),
        (CmpOp::Le, Some(o)) => Ok(o != Ordering::Greater),
        (CmpOp::Gt, Some(o)) => Ok(o == Ordering::Greater),
        (CmpOp::Ge, Some(o)) => Ok(o != Ordering::Less),
    }
}
