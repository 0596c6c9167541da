//! PyMini: the single-function Python subset every corpus program is written
//! in. Lexing, parsing, printing, identifier analysis and interpretation.

pub mod ast;
mod canon;
mod idents;
mod interp;
pub mod lexer;
mod parser;
mod printer;

use thiserror::Error;

pub use ast::*;
pub use canon::{canonicalize, desugar_for};
pub use idents::{all_names, apply_renaming, identifiers, stmt_exprs, Identifiers, Renaming};
pub use interp::{interpret, RunResult, RuntimeError, Value, DEFAULT_STEP_LIMIT};
pub use parser::{literal_step, parse, parse_expr, parse_expr_list, parse_simple_stmt};
pub use printer::{expr_text, join_exprs, paren_if_below, precedence, print_canonical, simple_stmt_text, str_repr};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("unsupported feature at {line}:{col}: {feature}")]
    Unsupported { line: usize, col: usize, feature: String },
}

impl ParseError {
    pub fn position(&self) -> (usize, usize) {
        match self {
            ParseError::Syntax { line, col, .. } | ParseError::Unsupported { line, col, .. } => (*line, *col),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const FUN1: &str = "def fun1(x):\n    y = ((16 + x) - 20)\n    return y";

    const FACTORIAL: &str = "\
def fact(n):
    r = 1
    while n > 1:
        r *= n
        n -= 1
    return r
";

    fn run(src: &str, args: &[Value]) -> Result<RunResult, RuntimeError> {
        interpret(&parse(src).unwrap(), args, DEFAULT_STEP_LIMIT)
    }

    #[test]
    fn fun1_structure() {
        let p = parse(FUN1).unwrap();
        assert_eq!(p.name, "fun1");
        assert_eq!(p.params, vec!["x"]);
        assert!(matches!(
            p.body.as_slice(),
            [Stmt::Assign { .. }, Stmt::Return(Some(_))]
        ));
        assert_eq!(print_canonical(&p), format!("{FUN1}\n"));
        assert!(print_canonical(&p).contains("((16 + x) - 20)"));
    }

    #[test]
    fn unclosed_param_list() {
        let err = parse("def f(").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { .. }), "{err}");
        assert_eq!(err.position(), (1, 7));
    }

    #[test]
    fn import_is_unsupported() {
        let err = parse("def f(x):\n    import os").unwrap_err();
        assert!(matches!(err, ParseError::Unsupported { .. }), "{err}");
    }

    #[test]
    fn out_of_subset_constructs() {
        for src in [
            "class A:\n    pass\n",
            "def f(x):\n    return x.y\n",
            "def f(x):\n    return [x]\n",
            "def f(x):\n    return 1.5\n",
            "def f(x):\n    if x: return 1\n    return 2\n",
            "def f(x):\n    return 1 < x < 3\n",
            "def f(x):\n    a, b = 1, 2\n",
            "def f(x=1):\n    return x\n",
            "def f(x):\n    return x\n    y = 1\n",
            "def f(x):\n    while x:\n        return 1\n",
            "def f(x):\n    while x:\n        break\n",
            "def f(x):\n    return print(x)\n",
            "def f(x):\n    return x\ndef g(y):\n    return y\n",
            "def f(x):\n    for i in range(0, x, x):\n        print(i)\n",
        ] {
            assert!(
                matches!(parse(src), Err(ParseError::Unsupported { .. })),
                "{src:?} -> {:?}",
                parse(src)
            );
        }
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse("def f(x):\n    y = \n").unwrap_err();
        assert_eq!(err.position().0, 2);
        let err = parse("def f(x):\n\treturn x\n").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 2, .. }));
    }

    #[test]
    fn else_if_folds_into_elif() {
        let a = parse(
            "def f(x):\n    if x:\n        y = 1\n    else:\n        if x > 1:\n            y = 2\n    return y\n",
        )
        .unwrap();
        let b = parse("def f(x):\n    if x:\n        y = 1\n    elif x > 1:\n        y = 2\n    return y\n").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn canonical_printing_spacing() {
        let p = parse("def f(a,b):\n    c=a+b*2\n    if not(c>=3)and a:\n        print(c,'x')\n    return -c**2\n")
            .unwrap();
        assert_eq!(
            print_canonical(&p),
            "def f(a, b):\n    c = a + b * 2\n    if not (c >= 3) and a:\n        print(c, 'x')\n    return -c ** 2\n"
        );
    }

    #[test]
    fn string_repr_round_trips() {
        for s in ["plain", "it's", "say \"hi\"", "both ' and \"", "tab\tnl\nslash\\"] {
            let e = parse_expr(&str_repr(s)).unwrap();
            assert_eq!(e, Expr::Str(s.to_string()));
        }
        assert_eq!(str_repr("it's"), "\"it's\"");
    }

    #[test]
    fn fragments() {
        assert!(matches!(parse_simple_stmt("x += 1").unwrap(), Stmt::AugAssign { .. }));
        assert!(matches!(parse_simple_stmt("return").unwrap(), Stmt::Return(None)));
        assert_eq!(parse_expr_list("a, b + 1").unwrap().len(), 2);
        assert!(parse_expr("a, b").is_err());
        assert!(parse_expr("add x to sum").is_err());
    }

    #[test]
    fn interpret_examples() {
        assert_eq!(run(FUN1, &[Value::Int(4)]).unwrap().return_value, Value::Int(0));
        assert_eq!(run(FACTORIAL, &[Value::Int(5)]).unwrap().return_value, Value::Int(120));
        let err = run("def f():\n    while True:\n        x = 1\n", &[]).unwrap_err();
        assert!(matches!(err, RuntimeError::StepLimitExceeded(1_000_000)));
    }

    #[test]
    fn interpret_semantics() {
        let r = run(
            "def f(a, b):\n    print(a // b, a % b, -a // b, -a % b)\n",
            &[Value::Int(7), Value::Int(2)],
        )
        .unwrap();
        assert_eq!(r.printed, "3 1 -4 1\n");
        assert_eq!(r.return_value, Value::None);
        let r = run(
            "def f(s):\n    return len(s * 3) + abs(-2)\n",
            &[Value::Str("ab".into())],
        )
        .unwrap();
        assert_eq!(r.return_value, Value::Int(8));
        let r = run("def f(x):\n    return x and 'yes' or 'no'\n", &[Value::Int(0)]).unwrap();
        assert_eq!(r.return_value, Value::Str("no".into()));
        assert_eq!(
            run("def f(x):\n    return max(x, 3, 1)\n", &[Value::Int(2)])
                .unwrap()
                .return_value,
            Value::Int(3)
        );
        let r = run(
            "def f(n):\n    if n <= 1:\n        return 1\n    return n * f(n - 1)\n",
            &[Value::Int(6)],
        )
        .unwrap();
        assert_eq!(r.return_value, Value::Int(720));
        let r = run(
            "def f(n):\n    t = 0\n    for i in range(n, 0, -2):\n        t += i\n    return t\n",
            &[Value::Int(6)],
        )
        .unwrap();
        assert_eq!(r.return_value, Value::Int(12));
    }

    #[test]
    fn interpret_errors() {
        let big = Value::Int(i64::MAX);
        assert!(matches!(
            run("def f(x):\n    return x + 1\n", &[big]),
            Err(RuntimeError::Overflow)
        ));
        assert!(matches!(
            run("def f(x):\n    return x // 0\n", &[Value::Int(1)]),
            Err(RuntimeError::DivisionByZero)
        ));
        assert!(matches!(
            run("def f(x):\n    return x + 'a'\n", &[Value::Int(1)]),
            Err(RuntimeError::TypeMismatch(_))
        ));
        assert!(matches!(
            run("def f(x):\n    return x\n", &[]),
            Err(RuntimeError::ArityMismatch { .. })
        ));
        assert!(matches!(
            run("def f(x):\n    return y\n", &[Value::Int(1)]),
            Err(RuntimeError::NameError(_))
        ));
        assert!(matches!(
            run("def f(x):\n    return f(x)\n", &[Value::Int(1)]),
            Err(RuntimeError::StepLimitExceeded(_))
        ));
    }

    #[test]
    fn identifier_sets() {
        let ids = identifiers(&parse(FUN1).unwrap());
        assert_eq!(ids.functions.into_iter().collect::<Vec<_>>(), vec!["fun1"]);
        assert_eq!(ids.variables.into_iter().collect::<Vec<_>>(), vec!["x", "y"]);

        let ids = identifiers(&parse("def g(s):\n    n = len(s)\n    return n\n").unwrap());
        assert_eq!(ids.functions.into_iter().collect::<Vec<_>>(), vec!["g"]);
        assert_eq!(ids.variables.into_iter().collect::<Vec<_>>(), vec!["n", "s"]);

        let ids = identifiers(&parse("def h(n):\n    for i in range(n):\n        print(i)\n").unwrap());
        assert!(ids.variables.contains("i"));
    }

    #[test]
    fn renaming_is_invertible() {
        let p = parse("def g(a):\n    b = a + g(a - 1)\n    return b\n").unwrap();
        let mut r = Renaming::default();
        r.functions.insert("g".into(), "zz".into());
        r.variables.insert("a".into(), "q".into());
        let q = apply_renaming(&p, &r);
        assert_eq!(print_canonical(&q), "def zz(q):\n    b = q + zz(q - 1)\n    return b\n");
        assert_eq!(apply_renaming(&q, &r.inverse()), p);
    }

    #[test]
    fn desugared_for_loop() {
        let p = parse("def f(n):\n    for i in range(1, n + 1):\n        print(i)\n").unwrap();
        assert_eq!(
            print_canonical(&desugar_for(&p)),
            "def f(n):\n    i = 1\n    while i < n + 1:\n        print(i)\n        i += 1\n"
        );
        let p = parse("def f(n):\n    for i in range(n > 2, 0, -1):\n        print(i)\n").unwrap();
        assert!(print_canonical(&desugar_for(&p)).contains("while i > 0:"));
        let p = parse("def f(n):\n    for i in range(n or 2):\n        print(i)\n").unwrap();
        assert!(print_canonical(&desugar_for(&p)).contains("while i < (n or 2):"));
    }

    #[test]
    fn canonical_form_nests_tails() {
        let p = parse("def f(x):\n    if x:\n        return 1\n    y = 2\n    return y\n").unwrap();
        assert_eq!(
            print_canonical(&canonicalize(&p)),
            "def f(x):\n    if x:\n        return 1\n    else:\n        y = 2\n        return y\n"
        );
        let q = parse(FUN1).unwrap();
        assert_eq!(canonicalize(&q), q);
    }
}
