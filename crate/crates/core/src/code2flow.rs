//! Lowering from a PyMini program to a flowchart.

use crate::codeparse::{desugar_for, expr_text, join_exprs, simple_stmt_text, Expr, Program, Stmt};
use crate::flowgraph::{BlockKind, EdgeLabel, FlowEdge, FlowGraph, FlowNode};

pub const END_RETURN_TEXT: &str = "end function return";
/// Terminal reached by falling off the end of the function body.
pub const END_FALLTHROUGH_TEXT: &str = "end function";
pub const INPUT_PREFIX: &str = "input: ";
pub const OUTPUT_PREFIX: &str = "output: ";
pub const START_PREFIX: &str = "start ";

type Exits = Vec<(usize, EdgeLabel)>;

struct Lowering {
    graph: FlowGraph,
}

/// Builds the flowchart of `p`. `for` loops are lowered through their `while`
/// desugaring. Node ids are `n0`, `n1`, ... in creation order.
pub fn lower(p: &Program) -> FlowGraph {
    let p = desugar_for(p);
    let mut l = Lowering {
        graph: FlowGraph::default(),
    };
    let start = l.node(BlockKind::Terminal, format!("{START_PREFIX}{}", p.name));
    let mut exits = vec![(start, EdgeLabel::Unlabeled)];
    if !p.params.is_empty() {
        let input = l.node(BlockKind::InputOutput, format!("{INPUT_PREFIX}{}", p.params.join(", ")));
        l.connect(&exits, input);
        exits = vec![(input, EdgeLabel::Unlabeled)];
    }
    let exits = l.block(&p.body, exits);
    if !exits.is_empty() {
        let end = l.node(BlockKind::Terminal, END_FALLTHROUGH_TEXT);
        l.connect(&exits, end);
    }
    l.graph
}

impl Lowering {
    fn node(&mut self, kind: BlockKind, text: impl Into<String>) -> usize {
        let i = self.graph.nodes.len();
        self.graph.nodes.push(FlowNode::new(format!("n{i}"), kind, text));
        i
    }

    fn connect(&mut self, exits: &[(usize, EdgeLabel)], dst: usize) {
        for &(src, label) in exits {
            let e = FlowEdge::new(
                self.graph.nodes[src].id.clone(),
                self.graph.nodes[dst].id.clone(),
                label,
            );
            self.graph.edges.push(e);
        }
    }

    /// Places one node, wires the pending exits into it and returns it.
    fn step(&mut self, exits: &Exits, kind: BlockKind, text: String) -> usize {
        let n = self.node(kind, text);
        self.connect(exits, n);
        n
    }

    fn block(&mut self, stmts: &[Stmt], mut exits: Exits) -> Exits {
        for s in stmts {
            exits = self.stmt(s, exits);
        }
        exits
    }

    fn stmt(&mut self, s: &Stmt, exits: Exits) -> Exits {
        match s {
            Stmt::Assign { .. } | Stmt::AugAssign { .. } | Stmt::Expr(_) => {
                let n = self.step(&exits, BlockKind::Process, simple_stmt_text(s));
                vec![(n, EdgeLabel::Unlabeled)]
            }
            Stmt::Print(args) => {
                let n = self.step(
                    &exits,
                    BlockKind::InputOutput,
                    format!("{OUTPUT_PREFIX}{}", join_exprs(args)),
                );
                vec![(n, EdgeLabel::Unlabeled)]
            }
            Stmt::Return(value) => {
                let mut exits = exits;
                if let Some(e) = value {
                    let out = self.step(
                        &exits,
                        BlockKind::InputOutput,
                        format!("{OUTPUT_PREFIX}{}", expr_text(e)),
                    );
                    exits = vec![(out, EdgeLabel::Unlabeled)];
                }
                self.step(&exits, BlockKind::Terminal, END_RETURN_TEXT.into());
                Vec::new()
            }
            Stmt::If {
                cond,
                then_body,
                elifs,
                else_body,
            } => self.if_chain(cond, then_body, elifs, else_body.as_deref(), exits),
            Stmt::While { cond, body } => {
                let head = self.step(&exits, BlockKind::Decision, expr_text(cond));
                let body_exits = self.block(body, vec![(head, EdgeLabel::Yes)]);
                self.connect(&body_exits, head);
                vec![(head, EdgeLabel::No)]
            }
            Stmt::ForRange { .. } => {
                unreachable!("for loops are desugared before lowering")
            }
        }
    }

    fn if_chain(
        &mut self,
        cond: &Expr,
        then_body: &[Stmt],
        elifs: &[(Expr, Vec<Stmt>)],
        else_body: Option<&[Stmt]>,
        exits: Exits,
    ) -> Exits {
        let d = self.step(&exits, BlockKind::Decision, expr_text(cond));
        let mut out = self.block(then_body, vec![(d, EdgeLabel::Yes)]);
        let no = vec![(d, EdgeLabel::No)];
        let rest = match (elifs.split_first(), else_body) {
            (Some(((c, b), more)), _) => self.if_chain(c, b, more, else_body, no),
            (None, Some(b)) => self.block(b, no),
            (None, None) => no,
        };
        out.extend(rest);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codeparse::parse;
    use crate::flowgraph::{linearize, validate};

    fn texts(g: &FlowGraph) -> Vec<String> {
        linearize(g).unwrap().iter().map(|n| n.text.clone()).collect()
    }

    #[test]
    fn fun1_is_linear() {
        let g = lower(&parse("def fun1(x):\n    y = ((16 + x) - 20)\n    return y").unwrap());
        validate(&g).unwrap();
        assert_eq!(
            texts(&g),
            [
                "start fun1",
                "input: x",
                "y = ((16 + x) - 20)",
                "output: y",
                "end function return"
            ]
        );
        let kinds: Vec<_> = g.nodes.iter().map(|n| n.kind).collect();
        assert_eq!(
            kinds,
            [
                BlockKind::Terminal,
                BlockKind::InputOutput,
                BlockKind::Process,
                BlockKind::InputOutput,
                BlockKind::Terminal
            ]
        );
        assert_eq!(g.edges.len(), 4);
    }

    #[test]
    fn while_loop_has_back_edge() {
        let g = lower(&parse("def f(n):\n    while n > 0:\n        n -= 1\n    return n\n").unwrap());
        validate(&g).unwrap();
        let decisions: Vec<_> = g.nodes.iter().filter(|n| n.kind == BlockKind::Decision).collect();
        assert_eq!(decisions.len(), 1);
        let d = &decisions[0].id;
        let yes = g
            .edges
            .iter()
            .find(|e| &e.src == d && e.label == EdgeLabel::Yes)
            .unwrap();
        assert!(g.edges.iter().any(|e| e.src == yes.dst && &e.dst == d));
        let no = g
            .edges
            .iter()
            .find(|e| &e.src == d && e.label == EdgeLabel::No)
            .unwrap();
        let mut cur = no.dst.clone();
        loop {
            let n = g.node(&cur).unwrap();
            if n.kind == BlockKind::Terminal {
                break;
            }
            cur = g.edges.iter().find(|e| e.src == cur).unwrap().dst.clone();
        }
    }

    #[test]
    fn bare_return_only() {
        let g = lower(&parse("def f():\n    return\n").unwrap());
        assert_eq!(texts(&g), ["start f", "end function return"]);
    }

    #[test]
    fn falling_off_the_end_shares_one_terminal() {
        let g = lower(&parse("def f(x):\n    if x:\n        print(1)\n    else:\n        print(2)\n").unwrap());
        validate(&g).unwrap();
        let ends: Vec<_> = g.nodes.iter().filter(|n| n.text == END_FALLTHROUGH_TEXT).collect();
        assert_eq!(ends.len(), 1);
        assert_eq!(
            texts(&g),
            ["start f", "input: x", "x", "output: 1", "output: 2", "end function"]
        );
    }

    #[test]
    fn elif_becomes_nested_decisions() {
        let g = lower(
            &parse("def f(x):\n    if x > 1:\n        y = 1\n    elif x > 0:\n        y = 2\n    else:\n        y = 3\n    return y\n")
                .unwrap(),
        );
        validate(&g).unwrap();
        assert_eq!(g.nodes.iter().filter(|n| n.kind == BlockKind::Decision).count(), 2);
        assert_eq!(
            texts(&g),
            [
                "start f",
                "input: x",
                "x > 1",
                "y = 1",
                "x > 0",
                "y = 2",
                "y = 3",
                "output: y",
                "end function return"
            ]
        );
    }

    #[test]
    fn for_range_desugars() {
        let g = lower(&parse("def f(n):\n    for i in range(n):\n        print(i)\n").unwrap());
        validate(&g).unwrap();
        assert_eq!(
            texts(&g),
            [
                "start f",
                "input: n",
                "i = 0",
                "i < n",
                "output: i",
                "i += 1",
                "end function"
            ]
        );
    }
}
