//! Structuring: rebuilds a PyMini program from a reducible flowchart.

use thiserror::Error;

use crate::code2flow::{END_FALLTHROUGH_TEXT, END_RETURN_TEXT, INPUT_PREFIX, OUTPUT_PREFIX, START_PREFIX};
use crate::codeparse::{
    is_valid_identifier, normalize_elif, parse, parse_expr, parse_expr_list, parse_simple_stmt, print_canonical,
    Program, Stmt,
};
use crate::flowgraph::{dfs_order, validate, BlockKind, EdgeLabel, FlowGraph, InvalidGraph, Topology};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error(transparent)]
    InvalidGraph(#[from] InvalidGraph),
    #[error("graph is not structurable: {0}")]
    Unstructurable(String),
    #[error("node {node}: text is not a valid fragment ({reason})")]
    FragmentParseError { node: String, reason: String },
}

/// Reconstructs the program whose lowering is `g`. Loops are recognised by
/// back edges, branch joins by the earliest block both arms reach.
pub fn structure(g: &FlowGraph) -> Result<Program, StructureError> {
    validate(g)?;
    let topo = Topology::new(g);
    let start = g.start_index().expect("validated graph has a start node");
    let rpo = dfs_order(g, &topo, start);
    let mut rank = vec![usize::MAX; g.nodes.len()];
    for (r, &v) in rpo.iter().enumerate() {
        rank[v] = r;
    }
    let idom = dominators(&topo, &rpo, &rank);

    let mut loop_header = vec![false; g.nodes.len()];
    for (u, outs) in topo.succ.iter().enumerate() {
        for &(v, _) in outs {
            if rank[v] <= rank[u] {
                if !dominates(&idom, v, u) {
                    return Err(StructureError::Unstructurable(format!(
                        "cycle through {} has more than one entry",
                        g.nodes[v].id
                    )));
                }
                if g.nodes[v].kind != BlockKind::Decision {
                    return Err(StructureError::Unstructurable(format!(
                        "loop header {} is not a decision",
                        g.nodes[v].id
                    )));
                }
                loop_header[v] = true;
            }
        }
    }

    let mut s = Structurer {
        g,
        topo: &topo,
        rank: &rank,
        loop_header: &loop_header,
        emitted: vec![false; g.nodes.len()],
    };
    let start_node = &g.nodes[start];
    let name = start_node
        .text
        .strip_prefix(START_PREFIX)
        .filter(|n| is_valid_identifier(n))
        .ok_or_else(|| s.fragment_err(start, "expected `start <function name>`"))?
        .to_string();
    s.emitted[start] = true;
    let mut cur = s.next(start);
    let mut params = Vec::new();
    if let Some(c) = cur {
        let n = &g.nodes[c];
        if n.kind == BlockKind::InputOutput {
            if let Some(list) = n.text.strip_prefix(INPUT_PREFIX) {
                for p in list.split(", ") {
                    if !is_valid_identifier(p) || params.iter().any(|q| q == p) {
                        return Err(s.fragment_err(c, "bad parameter list"));
                    }
                    params.push(p.to_string());
                }
                s.emitted[c] = true;
                cur = s.next(c);
            }
        }
    }
    let mut body = s.seq(cur, None)?;
    if body.is_empty() {
        return Err(StructureError::Unstructurable("function body is empty".into()));
    }
    normalize_elif(&mut body);
    let p = Program { name, params, body };
    match parse(&print_canonical(&p)) {
        Ok(q) if q == p => Ok(p),
        _ => Err(StructureError::Unstructurable(
            "reconstructed program is not well formed".into(),
        )),
    }
}

struct Structurer<'a> {
    g: &'a FlowGraph,
    topo: &'a Topology,
    rank: &'a [usize],
    loop_header: &'a [bool],
    emitted: Vec<bool>,
}

impl<'a> Structurer<'a> {
    fn fragment_err(&self, node: usize, reason: impl Into<String>) -> StructureError {
        StructureError::FragmentParseError {
            node: self.g.nodes[node].id.clone(),
            reason: reason.into(),
        }
    }

    fn next(&self, v: usize) -> Option<usize> {
        self.topo.succ[v].first().map(|&(d, _)| d)
    }

    fn seq(&mut self, mut cur: Option<usize>, stop: Option<usize>) -> Result<Vec<Stmt>, StructureError> {
        let mut out = Vec::new();
        while let Some(v) = cur {
            if Some(v) == stop {
                break;
            }
            let node = &self.g.nodes[v];
            if node.kind != BlockKind::Terminal {
                if self.emitted[v] {
                    return Err(StructureError::Unstructurable(format!(
                        "block {} is reached from two unrelated places",
                        node.id
                    )));
                }
                self.emitted[v] = true;
            }
            match node.kind {
                BlockKind::Terminal => {
                    if !self.topo.succ[v].is_empty() {
                        return Err(StructureError::Unstructurable(format!(
                            "terminal {} has an outgoing edge",
                            node.id
                        )));
                    }
                    match node.text.as_str() {
                        END_RETURN_TEXT => out.push(Stmt::Return(None)),
                        END_FALLTHROUGH_TEXT => {}
                        _ => return Err(self.fragment_err(v, "unknown terminal text")),
                    }
                    break;
                }
                BlockKind::Process => {
                    let stmt = parse_simple_stmt(&node.text).map_err(|e| self.fragment_err(v, e.to_string()))?;
                    if matches!(stmt, Stmt::Return(_)) {
                        return Err(self.fragment_err(v, "return inside a process block"));
                    }
                    out.push(stmt);
                    cur = self.next(v);
                }
                BlockKind::InputOutput => {
                    let Some(rest) = node.text.strip_prefix(OUTPUT_PREFIX) else {
                        return Err(self.fragment_err(v, "expected `output: ...`"));
                    };
                    let nxt = self.next(v);
                    let returns = nxt.is_some_and(|n| {
                        let t = &self.g.nodes[n];
                        t.kind == BlockKind::Terminal && t.text == END_RETURN_TEXT
                    });
                    if returns {
                        if let Ok(e) = parse_expr(rest) {
                            out.push(Stmt::Return(Some(e)));
                            break;
                        }
                    }
                    let args = parse_expr_list(rest).map_err(|e| self.fragment_err(v, e.to_string()))?;
                    if args.is_empty() {
                        return Err(self.fragment_err(v, "empty output list"));
                    }
                    out.push(Stmt::Print(args));
                    cur = nxt;
                }
                BlockKind::Decision => {
                    let cond = parse_expr(&node.text).map_err(|e| self.fragment_err(v, e.to_string()))?;
                    let yes = self.topo.successor(v, EdgeLabel::Yes);
                    let no = self.topo.successor(v, EdgeLabel::No);
                    if self.loop_header[v] {
                        let body = self.seq(yes, Some(v))?;
                        if body.is_empty() {
                            return Err(StructureError::Unstructurable(format!(
                                "loop {} has an empty body",
                                node.id
                            )));
                        }
                        out.push(Stmt::While { cond, body });
                        cur = no;
                        continue;
                    }
                    let join = self.join(v, yes, no, stop);
                    let inner_stop = join.or(stop);
                    let then_body = self.seq(yes, inner_stop)?;
                    let else_body = self.seq(no, inner_stop)?;
                    if then_body.is_empty() {
                        return Err(StructureError::Unstructurable(format!(
                            "decision {} has an empty yes branch",
                            node.id
                        )));
                    }
                    out.push(Stmt::If {
                        cond,
                        then_body,
                        elifs: Vec::new(),
                        else_body: (!else_body.is_empty()).then_some(else_body),
                    });
                    match join {
                        Some(j) => cur = Some(j),
                        None => break,
                    }
                }
            }
        }
        Ok(out)
    }

    /// The earliest block (in reverse postorder) reachable from both arms
    /// without passing `stop`; `None` when the arms never meet.
    fn join(&self, d: usize, yes: Option<usize>, no: Option<usize>, stop: Option<usize>) -> Option<usize> {
        let a = self.reach(yes?, d, stop);
        let b = self.reach(no?, d, stop);
        // the stop block counts only when nothing earlier is shared; an
        // enclosing loop header precedes its body in reverse postorder
        (0..self.g.nodes.len())
            .filter(|&i| a[i] && b[i])
            .min_by_key(|&i| (Some(i) == stop, self.rank[i]))
    }

    fn reach(&self, from: usize, avoid: usize, stop: Option<usize>) -> Vec<bool> {
        let mut seen = vec![false; self.g.nodes.len()];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(v) = stack.pop() {
            if Some(v) == stop || v == avoid {
                continue;
            }
            for &(w, _) in &self.topo.succ[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen[avoid] = false;
        seen
    }
}

/// Immediate dominators by the iterative two-finger algorithm over reverse
/// postorder. Unreachable nodes keep `usize::MAX`.
fn dominators(topo: &Topology, rpo: &[usize], rank: &[usize]) -> Vec<usize> {
    let n = topo.succ.len();
    let mut idom = vec![usize::MAX; n];
    let Some(&start) = rpo.first() else { return idom };
    idom[start] = start;
    let mut changed = true;
    while changed {
        changed = false;
        for &b in rpo.iter().skip(1) {
            let mut new = usize::MAX;
            for &p in &topo.pred[b] {
                if idom[p] == usize::MAX {
                    continue;
                }
                new = if new == usize::MAX {
                    p
                } else {
                    intersect(&idom, rank, p, new)
                };
            }
            if new != idom[b] {
                idom[b] = new;
                changed = true;
            }
        }
    }
    idom
}

fn intersect(idom: &[usize], rank: &[usize], mut a: usize, mut b: usize) -> usize {
    while a != b {
        while rank[a] > rank[b] {
            a = idom[a];
        }
        while rank[b] > rank[a] {
            b = idom[b];
        }
    }
    a
}

fn dominates(idom: &[usize], a: usize, mut b: usize) -> bool {
    loop {
        if a == b {
            return true;
        }
        let up = idom[b];
        if up == b || up == usize::MAX {
            return false;
        }
        b = up;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code2flow::lower;
    use crate::codeparse::canonicalize;
    use crate::flowgraph::{FlowEdge, FlowNode};

    fn round_trip(src: &str) {
        let p = parse(src).unwrap();
        let got = structure(&lower(&p)).unwrap_or_else(|e| panic!("{e}\n{src}"));
        assert_eq!(
            print_canonical(&got),
            print_canonical(&canonicalize(&p)),
            "source:\n{src}"
        );
    }

    #[test]
    fn fun1_round_trip() {
        let src = "def fun1(x):\n    y = ((16 + x) - 20)\n    return y\n";
        let p = structure(&lower(&parse(src).unwrap())).unwrap();
        assert_eq!(print_canonical(&p), src);
    }

    #[test]
    fn loop_round_trip() {
        let src = "def f(n):\n    while n > 0:\n        n -= 1\n    return n\n";
        let p = structure(&lower(&parse(src).unwrap())).unwrap();
        assert!(matches!(p.body[0], Stmt::While { .. }));
        assert_eq!(print_canonical(&p), src);
    }

    #[test]
    fn assorted_round_trips() {
        for src in [
            "def f():\n    return\n",
            "def f(x):\n    if x:\n        print(1)\n",
            "def f(x):\n    if x:\n        print(1)\n    else:\n        print(2)\n    return x\n",
            "def f(x):\n    if x > 2:\n        y = 1\n    elif x > 1:\n        y = 2\n    elif x > 0:\n        return 5\n    else:\n        y = 3\n    return y\n",
            "def f(x):\n    if x:\n        return 1\n    x += 1\n    return x\n",
            "def f(x):\n    if x:\n        x = 2\n    else:\n        return 1\n    return x\n",
            "def f(n):\n    t = 0\n    for i in range(n):\n        if i % 2 == 0:\n            return i\n        t += i\n    return t\n",
            "def f(n):\n    for i in range(n):\n        for j in range(i):\n            if i == j:\n                print(i, j)\n    return\n",
            "def f(n):\n    while n:\n        if n > 5:\n            return n\n        n -= 1\n",
            "def f(a, b):\n    if a:\n        if b:\n            return 1\n    else:\n        print('a')\n    return 0\n",
        ] {
            round_trip(src);
        }
    }

    #[test]
    fn print_then_bare_return_lowers_like_return() {
        let a = lower(&parse("def f(a):\n    print(a)\n    return\n").unwrap());
        let b = lower(&parse("def f(a):\n    return a\n").unwrap());
        assert_eq!(a, b);
        let p = structure(&lower(&parse("def f(a):\n    print(a, 1)\n    return\n").unwrap())).unwrap();
        assert_eq!(print_canonical(&p), "def f(a):\n    print(a, 1)\n    return\n");
    }

    #[test]
    fn jump_into_loop_body_is_unstructurable() {
        let mut g = lower(
            &parse(
                "def f(n):\n    if n:\n        n = 1\n    while n > 0:\n        n -= 1\n        n -= 2\n    return n\n",
            )
            .unwrap(),
        );
        let yes = g.edges.iter().position(|e| e.label == EdgeLabel::Yes).unwrap();
        let target = g.nodes.iter().find(|n| n.text == "n -= 2").unwrap().id.clone();
        let src = g.edges[yes].src.clone();
        g.edges[yes] = FlowEdge::new(src, target, EdgeLabel::Yes);
        g.nodes.retain(|n| n.text != "n = 1");
        g.edges.retain(|e| g.nodes.iter().any(|n| n.id == e.src));
        assert!(
            matches!(structure(&g), Err(StructureError::Unstructurable(_))),
            "{:?}",
            structure(&g)
        );
    }

    #[test]
    fn free_text_is_a_fragment_error() {
        let mut g = lower(&parse("def f(x):\n    x = 1\n    return x\n").unwrap());
        g.nodes[2] = FlowNode::new("n2", BlockKind::Process, "add x to sum");
        assert!(matches!(
            structure(&g),
            Err(StructureError::FragmentParseError { node, .. }) if node == "n2"
        ));
    }
}
