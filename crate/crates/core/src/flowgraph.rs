//! Flowchart intermediate representation.
//!
//! A [`FlowGraph`] is a directed graph of typed blocks. Every converter in the
//! crate produces or consumes this type, and [`linearize`] fixes the block
//! order that all sequence encodings use.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Semantic role of a flowchart block. Each kind maps to one shape token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlockKind {
    #[serde(rename = "OVAL")]
    Terminal,
    #[serde(rename = "RECTANGLE")]
    Process,
    #[serde(rename = "PARALLELOGRAM")]
    InputOutput,
    #[serde(rename = "DIAMOND")]
    Decision,
}

impl BlockKind {
    pub const ALL: [BlockKind; 4] = [
        BlockKind::Terminal,
        BlockKind::Process,
        BlockKind::InputOutput,
        BlockKind::Decision,
    ];

    /// The uppercase shape token used in encodings.
    pub fn shape_token(self) -> &'static str {
        match self {
            BlockKind::Terminal => "OVAL",
            BlockKind::Process => "RECTANGLE",
            BlockKind::InputOutput => "PARALLELOGRAM",
            BlockKind::Decision => "DIAMOND",
        }
    }

    pub fn from_shape_token(token: &str) -> Option<BlockKind> {
        BlockKind::ALL.into_iter().find(|k| k.shape_token() == token)
    }
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.shape_token())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FlowNode {
    pub id: String,
    pub kind: BlockKind,
    pub text: String,
}

impl FlowNode {
    pub fn new(id: impl Into<String>, kind: BlockKind, text: impl Into<String>) -> Self {
        FlowNode {
            id: id.into(),
            kind,
            text: text.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeLabel {
    #[serde(rename = "-")]
    Unlabeled,
    #[serde(rename = "yes")]
    Yes,
    #[serde(rename = "no")]
    No,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FlowEdge {
    pub src: String,
    pub dst: String,
    pub label: EdgeLabel,
}

impl FlowEdge {
    pub fn new(src: impl Into<String>, dst: impl Into<String>, label: EdgeLabel) -> Self {
        FlowEdge {
            src: src.into(),
            dst: dst.into(),
            label,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowGraph {
    pub nodes: Vec<FlowNode>,
    pub edges: Vec<FlowEdge>,
}

/// One broken invariant, naming the node or edge at fault.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub subject: String,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    EmptyText,
    DuplicateId,
    DanglingEdge,
    NoStartNode,
    MultipleStartNodes,
    NoEndNode,
    DecisionOutDegree,
    DecisionLabels,
    SingleExitOutDegree,
    LabelOnNonDecision,
    Unreachable,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            ViolationKind::EmptyText => "empty block text",
            ViolationKind::DuplicateId => "duplicate node id",
            ViolationKind::DanglingEdge => "edge references unknown node",
            ViolationKind::NoStartNode => "no start node (Terminal with in-degree 0)",
            ViolationKind::MultipleStartNodes => "more than one start node",
            ViolationKind::NoEndNode => "no end node (Terminal with out-degree 0)",
            ViolationKind::DecisionOutDegree => "Decision out-degree ≠ 2",
            ViolationKind::DecisionLabels => "Decision edges must be one yes and one no",
            ViolationKind::SingleExitOutDegree => "non-Decision block must have exactly one outgoing edge",
            ViolationKind::LabelOnNonDecision => "yes/no label on edge leaving a non-Decision block",
            ViolationKind::Unreachable => "unreachable node",
        };
        write!(f, "{}: {}", self.subject, what)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid flow graph: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
pub struct InvalidGraph(pub Vec<Violation>);

/// Index-based adjacency view over a graph. Built once per operation.
#[derive(Debug, Clone)]
pub struct Topology {
    pub index: HashMap<String, usize>,
    pub succ: Vec<Vec<(usize, EdgeLabel)>>,
    pub pred: Vec<Vec<usize>>,
}

impl Topology {
    /// Builds adjacency, ignoring edges whose endpoints are unknown.
    pub fn new(g: &FlowGraph) -> Topology {
        let mut index = HashMap::with_capacity(g.nodes.len());
        for (i, n) in g.nodes.iter().enumerate() {
            index.entry(n.id.clone()).or_insert(i);
        }
        let mut succ = vec![Vec::new(); g.nodes.len()];
        let mut pred = vec![Vec::new(); g.nodes.len()];
        for e in &g.edges {
            if let (Some(&s), Some(&d)) = (index.get(&e.src), index.get(&e.dst)) {
                succ[s].push((d, e.label));
                pred[d].push(s);
            }
        }
        Topology { index, succ, pred }
    }

    pub fn successor(&self, node: usize, label: EdgeLabel) -> Option<usize> {
        self.succ[node].iter().find(|(_, l)| *l == label).map(|(d, _)| *d)
    }
}

impl FlowGraph {
    pub fn node(&self, id: &str) -> Option<&FlowNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    /// The unique Terminal with no incoming edges, if there is exactly one.
    pub fn start_index(&self) -> Option<usize> {
        let topo = Topology::new(self);
        let starts = start_candidates(self, &topo);
        (starts.len() == 1).then(|| starts[0])
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("flow graph serializes")
    }

    pub fn from_json(text: &str) -> Result<FlowGraph, serde_json::Error> {
        serde_json::from_str(text)
    }
}

fn start_candidates(g: &FlowGraph, topo: &Topology) -> Vec<usize> {
    (0..g.nodes.len())
        .filter(|&i| g.nodes[i].kind == BlockKind::Terminal && topo.pred[i].is_empty())
        .collect()
}

/// Checks every structural invariant and returns all violations found.
pub fn validate(g: &FlowGraph) -> Result<(), InvalidGraph> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for n in &g.nodes {
        if n.text.is_empty() {
            out.push(Violation {
                subject: format!("node {}", n.id),
                kind: ViolationKind::EmptyText,
            });
        }
        if !seen.insert(n.id.as_str()) {
            out.push(Violation {
                subject: format!("node {}", n.id),
                kind: ViolationKind::DuplicateId,
            });
        }
    }
    for e in &g.edges {
        if !seen.contains(e.src.as_str()) || !seen.contains(e.dst.as_str()) {
            out.push(Violation {
                subject: format!("edge {}->{}", e.src, e.dst),
                kind: ViolationKind::DanglingEdge,
            });
        }
    }

    let topo = Topology::new(g);
    let starts = start_candidates(g, &topo);
    match starts.len() {
        0 => out.push(Violation {
            subject: "graph".into(),
            kind: ViolationKind::NoStartNode,
        }),
        1 => {}
        _ => out.push(Violation {
            subject: starts
                .iter()
                .map(|&i| format!("node {}", g.nodes[i].id))
                .collect::<Vec<_>>()
                .join(", "),
            kind: ViolationKind::MultipleStartNodes,
        }),
    }
    let has_end = (0..g.nodes.len()).any(|i| g.nodes[i].kind == BlockKind::Terminal && topo.succ[i].is_empty());
    if !has_end {
        out.push(Violation {
            subject: "graph".into(),
            kind: ViolationKind::NoEndNode,
        });
    }

    for (i, n) in g.nodes.iter().enumerate() {
        let outs = &topo.succ[i];
        let subject = format!("node {}", n.id);
        if n.kind == BlockKind::Decision {
            if outs.len() != 2 {
                out.push(Violation {
                    subject,
                    kind: ViolationKind::DecisionOutDegree,
                });
            } else {
                let yes = outs.iter().filter(|(_, l)| *l == EdgeLabel::Yes).count();
                let no = outs.iter().filter(|(_, l)| *l == EdgeLabel::No).count();
                if yes != 1 || no != 1 {
                    out.push(Violation {
                        subject,
                        kind: ViolationKind::DecisionLabels,
                    });
                }
            }
        } else {
            let is_end = n.kind == BlockKind::Terminal && outs.is_empty();
            if !is_end && outs.len() != 1 {
                out.push(Violation {
                    subject: subject.clone(),
                    kind: ViolationKind::SingleExitOutDegree,
                });
            }
            if outs.iter().any(|(_, l)| *l != EdgeLabel::Unlabeled) {
                out.push(Violation {
                    subject,
                    kind: ViolationKind::LabelOnNonDecision,
                });
            }
        }
    }

    if starts.len() == 1 {
        let mut reached = vec![false; g.nodes.len()];
        let mut stack = vec![starts[0]];
        reached[starts[0]] = true;
        while let Some(v) = stack.pop() {
            for &(w, _) in &topo.succ[v] {
                if !reached[w] {
                    reached[w] = true;
                    stack.push(w);
                }
            }
        }
        for (i, r) in reached.iter().enumerate() {
            if !r {
                out.push(Violation {
                    subject: format!("node {}", g.nodes[i].id),
                    kind: ViolationKind::Unreachable,
                });
            }
        }
    }

    if out.is_empty() {
        Ok(())
    } else {
        Err(InvalidGraph(out))
    }
}

/// Node indices in canonical order: the reverse postorder of a depth-first
/// walk from the start node that explores the No edge before the Yes edge.
///
/// The start node comes first, a Decision's Yes branch is emitted before its
/// No branch, and a join block follows every branch that reaches it.
pub fn linearize_indices(g: &FlowGraph) -> Result<Vec<usize>, InvalidGraph> {
    validate(g)?;
    let topo = Topology::new(g);
    let start = start_candidates(g, &topo)[0];
    Ok(dfs_order(g, &topo, start))
}

pub(crate) fn dfs_order(g: &FlowGraph, topo: &Topology, start: usize) -> Vec<usize> {
    let mut post = Vec::with_capacity(g.nodes.len());
    let mut visited = vec![false; g.nodes.len()];
    // (node, successors still to explore, in exploration order)
    let mut stack: Vec<(usize, Vec<usize>)> = Vec::new();
    visited[start] = true;
    stack.push((start, explore_order(g, topo, start)));
    while let Some((v, pending)) = stack.last_mut() {
        let v = *v;
        if let Some(w) = pending.pop() {
            if !visited[w] {
                visited[w] = true;
                let next = explore_order(g, topo, w);
                stack.push((w, next));
            }
        } else {
            post.push(v);
            stack.pop();
        }
    }
    post.reverse();
    post
}

/// Successors as a stack: the last element is explored first (No before Yes).
fn explore_order(g: &FlowGraph, topo: &Topology, v: usize) -> Vec<usize> {
    ordered_successors(g, topo, v)
}

/// Successors with the Yes branch first for Decisions.
pub(crate) fn ordered_successors(g: &FlowGraph, topo: &Topology, v: usize) -> Vec<usize> {
    if g.nodes[v].kind == BlockKind::Decision {
        let mut outs = topo.succ[v].clone();
        outs.sort_by_key(|(_, l)| match l {
            EdgeLabel::Yes => 0,
            EdgeLabel::Unlabeled => 1,
            EdgeLabel::No => 2,
        });
        outs.into_iter().map(|(d, _)| d).collect()
    } else {
        topo.succ[v].iter().map(|(d, _)| *d).collect()
    }
}

pub fn linearize(g: &FlowGraph) -> Result<Vec<&FlowNode>, InvalidGraph> {
    Ok(linearize_indices(g)?.into_iter().map(|i| &g.nodes[i]).collect())
}

/// Structural equality up to node ids: same kinds, texts and labeled edges
/// under the canonical linearization correspondence.
pub fn is_isomorphic(a: &FlowGraph, b: &FlowGraph) -> bool {
    let (Ok(oa), Ok(ob)) = (linearize_indices(a), linearize_indices(b)) else {
        return false;
    };
    if oa.len() != ob.len() || a.edges.len() != b.edges.len() {
        return false;
    }
    let mut map_a = HashMap::new();
    for (rank, &i) in oa.iter().enumerate() {
        map_a.insert(a.nodes[i].id.as_str(), rank);
    }
    let mut map_b = HashMap::new();
    for (rank, &i) in ob.iter().enumerate() {
        map_b.insert(b.nodes[i].id.as_str(), rank);
    }
    for (&i, &j) in oa.iter().zip(&ob) {
        if a.nodes[i].kind != b.nodes[j].kind || a.nodes[i].text != b.nodes[j].text {
            return false;
        }
    }
    let edge_set = |g: &FlowGraph, m: &HashMap<&str, usize>| -> Option<Vec<(usize, usize, EdgeLabel)>> {
        let mut v = Vec::with_capacity(g.edges.len());
        for e in &g.edges {
            v.push((*m.get(e.src.as_str())?, *m.get(e.dst.as_str())?, e.label));
        }
        v.sort_by_key(|&(s, d, l)| (s, d, l as u8));
        Some(v)
    };
    matches!((edge_set(a, &map_a), edge_set(b, &map_b)), (Some(x), Some(y)) if x == y)
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn if_else_graph() -> FlowGraph {
        FlowGraph {
            nodes: vec![
                FlowNode::new("s", BlockKind::Terminal, "start f"),
                FlowNode::new("d", BlockKind::Decision, "x > 0"),
                FlowNode::new("p2", BlockKind::Process, "y = 2"),
                FlowNode::new("p1", BlockKind::Process, "y = 1"),
                FlowNode::new("j", BlockKind::Process, "z = y"),
                FlowNode::new("e", BlockKind::Terminal, "end function"),
            ],
            edges: vec![
                FlowEdge::new("s", "d", EdgeLabel::Unlabeled),
                FlowEdge::new("d", "p2", EdgeLabel::No),
                FlowEdge::new("d", "p1", EdgeLabel::Yes),
                FlowEdge::new("p1", "j", EdgeLabel::Unlabeled),
                FlowEdge::new("p2", "j", EdgeLabel::Unlabeled),
                FlowEdge::new("j", "e", EdgeLabel::Unlabeled),
            ],
        }
    }

    #[test]
    fn fun1_validates() {
        assert_eq!(validate(&fun1_table_graph()), Ok(()));
    }

    #[test]
    fn decision_with_one_edge_is_flagged() {
        let mut g = if_else_graph();
        g.edges.retain(|e| !(e.src == "d" && e.label == EdgeLabel::No));
        let err = validate(&g).unwrap_err();
        assert!(err
            .0
            .iter()
            .any(|v| v.kind == ViolationKind::DecisionOutDegree && v.subject == "node d"));
        assert!(err.to_string().contains("Decision out-degree ≠ 2"));
    }

    #[test]
    fn unreachable_node_is_flagged() {
        let mut g = fun1_table_graph();
        g.nodes.push(FlowNode::new("orphan", BlockKind::Process, "z = 1"));
        g.edges.push(FlowEdge::new("orphan", "n4", EdgeLabel::Unlabeled));
        let err = validate(&g).unwrap_err();
        assert_eq!(err.0.len(), 1);
        assert_eq!(err.0[0].kind, ViolationKind::Unreachable);
        assert!(err.to_string().contains("unreachable node"));
    }

    #[test]
    fn labels_only_leave_decisions() {
        let mut g = fun1_table_graph();
        g.edges[1].label = EdgeLabel::Yes;
        let err = validate(&g).unwrap_err();
        assert!(err.0.iter().any(|v| v.kind == ViolationKind::LabelOnNonDecision));
    }

    #[test]
    fn linearize_fun1_follows_the_chain() {
        let g = fun1_table_graph();
        let texts: Vec<_> = linearize(&g).unwrap().iter().map(|n| n.text.as_str()).collect();
        assert_eq!(
            texts,
            [
                "start fun1",
                "input: X",
                "y = ((16 + x) - 20)",
                "output: y",
                "end function return"
            ]
        );
    }

    #[test]
    fn linearize_single_terminal() {
        let g = linear_graph(&[(BlockKind::Terminal, "start f")]);
        let order = linearize(&g).unwrap();
        assert_eq!(order.len(), 1);
        assert_eq!(order[0].text, "start f");
    }

    #[test]
    fn linearize_visits_yes_before_no() {
        // hand trace: start, decision, yes branch, no branch, join, end
        let g = if_else_graph();
        let ids: Vec<_> = linearize(&g).unwrap().iter().map(|n| n.id.as_str()).collect();
        assert_eq!(ids, ["s", "d", "p1", "p2", "j", "e"]);
    }

    #[test]
    fn linearize_rejects_invalid() {
        let mut g = fun1_table_graph();
        g.nodes[2].text.clear();
        assert!(linearize(&g).is_err());
    }

    #[test]
    fn json_form_uses_shape_tokens_and_label_marks() {
        let g = if_else_graph();
        let json = g.to_json();
        assert!(json.starts_with(r#"{"nodes":[{"id":"s","kind":"OVAL","text":"start f"}"#));
        assert!(json.contains(r#"{"src":"d","dst":"p2","label":"no"}"#));
        assert!(json.contains(r#"{"src":"s","dst":"d","label":"-"}"#));
        assert_eq!(FlowGraph::from_json(&json).unwrap(), g);
    }

    #[test]
    fn isomorphism_ignores_ids() {
        let a = if_else_graph();
        let mut b = a.clone();
        for n in &mut b.nodes {
            n.id = format!("x{}", n.id);
        }
        for e in &mut b.edges {
            e.src = format!("x{}", e.src);
            e.dst = format!("x{}", e.dst);
        }
        b.nodes.reverse();
        assert!(is_isomorphic(&a, &b));
        b.nodes[0].text = "something else".into();
        assert!(!is_isomorphic(&a, &b));
    }
}
