//! Circuit graphs, causal cones and paths.
//!
//! Nodes are wire segments `(qubit, segment)`: segment 0 is the wire before
//! its first gate and each gate on the wire starts a new segment. A
//! single-qubit gate is one edge; a two-qubit gate on wires `(q1, q2)` is four
//! edges between its legs `a = (q1, s1)`, `b = (q2, s2)`, `c = (q1, s1 + 1)`,
//! `d = (q2, s2 + 1)`: straight `a→c`, `b→d` and diagonal `a→d`, `b→c`.
//!
//! Two-qubit edges are weighted by the modified leg distance of the gate's
//! current unitary; single-qubit edges weigh 0.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};
use std::fmt::{self, Write as _};

use rand::Rng;

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::metric::{crossing_distances, LegPair, UnitaryMatrix4};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GraphNode {
    pub qubit: usize,
    pub segment: usize,
}

impl GraphNode {
    pub fn new(qubit: usize, segment: usize) -> Self {
        GraphNode { qubit, segment }
    }
}

impl fmt::Display for GraphNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}s{}", self.qubit, self.segment)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeLabel {
    /// Single-qubit gate.
    Wire,
    Legs(LegPair),
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeLabel::Wire => f.write_str("wire"),
            EdgeLabel::Legs(p) => write!(f, "{p}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphEdge {
    pub from: GraphNode,
    pub to: GraphNode,
    pub gate: usize,
    pub label: EdgeLabel,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitGraph {
    nodes: BTreeSet<GraphNode>,
    edges: Vec<GraphEdge>,
    incoming: BTreeMap<GraphNode, Vec<usize>>,
    outgoing: BTreeMap<GraphNode, Vec<usize>>,
    initials: BTreeMap<usize, GraphNode>,
    terminals: BTreeMap<usize, GraphNode>,
    gate_slots: Vec<Option<usize>>,
}

/// A time-directed route ending at a terminal node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    pub nodes: Vec<GraphNode>,
    /// Gate index of each traversed edge, in order.
    pub gates: Vec<usize>,
    /// Parameter slots of the traversed gates, in traversal order, deduplicated.
    pub slots: Vec<usize>,
}

impl CircuitGraph {
    fn from_parts(
        nodes: BTreeSet<GraphNode>,
        edges: Vec<GraphEdge>,
        gate_slots: Vec<Option<usize>>,
    ) -> Self {
        let mut incoming: BTreeMap<GraphNode, Vec<usize>> =
            nodes.iter().map(|&n| (n, Vec::new())).collect();
        let mut outgoing = incoming.clone();
        for (i, e) in edges.iter().enumerate() {
            incoming
                .get_mut(&e.to)
                .expect("edge target is a node")
                .push(i);
            outgoing
                .get_mut(&e.from)
                .expect("edge source is a node")
                .push(i);
        }
        let mut initials = BTreeMap::new();
        let mut terminals = BTreeMap::new();
        for &n in &nodes {
            if n.segment == 0 {
                initials.insert(n.qubit, n);
            }
            if outgoing[&n].is_empty() {
                // nodes are ordered by (qubit, segment); the last one per qubit wins
                terminals.insert(n.qubit, n);
            }
        }
        CircuitGraph {
            nodes,
            edges,
            incoming,
            outgoing,
            initials,
            terminals,
            gate_slots,
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = &GraphNode> {
        self.nodes.iter()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    pub fn contains(&self, node: &GraphNode) -> bool {
        self.nodes.contains(node)
    }

    pub fn incoming(&self, node: &GraphNode) -> impl Iterator<Item = &GraphEdge> {
        self.incoming
            .get(node)
            .into_iter()
            .flatten()
            .map(|&i| &self.edges[i])
    }

    pub fn outgoing(&self, node: &GraphNode) -> impl Iterator<Item = &GraphEdge> {
        self.outgoing
            .get(node)
            .into_iter()
            .flatten()
            .map(|&i| &self.edges[i])
    }

    /// Segment-0 nodes present in the graph, keyed by qubit.
    pub fn initial_nodes(&self) -> &BTreeMap<usize, GraphNode> {
        &self.initials
    }

    /// Last wire segment per qubit present in the graph.
    pub fn terminal_nodes(&self) -> &BTreeMap<usize, GraphNode> {
        &self.terminals
    }

    pub fn terminal(&self, qubit: usize) -> Option<GraphNode> {
        self.terminals.get(&qubit).copied()
    }

    /// Parameter slots of all gates with an edge in this graph.
    pub fn parameter_slots(&self) -> BTreeSet<usize> {
        self.edges
            .iter()
            .filter_map(|e| self.gate_slots[e.gate])
            .collect()
    }

    /// Nodes from which `target` is reachable, including `target`.
    pub fn ancestors(&self, target: &GraphNode) -> BTreeSet<GraphNode> {
        let mut seen = BTreeSet::new();
        if !self.contains(target) {
            return seen;
        }
        let mut queue = VecDeque::from([*target]);
        seen.insert(*target);
        while let Some(n) = queue.pop_front() {
            for e in self.incoming(&n) {
                if seen.insert(e.from) {
                    queue.push_back(e.from);
                }
            }
        }
        seen
    }

    /// Kahn's algorithm; `None` if the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<GraphNode>> {
        let mut indeg: BTreeMap<GraphNode, usize> =
            self.incoming.iter().map(|(n, v)| (*n, v.len())).collect();
        let mut ready: VecDeque<GraphNode> = indeg
            .iter()
            .filter(|(_, &d)| d == 0)
            .map(|(n, _)| *n)
            .collect();
        let mut order = Vec::with_capacity(self.nodes.len());
        while let Some(n) = ready.pop_front() {
            order.push(n);
            for e in self.outgoing(&n) {
                let d = indeg.get_mut(&e.to).expect("node");
                *d -= 1;
                if *d == 0 {
                    ready.push_back(e.to);
                }
            }
        }
        (order.len() == self.nodes.len()).then_some(order)
    }

    pub fn path_weight(&self, path: &Path) -> f64 {
        path.nodes
            .windows(2)
            .map(|w| {
                self.outgoing(&w[0])
                    .find(|e| e.to == w[1])
                    .map_or(f64::INFINITY, |e| e.weight)
            })
            .sum()
    }

    fn make_path(&self, start: GraphNode, edges: &[&GraphEdge]) -> Path {
        let mut nodes = Vec::with_capacity(edges.len() + 1);
        nodes.push(start);
        nodes.extend(edges.iter().map(|e| e.to));
        let gates: Vec<usize> = edges.iter().map(|e| e.gate).collect();
        let mut slots = Vec::new();
        for &g in &gates {
            if let Some(s) = self.gate_slots[g] {
                if !slots.contains(&s) {
                    slots.push(s);
                }
            }
        }
        Path {
            nodes,
            gates,
            slots,
        }
    }

    /// Graphviz rendering. Nodes are named `q<qubit>s<segment>`; infinite
    /// weights are written as `+inf`.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph circuit {\n  rankdir=LR;\n");
        for n in &self.nodes {
            let _ = writeln!(out, "  {n};");
        }
        for e in &self.edges {
            let w = if e.weight.is_infinite() {
                "+inf".to_string()
            } else {
                format!("{}", e.weight)
            };
            let _ = writeln!(
                out,
                "  {} -> {} [gate={}, legs=\"{}\", weight=\"{w}\", label=\"{w}\"];",
                e.from, e.to, e.gate, e.label
            );
        }
        out.push_str("}\n");
        out
    }
}

/// Builds the weighted graph of `circuit` at parameters `params`.
pub fn build_graph(circuit: &Circuit, params: &[f64]) -> Result<CircuitGraph> {
    if params.len() != circuit.n_params() {
        return Err(Error::ParamLengthMismatch {
            expected: circuit.n_params(),
            actual: params.len(),
        });
    }
    let mut segment = vec![0usize; circuit.n_qubits()];
    let mut nodes: BTreeSet<GraphNode> = (0..circuit.n_qubits())
        .map(|q| GraphNode::new(q, 0))
        .collect();
    let mut edges = Vec::new();
    for idx in circuit.execution_order() {
        let gate = &circuit.gates()[idx];
        match gate.qubits[..] {
            [q] => {
                let from = GraphNode::new(q, segment[q]);
                segment[q] += 1;
                let to = GraphNode::new(q, segment[q]);
                nodes.insert(to);
                edges.push(GraphEdge {
                    from,
                    to,
                    gate: idx,
                    label: EdgeLabel::Wire,
                    weight: 0.0,
                });
            }
            [q1, q2] => {
                let a = GraphNode::new(q1, segment[q1]);
                let b = GraphNode::new(q2, segment[q2]);
                segment[q1] += 1;
                segment[q2] += 1;
                let c = GraphNode::new(q1, segment[q1]);
                let d = GraphNode::new(q2, segment[q2]);
                nodes.insert(c);
                nodes.insert(d);
                let u = UnitaryMatrix4::from_gate(gate.kind, gate.angle(params)?)?;
                for dist in crossing_distances(&u)? {
                    let (from, to) = match dist.pair {
                        p if p == LegPair::AC => (a, c),
                        p if p == LegPair::BD => (b, d),
                        p if p == LegPair::AD => (a, d),
                        _ => (b, c),
                    };
                    edges.push(GraphEdge {
                        from,
                        to,
                        gate: idx,
                        label: EdgeLabel::Legs(dist.pair),
                        weight: dist.value,
                    });
                }
            }
            _ => {
                return Err(Error::InvalidGate(format!(
                    "gate {idx} has unsupported arity"
                )))
            }
        }
    }
    let gate_slots = circuit.gates().iter().map(|g| g.param_slot).collect();
    Ok(CircuitGraph::from_parts(nodes, edges, gate_slots))
}

/// Subgraph of every node that reaches a measured qubit's terminal node.
pub fn causal_cone(graph: &CircuitGraph, measured: &[usize]) -> Result<CircuitGraph> {
    if measured.is_empty() {
        return Err(Error::InvalidArgument("empty measured qubit set".into()));
    }
    let mut keep = BTreeSet::new();
    for &q in measured {
        let terminal = graph.terminal(q).ok_or(Error::QubitOutOfRange {
            qubit: q,
            n_qubits: graph.terminals.len(),
        })?;
        keep.extend(graph.ancestors(&terminal));
    }
    let edges: Vec<GraphEdge> = graph
        .edges
        .iter()
        .filter(|e| keep.contains(&e.from) && keep.contains(&e.to))
        .copied()
        .collect();
    Ok(CircuitGraph::from_parts(
        keep,
        edges,
        graph.gate_slots.clone(),
    ))
}

/// Backward uniform walk: from `terminal`, repeatedly pick one incoming edge
/// uniformly at random until a segment-0 node is reached.
pub fn sample_random_path<R: Rng + ?Sized>(
    cone: &CircuitGraph,
    terminal: GraphNode,
    rng: &mut R,
) -> Result<Path> {
    if !cone.contains(&terminal) {
        return Err(Error::InvalidArgument(format!(
            "terminal {terminal} is not in the graph"
        )));
    }
    let mut edges = Vec::new();
    let mut node = terminal;
    while node.segment > 0 {
        let incoming: Vec<&GraphEdge> = cone.incoming(&node).collect();
        if incoming.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "node {node} has no predecessor in the cone"
            )));
        }
        let e = incoming[rng.random_range(0..incoming.len())];
        edges.push(e);
        node = e.from;
    }
    edges.reverse();
    Ok(cone.make_path(node, &edges))
}

/// Forward walk from `start` to `terminal`: at each node, pick uniformly
/// among outgoing edges whose target still reaches `terminal`.
pub fn sample_random_path_from<R: Rng + ?Sized>(
    cone: &CircuitGraph,
    start: GraphNode,
    terminal: GraphNode,
    rng: &mut R,
) -> Result<Path> {
    let reach = cone.ancestors(&terminal);
    if !reach.contains(&start) {
        return Err(Error::InvalidArgument(format!(
            "{start} does not reach {terminal}"
        )));
    }
    let mut edges = Vec::new();
    let mut node = start;
    while node != terminal {
        let next: Vec<&GraphEdge> = cone
            .outgoing(&node)
            .filter(|e| reach.contains(&e.to))
            .collect();
        let e = next[rng.random_range(0..next.len())];
        edges.push(e);
        node = e.to;
    }
    Ok(cone.make_path(start, &edges))
}

#[derive(PartialEq)]
struct Frontier(f64, GraphNode);

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, then on node
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Distance from every node to `terminal` over finite-weight edges.
fn distances_to(cone: &CircuitGraph, terminal: GraphNode) -> BTreeMap<GraphNode, f64> {
    let mut dist = BTreeMap::from([(terminal, 0.0)]);
    let mut done = BTreeSet::new();
    let mut heap = BinaryHeap::from([Frontier(0.0, terminal)]);
    while let Some(Frontier(d, node)) = heap.pop() {
        if !done.insert(node) {
            continue;
        }
        for e in cone.incoming(&node).filter(|e| e.weight.is_finite()) {
            let candidate = e.weight + d;
            if dist.get(&e.from).is_none_or(|&cur| candidate < cur) {
                dist.insert(e.from, candidate);
                heap.push(Frontier(candidate, e.from));
            }
        }
    }
    dist
}

/// For each initial node with a finite-weight route to `terminal`, the
/// minimum-weight path; `+∞` edges are ignored. Ties go to the
/// lexicographically smallest node sequence. Returns
/// [`Error::MetricDisconnected`] when no initial node has such a route.
pub fn shortest_paths(cone: &CircuitGraph, terminal: GraphNode) -> Result<Vec<Path>> {
    if !cone.contains(&terminal) {
        return Err(Error::InvalidArgument(format!(
            "terminal {terminal} is not in the graph"
        )));
    }
    let dist = distances_to(cone, terminal);
    let mut paths = Vec::new();
    for start in cone.initial_nodes().values() {
        let Some(&total) = dist.get(start) else {
            continue;
        };
        let mut edges = Vec::new();
        let (mut node, mut remaining) = (*start, total);
        while node != terminal {
            let step = cone
                .outgoing(&node)
                .filter(|e| e.weight.is_finite())
                .filter(|e| {
                    dist.get(&e.to)
                        .is_some_and(|&dv| e.weight + dv == remaining)
                })
                .min_by_key(|e| e.to)
                .expect("a tight edge exists along a shortest path");
            remaining = dist[&step.to];
            node = step.to;
            edges.push(step);
        }
        paths.push(cone.make_path(*start, &edges));
    }
    if paths.is_empty() {
        return Err(Error::MetricDisconnected);
    }
    Ok(paths)
}

/// Parameter slots of the gates a path traverses, in order, deduplicated.
pub fn path_parameters(path: &Path, circuit: &Circuit) -> Vec<usize> {
    let mut slots = Vec::new();
    for &g in &path.gates {
        if let Some(s) = circuit.gates()[g].param_slot {
            if !slots.contains(&s) {
                slots.push(s);
            }
        }
    }
    slots
}
