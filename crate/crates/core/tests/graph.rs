mod common;

use std::collections::BTreeSet;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use infoflow::circuit::{
    build_vqc_ansatz, build_vqe_ansatz, evaluate, Circuit, CircuitBuilder, GateKind,
};
use infoflow::graph::{
    build_graph, causal_cone, path_parameters, sample_random_path, shortest_paths, CircuitGraph,
    EdgeLabel, GraphNode,
};
use infoflow::metric::LegPair;
use infoflow::statevector::StateVector;

/// All forward paths from `start` to `terminal` as (nodes, weight).
fn enumerate_from(
    g: &CircuitGraph,
    start: GraphNode,
    terminal: GraphNode,
) -> Vec<(Vec<GraphNode>, f64)> {
    fn walk(
        g: &CircuitGraph,
        at: GraphNode,
        t: GraphNode,
        nodes: &mut Vec<GraphNode>,
        w: f64,
        out: &mut Vec<(Vec<GraphNode>, f64)>,
    ) {
        if at == t {
            out.push((nodes.clone(), w));
            return;
        }
        for e in g.outgoing(&at) {
            nodes.push(e.to);
            walk(g, e.to, t, nodes, w + e.weight, out);
            nodes.pop();
        }
    }
    let mut out = Vec::new();
    walk(g, start, terminal, &mut vec![start], 0.0, &mut out);
    out
}

fn all_paths(g: &CircuitGraph, terminal: GraphNode) -> Vec<(Vec<GraphNode>, f64)> {
    g.initial_nodes()
        .values()
        .flat_map(|&s| enumerate_from(g, s, terminal))
        .collect()
}

fn two_qubit_count(c: &Circuit) -> usize {
    c.gates().iter().filter(|g| g.kind.arity() == 2).count()
}

fn check_counts(c: &Circuit, g: &CircuitGraph) {
    let nodes: usize = (0..c.n_qubits())
        .map(|q| c.gates().iter().filter(|x| x.qubits.contains(&q)).count() + 1)
        .sum();
    let edges = (c.gates().len() - two_qubit_count(c)) + 4 * two_qubit_count(c);
    assert_eq!(g.node_count(), nodes);
    assert_eq!(g.edges().len(), edges);
}

#[test]
fn ansatz_graph_counts() {
    for n in 2..=7 {
        for layers in 1..=3 {
            for c in [
                build_vqe_ansatz(n, layers).unwrap(),
                build_vqc_ansatz(n, layers).unwrap(),
            ] {
                let g = build_graph(&c, &vec![0.9; c.n_params()]).unwrap();
                check_counts(&c, &g);
                assert!(g.topological_order().is_some());
            }
        }
    }
    // 6-qubit, 1 layer: 6 Ry + 5 CRy → 6 + 6 + 2·5 nodes, 6 + 20 edges
    let c = build_vqe_ansatz(6, 1).unwrap();
    let g = build_graph(&c, &[0.3; 11]).unwrap();
    assert_eq!((g.node_count(), g.edges().len()), (22, 26));
}

#[test]
fn edges_point_forward_one_segment() {
    let c = build_vqc_ansatz(4, 2).unwrap();
    let g = build_graph(&c, &vec![1.1; c.n_params()]).unwrap();
    for e in g.edges() {
        assert_eq!(
            e.to.segment,
            g.nodes()
                .filter(|n| n.qubit == e.to.qubit && n.segment < e.to.segment)
                .count()
        );
        assert!(e.weight >= 0.0);
        let gate = &c.gates()[e.gate];
        assert!(gate.qubits.contains(&e.from.qubit) && gate.qubits.contains(&e.to.qubit));
        if e.from.qubit == e.to.qubit {
            let prior = c.gates()[..e.gate]
                .iter()
                .filter(|x| x.qubits.contains(&e.from.qubit))
                .count();
            assert_eq!((e.from.segment, e.to.segment), (prior, prior + 1));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_circuit_counts(seed in any::<u64>(), n in 2usize..6, extra in 0usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_circuit(n, extra, &mut rng);
        let params = random_params(c.n_params(), &mut rng);
        let g = build_graph(&c, &params).unwrap();
        check_counts(&c, &g);
        let again = build_graph(&c, &params).unwrap();
        for (x, y) in g.edges().iter().zip(again.edges()) {
            prop_assert_eq!(x.weight.to_bits(), y.weight.to_bits());
        }
    }

    #[test]
    fn out_of_cone_parameters_do_not_matter(seed in any::<u64>(), n in 2usize..6, extra in 0usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_circuit(n, extra, &mut rng);
        let params = random_params(c.n_params(), &mut rng);
        let ham = random_hamiltonian(n, 1, &mut rng);
        let term = &ham.terms()[0];
        let measured: Vec<usize> = term.qubits().collect();
        let cone = causal_cone(&build_graph(&c, &params).unwrap(), &measured).unwrap();
        let inside = cone.parameter_slots();
        let mut shifted = params.clone();
        for (slot, p) in shifted.iter_mut().enumerate() {
            if !inside.contains(&slot) {
                *p += std::f64::consts::PI;
            }
        }
        let zero = StateVector::zero(n);
        let before = term.string_expectation(&evaluate(&c, &params, &zero).unwrap()).unwrap();
        let after = term.string_expectation(&evaluate(&c, &shifted, &zero).unwrap()).unwrap();
        prop_assert!((before - after).abs() < 1e-12);
    }

    #[test]
    fn sampled_paths_are_valid(seed in any::<u64>(), n in 2usize..6, extra in 0usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_circuit(n, extra, &mut rng);
        let g = build_graph(&c, &random_params(c.n_params(), &mut rng)).unwrap();
        let q = rng.random_range(0..n);
        let cone = causal_cone(&g, &[q]).unwrap();
        let terminal = cone.terminal(q).unwrap();
        let slots = cone.parameter_slots();
        for _ in 0..10 {
            let p = sample_random_path(&cone, terminal, &mut rng).unwrap();
            prop_assert_eq!(p.nodes.first().unwrap().segment, 0);
            prop_assert_eq!(*p.nodes.last().unwrap(), terminal);
            for w in p.nodes.windows(2) {
                prop_assert!(cone.outgoing(&w[0]).any(|e| e.to == w[1]));
            }
            prop_assert!(p.slots.iter().all(|s| slots.contains(s)));
            prop_assert_eq!(&path_parameters(&p, &c), &p.slots);
        }
    }
}

/// Transitive closure of the edge relation (Warshall).
fn reachability(g: &CircuitGraph) -> (Vec<GraphNode>, Vec<Vec<bool>>) {
    let nodes: Vec<GraphNode> = g.nodes().copied().collect();
    let idx = |n: &GraphNode| nodes.iter().position(|x| x == n).unwrap();
    let k = nodes.len();
    let mut r = vec![vec![false; k]; k];
    for (i, row) in r.iter_mut().enumerate() {
        row[i] = true;
    }
    for e in g.edges() {
        r[idx(&e.from)][idx(&e.to)] = true;
    }
    for m in 0..k {
        for i in 0..k {
            for j in 0..k {
                if r[i][m] && r[m][j] {
                    r[i][j] = true;
                }
            }
        }
    }
    (nodes, r)
}

#[test]
fn cone_matches_brute_force_reachability() {
    let c = build_vqe_ansatz(6, 1).unwrap();
    let g = build_graph(&c, &vec![0.5; c.n_params()]).unwrap();
    let (nodes, r) = reachability(&g);
    for measured in [vec![0], vec![3], vec![2, 5], vec![0, 1, 2, 3, 4, 5]] {
        let cone = causal_cone(&g, &measured).unwrap();
        let terminals: Vec<usize> = measured
            .iter()
            .map(|&q| {
                nodes
                    .iter()
                    .position(|n| *n == g.terminal(q).unwrap())
                    .unwrap()
            })
            .collect();
        let expected: BTreeSet<GraphNode> = (0..nodes.len())
            .filter(|&i| terminals.iter().any(|&t| r[i][t]))
            .map(|i| nodes[i])
            .collect();
        assert_eq!(
            cone.nodes().copied().collect::<BTreeSet<_>>(),
            expected,
            "{measured:?}"
        );
        let edges = g
            .edges()
            .iter()
            .filter(|e| expected.contains(&e.from) && expected.contains(&e.to))
            .count();
        assert_eq!(cone.edges().len(), edges);
    }
    let full = causal_cone(&g, &[0, 1, 2, 3, 4, 5]).unwrap();
    assert_eq!(full, g);
}

#[test]
fn cnot_random_paths_split_evenly() {
    let mut b = CircuitBuilder::new(2);
    b.gate(GateKind::Cnot, &[0, 1]).unwrap();
    let c = b.build().unwrap();
    let g = build_graph(&c, &[]).unwrap();
    let terminal = g.terminal(0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let draws = 10_000;
    let straight = (0..draws)
        .filter(|_| {
            sample_random_path(&g, terminal, &mut rng).unwrap().nodes[0] == GraphNode::new(0, 0)
        })
        .count();
    let sigma = (draws as f64 * 0.25).sqrt();
    assert!(
        (straight as f64 - draws as f64 / 2.0).abs() < 3.0 * sigma,
        "{straight}"
    );
}

#[test]
fn random_walk_probabilities_match_enumeration() {
    // each path's probability is the product of 1 / in-degree along it
    let mut b = CircuitBuilder::new(3);
    b.rotation(GateKind::Cry, &[0, 1]).unwrap();
    b.rotation(GateKind::Ry, &[2]).unwrap();
    b.rotation(GateKind::Crz, &[1, 2]).unwrap();
    let c = b.build().unwrap();
    let g = build_graph(&c, &[0.4, 0.7, 1.2]).unwrap();
    let terminal = g.terminal(2).unwrap();
    let cone = causal_cone(&g, &[2]).unwrap();
    let paths = all_paths(&cone, terminal);
    let prob = |nodes: &[GraphNode]| {
        nodes[1..]
            .iter()
            .map(|n| 1.0 / cone.incoming(n).count() as f64)
            .product::<f64>()
    };
    assert!((paths.iter().map(|(p, _)| prob(p)).sum::<f64>() - 1.0).abs() < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let draws = 10_000;
    let samples: Vec<Vec<GraphNode>> = (0..draws)
        .map(|_| sample_random_path(&cone, terminal, &mut rng).unwrap().nodes)
        .collect();
    for (p, _) in &paths {
        let expected = prob(p);
        let seen = samples.iter().filter(|s| *s == p).count() as f64;
        let sigma = (draws as f64 * expected * (1.0 - expected)).sqrt();
        assert!(
            (seen - draws as f64 * expected).abs() < 3.0 * sigma.max(1.0),
            "{p:?}"
        );
    }
}

#[test]
fn shortest_paths_match_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut checked = 0;
    while checked < 60 {
        let c = random_circuit(3, rng.random_range(0..3), &mut rng);
        let g = build_graph(&c, &random_params(c.n_params(), &mut rng)).unwrap();
        let q = rng.random_range(0..3);
        let cone = causal_cone(&g, &[q]).unwrap();
        let terminal = cone.terminal(q).unwrap();
        let paths = all_paths(&cone, terminal);
        if paths.len() > 12 {
            continue;
        }
        checked += 1;
        let found = match shortest_paths(&cone, terminal) {
            Ok(found) => found,
            Err(_) => {
                assert!(paths.iter().all(|(_, w)| w.is_infinite()));
                continue;
            }
        };
        for start in cone.initial_nodes().values() {
            let mut finite: Vec<&(Vec<GraphNode>, f64)> = paths
                .iter()
                .filter(|(p, w)| p[0] == *start && w.is_finite())
                .collect();
            let got = found.iter().find(|p| p.nodes[0] == *start);
            if finite.is_empty() {
                assert!(got.is_none());
                continue;
            }
            let best = finite.iter().map(|(_, w)| *w).fold(f64::INFINITY, f64::min);
            let got = got.expect("start with a finite path is covered");
            assert!((cone.path_weight(got) - best).abs() < 1e-12);
            // ties go to the smallest node sequence
            finite.retain(|(_, w)| (w - best).abs() < 1e-12);
            let smallest = finite.iter().map(|(p, _)| p.clone()).min().unwrap();
            if finite.len() == 1 {
                assert_eq!(got.nodes, smallest);
            }
        }
    }
}

#[test]
fn equal_gates_prefer_fewest_diagonals() {
    let mut b = CircuitBuilder::new(3);
    b.rotation(GateKind::Cry, &[0, 1]).unwrap();
    b.rotation(GateKind::Cry, &[1, 2]).unwrap();
    b.rotation(GateKind::Cry, &[0, 1]).unwrap();
    let c = b.build().unwrap();
    let g = build_graph(&c, &[0.6; 3]).unwrap();
    let weight = |p: LegPair| {
        g.edges()
            .iter()
            .find(|e| e.label == EdgeLabel::Legs(p))
            .unwrap()
            .weight
    };
    assert!(weight(LegPair::AD) > weight(LegPair::AC).max(weight(LegPair::BD)));
    let diagonals = |nodes: &[GraphNode]| {
        nodes
            .windows(2)
            .filter(|w| w[0].qubit != w[1].qubit)
            .count()
    };
    for q in 0..3 {
        let cone = causal_cone(&g, &[q]).unwrap();
        let terminal = cone.terminal(q).unwrap();
        let paths = all_paths(&cone, terminal);
        let best = shortest_paths(&cone, terminal).unwrap();
        let overall = best
            .iter()
            .min_by(|x, y| cone.path_weight(x).total_cmp(&cone.path_weight(y)))
            .unwrap();
        let fewest = paths.iter().map(|(p, _)| diagonals(p)).min().unwrap();
        assert_eq!(diagonals(&overall.nodes), fewest);
    }
}

#[test]
fn path_parameters_skip_fixed_gates() {
    let mut b = CircuitBuilder::new(2);
    b.rotation(GateKind::Ry, &[0]).unwrap();
    b.gate(GateKind::X, &[0]).unwrap();
    b.rotation(GateKind::Cry, &[0, 1]).unwrap();
    let c = b.build().unwrap();
    let g = build_graph(&c, &[0.2, 0.9]).unwrap();
    let t = g.terminal(1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut seen = BTreeSet::new();
    for _ in 0..50 {
        let p = sample_random_path(&g, t, &mut rng).unwrap();
        assert_eq!(path_parameters(&p, &c), p.slots);
        seen.insert(p.slots);
    }
    assert_eq!(seen, BTreeSet::from([vec![0, 1], vec![1]]));
}

#[test]
fn metric_disconnection_is_reported() {
    let mut b = CircuitBuilder::new(2);
    b.rotation(GateKind::Cry, &[0, 1]).unwrap();
    let c = b.build().unwrap();
    let g = build_graph(&c, &[0.0]).unwrap();
    let cone = causal_cone(&g, &[1]).unwrap();
    let paths = shortest_paths(&cone, cone.terminal(1).unwrap()).unwrap();
    assert_eq!(paths.len(), 1);
    assert_eq!(paths[0].nodes[0], GraphNode::new(1, 0));
}
