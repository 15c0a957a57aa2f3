//! Built-in routed graphs for the standard examples, with reference fleshings.

mod fleshing;

pub use fleshing::{chain_fleshing, grandfather_fleshing, PartyOp};

use std::collections::BTreeSet;

use crate::graph::{
    routes_from_global, Arrow, GlobalConstraint, GraphFile, IndexedGraph, Node, Predicate, Route, RoutedGraph, Target,
};
use crate::rel::{Relation, ValueSet};
use crate::tensor::{Fleshing, TensorResult};
use crate::validity::EdgeKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Switch(usize),
    ThreeSwitch(usize),
    Grenoble,
    GrenobleUnitary,
    Lugano,
    Grandfather,
    Identity(usize),
    Chain(usize),
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub id: String,
    pub summary: &'static str,
    pub graph: RoutedGraph,
    /// Constraint the routes were marginalised from, if any.
    pub global: Option<GlobalConstraint>,
    pub expected_valid: bool,
    /// Branch-graph vertex count, when the branch graph is defined.
    pub expected_vertices: Option<usize>,
    /// Edge colours found on closed walks of the branch graph.
    pub expected_loops: BTreeSet<EdgeKind>,
    /// Variants whose only correctness gate is numerical certification.
    pub experimental: bool,
    kind: Kind,
}

impl CatalogEntry {
    /// Party node positions, in node order.
    pub fn parties(&self) -> Vec<usize> {
        (0..self.graph.nodes().len()).filter(|&n| self.graph.nodes()[n].party).collect()
    }

    /// Dimension of the message each party acts on in the reference fleshing.
    pub fn party_dim(&self) -> Option<usize> {
        match self.kind {
            Kind::Switch(d) | Kind::ThreeSwitch(d) | Kind::Identity(d) | Kind::Chain(d) => Some(d),
            Kind::Grenoble | Kind::Lugano | Kind::Grandfather => Some(2),
            Kind::GrenobleUnitary => None,
        }
    }

    /// Reference fleshing with `ops` at the party nodes (in node order), or
    /// `None` if the entry has none.
    pub fn canonical_fleshing(&self, ops: &[PartyOp]) -> Option<TensorResult<Fleshing>> {
        let g = &self.graph;
        Some(match self.kind {
            Kind::Switch(d) => fleshing::switch(g, d, ops),
            Kind::ThreeSwitch(d) => fleshing::three_switch(g, d, ops),
            Kind::Grenoble => fleshing::grenoble(g, ops),
            Kind::Lugano => fleshing::lugano(g, ops),
            Kind::Grandfather | Kind::Identity(_) | Kind::Chain(_) => fleshing::direct(g, ops),
            Kind::GrenobleUnitary => return None,
        })
    }

    /// Reference fleshing with identity parties (Z for the grandfather loop).
    pub fn default_fleshing(&self) -> Option<TensorResult<Fleshing>> {
        let d = self.party_dim()?;
        let op = if self.kind == Kind::Grandfather { PartyOp::pauli_z() } else { PartyOp::identity(d) };
        self.canonical_fleshing(&vec![op; self.parties().len()])
    }

    /// Reference fleshing with swaps against a message-sized ancilla at every party.
    pub fn choi_fleshing(&self) -> Option<TensorResult<Fleshing>> {
        let d = self.party_dim()?;
        self.canonical_fleshing(&vec![PartyOp::swap(d); self.parties().len()])
    }

    /// File form: the global constraint when there is one, explicit routes otherwise.
    pub fn to_file(&self) -> GraphFile {
        let mut f = GraphFile::from_graph(&self.graph);
        if let Some(gc) = &self.global {
            f.routes = None;
            f.global_constraint = Some(gc.clone());
        }
        f
    }
}

/// Every entry at its default parameters.
pub fn all() -> Vec<CatalogEntry> {
    vec![switch(2), three_switch(2), grenoble(), grenoble_unitary(), lugano(), grandfather(), identity(2), chain(2)]
}

/// Looks up `id` or `id:d` (e.g. `switch:3`).
pub fn lookup(spec: &str) -> Option<CatalogEntry> {
    let (id, d) = match spec.split_once(':') {
        Some((id, d)) => (id, Some(d.parse::<usize>().ok().filter(|&d| d >= 1)?)),
        None => (spec, None),
    };
    let d = d.unwrap_or(2);
    let fixed = |e: CatalogEntry| (spec == id).then_some(e);
    match id {
        "switch" => Some(switch(d)),
        "three-switch" => Some(three_switch(d)),
        "identity" => Some(identity(d)),
        "chain" => Some(chain(d)),
        "grenoble" => fixed(grenoble()),
        "grenoble-unitary" => fixed(grenoble_unitary()),
        "lugano" => fixed(lugano()),
        "grandfather" => fixed(grandfather()),
        _ => None,
    }
}

struct Build {
    nodes: Vec<Node>,
    arrows: Vec<Arrow>,
}

impl Build {
    fn new(nodes: &[(&str, bool)]) -> Self {
        Self { nodes: nodes.iter().map(|&(id, party)| Node { id: id.into(), party }).collect(), arrows: Vec::new() }
    }

    fn pos(&self, id: Option<&str>) -> Option<usize> {
        id.map(|id| self.nodes.iter().position(|n| n.id == id).expect("declared node"))
    }

    /// Arrow whose values carry coordinates along `index`; multi-index labels
    /// spell one digit per index.
    fn arrow(&mut self, id: &str, tail: Option<&str>, head: Option<&str>, index: &[&str], values: &[(&str, usize)]) {
        let coords = values
            .iter()
            .map(|(l, _)| match index.len() {
                0 => Vec::new(),
                1 => vec![l.to_string()],
                _ => l.chars().map(String::from).collect(),
            })
            .collect();
        self.arrows.push(Arrow {
            id: id.into(),
            tail: self.pos(tail),
            head: self.pos(head),
            values: ValueSet::new(values.iter().map(|v| v.0)).expect("distinct labels"),
            dims: values.iter().map(|v| v.1).collect(),
            index: index.iter().map(|s| s.to_string()).collect(),
            coords,
        });
    }

    fn plain(&mut self, id: &str, tail: &str, head: &str, values: &[(&str, usize)]) {
        self.arrow(id, Some(tail), Some(head), &[], values);
    }

    fn ext_in(&mut self, id: &str, head: &str, dim: usize) {
        self.arrow(id, None, Some(head), &[], &[("*", dim)]);
    }

    fn ext_out(&mut self, id: &str, tail: &str, dim: usize) {
        self.arrow(id, Some(tail), None, &[], &[("*", dim)]);
    }

    fn indexed(&self) -> IndexedGraph {
        IndexedGraph { nodes: self.nodes.clone(), arrows: self.arrows.clone() }
    }

    /// Explicit routes, one label-pair list per node in node order.
    fn routed(self, routes: &[&[(&[&str], &[&str])]]) -> RoutedGraph {
        let base = self.indexed();
        let routes = routes
            .iter()
            .enumerate()
            .map(|(n, pairs)| {
                let ins = base.in_arrows(n);
                let outs = base.out_arrows(n);
                let slots = |xs: &[usize]| xs.iter().map(|&a| base.arrows[a].values.clone()).collect();
                let pairs: Vec<(Vec<&str>, Vec<&str>)> = pairs.iter().map(|(a, b)| (a.to_vec(), b.to_vec())).collect();
                let rel = Relation::from_labels(slots(&ins), slots(&outs), &pairs).expect("well-formed route");
                Route::new(ins, outs, rel)
            })
            .collect();
        RoutedGraph::new(base, routes).expect("consistent catalog graph")
    }

    fn global(self, gc: &GlobalConstraint) -> RoutedGraph {
        routes_from_global(self.indexed(), gc).expect("catalog constraint marginalises")
    }
}

fn sum(indices: &[&str], equals: Target) -> Predicate {
    Predicate::SumEq { indices: indices.iter().map(|s| s.to_string()).collect(), equals }
}

fn prod(indices: &[&str], equals: &str) -> Predicate {
    Predicate::ProductEq { indices: indices.iter().map(|s| s.to_string()).collect(), equals: Target::Index(equals.into()) }
}

fn entry(id: String, summary: &'static str, graph: RoutedGraph, kind: Kind) -> CatalogEntry {
    CatalogEntry {
        id,
        summary,
        graph,
        global: None,
        expected_valid: true,
        expected_vertices: None,
        expected_loops: BTreeSet::new(),
        experimental: false,
        kind,
    }
}

/// Two-party switch: P sends the message to A or B first, the dummy sectors
/// are one-dimensional and every message sector has dimension `d`.
pub fn switch(d: usize) -> CatalogEntry {
    assert!(d >= 1);
    let mut b = Build::new(&[("P", false), ("A", true), ("B", true), ("F", false)]);
    b.ext_in("in", "P", 2 * d);
    b.plain("i", "P", "A", &[("0", d), ("1", 1)]);
    b.plain("j", "P", "B", &[("0", 1), ("1", d)]);
    b.plain("l", "A", "B", &[("0", d), ("1", 1)]);
    b.plain("k", "B", "A", &[("0", 1), ("1", d)]);
    b.plain("m", "A", "F", &[("0", 1), ("1", d)]);
    b.plain("n", "B", "F", &[("0", d), ("1", 1)]);
    b.ext_out("out", "F", 2 * d);
    let delta: &[(&[&str], &[&str])] = &[(&["0", "0"], &["0", "0"]), (&["1", "1"], &["1", "1"])];
    let g = b.routed(&[
        &[(&["*"], &["0", "0"]), (&["*"], &["1", "1"])],
        delta,
        delta,
        &[(&["0", "0"], &["*"]), (&["1", "1"], &["*"])],
    ]);
    let mut e = entry(suffixed("switch", d), "coherent control of the order of two parties", g, Kind::Switch(d));
    e.expected_vertices = Some(6);
    e
}

fn suffixed(id: &str, d: usize) -> String {
    if d == 2 { id.to_string() } else { format!("{id}:{d}") }
}

/// Order index names with the agent sequence each one selects, in control order.
pub(crate) const THREE_SWITCH_ORDERS: [(&str, [&str; 3]); 6] = [
    ("l", ["A", "B", "C"]),
    ("p", ["A", "C", "B"]),
    ("m", ["B", "C", "A"]),
    ("q", ["B", "A", "C"]),
    ("n", ["C", "A", "B"]),
    ("r", ["C", "B", "A"]),
];

/// Three-party switch: one binary index per causal order, exactly one of which is set.
pub fn three_switch(d: usize) -> CatalogEntry {
    assert!(d >= 1);
    let mut b = Build::new(&[("P", false), ("A", true), ("B", true), ("C", true), ("F", false)]);
    b.ext_in("in", "P", 6 * d);
    let vals = [("00", 1), ("10", d), ("01", d)];
    // Each arrow carries the two orders in which its tail immediately precedes its head.
    for (id, t, h, idx) in [
        ("pa", "P", "A", ["l", "p"]),
        ("pb", "P", "B", ["m", "q"]),
        ("pc", "P", "C", ["n", "r"]),
        ("ab", "A", "B", ["l", "n"]),
        ("ac", "A", "C", ["p", "q"]),
        ("ba", "B", "A", ["q", "r"]),
        ("bc", "B", "C", ["l", "m"]),
        ("ca", "C", "A", ["m", "n"]),
        ("cb", "C", "B", ["p", "r"]),
        ("af", "A", "F", ["m", "r"]),
        ("bf", "B", "F", ["p", "n"]),
        ("cf", "C", "F", ["l", "q"]),
    ] {
        b.arrow(id, Some(t), Some(h), &idx, &vals);
    }
    b.ext_out("out", "F", 6 * d);
    let gc = GlobalConstraint::Predicates(vec![sum(&["l", "m", "n", "p", "q", "r"], Target::Const(1))]);
    let g = b.global(&gc);
    let mut e = entry(suffixed("three-switch", d), "coherent control of all six orders of three parties", g, Kind::ThreeSwitch(d));
    e.global = Some(gc);
    e.expected_vertices = Some(20);
    e
}

fn grenoble_graph(unitary: bool) -> (RoutedGraph, GlobalConstraint) {
    let mut b = Build::new(&[("P", false), ("A", true), ("B", true), ("C", true), ("F", false)]);
    b.ext_in("in", "P", if unitary { 12 } else { 6 });
    let routed = [("0", 1), ("1", 2)];
    for (id, t, h, i) in [("ra", "P", "A", "l"), ("sb", "P", "B", "m"), ("tc", "P", "C", "n")] {
        b.arrow(id, Some(t), Some(h), &[i], &routed);
    }
    if unitary {
        for (id, t, h, i) in [("ra2", "P", "A", "l"), ("sb2", "P", "B", "m"), ("tc2", "P", "C", "n")] {
            b.arrow(id, Some(t), Some(h), &[i], &routed);
        }
    }
    // First index: second agent after the first; second index: third after the second.
    let first = if unitary { 2 } else { 1 };
    let vals = [("00", 1), ("10", first), ("01", 2)];
    for (id, t, h, idx) in [
        ("ab", "A", "B", ["l1", "n1"]),
        ("bc", "B", "C", ["m1", "l1"]),
        ("ca", "C", "A", ["n1", "m1"]),
        ("ac", "A", "C", ["l2", "m2"]),
        ("cb", "C", "B", ["n2", "l2"]),
        ("ba", "B", "A", ["m2", "n2"]),
    ] {
        b.arrow(id, Some(t), Some(h), &idx, &vals);
    }
    for (id, t, i) in [("af", "A", "f"), ("ad", "A", "f"), ("bf", "B", "g"), ("be", "B", "g"), ("cf", "C", "h"), ("ck", "C", "h")] {
        b.arrow(id, Some(t), Some("F"), &[i], &routed);
    }
    b.ext_out("out", "F", 12);
    let gc = GlobalConstraint::Predicates(vec![
        sum(&["l", "m", "n"], Target::Const(1)),
        sum(&["l1", "l2"], Target::Index("l".into())),
        sum(&["m1", "m2"], Target::Index("m".into())),
        sum(&["n1", "n2"], Target::Index("n".into())),
        sum(&["m1", "n2"], Target::Index("f".into())),
        sum(&["l2", "n1"], Target::Index("g".into())),
        sum(&["l1", "m2"], Target::Index("h".into())),
    ]);
    (b.global(&gc), gc)
}

/// Three parties where the first one chooses who comes second.
pub fn grenoble() -> CatalogEntry {
    let (g, gc) = grenoble_graph(false);
    let mut e = entry("grenoble".into(), "dynamical control of the order of three parties (isometric)", g, Kind::Grenoble);
    e.global = Some(gc);
    e.expected_vertices = Some(14);
    e
}

/// Balanced variant: an extra qubit at the input and a second routed wire from
/// P to each party make every branch square.
pub fn grenoble_unitary() -> CatalogEntry {
    let (g, gc) = grenoble_graph(true);
    let mut e = entry(
        "grenoble-unitary".into(),
        "balanced variant of the dynamical three-party order",
        g,
        Kind::GrenobleUnitary,
    );
    e.global = Some(gc);
    e.expected_vertices = Some(14);
    e.experimental = true;
    e
}

/// Three agents vote through counting stations X, Y, Z; an agent receives the
/// result bit before voting.
pub fn lugano() -> CatalogEntry {
    let mut b = Build::new(&[
        ("A", true),
        ("B", true),
        ("C", true),
        ("X", false),
        ("Y", false),
        ("Z", false),
        ("F", false),
    ]);
    for (id, h) in [("pa", "A"), ("pb", "B"), ("pc", "C")] {
        b.ext_in(id, h, 2);
    }
    let bit = [("0", 1), ("1", 1)];
    for (id, t, h) in [
        ("i1", "A", "Z"),
        ("i2", "A", "Y"),
        ("j1", "B", "X"),
        ("j2", "B", "Z"),
        ("k1", "C", "Y"),
        ("k2", "C", "X"),
        ("l", "X", "A"),
        ("m", "Y", "B"),
        ("n", "Z", "C"),
    ] {
        b.arrow(id, Some(t), Some(h), &[id], &bit);
    }
    for (id, t, i) in [("la", "A", "l"), ("mb", "B", "m"), ("nc", "C", "n")] {
        b.arrow(id, Some(t), Some("F"), &[i], &bit);
    }
    let pairs = [("00", 1), ("01", 1), ("10", 1), ("11", 1)];
    for (id, t, idx) in [("xf", "X", ["k2", "j1"]), ("yf", "Y", ["i2", "k1"]), ("zf", "Z", ["i1", "j2"])] {
        b.arrow(id, Some(t), Some("F"), &idx, &pairs);
    }
    b.ext_out("out", "F", 8);
    let gc = GlobalConstraint::Predicates(vec![
        sum(&["i1", "i2"], Target::Const(1)),
        sum(&["j1", "j2"], Target::Const(1)),
        sum(&["k1", "k2"], Target::Const(1)),
        prod(&["k2", "j1"], "l"),
        prod(&["i2", "k1"], "m"),
        prod(&["i1", "j2"], "n"),
    ]);
    let g = b.global(&gc);
    let mut e = entry("lugano".into(), "three-agent vote whose winner learns the result before voting", g, Kind::Lugano);
    e.global = Some(gc);
    e.expected_vertices = Some(19);
    e.expected_loops = BTreeSet::from([EdgeKind::Green]);
    e
}

/// One node whose qubit output feeds back into its own input.
pub fn grandfather() -> CatalogEntry {
    let mut b = Build::new(&[("A", true)]);
    b.plain("a", "A", "A", &[("0", 1), ("1", 1)]);
    let g = b.routed(&[&[(&["0"], &["0"]), (&["1"], &["1"])]]);
    let mut e = entry("grandfather".into(), "a qubit looped back into its own past", g, Kind::Grandfather);
    e.expected_valid = false;
    e
}

/// A single party between the global past and future.
pub fn identity(d: usize) -> CatalogEntry {
    let mut b = Build::new(&[("A", true)]);
    b.ext_in("in", "A", d);
    b.ext_out("out", "A", d);
    let g = b.routed(&[&[(&["*"], &["*"])]]);
    let mut e = entry(suffixed("identity", d), "one party slot", g, Kind::Identity(d));
    e.expected_vertices = Some(1);
    e
}

/// Two parties in sequence.
pub fn chain(d: usize) -> CatalogEntry {
    let mut b = Build::new(&[("A", true), ("B", true)]);
    b.ext_in("in", "A", d);
    b.arrow("a", Some("A"), Some("B"), &[], &[("*", d)]);
    b.ext_out("out", "B", d);
    let full: &[(&[&str], &[&str])] = &[(&["*"], &["*"])];
    let g = b.routed(&[full, full]);
    let mut e = entry(suffixed("chain", d), "two party slots in sequence", g, Kind::Chain(d));
    e.expected_vertices = Some(2);
    e
}

/// Small graphs used by tests.
pub mod fixtures {
    use super::*;

    /// N emits a fixed bit that M discards: univocal forwards, overdetermined backwards.
    pub fn erasing_chain() -> RoutedGraph {
        let mut b = Build::new(&[("N", false), ("M", false)]);
        b.plain("a", "N", "M", &[("0", 1), ("1", 1)]);
        b.routed(&[&[(&[], &["0"])], &[(&["0"], &[]), (&["1"], &[])]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validity::validate;

    #[test]
    fn golden_verdicts_and_summaries() {
        for e in all() {
            assert!(e.graph.validate_structure().is_empty(), "{}", e.id);
            let v = validate(&e.graph).unwrap();
            assert_eq!(v.valid, e.expected_valid, "{}: {}", e.id, v.summary());
            assert_eq!(v.branch_graph.as_ref().map(|b| b.vertices.len()), e.expected_vertices, "{}", e.id);
            let loops = v.loop_report.map(|r| r.loop_colours).unwrap_or_default();
            assert_eq!(loops, e.expected_loops, "{}", e.id);
        }
    }

    #[test]
    fn exported_files_round_trip() {
        for e in all() {
            let text = e.to_file().to_json();
            let g = crate::graph::parse_graph(&text).unwrap();
            assert_eq!(g, e.graph, "{}", e.id);
            assert_eq!(validate(&g).unwrap().to_json(), validate(&e.graph).unwrap().to_json());
        }
    }

    #[test]
    fn lookup_parses_dimension() {
        assert_eq!(lookup("switch:3").unwrap().id, "switch:3");
        assert_eq!(lookup("switch").unwrap().id, "switch");
        assert!(lookup("lugano:3").is_none());
        assert!(lookup("switch:0").is_none());
        assert!(lookup("nope").is_none());
    }

    #[test]
    fn switch_branch_counts() {
        let g = switch(2).graph;
        let count = |id: &str| g.route(g.node_index(id).unwrap()).br().branches().len();
        assert_eq!((count("P"), count("A"), count("B"), count("F")), (1, 2, 2, 1));
    }

    #[test]
    fn three_switch_agents_have_six_branches() {
        let g = three_switch(2).graph;
        for id in ["A", "B", "C"] {
            assert_eq!(g.route(g.node_index(id).unwrap()).br().branches().len(), 6);
        }
    }

    #[test]
    fn grenoble_agents_have_four_branches() {
        let g = grenoble().graph;
        for id in ["A", "B", "C"] {
            assert_eq!(g.route(g.node_index(id).unwrap()).br().branches().len(), 4);
        }
    }
}
