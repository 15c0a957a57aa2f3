//! Weak-loops check: every closed walk must consist of dashed edges of one colour.

use std::collections::{BTreeSet, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use super::branch_graph::{BranchGraph, Edge, EdgeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopFault {
    /// The closed walk contains a solid edge.
    Solid,
    /// The closed walk mixes green and red edges.
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LoopWitness {
    pub fault: LoopFault,
    /// Consecutive edges of the closed walk as `(from, to, kind)`.
    pub walk: Vec<(String, String, EdgeKind)>,
}

impl std::fmt::Display for LoopWitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let fault = match self.fault {
            LoopFault::Solid => "loop through a solid edge",
            LoopFault::Mixed => "loop mixing green and red edges",
        };
        let steps: Vec<String> = self
            .walk
            .iter()
            .map(|(a, b, k)| format!("{a} -{}-> {b}", format!("{k:?}").to_lowercase()))
            .collect();
        write!(f, "weak loops: {fault}: {}", steps.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LoopReport {
    pub has_loops: bool,
    pub loop_colours: BTreeSet<EdgeKind>,
}

/// Strongly connected components as vertex lists, plus a component id per vertex.
pub fn components(bg: &BranchGraph) -> (Vec<Vec<usize>>, Vec<usize>) {
    let mut pg: DiGraph<(), ()> = DiGraph::new();
    let ids: Vec<_> = (0..bg.len()).map(|_| pg.add_node(())).collect();
    for e in &bg.edges {
        pg.add_edge(ids[e.from], ids[e.to], ());
    }
    let mut comps: Vec<Vec<usize>> = tarjan_scc(&pg)
        .into_iter()
        .map(|c| {
            let mut v: Vec<usize> = c.into_iter().map(|n| n.index()).collect();
            v.sort_unstable();
            v
        })
        .collect();
    comps.sort();
    let mut comp_of = vec![0; bg.len()];
    for (i, c) in comps.iter().enumerate() {
        for &v in c {
            comp_of[v] = i;
        }
    }
    (comps, comp_of)
}

/// Edges lying inside some strongly connected component, i.e. on some closed walk.
pub fn cyclic_edges(bg: &BranchGraph) -> Vec<Edge> {
    let (_, comp_of) = components(bg);
    bg.edges.iter().copied().filter(|e| comp_of[e.from] == comp_of[e.to]).collect()
}

pub fn loop_report(bg: &BranchGraph) -> LoopReport {
    let cyc = cyclic_edges(bg);
    LoopReport { has_loops: !cyc.is_empty(), loop_colours: cyc.iter().map(|e| e.kind).collect() }
}

/// BFS path `from → to` using only `edges`; returns the edges walked.
fn shortest_path(n: usize, edges: &[Edge], from: usize, to: usize) -> Option<Vec<Edge>> {
    if from == to {
        return Some(Vec::new());
    }
    let mut prev: Vec<Option<Edge>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[from] = true;
    let mut q = VecDeque::from([from]);
    while let Some(u) = q.pop_front() {
        for e in edges.iter().filter(|e| e.from == u) {
            if !seen[e.to] {
                seen[e.to] = true;
                prev[e.to] = Some(*e);
                if e.to == to {
                    let mut path = Vec::new();
                    let mut cur = to;
                    while let Some(pe) = prev[cur] {
                        path.push(pe);
                        cur = pe.from;
                        if cur == from {
                            break;
                        }
                    }
                    path.reverse();
                    return Some(path);
                }
                q.push_back(e.to);
            }
        }
    }
    None
}

pub fn check_weak_loops(bg: &BranchGraph) -> Result<(), LoopWitness> {
    let (_, comp_of) = components(bg);
    let inner: Vec<Edge> = cyclic_edges(bg);
    let n = bg.len();
    let mut best: Option<(LoopFault, Vec<Edge>)> = None;
    let mut consider = |fault: LoopFault, walk: Vec<Edge>| {
        if best.as_ref().is_none_or(|(_, w)| walk.len() < w.len()) {
            best = Some((fault, walk));
        }
    };
    for s in inner.iter().filter(|e| e.kind == EdgeKind::Solid) {
        let back = shortest_path(n, &inner, s.to, s.from).expect("edge inside a component");
        let mut walk = vec![*s];
        walk.extend(back);
        consider(LoopFault::Solid, walk);
    }
    for g in inner.iter().filter(|e| e.kind == EdgeKind::Green) {
        for r in inner.iter().filter(|e| e.kind == EdgeKind::Red && comp_of[e.from] == comp_of[g.from]) {
            let mut walk = vec![*g];
            walk.extend(shortest_path(n, &inner, g.to, r.from).expect("same component"));
            walk.push(*r);
            walk.extend(shortest_path(n, &inner, r.to, g.from).expect("same component"));
            consider(LoopFault::Mixed, walk);
        }
    }
    match best {
        None => Ok(()),
        Some((fault, walk)) => Err(LoopWitness {
            fault,
            walk: walk
                .iter()
                .map(|e| (bg.names[e.from].clone(), bg.names[e.to].clone(), e.kind))
                .collect(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bg(n: usize, edges: &[(usize, usize, EdgeKind)]) -> BranchGraph {
        BranchGraph::new(
            (0..n).map(|i| format!("v{i}")).collect(),
            edges.iter().map(|&(from, to, kind)| Edge { from, to, kind }),
        )
    }

    use EdgeKind::*;

    #[test]
    fn acyclic_passes() {
        let g = bg(3, &[(0, 1, Solid), (1, 2, Green), (0, 2, Red)]);
        assert!(check_weak_loops(&g).is_ok());
        assert!(!loop_report(&g).has_loops);
    }

    #[test]
    fn green_cycle_passes() {
        let g = bg(3, &[(0, 1, Green), (1, 2, Green), (2, 0, Green), (2, 1, Green)]);
        assert!(check_weak_loops(&g).is_ok());
        assert_eq!(loop_report(&g).loop_colours, BTreeSet::from([Green]));
    }

    #[test]
    fn solid_cycle_fails() {
        let g = bg(2, &[(0, 1, Solid), (1, 0, Green)]);
        let w = check_weak_loops(&g).unwrap_err();
        assert_eq!(w.fault, LoopFault::Solid);
        assert_eq!(w.walk.len(), 2);
    }

    #[test]
    fn figure_eight_mixed_fails() {
        // Green loop and red loop sharing vertex 0.
        let g = bg(3, &[(0, 1, Green), (1, 0, Green), (0, 2, Red), (2, 0, Red)]);
        let w = check_weak_loops(&g).unwrap_err();
        assert_eq!(w.fault, LoopFault::Mixed);
        assert_eq!(w.walk.len(), 4);
        assert_eq!(w.walk.first().unwrap().0, w.walk.last().unwrap().1);
    }

    #[test]
    fn bicoloured_simple_cycle_fails() {
        let g = bg(2, &[(0, 1, Green), (1, 0, Red)]);
        assert_eq!(check_weak_loops(&g).unwrap_err().walk.len(), 2);
    }

    #[test]
    fn self_loop_counts() {
        let g = bg(1, &[(0, 0, Solid)]);
        assert_eq!(check_weak_loops(&g).unwrap_err().walk.len(), 1);
    }
}
