//! Branch graph: solid (strong parent), green (forward dependence) and red
//! (backward dependence) edges between branches.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use super::choice::{strides, ChoiceRelation};
use super::{ValidityError, ValidityResult};
use crate::graph::{BranchRef, RoutedGraph};
use crate::rel::Tuple;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Solid,
    Green,
    Red,
}

impl EdgeKind {
    pub fn dot_style(self) -> &'static str {
        match self {
            EdgeKind::Solid => "style=solid",
            EdgeKind::Green => "style=dashed,color=green",
            EdgeKind::Red => "style=dashed,color=red",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub kind: EdgeKind,
}

/// Graph over vertex positions; `names` gives each vertex's label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchGraph {
    pub names: Vec<String>,
    pub edges: BTreeSet<Edge>,
}

impl BranchGraph {
    pub fn new(names: Vec<String>, edges: impl IntoIterator<Item = Edge>) -> Self {
        let edges: BTreeSet<Edge> = edges.into_iter().collect();
        assert!(edges.iter().all(|e| e.from < names.len() && e.to < names.len()));
        Self { names, edges }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn count(&self, kind: EdgeKind) -> usize {
        self.edges.iter().filter(|e| e.kind == kind).count()
    }

    /// Edges as `(from name, to name, kind)`.
    pub fn named_edges(&self) -> BTreeSet<(String, String, EdgeKind)> {
        self.edges
            .iter()
            .map(|e| (self.names[e.from].clone(), self.names[e.to].clone(), e.kind))
            .collect()
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph branch_graph {\n");
        for n in &self.names {
            let _ = writeln!(s, "  \"{n}\";");
        }
        for e in &self.edges {
            let _ = writeln!(
                s,
                "  \"{}\" -> \"{}\" [{}];",
                self.names[e.from],
                self.names[e.to],
                e.kind.dot_style()
            );
        }
        s.push_str("}\n");
        s
    }
}

/// Slot-level dependence edges `(from slot, to slot)` of a functional choice relation.
fn dependence(cr: &ChoiceRelation) -> ValidityResult<BTreeSet<(usize, usize)>> {
    let st = strides(&cr.slot_sizes);
    let image = |idx: usize| -> ValidityResult<Vec<bool>> {
        let im = cr.images(idx);
        if im.len() != 1 {
            return Err(ValidityError::Internal("choice relation is not a function".into()));
        }
        Ok(im.into_iter().next().unwrap())
    };
    let mut out = BTreeSet::new();
    for idx in 0..cr.len() {
        let t = cr.choice_tuple(idx);
        for s in 0..cr.slots.len() {
            if cr.slot_sizes[s] < 2 || t[s] != 0 {
                continue;
            }
            let h0 = image(idx)?;
            for v in 1..cr.slot_sizes[s] {
                let h = image(idx + v * st[s])?;
                for (b, (x, y)) in h0.iter().zip(&h).enumerate() {
                    if x != y {
                        out.insert((s, b));
                    }
                }
            }
        }
    }
    Ok(out)
}

fn ensure_function(g: &RoutedGraph, cr: &ChoiceRelation, dir: super::Direction) -> ValidityResult<()> {
    match super::choice::univocality_witness(g, cr, dir) {
        Some(w) => Err(ValidityError::NotBiUnivocal(w)),
        None => Ok(()),
    }
}

pub fn green_edges(g: &RoutedGraph) -> ValidityResult<BTreeSet<(BranchRef, BranchRef)>> {
    let cr = ChoiceRelation::compute(g)?;
    ensure_function(g, &cr, super::Direction::Forward)?;
    Ok(dependence(&cr)?.into_iter().map(|(a, b)| (cr.slots[a], cr.slots[b])).collect())
}

/// Red `N^α → M^β` iff in the adjoint the choice at `M^β` influences whether `N^α` happens.
pub fn red_edges(g: &RoutedGraph) -> ValidityResult<BTreeSet<(BranchRef, BranchRef)>> {
    let adj = g.adjoint_graph();
    let cr = ChoiceRelation::compute(&adj)?;
    ensure_function(&adj, &cr, super::Direction::Backward)?;
    Ok(dependence(&cr)?.into_iter().map(|(a, b)| (cr.slots[b], cr.slots[a])).collect())
}

pub fn solid_edges(g: &RoutedGraph) -> ValidityResult<BTreeSet<(BranchRef, BranchRef)>> {
    let poss = g.consistent_assignments();
    let mus = poss.iter().map(|k| g.branches_of(k)).collect::<Result<Vec<_>, _>>()?;
    let n = g.nodes().len();
    let mut out = BTreeSet::new();
    for a in 0..n {
        for b in 0..n {
            let link = g.base.links(a, b);
            if link.is_empty() {
                continue;
            }
            let mut vals: BTreeMap<(usize, usize), BTreeSet<Tuple>> = BTreeMap::new();
            for (k, mu) in poss.iter().zip(&mus) {
                vals.entry((mu[a], mu[b])).or_default().insert(k.project(&link));
            }
            for ((x, y), set) in vals {
                let trivial = set.len() == 1 && {
                    let t = set.iter().next().unwrap();
                    link.iter().zip(t).all(|(&ar, &v)| g.arrows()[ar].dim(v) == 1)
                };
                if !trivial {
                    out.insert((BranchRef { node: a, branch: x }, BranchRef { node: b, branch: y }));
                }
            }
        }
    }
    Ok(out)
}

pub fn build_branch_graph(g: &RoutedGraph) -> ValidityResult<BranchGraph> {
    let refs = g.branch_refs();
    let pos = |b: &BranchRef| refs.binary_search(b).expect("known branch");
    let mut edges = Vec::new();
    for (kind, set) in [
        (EdgeKind::Solid, solid_edges(g)?),
        (EdgeKind::Green, green_edges(g)?),
        (EdgeKind::Red, red_edges(g)?),
    ] {
        edges.extend(set.iter().map(|(a, b)| Edge { from: pos(a), to: pos(b), kind }));
    }
    Ok(BranchGraph::new(refs.iter().map(|b| g.branch_name(*b)).collect(), edges))
}
