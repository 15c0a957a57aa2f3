//! Random routed graphs and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use routact::graph::{Arrow, IndexedGraph, Node, Route, RoutedGraph};
use routact::rel::{all_tuples, Relation, Tuple, ValueSet};
use routact::validity::{BranchGraph, Edge, EdgeKind};

pub fn values(n: usize) -> ValueSet {
    ValueSet::new((0..n).map(|v| v.to_string())).unwrap()
}

/// Branched relation built as a disjoint union of full blocks.
pub fn random_branched(rng: &mut impl Rng, domain: Vec<ValueSet>, codomain: Vec<ValueSet>) -> Relation {
    let mut ins = all_tuples(&domain);
    let mut outs = all_tuples(&codomain);
    ins.shuffle(rng);
    outs.shuffle(rng);
    let nb = rng.random_range(1..=ins.len().min(outs.len()).min(3));
    // The first nb tuples on each side seed one branch each; the rest join a
    // random branch or are left impractical.
    let assign = |rng: &mut dyn rand::RngCore, n: usize| -> Vec<Option<usize>> {
        (0..n)
            .map(|i| {
                if i < nb {
                    Some(i)
                } else if rng.random_bool(0.25) {
                    None
                } else {
                    Some(rng.random_range(0..nb))
                }
            })
            .collect()
    };
    let bi = assign(rng, ins.len());
    let bo = assign(rng, outs.len());
    let mut pairs = Vec::new();
    for (a, ba) in ins.iter().zip(&bi) {
        for (b, bb) in outs.iter().zip(&bo) {
            if ba.is_some() && ba == bb {
                pairs.push((a.clone(), b.clone()));
            }
        }
    }
    Relation::new(domain, codomain, pairs).unwrap()
}

/// At most 4 nodes, at most 5 arrows of at most 3 values; external inputs are
/// single-valued so node outputs determine every arrow.
pub fn random_graph(seed: u64) -> RoutedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=4);
    let nodes: Vec<Node> = (0..n).map(|i| Node { id: format!("N{i}"), party: false }).collect();
    let m = rng.random_range(1..=5);
    let mut arrows = Vec::new();
    for a in 0..m {
        let tail = (!rng.random_bool(0.15)).then(|| rng.random_range(0..n));
        let head = if tail.is_none() || !rng.random_bool(0.15) { Some(rng.random_range(0..n)) } else { None };
        let k = if tail.is_none() { 1 } else { rng.random_range(1..=3) };
        arrows.push(Arrow {
            id: format!("a{a}"),
            tail,
            head,
            values: values(k),
            dims: vec![1; k],
            index: Vec::new(),
            coords: vec![Vec::new(); k],
        });
    }
    let base = IndexedGraph { nodes, arrows };
    let routes = (0..n)
        .map(|v| {
            let ins = base.in_arrows(v);
            let outs = base.out_arrows(v);
            let slots = |xs: &[usize]| xs.iter().map(|&a| base.arrows[a].values.clone()).collect();
            let rel = random_branched(&mut rng, slots(&ins), slots(&outs));
            Route::new(ins, outs, rel)
        })
        .collect();
    RoutedGraph::new(base, routes).unwrap()
}

fn project(k: &[u32], arrows: &[usize]) -> Tuple {
    arrows.iter().map(|&a| k[a]).collect()
}

/// Consistent assignments by the definition: every node's route relates its
/// input values to its output values. Full Cartesian enumeration.
pub fn possval(g: &RoutedGraph) -> BTreeSet<Tuple> {
    let slots: Vec<ValueSet> = g.arrows().iter().map(|a| a.values.clone()).collect();
    all_tuples(&slots)
        .into_iter()
        .filter(|k| {
            (0..g.nodes().len()).all(|n| {
                let r = g.route(n);
                r.rel.pairs().contains(&(project(k, &r.inputs), project(k, &r.outputs)))
            })
        })
        .collect()
}

/// Branches of a branched relation as (inputs, outputs) classes grouped by
/// image, ordered by smallest input.
pub fn branches(rel: &Relation) -> Vec<(BTreeSet<Tuple>, BTreeSet<Tuple>)> {
    let mut img: BTreeMap<Tuple, BTreeSet<Tuple>> = BTreeMap::new();
    for (a, b) in rel.pairs() {
        img.entry(a.clone()).or_default().insert(b.clone());
    }
    let mut by: BTreeMap<BTreeSet<Tuple>, BTreeSet<Tuple>> = BTreeMap::new();
    for (a, outs) in img {
        by.entry(outs).or_default().insert(a);
    }
    let mut v: Vec<_> = by.into_iter().map(|(o, i)| (i, o)).collect();
    v.sort_by(|a, b| a.0.first().cmp(&b.0.first()));
    v
}

/// Per-node branch of `k`'s input tuple, if practical.
fn branch_in(bs: &[(BTreeSet<Tuple>, BTreeSet<Tuple>)], t: &Tuple) -> Option<usize> {
    bs.iter().position(|b| b.0.contains(t))
}

fn branch_out(bs: &[(BTreeSet<Tuple>, BTreeSet<Tuple>)], t: &Tuple) -> Option<usize> {
    bs.iter().position(|b| b.1.contains(t))
}

/// Two-condition characterization: inputs and outputs practical, and in the same branch.
pub fn possval_by_branches(g: &RoutedGraph) -> BTreeSet<Tuple> {
    let bs: Vec<_> = (0..g.nodes().len()).map(|n| branches(&g.route(n).rel)).collect();
    let slots: Vec<ValueSet> = g.arrows().iter().map(|a| a.values.clone()).collect();
    all_tuples(&slots)
        .into_iter()
        .filter(|k| {
            (0..g.nodes().len()).all(|n| {
                let r = g.route(n);
                let i = branch_in(&bs[n], &project(k, &r.inputs));
                let o = branch_out(&bs[n], &project(k, &r.outputs));
                i.is_some() && i == o
            })
        })
        .collect()
}

/// Brute-force view of the section map: for every choice of one output per
/// branch, the node-output tuples of consistent assignments that follow it.
pub struct SectionMap {
    /// (node, branch) per slot.
    pub slots: Vec<(usize, usize)>,
    pub sizes: Vec<usize>,
    /// Output list per slot, sorted.
    pub outs: Vec<Vec<Tuple>>,
    /// Per choice tuple: the happening-branch tuples and the node-output tuples reached.
    pub happens: Vec<BTreeSet<Vec<usize>>>,
    pub images: Vec<BTreeSet<Vec<Tuple>>>,
    pub choices: Vec<Vec<usize>>,
}

pub const MAX_ORACLE_CHOICES: usize = 1 << 14;

pub fn section_map(g: &RoutedGraph) -> Option<SectionMap> {
    let n = g.nodes().len();
    let bs: Vec<_> = (0..n).map(|v| branches(&g.route(v).rel)).collect();
    let mut slots = Vec::new();
    let mut outs = Vec::new();
    for (v, b) in bs.iter().enumerate() {
        for (i, (_, o)) in b.iter().enumerate() {
            slots.push((v, i));
            outs.push(o.iter().cloned().collect::<Vec<_>>());
        }
    }
    let sizes: Vec<usize> = outs.iter().map(Vec::len).collect();
    if sizes.iter().product::<usize>() > MAX_ORACLE_CHOICES {
        return None;
    }
    let choices = mixed_radix(&sizes);
    let poss = possval(g);
    let mut happens = Vec::with_capacity(choices.len());
    let mut images = Vec::with_capacity(choices.len());
    for c in &choices {
        let mut h = BTreeSet::new();
        let mut im = BTreeSet::new();
        for k in &poss {
            let mu: Vec<usize> =
                (0..n).map(|v| branch_in(&bs[v], &project(k, &g.route(v).inputs)).unwrap()).collect();
            let follows = (0..n).all(|v| {
                let s = slots.iter().position(|&x| x == (v, mu[v])).unwrap();
                outs[s][c[s]] == project(k, &g.route(v).outputs)
            });
            if follows {
                h.insert(mu);
                im.insert((0..n).map(|v| project(k, &g.route(v).outputs)).collect());
            }
        }
        happens.push(h);
        images.push(im);
    }
    Some(SectionMap { slots, sizes, outs, happens, images, choices })
}

impl SectionMap {
    /// Every choice tuple leads to exactly one set of happening branches.
    pub fn univocal(&self) -> bool {
        self.happens.iter().all(|h| h.len() == 1)
    }

    /// Choice tuples that pin every branch reached by `target` to its output there.
    pub fn predicted_preimage(&self, target: &[Tuple]) -> Option<BTreeSet<usize>> {
        let mut pinned = BTreeMap::new();
        for (v, kv) in target.iter().enumerate() {
            let s = (0..self.slots.len()).find(|&s| self.slots[s].0 == v && self.outs[s].contains(kv))?;
            pinned.insert(s, self.outs[s].iter().position(|o| o == kv).unwrap());
        }
        Some((0..self.choices.len()).filter(|&c| pinned.iter().all(|(&s, &x)| self.choices[c][s] == x)).collect())
    }

    pub fn preimage(&self, target: &[Tuple]) -> BTreeSet<usize> {
        (0..self.choices.len()).filter(|&c| self.images[c].iter().any(|t| t == target)).collect()
    }
}

pub fn mixed_radix(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &s in sizes {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..s).map(move |v| {
                    let mut t2 = t.clone();
                    t2.push(v);
                    t2
                })
            })
            .collect();
    }
    out
}

/// Node-output tuples of every joint arrow tuple.
pub fn node_outputs(g: &RoutedGraph, k: &[u32]) -> Vec<Tuple> {
    (0..g.nodes().len()).map(|v| project(k, &g.route(v).outputs)).collect()
}

/// Weak-loops verdict from explicit simple cycles: fails iff some simple cycle
/// uses a solid edge, or a cycle with a green edge and a cycle with a red edge
/// lie in a common strongly connected region (so one closed walk mixes them).
pub fn weak_loops_by_cycles(bg: &BranchGraph) -> bool {
    let n = bg.len();
    let edges: Vec<Edge> = bg.edges.iter().copied().collect();
    let mut reach = vec![vec![false; n]; n];
    for e in &edges {
        reach[e.from][e.to] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    let cycles = simple_cycles(n, &edges);
    let kinds = |c: &Vec<Edge>, k: EdgeKind| c.iter().any(|e| e.kind == k);
    if cycles.iter().any(|c| kinds(c, EdgeKind::Solid)) {
        return false;
    }
    for c1 in cycles.iter().filter(|c| kinds(c, EdgeKind::Green)) {
        for c2 in cycles.iter().filter(|c| kinds(c, EdgeKind::Red)) {
            let (u, v) = (c1[0].from, c2[0].from);
            if u == v || (reach[u][v] && reach[v][u]) {
                return false;
            }
        }
    }
    true
}

/// Every simple cycle as its edge list, each found once from its smallest vertex.
pub fn simple_cycles(n: usize, edges: &[Edge]) -> Vec<Vec<Edge>> {
    let mut out = Vec::new();
    for s in 0..n {
        let mut path = Vec::new();
        let mut on = vec![false; n];
        on[s] = true;
        walk(s, s, edges, &mut on, &mut path, &mut out);
    }
    out
}

fn walk(s: usize, at: usize, edges: &[Edge], on: &mut [bool], path: &mut Vec<Edge>, out: &mut Vec<Vec<Edge>>) {
    for e in edges.iter().filter(|e| e.from == at) {
        if e.to == s {
            let mut c = path.clone();
            c.push(*e);
            out.push(c);
        } else if e.to > s && !on[e.to] {
            on[e.to] = true;
            path.push(*e);
            walk(s, e.to, edges, on, path, out);
            path.pop();
            on[e.to] = false;
        }
    }
}

pub fn branch_graph(n: usize, edges: &[(usize, usize, EdgeKind)]) -> BranchGraph {
    BranchGraph::new(
        (0..n).map(|i| format!("v{i}")).collect(),
        edges.iter().map(|&(from, to, kind)| Edge { from, to, kind }),
    )
}
