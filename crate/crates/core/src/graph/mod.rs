//! Routed graphs: indexed multigraphs with sector dimensions and one route per node.

mod global;
mod io;

pub use global::{routes_from_global, GlobalConstraint, Predicate, Target};
pub use io::{parse_graph, ArrowFile, GraphFile, IndexNames, NodeFile, RouteFile, ValueFile};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::rel::{BranchedRoute, RelError, Relation, Tuple, ValueSet};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("unknown arrow `{0}`")]
    UnknownArrow(String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("arrow `{arrow}`: {msg}")]
    BadArrow { arrow: String, msg: String },
    #[error("route at `{node}`: {source}")]
    Route { node: String, source: RelError },
    #[error("route at `{node}` is not branched after marginalization: inputs {a} and {b} overlap")]
    NotBranchedAfterMarginalization { node: String, a: String, b: String },
    #[error("arrow `{0}` is a self-loop carrying a shared index")]
    SelfLoopWithSharedIndex(String),
    #[error("global constraint: {0}")]
    Constraint(String),
    #[error("assignment is not consistent at node `{0}`")]
    Inconsistent(String),
    #[error("structural violations: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type GraphResult<T> = Result<T, GraphError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagCode {
    ExternalNotSingleton,
    ZeroDimension,
    RouteArity,
    NotBranched,
    ZeroBranches,
    DanglingArrow,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub location: String,
    pub code: DiagCode,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: String,
    /// Marks a slot for an agent's operation when building process matrices.
    pub party: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrow {
    pub id: String,
    pub tail: Option<usize>,
    pub head: Option<usize>,
    pub values: ValueSet,
    pub dims: Vec<usize>,
    /// Names of the global indices this arrow carries (empty if unindexed).
    pub index: Vec<String>,
    /// Per value, its coordinates along `index`.
    pub coords: Vec<Vec<String>>,
}

impl Arrow {
    pub fn is_external(&self) -> bool {
        self.tail.is_none() || self.head.is_none()
    }

    pub fn dim(&self, v: u32) -> usize {
        self.dims[v as usize]
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexedGraph {
    pub nodes: Vec<Node>,
    pub arrows: Vec<Arrow>,
}

impl IndexedGraph {
    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn arrow_index(&self, id: &str) -> Option<usize> {
        self.arrows.iter().position(|a| a.id == id)
    }

    /// Incoming arrows of `n` in declaration order.
    pub fn in_arrows(&self, n: usize) -> Vec<usize> {
        (0..self.arrows.len()).filter(|&a| self.arrows[a].head == Some(n)).collect()
    }

    pub fn out_arrows(&self, n: usize) -> Vec<usize> {
        (0..self.arrows.len()).filter(|&a| self.arrows[a].tail == Some(n)).collect()
    }

    pub fn external_inputs(&self) -> Vec<usize> {
        (0..self.arrows.len()).filter(|&a| self.arrows[a].tail.is_none()).collect()
    }

    pub fn external_outputs(&self) -> Vec<usize> {
        (0..self.arrows.len()).filter(|&a| self.arrows[a].head.is_none()).collect()
    }

    /// Arrows from node `n` to node `m` (including self-loops when `n == m`).
    pub fn links(&self, n: usize, m: usize) -> Vec<usize> {
        (0..self.arrows.len())
            .filter(|&a| self.arrows[a].tail == Some(n) && self.arrows[a].head == Some(m))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route {
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
    pub rel: Relation,
    pub branched: Option<BranchedRoute>,
}

impl Route {
    pub fn new(inputs: Vec<usize>, outputs: Vec<usize>, rel: Relation) -> Self {
        let branched = BranchedRoute::decompose(rel.clone()).ok();
        Self { inputs, outputs, rel, branched }
    }

    /// Branch structure; panics on an unbranched route (rejected by validation).
    pub fn br(&self) -> &BranchedRoute {
        self.branched.as_ref().expect("route is branched")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutedGraph {
    pub base: IndexedGraph,
    pub routes: Vec<Route>,
}

/// One value per arrow, as positions into each arrow's value set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment(pub Vec<u32>);

impl Assignment {
    pub fn to_map(&self, g: &IndexedGraph) -> BTreeMap<String, String> {
        g.arrows
            .iter()
            .zip(&self.0)
            .map(|(a, &v)| (a.id.clone(), a.values.label(v).to_string()))
            .collect()
    }

    pub fn project(&self, arrows: &[usize]) -> Tuple {
        arrows.iter().map(|&a| self.0[a]).collect()
    }
}

/// A branch vertex: node position plus branch position within that node's route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BranchRef {
    pub node: usize,
    pub branch: usize,
}

impl RoutedGraph {
    /// Checks referential integrity and tuple shapes; semantic rules are left to
    /// [`RoutedGraph::validate_structure`].
    pub fn new(base: IndexedGraph, routes: Vec<Route>) -> GraphResult<Self> {
        let mut seen = BTreeSet::new();
        for id in base.nodes.iter().map(|n| &n.id).chain(base.arrows.iter().map(|a| &a.id)) {
            if !seen.insert(id.clone()) {
                return Err(GraphError::DuplicateId(id.clone()));
            }
        }
        for a in &base.arrows {
            for end in [a.tail, a.head].into_iter().flatten() {
                if end >= base.nodes.len() {
                    return Err(GraphError::UnknownNode(format!("#{end}")));
                }
            }
            if a.dims.len() != a.values.len() {
                return Err(GraphError::BadArrow { arrow: a.id.clone(), msg: "one dim per value".into() });
            }
        }
        if routes.len() != base.nodes.len() {
            return Err(GraphError::Parse("one route per node is required".into()));
        }
        for (n, r) in routes.iter().enumerate() {
            let node = base.nodes[n].id.clone();
            let dom: Vec<ValueSet> = r.inputs.iter().map(|&a| base.arrows[a].values.clone()).collect();
            let cod: Vec<ValueSet> = r.outputs.iter().map(|&a| base.arrows[a].values.clone()).collect();
            if r.rel.domain() != dom.as_slice() || r.rel.codomain() != cod.as_slice() {
                return Err(GraphError::Route {
                    node,
                    source: RelError::ArityMismatch("route slots differ from its arrows' value sets".into()),
                });
            }
        }
        Ok(Self { base, routes })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.base.nodes
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.base.arrows
    }

    pub fn route(&self, n: usize) -> &Route {
        &self.routes[n]
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.base.node_index(id)
    }

    pub fn validate_structure(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let g = &self.base;
        for a in &g.arrows {
            if a.tail.is_none() && a.head.is_none() {
                out.push(Diagnostic {
                    location: format!("arrow {}", a.id),
                    code: DiagCode::DanglingArrow,
                    message: "arrow has neither tail nor head".into(),
                });
            }
            if a.is_external() && a.values.len() != 1 {
                out.push(Diagnostic {
                    location: format!("arrow {}", a.id),
                    code: DiagCode::ExternalNotSingleton,
                    message: "external arrow must be singleton".into(),
                });
            }
            for (v, &d) in a.dims.iter().enumerate() {
                if d == 0 {
                    out.push(Diagnostic {
                        location: format!("arrow {} value {}", a.id, a.values.label(v as u32)),
                        code: DiagCode::ZeroDimension,
                        message: "dimension must be at least 1".into(),
                    });
                }
            }
        }
        for (n, r) in self.routes.iter().enumerate() {
            let loc = format!("node {}", g.nodes[n].id);
            let same = |xs: &[usize], ys: Vec<usize>| {
                let a: BTreeSet<usize> = xs.iter().copied().collect();
                xs.len() == ys.len() && a == ys.into_iter().collect()
            };
            if !same(&r.inputs, g.in_arrows(n)) || !same(&r.outputs, g.out_arrows(n)) {
                out.push(Diagnostic {
                    location: loc.clone(),
                    code: DiagCode::RouteArity,
                    message: "route arrows do not match the node's incident arrows".into(),
                });
            }
            match &r.branched {
                None => {
                    let (a, b) = r.rel.branching_violation().unwrap_or_default();
                    out.push(Diagnostic {
                        location: loc,
                        code: DiagCode::NotBranched,
                        message: format!(
                            "route is not branched: inputs ({}) and ({}) partially share outputs",
                            Relation::fmt_tuple(r.rel.domain(), &a),
                            Relation::fmt_tuple(r.rel.domain(), &b)
                        ),
                    });
                }
                Some(b) if b.branches().is_empty() => out.push(Diagnostic {
                    location: loc,
                    code: DiagCode::ZeroBranches,
                    message: "route has no branches".into(),
                }),
                Some(_) => {}
            }
        }
        out
    }

    /// Fails with [`GraphError::Invalid`] if any structural rule is broken.
    pub fn checked(self) -> GraphResult<Self> {
        let d = self.validate_structure();
        if d.is_empty() {
            Ok(self)
        } else {
            Err(GraphError::Invalid(d))
        }
    }

    fn node_ok(&self, n: usize, vals: &[u32]) -> bool {
        let r = &self.routes[n];
        let a: Tuple = r.inputs.iter().map(|&x| vals[x]).collect();
        let b: Tuple = r.outputs.iter().map(|&x| vals[x]).collect();
        r.rel.contains(&a, &b)
    }

    /// All assignments compatible with every route, sorted.
    pub fn consistent_assignments(&self) -> Vec<Assignment> {
        let g = &self.base;
        let mut order: Vec<usize> = Vec::new();
        let mut placed = vec![false; g.arrows.len()];
        for n in 0..g.nodes.len() {
            for a in g.in_arrows(n).into_iter().chain(g.out_arrows(n)) {
                if !placed[a] {
                    placed[a] = true;
                    order.push(a);
                }
            }
        }
        for a in 0..g.arrows.len() {
            if !placed[a] {
                order.push(a);
            }
        }
        let pos: Vec<usize> = {
            let mut p = vec![0; g.arrows.len()];
            for (i, &a) in order.iter().enumerate() {
                p[a] = i;
            }
            p
        };
        // checks[d] = nodes whose arrows are all assigned once depth d is filled.
        let mut checks: Vec<Vec<usize>> = vec![Vec::new(); order.len() + 1];
        for n in 0..g.nodes.len() {
            let r = &self.routes[n];
            let depth = r.inputs.iter().chain(&r.outputs).map(|&a| pos[a] + 1).max().unwrap_or(0);
            checks[depth].push(n);
        }
        let mut vals = vec![0u32; g.arrows.len()];
        let mut out = Vec::new();
        if checks[0].iter().all(|&n| self.node_ok(n, &vals)) {
            self.dfs(&order, &checks, 0, &mut vals, &mut out);
        }
        out.sort();
        out
    }

    fn dfs(&self, order: &[usize], checks: &[Vec<usize>], d: usize, vals: &mut Vec<u32>, out: &mut Vec<Assignment>) {
        if d == order.len() {
            out.push(Assignment(vals.clone()));
            return;
        }
        let a = order[d];
        for v in 0..self.base.arrows[a].values.len() as u32 {
            vals[a] = v;
            if checks[d + 1].iter().all(|&n| self.node_ok(n, vals)) {
                self.dfs(order, checks, d + 1, vals, out);
            }
        }
        vals[a] = 0;
    }

    /// The branch of node `n` realised by a consistent assignment.
    pub fn branch_of(&self, a: &Assignment, n: usize) -> GraphResult<usize> {
        let r = &self.routes[n];
        let br = r.br();
        let i = br.branch_of_input(&a.project(&r.inputs));
        let o = br.branch_of_output(&a.project(&r.outputs));
        match (i, o) {
            (Some(x), Some(y)) if x == y && self.node_ok(n, &a.0) => Ok(x),
            _ => Err(GraphError::Inconsistent(self.base.nodes[n].id.clone())),
        }
    }

    /// Branch per node for a consistent assignment.
    pub fn branches_of(&self, a: &Assignment) -> GraphResult<Vec<usize>> {
        (0..self.base.nodes.len()).map(|n| self.branch_of(a, n)).collect()
    }

    pub fn branch_refs(&self) -> Vec<BranchRef> {
        let mut v = Vec::new();
        for n in 0..self.base.nodes.len() {
            for b in 0..self.routes[n].br().branches().len() {
                v.push(BranchRef { node: n, branch: b });
            }
        }
        v
    }

    /// `Node` for single-branch nodes, `Node^label` otherwise, where the label is
    /// the branch id's values on non-singleton slots (collapsed to one if all agree).
    pub fn branch_name(&self, b: BranchRef) -> String {
        let node = &self.base.nodes[b.node].id;
        let r = &self.routes[b.node];
        let br = r.br();
        if br.branches().len() == 1 {
            return node.clone();
        }
        let id = &br.branches()[b.branch].id;
        let labels: Vec<&str> = id
            .iter()
            .zip(r.rel.domain())
            .filter(|(_, vs)| vs.len() > 1)
            .map(|(&v, vs)| vs.label(v))
            .collect();
        let label = if !labels.is_empty() && labels.iter().all(|l| *l == labels[0]) {
            labels[0].to_string()
        } else {
            labels.join(",")
        };
        format!("{node}^{label}")
    }

    pub fn adjoint_graph(&self) -> RoutedGraph {
        let mut base = self.base.clone();
        for a in &mut base.arrows {
            std::mem::swap(&mut a.tail, &mut a.head);
        }
        let routes = self
            .routes
            .iter()
            .map(|r| Route {
                inputs: r.outputs.clone(),
                outputs: r.inputs.clone(),
                rel: r.rel.adjoint(),
                branched: r.branched.as_ref().map(BranchedRoute::adjoint),
            })
            .collect();
        RoutedGraph { base, routes }
    }

    /// Ordered (external inputs, external outputs) pairs realised by some
    /// consistent assignment: the route of the whole skeletal circuit.
    pub fn composed_route(&self) -> Relation {
        let ins = self.base.external_inputs();
        let outs = self.base.external_outputs();
        let dom = ins.iter().map(|&a| self.base.arrows[a].values.clone()).collect();
        let cod = outs.iter().map(|&a| self.base.arrows[a].values.clone()).collect();
        let pairs: Vec<(Tuple, Tuple)> = self
            .consistent_assignments()
            .iter()
            .map(|k| (k.project(&ins), k.project(&outs)))
            .collect();
        Relation::new(dom, cod, pairs).expect("projected tuples are well-formed")
    }
}
