//! Routes derived from a global Boolean constraint on named indices.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{GraphError, GraphResult, IndexedGraph, Route, RoutedGraph};
use crate::rel::{product, Relation, Tuple, ValueSet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Target {
    Const(i64),
    Index(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Predicate {
    /// All listed indices take the same value.
    Match { indices: Vec<String> },
    /// Sum of the listed indices equals the target.
    SumEq { indices: Vec<String>, equals: Target },
    /// Product of the listed indices equals the target.
    ProductEq { indices: Vec<String>, equals: Target },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlobalConstraint {
    /// Explicit list of allowed joint values.
    Allowed(Vec<BTreeMap<String, String>>),
    /// Conjunction of predicates.
    Predicates(Vec<Predicate>),
}

impl GlobalConstraint {
    pub fn everything() -> Self {
        GlobalConstraint::Predicates(Vec::new())
    }

    fn names(&self) -> BTreeSet<&str> {
        let mut s = BTreeSet::new();
        match self {
            GlobalConstraint::Allowed(maps) => {
                for m in maps {
                    s.extend(m.keys().map(String::as_str));
                }
            }
            GlobalConstraint::Predicates(ps) => {
                for p in ps {
                    let (idx, t) = match p {
                        Predicate::Match { indices } => (indices, None),
                        Predicate::SumEq { indices, equals } | Predicate::ProductEq { indices, equals } => {
                            (indices, Some(equals))
                        }
                    };
                    s.extend(idx.iter().map(String::as_str));
                    if let Some(Target::Index(n)) = t {
                        s.insert(n.as_str());
                    }
                }
            }
        }
        s
    }
}

fn int(label: &str) -> GraphResult<i64> {
    label
        .parse()
        .map_err(|_| GraphError::Constraint(format!("value `{label}` is not an integer")))
}

struct Env<'a> {
    names: &'a [String],
    domains: &'a [ValueSet],
    vals: &'a [u32],
}

impl Env<'_> {
    fn label(&self, name: &str) -> &str {
        let i = self.names.iter().position(|n| n == name).expect("name checked");
        self.domains[i].label(self.vals[i])
    }

    fn target(&self, t: &Target) -> GraphResult<i64> {
        match t {
            Target::Const(c) => Ok(*c),
            Target::Index(n) => int(self.label(n)),
        }
    }

    fn holds(&self, gc: &GlobalConstraint) -> GraphResult<bool> {
        match gc {
            GlobalConstraint::Allowed(maps) => Ok(maps.iter().any(|m| {
                self.names.iter().all(|n| m.get(n).is_some_and(|v| v == self.label(n)))
            })),
            GlobalConstraint::Predicates(ps) => {
                for p in ps {
                    let ok = match p {
                        Predicate::Match { indices } => {
                            indices.windows(2).all(|w| self.label(&w[0]) == self.label(&w[1]))
                        }
                        Predicate::SumEq { indices, equals } => {
                            let mut s = 0;
                            for i in indices {
                                s += int(self.label(i))?;
                            }
                            s == self.target(equals)?
                        }
                        Predicate::ProductEq { indices, equals } => {
                            let mut s = 1;
                            for i in indices {
                                s *= int(self.label(i))?;
                            }
                            s == self.target(equals)?
                        }
                    };
                    if !ok {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }
}

/// Named indices and their value sets, in order of first appearance.
pub(crate) fn index_domains(g: &IndexedGraph) -> GraphResult<(Vec<String>, Vec<ValueSet>)> {
    let mut names: Vec<String> = Vec::new();
    let mut labels: Vec<Vec<String>> = Vec::new();
    for a in &g.arrows {
        if a.coords.len() != a.values.len() || a.coords.iter().any(|c| c.len() != a.index.len()) {
            return Err(GraphError::BadArrow {
                arrow: a.id.clone(),
                msg: "each value needs one coordinate per index name".into(),
            });
        }
        for (k, name) in a.index.iter().enumerate() {
            let pos = match names.iter().position(|n| n == name) {
                Some(p) => p,
                None => {
                    names.push(name.clone());
                    labels.push(Vec::new());
                    names.len() - 1
                }
            };
            for c in &a.coords {
                if !labels[pos].contains(&c[k]) {
                    labels[pos].push(c[k].clone());
                }
            }
        }
    }
    let domains = labels.into_iter().map(|l| ValueSet::new(l).expect("non-empty")).collect();
    Ok((names, domains))
}

/// Marginalises `gc` onto every node, yielding the least restrictive routes
/// consistent with it.
pub fn routes_from_global(g: IndexedGraph, gc: &GlobalConstraint) -> GraphResult<RoutedGraph> {
    for a in &g.arrows {
        if a.tail.is_some() && a.tail == a.head && !a.index.is_empty() {
            return Err(GraphError::SelfLoopWithSharedIndex(a.id.clone()));
        }
    }
    let (names, domains) = index_domains(&g)?;
    for n in gc.names() {
        if !names.iter().any(|x| x == n) {
            return Err(GraphError::Constraint(format!("unknown index `{n}`")));
        }
    }
    let sizes: Vec<usize> = domains.iter().map(ValueSet::len).collect();
    let arrow_pos: Vec<Vec<usize>> = g
        .arrows
        .iter()
        .map(|a| a.index.iter().map(|n| names.iter().position(|x| x == n).unwrap()).collect())
        .collect();

    let mut joint: BTreeSet<Vec<u32>> = BTreeSet::new();
    for vals in product(&sizes) {
        let env = Env { names: &names, domains: &domains, vals: &vals };
        if !env.holds(gc)? {
            continue;
        }
        // Value choices per arrow: the matching coordinate, or anything if unindexed.
        let mut choices: Vec<Vec<u32>> = Vec::with_capacity(g.arrows.len());
        for (a, pos) in g.arrows.iter().zip(&arrow_pos) {
            if pos.is_empty() {
                choices.push((0..a.values.len() as u32).collect());
                continue;
            }
            let want: Vec<&str> = pos.iter().map(|&p| domains[p].label(vals[p])).collect();
            match a.coords.iter().position(|c| c.iter().map(String::as_str).eq(want.iter().copied())) {
                Some(v) => choices.push(vec![v as u32]),
                None => {
                    choices.clear();
                    break;
                }
            }
        }
        if choices.len() != g.arrows.len() {
            continue;
        }
        let sizes: Vec<usize> = choices.iter().map(Vec::len).collect();
        for pick in product(&sizes) {
            joint.insert(pick.iter().zip(&choices).map(|(&i, c)| c[i as usize]).collect());
        }
    }

    let mut routes = Vec::with_capacity(g.nodes.len());
    for n in 0..g.nodes.len() {
        let ins = g.in_arrows(n);
        let outs = g.out_arrows(n);
        let dom: Vec<ValueSet> = ins.iter().map(|&a| g.arrows[a].values.clone()).collect();
        let cod: Vec<ValueSet> = outs.iter().map(|&a| g.arrows[a].values.clone()).collect();
        let pairs: Vec<(Tuple, Tuple)> = joint
            .iter()
            .map(|k| (ins.iter().map(|&a| k[a]).collect(), outs.iter().map(|&a| k[a]).collect()))
            .collect();
        let rel = Relation::new(dom.clone(), cod, pairs)
            .map_err(|e| GraphError::Route { node: g.nodes[n].id.clone(), source: e })?;
        if let Some((a, b)) = rel.branching_violation() {
            return Err(GraphError::NotBranchedAfterMarginalization {
                node: g.nodes[n].id.clone(),
                a: Relation::fmt_tuple(&dom, &a),
                b: Relation::fmt_tuple(&dom, &b),
            });
        }
        routes.push(Route::new(ins, outs, rel));
    }
    RoutedGraph::new(g, routes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::graph::Arrow;

    fn arrow(id: &str, tail: Option<usize>, head: Option<usize>, index: &str) -> Arrow {
        let (values, coords, idx) = if index.is_empty() {
            (ValueSet::singleton("*"), vec![vec![]], vec![])
        } else {
            (ValueSet::binary(), vec![vec!["0".into()], vec!["1".into()]], vec![index.to_string()])
        };
        let dims = vec![1; values.len()];
        Arrow { id: id.into(), tail, head, values, dims, index: idx, coords }
    }

    fn node(id: &str) -> crate::graph::Node {
        crate::graph::Node { id: id.into(), party: false }
    }

    #[test]
    fn three_switch_past_route() {
        let g = catalog::three_switch(2).graph;
        let p = g.node_index("P").unwrap();
        let r = g.route(p);
        assert_eq!(r.rel.len(), 6);
        assert_eq!(r.br().branches().len(), 1);
        // Exactly one of the six indices is 1 in every output.
        for (_, out) in r.rel.pairs() {
            let ones: usize = out
                .iter()
                .zip(&r.outputs)
                .map(|(&v, &a)| {
                    let c = &g.arrows()[a].coords[v as usize];
                    c.iter().filter(|x| *x == "1").count()
                })
                .sum();
            assert_eq!(ones, 1);
        }
    }

    #[test]
    fn lugano_counting_station() {
        let g = catalog::lugano().graph;
        let x = g.node_index("X").unwrap();
        let r = g.route(x);
        assert_eq!(r.br().branches().len(), 4);
        let l = g.base.arrow_index("l").unwrap();
        let k2 = g.base.arrow_index("k2").unwrap();
        let j1 = g.base.arrow_index("j1").unwrap();
        for (a, b) in r.rel.pairs() {
            let get = |arrows: &[usize], t: &[u32], want: usize| {
                arrows.iter().position(|&q| q == want).map(|p| g.arrows()[want].values.label(t[p]).parse::<i64>().unwrap())
            };
            let kv = get(&r.inputs, a, k2).unwrap();
            let jv = get(&r.inputs, a, j1).unwrap();
            assert_eq!(get(&r.outputs, b, l).unwrap(), kv * jv);
        }
    }

    #[test]
    fn unconstrained_gives_full_routes() {
        let g = IndexedGraph {
            nodes: vec![node("N"), node("M")],
            arrows: vec![arrow("a", Some(0), Some(1), "x"), arrow("b", Some(1), Some(0), "y")],
        };
        let rg = routes_from_global(g, &GlobalConstraint::everything()).unwrap();
        for r in &rg.routes {
            assert_eq!(r.rel.len(), 4);
            assert_eq!(r.br().branches().len(), 1);
        }
    }

    #[test]
    fn rejects_shared_index_self_loop() {
        let g = IndexedGraph { nodes: vec![node("N")], arrows: vec![arrow("a", Some(0), Some(0), "x")] };
        assert!(matches!(
            routes_from_global(g, &GlobalConstraint::everything()),
            Err(GraphError::SelfLoopWithSharedIndex(_))
        ));
    }

    #[test]
    fn reports_unbranched_marginal() {
        let mut g = IndexedGraph {
            nodes: vec![node("N"), node("M")],
            arrows: vec![arrow("a", Some(0), Some(1), "x"), arrow("b", Some(1), Some(0), "y")],
        };
        g.arrows.push(arrow("c", Some(1), Some(0), "z"));
        // At M: input x, outputs (y, z). Allow x=0 -> (0,0),(0,1); x=1 -> (0,1),(1,1).
        let allowed = [("0", "0", "0"), ("0", "0", "1"), ("1", "0", "1"), ("1", "1", "1")]
            .iter()
            .map(|(x, y, z)| {
                BTreeMap::from([("x".to_string(), x.to_string()), ("y".into(), y.to_string()), ("z".into(), z.to_string())])
            })
            .collect();
        let err = routes_from_global(g, &GlobalConstraint::Allowed(allowed)).unwrap_err();
        assert!(matches!(err, GraphError::NotBranchedAfterMarginalization { .. }), "{err}");
    }

    #[test]
    fn remarginalising_is_no_less_restrictive() {
        for e in catalog::all() {
            let Some(gc) = e.global.clone() else { continue };
            let g = e.graph;
            let (names, _) = index_domains(&g.base).unwrap();
            let allowed: Vec<BTreeMap<String, String>> = g
                .consistent_assignments()
                .iter()
                .map(|k| {
                    let mut m = BTreeMap::new();
                    for (a, &v) in g.arrows().iter().zip(&k.0) {
                        for (name, c) in a.index.iter().zip(&a.coords[v as usize]) {
                            m.insert(name.clone(), c.clone());
                        }
                    }
                    m
                })
                .collect();
            assert!(allowed.iter().all(|m| m.len() == names.len()));
            let again = routes_from_global(g.base.clone(), &GlobalConstraint::Allowed(allowed)).unwrap();
            for (r0, r1) in g.routes.iter().zip(&again.routes) {
                assert!(r1.rel.pairs().is_subset(r0.rel.pairs()), "{}", e.id);
            }
            let _ = gc;
        }
    }
}
