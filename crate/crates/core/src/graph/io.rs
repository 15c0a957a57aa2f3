//! JSON file format for routed graphs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::global::routes_from_global;
use super::{Arrow, GlobalConstraint, GraphError, GraphResult, IndexedGraph, Node, Route, RoutedGraph};
use crate::rel::{Relation, ValueSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub nodes: Vec<NodeFile>,
    pub arrows: Vec<ArrowFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub routes: Option<BTreeMap<String, RouteFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global_constraint: Option<GlobalConstraint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeFile {
    Id(String),
    Full {
        id: String,
        #[serde(default)]
        party: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IndexNames {
    One(String),
    Many(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrowFile {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub head: Option<String>,
    pub values: Vec<ValueFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<IndexNames>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValueFile {
    pub name: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouteFile {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub pairs: Vec<(Vec<String>, Vec<String>)>,
}

impl GraphFile {
    pub fn parse(text: &str) -> GraphResult<Self> {
        serde_json::from_str(text).map_err(|e| GraphError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph files serialize")
    }

    fn indexed(&self) -> GraphResult<IndexedGraph> {
        let nodes: Vec<Node> = self
            .nodes
            .iter()
            .map(|n| match n {
                NodeFile::Id(id) => Node { id: id.clone(), party: false },
                NodeFile::Full { id, party } => Node { id: id.clone(), party: *party },
            })
            .collect();
        let find = |id: &str| {
            nodes
                .iter()
                .position(|n| n.id == id)
                .ok_or_else(|| GraphError::UnknownNode(id.to_string()))
        };
        let mut arrows = Vec::with_capacity(self.arrows.len());
        for a in &self.arrows {
            let bad = |msg: String| GraphError::BadArrow { arrow: a.id.clone(), msg };
            let values = ValueSet::new(a.values.iter().map(|v| v.name.clone())).map_err(|e| bad(e.to_string()))?;
            let index: Vec<String> = match &a.index {
                None => Vec::new(),
                Some(IndexNames::One(s)) => vec![s.clone()],
                Some(IndexNames::Many(v)) => v.clone(),
            };
            let mut coords = Vec::with_capacity(a.values.len());
            for v in &a.values {
                let c = match (&v.coords, index.len()) {
                    (Some(c), _) => c.clone(),
                    (None, 0) => Vec::new(),
                    (None, 1) => vec![v.name.clone()],
                    (None, _) => return Err(bad(format!("value `{}` needs coords", v.name))),
                };
                if c.len() != index.len() {
                    return Err(bad(format!("value `{}` has {} coords for {} indices", v.name, c.len(), index.len())));
                }
                coords.push(c);
            }
            arrows.push(Arrow {
                id: a.id.clone(),
                tail: a.tail.as_deref().map(find).transpose()?,
                head: a.head.as_deref().map(find).transpose()?,
                values,
                dims: a.values.iter().map(|v| v.dim).collect(),
                index,
                coords,
            });
        }
        Ok(IndexedGraph { nodes, arrows })
    }

    /// Builds the routed graph without enforcing the structural rules.
    pub fn to_graph(&self) -> GraphResult<RoutedGraph> {
        let base = self.indexed()?;
        match (&self.routes, &self.global_constraint) {
            (Some(_), Some(_)) => Err(GraphError::Parse(
                "give either `routes` or `global_constraint`, not both".into(),
            )),
            (None, None) => Err(GraphError::Parse("missing `routes` or `global_constraint`".into())),
            (None, Some(gc)) => routes_from_global(base, gc),
            (Some(rs), None) => {
                for k in rs.keys() {
                    if base.node_index(k).is_none() {
                        return Err(GraphError::UnknownNode(k.clone()));
                    }
                }
                let mut routes = Vec::with_capacity(base.nodes.len());
                for n in &base.nodes {
                    let rf = rs
                        .get(&n.id)
                        .ok_or_else(|| GraphError::Parse(format!("no route for node `{}`", n.id)))?;
                    routes.push(route_from_file(&base, &n.id, rf)?);
                }
                RoutedGraph::new(base, routes)
            }
        }
    }

    pub fn from_graph(g: &RoutedGraph) -> Self {
        let b = &g.base;
        let nodes = b
            .nodes
            .iter()
            .map(|n| if n.party { NodeFile::Full { id: n.id.clone(), party: true } } else { NodeFile::Id(n.id.clone()) })
            .collect();
        let arrows = b
            .arrows
            .iter()
            .map(|a| {
                let multi = a.index.len() > 1;
                ArrowFile {
                    id: a.id.clone(),
                    tail: a.tail.map(|t| b.nodes[t].id.clone()),
                    head: a.head.map(|h| b.nodes[h].id.clone()),
                    values: a
                        .values
                        .labels()
                        .iter()
                        .enumerate()
                        .map(|(v, name)| ValueFile {
                            name: name.clone(),
                            dim: a.dims[v],
                            coords: (multi || (a.index.len() == 1 && a.coords[v][0] != *name))
                                .then(|| a.coords[v].clone()),
                        })
                        .collect(),
                    index: match a.index.len() {
                        0 => None,
                        1 => Some(IndexNames::One(a.index[0].clone())),
                        _ => Some(IndexNames::Many(a.index.clone())),
                    },
                }
            })
            .collect();
        let routes = b
            .nodes
            .iter()
            .zip(&g.routes)
            .map(|(n, r)| {
                let names = |xs: &[usize]| xs.iter().map(|&a| b.arrows[a].id.clone()).collect();
                let labels = |slots: &[ValueSet], t: &[u32]| {
                    t.iter().zip(slots).map(|(&v, vs)| vs.label(v).to_string()).collect()
                };
                let pairs = r
                    .rel
                    .pairs()
                    .iter()
                    .map(|(i, o)| (labels(r.rel.domain(), i), labels(r.rel.codomain(), o)))
                    .collect();
                (n.id.clone(), RouteFile { inputs: names(&r.inputs), outputs: names(&r.outputs), pairs })
            })
            .collect();
        GraphFile { nodes, arrows, routes: Some(routes), global_constraint: None }
    }
}

fn route_from_file(base: &IndexedGraph, node: &str, rf: &RouteFile) -> GraphResult<Route> {
    let arrows = |ids: &[String]| -> GraphResult<Vec<usize>> {
        ids.iter()
            .map(|id| base.arrow_index(id).ok_or_else(|| GraphError::UnknownArrow(id.clone())))
            .collect()
    };
    let inputs = arrows(&rf.inputs)?;
    let outputs = arrows(&rf.outputs)?;
    let dom: Vec<ValueSet> = inputs.iter().map(|&a| base.arrows[a].values.clone()).collect();
    let cod: Vec<ValueSet> = outputs.iter().map(|&a| base.arrows[a].values.clone()).collect();
    let pairs: Vec<(Vec<&str>, Vec<&str>)> = rf
        .pairs
        .iter()
        .map(|(a, b)| (a.iter().map(String::as_str).collect(), b.iter().map(String::as_str).collect()))
        .collect();
    let rel = Relation::from_labels(dom, cod, &pairs)
        .map_err(|e| GraphError::Route { node: node.to_string(), source: e })?;
    Ok(Route::new(inputs, outputs, rel))
}

/// Parses a graph file and builds the routed graph (structural rules unchecked).
pub fn parse_graph(text: &str) -> GraphResult<RoutedGraph> {
    GraphFile::parse(text)?.to_graph()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn catalog_round_trips() {
        for e in catalog::all() {
            let text = GraphFile::from_graph(&e.graph).to_json();
            let back = parse_graph(&text).unwrap();
            assert_eq!(back, e.graph, "{}", e.id);
        }
    }

    #[test]
    fn reads_global_constraint_form() {
        let text = r#"{
            "nodes": ["N", "M"],
            "arrows": [
                {"id": "a", "tail": "N", "head": "M", "values": [{"name": "0", "dim": 1}, {"name": "1", "dim": 1}], "index": "x"},
                {"id": "b", "tail": "M", "head": "N", "values": [{"name": "0", "dim": 1}, {"name": "1", "dim": 1}], "index": "y"}
            ],
            "global_constraint": {"predicates": [{"type": "match", "indices": ["x", "y"]}]}
        }"#;
        let g = parse_graph(text).unwrap();
        assert_eq!(g.routes[0].rel.len(), 2);
        assert_eq!(g.consistent_assignments().len(), 2);
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = parse_graph("{\n \"nodes\": [\"A\"],\n \"arrows\": 3 }").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = parse_graph(r#"{"nodes": ["A"], "arrows": [{"id": "a", "tail": "Z", "values": [{"name": "x", "dim": 1}]}], "routes": {}}"#)
            .unwrap_err();
        assert!(matches!(err, GraphError::UnknownNode(_)));
    }
}
