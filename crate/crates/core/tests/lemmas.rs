//! Brute-force oracles for consistent assignments, the section map and its
//! preimages, on the catalog and on random small routed graphs.

mod common;

use std::collections::BTreeSet;

use common::{node_outputs, possval, possval_by_branches, random_graph, section_map};
use routact::catalog;
use routact::graph::RoutedGraph;
use routact::rel::{all_tuples, Tuple, ValueSet};
use routact::validity::{check_univocality, ChoiceRelation};

const RANDOM_GRAPHS: u64 = 200;

fn graphs() -> Vec<(String, RoutedGraph)> {
    let mut v: Vec<_> = catalog::all().into_iter().map(|e| (e.id, e.graph)).collect();
    v.push(("erasing-chain".into(), catalog::fixtures::erasing_chain()));
    v.extend((0..RANDOM_GRAPHS).map(|s| (format!("random#{s}"), random_graph(s))));
    v
}

/// Joint tuples small enough for full Cartesian enumeration.
fn small(g: &RoutedGraph) -> bool {
    g.arrows().iter().map(|a| a.values.len() as f64).product::<f64>() <= (1u64 << 16) as f64
}

#[test]
fn consistent_assignments_match_definition_and_characterization() {
    let mut checked = 0;
    for (id, g) in graphs().into_iter().filter(|(_, g)| small(g)) {
        let lib: BTreeSet<Tuple> = g.consistent_assignments().into_iter().map(|a| a.0).collect();
        let def = possval(&g);
        assert_eq!(lib, def, "{id}: enumeration differs from the definition");
        assert_eq!(possval_by_branches(&g), def, "{id}: characterization differs");
        // The realised branch contains both the input and output tuples.
        for k in g.consistent_assignments() {
            for n in 0..g.nodes().len() {
                let b = g.branch_of(&k, n).unwrap();
                let r = g.route(n);
                let br = &r.br().branches()[b];
                assert!(br.inputs.contains(&k.project(&r.inputs)), "{id}");
                assert!(br.outputs.contains(&k.project(&r.outputs)), "{id}");
            }
        }
        checked += 1;
    }
    assert!(checked >= RANDOM_GRAPHS as usize);
}

#[test]
fn adjoint_keeps_consistent_assignments() {
    for (id, g) in graphs() {
        assert_eq!(g.consistent_assignments(), g.adjoint_graph().consistent_assignments(), "{id}");
    }
}

#[test]
fn section_map_is_a_function_with_predicted_preimages() {
    let (mut univocal, mut total) = (0, 0);
    for (id, g) in graphs().into_iter().filter(|(_, g)| small(g)) {
        let Some(s) = section_map(&g) else { continue };
        total += 1;
        let lib_univocal = check_univocality(&g).unwrap().is_ok();
        assert_eq!(s.univocal(), lib_univocal, "{id}: univocality oracle disagrees");
        if !s.univocal() {
            continue;
        }
        univocal += 1;
        for (c, im) in s.images.iter().enumerate() {
            assert_eq!(im.len(), 1, "{id}: choice {:?} has {} images", s.choices[c], im.len());
        }
        let reached: BTreeSet<&Vec<Tuple>> = s.images.iter().flatten().collect();
        for target in reached {
            let pre = s.preimage(target);
            assert_eq!(Some(pre), s.predicted_preimage(target), "{id}: preimage of {target:?}");
        }
    }
    assert!(univocal >= 20, "only {univocal} of {total} sampled graphs were univocal");
}

#[test]
fn empty_preimage_iff_not_consistent() {
    for (id, g) in graphs().into_iter().filter(|(_, g)| small(g)) {
        let Some(s) = section_map(&g) else { continue };
        if !s.univocal() {
            continue;
        }
        let poss = possval(&g);
        let slots: Vec<ValueSet> = g.arrows().iter().map(|a| a.values.clone()).collect();
        for k in all_tuples(&slots) {
            let empty = s.preimage(&node_outputs(&g, &k)).is_empty();
            assert_eq!(empty, !poss.contains(&k), "{id}: {k:?}");
        }
    }
}

#[test]
fn library_choice_relation_matches_oracle() {
    for (id, g) in graphs().into_iter().filter(|(_, g)| small(g)) {
        let Some(s) = section_map(&g) else { continue };
        let cr = ChoiceRelation::compute(&g).unwrap();
        assert_eq!(cr.len(), s.choices.len(), "{id}");
        // Both enumerate choice tuples in mixed-radix order over (node, branch) slots.
        for idx in 0..cr.len() {
            let lib: BTreeSet<Vec<usize>> = cr
                .images(idx)
                .into_iter()
                .map(|h| {
                    (0..g.nodes().len())
                        .map(|n| cr.slots.iter().zip(&h).position(|(b, &on)| on && b.node == n).map_or(usize::MAX, |p| cr.slots[p].branch))
                        .collect()
                })
                .collect();
            assert_eq!(lib, s.happens[idx], "{id}: choice {idx}");
        }
    }
}
