//! Finite Boolean relations between tuples of labelled values.
//!
//! Tuples store value positions (`u32`) into the slot's [`ValueSet`]; labels
//! are only consulted for display and serialization.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Tuple = Vec<u32>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RelError {
    #[error("value set must be non-empty")]
    EmptyValueSet,
    #[error("duplicate value label `{0}`")]
    DuplicateLabel(String),
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("value {value} out of range for slot {slot} (size {size})")]
    OutOfRange { slot: usize, value: u32, size: usize },
    #[error("relation is not branched: inputs {0:?} and {1:?} share some but not all outputs")]
    NotBranched(Tuple, Tuple),
}

pub type RelResult<T> = Result<T, RelError>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ValueSet {
    labels: Vec<String>,
}

impl ValueSet {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> RelResult<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(RelError::EmptyValueSet);
        }
        let mut seen = BTreeSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(RelError::DuplicateLabel(l.clone()));
            }
        }
        Ok(Self { labels })
    }

    /// `{"0", "1"}`.
    pub fn binary() -> Self {
        Self::new(["0", "1"]).unwrap()
    }

    pub fn singleton(label: &str) -> Self {
        Self::new([label]).unwrap()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: u32) -> &str {
        &self.labels[i as usize]
    }

    pub fn position(&self, label: &str) -> Option<u32> {
        self.labels.iter().position(|l| l == label).map(|p| p as u32)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    domain: Vec<ValueSet>,
    codomain: Vec<ValueSet>,
    pairs: BTreeSet<(Tuple, Tuple)>,
}

fn check_tuple(slots: &[ValueSet], t: &[u32]) -> RelResult<()> {
    if t.len() != slots.len() {
        return Err(RelError::ArityMismatch(format!(
            "tuple of length {} for {} slots",
            t.len(),
            slots.len()
        )));
    }
    for (slot, (&v, vs)) in t.iter().zip(slots).enumerate() {
        if v as usize >= vs.len() {
            return Err(RelError::OutOfRange { slot, value: v, size: vs.len() });
        }
    }
    Ok(())
}

/// All tuples of the Cartesian product, in lexicographic order.
pub fn all_tuples(slots: &[ValueSet]) -> Vec<Tuple> {
    let sizes: Vec<usize> = slots.iter().map(ValueSet::len).collect();
    product(&sizes)
}

pub(crate) fn product(sizes: &[usize]) -> Vec<Tuple> {
    let mut out = vec![Vec::new()];
    for &n in sizes {
        let mut next = Vec::with_capacity(out.len() * n);
        for t in &out {
            for v in 0..n as u32 {
                let mut t2 = t.clone();
                t2.push(v);
                next.push(t2);
            }
        }
        out = next;
    }
    out
}

impl Relation {
    pub fn new(
        domain: Vec<ValueSet>,
        codomain: Vec<ValueSet>,
        pairs: impl IntoIterator<Item = (Tuple, Tuple)>,
    ) -> RelResult<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in pairs {
            check_tuple(&domain, &a)?;
            check_tuple(&codomain, &b)?;
            set.insert((a, b));
        }
        Ok(Self { domain, codomain, pairs: set })
    }

    pub fn empty(domain: Vec<ValueSet>, codomain: Vec<ValueSet>) -> Self {
        Self { domain, codomain, pairs: BTreeSet::new() }
    }

    pub fn identity(slots: Vec<ValueSet>) -> Self {
        let pairs = all_tuples(&slots).into_iter().map(|t| (t.clone(), t)).collect();
        Self { domain: slots.clone(), codomain: slots, pairs }
    }

    /// Every input related to every output.
    pub fn full(domain: Vec<ValueSet>, codomain: Vec<ValueSet>) -> Self {
        let ins = all_tuples(&domain);
        let outs = all_tuples(&codomain);
        let mut pairs = BTreeSet::new();
        for a in &ins {
            for b in &outs {
                pairs.insert((a.clone(), b.clone()));
            }
        }
        Self { domain, codomain, pairs }
    }

    /// Build from label tuples, e.g. `[(["0","1"], ["1"])]`.
    pub fn from_labels(
        domain: Vec<ValueSet>,
        codomain: Vec<ValueSet>,
        pairs: &[(Vec<&str>, Vec<&str>)],
    ) -> RelResult<Self> {
        let conv = |slots: &[ValueSet], t: &[&str]| -> RelResult<Tuple> {
            if t.len() != slots.len() {
                return Err(RelError::ArityMismatch(format!("{t:?}")));
            }
            t.iter()
                .zip(slots)
                .map(|(l, vs)| {
                    vs.position(l)
                        .ok_or_else(|| RelError::ArityMismatch(format!("unknown value `{l}`")))
                })
                .collect()
        };
        let mut v = Vec::new();
        for (a, b) in pairs {
            v.push((conv(&domain, a)?, conv(&codomain, b)?));
        }
        Self::new(domain, codomain, v)
    }

    pub fn domain(&self) -> &[ValueSet] {
        &self.domain
    }

    pub fn codomain(&self) -> &[ValueSet] {
        &self.codomain
    }

    pub fn pairs(&self) -> &BTreeSet<(Tuple, Tuple)> {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, a: &[u32], b: &[u32]) -> bool {
        // BTreeSet<(Vec,Vec)> cannot be probed by slices without allocation.
        self.pairs.contains(&(a.to_vec(), b.to_vec()))
    }

    /// Output set of each input that relates to something.
    pub fn images(&self) -> BTreeMap<Tuple, BTreeSet<Tuple>> {
        let mut m: BTreeMap<Tuple, BTreeSet<Tuple>> = BTreeMap::new();
        for (a, b) in &self.pairs {
            m.entry(a.clone()).or_default().insert(b.clone());
        }
        m
    }

    pub fn practical_inputs(&self) -> BTreeSet<Tuple> {
        self.pairs.iter().map(|(a, _)| a.clone()).collect()
    }

    pub fn practical_outputs(&self) -> BTreeSet<Tuple> {
        self.pairs.iter().map(|(_, b)| b.clone()).collect()
    }

    pub fn adjoint(&self) -> Relation {
        Relation {
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            pairs: self.pairs.iter().map(|(a, b)| (b.clone(), a.clone())).collect(),
        }
    }

    /// Sequential composition: first `self`, then `next`.
    pub fn compose_seq(&self, next: &Relation) -> RelResult<Relation> {
        if self.codomain != next.domain {
            return Err(RelError::ArityMismatch(
                "codomain of the first relation differs from domain of the second".into(),
            ));
        }
        let by_mid = next.images();
        let mut pairs = BTreeSet::new();
        for (a, b) in &self.pairs {
            if let Some(cs) = by_mid.get(b) {
                for c in cs {
                    pairs.insert((a.clone(), c.clone()));
                }
            }
        }
        Ok(Relation { domain: self.domain.clone(), codomain: next.codomain.clone(), pairs })
    }

    /// Parallel composition (Cartesian product); slots of `self` come first.
    pub fn compose_par(&self, other: &Relation) -> Relation {
        let mut pairs = BTreeSet::new();
        for (a1, b1) in &self.pairs {
            for (a2, b2) in &other.pairs {
                let a: Tuple = a1.iter().chain(a2).copied().collect();
                let b: Tuple = b1.iter().chain(b2).copied().collect();
                pairs.insert((a, b));
            }
        }
        Relation {
            domain: self.domain.iter().chain(&other.domain).cloned().collect(),
            codomain: self.codomain.iter().chain(&other.codomain).cloned().collect(),
            pairs,
        }
    }

    /// Feed codomain slot `j` back into domain slot `i` for every `(i, j)` in `pairing`.
    pub fn trace(&self, pairing: &[(usize, usize)]) -> RelResult<Relation> {
        let mut dom_used = BTreeSet::new();
        let mut cod_used = BTreeSet::new();
        for &(i, j) in pairing {
            if i >= self.domain.len() || j >= self.codomain.len() {
                return Err(RelError::ArityMismatch(format!("trace slot ({i}, {j}) out of range")));
            }
            if self.domain[i] != self.codomain[j] {
                return Err(RelError::ArityMismatch(format!(
                    "traced slots ({i}, {j}) have different value sets"
                )));
            }
            if !dom_used.insert(i) || !cod_used.insert(j) {
                return Err(RelError::ArityMismatch("slot traced twice".into()));
            }
        }
        let keep_dom: Vec<usize> = (0..self.domain.len()).filter(|i| !dom_used.contains(i)).collect();
        let keep_cod: Vec<usize> = (0..self.codomain.len()).filter(|j| !cod_used.contains(j)).collect();
        let mut pairs = BTreeSet::new();
        for (a, b) in &self.pairs {
            if pairing.iter().all(|&(i, j)| a[i] == b[j]) {
                pairs.insert((
                    keep_dom.iter().map(|&i| a[i]).collect(),
                    keep_cod.iter().map(|&j| b[j]).collect(),
                ));
            }
        }
        Ok(Relation {
            domain: keep_dom.iter().map(|&i| self.domain[i].clone()).collect(),
            codomain: keep_cod.iter().map(|&j| self.codomain[j].clone()).collect(),
            pairs,
        })
    }

    /// First pair of inputs whose output sets overlap without coinciding.
    pub fn branching_violation(&self) -> Option<(Tuple, Tuple)> {
        let images: Vec<(Tuple, BTreeSet<Tuple>)> = self.images().into_iter().collect();
        for (x, (k, ok)) in images.iter().enumerate() {
            for (k2, ok2) in &images[x + 1..] {
                if ok != ok2 && !ok.is_disjoint(ok2) {
                    return Some((k.clone(), k2.clone()));
                }
            }
        }
        None
    }

    pub fn is_branched(&self) -> bool {
        self.branching_violation().is_none()
    }

    pub fn fmt_tuple(slots: &[ValueSet], t: &[u32]) -> String {
        t.iter()
            .zip(slots)
            .map(|(&v, vs)| vs.label(v))
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self
            .pairs
            .iter()
            .map(|(a, b)| {
                format!(
                    "({})->({})",
                    Relation::fmt_tuple(&self.domain, a),
                    Relation::fmt_tuple(&self.codomain, b)
                )
            })
            .collect();
        write!(f, "{{{}}}", body.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    /// Smallest input tuple; kept under adjoint.
    pub id: Tuple,
    pub inputs: BTreeSet<Tuple>,
    pub outputs: BTreeSet<Tuple>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchedRoute {
    rel: Relation,
    branches: Vec<Branch>,
}

impl BranchedRoute {
    pub fn decompose(rel: Relation) -> RelResult<Self> {
        if let Some((a, b)) = rel.branching_violation() {
            return Err(RelError::NotBranched(a, b));
        }
        // For a branched relation the components are exactly the classes of equal output sets.
        let mut by_outputs: BTreeMap<BTreeSet<Tuple>, BTreeSet<Tuple>> = BTreeMap::new();
        for (k, outs) in rel.images() {
            by_outputs.entry(outs).or_default().insert(k);
        }
        let mut branches: Vec<Branch> = by_outputs
            .into_iter()
            .map(|(outputs, inputs)| Branch {
                id: inputs.iter().next().unwrap().clone(),
                inputs,
                outputs,
            })
            .collect();
        branches.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(Self { rel, branches })
    }

    pub fn rel(&self) -> &Relation {
        &self.rel
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn branch_of_input(&self, k: &[u32]) -> Option<usize> {
        self.branches.iter().position(|b| b.inputs.contains(k))
    }

    pub fn branch_of_output(&self, l: &[u32]) -> Option<usize> {
        self.branches.iter().position(|b| b.outputs.contains(l))
    }

    /// Transposed route with branch ids and order preserved.
    pub fn adjoint(&self) -> BranchedRoute {
        BranchedRoute {
            rel: self.rel.adjoint(),
            branches: self
                .branches
                .iter()
                .map(|b| Branch { id: b.id.clone(), inputs: b.outputs.clone(), outputs: b.inputs.clone() })
                .collect(),
        }
    }

    pub fn augment(&self) -> AugmentedRoute {
        AugmentedRoute::new(self.clone())
    }
}

/// A branched route whose outputs also report which branch happened, with
/// the output inside each branch supplied as an extra input slot.
#[derive(Debug, Clone)]
pub struct AugmentedRoute {
    pub base: BranchedRoute,
    pub rel_aug: Relation,
}

impl AugmentedRoute {
    fn new(base: BranchedRoute) -> Self {
        let rel = base.rel();
        let n_in = rel.domain().len();
        let mut domain = rel.domain().to_vec();
        let mut codomain = rel.codomain().to_vec();
        let choice_sizes: Vec<usize> = base.branches().iter().map(|b| b.outputs.len()).collect();
        for b in base.branches() {
            let labels: Vec<String> =
                b.outputs.iter().map(|t| Relation::fmt_tuple(rel.codomain(), t)).collect();
            domain.push(ValueSet::new(labels).expect("branch outputs are distinct and non-empty"));
            codomain.push(ValueSet::binary());
        }
        let mut pairs = BTreeSet::new();
        let choices = product(&choice_sizes);
        for (alpha, b) in base.branches().iter().enumerate() {
            let outs: Vec<&Tuple> = b.outputs.iter().collect();
            for k in &b.inputs {
                for c in &choices {
                    let mut a = k.clone();
                    a.extend_from_slice(c);
                    let mut o = outs[c[alpha] as usize].clone();
                    o.extend((0..base.branches().len()).map(|x| (x == alpha) as u32));
                    pairs.insert((a, o));
                }
            }
        }
        debug_assert!(n_in <= domain.len());
        Self { base, rel_aug: Relation { domain, codomain, pairs } }
    }

    pub fn is_partial_function(&self) -> bool {
        self.rel_aug.images().values().all(|s| s.len() <= 1)
    }
}
