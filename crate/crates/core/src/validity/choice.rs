//! Choice relation: from bifurcation choices to which branches happen.

use std::collections::BTreeSet;

use serde::Serialize;

use super::{ValidityError, ValidityResult};
use crate::graph::{Assignment, BranchRef, RoutedGraph};
use crate::rel::{Relation, Tuple};

/// Upper bound on the number of choice tuples enumerated exhaustively.
pub const MAX_CHOICES: usize = 1 << 22;

#[derive(Debug, Clone)]
pub struct ChoiceRelation {
    /// One slot per branch, in canonical (node, branch) order.
    pub slots: Vec<BranchRef>,
    /// Number of outputs of each slot's branch.
    pub slot_sizes: Vec<usize>,
    /// Consistent assignments.
    pub poss: Vec<Assignment>,
    /// Realised branch per node for each consistent assignment.
    pub mu: Vec<Vec<usize>>,
    /// For each choice tuple (mixed-radix order), the compatible assignments.
    pub compatible: Vec<Vec<usize>>,
}

impl ChoiceRelation {
    pub fn compute(g: &RoutedGraph) -> ValidityResult<Self> {
        let slots = g.branch_refs();
        let slot_sizes: Vec<usize> = slots
            .iter()
            .map(|b| g.route(b.node).br().branches()[b.branch].outputs.len())
            .collect();
        let total = slot_sizes
            .iter()
            .try_fold(1usize, |acc, &s| acc.checked_mul(s).filter(|&v| v <= MAX_CHOICES))
            .ok_or(ValidityError::TooLarge)?;
        let slot_of = |b: BranchRef| slots.binary_search(&b).expect("slot exists");

        let poss = g.consistent_assignments();
        let mut mu = Vec::with_capacity(poss.len());
        let mut compatible: Vec<Vec<usize>> = vec![Vec::new(); total];
        let strides = strides(&slot_sizes);
        for (ki, k) in poss.iter().enumerate() {
            let m = g.branches_of(k)?;
            // Slots of realised branches are pinned to the realised output.
            let mut fixed: Vec<Option<usize>> = vec![None; slots.len()];
            for (n, &alpha) in m.iter().enumerate() {
                let r = g.route(n);
                let out = k.project(&r.outputs);
                let pos = r.br().branches()[alpha]
                    .outputs
                    .iter()
                    .position(|o| *o == out)
                    .expect("output lies in its branch");
                fixed[slot_of(BranchRef { node: n, branch: alpha })] = Some(pos);
            }
            let free: Vec<usize> = (0..slots.len()).filter(|&s| fixed[s].is_none()).collect();
            let base: usize = fixed.iter().zip(&strides).map(|(f, st)| f.unwrap_or(0) * st).sum();
            let free_sizes: Vec<usize> = free.iter().map(|&s| slot_sizes[s]).collect();
            for_each_tuple(&free_sizes, |t| {
                let idx = base + t.iter().zip(&free).map(|(&v, &s)| v * strides[s]).sum::<usize>();
                compatible[idx].push(ki);
            });
            mu.push(m);
        }
        Ok(Self { slots, slot_sizes, poss, mu, compatible })
    }

    pub fn len(&self) -> usize {
        self.compatible.len()
    }

    pub fn is_empty(&self) -> bool {
        self.compatible.is_empty()
    }

    pub fn choice_tuple(&self, idx: usize) -> Tuple {
        let mut t = vec![0u32; self.slot_sizes.len()];
        let mut rest = idx;
        for s in (0..self.slot_sizes.len()).rev() {
            t[s] = (rest % self.slot_sizes[s]) as u32;
            rest /= self.slot_sizes[s];
        }
        t
    }

    pub fn choice_index(&self, t: &[u32]) -> usize {
        t.iter().zip(&self.slot_sizes).fold(0, |acc, (&v, &s)| acc * s + v as usize)
    }

    pub fn happens(&self, ki: usize) -> Vec<bool> {
        self.slots.iter().map(|b| self.mu[ki][b.node] == b.branch).collect()
    }

    /// Distinct Happens tuples related to choice tuple `idx`.
    pub fn images(&self, idx: usize) -> BTreeSet<Vec<bool>> {
        self.compatible[idx].iter().map(|&k| self.happens(k)).collect()
    }

    /// The relation as a [`Relation`] over labelled slots.
    pub fn to_relation(&self, g: &RoutedGraph) -> Relation {
        use crate::rel::ValueSet;
        let domain = self
            .slots
            .iter()
            .map(|b| {
                let r = g.route(b.node);
                let labels: Vec<String> = r.br().branches()[b.branch]
                    .outputs
                    .iter()
                    .map(|o| Relation::fmt_tuple(r.rel.codomain(), o))
                    .collect();
                ValueSet::new(labels).expect("distinct outputs")
            })
            .collect();
        let codomain = self.slots.iter().map(|_| ValueSet::binary()).collect();
        let mut pairs = Vec::new();
        for idx in 0..self.len() {
            for h in self.images(idx) {
                pairs.push((self.choice_tuple(idx), h.iter().map(|&x| x as u32).collect()));
            }
        }
        Relation::new(domain, codomain, pairs).expect("well-formed")
    }
}

pub(crate) fn strides(sizes: &[usize]) -> Vec<usize> {
    let mut st = vec![1usize; sizes.len()];
    for s in (0..sizes.len().saturating_sub(1)).rev() {
        st[s] = st[s + 1] * sizes[s + 1];
    }
    st
}

pub(crate) fn for_each_tuple(sizes: &[usize], mut f: impl FnMut(&[usize])) {
    if sizes.contains(&0) {
        return;
    }
    let mut t = vec![0usize; sizes.len()];
    loop {
        f(&t);
        let mut i = sizes.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            t[i] += 1;
            if t[i] < sizes[i] {
                break;
            }
            t[i] = 0;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Determination {
    /// No Happens tuple is compatible with the choices.
    Overdetermined,
    /// Several Happens tuples are compatible with the choices.
    Underdetermined,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnivocalityWitness {
    pub direction: Direction,
    pub kind: Determination,
    /// Choice per branch with more than one output, as `branch = outputs`.
    pub choice: Vec<(String, String)>,
    /// Each compatible Happens tuple, listed as the branches that happen.
    pub images: Vec<Vec<String>>,
}

impl std::fmt::Display for UnivocalityWitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let dir = match self.direction {
            Direction::Forward => "univocality",
            Direction::Backward => "co-univocality",
        };
        let kind = match self.kind {
            Determination::Overdetermined => "overdetermined",
            Determination::Underdetermined => "underdetermined",
        };
        write!(f, "{dir}: {kind}")?;
        if !self.choice.is_empty() {
            let c: Vec<String> = self.choice.iter().map(|(b, v)| format!("{b}={v}")).collect();
            write!(f, " at choice [{}]", c.join(", "))?;
        }
        if !self.images.is_empty() {
            let im: Vec<String> = self.images.iter().map(|h| format!("{{{}}}", h.join(", "))).collect();
            write!(f, "; happening sets {}", im.join(" | "))?;
        }
        Ok(())
    }
}

/// First choice tuple whose image is not a single Happens tuple.
pub fn univocality_witness(
    g: &RoutedGraph,
    cr: &ChoiceRelation,
    direction: Direction,
) -> Option<UnivocalityWitness> {
    (0..cr.len()).find_map(|idx| {
        let im = cr.images(idx);
        if im.len() == 1 {
            return None;
        }
        let kind = if im.is_empty() { Determination::Overdetermined } else { Determination::Underdetermined };
        let t = cr.choice_tuple(idx);
        let choice = cr
            .slots
            .iter()
            .zip(&t)
            .enumerate()
            .filter(|(s, _)| cr.slot_sizes[*s] > 1)
            .map(|(_, (b, &v))| {
                let r = g.route(b.node);
                let out = r.br().branches()[b.branch].outputs.iter().nth(v as usize).unwrap();
                (g.branch_name(*b), Relation::fmt_tuple(r.rel.codomain(), out))
            })
            .collect();
        let images = im
            .iter()
            .map(|h| {
                cr.slots
                    .iter()
                    .zip(h)
                    .filter(|(_, &x)| x)
                    .map(|(b, _)| g.branch_name(*b))
                    .collect()
            })
            .collect();
        Some(UnivocalityWitness { direction, kind, choice, images })
    })
}

pub fn check_univocality(g: &RoutedGraph) -> ValidityResult<Result<(), UnivocalityWitness>> {
    let cr = ChoiceRelation::compute(g)?;
    Ok(match univocality_witness(g, &cr, Direction::Forward) {
        Some(w) => Err(w),
        None => Ok(()),
    })
}

pub fn check_bi_univocality(g: &RoutedGraph) -> ValidityResult<Result<(), UnivocalityWitness>> {
    if let Err(w) = check_univocality(g)? {
        return Ok(Err(w));
    }
    let adj = g.adjoint_graph();
    let cr = ChoiceRelation::compute(&adj)?;
    Ok(match univocality_witness(&adj, &cr, Direction::Backward) {
        Some(w) => Err(w),
        None => Ok(()),
    })
}

/// The map from choice tuples to the unique compatible assignment.
pub fn assignment_function(g: &RoutedGraph) -> ValidityResult<Vec<(Tuple, Assignment)>> {
    let cr = ChoiceRelation::compute(g)?;
    if let Some(w) = univocality_witness(g, &cr, Direction::Forward) {
        return Err(ValidityError::NotUnivocal(w));
    }
    (0..cr.len())
        .map(|idx| match cr.compatible[idx].as_slice() {
            [k] => Ok((cr.choice_tuple(idx), cr.poss[*k].clone())),
            _ => Err(ValidityError::Internal(format!(
                "choice {:?} determines {} assignments",
                cr.choice_tuple(idx),
                cr.compatible[idx].len()
            ))),
        })
        .collect()
}
