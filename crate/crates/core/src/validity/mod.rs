//! Validity of routed graphs: bi-univocality and weak loops.

mod branch_graph;
mod choice;
mod loops;

pub use branch_graph::{build_branch_graph, green_edges, red_edges, solid_edges, BranchGraph, Edge, EdgeKind};
pub use choice::{
    assignment_function, check_bi_univocality, check_univocality, univocality_witness, ChoiceRelation,
    Determination, Direction, UnivocalityWitness, MAX_CHOICES,
};
pub use loops::{check_weak_loops, components, cyclic_edges, loop_report, LoopFault, LoopReport, LoopWitness};

use serde::Serialize;
use thiserror::Error;

use crate::graph::{Diagnostic, GraphError, RoutedGraph};

#[derive(Debug, Error)]
pub enum ValidityError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("too many bifurcation-choice tuples to enumerate (limit {MAX_CHOICES})")]
    TooLarge,
    #[error("not univocal: {0}")]
    NotUnivocal(UnivocalityWitness),
    #[error("not bi-univocal: {0}")]
    NotBiUnivocal(UnivocalityWitness),
    #[error("internal consistency error: {0}")]
    Internal(String),
}

pub type ValidityResult<T> = Result<T, ValidityError>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NamedEdge {
    pub from: String,
    pub to: String,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BranchGraphReport {
    pub vertices: Vec<String>,
    pub edges: Vec<NamedEdge>,
}

impl From<&BranchGraph> for BranchGraphReport {
    fn from(bg: &BranchGraph) -> Self {
        Self {
            vertices: bg.names.clone(),
            edges: bg
                .edges
                .iter()
                .map(|e| NamedEdge { from: bg.names[e.from].clone(), to: bg.names[e.to].clone(), kind: e.kind })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidityVerdict {
    pub valid: bool,
    pub structure_ok: bool,
    pub diagnostics: Vec<Diagnostic>,
    pub univocal: bool,
    pub univocality_witness: Option<UnivocalityWitness>,
    pub co_univocal: bool,
    pub co_univocality_witness: Option<UnivocalityWitness>,
    pub weak_loops_ok: bool,
    pub weak_loops_witness: Option<LoopWitness>,
    pub loop_report: Option<LoopReport>,
    /// Branches realised by no consistent assignment.
    pub unreachable_branches: Vec<String>,
    pub branch_graph: Option<BranchGraphReport>,
    #[serde(skip)]
    pub graph: Option<BranchGraph>,
}

impl ValidityVerdict {
    fn structural(diagnostics: Vec<Diagnostic>) -> Self {
        Self {
            valid: false,
            structure_ok: false,
            diagnostics,
            univocal: false,
            univocality_witness: None,
            co_univocal: false,
            co_univocality_witness: None,
            weak_loops_ok: false,
            weak_loops_witness: None,
            loop_report: None,
            unreachable_branches: Vec::new(),
            branch_graph: None,
            graph: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verdicts serialize")
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        if !self.structure_ok {
            let d: Vec<String> = self.diagnostics.iter().map(|d| d.to_string()).collect();
            return format!("malformed: {}", d.join("; "));
        }
        if let Some(w) = self.univocality_witness.as_ref().or(self.co_univocality_witness.as_ref()) {
            return format!("invalid; {w}");
        }
        if let Some(w) = &self.weak_loops_witness {
            return format!("invalid; {w}");
        }
        let loops = match &self.loop_report {
            Some(r) if r.has_loops => {
                let c: Vec<String> = r.loop_colours.iter().map(|k| format!("{k:?}").to_lowercase()).collect();
                c.join(", ")
            }
            _ => "none".into(),
        };
        format!("valid; loops: {loops}")
    }
}

/// Runs the full pipeline; never fails on invalid graphs, only on enumeration limits.
pub fn validate(g: &RoutedGraph) -> ValidityResult<ValidityVerdict> {
    let diagnostics = g.validate_structure();
    if !diagnostics.is_empty() {
        return Ok(ValidityVerdict::structural(diagnostics));
    }
    let fwd = ChoiceRelation::compute(g)?;
    let fwd_witness = univocality_witness(g, &fwd, Direction::Forward);
    let adj = g.adjoint_graph();
    let bwd = ChoiceRelation::compute(&adj)?;
    let co_univocality_witness = univocality_witness(&adj, &bwd, Direction::Backward);
    let univocality_witness = fwd_witness;

    let mut reached = vec![false; fwd.slots.len()];
    for ki in 0..fwd.poss.len() {
        for (s, h) in fwd.happens(ki).into_iter().enumerate() {
            reached[s] |= h;
        }
    }
    let unreachable_branches =
        fwd.slots.iter().zip(&reached).filter(|(_, &r)| !r).map(|(b, _)| g.branch_name(*b)).collect();

    let mut v = ValidityVerdict {
        valid: false,
        structure_ok: true,
        diagnostics,
        univocal: univocality_witness.is_none(),
        univocality_witness,
        co_univocal: co_univocality_witness.is_none(),
        co_univocality_witness,
        weak_loops_ok: false,
        weak_loops_witness: None,
        loop_report: None,
        unreachable_branches,
        branch_graph: None,
        graph: None,
    };
    if v.univocal && v.co_univocal {
        let bg = build_branch_graph(g)?;
        let wl = check_weak_loops(&bg);
        v.weak_loops_ok = wl.is_ok();
        v.weak_loops_witness = wl.err();
        v.loop_report = Some(loop_report(&bg));
        v.branch_graph = Some(BranchGraphReport::from(&bg));
        v.graph = Some(bg);
        v.valid = v.weak_loops_ok;
    }
    Ok(v)
}
