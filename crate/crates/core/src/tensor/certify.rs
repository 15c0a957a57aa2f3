//! Unitarity and isometry certification of contracted skeletal circuits.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::contract::contract_skeletal;
use super::haar::{check_balance, random_fleshing};
use super::space::{identity_deviation, select, SectoredMap};
use super::{Fleshing, TensorError, TensorResult};
use crate::graph::RoutedGraph;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    /// Pad one node per trial with a 2-dimensional ancilla on both sides.
    pub with_ancillas: bool,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self { trials: 20, seed: 42, tol: 1e-9, with_ancillas: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub trial: usize,
    pub seed: u64,
    /// Node carrying the ancilla, if any.
    pub ancilla_node: Option<String>,
    /// Max-norm of S†S − I on the practical spaces.
    pub isometry_dev: f64,
    /// Max-norm of SS† − I on the practical spaces.
    pub coisometry_dev: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifyReport {
    pub tol: f64,
    pub practical_in: usize,
    pub practical_out: usize,
    pub trials: Vec<TrialResult>,
    pub passed: bool,
}

impl CertifyReport {
    pub fn worst(&self) -> f64 {
        self.trials.iter().map(|t| t.isometry_dev.max(t.coisometry_dev)).fold(0.0, f64::max)
    }
}

/// (‖S†S − I‖, ‖SS† − I‖) restricted to practical rows and columns.
pub fn deviations(m: &SectoredMap) -> (f64, f64) {
    let s = select(&m.matrix, &m.practical_rows(), &m.practical_cols());
    let a = s.adjoint();
    (identity_deviation(&(&a * &s)), identity_deviation(&(&s * &a)))
}

pub fn certify_isometry(m: &SectoredMap, tol: f64) -> bool {
    let s = select(&m.matrix, &m.practical_rows(), &m.practical_cols());
    identity_deviation(&(s.adjoint() * &s)) <= tol
}

/// Contracts one given fleshing and judges the result.
pub fn certify_fleshing(g: &RoutedGraph, f: &Fleshing, tol: f64) -> TensorResult<(SectoredMap, f64, f64, bool)> {
    let s = contract_skeletal(g, f)?;
    let (a, b) = deviations(&s);
    Ok((s, a, b, a <= tol && b <= tol))
}

fn practical_dims(g: &RoutedGraph) -> (usize, usize) {
    let r = g.composed_route();
    let block = |arrows: &[usize], t: &[u32]| -> usize {
        arrows.iter().zip(t).map(|(&a, &v)| g.arrows()[a].dim(v)).product()
    };
    let ins = g.base.external_inputs();
    let outs = g.base.external_outputs();
    let i = r.practical_inputs().iter().map(|t| block(&ins, t)).sum();
    let o = r.practical_outputs().iter().map(|t| block(&outs, t)).sum();
    (i, o)
}

/// Draws `trials` random routed-unitary fleshings (trial `t` seeded with
/// `seed + t`), contracts each and records both unitarity deviations.
pub fn certify_superunitary(g: &RoutedGraph, opts: &CertifyOptions) -> TensorResult<CertifyReport> {
    check_balance(g, &BTreeMap::new())?;
    let (practical_in, practical_out) = practical_dims(g);
    if practical_in != practical_out {
        return Err(TensorError::DimensionMismatch { in_dim: practical_in, out_dim: practical_out });
    }
    let n = g.nodes().len();
    let trials = (0..opts.trials)
        .into_par_iter()
        .map(|t| {
            let seed = opts.seed.wrapping_add(t as u64);
            let mut anc = BTreeMap::new();
            if opts.with_ancillas && n > 0 {
                anc.insert(t % n, (2, 2));
            }
            let f = random_fleshing(g, seed, &anc)?;
            let s = contract_skeletal(g, &f)?;
            let (isometry_dev, coisometry_dev) = deviations(&s);
            Ok(TrialResult {
                trial: t,
                seed,
                ancilla_node: anc.keys().next().map(|&k| g.nodes()[k].id.clone()),
                isometry_dev,
                coisometry_dev,
                pass: isometry_dev <= opts.tol && coisometry_dev <= opts.tol,
            })
        })
        .collect::<TensorResult<Vec<_>>>()?;
    let passed = trials.iter().all(|t| t.pass);
    Ok(CertifyReport { tol: opts.tol, practical_in, practical_out, trials, passed })
}
