//! Process matrices: insert swaps at party slots, contract, take the Choi
//! vector of the resulting map and its projector.

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::contract::{contract_unchecked, ContractionOrder};
use super::space::{node_spaces, CMatrix, SectoredMap};
use super::{Fleshing, TensorError, TensorResult};
use crate::graph::RoutedGraph;

/// Largest Choi-vector length for which the full process matrix is built.
pub const MAX_CHOI_DIM: usize = 1024;

/// `Σ_i |i⟩ ⊗ M|i⟩`, with the input index most significant.
pub fn choi_vector(m: &CMatrix) -> Vec<C64> {
    let (d_out, d_in) = m.shape();
    let mut v = vec![C64::new(0.0, 0.0); d_in * d_out];
    for i in 0..d_in {
        for j in 0..d_out {
            v[i * d_out + j] = m[(j, i)];
        }
    }
    v
}

pub fn from_choi_vector(v: &[C64], d_in: usize, d_out: usize) -> CMatrix {
    assert_eq!(v.len(), d_in * d_out, "vector length is d_in · d_out");
    CMatrix::from_fn(d_out, d_in, |j, i| v[i * d_out + j])
}

/// Swap at node `n`: the node's input leaves through the ancilla output and the
/// ancilla input enters the node's output wires.
pub fn swap_map(g: &RoutedGraph, n: usize) -> SectoredMap {
    let (ins, outs) = node_spaces(g, n);
    let (i_dim, o_dim) = (ins.dim(), outs.dim());
    let mut m = SectoredMap::zeros(ins, outs, o_dim, i_dim, g.route(n).rel.clone());
    for a in 0..i_dim {
        for b in 0..o_dim {
            m.matrix[(b * i_dim + a, a * o_dim + b)] = C64::new(1.0, 0.0);
        }
    }
    m
}

/// `base` with every party node replaced by its swap.
pub fn swap_fleshing(g: &RoutedGraph, base: &Fleshing) -> TensorResult<Fleshing> {
    if !g.nodes().iter().any(|n| n.party) {
        return Err(TensorError::MissingPartyFlags);
    }
    let maps = base
        .maps
        .iter()
        .enumerate()
        .map(|(n, m)| if g.nodes()[n].party { swap_map(g, n) } else { m.clone() })
        .collect();
    Ok(Fleshing { maps })
}

#[derive(Debug, Clone)]
pub struct ProcessMatrixView {
    /// `|v⟩⟨v|` for the Choi vector `v` of the contracted map.
    pub matrix: CMatrix,
    pub vector: Vec<C64>,
    pub d_in: usize,
    pub d_out: usize,
    /// Tensor factors of the input side then the output side, most significant first.
    pub labels: Vec<String>,
}

/// Contracts `f` as given (swaps already inserted) and builds the process matrix.
pub fn process_matrix(g: &RoutedGraph, f: &Fleshing) -> TensorResult<ProcessMatrixView> {
    let s = contract_unchecked(g, f, ContractionOrder::Greedy)?;
    let (d_out, d_in) = s.matrix.shape();
    if d_in * d_out > MAX_CHOI_DIM {
        return Err(TensorError::TooLarge(format!(
            "process matrix would be {0}×{0}; limit is {MAX_CHOI_DIM}",
            d_in * d_out
        )));
    }
    let vector = choi_vector(&s.matrix);
    let col = CMatrix::from_column_slice(vector.len(), 1, &vector);
    let matrix = &col * col.adjoint();
    let mut labels = Vec::new();
    for (side, ext, anc) in [
        ("in", g.base.external_inputs(), f.maps.iter().map(|m| m.anc_in).collect::<Vec<_>>()),
        ("out", g.base.external_outputs(), f.maps.iter().map(|m| m.anc_out).collect()),
    ] {
        labels.extend(ext.iter().map(|&a| format!("{side}:{}", g.arrows()[a].id)));
        for (n, &d) in anc.iter().enumerate() {
            if d > 1 {
                labels.push(format!("{side}:{}", g.nodes()[n].id));
            }
        }
    }
    Ok(ProcessMatrixView { matrix, vector, d_in, d_out, labels })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChoiReport {
    pub dim: usize,
    pub trace: f64,
    pub hermiticity_dev: f64,
    pub min_eigenvalue: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub hermitian: bool,
    pub psd: bool,
    pub rank_one: bool,
}

pub fn analyze(w: &CMatrix) -> ChoiReport {
    let n = w.nrows();
    let wa = w.adjoint();
    let hermiticity_dev = w.iter().zip(wa.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let h = (w + &wa).map(|x| x * 0.5);
    let min_eigenvalue = if n == 0 { 0.0 } else { h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min) };
    let mut sv: Vec<f64> = if n == 0 { Vec::new() } else { w.clone().svd(false, false).singular_values.iter().copied().collect() };
    sv.sort_by(|a, b| b.total_cmp(a));
    let sigma1 = sv.first().copied().unwrap_or(0.0);
    let sigma2 = sv.get(1).copied().unwrap_or(0.0);
    ChoiReport {
        dim: n,
        trace: w.trace().re,
        hermiticity_dev,
        min_eigenvalue,
        sigma1,
        sigma2,
        hermitian: hermiticity_dev <= 1e-10,
        psd: min_eigenvalue >= -1e-10,
        rank_one: sigma1 > 0.0 && sigma2 <= 1e-8 * sigma1,
    }
}
