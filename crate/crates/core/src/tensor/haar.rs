//! Haar-random unitaries and random route-following fleshings.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::space::{node_spaces, CMatrix, ProductSpace, SectoredMap};
use super::{Fleshing, TensorError, TensorResult};
use crate::graph::{BranchRef, RoutedGraph};
use crate::rel::BranchedRoute;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Haar-distributed `n × n` unitary: QR of a complex Gaussian matrix with the
/// phases of R's diagonal moved into Q.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let z = DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re * scale, im * scale)
    });
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// Practical (row, column) index lists of each branch block.
pub fn branch_blocks(
    route: &BranchedRoute,
    in_space: &ProductSpace,
    out_space: &ProductSpace,
    anc_in: usize,
    anc_out: usize,
) -> Vec<(Vec<usize>, Vec<usize>)> {
    let cols_of: Vec<Option<usize>> = (0..in_space.dim()).map(|i| route.branch_of_input(&in_space.tuple(i))).collect();
    let rows_of: Vec<Option<usize>> = (0..out_space.dim()).map(|o| route.branch_of_output(&out_space.tuple(o))).collect();
    (0..route.branches().len())
        .map(|b| {
            let rows = (0..out_space.dim() * anc_out).filter(|&r| rows_of[r / anc_out] == Some(b)).collect();
            let cols = (0..in_space.dim() * anc_in).filter(|&c| cols_of[c / anc_in] == Some(b)).collect();
            (rows, cols)
        })
        .collect()
}

/// Block-diagonal unitary on each branch, zero elsewhere.
pub fn random_routed_unitary<R: Rng + ?Sized>(
    route: &BranchedRoute,
    in_space: ProductSpace,
    out_space: ProductSpace,
    anc_in: usize,
    anc_out: usize,
    rng: &mut R,
) -> TensorResult<SectoredMap> {
    let blocks = branch_blocks(route, &in_space, &out_space, anc_in, anc_out);
    for (b, (rows, cols)) in blocks.iter().enumerate() {
        if rows.len() != cols.len() {
            return Err(TensorError::UnbalancedBranch {
                branch: format!("#{b}"),
                in_dim: cols.len(),
                out_dim: rows.len(),
            });
        }
    }
    let mut m = SectoredMap::zeros(in_space, out_space, anc_in, anc_out, route.rel().clone());
    for (rows, cols) in &blocks {
        let u = haar_unitary(rows.len(), rng);
        for (p, &r) in rows.iter().enumerate() {
            for (q, &c) in cols.iter().enumerate() {
                m.matrix[(r, c)] = u[(p, q)];
            }
        }
    }
    Ok(m)
}

/// First unbalanced branch of `g` given per-node ancilla dimensions.
pub fn check_balance(g: &RoutedGraph, ancillas: &BTreeMap<usize, (usize, usize)>) -> TensorResult<()> {
    for n in 0..g.nodes().len() {
        let (ins, outs) = node_spaces(g, n);
        let (ai, ao) = ancillas.get(&n).copied().unwrap_or((1, 1));
        for (b, br) in g.route(n).br().branches().iter().enumerate() {
            let i: usize = br.inputs.iter().map(|t| ins.block_dim(t)).sum::<usize>() * ai;
            let o: usize = br.outputs.iter().map(|t| outs.block_dim(t)).sum::<usize>() * ao;
            if i != o {
                return Err(TensorError::UnbalancedBranch {
                    branch: g.branch_name(BranchRef { node: n, branch: b }),
                    in_dim: i,
                    out_dim: o,
                });
            }
        }
    }
    Ok(())
}

/// Random routed unitaries at every node, drawn in node order from one seeded stream.
pub fn random_fleshing(
    g: &RoutedGraph,
    seed: u64,
    ancillas: &BTreeMap<usize, (usize, usize)>,
) -> TensorResult<Fleshing> {
    check_balance(g, ancillas)?;
    let mut r = rng(seed);
    let maps = (0..g.nodes().len())
        .map(|n| {
            let (ins, outs) = node_spaces(g, n);
            let (ai, ao) = ancillas.get(&n).copied().unwrap_or((1, 1));
            random_routed_unitary(g.route(n).br(), ins, outs, ai, ao, &mut r)
        })
        .collect::<TensorResult<Vec<_>>>()?;
    Ok(Fleshing { maps })
}
