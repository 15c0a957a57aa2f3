//! Sectorised Hilbert spaces and maps that follow a route.

use std::collections::HashSet;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::{TensorError, TensorResult};
use crate::graph::RoutedGraph;
use crate::rel::{Relation, Tuple};

pub type CMatrix = DMatrix<C64>;

/// Direct sum of one sector per index value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectoredSpace {
    pub sectors: Vec<(String, usize)>,
}

impl SectoredSpace {
    pub fn new(sectors: Vec<(String, usize)>) -> Self {
        Self { sectors }
    }

    pub fn total_dim(&self) -> usize {
        self.sectors.iter().map(|s| s.1).sum()
    }

    pub fn offset(&self, v: usize) -> usize {
        self.sectors[..v].iter().map(|s| s.1).sum()
    }

    pub fn value_of(&self, i: usize) -> usize {
        let mut acc = 0;
        for (v, (_, d)) in self.sectors.iter().enumerate() {
            acc += d;
            if i < acc {
                return v;
            }
        }
        panic!("index {i} outside space of dimension {acc}");
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.sectors.iter().position(|s| s.0 == label)
    }
}

/// Tensor product of sectorised spaces, first factor most significant.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProductSpace {
    pub factors: Vec<SectoredSpace>,
}

impl ProductSpace {
    pub fn new(factors: Vec<SectoredSpace>) -> Self {
        Self { factors }
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(SectoredSpace::total_dim).product()
    }

    /// Flat index from a basis vector in each factor, given as (sector label, index inside sector).
    pub fn index(&self, parts: &[(&str, usize)]) -> usize {
        assert_eq!(parts.len(), self.factors.len(), "one part per factor");
        let mut idx = 0;
        for (f, (label, local)) in self.factors.iter().zip(parts) {
            let v = f.position(label).unwrap_or_else(|| panic!("unknown sector `{label}`"));
            assert!(*local < f.sectors[v].1, "local index outside sector `{label}`");
            idx = idx * f.total_dim() + f.offset(v) + local;
        }
        idx
    }

    /// Sector tuple of a flat index.
    pub fn tuple(&self, mut i: usize) -> Tuple {
        let mut t = vec![0u32; self.factors.len()];
        for (k, f) in self.factors.iter().enumerate().rev() {
            let d = f.total_dim();
            t[k] = f.value_of(i % d) as u32;
            i /= d;
        }
        t
    }

    /// Dimension of the sector block labelled by `t`.
    pub fn block_dim(&self, t: &[u32]) -> usize {
        self.factors.iter().zip(t).map(|(f, &v)| f.sectors[v as usize].1).product()
    }
}

/// Dense map `in ⊗ C^anc_in → out ⊗ C^anc_out`, with the ancilla as the least
/// significant factor on each side.
#[derive(Debug, Clone, PartialEq)]
pub struct SectoredMap {
    pub matrix: CMatrix,
    pub in_space: ProductSpace,
    pub out_space: ProductSpace,
    pub anc_in: usize,
    pub anc_out: usize,
    pub route: Relation,
}

impl SectoredMap {
    pub fn new(
        matrix: CMatrix,
        in_space: ProductSpace,
        out_space: ProductSpace,
        anc_in: usize,
        anc_out: usize,
        route: Relation,
    ) -> TensorResult<Self> {
        let want = (out_space.dim() * anc_out, in_space.dim() * anc_in);
        if matrix.shape() != want {
            return Err(TensorError::ShapeMismatch(format!(
                "matrix is {:?}, spaces need {:?}",
                matrix.shape(),
                want
            )));
        }
        if route.domain().len() != in_space.factors.len() || route.codomain().len() != out_space.factors.len() {
            return Err(TensorError::ShapeMismatch("route arity differs from the spaces".into()));
        }
        Ok(Self { matrix, in_space, out_space, anc_in, anc_out, route })
    }

    pub fn zeros(in_space: ProductSpace, out_space: ProductSpace, anc_in: usize, anc_out: usize, route: Relation) -> Self {
        let m = CMatrix::zeros(out_space.dim() * anc_out, in_space.dim() * anc_in);
        Self { matrix: m, in_space, out_space, anc_in, anc_out, route }
    }

    pub fn in_tuple(&self, col: usize) -> Tuple {
        self.in_space.tuple(col / self.anc_in)
    }

    pub fn out_tuple(&self, row: usize) -> Tuple {
        self.out_space.tuple(row / self.anc_out)
    }

    /// Column indices lying in the route's practical input sectors.
    pub fn practical_cols(&self) -> Vec<usize> {
        let p = self.route.practical_inputs();
        (0..self.matrix.ncols()).filter(|&c| p.contains(&self.in_tuple(c))).collect()
    }

    pub fn practical_rows(&self) -> Vec<usize> {
        let p = self.route.practical_outputs();
        (0..self.matrix.nrows()).filter(|&r| p.contains(&self.out_tuple(r))).collect()
    }

    /// Largest entry magnitude in blocks the route forbids.
    pub fn leakage(&self) -> f64 {
        let allowed: HashSet<(Tuple, Tuple)> = self.route.pairs().iter().map(|(a, b)| (a.clone(), b.clone())).collect();
        let rows: Vec<Tuple> = (0..self.matrix.nrows()).map(|r| self.out_tuple(r)).collect();
        let cols: Vec<Tuple> = (0..self.matrix.ncols()).map(|c| self.in_tuple(c)).collect();
        let mut worst = 0.0f64;
        for (c, tc) in cols.iter().enumerate() {
            for (r, tr) in rows.iter().enumerate() {
                let x = self.matrix[(r, c)].norm();
                if x > worst && !allowed.contains(&(tc.clone(), tr.clone())) {
                    worst = x;
                }
            }
        }
        worst
    }

    /// Whether every forbidden block vanishes within `tol`, with the worst leakage.
    pub fn check_follows_route(&self, tol: f64) -> (bool, f64) {
        let l = self.leakage();
        (l <= tol, l)
    }
}

/// Input and output spaces of node `n`, in its route's arrow order.
pub fn node_spaces(g: &RoutedGraph, n: usize) -> (ProductSpace, ProductSpace) {
    let r = g.route(n);
    (arrow_space(g, &r.inputs), arrow_space(g, &r.outputs))
}

pub fn arrow_space(g: &RoutedGraph, arrows: &[usize]) -> ProductSpace {
    ProductSpace::new(
        arrows
            .iter()
            .map(|&a| {
                let ar = &g.arrows()[a];
                SectoredSpace::new(ar.values.labels().iter().cloned().zip(ar.dims.iter().copied()).collect())
            })
            .collect(),
    )
}

/// Max-norm distance of `m` from the identity.
pub fn identity_deviation(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let target = if r == c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            worst = worst.max((m[(r, c)] - target).norm());
        }
    }
    worst
}

pub fn select(m: &CMatrix, rows: &[usize], cols: &[usize]) -> CMatrix {
    CMatrix::from_fn(rows.len(), cols.len(), |r, c| m[(rows[r], cols[c])])
}
