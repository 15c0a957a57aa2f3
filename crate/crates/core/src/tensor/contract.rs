//! Contraction of the skeletal circuit: every internal arrow pairs an output leg
//! of its tail node with an input leg of its head node. Cycles need no special
//! treatment because contraction is index pairing, not temporal composition.

use num_complex::Complex64 as C64;

use super::space::{arrow_space, CMatrix, SectoredMap};
use super::{Fleshing, TensorError, TensorResult};
use crate::graph::RoutedGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Leg {
    /// Output side of an arrow, carried by its tail node.
    Tail(usize),
    /// Input side of an arrow, carried by its head node.
    Head(usize),
    AncOut(usize),
    AncIn(usize),
}

impl Leg {
    fn partner(self) -> Option<Leg> {
        match self {
            Leg::Tail(a) => Some(Leg::Head(a)),
            Leg::Head(a) => Some(Leg::Tail(a)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
struct Tensor {
    legs: Vec<Leg>,
    dims: Vec<usize>,
    data: Vec<C64>,
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut st = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        st[i] = st[i + 1] * dims[i + 1];
    }
    st
}

impl Tensor {
    fn size(&self) -> usize {
        self.data.len()
    }

    fn permute(&self, order: &[usize]) -> Tensor {
        let old_st = strides(&self.dims);
        let dims: Vec<usize> = order.iter().map(|&i| self.dims[i]).collect();
        let st: Vec<usize> = order.iter().map(|&i| old_st[i]).collect();
        let mut data = Vec::with_capacity(self.data.len());
        let mut idx = vec![0usize; dims.len()];
        let mut off = 0usize;
        if !self.data.is_empty() {
            loop {
                data.push(self.data[off]);
                let mut k = dims.len();
                loop {
                    if k == 0 {
                        break;
                    }
                    k -= 1;
                    idx[k] += 1;
                    off += st[k];
                    if idx[k] < dims[k] {
                        break;
                    }
                    off -= st[k] * dims[k];
                    idx[k] = 0;
                    if k == 0 {
                        k = usize::MAX;
                        break;
                    }
                }
                if k == usize::MAX || dims.is_empty() {
                    break;
                }
            }
        }
        Tensor { legs: order.iter().map(|&i| self.legs[i]).collect(), dims, data }
    }

    /// Sums over every pair of partner legs both present in this tensor.
    fn self_trace(self) -> Tensor {
        let mut pairs = Vec::new();
        for (i, l) in self.legs.iter().enumerate() {
            if let Some(j) = l.partner().and_then(|p| self.legs.iter().position(|x| *x == p)) {
                if matches!(l, Leg::Tail(_)) {
                    pairs.push((i, j));
                }
            }
        }
        if pairs.is_empty() {
            return self;
        }
        let traced: Vec<usize> = pairs.iter().flat_map(|&(i, j)| [i, j]).collect();
        let rest: Vec<usize> = (0..self.legs.len()).filter(|i| !traced.contains(i)).collect();
        let mut order = rest.clone();
        for &(i, j) in &pairs {
            order.push(i);
            order.push(j);
        }
        let p = self.permute(&order);
        let inner: usize = pairs.iter().map(|&(i, _)| self.dims[i] * self.dims[i]).product();
        let diag_dims: Vec<usize> = pairs.iter().map(|&(i, _)| self.dims[i]).collect();
        // Offsets of the diagonal entries inside the traced block.
        let mut diag = vec![0usize];
        for &d in &diag_dims {
            let mut next = Vec::with_capacity(diag.len() * d);
            for &o in &diag {
                for k in 0..d {
                    next.push(o * d * d + k * d + k);
                }
            }
            diag = next;
        }
        let outer = p.data.len() / inner.max(1);
        let data = (0..outer)
            .map(|r| diag.iter().map(|&o| p.data[r * inner + o]).sum())
            .collect();
        Tensor {
            legs: rest.iter().map(|&i| self.legs[i]).collect(),
            dims: rest.iter().map(|&i| self.dims[i]).collect(),
            data,
        }
    }

    fn shared(&self, other: &Tensor) -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        for (i, l) in self.legs.iter().enumerate() {
            if let Some(j) = l.partner().and_then(|p| other.legs.iter().position(|x| *x == p)) {
                v.push((i, j));
            }
        }
        v
    }

    fn result_size(&self, other: &Tensor) -> usize {
        let sh = self.shared(other);
        let c: usize = sh.iter().map(|&(i, _)| self.dims[i]).product();
        (self.size() / c.max(1)) * (other.size() / c.max(1))
    }

    fn contract(&self, other: &Tensor) -> Tensor {
        let sh = self.shared(other);
        let ca: Vec<usize> = sh.iter().map(|p| p.0).collect();
        let cb: Vec<usize> = sh.iter().map(|p| p.1).collect();
        let fa: Vec<usize> = (0..self.legs.len()).filter(|i| !ca.contains(i)).collect();
        let fb: Vec<usize> = (0..other.legs.len()).filter(|i| !cb.contains(i)).collect();
        let a = self.permute(&[fa.clone(), ca.clone()].concat());
        let b = other.permute(&[cb.clone(), fb.clone()].concat());
        let k: usize = ca.iter().map(|&i| self.dims[i]).product();
        let m: usize = fa.iter().map(|&i| self.dims[i]).product();
        let n: usize = fb.iter().map(|&i| other.dims[i]).product();
        let mut data = vec![C64::new(0.0, 0.0); m * n];
        for i in 0..m {
            let row = &mut data[i * n..(i + 1) * n];
            for p in 0..k {
                let x = a.data[i * k + p];
                if x.re == 0.0 && x.im == 0.0 {
                    continue;
                }
                let brow = &b.data[p * n..(p + 1) * n];
                for (r, y) in row.iter_mut().zip(brow) {
                    *r += x * y;
                }
            }
        }
        Tensor {
            legs: fa.iter().map(|&i| self.legs[i]).chain(fb.iter().map(|&i| other.legs[i])).collect(),
            dims: fa.iter().map(|&i| self.dims[i]).chain(fb.iter().map(|&i| other.dims[i])).collect(),
            data,
        }
    }
}

/// How pairs of tensors are chosen for contraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ContractionOrder {
    /// Smallest intermediate first.
    #[default]
    Greedy,
    /// Fold nodes in declaration order.
    Sequential,
}

fn node_tensor(g: &RoutedGraph, n: usize, m: &SectoredMap) -> Tensor {
    let r = g.route(n);
    let mut legs = Vec::new();
    let mut dims = Vec::new();
    for &a in &r.outputs {
        legs.push(Leg::Tail(a));
        dims.push(g.arrows()[a].total_dim());
    }
    legs.push(Leg::AncOut(n));
    dims.push(m.anc_out);
    for &a in &r.inputs {
        legs.push(Leg::Head(a));
        dims.push(g.arrows()[a].total_dim());
    }
    legs.push(Leg::AncIn(n));
    dims.push(m.anc_in);
    let (rows, cols) = m.matrix.shape();
    let mut data = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            data.push(m.matrix[(i, j)]);
        }
    }
    Tensor { legs, dims, data }
}

fn check_types(g: &RoutedGraph, f: &Fleshing) -> TensorResult<()> {
    if f.maps.len() != g.nodes().len() {
        return Err(TensorError::ShapeMismatch("one map per node is required".into()));
    }
    for (n, m) in f.maps.iter().enumerate() {
        let r = g.route(n);
        if m.in_space != arrow_space(g, &r.inputs) || m.out_space != arrow_space(g, &r.outputs) {
            return Err(TensorError::ShapeMismatch(format!(
                "map at `{}` does not act on the node's arrows",
                g.nodes()[n].id
            )));
        }
    }
    Ok(())
}

/// Contracts without checking that the node maps follow their routes.
pub fn contract_unchecked(g: &RoutedGraph, f: &Fleshing, order: ContractionOrder) -> TensorResult<SectoredMap> {
    check_types(g, f)?;
    let mut ts: Vec<Tensor> = f.maps.iter().enumerate().map(|(n, m)| node_tensor(g, n, m).self_trace()).collect();
    if ts.is_empty() {
        ts.push(Tensor { legs: vec![], dims: vec![], data: vec![C64::new(1.0, 0.0)] });
    }
    while ts.len() > 1 {
        let (i, j) = match order {
            ContractionOrder::Sequential => (0, 1),
            ContractionOrder::Greedy => {
                let mut best: Option<(bool, usize, usize, usize)> = None;
                for i in 0..ts.len() {
                    for j in i + 1..ts.len() {
                        let disjoint = ts[i].shared(&ts[j]).is_empty();
                        let cost = ts[i].result_size(&ts[j]);
                        let cand = (disjoint, cost, i, j);
                        if best.is_none_or(|b| (cand.0, cand.1) < (b.0, b.1)) {
                            best = Some(cand);
                        }
                    }
                }
                let b = best.unwrap();
                (b.2, b.3)
            }
        };
        let tj = ts.remove(j);
        let ti = ts.remove(i);
        ts.insert(i, ti.contract(&tj).self_trace());
    }
    let t = ts.pop().unwrap();

    let ext_in = g.base.external_inputs();
    let ext_out = g.base.external_outputs();
    let n = g.nodes().len();
    let mut want: Vec<Leg> = ext_out.iter().map(|&a| Leg::Tail(a)).collect();
    want.extend((0..n).map(Leg::AncOut));
    want.extend(ext_in.iter().map(|&a| Leg::Head(a)));
    want.extend((0..n).map(Leg::AncIn));
    let order: Vec<usize> = want
        .iter()
        .map(|l| t.legs.iter().position(|x| x == l).expect("every open leg survives"))
        .collect();
    let p = t.permute(&order);
    let anc_out: usize = f.maps.iter().map(|m| m.anc_out).product();
    let anc_in: usize = f.maps.iter().map(|m| m.anc_in).product();
    let out_space = arrow_space(g, &ext_out);
    let in_space = arrow_space(g, &ext_in);
    let rows = out_space.dim() * anc_out;
    let cols = in_space.dim() * anc_in;
    let matrix = CMatrix::from_row_slice(rows, cols, &p.data);
    SectoredMap::new(matrix, in_space, out_space, anc_in, anc_out, g.composed_route())
}

/// Partial trace over internal arrows of the tensor product of the node maps,
/// as a map from the external inputs (then ancilla inputs in node order) to the
/// external outputs (then ancilla outputs).
pub fn contract_skeletal(g: &RoutedGraph, f: &Fleshing) -> TensorResult<SectoredMap> {
    contract_skeletal_with(g, f, ContractionOrder::Greedy)
}

pub fn contract_skeletal_with(g: &RoutedGraph, f: &Fleshing, order: ContractionOrder) -> TensorResult<SectoredMap> {
    check_types(g, f)?;
    for (n, m) in f.maps.iter().enumerate() {
        if !m.check_follows_route(super::LEAKAGE_TOL).0 {
            return Err(TensorError::RouteViolation(g.nodes()[n].id.clone()));
        }
    }
    contract_unchecked(g, f, order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::tensor::haar::{haar_unitary, random_fleshing, rng};
    use std::collections::BTreeMap;

    fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
        assert_eq!(a.shape(), b.shape());
        a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn permute_round_trip() {
        let t = Tensor {
            legs: vec![Leg::AncIn(0), Leg::AncIn(1), Leg::AncIn(2)],
            dims: vec![2, 3, 4],
            data: (0..24).map(|x| C64::new(x as f64, 0.0)).collect(),
        };
        let p = t.permute(&[2, 0, 1]);
        // p[k][i][j] = t[i][j][k]
        assert_eq!(p.data[3 * 6 + 1 * 3 + 2], t.data[1 * 12 + 2 * 4 + 3]);
        let back = p.permute(&[1, 2, 0]);
        assert_eq!(back.data, t.data);
    }

    #[test]
    fn chain_composes() {
        let d = 3;
        let e = catalog::chain(d);
        let g = &e.graph;
        let mut r = rng(9);
        let u = haar_unitary(d, &mut r);
        let v = haar_unitary(d, &mut r);
        let f = catalog::chain_fleshing(g, &u, &v);
        let s = contract_skeletal(g, &f).unwrap();
        assert!(max_diff(&s.matrix, &(&v * &u)) < 1e-12);
    }

    #[test]
    fn orders_agree_on_catalog() {
        for e in catalog::all() {
            let g = &e.graph;
            let Ok(f) = random_fleshing(g, 17, &BTreeMap::new()) else { continue };
            let a = contract_skeletal_with(g, &f, ContractionOrder::Greedy).unwrap();
            let b = contract_skeletal_with(g, &f, ContractionOrder::Sequential).unwrap();
            assert!(max_diff(&a.matrix, &b.matrix) < 1e-12, "{}", e.id);
            assert!(a.leakage() < 1e-12, "{}", e.id);
        }
    }

    #[test]
    fn rejects_route_violation() {
        let g = catalog::grandfather().graph;
        let x = CMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let f = catalog::grandfather_fleshing(&g, &x);
        assert!(matches!(contract_skeletal(&g, &f), Err(TensorError::RouteViolation(_))));
    }
}
