//! Reference fleshings of the catalog graphs, with pluggable party operations.

use num_complex::Complex64 as C64;

use super::THREE_SWITCH_ORDERS;
use crate::graph::{Arrow, RoutedGraph};
use crate::tensor::{arrow_space, node_spaces, CMatrix, Fleshing, SectoredMap, TensorError, TensorResult};

const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Operation applied by a party to its message, `C^msg ⊗ C^anc_in → C^msg ⊗ C^anc_out`
/// with the ancilla least significant.
#[derive(Debug, Clone, PartialEq)]
pub struct PartyOp {
    pub matrix: CMatrix,
    pub anc_in: usize,
    pub anc_out: usize,
}

impl PartyOp {
    pub fn unitary(u: CMatrix) -> Self {
        Self { matrix: u, anc_in: 1, anc_out: 1 }
    }

    pub fn identity(d: usize) -> Self {
        Self::unitary(CMatrix::identity(d, d))
    }

    pub fn pauli_z() -> Self {
        Self::unitary(CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![ONE, -ONE])))
    }

    /// Sends the message out through the ancilla and the ancilla into the message.
    pub fn swap(d: usize) -> Self {
        let mut m = CMatrix::zeros(d * d, d * d);
        for a in 0..d {
            for b in 0..d {
                m[(b * d + a, a * d + b)] = ONE;
            }
        }
        Self { matrix: m, anc_in: d, anc_out: d }
    }

    fn msg_dim(&self) -> Option<usize> {
        let (r, c) = self.matrix.shape();
        (r % self.anc_out == 0 && c % self.anc_in == 0 && r / self.anc_out == c / self.anc_in).then(|| r / self.anc_out)
    }
}

/// Value label whose coordinates are all zero (or the only label).
fn rest_label(a: &Arrow) -> &str {
    if a.values.len() == 1 {
        return a.values.label(0);
    }
    let v = a.coords.iter().position(|c| !c.is_empty() && c.iter().all(|x| x == "0"));
    a.values.label(v.unwrap_or_else(|| panic!("arrow `{}` has no all-zero value", a.id)) as u32)
}

/// Flat index in the product of `arrows`; `parts` lists (arrow, label, local index)
/// and every other arrow sits in its all-zero sector.
fn at(g: &RoutedGraph, arrows: &[usize], parts: &[(&str, &str, usize)]) -> usize {
    debug_assert!(parts.iter().all(|p| arrows.iter().any(|&a| g.arrows()[a].id == p.0)), "{parts:?}");
    let spec: Vec<(&str, usize)> = arrows
        .iter()
        .map(|&a| {
            let ar = &g.arrows()[a];
            match parts.iter().find(|p| p.0 == ar.id) {
                Some(p) => (p.1, p.2),
                None => (rest_label(ar), 0),
            }
        })
        .collect();
    arrow_space(g, arrows).index(&spec)
}

fn node(g: &RoutedGraph, id: &str) -> usize {
    g.node_index(id).unwrap_or_else(|| panic!("catalog node `{id}`"))
}

/// Partial isometry sending basis column `c` to basis row `r` for each pair.
fn wire(g: &RoutedGraph, n: usize, pairs: &[(usize, usize)]) -> SectoredMap {
    let (ins, outs) = node_spaces(g, n);
    let mut m = SectoredMap::zeros(ins, outs, 1, 1, g.route(n).rel.clone());
    for &(c, r) in pairs {
        m.matrix[(r, c)] = ONE;
    }
    m
}

/// `W (op ⊗ I_rest) V`: `enc` lists (column, message, rest) for the encoder and
/// `dec(message, rest)` gives the output row.
fn sandwich(
    g: &RoutedGraph,
    n: usize,
    msg: usize,
    enc: &[(usize, usize, usize)],
    dec: impl Fn(usize, usize) -> usize,
    op: &PartyOp,
) -> TensorResult<SectoredMap> {
    if op.msg_dim() != Some(msg) {
        return Err(TensorError::ShapeMismatch(format!(
            "party `{}` acts on dimension {msg}, operation is {:?}",
            g.nodes()[n].id,
            op.matrix.shape()
        )));
    }
    let (ins, outs) = node_spaces(g, n);
    let (ai, ao) = (op.anc_in, op.anc_out);
    let mut m = SectoredMap::zeros(ins, outs, ai, ao, g.route(n).rel.clone());
    for &(col, a, x) in enc {
        for b in 0..msg {
            let row = dec(b, x);
            for i in 0..ai {
                for o in 0..ao {
                    m.matrix[(row * ao + o, col * ai + i)] = op.matrix[(b * ao + o, a * ai + i)];
                }
            }
        }
    }
    Ok(m)
}

fn party_ops<'a>(g: &RoutedGraph, ops: &'a [PartyOp]) -> TensorResult<Vec<Option<&'a PartyOp>>> {
    let parties = g.nodes().iter().filter(|n| n.party).count();
    if ops.len() != parties {
        return Err(TensorError::ShapeMismatch(format!("{parties} parties, {} operations", ops.len())));
    }
    let mut it = ops.iter();
    Ok(g.nodes().iter().map(|n| if n.party { it.next() } else { None }).collect())
}

/// Each party's operation is its whole node map.
pub(super) fn direct(g: &RoutedGraph, ops: &[PartyOp]) -> TensorResult<Fleshing> {
    let per = party_ops(g, ops)?;
    let maps = (0..g.nodes().len())
        .map(|n| {
            let op = per[n].ok_or_else(|| TensorError::ShapeMismatch(format!("node `{}` is not a party", g.nodes()[n].id)))?;
            let (ins, outs) = node_spaces(g, n);
            SectoredMap::new(op.matrix.clone(), ins, outs, op.anc_in, op.anc_out, g.route(n).rel.clone())
        })
        .collect::<TensorResult<_>>()?;
    Ok(Fleshing { maps })
}

/// Chain with `u` at A and `v` at B; contracts to `v u`.
pub fn chain_fleshing(g: &RoutedGraph, u: &CMatrix, v: &CMatrix) -> Fleshing {
    direct(g, &[PartyOp::unitary(u.clone()), PartyOp::unitary(v.clone())]).expect("chain shapes")
}

/// Grandfather loop with `op` placed directly on the looping qubit.
pub fn grandfather_fleshing(g: &RoutedGraph, op: &CMatrix) -> Fleshing {
    direct(g, &[PartyOp::unitary(op.clone())]).expect("qubit operation")
}

pub(super) fn switch(g: &RoutedGraph, d: usize, ops: &[PartyOp]) -> TensorResult<Fleshing> {
    let per = party_ops(g, ops)?;
    let (p, a, b, f) = (node(g, "P"), node(g, "A"), node(g, "B"), node(g, "F"));
    let r = |n: usize| (&g.route(n).inputs, &g.route(n).outputs);
    let mut maps = Vec::with_capacity(4);

    let (_, po) = r(p);
    let mut pairs = Vec::new();
    for t in 0..d {
        pairs.push((t, at(g, po, &[("i", "0", t), ("j", "0", 0)])));
        pairs.push((d + t, at(g, po, &[("i", "1", 0), ("j", "1", t)])));
    }
    maps.push(wire(g, p, &pairs));

    // Sector 0 runs A then B, sector 1 runs B then A; the rest register holds the sector.
    let (ai, ao) = r(a);
    let enc: Vec<_> = (0..d)
        .flat_map(|t| [(at(g, ai, &[("i", "0", t), ("k", "0", 0)]), t, 0), (at(g, ai, &[("i", "1", 0), ("k", "1", t)]), t, 1)])
        .collect();
    let dec = |v: usize, x: usize| match x {
        0 => at(g, ao, &[("l", "0", v), ("m", "0", 0)]),
        _ => at(g, ao, &[("l", "1", 0), ("m", "1", v)]),
    };
    maps.push(sandwich(g, a, d, &enc, dec, per[a].expect("A is a party"))?);

    let (bi, bo) = r(b);
    let enc: Vec<_> = (0..d)
        .flat_map(|t| [(at(g, bi, &[("j", "0", 0), ("l", "0", t)]), t, 0), (at(g, bi, &[("j", "1", t), ("l", "1", 0)]), t, 1)])
        .collect();
    let dec = |v: usize, x: usize| match x {
        0 => at(g, bo, &[("k", "0", 0), ("n", "0", v)]),
        _ => at(g, bo, &[("k", "1", v), ("n", "1", 0)]),
    };
    maps.push(sandwich(g, b, d, &enc, dec, per[b].expect("B is a party"))?);

    let (fi, _) = r(f);
    let mut pairs = Vec::new();
    for t in 0..d {
        pairs.push((at(g, fi, &[("m", "0", 0), ("n", "0", t)]), t));
        pairs.push((at(g, fi, &[("m", "1", t), ("n", "1", 0)]), d + t));
    }
    maps.push(wire(g, f, &pairs));
    order_maps(g, &[p, a, b, f], maps)
}

/// Reorders maps built in `order` into node order.
fn order_maps(g: &RoutedGraph, order: &[usize], maps: Vec<SectoredMap>) -> TensorResult<Fleshing> {
    let mut slots: Vec<Option<SectoredMap>> = vec![None; g.nodes().len()];
    for (&n, m) in order.iter().zip(maps) {
        slots[n] = Some(m);
    }
    Ok(Fleshing { maps: slots.into_iter().map(|m| m.expect("every node fleshed")).collect() })
}

/// Arrow `from → to` used by order index `o`, with the label setting `o`.
fn carrier<'g>(g: &'g RoutedGraph, from: &str, to: &str, o: &str) -> (&'g str, &'static str) {
    let (f, t) = (node(g, from), node(g, to));
    let a = g
        .arrows()
        .iter()
        .find(|a| a.tail == Some(f) && a.head == Some(t) && a.index.iter().any(|i| i == o))
        .unwrap_or_else(|| panic!("no arrow {from}→{to} carries `{o}`"));
    (a.id.as_str(), if a.index[0] == o { "10" } else { "01" })
}

pub(super) fn three_switch(g: &RoutedGraph, d: usize, ops: &[PartyOp]) -> TensorResult<Fleshing> {
    let per = party_ops(g, ops)?;
    let n_nodes = g.nodes().len();
    let mut maps: Vec<Option<SectoredMap>> = vec![None; n_nodes];

    let p = node(g, "P");
    let po = &g.route(p).outputs;
    let mut pairs = Vec::new();
    for (c, (o, seq)) in THREE_SWITCH_ORDERS.iter().enumerate() {
        let (arr, lab) = carrier(g, "P", seq[0], o);
        for t in 0..d {
            pairs.push((c * d + t, at(g, po, &[(arr, lab, t)])));
        }
    }
    maps[p] = Some(wire(g, p, &pairs));

    for agent in ["A", "B", "C"] {
        let n = node(g, agent);
        let (ins, outs) = (&g.route(n).inputs, &g.route(n).outputs);
        let mut enc = Vec::new();
        let mut out_of = Vec::new();
        for (c, (o, seq)) in THREE_SWITCH_ORDERS.iter().enumerate() {
            let k = seq.iter().position(|s| *s == agent).expect("agent in every order");
            let prev = if k == 0 { "P" } else { seq[k - 1] };
            let next = if k == 2 { "F" } else { seq[k + 1] };
            let (ia, il) = carrier(g, prev, agent, o);
            for t in 0..d {
                enc.push((at(g, ins, &[(ia, il, t)]), t, c));
            }
            out_of.push(carrier(g, agent, next, o));
        }
        let dec = |v: usize, c: usize| at(g, outs, &[(out_of[c].0, out_of[c].1, v)]);
        maps[n] = Some(sandwich(g, n, d, &enc, dec, per[n].expect("agents are parties"))?);
    }

    let f = node(g, "F");
    let fi = &g.route(f).inputs;
    let mut pairs = Vec::new();
    for (c, (o, seq)) in THREE_SWITCH_ORDERS.iter().enumerate() {
        let (arr, lab) = carrier(g, seq[2], "F", o);
        for t in 0..d {
            pairs.push((at(g, fi, &[(arr, lab, t)]), c * d + t));
        }
    }
    maps[f] = Some(wire(g, f, &pairs));
    Ok(Fleshing { maps: maps.into_iter().map(|m| m.expect("every node fleshed")).collect() })
}

/// Per agent: routed input, the two agent inputs (x, y), the matching outputs,
/// and the two wires to F.
const GRENOBLE_AGENTS: [(&str, [&str; 7]); 3] = [
    ("A", ["ra", "ca", "ba", "ab", "ac", "af", "ad"]),
    ("B", ["sb", "ab", "cb", "bc", "ba", "bf", "be"]),
    ("C", ["tc", "bc", "ac", "ca", "cb", "cf", "ck"]),
];

pub(super) fn grenoble(g: &RoutedGraph, ops: &[PartyOp]) -> TensorResult<Fleshing> {
    let per = party_ops(g, ops)?;
    let mut maps: Vec<Option<SectoredMap>> = vec![None; g.nodes().len()];

    let p = node(g, "P");
    let po = &g.route(p).outputs;
    let mut pairs = Vec::new();
    for (c, (_, w)) in GRENOBLE_AGENTS.iter().enumerate() {
        for t in 0..2 {
            pairs.push((c * 2 + t, at(g, po, &[(w[0], "1", t)])));
        }
    }
    maps[p] = Some(wire(g, p, &pairs));

    // Rest register q·3 + r: q is the agent's position (first, second via x,
    // second via y, third), r keeps the incoming bit of a third agent.
    for (agent, w) in GRENOBLE_AGENTS {
        let [r_in, x_in, y_in, x_out, y_out, r_out, d_out] = w;
        let n = node(g, agent);
        let (ins, outs) = (&g.route(n).inputs, &g.route(n).outputs);
        let mut enc = Vec::new();
        for t in 0..2 {
            enc.push((at(g, ins, &[(r_in, "1", t)]), t, 0));
        }
        enc.push((at(g, ins, &[(x_in, "10", 0)]), 0, 3));
        enc.push((at(g, ins, &[(y_in, "10", 0)]), 1, 6));
        for x in 0..2 {
            enc.push((at(g, ins, &[(x_in, "01", x)]), x, 9 + 1 + x));
            enc.push((at(g, ins, &[(y_in, "01", x)]), x, 9 + 2 - x));
        }
        let dec = |v: usize, rest: usize| match rest / 3 {
            0 => at(g, outs, &[(if v == 0 { x_out } else { y_out }, "10", 0)]),
            1 => at(g, outs, &[(x_out, "01", v)]),
            2 => at(g, outs, &[(y_out, "01", v)]),
            _ => at(g, outs, &[(r_out, "1", v), (d_out, "1", rest % 3 - 1)]),
        };
        maps[n] = Some(sandwich(g, n, 2, &enc, dec, per[n].expect("agents are parties"))?);
    }

    let f = node(g, "F");
    let fi = &g.route(f).inputs;
    let mut pairs = Vec::new();
    for (c, (_, w)) in GRENOBLE_AGENTS.iter().enumerate() {
        for x in 0..2 {
            for t in 0..2 {
                pairs.push((at(g, fi, &[(w[5], "1", t), (w[6], "1", x)]), (x * 3 + c) * 2 + t));
            }
        }
    }
    maps[f] = Some(wire(g, f, &pairs));
    Ok(Fleshing { maps: maps.into_iter().map(|m| m.expect("every node fleshed")).collect() })
}

/// Per agent: past input, incoming result bit, two votes, result copy to F.
const LUGANO_AGENTS: [(&str, [&str; 5]); 3] = [
    ("A", ["pa", "l", "i1", "i2", "la"]),
    ("B", ["pb", "m", "j1", "j2", "mb"]),
    ("C", ["pc", "n", "k1", "k2", "nc"]),
];

/// Per station: the two votes (in product order), the result, the record to F.
const LUGANO_STATIONS: [(&str, [&str; 4]); 3] = [
    ("X", ["k2", "j1", "l", "xf"]),
    ("Y", ["i2", "k1", "m", "yf"]),
    ("Z", ["i1", "j2", "n", "zf"]),
];

const BIT: [&str; 2] = ["0", "1"];

pub(super) fn lugano(g: &RoutedGraph, ops: &[PartyOp]) -> TensorResult<Fleshing> {
    let per = party_ops(g, ops)?;
    let mut maps: Vec<Option<SectoredMap>> = vec![None; g.nodes().len()];

    // The agent's message is its past qubit flipped by the incoming bit; the
    // measured message picks the vote.
    for (agent, [p_in, r_in, v1, v2, r_out]) in LUGANO_AGENTS {
        let n = node(g, agent);
        let (ins, outs) = (&g.route(n).inputs, &g.route(n).outputs);
        let mut enc = Vec::new();
        for x in 0..2 {
            for lv in 0..2 {
                enc.push((at(g, ins, &[(p_in, "*", x), (r_in, BIT[lv], 0)]), x ^ lv, lv));
            }
        }
        let dec = |q: usize, lv: usize| at(g, outs, &[(v1, BIT[(q == 0) as usize], 0), (v2, BIT[(q == 1) as usize], 0), (r_out, BIT[lv], 0)]);
        maps[n] = Some(sandwich(g, n, 2, &enc, dec, per[n].expect("agents are parties"))?);
    }

    for (station, [u, v, r, rec]) in LUGANO_STATIONS {
        let n = node(g, station);
        let (ins, outs) = (&g.route(n).inputs, &g.route(n).outputs);
        let mut pairs = Vec::new();
        for x in 0..2 {
            for y in 0..2 {
                let label = format!("{x}{y}");
                pairs.push((at(g, ins, &[(u, BIT[x], 0), (v, BIT[y], 0)]), at(g, outs, &[(r, BIT[x * y], 0), (rec, &label, 0)])));
            }
        }
        maps[n] = Some(wire(g, n, &pairs));
    }

    // F embeds its practical inputs, in sorted order, into the output.
    let f = node(g, "F");
    let (ins, _) = node_spaces(g, f);
    let practical = g.route(f).rel.practical_inputs();
    let pairs: Vec<(usize, usize)> = (0..ins.dim())
        .filter_map(|c| practical.iter().position(|t| *t == ins.tuple(c)).map(|row| (c, row)))
        .collect();
    maps[f] = Some(wire(g, f, &pairs));
    Ok(Fleshing { maps: maps.into_iter().map(|m| m.expect("every node fleshed")).collect() })
}
