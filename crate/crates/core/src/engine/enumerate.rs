use std::collections::{BTreeSet, HashMap};

use num_bigint::BigUint;
use serde_json::json;

use super::{generate, QuantizerSet};
use crate::error::{Error, Result};
use crate::measure::Region;
use crate::rational::to_fraction_string;

pub const DEFAULT_ENUMERATION_CAP: usize = 10_000;
pub const DEFAULT_GRAPH_CAP: usize = 1_000;

/// Successors of one layer: the next layer in canonical order, and for each
/// input set the indices of the sets it produces.
fn next_layer(layer: &[QuantizerSet], k_next: usize, cap: usize) -> Result<(Vec<QuantizerSet>, Vec<Vec<usize>>)> {
    let mut seen: HashMap<Vec<Region>, usize> = HashMap::new();
    let mut sets = Vec::new();
    let mut raw_edges = Vec::with_capacity(layer.len());
    for alpha in layer {
        let mut out = Vec::new();
        for idx in alpha.max_error_nodes() {
            let beta = alpha.split_at(idx)?;
            let key = beta.key();
            let slot = match seen.get(&key) {
                Some(&slot) => slot,
                None => {
                    if sets.len() == cap {
                        return Err(Error::CapExceeded { k: k_next, cap });
                    }
                    seen.insert(key, sets.len());
                    sets.push(beta);
                    sets.len() - 1
                }
            };
            out.push(slot);
        }
        raw_edges.push(out);
    }

    let mut order: Vec<usize> = (0..sets.len()).collect();
    order.sort_by(|&a, &b| sets[a].canonical_cmp(&sets[b]));
    let mut rank = vec![0; sets.len()];
    for (pos, &old) in order.iter().enumerate() {
        rank[old] = pos;
    }
    let mut slots: Vec<Option<QuantizerSet>> = sets.into_iter().map(Some).collect();
    let sorted = order.iter().map(|&old| slots[old].take().unwrap()).collect();
    let edges = raw_edges
        .into_iter()
        .map(|out| {
            out.into_iter()
                .map(|old| rank[old])
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect()
        })
        .collect();
    Ok((sorted, edges))
}

fn check_cap(cap: usize) -> Result<()> {
    if cap < 1 {
        return Err(Error::InvalidArgument("cap must be at least 1".into()));
    }
    Ok(())
}

/// All members of `C_n`, in canonical order. Fails if any layer `C_k`, `k ≤ n`,
/// holds more than `cap` sets.
pub fn enumerate_optimal_sets(n: usize, cap: usize) -> Result<Vec<QuantizerSet>> {
    super::check_n(n)?;
    check_cap(cap)?;
    let mut layer = vec![QuantizerSet::from_nodes(vec![super::Node::root()])];
    for k in 2..=n {
        layer = next_layer(&layer, k, cap)?.0;
    }
    Ok(layer)
}

/// `card(C_n)` without enumeration.
///
/// The greedy split order is nonincreasing in error and a child always has
/// strictly smaller error than its parent, so two nodes of equal error are never
/// ancestor and descendant. Every optimal set therefore splits all nodes of error
/// above the last split error `t`, plus any `r` of the `m` nodes of error exactly `t`.
pub fn count_optimal_sets(n: usize) -> Result<BigUint> {
    let state = generate(n)?;
    let splits = state.split_errors();
    let Some(t) = splits.last() else {
        return Ok(BigUint::from(1u32));
    };
    let r = splits.iter().rev().take_while(|e| *e == t).count();
    let unsplit_ties = state.nodes().filter(|node| node.error == *t).count();
    let m = unsplit_ties + r;
    Ok(num_integer::binomial(BigUint::from(m), BigUint::from(r)))
}

/// Vertex `(n, index)`: the `index`-th member (0-based, canonical order) of `C_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId {
    pub n: usize,
    pub index: usize,
}

impl VertexId {
    pub fn label(&self) -> String {
        format!("a_{{{},{}}}", self.n, self.index + 1)
    }
}

/// Layered DAG of optimal sets: `α → β` when `β` is obtained from `α` by one split.
#[derive(Debug, Clone)]
pub struct TransitionGraph {
    pub n_lo: usize,
    pub layers: Vec<Vec<QuantizerSet>>,
    pub edges: Vec<(VertexId, VertexId)>,
}

impl TransitionGraph {
    pub fn n_hi(&self) -> usize {
        self.n_lo + self.layers.len() - 1
    }

    pub fn layer(&self, n: usize) -> &[QuantizerSet] {
        &self.layers[n - self.n_lo]
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(Vec::len).collect()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.layers.iter().enumerate().flat_map(move |(i, l)| {
            (0..l.len()).map(move |index| VertexId {
                n: self.n_lo + i,
                index,
            })
        })
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph optimal_sets {\n  rankdir=LR;\n  node [shape=plaintext];\n");
        for (i, layer) in self.layers.iter().enumerate() {
            let n = self.n_lo + i;
            out.push_str("  { rank=same;");
            for index in 0..layer.len() {
                out.push_str(&format!(" \"{}\";", VertexId { n, index }.label()));
            }
            out.push_str(" }\n");
        }
        for (a, b) in &self.edges {
            out.push_str(&format!("  \"{}\" -> \"{}\";\n", a.label(), b.label()));
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let layers: Vec<_> = self
            .layers
            .iter()
            .enumerate()
            .map(|(i, layer)| {
                let n = self.n_lo + i;
                let vertices: Vec<_> = layer
                    .iter()
                    .enumerate()
                    .map(|(index, set)| {
                        json!({
                            "id": VertexId { n, index }.label(),
                            "nodes": set.nodes().iter().map(|node| node.region.to_string()).collect::<Vec<_>>(),
                        })
                    })
                    .collect();
                json!({ "n": n, "V": to_fraction_string(layer[0].v()), "vertices": vertices })
            })
            .collect();
        let mut adjacency: Vec<(String, Vec<String>)> = self.vertices().map(|v| (v.label(), Vec::new())).collect();
        let pos: HashMap<VertexId, usize> = self.vertices().enumerate().map(|(i, v)| (v, i)).collect();
        for (a, b) in &self.edges {
            adjacency[pos[a]].1.push(b.label());
        }
        let adjacency: serde_json::Map<_, _> = adjacency.into_iter().map(|(k, v)| (k, json!(v))).collect();
        json!({ "layers": layers, "adjacency": adjacency })
    }
}

/// Transition graph between the layers `C_{n_lo} ..= C_{n_hi}`. Fails if any
/// layer up to `n_hi` holds more than `cap` sets or the exported graph has more
/// than `cap` vertices.
pub fn transition_graph(n_lo: usize, n_hi: usize, cap: usize) -> Result<TransitionGraph> {
    super::check_n(n_lo)?;
    check_cap(cap)?;
    if n_hi < n_lo {
        return Err(Error::InvalidArgument(format!("n_hi {n_hi} is below n_lo {n_lo}")));
    }
    let mut layer = vec![QuantizerSet::from_nodes(vec![super::Node::root()])];
    for k in 2..=n_lo {
        layer = next_layer(&layer, k, cap)?.0;
    }
    let mut total = layer.len();
    let mut layers = vec![layer];
    let mut edges = Vec::new();
    for k in n_lo + 1..=n_hi {
        let (next, out) = next_layer(layers.last().unwrap(), k, cap)?;
        total += next.len();
        if total > cap {
            return Err(Error::CapExceeded { k, cap });
        }
        for (index, targets) in out.into_iter().enumerate() {
            for t in targets {
                edges.push((VertexId { n: k - 1, index }, VertexId { n: k, index: t }));
            }
        }
        layers.push(next);
    }
    Ok(TransitionGraph { n_lo, layers, edges })
}
