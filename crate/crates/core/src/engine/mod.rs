//! Greedy split induction.
//!
//! An optimal set of (n+1)-means is obtained from an optimal set of n-means by
//! replacing one element of maximal error with its two children:
//!
//! * `a(ω)` becomes `a(ω1)` and `a(ω1, ∞)`;
//! * `a(ω, ∞)` becomes `a(ω⁻(ω_last+1))` and `a(ω⁻(ω_last+1), ∞)`.
//!
//! The base case is `α_1 = {a(∅)}` whose error is the variance. Errors are exact
//! rationals, so ties between nodes are detected exactly; ties are what make the
//! collection `C_n` of optimal sets larger than one.

mod enumerate;
mod json;
mod validate;

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::measure::{self, Region, RegionKind};
use crate::rational::Rational;

pub use enumerate::{
    count_optimal_sets, enumerate_optimal_sets, transition_graph, TransitionGraph, VertexId, DEFAULT_ENUMERATION_CAP,
    DEFAULT_GRAPH_CAP,
};
pub use json::{NodeJson, QuantizerSetJson};
pub use validate::{branch_decomposition, validate_structure, BranchDecomposition, ValidationReport};

/// One element of a quantizer: the centroid of a region, with its exact error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub region: Region,
    pub error: Rational,
    pub centroid: Rational,
    /// Closure of the region, `(left, right)`.
    pub interval: (Rational, Rational),
}

impl Node {
    pub fn new(region: Region) -> Result<Node> {
        let error = measure::node_error(&region)?;
        let centroid = measure::centroid(&region)?;
        let interval = measure::region_interval(&region)?;
        Ok(Node {
            region,
            error,
            centroid,
            interval,
        })
    }

    pub fn root() -> Node {
        Node::new(Region::root()).expect("root region is valid")
    }

    pub fn left(&self) -> &Rational {
        &self.interval.0
    }

    pub fn right(&self) -> &Rational {
        &self.interval.1
    }

    pub fn mass(&self) -> Rational {
        measure::region_mass(&self.region).expect("node regions are valid")
    }
}

/// The two nodes that replace `node` when it is split. Both lie inside the
/// parent's region, in left-to-right order.
pub fn children(node: &Node) -> Result<(Node, Node)> {
    let w = &node.region.word;
    let next = match node.region.kind {
        RegionKind::Closed => w.child(1)?,
        RegionKind::Tail => w.successor()?,
    };
    Ok((
        Node::new(Region::closed(next.clone()))?,
        Node::new(Region::tail(next)?)?,
    ))
}

/// A finite set of nodes sorted by the left endpoint of their regions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizerSet {
    nodes: Vec<Node>,
    v: Rational,
}

impl QuantizerSet {
    /// Sorts the nodes and sums their errors.
    pub fn from_nodes(mut nodes: Vec<Node>) -> QuantizerSet {
        nodes.sort_by(|a, b| a.left().cmp(b.left()).then_with(|| a.region.cmp(&b.region)));
        let v = nodes.iter().fold(Rational::zero(), |acc, n| acc + &n.error);
        QuantizerSet { nodes, v }
    }

    pub fn from_regions<I: IntoIterator<Item = Region>>(regions: I) -> Result<QuantizerSet> {
        let nodes = regions.into_iter().map(Node::new).collect::<Result<Vec<_>>>()?;
        Ok(Self::from_nodes(nodes))
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Quantization error: the sum of node errors.
    pub fn v(&self) -> &Rational {
        &self.v
    }

    pub fn centroids(&self) -> Vec<Rational> {
        self.nodes.iter().map(|n| n.centroid.clone()).collect()
    }

    /// Node identities in canonical order; two sets are equal iff their keys are.
    pub fn key(&self) -> Vec<Region> {
        self.nodes.iter().map(|n| n.region.clone()).collect()
    }

    /// Nodes of maximal error, `W(α)`.
    pub fn max_error_nodes(&self) -> Vec<usize> {
        let Some(max) = self.nodes.iter().map(|n| &n.error).max() else {
            return Vec::new();
        };
        (0..self.nodes.len()).filter(|&i| self.nodes[i].error == *max).collect()
    }

    /// The set obtained by splitting the node at `index`.
    pub fn split_at(&self, index: usize) -> Result<QuantizerSet> {
        let parent = self
            .nodes
            .get(index)
            .ok_or_else(|| Error::InvalidArgument(format!("no node at index {index}")))?;
        let (a, b) = children(parent)?;
        let v = &self.v - &parent.error + &a.error + &b.error;
        let mut nodes = Vec::with_capacity(self.nodes.len() + 1);
        nodes.extend_from_slice(&self.nodes[..index]);
        nodes.push(a);
        nodes.push(b);
        nodes.extend_from_slice(&self.nodes[index + 1..]);
        Ok(QuantizerSet { nodes, v })
    }

    /// Order used to number the members of one layer of `C_n`.
    pub fn canonical_cmp(&self, other: &QuantizerSet) -> Ordering {
        let lhs = self.nodes.iter().map(|n| (n.left(), &n.region));
        let rhs = other.nodes.iter().map(|n| (n.left(), &n.region));
        lhs.cmp(rhs)
    }
}

/// Heap entry ordered by error, then by smaller left endpoint, then by identity.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Pending(Node);

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .error
            .cmp(&other.0.error)
            .then_with(|| other.0.left().cmp(self.0.left()))
            .then_with(|| other.0.region.cmp(&self.0.region))
    }
}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Running state of the greedy induction: a max-heap of current nodes by error.
#[derive(Debug, Clone)]
pub struct GenerationState {
    heap: BinaryHeap<Pending>,
    v: Rational,
    split_errors: Vec<Rational>,
}

impl Default for GenerationState {
    fn default() -> Self {
        Self::new()
    }
}

impl GenerationState {
    /// Starts from `α_1 = {a(∅)}`.
    pub fn new() -> Self {
        let root = Node::root();
        let v = root.error.clone();
        let mut heap = BinaryHeap::new();
        heap.push(Pending(root));
        GenerationState {
            heap,
            v,
            split_errors: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.heap.len()
    }

    pub fn v(&self) -> &Rational {
        &self.v
    }

    /// Errors of the split nodes, in split order. Nonincreasing.
    pub fn split_errors(&self) -> &[Rational] {
        &self.split_errors
    }

    pub fn peek_max(&self) -> Option<&Node> {
        self.heap.peek().map(|p| &p.0)
    }

    /// Splits a node of maximal error, breaking ties by smallest left endpoint.
    /// Returns the node that was split.
    pub fn split(&mut self) -> Result<Node> {
        let Pending(node) = self.heap.pop().expect("state is never empty");
        let (a, b) = children(&node)?;
        self.v = &self.v - &node.error + &a.error + &b.error;
        self.heap.push(Pending(a));
        self.heap.push(Pending(b));
        self.split_errors.push(node.error.clone());
        Ok(node)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.heap.iter().map(|p| &p.0)
    }

    pub fn to_set(&self) -> QuantizerSet {
        let set = QuantizerSet::from_nodes(self.nodes().cloned().collect());
        debug_assert_eq!(set.v, self.v);
        set
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidN { n, min: 1 });
    }
    Ok(())
}

/// Runs the greedy induction up to `n` nodes.
pub fn generate(n: usize) -> Result<GenerationState> {
    check_n(n)?;
    let mut state = GenerationState::new();
    while state.n() < n {
        state.split()?;
    }
    Ok(state)
}

/// The canonical optimal set of n-means (a member of `C_n`).
pub fn optimal_set(n: usize) -> Result<QuantizerSet> {
    Ok(generate(n)?.to_set())
}

/// `V_n`, the n-th quantization error.
pub fn quantization_error(n: usize) -> Result<BigRational> {
    Ok(generate(n)?.v().clone())
}
