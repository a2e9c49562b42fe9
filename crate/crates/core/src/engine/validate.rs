use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use super::{quantization_error, QuantizerSet};
use crate::error::{Error, Result};
use crate::measure::{self, constants, Region, RegionKind};
use crate::rational::Rational;
use crate::word::Word;

/// Outcome of [`validate_structure`]: the first violated predicate, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub failure: Option<(&'static str, String)>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }

    fn fail(predicate: &'static str, detail: String) -> Self {
        ValidationReport {
            failure: Some((predicate, detail)),
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.failure {
            None => f.write_str("PASS"),
            Some((predicate, detail)) => write!(f, "FAIL {predicate}: {detail}"),
        }
    }
}

/// Exact structural checks on a quantizer: every centroid sits in its own region,
/// centroids increase, each Voronoi boundary (midpoint of neighbouring centroids)
/// falls in the closed gap between neighbouring regions, masses sum to one, the
/// total expectation is the mean, and the cached error total is consistent.
pub fn validate_structure(q: &QuantizerSet) -> ValidationReport {
    let nodes = q.nodes();
    if nodes.is_empty() {
        return ValidationReport::fail("nonempty", "no nodes".into());
    }
    for node in nodes {
        if node.centroid < *node.left() || node.centroid > *node.right() {
            return ValidationReport::fail(
                "centroid outside region",
                format!(
                    "{} at {} not in [{}, {}]",
                    node.region,
                    node.centroid,
                    node.left(),
                    node.right()
                ),
            );
        }
    }
    for node in nodes {
        let consistent = measure::centroid(&node.region).ok() == Some(node.centroid.clone())
            && measure::node_error(&node.region).ok() == Some(node.error.clone())
            && measure::region_interval(&node.region).ok() == Some(node.interval.clone());
        if !consistent {
            return ValidationReport::fail("node cache", format!("{} does not match its region", node.region));
        }
    }
    let two = Rational::from_integer(2.into());
    for pair in nodes.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if a.centroid >= b.centroid {
            return ValidationReport::fail("centroids increasing", format!("{} then {}", a.region, b.region));
        }
        if a.right() > b.left() {
            return ValidationReport::fail("regions disjoint", format!("{} overlaps {}", a.region, b.region));
        }
        let mid = (&a.centroid + &b.centroid) / &two;
        if mid < *a.right() || mid > *b.left() {
            return ValidationReport::fail(
                "voronoi boundary in gap",
                format!(
                    "midpoint {mid} of {} and {} outside [{}, {}]",
                    a.region,
                    b.region,
                    a.right(),
                    b.left()
                ),
            );
        }
    }
    let mut mass = Rational::zero();
    let mut moment = Rational::zero();
    let mut v = Rational::zero();
    for node in nodes {
        let m = node.mass();
        moment += &m * &node.centroid;
        mass += m;
        v += &node.error;
    }
    if !mass.is_one() {
        return ValidationReport::fail("masses sum to one", format!("total mass {mass}"));
    }
    if moment != constants().mean {
        return ValidationReport::fail("total expectation", format!("Σ mass·centroid = {moment}"));
    }
    if v != *q.v() {
        return ValidationReport::fail("error total", format!("Σ errors = {v}, recorded {}", q.v()));
    }
    ValidationReport { failure: None }
}

/// Top-level branch structure of an optimal set of n ≥ 2 means: `counts[j-1]`
/// nodes inside `J_j` for `j = 1..=k`, plus the single node `a(k, ∞)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchDecomposition {
    pub k: u64,
    pub counts: Vec<usize>,
}

/// Splits `q` into its first-level branches and checks
/// `V_n = Σ_j p_j s_j² V_{n_j} + E(a(k, ∞))`, evaluating each `V_{n_j}` by
/// running the engine again, and checks that each branch pulled back through
/// `S_j⁻¹` has error exactly `V_{n_j}`.
pub fn branch_decomposition(q: &QuantizerSet) -> Result<BranchDecomposition> {
    let bad = |msg: String| Err(Error::Decomposition(msg));
    let mut top_tail = None;
    let mut branches: BTreeMap<u64, Vec<Region>> = BTreeMap::new();
    for node in q.nodes() {
        let r = &node.region;
        let Some(first) = r.word.first() else {
            return bad("set contains a(∅)".into());
        };
        if r.kind == RegionKind::Tail && r.word.len() == 1 {
            if top_tail.replace(first).is_some() {
                return bad("more than one first-level tail".into());
            }
            continue;
        }
        let pulled = Region {
            kind: r.kind,
            word: r.word.suffix(),
        };
        branches.entry(first).or_default().push(pulled);
    }
    let Some(k) = top_tail else {
        return bad("no first-level tail".into());
    };
    let mut counts = Vec::with_capacity(k as usize);
    for j in 1..=k {
        match branches.get(&j) {
            Some(nodes) => counts.push(nodes.len()),
            None => return bad(format!("no node in J_{j} although the tail starts after J_{k}")),
        }
    }
    if let Some((&j, _)) = branches.range(k + 1..).next() {
        return bad(format!("node in J_{j} lies inside the tail after J_{k}"));
    }
    if counts.iter().sum::<usize>() + 1 != q.n() {
        return bad("branch counts do not add up".into());
    }

    let variance = &constants().variance;
    let mut total = measure::node_error(&Region::tail(Word::letter(k)?)?)?;
    for (j, nodes) in branches {
        let unit = measure::node_error(&Region::closed(Word::letter(j)?))? / variance;
        let v_branch = quantization_error(nodes.len())?;
        let pulled = QuantizerSet::from_regions(nodes)?;
        if *pulled.v() != v_branch {
            return bad(format!("branch J_{j} is not optimal: {} vs {}", pulled.v(), v_branch));
        }
        total += unit * v_branch;
    }
    if total != *q.v() {
        return bad(format!("recursive error {} differs from {}", total, q.v()));
    }
    Ok(BranchDecomposition { k, counts })
}
