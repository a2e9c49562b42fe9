//! Exhaustive search over split trees.
//!
//! Every candidate quantizer is the frontier left after splitting an
//! ancestor-closed set of nodes of the binary split tree rooted at `a(∅)`.
//! The search visits all such sets with `n − 1` splits, not only the ones the
//! greedy rule reaches, and keeps the frontier of least exact error.

use num_traits::Zero;

use crate::engine::{children, Node, QuantizerSet};
use crate::error::{Error, Result};
use crate::rational::Rational;

pub const DEFAULT_SEARCH_CAP: usize = 50_000_000;
pub const MAX_EXHAUSTIVE_N: usize = 13;

#[derive(Debug, Clone)]
pub struct ExhaustiveResult {
    pub v: Rational,
    pub frontier: QuantizerSet,
    /// Search states visited.
    pub explored: usize,
}

struct Search {
    cap: usize,
    explored: usize,
    best: Option<(Rational, Vec<Node>)>,
    queue: Vec<Node>,
    kept: Vec<Node>,
}

impl Search {
    /// Decides `queue[pos]`: split it (its children join the queue) or keep it.
    /// Each ancestor-closed split set is produced by exactly one sequence of decisions.
    fn visit(&mut self, pos: usize, splits_left: usize, committed: Rational) -> Result<()> {
        self.explored += 1;
        if self.explored > self.cap {
            return Err(Error::SearchCapExceeded { cap: self.cap });
        }
        // kept nodes stay in the final frontier, so `committed` only grows
        if let Some((best, _)) = &self.best {
            if committed >= *best {
                return Ok(());
            }
        }
        if splits_left == 0 {
            let rest = &self.queue[pos..];
            let v = rest.iter().fold(committed, |acc, n| acc + &n.error);
            if self.best.as_ref().is_none_or(|(b, _)| v < *b) {
                let frontier = self.kept.iter().chain(rest).cloned().collect();
                self.best = Some((v, frontier));
            }
            return Ok(());
        }
        if pos == self.queue.len() {
            return Ok(());
        }
        let node = self.queue[pos].clone();

        let (a, b) = children(&node)?;
        self.queue.push(a);
        self.queue.push(b);
        self.visit(pos + 1, splits_left - 1, committed.clone())?;
        self.queue.truncate(self.queue.len() - 2);

        let committed = committed + &node.error;
        self.kept.push(node);
        self.visit(pos + 1, splits_left, committed)?;
        self.kept.pop();
        Ok(())
    }
}

/// Minimum exact error over all frontiers with `n` nodes, for `2 ≤ n ≤ 13`.
/// Branches whose kept nodes already reach the best complete error are cut.
pub fn exhaustive_min(n: usize, cap: usize) -> Result<ExhaustiveResult> {
    if !(2..=MAX_EXHAUSTIVE_N).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "exhaustive search needs 2 <= n <= {MAX_EXHAUSTIVE_N}, got {n}"
        )));
    }
    let mut search = Search {
        cap,
        explored: 0,
        best: None,
        queue: vec![Node::root()],
        kept: Vec::new(),
    };
    search.visit(0, n - 1, Rational::zero())?;
    let (v, nodes) = search.best.expect("a chain of splits always exists");
    Ok(ExhaustiveResult {
        v,
        frontier: QuantizerSet::from_nodes(nodes),
        explored: search.explored,
    })
}
