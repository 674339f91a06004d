//! Presence-counter trees over dyadic rank intervals.
//!
//! Each element owns a complete binary tree with `N` leaves. A node covering
//! rank interval `[a, b]` counts how many absorbed rankings placed the
//! element inside `[a, b]`. Nodes are addressed by heap index (root `0`,
//! children `2i + 1` and `2i + 2`) but stored level-major: all elements'
//! depth-`d` nodes are contiguous, element by element, so the shallow levels
//! that every traversal touches stay in cache together.

use crate::error::{Error, Result};
use crate::universe::{ElementId, Ranking, Universe};

/// Presence counter; bounded by the number of absorbed rankings.
pub type Counter = u32;

/// Signed sum of presence counters.
pub type Score = i64;

/// Heap index of a node inside one tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LrNode(pub u32);

impl LrNode {
    pub const ROOT: LrNode = LrNode(0);

    #[inline]
    pub fn left(self) -> LrNode {
        LrNode(2 * self.0 + 1)
    }

    #[inline]
    pub fn right(self) -> LrNode {
        LrNode(2 * self.0 + 2)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Depth below the root.
    pub fn depth(self) -> u32 {
        (self.0 + 1).ilog2()
    }

    /// 1-based rank interval `[a, b]` covered in a tree with `padded` leaves.
    pub fn interval(self, padded: usize) -> (usize, usize) {
        let depth = self.depth();
        let width = padded >> depth;
        let offset = (self.0 + 1 - (1 << depth)) as usize;
        (offset * width + 1, (offset + 1) * width)
    }

    pub fn is_leaf(self, padded: usize) -> bool {
        self.index() >= padded - 1
    }
}

/// All presence trees of one universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LrForest {
    padded: usize,
    nodes: Vec<Counter>,
}

impl LrForest {
    /// One zeroed tree per element, dummies included.
    pub fn new(universe: Universe) -> Self {
        let padded = universe.padded();
        LrForest {
            padded,
            nodes: vec![0; padded * tree_size(padded)],
        }
    }

    pub(crate) fn from_counters(padded: usize, nodes: Vec<Counter>) -> Result<Self> {
        if !padded.is_power_of_two() || padded < 2 || nodes.len() != padded * tree_size(padded) {
            return Err(Error::Snapshot(
                "presence forest has the wrong shape".into(),
            ));
        }
        Ok(LrForest { padded, nodes })
    }

    pub(crate) fn counters(&self) -> &[Counter] {
        &self.nodes
    }

    pub fn padded(&self) -> usize {
        self.padded
    }

    /// Total node count across the forest: `N * (2N - 1)`.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn tree(&self, e: ElementId) -> LrTree<'_> {
        assert!(e.index() < self.padded, "{e} outside the forest");
        LrTree {
            padded: self.padded,
            element: e.index(),
            nodes: &self.nodes,
        }
    }

    /// Increments every node on the path from the root to leaf `rank`.
    pub fn update(&mut self, e: ElementId, rank: usize) -> Result<()> {
        let padded = self.padded;
        if rank == 0 || rank > padded {
            return Err(Error::RankOutOfRange { rank, padded });
        }
        if e.index() >= padded {
            return Err(Error::UniverseMismatch);
        }
        // depth d holds padded * 2^d counters; the leaf-ward path visits
        // offset (rank - 1) >> (levels - d) at each depth
        let levels = padded.trailing_zeros();
        let mut base = 0;
        for d in 0..=levels {
            let width = 1usize << d;
            let offset = (rank - 1) >> (levels - d);
            self.nodes[base + e.index() * width + offset] += 1;
            base += padded * width;
        }
        Ok(())
    }

    /// Updates every element's tree with its rank in `ranking`.
    pub fn absorb(&mut self, ranking: &Ranking) -> Result<()> {
        if ranking.len() != self.padded {
            return Err(Error::UniverseMismatch);
        }
        for (i, &e) in ranking.order().iter().enumerate() {
            self.update(e, i + 1)?;
        }
        Ok(())
    }

    /// Number of rankings absorbed so far.
    pub fn absorbed(&self) -> Counter {
        self.nodes[0]
    }

    pub(crate) fn heap_bytes(&self) -> usize {
        self.nodes.capacity() * std::mem::size_of::<Counter>()
    }
}

fn tree_size(padded: usize) -> usize {
    2 * padded - 1
}

/// Flat index of `node` of element `e`.
#[inline]
fn slot(padded: usize, e: usize, node: LrNode) -> usize {
    let depth = node.depth();
    let width = 1usize << depth;
    let offset = node.index() + 1 - width;
    padded * (width - 1) + e * width + offset
}

/// Read-only view of one element's tree.
#[derive(Debug, Clone, Copy)]
pub struct LrTree<'a> {
    padded: usize,
    element: usize,
    nodes: &'a [Counter],
}

impl<'a> LrTree<'a> {
    #[inline]
    pub fn presence(&self, node: LrNode) -> Counter {
        self.nodes[slot(self.padded, self.element, node)]
    }

    /// Presence in the left half of the full interval.
    #[inline]
    pub fn root_score(&self) -> Score {
        self.presence(LrNode::ROOT.left()) as Score
    }

    /// Score of `node` from its parent's score, where `node` is the
    /// non-leaf child just descended to.
    #[inline]
    pub fn child_score(&self, parent_score: Score, node: LrNode, went_left: bool) -> Score {
        if went_left {
            let score = parent_score - self.presence(node.right()) as Score;
            debug_assert!(score >= 0, "left descent produced negative score");
            score
        } else {
            parent_score + self.presence(node.left()) as Score
        }
    }

    pub fn padded(&self) -> usize {
        self.padded
    }

    /// Counters in heap order.
    pub fn counters(&self) -> impl Iterator<Item = Counter> + '_ {
        (0..tree_size(self.padded) as u32).map(|i| self.presence(LrNode(i)))
    }
}
