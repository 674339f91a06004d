//! Median-partition reordering of the aggregation array.
//!
//! After each arriving ranking the presence forest is updated, every entry's
//! cursor is reset to its tree root, and the array is split level by level:
//! each block is ordered by descending score, so its higher-scoring half
//! lands left, then cursors descend one level and scores follow the
//! parent-to-child recurrence. Equal scores keep their current order, so a
//! tie at one level is resolved by the scores of the levels above it and
//! finally by the previous aggregation.

use std::ops::Range;

use crate::error::Result;
use crate::lr_tree::{LrForest, LrNode, Score};
use crate::universe::{ElementId, Ranking, Universe};

/// One slot of the aggregation array.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AggEntry {
    pub element: ElementId,
    pub cursor: LrNode,
    pub score: Score,
}

/// The working order of the LR aggregation.
#[derive(Debug, Clone)]
pub struct AggregationArray {
    universe: Universe,
    entries: Vec<AggEntry>,
}

impl AggregationArray {
    /// Elements in id order, cursors at the roots.
    pub fn new(universe: Universe) -> Self {
        Self::from_ranking(&Ranking::identity(universe))
    }

    /// Starts from the order of `ranking`.
    pub fn from_ranking(ranking: &Ranking) -> Self {
        let entries: Vec<AggEntry> = ranking
            .order()
            .iter()
            .map(|&element| AggEntry {
                element,
                cursor: LrNode::ROOT,
                score: 0,
            })
            .collect();
        AggregationArray {
            universe: ranking.universe(),
            entries,
        }
    }

    pub fn entries(&self) -> &[AggEntry] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [AggEntry] {
        &mut self.entries
    }

    /// Current order as a ranking of the padded universe.
    pub fn ranking(&self) -> Ranking {
        let order = self.entries.iter().map(|e| e.element).collect();
        Ranking::from_order(self.universe, order).expect("aggregation array is a permutation")
    }

    /// Absorbs `pi` into `forest` and recomputes the aggregation.
    pub fn aggregate(&mut self, pi: &Ranking, forest: &mut LrForest) -> Result<()> {
        self.universe.check(&pi.universe())?;
        forest.absorb(pi)?;
        for entry in &mut self.entries {
            entry.cursor = LrNode::ROOT;
            entry.score = forest.tree(entry.element).root_score();
        }
        let len = self.entries.len();
        self.reorder_range(0..len, forest);
        Ok(())
    }

    /// Reorders `range` recursively until every block has one entry.
    ///
    /// `range` must have power-of-two length and every cursor in it must sit
    /// at the tree node covering the range's rank interval, with a matching
    /// score. Blocks are processed breadth first: all blocks of one width
    /// are ordered before any cursor descends further.
    pub fn reorder_range(&mut self, range: Range<usize>, forest: &LrForest) {
        let len = range.len();
        assert!(
            len.is_power_of_two(),
            "block length {len} is not a power of two"
        );
        let mut width = len;
        while width >= 2 {
            let half = width / 2;
            for start in range.clone().step_by(width) {
                let block = &mut self.entries[start..start + width];
                order_block(block);
                if width > 2 {
                    let (left, right) = block.split_at_mut(half);
                    for entry in left {
                        entry.cursor = entry.cursor.left();
                        entry.score =
                            forest
                                .tree(entry.element)
                                .child_score(entry.score, entry.cursor, true);
                    }
                    for entry in right {
                        entry.cursor = entry.cursor.right();
                        entry.score = forest.tree(entry.element).child_score(
                            entry.score,
                            entry.cursor,
                            false,
                        );
                    }
                }
            }
            width = half;
        }
    }
}

/// Stable sort by descending score: the `len / 2` highest scores end up in
/// the left half and equal scores keep their current order.
pub fn order_block(block: &mut [AggEntry]) {
    block.sort_by_key(|e| std::cmp::Reverse(e.score));
}
