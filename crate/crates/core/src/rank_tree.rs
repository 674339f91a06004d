//! Value-indexed counter trees answering cumulative footrule queries.
//!
//! Each element owns a search tree over the ranks `1..=N` in implicit
//! midpoint layout: the node over `[a, b]` holds value `(a + b) / 2` and its
//! children cover `[a, value - 1]` and `[value + 1, b]`. With `N = 2^k` the
//! values `1..N` form a perfect tree of depth `k - 1` (the node at depth `d`,
//! offset `o` holds `(2o + 1) << (k - 1 - d)`) and value `N` hangs below
//! `N - 1` at depth `k`. Storage is level-major like the presence forest.
//!
//! Nodes keep subtree size and sum only; a node's repetition count is its
//! size minus its children's sizes.

use crate::error::{Error, Result};
use crate::universe::{ElementId, Ranking, Universe};

/// Stored counters of one node: 12 bytes, so four nodes share a few cache
/// lines. `size` is bounded by the number of absorbed rankings.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[repr(C, packed(4))]
pub struct Counts {
    pub sum: u64,
    pub size: u32,
}

/// Counters of one node with its repetition count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RankNode {
    pub re: i64,
    pub size: i64,
    pub sum: i64,
}

/// One rank tree per padded element.
#[derive(Debug, Clone)]
pub struct RankForest {
    universe: Universe,
    padded: usize,
    levels: u32,
    nodes: Vec<Counts>,
}

/// Depth and offset of a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    depth: u32,
    offset: usize,
}

impl RankForest {
    pub fn new(universe: Universe) -> Self {
        let padded = universe.padded();
        RankForest {
            universe,
            padded,
            levels: padded.trailing_zeros(),
            nodes: vec![Counts::default(); padded * padded],
        }
    }

    pub(crate) fn from_nodes(universe: Universe, nodes: Vec<Counts>) -> Result<Self> {
        let padded = universe.padded();
        if nodes.len() != padded * padded {
            return Err(Error::Snapshot(format!(
                "rank forest has {} nodes, expected {}",
                nodes.len(),
                padded * padded
            )));
        }
        Ok(RankForest {
            universe,
            padded,
            levels: padded.trailing_zeros(),
            nodes,
        })
    }

    pub(crate) fn nodes(&self) -> &[Counts] {
        &self.nodes
    }

    pub fn padded(&self) -> usize {
        self.padded
    }

    #[inline]
    fn value(&self, p: Pos) -> usize {
        if p.depth == self.levels {
            self.padded
        } else {
            (2 * p.offset + 1) << (self.levels - 1 - p.depth)
        }
    }

    fn pos_of(&self, v: usize) -> Pos {
        if v == self.padded {
            return Pos {
                depth: self.levels,
                offset: 0,
            };
        }
        let tz = v.trailing_zeros();
        Pos {
            depth: self.levels - 1 - tz,
            offset: v >> (tz + 1),
        }
    }

    #[inline]
    fn slot(&self, e: usize, p: Pos) -> usize {
        let width = 1usize << p.depth;
        if p.depth == self.levels {
            self.padded * (width - 1) + e
        } else {
            self.padded * (width - 1) + e * width + p.offset
        }
    }

    #[inline]
    fn left(&self, p: Pos) -> Option<Pos> {
        (p.depth + 1 < self.levels).then(|| Pos {
            depth: p.depth + 1,
            offset: 2 * p.offset,
        })
    }

    #[inline]
    fn right(&self, p: Pos) -> Option<Pos> {
        if p.depth + 1 < self.levels {
            Some(Pos {
                depth: p.depth + 1,
                offset: 2 * p.offset + 1,
            })
        } else if p.depth + 1 == self.levels && self.value(p) == self.padded - 1 {
            Some(Pos {
                depth: self.levels,
                offset: 0,
            })
        } else {
            None
        }
    }

    #[inline]
    fn counts(&self, e: usize, p: Option<Pos>) -> Counts {
        p.map_or(Counts::default(), |p| self.nodes[self.slot(e, p)])
    }

    fn check(&self, e: ElementId, j: usize) -> Result<()> {
        if e.index() >= self.padded {
            return Err(Error::UniverseMismatch);
        }
        if j == 0 || j > self.padded {
            return Err(Error::RankOutOfRange {
                rank: j,
                padded: self.padded,
            });
        }
        Ok(())
    }

    /// Node of value `v` in `e`'s tree.
    pub fn node(&self, e: ElementId, v: usize) -> RankNode {
        let p = self.pos_of(v);
        let c = self.counts(e.index(), Some(p));
        let l = self.counts(e.index(), self.left(p));
        let r = self.counts(e.index(), self.right(p));
        RankNode {
            re: c.size as i64 - l.size as i64 - r.size as i64,
            size: c.size as i64,
            sum: c.sum as i64,
        }
    }

    /// Slot of the depth-`d`, offset-`o` node of element `e`, `d < levels`.
    #[inline]
    fn inner(&self, e: usize, d: u32, o: usize) -> usize {
        let width = 1usize << d;
        self.padded * (width - 1) + e * width + o
    }

    /// Slot of element `e`'s value-`N` node.
    #[inline]
    fn last(&self, e: usize) -> usize {
        self.padded * (self.padded - 1) + e
    }

    /// Records one occurrence of `e` at rank `j`. Returns the number of
    /// nodes touched.
    pub fn update(&mut self, e: ElementId, j: usize) -> Result<usize> {
        self.check(e, j)?;
        let (e, k) = (e.index(), self.levels);
        // below N the depth-d path node sits at offset j >> (k - d); N hangs
        // under the right spine
        let (depth, touched) = if j == self.padded {
            let slot = self.last(e);
            self.bump(slot, j);
            (k - 1, k as usize + 1)
        } else {
            let depth = k - 1 - j.trailing_zeros();
            (depth, depth as usize + 1)
        };
        for d in 0..=depth {
            let o = if j == self.padded {
                (1 << d) - 1
            } else {
                j >> (k - d)
            };
            let slot = self.inner(e, d, o);
            self.bump(slot, j);
        }
        Ok(touched)
    }

    #[inline]
    fn bump(&mut self, slot: usize, j: usize) {
        let node = &mut self.nodes[slot];
        node.size += 1;
        node.sum += j as u64;
    }

    /// Records every position of `ranking`.
    pub fn absorb(&mut self, ranking: &Ranking) -> Result<()> {
        self.universe.check(&ranking.universe())?;
        for (i, &e) in ranking.order().iter().enumerate() {
            self.update(e, i + 1)?;
        }
        Ok(())
    }

    /// Sum over absorbed occurrences `p` of `e` of `|j - p|`.
    ///
    /// Reads only the search path and the target's children: leaving a node
    /// toward one child, the node minus that child is exactly the node's
    /// own occurrences plus the other subtree.
    pub fn cost(&self, e: ElementId, j: usize) -> Result<u64> {
        self.check(e, j)?;
        let (e, k) = (e.index(), self.levels);
        let n = &self.nodes;
        if j == self.padded {
            let root = n[self.inner(e, 0, 0)];
            return Ok(j as u64 * root.size as u64 - root.sum);
        }
        // c11/c12: sum and count above j; c21/c22: sum and count below j
        let (mut c11, mut c12, mut c21, mut c22) = (0u64, 0u64, 0u64, 0u64);
        let depth = k - 1 - j.trailing_zeros();
        let mut node = n[self.inner(e, 0, 0)];
        for d in 1..=depth {
            let o = j >> (k - d);
            let child = n[self.inner(e, d, o)];
            let (sum, size) = (node.sum - child.sum, (node.size - child.size) as u64);
            if o & 1 == 0 {
                c11 += sum;
                c12 += size;
            } else {
                c21 += sum;
                c22 += size;
            }
            node = child;
        }
        // the target's own occurrences cost nothing; its subtrees split
        if depth + 1 < k {
            let o = 2 * (j >> (k - depth));
            let (l, r) = (
                n[self.inner(e, depth + 1, o)],
                n[self.inner(e, depth + 1, o + 1)],
            );
            c11 += r.sum;
            c12 += r.size as u64;
            c21 += l.sum;
            c22 += l.size as u64;
        } else if j == self.padded - 1 {
            let r = n[self.last(e)];
            c11 += r.sum;
            c12 += r.size as u64;
        }
        let j = j as u64;
        Ok((c11 - j * c12) + (j * c22 - c21))
    }

    /// Footrule distance from `pi` to every absorbed ranking.
    pub fn footrule(&self, pi: &Ranking) -> Result<u64> {
        self.universe.check(&pi.universe())?;
        let mut total = 0;
        for (rank, &e) in pi.order().iter().enumerate() {
            total += self.cost(e, rank + 1)?;
        }
        Ok(total)
    }

    pub fn root(&self, e: ElementId) -> RankNode {
        self.node(e, self.padded / 2)
    }

    pub(crate) fn heap_bytes(&self) -> usize {
        self.nodes.capacity() * std::mem::size_of::<Counts>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{footrule_to_domain, Domain};
    use crate::universe::SymbolTable;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn abcd() -> (SymbolTable, RankForest) {
        let t = SymbolTable::new(["A", "B", "C", "D"]).unwrap();
        let f = RankForest::new(t.universe());
        (t, f)
    }

    #[test]
    fn first_insert() {
        let (t, mut f) = abcd();
        let a = t.id("A").unwrap();
        f.update(a, 1).unwrap();
        assert_eq!((f.root(a).size, f.root(a).sum), (1, 1));
        assert_eq!(f.node(a, 1).re, 1);
    }

    #[test]
    fn two_ranking_scenario() {
        let (t, mut f) = abcd();
        f.absorb(&t.ranking(&["A", "B", "C", "D"]).unwrap())
            .unwrap();
        f.absorb(&t.ranking(&["B", "D", "A", "C"]).unwrap())
            .unwrap();
        let a = t.id("A").unwrap();
        let d = t.id("D").unwrap();
        assert_eq!((f.root(a).size, f.root(a).sum), (2, 4));
        assert_eq!(f.cost(a, 2).unwrap(), 2);
        assert_eq!(f.cost(d, 1).unwrap(), 4);
    }

    #[test]
    fn repeated_insert() {
        let (t, mut f) = abcd();
        let b = t.id("B").unwrap();
        f.update(b, 3).unwrap();
        f.update(b, 3).unwrap();
        assert_eq!(f.node(b, 3).re, 2);
        assert_eq!((f.root(b).size, f.root(b).sum), (2, 6));
        assert_eq!(f.cost(b, 3).unwrap(), 0);
    }

    #[test]
    fn empty_forest_costs_zero() {
        let (t, f) = abcd();
        let pi = t.ranking(&["D", "C", "B", "A"]).unwrap();
        assert_eq!(f.footrule(&pi).unwrap(), 0);
    }

    #[test]
    fn rank_out_of_range() {
        let (_, mut f) = abcd();
        for j in [0, 5] {
            assert_eq!(
                f.update(ElementId(0), j),
                Err(Error::RankOutOfRange { rank: j, padded: 4 })
            );
            assert!(f.cost(ElementId(0), j).is_err());
        }
    }

    #[test]
    fn universe_mismatch() {
        let (_, f) = abcd();
        let other = SymbolTable::numbered(5).unwrap();
        assert_eq!(
            f.footrule(&Ranking::identity(other.universe())),
            Err(Error::UniverseMismatch)
        );
    }

    #[test]
    fn matches_brute_force_domain_footrule() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..40 {
            let n = rng.gen_range(1..=64);
            let m = rng.gen_range(0..=200);
            let t = Arc::new(SymbolTable::numbered(n).unwrap());
            let mut ids: Vec<ElementId> = (0..n as u32).map(ElementId).collect();
            let mut f = RankForest::new(t.universe());
            let mut d = Domain::new(t.clone(), vec![]).unwrap();
            for _ in 0..m {
                ids.shuffle(&mut rng);
                let pi = Ranking::from_real_order(t.universe(), ids.clone()).unwrap();
                f.absorb(&pi).unwrap();
                d.push(pi).unwrap();
            }
            ids.shuffle(&mut rng);
            let probe = Ranking::from_real_order(t.universe(), ids.clone()).unwrap();
            assert_eq!(
                f.footrule(&probe).unwrap(),
                footrule_to_domain(&probe, &d).unwrap()
            );
        }
    }

    #[test]
    fn every_cost_matches_placement_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=17 {
            let t = Arc::new(SymbolTable::numbered(n).unwrap());
            let mut ids: Vec<ElementId> = (0..n as u32).map(ElementId).collect();
            let mut f = RankForest::new(t.universe());
            let mut d = Domain::new(t.clone(), vec![]).unwrap();
            for _ in 0..rng.gen_range(1..=12) {
                ids.shuffle(&mut rng);
                let pi = Ranking::from_real_order(t.universe(), ids.clone()).unwrap();
                f.absorb(&pi).unwrap();
                d.push(pi).unwrap();
            }
            let c = crate::oracle::placement_costs(&d);
            for e in 0..f.padded() {
                for j in 1..=f.padded() {
                    assert_eq!(
                        f.cost(ElementId(e as u32), j).unwrap() as i64,
                        c.get(e, j - 1),
                        "n={n} e={e} j={j}"
                    );
                }
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn root_aggregates(n in 1usize..50, m in 0usize..30, seed in any::<u64>()) {
                let t = SymbolTable::numbered(n).unwrap();
                let padded = t.padded_count();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut f = RankForest::new(t.universe());
                let mut sums = vec![0i64; padded];
                let mut ids: Vec<ElementId> = (0..n as u32).map(ElementId).collect();
                for _ in 0..m {
                    ids.shuffle(&mut rng);
                    let pi = Ranking::from_real_order(t.universe(), ids.clone()).unwrap();
                    for (r, &e) in pi.order().iter().enumerate() {
                        sums[e.index()] += r as i64 + 1;
                    }
                    f.absorb(&pi).unwrap();
                }
                let mut total = 0;
                for (e, &sum) in sums.iter().enumerate() {
                    let root = f.root(ElementId(e as u32));
                    prop_assert_eq!(root.size, m as i64);
                    prop_assert_eq!(root.sum, sum);
                    total += root.sum;
                }
                let p = padded as i64;
                prop_assert_eq!(total, m as i64 * p * (p + 1) / 2);
            }

            #[test]
            fn node_counters_consistent(k in 0u32..7, inserts in prop::collection::vec(any::<u16>(), 0..60)) {
                let t = SymbolTable::numbered(1 << k).unwrap();
                let padded = t.padded_count();
                let mut f = RankForest::new(t.universe());
                let e = ElementId(0);
                let limit = padded.ilog2() as usize + 1;
                for x in inserts {
                    let touched = f.update(e, x as usize % padded + 1).unwrap();
                    prop_assert!(touched <= limit);
                }
                fn walk(f: &RankForest, e: ElementId, a: usize, b: usize) -> RankNode {
                    if a > b {
                        return RankNode::default();
                    }
                    let v = (a + b) / 2;
                    let l = walk(f, e, a, v - 1);
                    let r = walk(f, e, v + 1, b);
                    let node = f.node(e, v);
                    assert_eq!(node.size, node.re + l.size + r.size);
                    assert_eq!(node.sum, node.re * v as i64 + l.sum + r.sum);
                    node
                }
                walk(&f, e, 1, padded);
            }
        }
    }
}
