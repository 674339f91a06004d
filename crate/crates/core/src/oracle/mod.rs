//! Exact reference computations.
//!
//! These are deliberately direct: they store the whole domain and evaluate
//! each quantity from its definition. The streaming structures are checked
//! against them.

pub mod assignment;

use std::sync::Arc;

#[cfg(test)]
use crate::error::Error;
use crate::error::Result;
use crate::universe::{ElementId, Ranking, SymbolTable, Universe};

use self::assignment::CostMatrix;

/// A list of rankings over one universe.
#[derive(Debug, Clone)]
pub struct Domain {
    table: Arc<SymbolTable>,
    rankings: Vec<Ranking>,
}

impl Domain {
    pub fn new(table: Arc<SymbolTable>, rankings: Vec<Ranking>) -> Result<Self> {
        let universe = table.universe();
        for r in &rankings {
            universe.check(&r.universe())?;
        }
        Ok(Domain { table, rankings })
    }

    pub fn table(&self) -> &Arc<SymbolTable> {
        &self.table
    }

    pub fn universe(&self) -> Universe {
        self.table.universe()
    }

    pub fn rankings(&self) -> &[Ranking] {
        &self.rankings
    }

    pub fn m(&self) -> usize {
        self.rankings.len()
    }

    pub fn push(&mut self, ranking: Ranking) -> Result<()> {
        self.universe().check(&ranking.universe())?;
        self.rankings.push(ranking);
        Ok(())
    }

    /// Domain holding the first `m` rankings.
    pub fn prefix(&self, m: usize) -> Domain {
        Domain {
            table: Arc::clone(&self.table),
            rankings: self.rankings[..m].to_vec(),
        }
    }
}

/// Spearman footrule: `sum_e |a(e) - b(e)|`.
pub fn footrule(a: &Ranking, b: &Ranking) -> Result<u64> {
    a.universe().check(&b.universe())?;
    Ok(a.positions()
        .iter()
        .zip(b.positions())
        .map(|(&x, &y)| u64::from(x.abs_diff(y)))
        .sum())
}

/// Footrule between the rankings with dummies removed and the real elements
/// renumbered `1..=n`.
pub fn footrule_real(a: &Ranking, b: &Ranking) -> Result<u64> {
    a.universe().check(&b.universe())?;
    let ra = real_positions(a);
    let rb = real_positions(b);
    Ok(ra
        .iter()
        .zip(&rb)
        .map(|(&x, &y)| u64::from(x.abs_diff(y)))
        .sum())
}

fn real_positions(r: &Ranking) -> Vec<u32> {
    let mut pos = vec![0u32; r.universe().real()];
    for (i, e) in r.real_order().enumerate() {
        pos[e.index()] = i as u32 + 1;
    }
    pos
}

/// Number of discordant pairs, by merge-sort inversion counting.
pub fn kendall_tau(a: &Ranking, b: &Ranking) -> Result<u64> {
    a.universe().check(&b.universe())?;
    // b-ranks listed in a-order; every inversion is a discordant pair.
    let mut seq: Vec<u32> = a.order().iter().map(|&e| b.position(e) as u32).collect();
    let mut buf = vec![0u32; seq.len()];
    Ok(count_inversions(&mut seq, &mut buf))
}

fn count_inversions(seq: &mut [u32], buf: &mut [u32]) -> u64 {
    let n = seq.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = {
        let (lo, hi) = seq.split_at_mut(mid);
        let (blo, bhi) = buf.split_at_mut(mid);
        count_inversions(lo, blo) + count_inversions(hi, bhi)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if seq[i] <= seq[j] {
            buf[k] = seq[i];
            i += 1;
        } else {
            buf[k] = seq[j];
            j += 1;
            count += (mid - i) as u64;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&seq[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&seq[j..n]);
    seq.copy_from_slice(&buf[..n]);
    count
}

/// Evaluates the recursive left/right distance literally.
///
/// For the subranking of `a` over ranks `[lo, hi]` split at
/// `mid = (lo + hi) / 2`, counts elements of `a[1..=mid]` that `b` places in
/// `[mid+1, N]`, plus elements of `a[mid+1..=N]` that `b` places in
/// `[1, mid]`, then recurses on both halves. Quadratic in `N`.
pub fn lr_distance_reference(a: &Ranking, b: &Ranking) -> Result<u64> {
    a.universe().check(&b.universe())?;
    Ok(lr_recurse(a, b, 1, a.len()))
}

fn lr_recurse(a: &Ranking, b: &Ranking, lo: usize, hi: usize) -> u64 {
    if hi <= lo {
        return 0;
    }
    let n = a.len();
    let mid = (lo + hi) / 2;
    let left_out = (1..=mid).filter(|&r| b.position(a.at(r)) > mid).count() as u64;
    let right_out = (mid + 1..=n)
        .filter(|&r| b.position(a.at(r)) <= mid)
        .count() as u64;
    left_out + lr_recurse(a, b, lo, mid) + right_out + lr_recurse(a, b, mid + 1, hi)
}

/// `sum_i F(pi, pi_i)` by brute force, O(mN).
pub fn footrule_to_domain(pi: &Ranking, domain: &Domain) -> Result<u64> {
    domain.universe().check(&pi.universe())?;
    domain.rankings.iter().map(|r| footrule(pi, r)).sum()
}

/// [`footrule_to_domain`] over real elements only.
pub fn footrule_real_to_domain(pi: &Ranking, domain: &Domain) -> Result<u64> {
    domain.universe().check(&pi.universe())?;
    domain.rankings.iter().map(|r| footrule_real(pi, r)).sum()
}

/// `sum_i K(pi, pi_i)`; reported only, never optimized.
pub fn kendall_to_domain(pi: &Ranking, domain: &Domain) -> Result<u64> {
    domain.universe().check(&pi.universe())?;
    domain.rankings.iter().map(|r| kendall_tau(pi, r)).sum()
}

/// Places each element at its median position if those medians are all
/// distinct; the result is then footrule-optimal.
///
/// The median of `m` sorted positions is taken at 1-based index
/// `ceil(m / 2)`: the lower median for even `m`, the middle for odd `m`.
pub fn median_position_aggregation(domain: &Domain) -> Option<Ranking> {
    let m = domain.m();
    if m == 0 {
        return None;
    }
    let padded = domain.universe().padded();
    let t = m.div_ceil(2);
    let mut order = vec![None; padded];
    let mut column = Vec::with_capacity(m);
    for e in 0..padded {
        let e = ElementId(e as u32);
        column.clear();
        column.extend(domain.rankings.iter().map(|r| r.position(e)));
        let (_, median, _) = column.select_nth_unstable(t - 1);
        let slot = &mut order[*median - 1];
        if slot.is_some() {
            return None;
        }
        *slot = Some(e);
    }
    let order = order
        .into_iter()
        .map(|e| e.expect("all slots filled"))
        .collect();
    Some(Ranking::from_order(domain.universe(), order).expect("medians form a permutation"))
}

/// Cost matrix `c[e][j] = sum_i |j - pi_i(e)|` over the padded universe.
pub fn placement_costs(domain: &Domain) -> CostMatrix {
    let padded = domain.universe().padded();
    // histogram of positions per element
    let mut hist = vec![0i64; padded * padded];
    for r in &domain.rankings {
        for (e, &p) in r.positions().iter().enumerate() {
            hist[e * padded + p as usize - 1] += 1;
        }
    }
    let mut cells = vec![0i64; padded * padded];
    for e in 0..padded {
        let row = &hist[e * padded..(e + 1) * padded];
        let out = &mut cells[e * padded..(e + 1) * padded];
        // cost(j + 1) = cost(j) + |positions <= j| - |positions > j|
        let total: i64 = row.iter().sum();
        let mut cost: i64 = row.iter().enumerate().map(|(p, &c)| c * p as i64).sum();
        let mut at_or_below = 0;
        for j in 0..padded {
            out[j] = cost;
            at_or_below += row[j];
            cost += at_or_below - (total - at_or_below);
        }
    }
    CostMatrix::from_fn(padded, |r, c| cells[r * padded + c])
}

/// Footrule-optimal aggregation via minimum-cost assignment of elements to
/// positions. Ties between optima are broken arbitrarily.
pub fn optimal_footrule(domain: &Domain) -> (Ranking, u64) {
    let matrix = placement_costs(domain);
    let (col_of_row, total) = assignment::solve(&matrix);
    let mut order = vec![ElementId(0); matrix.size()];
    for (e, &col) in col_of_row.iter().enumerate() {
        order[col] = ElementId(e as u32);
    }
    let ranking = Ranking::from_order(domain.universe(), order).expect("assignment is a bijection");
    (ranking, total as u64)
}

/// Input ranking with the smallest footrule distance to the domain.
pub fn best_input_ranking(domain: &Domain) -> Option<(usize, u64)> {
    domain
        .rankings
        .iter()
        .enumerate()
        .map(|(i, r)| (i, footrule_to_domain(r, domain).expect("same universe")))
        .min_by_key(|&(i, cost)| (cost, i))
}

/// Sorts elements by mean position (Borda order), ties by id.
pub fn average_position_aggregation(domain: &Domain) -> Option<Ranking> {
    if domain.m() == 0 {
        return None;
    }
    let universe = domain.universe();
    let mut totals: Vec<(u64, ElementId)> = (0..universe.real() as u32)
        .map(|e| {
            let e = ElementId(e);
            let sum = domain.rankings.iter().map(|r| r.position(e) as u64).sum();
            (sum, e)
        })
        .collect();
    totals.sort();
    Ranking::from_real_order(universe, totals.into_iter().map(|(_, e)| e).collect()).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn table(labels: &str) -> Arc<SymbolTable> {
        Arc::new(SymbolTable::new(labels.chars().map(String::from)).unwrap())
    }

    fn rank(t: &SymbolTable, s: &str) -> Ranking {
        let labels: Vec<String> = s.chars().map(String::from).collect();
        t.ranking(&labels).unwrap()
    }

    fn random_ranking(u: Universe, rng: &mut ChaCha8Rng) -> Ranking {
        let mut ids: Vec<_> = (0..u.real() as u32).map(ElementId).collect();
        ids.shuffle(rng);
        Ranking::from_real_order(u, ids).unwrap()
    }

    fn random_domain(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Domain {
        let t = Arc::new(SymbolTable::numbered(n).unwrap());
        let rs = (0..m).map(|_| random_ranking(t.universe(), rng)).collect();
        Domain::new(t, rs).unwrap()
    }

    /// Discordant pairs by scanning all pairs.
    fn kendall_pairs(a: &Ranking, b: &Ranking) -> u64 {
        let n = a.len() as u32;
        (0..n)
            .tuple_combinations()
            .filter(|&(x, y)| {
                let (x, y) = (ElementId(x), ElementId(y));
                (a.position(x) < a.position(y)) != (b.position(x) < b.position(y))
            })
            .count() as u64
    }

    #[test]
    fn footrule_worked_example() {
        let t = table("ABCDEFGH");
        let a = rank(&t, "ABCDEFGH");
        let b = rank(&t, "BGAECFHD");
        assert_eq!(footrule(&a, &b).unwrap(), 16);
        assert_eq!(footrule(&a, &a).unwrap(), 0);
    }

    #[test]
    fn reversal_distances() {
        let t = table("1234");
        let a = rank(&t, "1234");
        let b = rank(&t, "4321");
        assert_eq!(footrule(&a, &b).unwrap(), 8);
        assert_eq!(kendall_tau(&a, &b).unwrap(), 6);
        assert_eq!(kendall_tau(&a, &a).unwrap(), 0);
    }

    #[test]
    fn kendall_worked_example_matches_pair_scan() {
        let t = table("ABCDEFGH");
        let a = rank(&t, "ABCDEFGH");
        let b = rank(&t, "BGAECFHD");
        let expected = kendall_pairs(&a, &b);
        assert_eq!(expected, 10);
        assert_eq!(kendall_tau(&a, &b).unwrap(), expected);
    }

    #[test]
    fn kendall_matches_pair_scan_randomly() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1, 2, 3, 7, 16, 33] {
            let u = SymbolTable::numbered(n).unwrap().universe();
            for _ in 0..50 {
                let a = random_ranking(u, &mut rng);
                let b = random_ranking(u, &mut rng);
                assert_eq!(kendall_tau(&a, &b).unwrap(), kendall_pairs(&a, &b));
            }
        }
    }

    #[test]
    fn lr_reference_worked_example() {
        let t = table("ABCDEFGH");
        let a = rank(&t, "ABCDEFGH");
        let b = rank(&t, "BGAECFHD");
        assert_eq!(lr_distance_reference(&a, &b).unwrap(), 16);
        assert_eq!(lr_distance_reference(&a, &a).unwrap(), 0);
    }

    #[test]
    fn lr_reference_equals_footrule_n8() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let u = SymbolTable::numbered(8).unwrap().universe();
        for _ in 0..500 {
            let a = random_ranking(u, &mut rng);
            let b = random_ranking(u, &mut rng);
            let f = footrule(&a, &b).unwrap();
            assert_eq!(lr_distance_reference(&a, &b).unwrap(), f);
            assert_eq!(lr_distance_reference(&b, &a).unwrap(), f);
        }
    }

    #[test]
    fn top_split_crossings_balance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [2, 4, 8, 32, 64] {
            let u = SymbolTable::numbered(n).unwrap().universe();
            for _ in 0..100 {
                let a = random_ranking(u, &mut rng);
                let b = random_ranking(u, &mut rng);
                let k = n / 2;
                let left_out = (1..=k).filter(|&r| b.position(a.at(r)) > k).count();
                let right_in = (k + 1..=n).filter(|&r| b.position(a.at(r)) <= k).count();
                assert_eq!(left_out, right_in);
            }
        }
    }

    #[test]
    fn mismatched_universes_rejected() {
        let a = Ranking::identity(SymbolTable::numbered(4).unwrap().universe());
        let b = Ranking::identity(SymbolTable::numbered(3).unwrap().universe());
        let c = Ranking::identity(table("ABCD").universe());
        assert_eq!(footrule(&a, &b), Err(Error::UniverseMismatch));
        assert_eq!(kendall_tau(&a, &c), Err(Error::UniverseMismatch));
        assert_eq!(lr_distance_reference(&a, &c), Err(Error::UniverseMismatch));
    }

    #[test]
    fn domain_distance_linearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let t = Arc::new(SymbolTable::numbered(10).unwrap());
        let sigma = random_ranking(t.universe(), &mut rng);
        let pi = random_ranking(t.universe(), &mut rng);
        let d = Domain::new(t.clone(), vec![sigma.clone(); 7]).unwrap();
        assert_eq!(
            footrule_to_domain(&pi, &d).unwrap(),
            7 * footrule(&pi, &sigma).unwrap()
        );
        let single = Domain::new(t, vec![pi.clone()]).unwrap();
        assert_eq!(footrule_to_domain(&pi, &single).unwrap(), 0);
    }

    #[test]
    fn median_of_copies_is_the_copy() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = Arc::new(SymbolTable::numbered(9).unwrap());
        let sigma = random_ranking(t.universe(), &mut rng);
        for m in 1..5 {
            let d = Domain::new(t.clone(), vec![sigma.clone(); m]).unwrap();
            assert_eq!(median_position_aggregation(&d), Some(sigma.clone()));
        }
    }

    #[test]
    fn median_of_swapped_pair_collides() {
        let t = table("AB");
        let d = Domain::new(t.clone(), vec![rank(&t, "AB"), rank(&t, "BA")]).unwrap();
        assert_eq!(median_position_aggregation(&d), None);
    }

    #[test]
    fn optimal_of_single_ranking_is_itself() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = Arc::new(SymbolTable::numbered(12).unwrap());
        let sigma = random_ranking(t.universe(), &mut rng);
        let d = Domain::new(t, vec![sigma.clone()]).unwrap();
        assert_eq!(optimal_footrule(&d), (sigma, 0));
    }

    fn exhaustive_min(d: &Domain) -> u64 {
        let u = d.universe();
        (0..u.padded() as u32)
            .map(ElementId)
            .permutations(u.padded())
            .map(|order| {
                let r = Ranking::from_order(u, order).unwrap();
                footrule_to_domain(&r, d).unwrap()
            })
            .min()
            .unwrap()
    }

    #[test]
    fn optimal_matches_exhaustive_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..40 {
            let n = rng.gen_range(1..=6);
            let m = rng.gen_range(1..=3);
            let d = random_domain(n, m, &mut rng);
            let (r, cost) = optimal_footrule(&d);
            assert_eq!(footrule_to_domain(&r, &d).unwrap(), cost);
            assert_eq!(cost, exhaustive_min(&d));
            if let Some(med) = median_position_aggregation(&d) {
                assert_eq!(footrule_to_domain(&med, &d).unwrap(), cost);
            }
        }
    }

    #[test]
    fn optimal_bounded_by_inputs_and_pick_a_perm_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..30 {
            let n = rng.gen_range(2..=24);
            let m = rng.gen_range(1..=20);
            let d = random_domain(n, m, &mut rng);
            let (_, opt) = optimal_footrule(&d);
            let mut total = 0;
            for r in d.rankings() {
                let c = footrule_to_domain(r, &d).unwrap();
                assert!(opt <= c);
                total += c;
            }
            assert!(total <= 2 * m as u64 * opt);
        }
    }

    #[test]
    fn best_input_and_average() {
        let t = table("ABCD");
        let d = Domain::new(
            t.clone(),
            vec![rank(&t, "ABCD"), rank(&t, "ABDC"), rank(&t, "BACD")],
        )
        .unwrap();
        let (idx, cost) = best_input_ranking(&d).unwrap();
        assert_eq!(idx, 0);
        assert_eq!(cost, 4);
        let avg = average_position_aggregation(&d).unwrap();
        assert_eq!(t.labels_of(&avg), ["A", "B", "C", "D"]);
    }

    #[test]
    fn real_footrule_ignores_dummies() {
        let t = SymbolTable::numbered(3).unwrap();
        let u = t.universe();
        let a = Ranking::from_order(u, [3, 0, 1, 2].map(ElementId).to_vec()).unwrap();
        let b = Ranking::from_real_order(u, [0, 1, 2].map(ElementId).to_vec()).unwrap();
        assert_eq!(footrule_real(&a, &b).unwrap(), 0);
        assert_eq!(footrule(&a, &b).unwrap(), 6);
    }

    #[test]
    fn placement_costs_match_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..20 {
            let n = rng.gen_range(1..=20);
            let m = rng.gen_range(1..=15);
            let d = random_domain(n, m, &mut rng);
            let c = placement_costs(&d);
            let padded = d.universe().padded();
            for e in 0..padded {
                for j in 1..=padded {
                    let direct: i64 = d
                        .rankings()
                        .iter()
                        .map(|r| (j as i64 - r.position(ElementId(e as u32)) as i64).abs())
                        .sum();
                    assert_eq!(c.get(e, j - 1), direct);
                }
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn kendall_footrule_sandwich(n in 1usize..80, seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let u = SymbolTable::numbered(n).unwrap().universe();
                let a = random_ranking(u, &mut rng);
                let b = random_ranking(u, &mut rng);
                let k = kendall_tau(&a, &b).unwrap();
                let f = footrule(&a, &b).unwrap();
                prop_assert!(k <= f && f <= 2 * k);
            }

            #[test]
            fn lr_reference_is_symmetric_footrule(n in 1usize..70, seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let u = SymbolTable::numbered(n).unwrap().universe();
                let a = random_ranking(u, &mut rng);
                let b = random_ranking(u, &mut rng);
                let lr = lr_distance_reference(&a, &b).unwrap();
                prop_assert_eq!(lr, footrule(&a, &b).unwrap());
                prop_assert_eq!(lr, lr_distance_reference(&b, &a).unwrap());
            }
        }
    }
}
