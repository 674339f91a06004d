//! Dense minimum-cost perfect assignment.
//!
//! Shortest augmenting paths with row/column potentials (the Hungarian
//! method in its O(n^3) form). Rows are added one at a time; each phase runs
//! a Dijkstra-like scan over reduced costs and augments along the tight path.

/// Square cost matrix stored row-major.
#[derive(Debug, Clone)]
pub struct CostMatrix {
    n: usize,
    cells: Vec<i64>,
}

impl CostMatrix {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> i64) -> Self {
        let mut cells = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                cells.push(f(r, c));
            }
        }
        CostMatrix { n, cells }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> i64 {
        self.cells[row * self.n + col]
    }
}

/// Returns `(col_of_row, total)` for a minimum-cost perfect matching.
pub fn solve(matrix: &CostMatrix) -> (Vec<usize>, i64) {
    let n = matrix.size();
    if n == 0 {
        return (Vec::new(), 0);
    }
    const NONE: usize = usize::MAX;
    // Index 0 of the column arrays is a virtual column used as the path root.
    let mut row_pot = vec![0i64; n];
    let mut col_pot = vec![0i64; n + 1];
    let mut row_of_col = vec![NONE; n + 1];
    let mut prev_col = vec![0usize; n + 1];
    let mut min_slack = vec![i64::MAX; n + 1];
    let mut used = vec![false; n + 1];

    for row in 0..n {
        row_of_col[0] = row;
        let mut col = 0usize;
        min_slack.iter_mut().for_each(|s| *s = i64::MAX);
        used.iter_mut().for_each(|u| *u = false);

        loop {
            used[col] = true;
            let r = row_of_col[col];
            let mut delta = i64::MAX;
            let mut next = 0usize;
            for c in 1..=n {
                if used[c] {
                    continue;
                }
                let reduced = matrix.get(r, c - 1) - row_pot[r] - col_pot[c];
                if reduced < min_slack[c] {
                    min_slack[c] = reduced;
                    prev_col[c] = col;
                }
                if min_slack[c] < delta {
                    delta = min_slack[c];
                    next = c;
                }
            }
            for c in 0..=n {
                if used[c] {
                    row_pot[row_of_col[c]] += delta;
                    col_pot[c] -= delta;
                } else {
                    min_slack[c] -= delta;
                }
            }
            col = next;
            if row_of_col[col] == NONE {
                break;
            }
        }

        while col != 0 {
            let p = prev_col[col];
            row_of_col[col] = row_of_col[p];
            col = p;
        }
    }

    let mut col_of_row = vec![0usize; n];
    for c in 1..=n {
        col_of_row[row_of_col[c]] = c - 1;
    }
    let total = col_of_row
        .iter()
        .enumerate()
        .map(|(r, &c)| matrix.get(r, c))
        .sum();
    (col_of_row, total)
}
