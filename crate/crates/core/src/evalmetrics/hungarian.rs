//! Rectangular linear assignment via the Hungarian method with potentials.

/// Solves the minimum-cost assignment for a `rows x cols` cost matrix.
///
/// The matrix is padded with zero-cost rows or columns to make it square,
/// so every real row is matched when `rows <= cols` and every real column
/// when `cols < rows`. Returns, for each row, the matched column if that
/// column is real.
pub fn min_cost_assignment(cost: &[Vec<i64>]) -> Vec<Option<usize>> {
    let rows = cost.len();
    let cols = cost.first().map_or(0, Vec::len);
    let n = rows.max(cols);
    if n == 0 {
        return Vec::new();
    }
    let at = |i: usize, j: usize| -> i64 {
        if i < rows && j < cols {
            cost[i][j]
        } else {
            0
        }
    };

    // 1-based arrays; index 0 is the virtual source column.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![i64::MAX; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = at(i0 - 1, j - 1) - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut matched = vec![None; rows];
    for j in 1..=n {
        let i = owner[j];
        if i >= 1 && i <= rows && j <= cols {
            matched[i - 1] = Some(j - 1);
        }
    }
    matched
}

/// Maximum-weight matching over a nonnegative weight table; returns the matched total.
pub fn max_weight_matching(weights: &[Vec<u64>]) -> u64 {
    let cost: Vec<Vec<i64>> = weights
        .iter()
        .map(|row| row.iter().map(|&w| -(w as i64)).collect())
        .collect();
    min_cost_assignment(&cost)
        .iter()
        .enumerate()
        .filter_map(|(i, j)| j.map(|j| weights[i][j]))
        .sum()
}
