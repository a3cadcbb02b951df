//! Minimum-cost assignment of rows into columns (rows <= columns).
//!
//! The kernel is the O(n^3) shortest augmenting path Hungarian method with
//! dual potentials. After it finishes, every optimal assignment lives on the
//! edges with zero reduced cost, so the lexicographically smallest optimum is
//! recovered by greedily re-routing rows onto smaller tight columns.
//!
//! Forced pairs are contracted out of the problem, forbidden pairs get a
//! sentinel cost that no feasible assignment can reach, and a rectangular
//! problem is squared up with zero-cost phantom rows placed after the real
//! ones.

use std::collections::HashSet;

use ndarray::Array2;

use super::OtError;
use crate::path::NodeMatching;

/// Relative slack for treating a reduced cost as zero.
const TIGHT_TOL: f64 = 1e-9;

/// Hungarian method on a square matrix. Returns `row -> col` and potentials
/// `(u, v)` with `cost[i][j] - u[i] - v[j] >= 0`, equality on the assignment.
fn hungarian(cost: &Array2<f64>) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    let n = cost.nrows();
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    // p[j]: row (1-based) assigned to column j; column 0 is the virtual root.
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[[i0 - 1, j - 1]] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    (assignment, u[1..].to_vec(), v[1..].to_vec())
}

/// Rewrites an optimal assignment into the lexicographically smallest one
/// among those using only `tight` edges.
fn lex_smallest(
    tight: &[Vec<bool>],
    mut row_of_col: Vec<usize>,
    mut col_of_row: Vec<usize>,
) -> Vec<usize> {
    let n = col_of_row.len();
    for i in 0..n {
        let current = col_of_row[i];
        for c in 0..current {
            if !tight[i][c] {
                continue;
            }
            let displaced = row_of_col[c];
            if displaced < i {
                continue;
            }
            // Row i takes c; the displaced row must reach `current` through an
            // alternating path over rows after i.
            let mut seen_col = vec![false; n];
            seen_col[c] = true;
            if let Some(path) = reroute(
                tight,
                &row_of_col,
                &col_of_row,
                i,
                displaced,
                current,
                &mut seen_col,
            ) {
                col_of_row[i] = c;
                row_of_col[c] = i;
                for (r, col) in path {
                    col_of_row[r] = col;
                    row_of_col[col] = r;
                }
                break;
            }
        }
    }
    col_of_row
}

/// DFS for an alternating path starting at `row` and ending in `target`.
/// Returns the `(row, new col)` reassignments along it.
fn reroute(
    tight: &[Vec<bool>],
    row_of_col: &[usize],
    col_of_row: &[usize],
    fixed_upto: usize,
    row: usize,
    target: usize,
    seen_col: &mut [bool],
) -> Option<Vec<(usize, usize)>> {
    let n = col_of_row.len();
    for col in 0..n {
        if seen_col[col] || !tight[row][col] {
            continue;
        }
        if col == target {
            return Some(vec![(row, col)]);
        }
        let next = row_of_col[col];
        if next <= fixed_upto || next == row {
            continue;
        }
        seen_col[col] = true;
        if let Some(mut path) = reroute(
            tight, row_of_col, col_of_row, fixed_upto, next, target, seen_col,
        ) {
            path.push((row, col));
            return Some(path);
        }
    }
    None
}

/// Minimum-cost injection of the rows of `cost` into its columns that uses
/// every `forced` pair and no `forbidden` pair. Among optimal injections the
/// lexicographically smallest (by row order) is returned.
pub fn lsap_min(
    cost: &Array2<f64>,
    forced: &[(usize, usize)],
    forbidden: &[(usize, usize)],
) -> Result<(NodeMatching, f64), OtError> {
    let (n1, n2) = cost.dim();
    if n1 > n2 {
        return Err(OtError::TooManyRows { rows: n1, cols: n2 });
    }
    if cost.iter().any(|x| !x.is_finite()) {
        return Err(OtError::NonFiniteCost);
    }
    let forbidden: HashSet<(usize, usize)> = forbidden.iter().copied().collect();
    let mut row_taken = vec![None; n1];
    let mut col_taken = vec![false; n2];
    for &(r, c) in forced {
        if r >= n1 || c >= n2 {
            return Err(OtError::ConstraintOutOfRange(r, c));
        }
        if row_taken[r].is_some() || col_taken[c] {
            return Err(OtError::OverlappingForced(r, c));
        }
        if forbidden.contains(&(r, c)) {
            return Err(OtError::Infeasible);
        }
        row_taken[r] = Some(c);
        col_taken[c] = true;
    }

    let rows: Vec<usize> = (0..n1).filter(|&r| row_taken[r].is_none()).collect();
    let cols: Vec<usize> = (0..n2).filter(|&c| !col_taken[c]).collect();
    let m = cols.len();

    let mut map: Vec<usize> = row_taken.iter().map(|c| c.unwrap_or(usize::MAX)).collect();
    if !rows.is_empty() {
        let (lo, hi) = rows
            .iter()
            .flat_map(|&r| cols.iter().map(move |&c| cost[[r, c]]))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                (lo.min(x), hi.max(x))
            });
        let range = hi - lo;
        // Any assignment avoiding forbidden pairs costs at most m * range.
        let sentinel = (m as f64 + 1.0) * (range + 1.0);
        let allowed =
            |a: usize, b: usize| a >= rows.len() || !forbidden.contains(&(rows[a], cols[b]));
        let sub = Array2::from_shape_fn((m, m), |(a, b)| {
            if a >= rows.len() {
                0.0
            } else if allowed(a, b) {
                cost[[rows[a], cols[b]]] - lo
            } else {
                sentinel
            }
        });
        let (assign, u, v) = hungarian(&sub);
        if (0..rows.len()).any(|a| !allowed(a, assign[a])) {
            return Err(OtError::Infeasible);
        }
        let tol = TIGHT_TOL * (1.0 + range);
        let tight: Vec<Vec<bool>> = (0..m)
            .map(|a| {
                (0..m)
                    .map(|b| allowed(a, b) && sub[[a, b]] - u[a] - v[b] <= tol)
                    .collect()
            })
            .collect();
        let mut row_of_col = vec![0; m];
        for (a, &b) in assign.iter().enumerate() {
            row_of_col[b] = a;
        }
        let assign = lex_smallest(&tight, row_of_col, assign);
        for (a, &r) in rows.iter().enumerate() {
            map[r] = cols[assign[a]];
        }
    }

    let total = map.iter().enumerate().map(|(r, &c)| cost[[r, c]]).sum();
    Ok((NodeMatching::new(map), total))
}
