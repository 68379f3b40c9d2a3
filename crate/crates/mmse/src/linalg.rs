//! Tiny dense linear-algebra helpers.
//!
//! The systems solved in this crate are small (bounded by the vertex count of
//! an ambiguity set, typically well under a hundred), so a plain partially
//! pivoted LU factorization is all that is needed — no external solver.

/// Solves `a x = b` in place by Gaussian elimination with partial pivoting.
///
/// Returns `None` when a pivot falls below `1e-13 * max|a|` — the matrix is
/// singular for our purposes and callers fall back to something safer.
pub(crate) fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|row| row.len() == n));
    let scale = a
        .iter()
        .flat_map(|row| row.iter().map(|v| v.abs()))
        .fold(0.0f64, f64::max)
        .max(1.0);
    let pivot_floor = 1e-13 * scale;

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .unwrap();
        if a[pivot_row][col].abs() < pivot_floor {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc -= a[col][k] * b[k];
        }
        b[col] = acc / a[col][col];
    }
    Some(b)
}
