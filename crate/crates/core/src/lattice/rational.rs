//! Gaussian elimination over the rationals.

use num_traits::{One, Zero};

use super::{Rat, RatVector};

/// Reduced row echelon form and the pivot columns.
pub fn rref(rows: &[RatVector], ncols: usize) -> (Vec<RatVector>, Vec<usize>) {
    let mut a: Vec<RatVector> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..a.len() {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..ncols {
                    let d = &f * &a[r][j];
                    a[i][j] -= d;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == a.len() {
            break;
        }
    }
    (a, pivots)
}

pub fn rank(rows: &[RatVector], ncols: usize) -> usize {
    rref(rows, ncols).1.len()
}

/// Basis of `{x : rows · x = 0}`.
pub fn nullspace(rows: &[RatVector], ncols: usize) -> Vec<RatVector> {
    let (a, pivots) = rref(rows, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rat::zero(); ncols];
            v[f] = Rat::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -a[r][f].clone();
            }
            v
        })
        .collect()
}

/// Some solution of `rows · x = b` (free variables set to zero).
pub fn solve(rows: &[RatVector], b: &[Rat], ncols: usize) -> Option<RatVector> {
    let aug: Vec<RatVector> = rows
        .iter()
        .zip(b)
        .map(|(r, bi)| {
            let mut r = r.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let (a, pivots) = rref(&aug, ncols + 1);
    if pivots.contains(&ncols) {
        return None;
    }
    let mut x = vec![Rat::zero(); ncols];
    for (r, &p) in pivots.iter().enumerate() {
        x[p] = a[r][ncols].clone();
    }
    Some(x)
}
