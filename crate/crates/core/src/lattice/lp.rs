//! Exact linear feasibility over the rationals.
//!
//! A phase-one simplex with Bland's rule. Problems in this crate have at most
//! a few dozen variables, so a dense tableau is fine.

use num_traits::{Signed, Zero};

use super::{Rat, RatVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Ge,
    Le,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: RatVector,
    pub relation: Relation,
    pub rhs: Rat,
}

impl Constraint {
    pub fn new(coeffs: RatVector, relation: Relation, rhs: Rat) -> Self {
        Constraint { coeffs, relation, rhs }
    }

    pub fn holds(&self, x: &[Rat]) -> bool {
        let lhs = super::dot_rat(&self.coeffs, x);
        match self.relation {
            Relation::Ge => lhs >= self.rhs,
            Relation::Le => lhs <= self.rhs,
            Relation::Eq => lhs == self.rhs,
        }
    }
}

/// A point `x ∈ Q^dim` (variables unrestricted in sign) satisfying every
/// constraint, or `None` if the system is infeasible.
pub fn feasible_point(dim: usize, constraints: &[Constraint]) -> Option<RatVector> {
    let m = constraints.len();
    if m == 0 {
        return Some(vec![Rat::zero(); dim]);
    }
    // Columns: x+ (dim), x- (dim), one slack per inequality, one artificial per row.
    let n_ineq = constraints.iter().filter(|c| c.relation != Relation::Eq).count();
    let n_struct = 2 * dim + n_ineq;
    let n_cols = n_struct + m;
    let mut tab: Vec<RatVector> = Vec::with_capacity(m);
    let mut slack = 2 * dim;
    for (i, c) in constraints.iter().enumerate() {
        assert_eq!(c.coeffs.len(), dim, "constraint dimension mismatch");
        let mut row = vec![Rat::zero(); n_cols + 1];
        for j in 0..dim {
            row[j] = c.coeffs[j].clone();
            row[dim + j] = -c.coeffs[j].clone();
        }
        match c.relation {
            Relation::Ge => {
                row[slack] = -Rat::from_integer(1.into());
                slack += 1;
            }
            Relation::Le => {
                row[slack] = Rat::from_integer(1.into());
                slack += 1;
            }
            Relation::Eq => {}
        }
        row[n_cols] = c.rhs.clone();
        if row[n_cols].is_negative() {
            for x in row.iter_mut() {
                *x = -x.clone();
            }
        }
        row[n_struct + i] = Rat::from_integer(1.into());
        tab.push(row);
    }
    let mut basis: Vec<usize> = (n_struct..n_cols).collect();
    // Reduced costs of the phase-one objective (sum of artificials).
    let mut obj = vec![Rat::zero(); n_cols + 1];
    for row in &tab {
        for j in 0..n_struct {
            obj[j] -= &row[j];
        }
        obj[n_cols] -= &row[n_cols];
    }

    loop {
        let Some(enter) = (0..n_cols).find(|&j| obj[j].is_negative()) else {
            break;
        };
        let mut leave: Option<usize> = None;
        let mut best: Option<Rat> = None;
        for i in 0..m {
            if !tab[i][enter].is_positive() {
                continue;
            }
            let ratio = &tab[i][n_cols] / &tab[i][enter];
            let better = match &best {
                None => true,
                Some(b) => ratio < *b || (ratio == *b && basis[i] < basis[leave.unwrap()]),
            };
            if better {
                best = Some(ratio);
                leave = Some(i);
            }
        }
        // Phase one is bounded below by zero, so a pivot row always exists.
        let r = leave.expect("phase-one simplex cannot be unbounded");
        let piv = tab[r][enter].clone();
        for x in tab[r].iter_mut() {
            *x /= &piv;
        }
        let pivot_row = tab[r].clone();
        for (i, row) in tab.iter_mut().enumerate() {
            if i == r || row[enter].is_zero() {
                continue;
            }
            let f = row[enter].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                *x -= &f * p;
            }
        }
        if !obj[enter].is_zero() {
            let f = obj[enter].clone();
            for (x, p) in obj.iter_mut().zip(&pivot_row) {
                *x -= &f * p;
            }
        }
        basis[r] = enter;
    }

    if !obj[n_cols].is_zero() {
        return None;
    }
    let mut values = vec![Rat::zero(); n_cols];
    for (i, &b) in basis.iter().enumerate() {
        values[b] = tab[i][n_cols].clone();
    }
    let x: RatVector = (0..dim).map(|j| &values[j] - &values[dim + j]).collect();
    debug_assert!(constraints.iter().all(|c| c.holds(&x)));
    Some(x)
}
