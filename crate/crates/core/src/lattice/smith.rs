use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{IntMatrix, IntVector, LatticeError};

/// `A = U * S * V` with `U`, `V` unimodular and `S` diagonal in Smith form.
///
/// The inverses are carried along because every caller needs one of them:
/// `u_inv * A * v_inv = S`.
#[derive(Debug, Clone)]
pub struct SmithDecomposition {
    pub u: IntMatrix,
    pub s: IntMatrix,
    pub v: IntMatrix,
    pub u_inv: IntMatrix,
    pub v_inv: IntMatrix,
}

impl SmithDecomposition {
    /// Diagonal entries `d_1 | d_2 | ...`, length `min(rows, cols)`.
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.s.rows().min(self.s.cols()))
            .map(|i| self.s[(i, i)].clone())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|d| !d.is_zero()).count()
    }
}

struct Reducer {
    s: IntMatrix,
    u: IntMatrix,
    u_inv: IntMatrix,
    v: IntMatrix,
    v_inv: IntMatrix,
}

impl Reducer {
    fn swap_rows(&mut self, a: usize, b: usize) {
        self.s.swap_rows(a, b);
        self.u_inv.swap_rows(a, b);
        self.u.swap_cols(a, b);
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        self.s.swap_cols(a, b);
        self.v_inv.swap_cols(a, b);
        self.v.swap_rows(a, b);
    }

    // row[t] += f * row[src]
    fn add_row(&mut self, t: usize, src: usize, f: &BigInt) {
        self.s.add_row_multiple(t, src, f);
        self.u_inv.add_row_multiple(t, src, f);
        self.u.add_col_multiple(src, t, &-f);
    }

    // col[t] += f * col[src]
    fn add_col(&mut self, t: usize, src: usize, f: &BigInt) {
        self.s.add_col_multiple(t, src, f);
        self.v_inv.add_col_multiple(t, src, f);
        self.v.add_row_multiple(src, t, &-f);
    }

    fn negate_row(&mut self, i: usize) {
        self.s.negate_row(i);
        self.u_inv.negate_row(i);
        self.u.negate_col(i);
    }

    fn min_entry(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for i in t..self.s.rows() {
            for j in t..self.s.cols() {
                let x = &self.s[(i, j)];
                if x.is_zero() {
                    continue;
                }
                if best.is_none_or(|(bi, bj)| x.abs() < self.s[(bi, bj)].abs()) {
                    best = Some((i, j));
                }
            }
        }
        best
    }
}

/// Smith normal form by repeated minimal-pivot reduction.
pub fn smith_normal_form(a: &IntMatrix) -> SmithDecomposition {
    let (m, n) = (a.rows(), a.cols());
    let mut r = Reducer {
        s: a.clone(),
        u: IntMatrix::identity(m),
        u_inv: IntMatrix::identity(m),
        v: IntMatrix::identity(n),
        v_inv: IntMatrix::identity(n),
    };
    'outer: for t in 0..m.min(n) {
        loop {
            let Some((pi, pj)) = r.min_entry(t) else {
                break 'outer;
            };
            r.swap_rows(t, pi);
            r.swap_cols(t, pj);
            let pivot = r.s[(t, t)].clone();

            let mut clean = true;
            for i in t + 1..m {
                let q = &r.s[(i, t)] / &pivot;
                r.add_row(i, t, &-q);
                clean &= r.s[(i, t)].is_zero();
            }
            for j in t + 1..n {
                let q = &r.s[(t, j)] / &pivot;
                r.add_col(j, t, &-q);
                clean &= r.s[(t, j)].is_zero();
            }
            if !clean {
                continue;
            }
            // Enforce d_t | every later entry.
            let offender = (t + 1..m).find(|&i| {
                (t + 1..n).any(|j| !r.s[(i, j)].is_multiple_of(&pivot))
            });
            match offender {
                Some(i) => r.add_row(t, i, &BigInt::one()),
                None => break,
            }
        }
        if r.s[(t, t)].is_negative() {
            r.negate_row(t);
        }
    }
    SmithDecomposition { u: r.u, s: r.s, v: r.v, u_inv: r.u_inv, v_inv: r.v_inv }
}

/// Row-style Hermite normal form of the row lattice: positive pivots,
/// entries above a pivot reduced into `[0, pivot)`, zero rows dropped.
pub fn hermite_rows(a: &IntMatrix) -> IntMatrix {
    let mut h = a.clone();
    let (m, n) = (h.rows(), h.cols());
    let mut r = 0;
    let mut c = 0;
    while r < m && c < n {
        let pivot = (r..m)
            .filter(|&i| !h[(i, c)].is_zero())
            .min_by(|&x, &y| h[(x, c)].abs().cmp(&h[(y, c)].abs()));
        let Some(p) = pivot else {
            c += 1;
            continue;
        };
        h.swap_rows(r, p);
        for i in r + 1..m {
            let q = &h[(i, c)] / &h[(r, c)];
            h.add_row_multiple(i, r, &-q);
        }
        if (r + 1..m).any(|i| !h[(i, c)].is_zero()) {
            continue;
        }
        if h[(r, c)].is_negative() {
            h.negate_row(r);
        }
        for k in 0..r {
            let q = h[(k, c)].div_floor(&h[(r, c)]);
            h.add_row_multiple(k, r, &-q);
        }
        r += 1;
        c += 1;
    }
    let rows: Vec<IntVector> = (0..m)
        .map(|i| h.row(i).to_vec())
        .filter(|row| row.iter().any(|x| !x.is_zero()))
        .collect();
    IntMatrix::from_rows(&rows, n)
}

/// Presentation of a finitely generated abelian group `Z^f ⊕ ⊕ Z/d_i`
/// as a quotient of an ambient free group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbelianGroupPresentation {
    pub free_rank: usize,
    pub torsion_factors: Vec<BigInt>,
    /// `(free_rank + torsion) × ambient` matrix; the free block is in
    /// Hermite normal form, torsion rows are reduced modulo their factor.
    pub projection: IntMatrix,
}

impl AbelianGroupPresentation {
    pub fn ambient_rank(&self) -> usize {
        self.projection.cols()
    }

    /// Image of an ambient vector: free coordinates and torsion residues in
    /// `[0, d)`.
    pub fn project(&self, x: &[BigInt]) -> (IntVector, IntVector) {
        let img = self.projection.mul_vec(x);
        let (free, tors) = img.split_at(self.free_rank);
        (free.to_vec(), self.reduce_torsion(tors))
    }

    pub fn reduce_torsion(&self, t: &[BigInt]) -> IntVector {
        t.iter()
            .zip(&self.torsion_factors)
            .map(|(x, d)| x.mod_floor(d))
            .collect()
    }
}

/// `Z^m / image(A)` where the columns of `A` are the relations.
pub fn cokernel(a: &IntMatrix) -> AbelianGroupPresentation {
    let m = a.rows();
    let snf = smith_normal_form(a);
    let diag = snf.diagonal();
    let mut free_rows = Vec::new();
    let mut torsion_rows = Vec::new();
    let mut torsion_factors = Vec::new();
    for i in 0..m {
        let d = diag.get(i).cloned().unwrap_or_else(BigInt::zero);
        let row = snf.u_inv.row(i).to_vec();
        if d.is_zero() {
            free_rows.push(row);
        } else if d > BigInt::one() {
            torsion_rows.push(row.iter().map(|x| x.mod_floor(&d)).collect::<IntVector>());
            torsion_factors.push(d);
        }
    }
    let free = hermite_rows(&IntMatrix::from_rows(&free_rows, m));
    debug_assert_eq!(free.rows(), free_rows.len());
    let mut rows = free.to_rows();
    rows.extend(torsion_rows);
    AbelianGroupPresentation {
        free_rank: free.rows(),
        torsion_factors,
        projection: IntMatrix::from_rows(&rows, m),
    }
}

/// Integer solution of `A x = b`, if any.
pub fn lattice_membership(a: &IntMatrix, b: &[BigInt]) -> Option<IntVector> {
    if b.len() != a.rows() {
        return None;
    }
    let snf = smith_normal_form(a);
    let c = snf.u_inv.mul_vec(b);
    let diag = snf.diagonal();
    let mut y = vec![BigInt::zero(); a.cols()];
    for (i, ci) in c.iter().enumerate() {
        match diag.get(i) {
            Some(d) if !d.is_zero() => {
                if !ci.is_multiple_of(d) {
                    return None;
                }
                y[i] = ci / d;
            }
            _ => {
                if !ci.is_zero() {
                    return None;
                }
            }
        }
    }
    Some(snf.v_inv.mul_vec(&y))
}

fn is_saturated_independent(cols: &[IntVector], n: usize) -> bool {
    if cols.is_empty() {
        return true;
    }
    let snf = smith_normal_form(&IntMatrix::from_columns(cols, n));
    let diag = snf.diagonal();
    diag.len() == cols.len() && diag.iter().all(One::is_one)
}

/// Unimodular `n × n` matrix whose leading columns are `vs`.
///
/// Standard basis vectors are appended greedily when they keep the span
/// saturated; otherwise the completion is read off a Smith decomposition.
pub fn complete_to_basis(vs: &[IntVector], n: usize) -> Result<IntMatrix, LatticeError> {
    for v in vs {
        if v.len() != n {
            return Err(LatticeError::DimensionMismatch { expected: n, found: v.len() });
        }
    }
    if vs.len() > n || !is_saturated_independent(vs, n) {
        return Err(LatticeError::NotCompletable);
    }
    let mut cols: Vec<IntVector> = vs.to_vec();
    for j in 0..n {
        if cols.len() == n {
            break;
        }
        let mut e = vec![BigInt::zero(); n];
        e[j] = BigInt::one();
        cols.push(e);
        if !is_saturated_independent(&cols, n) {
            cols.pop();
        }
    }
    if cols.len() == n {
        return Ok(IntMatrix::from_columns(&cols, n));
    }
    let k = vs.len();
    let snf = smith_normal_form(&IntMatrix::from_columns(vs, n));
    let mut block = IntMatrix::identity(n);
    for i in 0..k {
        for j in 0..k {
            block[(i, j)] = snf.v[(i, j)].clone();
        }
    }
    Ok(snf.u.mul(&block))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::int_vec;
    use proptest::prelude::*;

    fn check_smith(a: &IntMatrix) {
        let d = smith_normal_form(a);
        assert_eq!(d.u.mul(&d.s).mul(&d.v), *a);
        assert_eq!(d.u_inv.mul(a).mul(&d.v_inv), d.s);
        assert!(d.u.is_unimodular() && d.v.is_unimodular());
        for i in 0..d.s.rows() {
            for j in 0..d.s.cols() {
                if i != j {
                    assert!(d.s[(i, j)].is_zero());
                }
            }
        }
        let diag = d.diagonal();
        for w in diag.windows(2) {
            assert!(!w[0].is_negative());
            if w[0].is_zero() {
                assert!(w[1].is_zero());
            } else {
                assert!(w[1].is_multiple_of(&w[0]));
            }
        }
    }

    #[test]
    fn smith_examples() {
        let id = IntMatrix::identity(2);
        assert_eq!(smith_normal_form(&id).s, id);
        let a = IntMatrix::from_i64(&[&[1, 0], &[1, 2]]);
        assert_eq!(smith_normal_form(&a).diagonal(), int_vec(&[1, 2]));
        check_smith(&a);
        let z = IntMatrix::zeros(2, 3);
        assert!(smith_normal_form(&z).s.is_zero());
        check_smith(&IntMatrix::from_i64(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]));
        assert_eq!(
            smith_normal_form(&IntMatrix::from_i64(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]))
                .diagonal(),
            int_vec(&[2, 6, 12])
        );
    }

    #[test]
    fn membership_examples() {
        let a = IntMatrix::from_i64(&[&[1], &[-1]]);
        assert_eq!(lattice_membership(&a, &int_vec(&[2, -2])), Some(int_vec(&[2])));
        assert_eq!(lattice_membership(&a, &int_vec(&[1, 0])), None);
        let b = IntMatrix::from_i64(&[&[1, 0], &[1, 2]]);
        assert_eq!(lattice_membership(&b, &int_vec(&[1, 3])), Some(int_vec(&[1, 1])));
        assert_eq!(lattice_membership(&b, &int_vec(&[1, 2])), None);
    }

    #[test]
    fn cokernel_examples() {
        // P^2: relations (u1, u2, -u1-u2)
        let p2 = IntMatrix::from_i64(&[&[1, 0], &[0, 1], &[-1, -1]]);
        let g = cokernel(&p2);
        assert_eq!(g.free_rank, 1);
        assert!(g.torsion_factors.is_empty());
        for i in 0..3 {
            let mut e = vec![BigInt::zero(); 3];
            e[i] = BigInt::one();
            assert_eq!(g.project(&e).0, int_vec(&[1]));
        }
        // relations (u1, u1 + 2 u2)
        let t = IntMatrix::from_i64(&[&[1, 0], &[1, 2]]);
        let g = cokernel(&t);
        assert_eq!(g.free_rank, 0);
        assert_eq!(g.torsion_factors, int_vec(&[2]));
        // no relations
        let g = cokernel(&IntMatrix::zeros(3, 0));
        assert_eq!(g.free_rank, 3);
        assert_eq!(g.projection, IntMatrix::identity(3));
    }

    #[test]
    fn basis_completion_examples() {
        let e1 = int_vec(&[1, 0]);
        assert_eq!(complete_to_basis(&[e1], 2).unwrap(), IntMatrix::identity(2));
        let c = complete_to_basis(&[int_vec(&[1, 2])], 2).unwrap();
        assert_eq!(c, IntMatrix::from_i64(&[&[1, 0], &[2, 1]]));
        assert_eq!(
            complete_to_basis(&[int_vec(&[2, 0])], 2),
            Err(LatticeError::NotCompletable)
        );
        // greedy fails here; the Smith fallback must kick in
        let v = int_vec(&[2, 3]);
        let c = complete_to_basis(std::slice::from_ref(&v), 2).unwrap();
        assert!(c.is_unimodular());
        assert_eq!(c.column(0), v);
    }

    #[test]
    fn hermite_is_canonical() {
        let a = IntMatrix::from_i64(&[&[-1, -1, -1]]);
        assert_eq!(hermite_rows(&a), IntMatrix::from_i64(&[&[1, 1, 1]]));
        let b = IntMatrix::from_i64(&[&[1, 1, 1, 1], &[0, 0, 1, 1]]);
        let c = IntMatrix::from_i64(&[&[1, 1, 2, 2], &[0, 0, -1, -1]]);
        assert_eq!(hermite_rows(&b), hermite_rows(&c));
    }

    fn matrix_strategy() -> impl Strategy<Value = IntMatrix> {
        (1usize..=6, 1usize..=6).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-9i64..=9, r * c).prop_map(move |data| {
                let rows: Vec<IntVector> =
                    data.chunks(c).map(|ch| ch.iter().map(|&x| BigInt::from(x)).collect()).collect();
                IntMatrix::from_rows(&rows, c)
            })
        })
    }

    fn unimodular(n: usize, ops: &[(usize, usize, i64)]) -> IntMatrix {
        let mut m = IntMatrix::identity(n);
        for &(a, b, f) in ops {
            let (a, b) = (a % n, b % n);
            if a == b {
                m.swap_rows(a, (a + 1) % n);
            } else {
                m.add_row_multiple(a, b, &BigInt::from(f));
            }
        }
        m
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]
        #[test]
        fn smith_round_trip(a in matrix_strategy()) {
            check_smith(&a);
        }

        #[test]
        fn cokernel_invariant_under_unimodular_change(
            a in matrix_strategy(),
            left in proptest::collection::vec((0usize..6, 0usize..6, -3i64..=3), 0..8),
            right in proptest::collection::vec((0usize..6, 0usize..6, -3i64..=3), 0..8),
        ) {
            let p = unimodular(a.rows(), &left);
            let q = unimodular(a.cols(), &right);
            let g1 = cokernel(&a);
            let g2 = cokernel(&p.mul(&a).mul(&q));
            prop_assert_eq!(g1.free_rank, g2.free_rank);
            prop_assert_eq!(g1.torsion_factors, g2.torsion_factors);
        }

        #[test]
        fn cokernel_kills_relations(a in matrix_strategy()) {
            let g = cokernel(&a);
            for j in 0..a.cols() {
                let (f, t) = g.project(&a.column(j));
                prop_assert!(f.iter().all(Zero::is_zero));
                prop_assert!(t.iter().all(Zero::is_zero));
            }
        }

        #[test]
        fn completion_is_unimodular(ops in proptest::collection::vec((0usize..4, 0usize..4, -3i64..=3), 0..10), k in 0usize..=4) {
            let basis = unimodular(4, &ops);
            let vs: Vec<IntVector> = (0..k).map(|j| basis.column(j)).collect();
            let c = complete_to_basis(&vs, 4).unwrap();
            prop_assert!(c.is_unimodular());
            for (j, v) in vs.iter().enumerate() {
                prop_assert_eq!(&c.column(j), v);
            }
        }
    }
}
