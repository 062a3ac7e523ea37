//! Exact integer and rational lattice arithmetic.
//!
//! Everything downstream (fans, class groups, floor formulas, chamber
//! witnesses) is built on the types in this module. No floating point is
//! used anywhere in the crate.

mod matrix;
mod smith;
pub mod lp;
pub mod rational;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub use matrix::IntMatrix;
pub use smith::{
    cokernel, complete_to_basis, hermite_rows, lattice_membership, smith_normal_form,
    AbelianGroupPresentation, SmithDecomposition,
};

/// Reduced rational number with positive denominator.
pub type Rat = BigRational;
/// Integer vector in some ambient lattice.
pub type IntVector = Vec<BigInt>;
/// Rational vector, used for points of `V` and of half-space arrangements.
pub type RatVector = Vec<Rat>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("vectors do not extend to a lattice basis")]
    NotCompletable,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Largest integer not exceeding `x`.
pub fn floor_rat(x: &Rat) -> BigInt {
    x.floor().to_integer()
}

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: impl Into<BigInt>) -> Rat {
    Rat::from_integer(n.into())
}

pub fn int_vec(v: &[i64]) -> IntVector {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

pub fn to_rat_vec(v: &[BigInt]) -> RatVector {
    v.iter().cloned().map(Rat::from_integer).collect()
}

/// gcd of the absolute values of the entries; zero for the zero vector.
pub fn content(v: &[BigInt]) -> BigInt {
    v.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

/// True iff the entries are coprime (the zero vector is not primitive).
pub fn is_primitive(v: &[BigInt]) -> bool {
    content(v).is_one()
}

/// Splits a nonzero vector into its primitive part and the positive scale
/// factor. Returns `None` for the zero vector.
pub fn primitive_part(v: &[BigInt]) -> Option<(IntVector, BigInt)> {
    let g = content(v);
    if g.is_zero() {
        return None;
    }
    Some((v.iter().map(|x| x / &g).collect(), g))
}

/// Positive multiple of a nonzero rational vector that is a primitive
/// integer vector. `None` for the zero vector.
pub fn primitive_from_rat(v: &[Rat]) -> Option<IntVector> {
    let den = v
        .iter()
        .fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    let ints: IntVector = v.iter().map(|x| x.numer() * (&den / x.denom())).collect();
    primitive_part(&ints).map(|(p, _)| p)
}

pub fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Pairing of an integer vector with a rational one.
pub fn pair(v: &[BigInt], u: &[Rat]) -> Rat {
    debug_assert_eq!(v.len(), u.len());
    v.iter()
        .zip(u)
        .fold(Rat::zero(), |acc, (x, y)| acc + y * x)
}

pub fn dot_rat(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).fold(Rat::zero(), |acc, (x, y)| acc + x * y)
}

pub fn is_integral(x: &Rat) -> bool {
    x.denom().is_one()
}

/// Fractional part `x - floor(x)`, in `[0, 1)`.
pub fn frac(x: &Rat) -> Rat {
    x - Rat::from_integer(floor_rat(x))
}

/// Least common multiple of the denominators.
pub fn denominator_lcm<'a>(xs: impl IntoIterator<Item = &'a Rat>) -> BigInt {
    xs.into_iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()))
}

/// Canonical sign of a rational, used in sign vectors.
pub fn signum_rat(x: &Rat) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

/// Inverse of a unimodular matrix, `None` if `m` is not unimodular.
pub fn unimodular_inverse(m: &IntMatrix) -> Option<IntMatrix> {
    if !m.is_unimodular() {
        return None;
    }
    let n = m.rows();
    let rows: Vec<RatVector> = m.to_rows().iter().map(|r| to_rat_vec(r)).collect();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![Rat::zero(); n];
        e[j] = Rat::one();
        let x = rational::solve(&rows, &e, n)?;
        cols.push(x.iter().map(|v| v.to_integer()).collect::<IntVector>());
    }
    Some(IntMatrix::from_columns(&cols, n))
}

/// All points of `{0, …, m-1}^dim` in lexicographic order.
pub fn cube_points(dim: usize, m: u64) -> impl Iterator<Item = Vec<u64>> {
    let mut next = if m == 0 && dim > 0 { None } else { Some(vec![0u64; dim]) };
    std::iter::from_fn(move || {
        let cur = next.take()?;
        let mut succ = cur.clone();
        for i in (0..dim).rev() {
            succ[i] += 1;
            if succ[i] < m {
                next = Some(succ);
                break;
            }
            succ[i] = 0;
        }
        Some(cur)
    })
}
