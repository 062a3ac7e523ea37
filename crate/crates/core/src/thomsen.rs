//! The floor formula `D_u = Σ ⌊(v_i, u) + c_i⌋ D_i`, Frobenius pushforward
//! decompositions and generalized Thomsen collections.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::divisor::{ClassGroup, DivClass, QDivisor, TDivisor};
use crate::fan::{Fan, RayId};
use crate::lattice::{cube_points, floor_rat, pair, rational, to_rat_vec, IntMatrix, Rat};

/// Doubling rounds tried by [`thomsen_collection`] after the base grid.
pub const DEFAULT_ROUNDS: u32 = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ThomsenError {
    #[error("fan is not smooth")]
    NotSmooth,
    #[error("rays do not span the ambient space")]
    RaysDoNotSpan,
    #[error("{m}·D is not integral")]
    NotIntegral { m: u64 },
    #[error("point has dimension {found}, fan rank is {rank}")]
    DimensionMismatch { found: usize, rank: usize },
    #[error("no stabilization after {rounds} doubling rounds")]
    NoStabilization { rounds: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrobeniusDecomposition {
    pub m: u64,
    pub source: TDivisor,
    /// Classes in canonical order with positive multiplicities.
    pub multiplicities: BTreeMap<DivClass, u64>,
}

impl FrobeniusDecomposition {
    pub fn total(&self) -> u64 {
        self.multiplicities.values().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThomsenCollection {
    pub classes: BTreeSet<DivClass>,
    pub m_used: u64,
    /// Two grid sizes giving the same class set.
    pub stabilization_evidence: (u64, u64),
}

/// `Σ ⌊(v_i, u) + c_i⌋ D_i` over the rays of `fan`.
pub fn divisor_floor(fan: &Fan, u: &[Rat], d: &QDivisor) -> TDivisor {
    assert_eq!(u.len(), fan.rank(), "point dimension mismatch");
    TDivisor::from_pairs(
        fan.rays()
            .iter()
            .map(|r| (r.id, floor_rat(&(pair(&r.generator, u) + d.coeff(r.id))))),
    )
}

/// Evaluates the floor formula on the grid `(1/m) Z^n` with integer
/// arithmetic, caching classes by coefficient vector.
struct GridEvaluator<'a> {
    group: &'a ClassGroup,
    ids: Vec<RayId>,
    gens: Vec<Vec<BigInt>>,
    /// `c_i · den`
    scaled_c: Vec<BigInt>,
    den: BigInt,
    cache: HashMap<Vec<BigInt>, DivClass>,
}

impl<'a> GridEvaluator<'a> {
    fn new(fan: &Fan, group: &'a ClassGroup, d: &QDivisor) -> Self {
        let den = d.denominator();
        let ids = fan.ray_ids();
        let scaled_c = ids
            .iter()
            .map(|&id| (d.coeff(id) * Rat::from_integer(den.clone())).to_integer())
            .collect();
        let gens = fan.rays().iter().map(|r| r.generator.clone()).collect();
        GridEvaluator { group, ids, gens, scaled_c, den, cache: HashMap::new() }
    }

    fn coeffs(&self, k: &[u64], m: u64) -> Vec<BigInt> {
        let m = BigInt::from(m);
        let q = &m * &self.den;
        self.gens
            .iter()
            .zip(&self.scaled_c)
            .map(|(g, c)| {
                let vk: BigInt = g.iter().zip(k).map(|(a, b)| a * BigInt::from(*b)).sum();
                (vk * &self.den + &m * c).div_floor(&q)
            })
            .collect()
    }

    fn class(&mut self, k: &[u64], m: u64) -> DivClass {
        let coeffs = self.coeffs(k, m);
        if let Some(c) = self.cache.get(&coeffs) {
            return c.clone();
        }
        let c = self.group.class_of_vector(&coeffs);
        self.cache.insert(coeffs, c.clone());
        c
    }

    fn divisor(&self, k: &[u64], m: u64) -> TDivisor {
        TDivisor::from_pairs(self.ids.iter().copied().zip(self.coeffs(k, m)))
    }
}

/// Cube count: every `l ∈ {0..m-1}^rays` whose class `[L - Σ l_i D_i]` is
/// divisible by `m` adds one to each of its `m`-th roots.
pub fn frobenius_cube(fan: &Fan, m: u64, l: &TDivisor) -> Result<FrobeniusDecomposition, ThomsenError> {
    assert!(m >= 1);
    if !fan.is_smooth() {
        return Err(ThomsenError::NotSmooth);
    }
    let group = ClassGroup::new(fan);
    let ids = fan.ray_ids();
    let base = l.to_vector(&ids);
    let mut multiplicities = BTreeMap::new();
    let mut roots_cache: HashMap<DivClass, Vec<DivClass>> = HashMap::new();
    for pt in cube_points(ids.len(), m) {
        let v: Vec<BigInt> = base.iter().zip(&pt).map(|(b, p)| b - BigInt::from(*p)).collect();
        let c = group.class_of_vector(&v);
        let roots = roots_cache.entry(c.clone()).or_insert_with(|| group.divide_class(&c, m));
        for y in roots.iter() {
            *multiplicities.entry(y.clone()).or_insert(0) += 1;
        }
    }
    Ok(FrobeniusDecomposition { m, source: l.clone(), multiplicities })
}

/// Lattice count: the multiplicity of `c` is the number of
/// `u ∈ (1/m) Z^n ∩ [0,1)^n` with `[D_u] = c`.
pub fn frobenius_lattice(fan: &Fan, m: u64, d: &QDivisor) -> Result<FrobeniusDecomposition, ThomsenError> {
    assert!(m >= 1);
    if !rays_span(fan) {
        return Err(ThomsenError::RaysDoNotSpan);
    }
    let source = d
        .scale(&Rat::from_integer(BigInt::from(m)))
        .to_integral()
        .ok_or(ThomsenError::NotIntegral { m })?;
    let group = ClassGroup::new(fan);
    let mut eval = GridEvaluator::new(fan, &group, d);
    let mut multiplicities = BTreeMap::new();
    for k in cube_points(fan.rank(), m) {
        *multiplicities.entry(eval.class(&k, m)).or_insert(0) += 1;
    }
    Ok(FrobeniusDecomposition { m, source, multiplicities })
}

pub fn rays_span(fan: &Fan) -> bool {
    let rows: Vec<Vec<Rat>> = fan.rays().iter().map(|r| to_rat_vec(&r.generator)).collect();
    rational::rank(&rows, fan.rank()) == fan.rank()
}

/// Classes of `D_u` for `u` on the grid `(1/m) Z^n ∩ [0,1)^n`.
pub fn collection_at(fan: &Fan, group: &ClassGroup, d: &QDivisor, m: u64) -> BTreeSet<DivClass> {
    let mut eval = GridEvaluator::new(fan, group, d);
    cube_points(fan.rank(), m).map(|k| eval.class(&k, m)).collect()
}

/// The grid points `u` together with `D_u`, for callers that need the
/// divisors themselves.
pub fn floor_divisors_at(fan: &Fan, d: &QDivisor, m: u64) -> Vec<(Vec<Rat>, TDivisor)> {
    let group = ClassGroup::new(fan);
    let eval = GridEvaluator::new(fan, &group, d);
    let mb = BigInt::from(m);
    cube_points(fan.rank(), m)
        .map(|k| {
            let u = k.iter().map(|x| Rat::new(BigInt::from(*x), mb.clone())).collect();
            let div = eval.divisor(&k, m);
            (u, div)
        })
        .collect()
}

/// Base grid size for the stabilization search: the lcm of the
/// coefficient denominators, of `|det|` over invertible `n × n` ray
/// minors, and of `1..=n+1`.
///
/// The last factor matters: every face of the floor arrangement inside
/// the unit cube has vertices on the grid of the determinant lcm, so a
/// barycenter of at most `n + 1` of them lies on the refined grid.
pub fn stabilization_base(fan: &Fan, d: &QDivisor) -> u64 {
    let n = fan.rank();
    let mut l = d.denominator();
    let mat = fan.ray_matrix();
    for rows in subsets(mat.rows(), n) {
        let det = mat.select_rows(&rows).det();
        if !det.is_zero() {
            l = l.lcm(&det);
        }
    }
    for k in 1..=(n as u64 + 1) {
        l = l.lcm(&BigInt::from(k));
    }
    u64::try_from(l).expect("grid size overflows u64")
}

fn subsets(r: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if r < k {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        while i > 0 && idx[i - 1] == r - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

pub fn thomsen_collection(fan: &Fan, d: &QDivisor) -> Result<ThomsenCollection, ThomsenError> {
    thomsen_collection_with_budget(fan, d, DEFAULT_ROUNDS)
}

/// Grid classes at `m_0, 2m_0, 4m_0, …` until two consecutive rounds agree.
pub fn thomsen_collection_with_budget(
    fan: &Fan,
    d: &QDivisor,
    rounds: u32,
) -> Result<ThomsenCollection, ThomsenError> {
    if !fan.is_smooth() {
        return Err(ThomsenError::NotSmooth);
    }
    let group = ClassGroup::new(fan);
    let mut m = stabilization_base(fan, d);
    let mut prev = collection_at(fan, &group, d, m);
    for _ in 0..rounds {
        let next = collection_at(fan, &group, d, 2 * m);
        if next == prev {
            return Ok(ThomsenCollection { classes: prev, m_used: m, stabilization_evidence: (m, 2 * m) });
        }
        prev = next;
        m *= 2;
    }
    Err(ThomsenError::NoStabilization { rounds })
}

/// Class of `D_u` for an arbitrary rational `u`; membership witnesses for
/// Thomsen collections are checked through this.
pub fn floor_class(fan: &Fan, group: &ClassGroup, u: &[Rat], d: &QDivisor) -> Result<DivClass, ThomsenError> {
    if u.len() != fan.rank() {
        return Err(ThomsenError::DimensionMismatch { found: u.len(), rank: fan.rank() });
    }
    Ok(group.class_of(&divisor_floor(fan, u, d)))
}

/// Shifts every class of a collection by `e`.
pub fn shift_classes(group: &ClassGroup, classes: &BTreeSet<DivClass>, e: &DivClass) -> BTreeSet<DivClass> {
    classes.iter().map(|c| group.add(c, e)).collect()
}

/// `n × n` determinant lcm helper exposed for diagnostics.
pub fn minor_lcm(mat: &IntMatrix, n: usize) -> BigInt {
    subsets(mat.rows(), n)
        .into_iter()
        .map(|rows| mat.select_rows(&rows).det())
        .filter(|d| !d.is_zero())
        .fold(BigInt::one(), |l, d| l.lcm(&d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan::examples::*;
    use crate::lattice::{int_vec, rat};

    fn cls(free: &[i64], torsion: &[i64]) -> DivClass {
        DivClass { free: int_vec(free), torsion: int_vec(torsion) }
    }

    #[test]
    fn floor_examples() {
        assert!(divisor_floor(&p2(), &[rat(0, 1), rat(0, 1)], &QDivisor::zero()).is_zero());
        assert_eq!(
            divisor_floor(&p2(), &[rat(1, 2), rat(1, 2)], &QDivisor::zero()),
            TDivisor::from_i64(&[(2, -1)])
        );
        let d = QDivisor::from_pairs([(0, rat(1, 2))]);
        assert_eq!(divisor_floor(&p1(), &[rat(1, 4)], &d), TDivisor::from_i64(&[(1, -1)]));
    }

    #[test]
    fn p1_frobenius() {
        let expected: BTreeMap<_, _> = [(cls(&[-1], &[]), 1), (cls(&[0], &[]), 1)].into();
        assert_eq!(frobenius_cube(&p1(), 2, &TDivisor::zero()).unwrap().multiplicities, expected);
        assert_eq!(frobenius_lattice(&p1(), 2, &QDivisor::zero()).unwrap().multiplicities, expected);
    }

    #[test]
    fn p2_frobenius_lattice() {
        let expected: BTreeMap<_, _> = [(cls(&[-1], &[]), 3), (cls(&[0], &[]), 1)].into();
        assert_eq!(frobenius_lattice(&p2(), 2, &QDivisor::zero()).unwrap().multiplicities, expected);
    }

    #[test]
    fn identity_frobenius() {
        let l = TDivisor::from_i64(&[(0, 2), (1, -1)]);
        let g = ClassGroup::new(&p2());
        let dec = frobenius_cube(&p2(), 1, &l).unwrap();
        assert_eq!(dec.multiplicities, [(g.class_of(&l), 1)].into());
    }

    #[test]
    fn torsion_frobenius() {
        let expected: BTreeMap<_, _> = [(cls(&[], &[0]), 2), (cls(&[], &[1]), 2)].into();
        assert_eq!(frobenius_cube(&torsion(), 2, &TDivisor::zero()).unwrap().multiplicities, expected);
        assert_eq!(frobenius_lattice(&torsion(), 2, &QDivisor::zero()).unwrap().multiplicities, expected);
    }

    #[test]
    fn lattice_method_refuses_torus_factors() {
        let f = Fan::from_i64(2, &[&[1, 0], &[-1, 0]], &[&[0], &[1]]).unwrap();
        assert_eq!(frobenius_lattice(&f, 2, &QDivisor::zero()), Err(ThomsenError::RaysDoNotSpan));
        let d = QDivisor::from_pairs([(0, rat(1, 3))]);
        assert_eq!(frobenius_lattice(&p1(), 2, &d), Err(ThomsenError::NotIntegral { m: 2 }));
    }

    #[test]
    fn thomsen_examples() {
        let t = thomsen_collection(&p2(), &QDivisor::zero()).unwrap();
        assert_eq!(t.m_used, 6);
        assert_eq!(t.classes, [cls(&[-2], &[]), cls(&[-1], &[]), cls(&[0], &[])].into());

        let d = QDivisor::from_pairs([(0, rat(1, 2))]);
        let t = thomsen_collection(&p1(), &d).unwrap();
        assert_eq!(t.m_used, 4);
        assert_eq!(t.classes, [cls(&[-1], &[]), cls(&[0], &[])].into());
    }

    #[test]
    fn integral_shift() {
        let f = p1xp1();
        let g = ClassGroup::new(&f);
        let e = TDivisor::from_i64(&[(0, 2), (3, -1)]);
        let base = thomsen_collection(&f, &QDivisor::zero()).unwrap();
        let shifted = thomsen_collection(&f, &e.to_q()).unwrap();
        assert_eq!(shifted.classes, shift_classes(&g, &base.classes, &g.class_of(&e)));
    }

    #[test]
    fn subsets_enumeration() {
        assert_eq!(subsets(4, 2).len(), 6);
        assert_eq!(subsets(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(subsets(2, 3).len(), 0);
        assert_eq!(subsets(5, 0), vec![Vec::<usize>::new()]);
    }
}
