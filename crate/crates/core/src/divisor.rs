//! Torus-invariant divisors and the divisor class group.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::fan::{Fan, RayId};
use crate::lattice::{cokernel, lattice_membership, AbelianGroupPresentation, IntMatrix, IntVector, Rat};

/// Integral torus-invariant divisor; zero coefficients are not stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TDivisor(BTreeMap<RayId, BigInt>);

/// Torus-invariant Q-divisor; zero coefficients are not stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QDivisor(BTreeMap<RayId, Rat>);

impl TDivisor {
    pub fn zero() -> Self {
        TDivisor(BTreeMap::new())
    }

    pub fn prime(id: RayId) -> Self {
        TDivisor::from_pairs([(id, BigInt::one())])
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (RayId, BigInt)>) -> Self {
        let mut d = TDivisor::zero();
        for (k, v) in pairs {
            d.add_coeff(k, &v);
        }
        d
    }

    pub fn from_i64(pairs: &[(RayId, i64)]) -> Self {
        TDivisor::from_pairs(pairs.iter().map(|&(k, v)| (k, BigInt::from(v))))
    }

    pub fn coeff(&self, id: RayId) -> BigInt {
        self.0.get(&id).cloned().unwrap_or_default()
    }

    pub fn set_coeff(&mut self, id: RayId, v: BigInt) {
        if v.is_zero() {
            self.0.remove(&id);
        } else {
            self.0.insert(id, v);
        }
    }

    pub fn add_coeff(&mut self, id: RayId, v: &BigInt) {
        let c = self.coeff(id) + v;
        self.set_coeff(id, c);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&RayId, &BigInt)> {
        self.0.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn support(&self) -> Vec<RayId> {
        self.0.keys().copied().collect()
    }

    pub fn add(&self, other: &TDivisor) -> TDivisor {
        let mut d = self.clone();
        for (k, v) in &other.0 {
            d.add_coeff(*k, v);
        }
        d
    }

    pub fn neg(&self) -> TDivisor {
        TDivisor(self.0.iter().map(|(k, v)| (*k, -v)).collect())
    }

    pub fn sub(&self, other: &TDivisor) -> TDivisor {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &BigInt) -> TDivisor {
        TDivisor::from_pairs(self.0.iter().map(|(id, v)| (*id, v * k)))
    }

    pub fn to_q(&self) -> QDivisor {
        QDivisor(self.0.iter().map(|(k, v)| (*k, Rat::from_integer(v.clone()))).collect())
    }

    /// Coefficient vector in the order of `ids`.
    pub fn to_vector(&self, ids: &[RayId]) -> IntVector {
        ids.iter().map(|&id| self.coeff(id)).collect()
    }
}

impl fmt::Display for TDivisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            if v.is_negative() {
                write!(f, "-")?;
            } else if i > 0 {
                write!(f, "+")?;
            }
            let a = v.abs();
            if a.is_one() {
                write!(f, "D{k}")?;
            } else {
                write!(f, "{a}D{k}")?;
            }
        }
        Ok(())
    }
}

impl QDivisor {
    pub fn zero() -> Self {
        QDivisor(BTreeMap::new())
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (RayId, Rat)>) -> Self {
        let mut d = QDivisor::zero();
        for (k, v) in pairs {
            let c = d.coeff(k) + v;
            d.set_coeff(k, c);
        }
        d
    }

    pub fn coeff(&self, id: RayId) -> Rat {
        self.0.get(&id).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn set_coeff(&mut self, id: RayId, v: Rat) {
        if v.is_zero() {
            self.0.remove(&id);
        } else {
            self.0.insert(id, v);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&RayId, &Rat)> {
        self.0.iter()
    }

    pub fn add(&self, other: &QDivisor) -> QDivisor {
        QDivisor::from_pairs(self.0.clone().into_iter().chain(other.0.clone()))
    }

    pub fn scale(&self, k: &Rat) -> QDivisor {
        QDivisor::from_pairs(self.0.iter().map(|(id, v)| (*id, v * k)))
    }

    /// The integral divisor, if every coefficient is an integer.
    pub fn to_integral(&self) -> Option<TDivisor> {
        self.0
            .iter()
            .map(|(k, v)| v.is_integer().then(|| (*k, v.to_integer())))
            .collect::<Option<Vec<_>>>()
            .map(TDivisor::from_pairs)
    }

    /// Least common multiple of the coefficient denominators.
    pub fn denominator(&self) -> BigInt {
        crate::lattice::denominator_lcm(self.0.values())
    }
}

/// Element of `Z^f ⊕ ⊕ Z/d_i`: free coordinates and torsion residues in
/// `[0, d_i)`. The derived order is the canonical order of classes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DivClass {
    pub free: IntVector,
    pub torsion: IntVector,
}

impl fmt::Display for DivClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.free.iter().map(|x| x.to_string()).collect();
        write!(f, "({}", parts.join(","))?;
        if !self.torsion.is_empty() {
            let t: Vec<String> = self.torsion.iter().map(|x| x.to_string()).collect();
            write!(f, "; t={}", t.join(","))?;
        }
        write!(f, ")")
    }
}

/// `Z^{rays} / image(u ↦ ((v_i, u))_i)`.
#[derive(Debug, Clone)]
pub struct ClassGroup {
    ray_ids: Vec<RayId>,
    relations: IntMatrix,
    presentation: AbelianGroupPresentation,
}

impl ClassGroup {
    pub fn new(fan: &Fan) -> Self {
        let relations = fan.ray_matrix();
        let presentation = cokernel(&relations);
        ClassGroup { ray_ids: fan.ray_ids(), relations, presentation }
    }

    pub fn free_rank(&self) -> usize {
        self.presentation.free_rank
    }

    pub fn torsion_factors(&self) -> &[BigInt] {
        &self.presentation.torsion_factors
    }

    pub fn presentation(&self) -> &AbelianGroupPresentation {
        &self.presentation
    }

    pub fn ray_ids(&self) -> &[RayId] {
        &self.ray_ids
    }

    /// Panics if `d` involves a ray outside the fan.
    pub fn class_of(&self, d: &TDivisor) -> DivClass {
        for id in d.support() {
            assert!(self.ray_ids.contains(&id), "divisor uses ray {id} outside the fan");
        }
        self.class_of_vector(&d.to_vector(&self.ray_ids))
    }

    /// Class of a coefficient vector indexed like `ray_ids()`.
    pub fn class_of_vector(&self, coeffs: &[BigInt]) -> DivClass {
        let (free, torsion) = self.presentation.project(coeffs);
        DivClass { free, torsion }
    }

    pub fn zero(&self) -> DivClass {
        DivClass {
            free: vec![BigInt::zero(); self.free_rank()],
            torsion: vec![BigInt::zero(); self.torsion_factors().len()],
        }
    }

    pub fn add(&self, a: &DivClass, b: &DivClass) -> DivClass {
        let free = a.free.iter().zip(&b.free).map(|(x, y)| x + y).collect();
        let t: IntVector = a.torsion.iter().zip(&b.torsion).map(|(x, y)| x + y).collect();
        DivClass { free, torsion: self.presentation.reduce_torsion(&t) }
    }

    pub fn scale(&self, a: &DivClass, k: &BigInt) -> DivClass {
        let free = a.free.iter().map(|x| x * k).collect();
        let t: IntVector = a.torsion.iter().map(|x| x * k).collect();
        DivClass { free, torsion: self.presentation.reduce_torsion(&t) }
    }

    pub fn neg(&self, a: &DivClass) -> DivClass {
        self.scale(a, &-BigInt::one())
    }

    pub fn sub(&self, a: &DivClass, b: &DivClass) -> DivClass {
        self.add(a, &self.neg(b))
    }

    /// Decides linear equivalence by solving for a lattice vector `u` with
    /// `D - E = Σ (v_i, u) D_i`. Independent of `class_of`.
    pub fn linearly_equivalent(&self, d: &TDivisor, e: &TDivisor) -> bool {
        let diff = d.sub(e).to_vector(&self.ray_ids);
        lattice_membership(&self.relations, &diff).is_some()
    }

    /// All `y` with `m·y = c`, sorted.
    pub fn divide_class(&self, c: &DivClass, m: u64) -> Vec<DivClass> {
        assert!(m >= 1, "division by zero");
        let m = BigInt::from(m);
        let mut free = Vec::with_capacity(c.free.len());
        for x in &c.free {
            let (q, r) = x.div_mod_floor(&m);
            if !r.is_zero() {
                return Vec::new();
            }
            free.push(q);
        }
        // m·y ≡ x (mod d): solvable iff g = gcd(m, d) divides x, then g
        // solutions spaced d/g apart.
        let mut per_component: Vec<Vec<BigInt>> = Vec::new();
        for (x, d) in c.torsion.iter().zip(self.torsion_factors()) {
            let g = m.gcd(d);
            if !x.is_multiple_of(&g) {
                return Vec::new();
            }
            let step = d / &g;
            let mg = (&m / &g).mod_floor(&step);
            let xg = (x / &g).mod_floor(&step);
            let y0 = if step.is_one() {
                BigInt::zero()
            } else {
                let inv = mod_inverse(&mg, &step).expect("m/g is a unit mod d/g");
                (xg * inv).mod_floor(&step)
            };
            per_component.push((0..)
                .map(|k: u64| &y0 + &step * BigInt::from(k))
                .take_while(|y| y < d)
                .collect());
        }
        let mut out = vec![DivClass { free, torsion: Vec::new() }];
        for sols in per_component {
            out = out
                .into_iter()
                .flat_map(|cls| {
                    sols.iter().map(move |y| {
                        let mut c = cls.clone();
                        c.torsion.push(y.clone());
                        c
                    })
                })
                .collect();
        }
        out.sort();
        out
    }

    /// Number of elements killed by `m`.
    pub fn torsion_count(&self, m: u64) -> BigInt {
        let m = BigInt::from(m);
        self.torsion_factors().iter().map(|d| m.gcd(d)).product()
    }
}

fn mod_inverse(a: &BigInt, n: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(n);
    e.gcd.is_one().then(|| e.x.mod_floor(n))
}

/// The principal divisor `Σ (v_i, u) D_i` of a lattice vector `u`.
pub fn principal_divisor(fan: &Fan, u: &[BigInt]) -> TDivisor {
    TDivisor::from_pairs(
        fan.rays().iter().map(|r| (r.id, crate::lattice::dot(&r.generator, u))),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan::examples::*;
    use crate::lattice::int_vec;

    fn cls(free: &[i64], torsion: &[i64]) -> DivClass {
        DivClass { free: int_vec(free), torsion: int_vec(torsion) }
    }

    #[test]
    fn p2_class_group() {
        let g = ClassGroup::new(&p2());
        assert_eq!(g.free_rank(), 1);
        assert!(g.torsion_factors().is_empty());
        for i in 0..3 {
            assert_eq!(g.class_of(&TDivisor::prime(i)), cls(&[1], &[]));
        }
        assert!(g.linearly_equivalent(&TDivisor::prime(0), &TDivisor::prime(1)));
    }

    #[test]
    fn p1xp1_class_group() {
        let g = ClassGroup::new(&p1xp1());
        assert_eq!(g.class_of(&TDivisor::prime(0)), cls(&[1, 0], &[]));
        assert_eq!(g.class_of(&TDivisor::prime(1)), cls(&[1, 0], &[]));
        assert_eq!(g.class_of(&TDivisor::prime(2)), cls(&[0, 1], &[]));
        assert_eq!(g.class_of(&TDivisor::prime(3)), cls(&[0, 1], &[]));
    }

    #[test]
    fn torsion_class_group() {
        let g = ClassGroup::new(&torsion());
        assert_eq!(g.free_rank(), 0);
        assert_eq!(g.torsion_factors(), &[BigInt::from(2)]);
        let t = cls(&[], &[1]);
        assert_eq!(g.class_of(&TDivisor::prime(0)), t);
        assert_eq!(g.class_of(&TDivisor::prime(1)), t);
        assert!(!g.linearly_equivalent(&TDivisor::prime(0), &TDivisor::zero()));
        assert_eq!(g.divide_class(&g.zero(), 2), vec![cls(&[], &[0]), t.clone()]);
        assert!(g.divide_class(&t, 2).is_empty());
    }

    #[test]
    fn divide_free() {
        let g = ClassGroup::new(&p1());
        assert_eq!(g.divide_class(&cls(&[-2], &[]), 2), vec![cls(&[-1], &[])]);
        assert!(g.divide_class(&cls(&[1], &[]), 2).is_empty());
    }

    #[test]
    fn principal_divisors_vanish() {
        for f in [p1(), p2(), p1xp1(), a2(), p3(), torsion()] {
            let g = ClassGroup::new(&f);
            for i in 0..f.rank() {
                let mut u = vec![BigInt::zero(); f.rank()];
                u[i] = BigInt::one();
                assert_eq!(g.class_of(&principal_divisor(&f, &u)), g.zero());
            }
        }
    }

    #[test]
    fn display() {
        assert_eq!(TDivisor::from_i64(&[(0, 1), (2, -2)]).to_string(), "D0 -2D2");
        assert_eq!(TDivisor::zero().to_string(), "0");
    }
}
