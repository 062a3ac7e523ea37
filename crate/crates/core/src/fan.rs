//! Simplicial fans with stable ray ids.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::lattice::lp::{feasible_point, Constraint, Relation};
use crate::lattice::{
    complete_to_basis, is_primitive, primitive_part, rat_int, rational, IntMatrix, IntVector,
    Rat,
};

pub type RayId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ray {
    pub id: RayId,
    pub generator: IntVector,
}

/// A cone, stored as the sorted set of its ray ids. The empty set is the
/// zero cone.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Cone(Vec<RayId>);

impl Cone {
    pub fn new(mut ids: Vec<RayId>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        Cone(ids)
    }

    pub fn zero() -> Self {
        Cone(Vec::new())
    }

    pub fn ray_ids(&self) -> &[RayId] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn contains_ray(&self, id: RayId) -> bool {
        self.0.binary_search(&id).is_ok()
    }

    /// True iff `other` is a face of `self`.
    pub fn contains(&self, other: &Cone) -> bool {
        other.0.iter().all(|r| self.contains_ray(*r))
    }

    /// All faces, including the zero cone and the cone itself.
    pub fn faces(&self) -> Vec<Cone> {
        let k = self.0.len();
        assert!(k < usize::BITS as usize, "cone too large");
        let mut out: Vec<Cone> = (0u64..1 << k)
            .map(|mask| {
                Cone((0..k).filter(|i| mask >> i & 1 == 1).map(|i| self.0[i]).collect())
            })
            .collect();
        out.sort();
        out
    }

    fn without(&self, id: RayId) -> Cone {
        Cone(self.0.iter().copied().filter(|&r| r != id).collect())
    }

    fn with(&self, id: RayId) -> Cone {
        let mut v = self.0.clone();
        v.push(id);
        Cone::new(v)
    }
}

impl fmt::Display for Cone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, r) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("ray {ray} has dimension {found}, lattice rank is {rank}")]
    RayDimension { ray: RayId, found: usize, rank: usize },
    #[error("ray {0} is zero")]
    ZeroRay(RayId),
    #[error("ray {0} is not primitive")]
    NonPrimitiveRay(RayId),
    #[error("rays {0} and {1} have the same generator")]
    DuplicateRay(RayId, RayId),
    #[error("ray id {0} used twice")]
    DuplicateRayId(RayId),
    #[error("cone {cone} refers to unknown ray {ray}")]
    UnknownRay { cone: Cone, ray: RayId },
    #[error("cone {0} is not strictly convex")]
    NotStrictlyConvex(Cone),
    #[error("cone {0} has linearly dependent generators")]
    NotSimplicial(Cone),
    #[error("cones {0} and {1} meet outside their common face")]
    BadIntersection(Cone, Cone),
    #[error("ray {0} lies in no cone")]
    OrphanRay(RayId),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FanError {
    #[error("invalid fan: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("cone {0} is not in the fan")]
    UnknownCone(Cone),
    #[error("ray {0} is not in the fan")]
    UnknownRay(RayId),
    #[error("cone {0} is not smooth")]
    NonSmoothCenter(Cone),
    #[error("cannot blow up along cone {0} of dimension < 2")]
    CenterTooSmall(Cone),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fan {
    rank: usize,
    rays: Vec<Ray>,
    max_cones: Vec<Cone>,
}

/// Quotient fan of `star(sigma)` in `N / span(sigma)`.
#[derive(Debug, Clone)]
pub struct OrbitClosure {
    pub fan: Fan,
    /// Surviving rays keep their id in the quotient.
    pub ray_map: BTreeMap<RayId, RayId>,
    /// Index of the primitive quotient generator in the projected vector.
    pub scales: BTreeMap<RayId, BigInt>,
    /// Basis of `N` whose leading columns generate `sigma`.
    pub basis: IntMatrix,
}

#[derive(Debug, Clone)]
pub struct Subdivision {
    pub fan: Fan,
    pub new_ray: RayId,
    /// Old ray id to its id in the subdivided fan (ids are preserved).
    pub provenance: BTreeMap<RayId, RayId>,
}

impl Fan {
    /// Fan with ray ids `0..rays.len()`, validated.
    pub fn new(rank: usize, rays: Vec<IntVector>, max_cones: Vec<Vec<RayId>>) -> Result<Fan, FanError> {
        let rays = rays
            .into_iter()
            .enumerate()
            .map(|(id, generator)| Ray { id, generator })
            .collect();
        let cones = max_cones.into_iter().map(Cone::new).collect();
        let fan = Fan::from_parts(rank, rays, cones);
        let v = fan.validate();
        if v.is_empty() {
            Ok(fan)
        } else {
            Err(FanError::Invalid(v))
        }
    }

    pub fn from_i64(rank: usize, rays: &[&[i64]], max_cones: &[&[RayId]]) -> Result<Fan, FanError> {
        Fan::new(
            rank,
            rays.iter().map(|r| crate::lattice::int_vec(r)).collect(),
            max_cones.iter().map(|c| c.to_vec()).collect(),
        )
    }

    /// Unchecked constructor. Cones that are faces of other listed cones
    /// are dropped; rays are sorted by id.
    pub fn from_parts(rank: usize, mut rays: Vec<Ray>, cones: Vec<Cone>) -> Fan {
        rays.sort_by_key(|r| r.id);
        let mut cones: Vec<Cone> = cones.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let all = cones.clone();
        cones.retain(|c| !all.iter().any(|d| d != c && d.contains(c)));
        Fan { rank, rays, max_cones: cones }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rays(&self) -> &[Ray] {
        &self.rays
    }

    pub fn ray_ids(&self) -> Vec<RayId> {
        self.rays.iter().map(|r| r.id).collect()
    }

    pub fn max_cones(&self) -> &[Cone] {
        &self.max_cones
    }

    pub fn ray(&self, id: RayId) -> Option<&Ray> {
        self.rays.iter().find(|r| r.id == id)
    }

    pub fn generator(&self, id: RayId) -> Option<&IntVector> {
        self.ray(id).map(|r| &r.generator)
    }

    /// Position of a ray id in `rays()`.
    pub fn position(&self, id: RayId) -> Option<usize> {
        self.rays.iter().position(|r| r.id == id)
    }

    pub fn max_ray_id(&self) -> Option<RayId> {
        self.rays.iter().map(|r| r.id).max()
    }

    /// `r × n` matrix whose rows are the ray generators; it represents the
    /// map `u ↦ ((v_i, u))_i`.
    pub fn ray_matrix(&self) -> IntMatrix {
        let rows: Vec<IntVector> = self.rays.iter().map(|r| r.generator.clone()).collect();
        IntMatrix::from_rows(&rows, self.rank)
    }

    pub fn generators_of(&self, cone: &Cone) -> Option<Vec<IntVector>> {
        cone.0.iter().map(|&id| self.generator(id).cloned()).collect()
    }

    /// Every cone of the fan (the face closure of the maximal cones).
    pub fn all_cones(&self) -> BTreeSet<Cone> {
        self.max_cones.iter().flat_map(|c| c.faces()).collect()
    }

    pub fn contains_cone(&self, cone: &Cone) -> bool {
        self.max_cones.iter().any(|m| m.contains(cone))
    }

    pub fn faces(&self, cone: &Cone) -> Result<Vec<Cone>, FanError> {
        if !self.contains_cone(cone) {
            return Err(FanError::UnknownCone(cone.clone()));
        }
        Ok(cone.faces())
    }

    /// All cones of the fan admitting `sigma` as a face.
    pub fn star(&self, sigma: &Cone) -> Result<Vec<Cone>, FanError> {
        if !self.contains_cone(sigma) {
            return Err(FanError::UnknownCone(sigma.clone()));
        }
        Ok(self.all_cones().into_iter().filter(|c| c.contains(sigma)).collect())
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen_ids = BTreeSet::new();
        for r in &self.rays {
            if !seen_ids.insert(r.id) {
                out.push(Violation::DuplicateRayId(r.id));
            }
            if r.generator.len() != self.rank {
                out.push(Violation::RayDimension { ray: r.id, found: r.generator.len(), rank: self.rank });
            } else if r.generator.iter().all(Zero::is_zero) {
                out.push(Violation::ZeroRay(r.id));
            } else if !is_primitive(&r.generator) {
                out.push(Violation::NonPrimitiveRay(r.id));
            }
        }
        for (i, a) in self.rays.iter().enumerate() {
            for b in &self.rays[i + 1..] {
                if a.id != b.id && a.generator == b.generator {
                    out.push(Violation::DuplicateRay(a.id, b.id));
                }
            }
        }
        if !out.is_empty() {
            return out;
        }
        let mut cone_ok = Vec::new();
        for c in &self.max_cones {
            if let Some(&bad) = c.0.iter().find(|&&id| self.ray(id).is_none()) {
                out.push(Violation::UnknownRay { cone: c.clone(), ray: bad });
                continue;
            }
            let gens = self.generators_of(c).unwrap();
            let rows: Vec<Vec<Rat>> = gens.iter().map(|g| crate::lattice::to_rat_vec(g)).collect();
            if rational::rank(&rows, self.rank) < gens.len() {
                if has_positive_relation(&gens, self.rank) {
                    out.push(Violation::NotStrictlyConvex(c.clone()));
                } else {
                    out.push(Violation::NotSimplicial(c.clone()));
                }
                continue;
            }
            cone_ok.push(c);
        }
        for (i, a) in cone_ok.iter().enumerate() {
            for b in &cone_ok[i + 1..] {
                if !self.meets_in_common_face(a, b) {
                    out.push(Violation::BadIntersection((*a).clone(), (*b).clone()));
                }
            }
        }
        let used: BTreeSet<RayId> = self.max_cones.iter().flat_map(|c| c.0.iter().copied()).collect();
        for r in &self.rays {
            if !used.contains(&r.id) {
                out.push(Violation::OrphanRay(r.id));
            }
        }
        out
    }

    /// For simplicial cones `a`, `b`: is `a ∩ b` the cone on their shared
    /// rays? Equivalent to infeasibility of `Σ α v = Σ β w`, `α, β ≥ 0`
    /// with unit mass on the non-shared rays.
    fn meets_in_common_face(&self, a: &Cone, b: &Cone) -> bool {
        let ga = self.generators_of(a).unwrap();
        let gb = self.generators_of(b).unwrap();
        let (ka, kb) = (ga.len(), gb.len());
        let dim = ka + kb;
        let mut cons = Vec::new();
        for i in 0..dim {
            let mut e = vec![Rat::zero(); dim];
            e[i] = Rat::one();
            cons.push(Constraint::new(e, Relation::Ge, Rat::zero()));
        }
        for coord in 0..self.rank {
            let mut row: Vec<Rat> = ga.iter().map(|g| rat_int(g[coord].clone())).collect();
            row.extend(gb.iter().map(|g| -rat_int(g[coord].clone())));
            cons.push(Constraint::new(row, Relation::Eq, Rat::zero()));
        }
        let mut mass = vec![Rat::zero(); dim];
        for (i, id) in a.0.iter().enumerate() {
            if !b.contains_ray(*id) {
                mass[i] = Rat::one();
            }
        }
        for (j, id) in b.0.iter().enumerate() {
            if !a.contains_ray(*id) {
                mass[ka + j] = Rat::one();
            }
        }
        if mass.iter().all(Zero::is_zero) {
            return true;
        }
        cons.push(Constraint::new(mass, Relation::Eq, Rat::one()));
        feasible_point(dim, &cons).is_none()
    }

    /// Every maximal cone's generators extend to a lattice basis.
    pub fn is_smooth(&self) -> bool {
        self.max_cones.iter().all(|c| self.cone_is_smooth(c))
    }

    pub fn cone_is_smooth(&self, c: &Cone) -> bool {
        match self.generators_of(c) {
            Some(g) => complete_to_basis(&g, self.rank).is_ok(),
            None => false,
        }
    }

    /// Ridge-pairing test, valid for simplicial fans.
    pub fn is_complete(&self) -> bool {
        if self.max_cones.is_empty() || self.max_cones.iter().any(|c| c.dim() != self.rank) {
            return false;
        }
        if self.rank == 0 {
            return true;
        }
        let mut ridges: BTreeMap<Cone, usize> = BTreeMap::new();
        for c in &self.max_cones {
            for &r in &c.0 {
                *ridges.entry(c.without(r)).or_default() += 1;
            }
        }
        ridges.values().all(|&k| k == 2)
    }

    pub fn has_codim_ge2_strata(&self) -> bool {
        self.max_cones.iter().any(|c| c.dim() >= 2)
    }

    /// Do the prime divisors of rays `i` and `j` meet?
    pub fn divisors_intersect(&self, i: RayId, j: RayId) -> Result<bool, FanError> {
        for id in [i, j] {
            if self.ray(id).is_none() {
                return Err(FanError::UnknownRay(id));
            }
        }
        let pair = Cone::new(vec![i, j]);
        Ok(self.contains_cone(&pair))
    }

    /// Applies the lattice automorphism `g` (acting on column vectors) to
    /// every generator.
    pub fn transform(&self, g: &IntMatrix) -> Fan {
        let rays = self
            .rays
            .iter()
            .map(|r| Ray { id: r.id, generator: g.mul_vec(&r.generator) })
            .collect();
        Fan { rank: self.rank, rays, max_cones: self.max_cones.clone() }
    }

    pub fn orbit_closure(&self, sigma: &Cone) -> Result<OrbitClosure, FanError> {
        let star = self.star(sigma)?;
        let gens = self.generators_of(sigma).unwrap();
        let basis = complete_to_basis(&gens, self.rank)
            .map_err(|_| FanError::NonSmoothCenter(sigma.clone()))?;
        let k = sigma.dim();
        let brows: Vec<Vec<Rat>> = basis.to_rows().iter().map(|r| crate::lattice::to_rat_vec(r)).collect();
        let link: BTreeSet<RayId> = star
            .iter()
            .flat_map(|c| c.0.iter().copied())
            .filter(|r| !sigma.contains_ray(*r))
            .collect();
        let mut rays = Vec::new();
        let mut ray_map = BTreeMap::new();
        let mut scales = BTreeMap::new();
        for id in link {
            let coords = rational::solve(&brows, &crate::lattice::to_rat_vec(self.generator(id).unwrap()), self.rank)
                .expect("basis is invertible");
            let tail: IntVector = coords[k..].iter().map(|x| x.to_integer()).collect();
            let (prim, scale) = primitive_part(&tail).expect("link ray projects to zero");
            rays.push(Ray { id, generator: prim });
            ray_map.insert(id, id);
            scales.insert(id, scale);
        }
        let cones: Vec<Cone> = star
            .iter()
            .map(|c| Cone(c.0.iter().copied().filter(|r| !sigma.contains_ray(*r)).collect()))
            .collect();
        let fan = Fan::from_parts(self.rank - k, rays, cones);
        Ok(OrbitClosure { fan, ray_map, scales, basis })
    }

    /// Star subdivision at `sigma`, adding the ray through the sum of its
    /// generators. The new ray gets the next unused id.
    pub fn stellar_subdivision(&self, sigma: &Cone) -> Result<Subdivision, FanError> {
        if !self.contains_cone(sigma) {
            return Err(FanError::UnknownCone(sigma.clone()));
        }
        if sigma.dim() < 2 {
            return Err(FanError::CenterTooSmall(sigma.clone()));
        }
        if !self.cone_is_smooth(sigma) {
            return Err(FanError::NonSmoothCenter(sigma.clone()));
        }
        let new_ray = self.max_ray_id().map_or(0, |m| m + 1);
        let gens = self.generators_of(sigma).unwrap();
        let sum: IntVector = (0..self.rank)
            .map(|j| gens.iter().map(|g| &g[j]).sum())
            .collect();
        let mut rays = self.rays.clone();
        rays.push(Ray { id: new_ray, generator: sum });
        let mut cones = Vec::new();
        for c in &self.max_cones {
            if c.contains(sigma) {
                for &r in &sigma.0 {
                    cones.push(c.without(r).with(new_ray));
                }
            } else {
                cones.push(c.clone());
            }
        }
        let provenance = self.rays.iter().map(|r| (r.id, r.id)).collect();
        Ok(Subdivision { fan: Fan::from_parts(self.rank, rays, cones), new_ray, provenance })
    }

    /// Subfan of the cones containing none of `removed` as a face. Rays
    /// that no longer lie in any cone are dropped; ids are kept.
    pub fn remove_star(&self, removed: &[Cone]) -> Fan {
        let kept: Vec<Cone> = self
            .all_cones()
            .into_iter()
            .filter(|c| !removed.iter().any(|r| c.contains(r)))
            .collect();
        let used: BTreeSet<RayId> = kept.iter().flat_map(|c| c.0.iter().copied()).collect();
        let rays = self.rays.iter().filter(|r| used.contains(&r.id)).cloned().collect();
        let fan = Fan::from_parts(self.rank, rays, kept);
        debug_assert!(fan.validate().is_empty());
        fan
    }
}

/// Is there `a ≥ 1` (componentwise) with `Σ a_i g_i = 0`?
fn has_positive_relation(gens: &[IntVector], rank: usize) -> bool {
    let k = gens.len();
    let mut cons = Vec::new();
    for i in 0..k {
        let mut e = vec![Rat::zero(); k];
        e[i] = Rat::one();
        cons.push(Constraint::new(e, Relation::Ge, Rat::one()));
    }
    for coord in 0..rank {
        let row = gens.iter().map(|g| rat_int(g[coord].clone())).collect();
        cons.push(Constraint::new(row, Relation::Eq, Rat::zero()));
    }
    feasible_point(k, &cons).is_some()
}

/// Standard test fans.
pub mod examples {
    use super::*;

    pub fn p1() -> Fan {
        Fan::from_i64(1, &[&[1], &[-1]], &[&[0], &[1]]).unwrap()
    }

    pub fn p2() -> Fan {
        Fan::from_i64(2, &[&[1, 0], &[0, 1], &[-1, -1]], &[&[0, 1], &[1, 2], &[0, 2]]).unwrap()
    }

    pub fn p1xp1() -> Fan {
        Fan::from_i64(
            2,
            &[&[1, 0], &[-1, 0], &[0, 1], &[0, -1]],
            &[&[0, 2], &[2, 1], &[1, 3], &[3, 0]],
        )
        .unwrap()
    }

    pub fn a2() -> Fan {
        Fan::from_i64(2, &[&[1, 0], &[0, 1]], &[&[0, 1]]).unwrap()
    }

    pub fn p3() -> Fan {
        Fan::from_i64(
            3,
            &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[-1, -1, -1]],
            &[&[0, 1, 2], &[0, 1, 3], &[0, 2, 3], &[1, 2, 3]],
        )
        .unwrap()
    }

    /// Projective space of dimension `n`: rays `e_1..e_n, -Σe_i`.
    pub fn projective(n: usize) -> Fan {
        let mut rays = Vec::new();
        for i in 0..n {
            let mut v = vec![BigInt::zero(); n];
            v[i] = BigInt::one();
            rays.push(v);
        }
        rays.push(vec![-BigInt::one(); n]);
        let cones = (0..=n).map(|skip| (0..=n).filter(|&i| i != skip).collect()).collect();
        Fan::new(n, rays, cones).unwrap()
    }

    /// Rays `(1,0)`, `(1,2)` without a 2-cone. Smooth, with class group `Z/2`.
    pub fn torsion() -> Fan {
        Fan::from_i64(2, &[&[1, 0], &[1, 2]], &[&[0], &[1]]).unwrap()
    }

    /// Hirzebruch surface `F_1` as the blow-up of `P²` at a torus fixed point.
    pub fn f1() -> Fan {
        Fan::from_i64(
            2,
            &[&[1, 0], &[0, 1], &[-1, -1], &[1, 1]],
            &[&[0, 3], &[3, 1], &[1, 2], &[2, 0]],
        )
        .unwrap()
    }

    pub fn torus(rank: usize) -> Fan {
        Fan::from_parts(rank, Vec::new(), vec![Cone::zero()])
    }
}

/// Is the simplicial cone `c` of `fan` covering `x`? Exact test used by
/// support comparisons.
pub fn cone_contains_point(fan: &Fan, c: &Cone, x: &[Rat]) -> bool {
    let gens = match fan.generators_of(c) {
        Some(g) => g,
        None => return false,
    };
    let k = gens.len();
    let mut cons = Vec::new();
    for i in 0..k {
        let mut e = vec![Rat::zero(); k];
        e[i] = Rat::one();
        cons.push(Constraint::new(e, Relation::Ge, Rat::zero()));
    }
    for coord in 0..fan.rank() {
        let row = gens.iter().map(|g| rat_int(g[coord].clone())).collect();
        cons.push(Constraint::new(row, Relation::Eq, x[coord].clone()));
    }
    feasible_point(k, &cons).is_some()
}
