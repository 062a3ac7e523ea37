//! Witnesses on fans without cones of dimension two, and restriction of
//! floor divisors to the orbit closure of the center.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

use super::{concrete_epsilon, limit_floor, BondalContext, BondalError};
use crate::divisor::{principal_divisor, ClassGroup, DivClass, QDivisor, TDivisor};
use crate::fan::{Cone, Fan, OrbitClosure, RayId};
use crate::lattice::{
    complete_to_basis, cube_points, is_integral, pair, unimodular_inverse, IntVector, Rat, RatVector,
};
use crate::thomsen::{divisor_floor, thomsen_collection};

/// Largest denominator tried by [`ray_witnesses`].
pub const WITNESS_MAX_DENOMINATOR: u64 = 64;

/// A point `u` where only `D_i` (and possibly its opposite ray) has an
/// integral argument, and a nearby `u'` with `D_{u'} = D_u - D_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RayWitness {
    pub ray: RayId,
    pub u: RatVector,
    pub u_prime: RatVector,
    pub d_u: TDivisor,
    pub d_u_prime: TDivisor,
}

pub fn ray_witnesses(fan: &Fan, d: &QDivisor) -> Result<Vec<RayWitness>, BondalError> {
    ray_witnesses_with_budget(fan, d, WITNESS_MAX_DENOMINATOR)
}

/// For each ray `v_i`: with `x` dual to `v_i` and `b_2, …, b_n` spanning
/// `v_i^⊥`, candidates `u = -c_i x + Σ t_k b_k` are tried for `t` on the
/// grids `(1/den) {0, …, den-1}^{n-1}`, `den = 1, 2, …`. The witness is
/// moved along `-x`.
pub fn ray_witnesses_with_budget(fan: &Fan, d: &QDivisor, max_den: u64) -> Result<Vec<RayWitness>, BondalError> {
    if fan.has_codim_ge2_strata() {
        return Err(BondalError::PreconditionViolated("fan has a cone of dimension 2".into()));
    }
    let n = fan.rank();
    let mut out = Vec::new();
    for r in fan.rays() {
        let b = complete_to_basis(std::slice::from_ref(&r.generator), n).map_err(|_| BondalError::NotSmooth)?;
        let dual = unimodular_inverse(&b).expect("completed basis is unimodular");
        let x: Vec<Rat> = dual.row(0).iter().map(|a| Rat::from_integer(a.clone())).collect();
        let ci = d.coeff(r.id);
        let neg_v: IntVector = r.generator.iter().map(|a| -a).collect();
        let mut found = None;
        'search: for den in 1..=max_den {
            let denb = BigInt::from(den);
            for t in cube_points(n - 1, den) {
                let mut u: RatVector = x.iter().map(|a| -(a * &ci)).collect();
                for (k, tk) in t.iter().enumerate() {
                    let tk = Rat::new(BigInt::from(*tk), denb.clone());
                    for (j, bj) in dual.row(k + 1).iter().enumerate() {
                        u[j] += &tk * Rat::from_integer(bj.clone());
                    }
                }
                let generic = fan.rays().iter().all(|s| {
                    s.id == r.id || s.generator == neg_v || !is_integral(&(pair(&s.generator, &u) + d.coeff(s.id)))
                });
                if generic {
                    found = Some(u);
                    break 'search;
                }
            }
        }
        let u = found.ok_or(BondalError::SearchBudgetExceeded { ray: r.id, max_den })?;
        let args: Vec<Rat> = fan.rays().iter().map(|s| pair(&s.generator, &u) + d.coeff(s.id)).collect();
        let slopes: Vec<Rat> = fan.rays().iter().map(|s| pair(&s.generator, &x)).collect();
        let eps = concrete_epsilon(&args, &slopes);
        let u_prime: RatVector = u.iter().zip(&x).map(|(a, b)| a - &eps * b).collect();
        let d_u = divisor_floor(fan, &u, d);
        let d_u_prime = divisor_floor(fan, &u_prime, d);
        let symbolic = TDivisor::from_pairs(
            fan.rays().iter().zip(args.iter().zip(&slopes)).map(|(s, (a, g))| (s.id, limit_floor(a, g))),
        );
        let expected = d_u.sub(&TDivisor::prime(r.id));
        if d_u_prime != expected || symbolic != expected {
            return Err(BondalError::Postcondition(format!("perturbation at ray {} does not drop D{}", r.id, r.id)));
        }
        out.push(RayWitness { ray: r.id, u, u_prime, d_u, d_u_prime });
    }
    Ok(out)
}

/// Restriction of `O(D)` to the orbit closure of `sigma`, as a divisor on
/// the quotient fan. `D` is first moved off the rays of `sigma` using the
/// lattice vectors dual to its generators.
pub fn restrict_class_to_orbit(fan: &Fan, sigma: &Cone, d: &TDivisor) -> Result<TDivisor, BondalError> {
    let oc = fan.orbit_closure(sigma)?;
    Ok(restrict_with(fan, &oc, sigma, d))
}

fn restrict_with(fan: &Fan, oc: &OrbitClosure, sigma: &Cone, d: &TDivisor) -> TDivisor {
    let dual = unimodular_inverse(&oc.basis).expect("orbit basis is unimodular");
    let n = fan.rank();
    let mut m = vec![BigInt::zero(); n];
    for (k, &id) in sigma.ray_ids().iter().enumerate() {
        let a = d.coeff(id);
        for (j, x) in dual.row(k).iter().enumerate() {
            m[j] += &a * x;
        }
    }
    let moved = d.sub(&principal_divisor(fan, &m));
    debug_assert!(sigma.ray_ids().iter().all(|&id| moved.coeff(id).is_zero()));
    TDivisor::from_pairs(
        moved
            .iter()
            .filter_map(|(id, v)| oc.ray_map.get(id).map(|q| (*q, v.clone()))),
    )
}

/// `c'_i = (v_i¹, u¹) + c_i` on the rays of the orbit closure of the
/// center in `X°`.
pub fn induced_qdivisor(ctx: &BondalContext, u1: &[Rat]) -> Result<QDivisor, BondalError> {
    let inst = &ctx.instance;
    let l = inst.l();
    if u1.len() != l {
        return Err(BondalError::PreconditionViolated(format!("u¹ has dimension {}", u1.len())));
    }
    let oc = ctx.punctured.x.orbit_closure(&inst.sigma)?;
    Ok(QDivisor::from_pairs(oc.ray_map.iter().map(|(&orig, &q)| {
        let v = inst.fan.generator(orig).unwrap();
        (q, pair(&v[..l], u1) + inst.c.coeff(orig))
    })))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestrictionOutcome {
    pub u1: RatVector,
    /// Denominator of the `u²` grid.
    pub grid: u64,
    pub restricted: BTreeSet<DivClass>,
    pub expected: BTreeSet<DivClass>,
    pub witnesses: Vec<RayWitness>,
}

impl RestrictionOutcome {
    pub fn agrees(&self) -> bool {
        self.restricted == self.expected
    }
}

/// Classes of `D_u|_{Y°}` for `u = u¹ ⊕ u²` over the `u²` grid, next to
/// `T(Y°, c')` computed directly on the quotient fan. The grid denominator
/// is the lcm of `q` and the grid size at which `T(Y°, c')` stabilized.
pub fn restriction_test(ctx: &BondalContext, u1: &[Rat], q: u64) -> Result<RestrictionOutcome, BondalError> {
    let inst = &ctx.instance;
    let split = inst.split();
    let x = &ctx.punctured.x;
    let oc = x.orbit_closure(&inst.sigma)?;
    let cq = induced_qdivisor(ctx, u1)?;
    let t = thomsen_collection(&oc.fan, &cq)?;
    let grid = q.lcm(&t.m_used);
    let group = ClassGroup::new(&oc.fan);
    let gridb = BigInt::from(grid);
    let mut restricted = BTreeSet::new();
    for k in cube_points(split.n - split.l, grid) {
        let u2: RatVector = k.iter().map(|a| Rat::new(BigInt::from(*a), gridb.clone())).collect();
        let u = split.join(u1, &u2);
        let du = divisor_floor(x, &u, &inst.c);
        restricted.insert(group.class_of(&restrict_with(x, &oc, &inst.sigma, &du)));
    }
    let witnesses = ray_witnesses(&oc.fan, &cq)?;
    Ok(RestrictionOutcome { u1: u1.to_vec(), grid, restricted, expected: t.classes, witnesses })
}
