//! Generating systems on `W = R^l` for points `u` with integral
//! `u_1 + … + u_l + c_0`, and checked certificates for `O(D̃_u - Ỹ)`.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};

use super::{perturb_concrete, perturb_symbolic, tilde_divisor_floor, BondalContext, BondalError};
use crate::divisor::{ClassGroup, DivClass, TDivisor};
use crate::fan::RayId;
use crate::gensys::{
    chambers, parse_signs, realizes, resolve_twisted, verify_certificate, Certificate, FormalSum, GeneratingSystem,
    HalfSpace, Item, NodeKind,
};
use crate::lattice::{floor_rat, is_integral, pair, Rat, RatVector};
use crate::thomsen::divisor_floor;

pub fn prime_name(id: RayId) -> String {
    format!("D{id}")
}

pub fn ray_of_name(name: &str) -> Option<RayId> {
    name.strip_prefix('D')?.parse().ok()
}

pub fn formal_of(d: &TDivisor) -> FormalSum {
    d.iter()
        .map(|(id, v)| (prime_name(*id), v.to_i64().expect("coefficient fits in i64")))
        .collect()
}

pub fn divisor_of_formal(f: &FormalSum) -> Option<TDivisor> {
    let pairs: Option<Vec<(RayId, BigInt)>> =
        f.iter().map(|(k, v)| ray_of_name(k).map(|id| (id, BigInt::from(*v)))).collect();
    pairs.map(TDivisor::from_pairs)
}

fn check_admissible(ctx: &BondalContext, u: &[Rat]) -> Result<(), BondalError> {
    let inst = &ctx.instance;
    let l = inst.l();
    if u.len() != inst.n() {
        return Err(BondalError::PreconditionViolated(format!("point has dimension {}", u.len())));
    }
    if u[..l].iter().any(|x| !x.is_positive() || *x >= Rat::one()) {
        return Err(BondalError::PreconditionViolated("some u_i with i <= l is outside (0, 1)".into()));
    }
    if !is_integral(&(u[..l].iter().sum::<Rat>() + &inst.c0)) {
        return Err(BondalError::PreconditionViolated("u_1 + ... + u_l + c0 is not an integer".into()));
    }
    Ok(())
}

/// Reference half-space `w_1 + … + w_l > 0`; one item per direction of a
/// nonzero `v_i¹` over the outside rays with `(v_i, u) + c_i` integral.
///
/// Directions opposite to the reference half-space never meet it and are
/// left out; their rays keep their coefficient under every perturbation.
pub fn descent_system(ctx: &BondalContext, u: &[Rat]) -> Result<GeneratingSystem, BondalError> {
    check_admissible(ctx, u)?;
    let inst = &ctx.instance;
    let l = inst.l();
    let wplus = HalfSpace::new(&vec![BigInt::one(); l]).unwrap();
    let opposite = wplus.opposite();
    let mut items: Vec<(HalfSpace, BTreeSet<String>)> = Vec::new();
    for id in inst.outside_rays() {
        let v = inst.fan.generator(id).unwrap();
        if !is_integral(&(pair(v, u) + inst.c.coeff(id))) {
            continue;
        }
        let Some(half) = HalfSpace::new(&v[..l]) else { continue };
        if half == wplus {
            return Err(BondalError::DiagonalProjection(id));
        }
        if half == opposite {
            continue;
        }
        match items.iter_mut().find(|(h, _)| *h == half) {
            Some((_, primes)) => {
                primes.insert(prime_name(id));
            }
            None => items.push((half, [prime_name(id)].into())),
        }
    }
    let primes: Vec<RayId> = items.iter().flat_map(|(_, p)| p.iter().map(|s| ray_of_name(s).unwrap())).collect();
    let fan = &ctx.punctured.x_tilde;
    for (a, &i) in primes.iter().enumerate() {
        for &j in &primes[a + 1..] {
            if fan.divisors_intersect(i, j)? {
                return Err(BondalError::DisjointnessFailure(prime_name(i), prime_name(j)));
            }
        }
    }
    let items = items.into_iter().map(|(h, p)| Item { half: h, primes: p }).collect();
    Ok(GeneratingSystem::new(l, wplus, items)?)
}

/// A certificate leaf reproduced at an explicit point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafWitness {
    pub node: usize,
    pub chamber: String,
    pub u_prime: RatVector,
    pub divisor: TDivisor,
    pub class: DivClass,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescentOutcome {
    pub u: RatVector,
    /// `⌊u_1 + … + u_l + c_0⌋`.
    pub d: BigInt,
    pub system: GeneratingSystem,
    /// Root target `D̃_u - Ỹ`, leaves `D̃_{u'}`.
    pub certificate: Certificate,
    pub chambers_checked: usize,
    pub leaves: Vec<LeafWitness>,
}

/// Builds and resolves the generating system at `u`, verifies the
/// certificate against the punctured blown-up fan, checks the
/// perturbation identity in every chamber symbolically and at a concrete
/// `ε`, and reproduces every leaf as `D̃_{u'}`. When `collection` is given
/// each leaf class must lie in it.
pub fn verify_descent(
    ctx: &BondalContext,
    u: &[Rat],
    collection: Option<&BTreeSet<DivClass>>,
) -> Result<DescentOutcome, BondalError> {
    let gs = descent_system(ctx, u)?;
    let fan = &ctx.punctured.x_tilde;
    let y = ctx.blowup.exceptional;
    let mut twist_div = tilde_divisor_floor(ctx, u);
    twist_div.add_coeff(y, &-BigInt::one());
    let twist = formal_of(&twist_div);
    let cert = resolve_twisted(&gs, &twist)?;
    let disjoint = |a: &str, b: &str| match (ray_of_name(a), ray_of_name(b)) {
        (Some(i), Some(j)) => i != j && fan.divisors_intersect(i, j) == Ok(false),
        _ => false,
    };
    verify_certificate(&cert, &gs, &disjoint).map_err(BondalError::Certificate)?;

    let dtilde = ctx.tilde_qdivisor();
    let all = chambers(&gs);
    for ch in &all {
        let dw = TDivisor::from_pairs(ch.divisor.iter().map(|s| (ray_of_name(s).unwrap(), BigInt::one())));
        let expected = twist_div.sub(&dw);
        let label = crate::gensys::signs_to_string(&ch.signs);
        if perturb_symbolic(ctx, u, &ch.witness)? != expected {
            return Err(BondalError::DescentIdentity(label));
        }
        let u2 = perturb_concrete(ctx, u, &ch.witness);
        if divisor_floor(fan, &u2, &dtilde) != expected {
            return Err(BondalError::DescentIdentity(label));
        }
    }

    let group = ClassGroup::new(fan);
    let mut leaves = Vec::new();
    for node in cert.leaves() {
        let NodeKind::Leaf { chamber } = &node.kind else { unreachable!() };
        let signs = parse_signs(chamber).ok_or(BondalError::Leaf(node.id))?;
        let w = realizes(&gs, &signs).ok_or(BondalError::Leaf(node.id))?;
        let u2 = perturb_concrete(ctx, u, &w);
        let divisor = divisor_floor(fan, &u2, &dtilde);
        if Some(&divisor) != divisor_of_formal(&node.target).as_ref() {
            return Err(BondalError::Leaf(node.id));
        }
        let class = group.class_of(&divisor);
        if let Some(set) = collection {
            if !set.contains(&class) {
                return Err(BondalError::LeafMembership(node.id));
            }
        }
        leaves.push(LeafWitness { node: node.id, chamber: chamber.clone(), u_prime: u2, divisor, class });
    }
    let l = ctx.instance.l();
    Ok(DescentOutcome {
        u: u.to_vec(),
        d: floor_rat(&(u[..l].iter().sum::<Rat>() + &ctx.instance.c0)),
        system: gs,
        certificate: cert,
        chambers_checked: all.len(),
        leaves,
    })
}
