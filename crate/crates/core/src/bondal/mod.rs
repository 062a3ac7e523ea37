//! Blow-up of a smooth toric variety along the orbit closure of a cone:
//! coordinate normalization, the tracked stellar subdivision, removal of
//! the codimension-two locus `Z`, the floor formula upstairs and its exact
//! perturbation identities, generating systems for the exceptional
//! divisor and restriction to the orbit closure.

mod descent;
mod pipeline;
mod restriction;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::divisor::{QDivisor, TDivisor};
use crate::fan::{Cone, Fan, FanError, RayId};
use crate::gensys::{CertificateViolation, GenSysError};
use crate::lattice::{
    complete_to_basis, floor_rat, frac, is_integral, pair, unimodular_inverse, IntMatrix, IntVector, Rat, RatVector,
};
use crate::thomsen::{divisor_floor, ThomsenError};

pub use descent::{
    descent_system, divisor_of_formal, formal_of, prime_name, ray_of_name, verify_descent, DescentOutcome, LeafWitness,
};
pub use pipeline::{
    bondal_pipeline, admissible_points, d_window, expected_window, DescentRecord, PullbackRecord, RestrictionRecord,
    BondalReport,
};
pub use restriction::{
    induced_qdivisor, ray_witnesses, ray_witnesses_with_budget, restrict_class_to_orbit, restriction_test,
    RayWitness, RestrictionOutcome, WITNESS_MAX_DENOMINATOR,
};

/// Largest shear entry tried by [`normalize_center`].
pub const MAX_SHEAR: i64 = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BondalError {
    #[error(transparent)]
    Fan(#[from] FanError),
    #[error("fan is not smooth")]
    NotSmooth,
    #[error("center {0} has dimension below 2")]
    CenterTooSmall(Cone),
    #[error("rays of the center are not the first standard basis vectors")]
    CenterNotStandard,
    #[error("ray {0} projects onto the positive diagonal")]
    DiagonalProjection(RayId),
    #[error("coefficient of ray {0} is out of range")]
    CoefficientRange(RayId),
    #[error("coefficient of the exceptional divisor is outside [0, 1)")]
    ExceptionalCoefficientRange,
    #[error("no normalizing shear with entries up to {0}")]
    NoShear(i64),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("primes {0} and {1} meet")]
    DisjointnessFailure(String, String),
    #[error("postcondition failed: {0}")]
    Postcondition(String),
    #[error("no witness for ray {ray} with denominators up to {max_den}")]
    SearchBudgetExceeded { ray: RayId, max_den: u64 },
    #[error(transparent)]
    GenSys(#[from] GenSysError),
    #[error(transparent)]
    Thomsen(#[from] ThomsenError),
    #[error("certificate rejected: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Certificate(Vec<CertificateViolation>),
    #[error("perturbation identity fails in chamber {0}")]
    DescentIdentity(String),
    #[error("leaf {0} is not reproduced by its perturbed point")]
    Leaf(usize),
    #[error("leaf {0} lies outside the Thomsen collection")]
    LeafMembership(usize),
}

/// Splits vectors of length `n` into the first `l` coordinates and the rest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoordinateSplit {
    pub l: usize,
    pub n: usize,
}

impl CoordinateSplit {
    pub fn split<T: Clone>(&self, v: &[T]) -> (Vec<T>, Vec<T>) {
        assert_eq!(v.len(), self.n, "vector length");
        (v[..self.l].to_vec(), v[self.l..].to_vec())
    }

    pub fn join<T: Clone>(&self, first: &[T], second: &[T]) -> Vec<T> {
        assert_eq!(first.len(), self.l);
        assert_eq!(second.len(), self.n - self.l);
        first.iter().chain(second).cloned().collect()
    }
}

/// A smooth fan in coordinates where the center `sigma` is spanned by
/// `e_1, …, e_l`, with the Q-divisor `c_0 Ỹ + Σ c_i D_i` upstairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BondalInstance {
    pub fan: Fan,
    pub sigma: Cone,
    pub c0: Rat,
    pub c: QDivisor,
}

impl BondalInstance {
    pub fn new(fan: Fan, sigma: Cone, c0: Rat, c: QDivisor) -> Result<Self, BondalError> {
        check_center(&fan, &sigma)?;
        let l = sigma.dim();
        for (k, &id) in sigma.ray_ids().iter().enumerate() {
            let g = fan.generator(id).unwrap();
            if g.iter().enumerate().any(|(j, x)| *x != BigInt::from((j == k) as i64)) {
                return Err(BondalError::CenterNotStandard);
            }
        }
        if let Some(id) = diagonal_ray(&fan, l) {
            return Err(BondalError::DiagonalProjection(id));
        }
        for (&id, v) in c.iter() {
            if fan.ray(id).is_none() {
                return Err(BondalError::Fan(FanError::UnknownRay(id)));
            }
            if sigma.contains_ray(id) || v.is_negative() || *v >= Rat::one() {
                return Err(BondalError::CoefficientRange(id));
            }
        }
        if c0.is_negative() || c0 >= Rat::one() {
            return Err(BondalError::ExceptionalCoefficientRange);
        }
        Ok(BondalInstance { fan, sigma, c0, c })
    }

    pub fn l(&self) -> usize {
        self.sigma.dim()
    }

    pub fn n(&self) -> usize {
        self.fan.rank()
    }

    pub fn split(&self) -> CoordinateSplit {
        CoordinateSplit { l: self.l(), n: self.n() }
    }

    /// Rays not in `sigma`.
    pub fn outside_rays(&self) -> Vec<RayId> {
        self.fan.ray_ids().into_iter().filter(|&id| !self.sigma.contains_ray(id)).collect()
    }
}

fn check_center(fan: &Fan, sigma: &Cone) -> Result<(), BondalError> {
    if !fan.is_smooth() {
        return Err(BondalError::NotSmooth);
    }
    if !fan.contains_cone(sigma) {
        return Err(BondalError::Fan(FanError::UnknownCone(sigma.clone())));
    }
    if sigma.dim() < 2 {
        return Err(BondalError::CenterTooSmall(sigma.clone()));
    }
    Ok(())
}

/// First ray whose leading `l` coordinates are a positive multiple of
/// `(1, …, 1)`.
fn diagonal_ray(fan: &Fan, l: usize) -> Option<RayId> {
    fan.rays()
        .iter()
        .find(|r| {
            let head = &r.generator[..l];
            head[0].is_positive() && head.iter().all(|x| *x == head[0])
        })
        .map(|r| r.id)
}

/// Change of coordinates and coefficient shift applied by [`prepare`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalization {
    /// New coordinates are `basis_change · v`.
    pub basis_change: IntMatrix,
    /// `u_0` (new coordinates) with `c'_i = c_i - (v_i, u_0)`.
    pub shift: RatVector,
    /// Integral parts removed from the shifted coefficients.
    pub integral_shift: TDivisor,
    pub c0_shift: BigInt,
}

/// Brings arbitrary input into the form of a [`BondalInstance`]. Input
/// already in that form keeps its coordinates.
pub fn prepare(fan: &Fan, sigma: &Cone, c0: &Rat, c: &QDivisor) -> Result<(BondalInstance, Normalization), BondalError> {
    check_center(fan, sigma)?;
    let n = fan.rank();
    let l = sigma.dim();
    let g = if already_normal(fan, sigma) { IntMatrix::identity(n) } else { normalize_center(fan, sigma)? };
    let fan2 = fan.transform(&g);
    let mut shift = vec![Rat::zero(); n];
    for (k, &id) in sigma.ray_ids().iter().enumerate() {
        shift[k] = c.coeff(id);
    }
    let mut integral_shift = TDivisor::zero();
    let mut c2 = QDivisor::zero();
    for r in fan2.rays() {
        let x = c.coeff(r.id) - pair(&r.generator, &shift);
        integral_shift.set_coeff(r.id, floor_rat(&x));
        c2.set_coeff(r.id, frac(&x));
    }
    let c0x = c0 - shift[..l].iter().sum::<Rat>();
    let c0_shift = floor_rat(&c0x);
    let inst = BondalInstance::new(fan2, sigma.clone(), frac(&c0x), c2)?;
    Ok((inst, Normalization { basis_change: g, shift, integral_shift, c0_shift }))
}

fn already_normal(fan: &Fan, sigma: &Cone) -> bool {
    let l = sigma.dim();
    sigma.ray_ids().iter().enumerate().all(|(k, &id)| {
        let g = fan.generator(id).unwrap();
        g.iter().enumerate().all(|(j, x)| *x == BigInt::from((j == k) as i64))
    }) && diagonal_ray(fan, l).is_none()
}

/// Unimodular `G` such that `G` maps the generators of `sigma` (in id
/// order) to `e_1, …, e_l` and no ray's leading `l` coordinates lie on the
/// open ray through `(1, …, 1)`.
///
/// After aligning `sigma`, shears `x_1 ↦ x_1 + Σ_{j>l} k_j x_j` are tried
/// in order of increasing `max |k_j|` (entries ordered `0, 1, -1, 2, -2,
/// …`, tuples lexicographic) until every ray with nonzero tail has
/// distinct first two coordinates.
pub fn normalize_center(fan: &Fan, sigma: &Cone) -> Result<IntMatrix, BondalError> {
    check_center(fan, sigma)?;
    let n = fan.rank();
    let l = sigma.dim();
    let gens = fan.generators_of(sigma).unwrap();
    let b = complete_to_basis(&gens, n).map_err(|_| BondalError::NotSmooth)?;
    let g0 = unimodular_inverse(&b).expect("completed basis is unimodular");
    for norm in 0..=MAX_SHEAR {
        for k in shear_tuples(n - l, norm) {
            let mut s = IntMatrix::identity(n);
            for (j, kj) in k.iter().enumerate() {
                s[(0, l + j)] = BigInt::from(*kj);
            }
            let g = s.mul(&g0);
            let moved = fan.transform(&g);
            let separated = moved.rays().iter().all(|r| {
                let v = &r.generator;
                v[l..].iter().all(Zero::is_zero) || v[0] != v[1]
            });
            if separated && diagonal_ray(&moved, l).is_none() {
                return Ok(g);
            }
        }
    }
    Err(BondalError::NoShear(MAX_SHEAR))
}

/// Tuples of length `len` with `max |k_j| = norm`, in search order.
fn shear_tuples(len: usize, norm: i64) -> Vec<Vec<i64>> {
    if norm == 0 || len == 0 {
        return if norm == 0 { vec![vec![0; len]] } else { Vec::new() };
    }
    let rank = |k: i64| if k > 0 { 2 * k - 1 } else { -2 * k };
    let values: Vec<i64> = (-norm..=norm).collect();
    let mut out: Vec<Vec<i64>> = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                values.iter().map(move |&v| {
                    let mut t = t.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
    }
    out.retain(|t| t.iter().any(|k| k.abs() == norm));
    out.sort_by_key(|t| t.iter().map(|&k| rank(k)).collect::<Vec<_>>());
    out
}

/// The stellar subdivision of the instance fan at `sigma`, with ray
/// bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlowupData {
    pub original: Fan,
    pub blown: Fan,
    pub center: Cone,
    pub exceptional: RayId,
    /// Original ray id to the id of its strict transform.
    pub strict: BTreeMap<RayId, RayId>,
}

pub fn blowup_tracked(inst: &BondalInstance) -> Result<BlowupData, BondalError> {
    let sub = inst.fan.stellar_subdivision(&inst.sigma)?;
    let expected: IntVector = (0..inst.n()).map(|j| BigInt::from((j < inst.l()) as i64)).collect();
    if sub.fan.generator(sub.new_ray) != Some(&expected) {
        return Err(BondalError::Postcondition("exceptional generator is not e_1 + … + e_l".into()));
    }
    Ok(BlowupData {
        original: inst.fan.clone(),
        blown: sub.fan,
        center: inst.sigma.clone(),
        exceptional: sub.new_ray,
        strict: sub.provenance,
    })
}

/// `X°` and `X̃°`: the fans with `Z` and its strict transform removed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Punctured {
    pub x: Fan,
    pub x_tilde: Fan,
    pub removed: Vec<Cone>,
    pub removed_tilde: Vec<Cone>,
}

/// Removes every cone of dimension at least 2 spanned by rays outside
/// `sigma` (downstairs), and by old rays outside `sigma` (upstairs).
pub fn z_removal(bd: &BlowupData) -> Result<Punctured, BondalError> {
    let sigma = &bd.center;
    let outside = |c: &Cone| c.dim() >= 2 && c.ray_ids().iter().all(|&r| !sigma.contains_ray(r));
    let removed: Vec<Cone> = bd.original.all_cones().into_iter().filter(|c| outside(c)).collect();
    let removed_tilde: Vec<Cone> = bd
        .blown
        .all_cones()
        .into_iter()
        .filter(|c| outside(c) && !c.contains_ray(bd.exceptional))
        .collect();
    let x = bd.original.remove_star(&removed);
    let x_tilde = bd.blown.remove_star(&removed_tilde);

    let y = x.orbit_closure(sigma)?;
    if y.fan.has_codim_ge2_strata() {
        return Err(BondalError::Postcondition("the orbit closure keeps a stratum of codimension 2".into()));
    }
    let old: Vec<RayId> = x_tilde
        .ray_ids()
        .into_iter()
        .filter(|&r| r != bd.exceptional && !sigma.contains_ray(r))
        .collect();
    for (a, &i) in old.iter().enumerate() {
        for &j in &old[a + 1..] {
            if x_tilde.divisors_intersect(i, j)? {
                return Err(BondalError::Postcondition(format!("D{i} and D{j} still meet")));
            }
        }
    }
    Ok(Punctured { x, x_tilde, removed, removed_tilde })
}

/// Everything derived from an instance once: the blow-up and the
/// punctured fans.
#[derive(Debug, Clone)]
pub struct BondalContext {
    pub instance: BondalInstance,
    pub blowup: BlowupData,
    pub punctured: Punctured,
}

impl BondalContext {
    pub fn new(instance: BondalInstance) -> Result<Self, BondalError> {
        let blowup = blowup_tracked(&instance)?;
        let punctured = z_removal(&blowup)?;
        Ok(BondalContext { instance, blowup, punctured })
    }

    /// `D̃ = c_0 Ỹ + Σ c_i D_i` on `X̃°`.
    pub fn tilde_qdivisor(&self) -> QDivisor {
        let mut d = self.instance.c.clone();
        d.set_coeff(self.blowup.exceptional, self.instance.c0.clone());
        d
    }

    /// The floor arguments `(v_i, u) + c_i` on `X̃°`, the exceptional ray
    /// getting `u_1 + … + u_l + c_0`.
    pub fn floor_arguments(&self, u: &[Rat]) -> Vec<(RayId, Rat)> {
        let l = self.instance.l();
        self.punctured
            .x_tilde
            .rays()
            .iter()
            .map(|r| {
                let x = if r.id == self.blowup.exceptional {
                    u[..l].iter().sum::<Rat>() + &self.instance.c0
                } else {
                    pair(&r.generator, u) + self.instance.c.coeff(r.id)
                };
                (r.id, x)
            })
            .collect()
    }

    /// Slopes of the floor arguments along `w ⊕ 0`.
    pub fn slopes(&self, w: &[Rat]) -> Vec<(RayId, Rat)> {
        let l = self.instance.l();
        self.punctured
            .x_tilde
            .rays()
            .iter()
            .map(|r| {
                let g = if r.id == self.blowup.exceptional {
                    w.iter().sum()
                } else {
                    pair(&r.generator[..l], w)
                };
                (r.id, g)
            })
            .collect()
    }
}

/// `D̃_u = ⌊u_1 + … + u_l + c_0⌋ Ỹ + Σ ⌊(v_i, u) + c_i⌋ D_i` on `X̃°`.
pub fn tilde_divisor_floor(ctx: &BondalContext, u: &[Rat]) -> TDivisor {
    assert_eq!(u.len(), ctx.instance.n(), "point dimension mismatch");
    TDivisor::from_pairs(ctx.floor_arguments(u).into_iter().map(|(id, x)| (id, floor_rat(&x))))
}

/// `π^* D`: old coefficients kept, the exceptional coefficient is the sum
/// of the coefficients on the rays of the center.
pub fn pullback_divisor(bd: &BlowupData, d: &TDivisor) -> TDivisor {
    let mut out = d.clone();
    let e: BigInt = bd.center.ray_ids().iter().map(|&id| d.coeff(id)).sum();
    out.add_coeff(bd.exceptional, &e);
    out
}

/// Checks `D̃_u = π^* D_u + ⌊u_1 + … + u_l + c_0⌋ Ỹ` with `D_u` taken on `X°`.
pub fn verify_pullback(ctx: &BondalContext, u: &[Rat]) -> Result<bool, BondalError> {
    let inst = &ctx.instance;
    if u.len() != inst.n() {
        return Err(BondalError::PreconditionViolated(format!("point has dimension {}", u.len())));
    }
    let l = inst.l();
    if u[..l].iter().any(|x| x.is_negative() || *x >= Rat::one()) {
        return Err(BondalError::PreconditionViolated("some u_i with i <= l is outside [0, 1)".into()));
    }
    let lhs = tilde_divisor_floor(ctx, u);
    let du = divisor_floor(&ctx.punctured.x, u, &inst.c);
    let d = floor_rat(&(u[..l].iter().sum::<Rat>() + &inst.c0));
    let mut rhs = pullback_divisor(&ctx.blowup, &du);
    rhs.add_coeff(ctx.blowup.exceptional, &d);
    Ok(lhs == rhs)
}

/// `lim_{ε→0+} ⌊x - εg⌋`.
pub fn limit_floor(x: &Rat, g: &Rat) -> BigInt {
    if is_integral(x) && g.is_positive() {
        x.to_integer() - 1
    } else {
        floor_rat(x)
    }
}

/// A positive `ε` below which `⌊x - εg⌋` has already reached its limit
/// for every pair: half the least distance from a non-integral `x` to the
/// integers (at most 1), over the largest `|g|`.
pub fn concrete_epsilon(args: &[Rat], slopes: &[Rat]) -> Rat {
    let mut delta = Rat::one();
    for x in args {
        let f = frac(x);
        if !f.is_zero() {
            let d = f.clone().min(Rat::one() - f);
            if d < delta {
                delta = d;
            }
        }
    }
    let gmax = slopes.iter().map(|g| g.abs()).max().filter(|g| !g.is_zero()).unwrap_or_else(Rat::one);
    delta / (gmax * Rat::from_integer(BigInt::from(2)))
}

/// `lim_{ε→0+} D̃_{u - ε(w ⊕ 0)}`, evaluated exactly.
pub fn perturb_symbolic(ctx: &BondalContext, u: &[Rat], w: &[Rat]) -> Result<TDivisor, BondalError> {
    let l = ctx.instance.l();
    if w.len() != l || u.len() != ctx.instance.n() {
        return Err(BondalError::PreconditionViolated("dimension mismatch".into()));
    }
    if !w.iter().sum::<Rat>().is_positive() {
        return Err(BondalError::PreconditionViolated("w is not in the reference half-space".into()));
    }
    let args = ctx.floor_arguments(u);
    let slopes = ctx.slopes(w);
    Ok(TDivisor::from_pairs(
        args.iter().zip(&slopes).map(|((id, x), (_, g))| (*id, limit_floor(x, g))),
    ))
}

/// `u - ε(w ⊕ 0)` for the concrete `ε` of [`concrete_epsilon`].
pub fn perturb_concrete(ctx: &BondalContext, u: &[Rat], w: &[Rat]) -> RatVector {
    let args: Vec<Rat> = ctx.floor_arguments(u).into_iter().map(|(_, x)| x).collect();
    let slopes: Vec<Rat> = ctx.slopes(w).into_iter().map(|(_, g)| g).collect();
    let eps = concrete_epsilon(&args, &slopes);
    u.iter()
        .enumerate()
        .map(|(j, x)| if j < w.len() { x - &eps * &w[j] } else { x.clone() })
        .collect()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::fan::examples::*;
    use crate::lattice::{int_vec, rat};

    pub(crate) fn p2_instance(c0: Rat, c3: Rat) -> BondalInstance {
        BondalInstance::new(p2(), Cone::new(vec![0, 1]), c0, QDivisor::from_pairs([(2, c3)])).unwrap()
    }

    pub(crate) fn p3_instance(c0: Rat, c: Rat) -> BondalInstance {
        BondalInstance::new(
            p3(),
            Cone::new(vec![0, 1]),
            c0,
            QDivisor::from_pairs([(2, c.clone()), (3, c)]),
        )
        .unwrap()
    }

    fn rv(xs: &[(i64, i64)]) -> RatVector {
        xs.iter().map(|&(a, b)| rat(a, b)).collect()
    }

    #[test]
    fn normalize_p2_is_identity() {
        let g = normalize_center(&p2(), &Cone::new(vec![0, 1])).unwrap();
        assert_eq!(g, IntMatrix::identity(2));
    }

    #[test]
    fn normalize_shears_the_diagonal_ray() {
        let fan = Fan::from_i64(
            3,
            &[&[1, 0, 0], &[0, 1, 0], &[1, 1, 1], &[0, 0, -1]],
            &[&[0, 1, 2], &[0, 1, 3]],
        )
        .unwrap();
        let g = normalize_center(&fan, &Cone::new(vec![0, 1])).unwrap();
        assert_eq!(g.mul_vec(&int_vec(&[1, 1, 1])), int_vec(&[2, 1, 1]));
        assert_eq!(g.mul_vec(&int_vec(&[1, 0, 0])), int_vec(&[1, 0, 0]));
        assert_eq!(g.mul_vec(&int_vec(&[0, 1, 0])), int_vec(&[0, 1, 0]));
    }

    #[test]
    fn normalize_aligns_a_tilted_center() {
        // P² in the basis (1,1), (0,1)
        let fan = Fan::from_i64(2, &[&[1, 1], &[0, 1], &[-1, -2]], &[&[0, 1], &[1, 2], &[0, 2]]).unwrap();
        let g = normalize_center(&fan, &Cone::new(vec![0, 1])).unwrap();
        let moved = fan.transform(&g);
        assert_eq!(moved.generator(0).unwrap(), &int_vec(&[1, 0]));
        assert_eq!(moved.generator(1).unwrap(), &int_vec(&[0, 1]));
        assert_eq!(moved.generator(2).unwrap(), &int_vec(&[-1, -1]));
    }

    #[test]
    fn shear_order() {
        assert_eq!(shear_tuples(2, 0), vec![vec![0, 0]]);
        let t = shear_tuples(2, 1);
        assert_eq!(t[0], vec![0, 1]);
        assert_eq!(t[1], vec![0, -1]);
        assert_eq!(t[2], vec![1, 0]);
        assert_eq!(t.len(), 8);
        assert_eq!(shear_tuples(0, 0), vec![Vec::<i64>::new()]);
    }

    #[test]
    fn p3_is_sheared_by_prepare_only_when_needed() {
        let sigma = Cone::new(vec![0, 1]);
        let (inst, norm) = prepare(&p3(), &sigma, &rat(0, 1), &QDivisor::zero()).unwrap();
        assert_eq!(norm.basis_change, IntMatrix::identity(3));
        assert_eq!(inst.fan, p3());
        let g = normalize_center(&p3(), &sigma).unwrap();
        assert_eq!(g.mul_vec(&int_vec(&[0, 0, 1])), int_vec(&[1, 0, 1]));
        assert_eq!(g.mul_vec(&int_vec(&[-1, -1, -1])), int_vec(&[-2, -1, -1]));
    }

    #[test]
    fn prepare_shifts_coefficients() {
        let sigma = Cone::new(vec![0, 1]);
        let c = QDivisor::from_pairs([(0, rat(1, 2)), (1, rat(1, 3)), (2, rat(7, 4))]);
        let (inst, norm) = prepare(&p2(), &sigma, &rat(5, 3), &c).unwrap();
        // u0 = (1/2, 1/3): c'_3 = 7/4 + 5/6 = 31/12, c0' = 5/3 - 5/6 = 5/6
        assert_eq!(norm.shift, rv(&[(1, 2), (1, 3)]));
        assert_eq!(inst.c, QDivisor::from_pairs([(2, rat(7, 12))]));
        assert_eq!(norm.integral_shift, TDivisor::from_i64(&[(2, 2)]));
        assert_eq!(inst.c0, rat(5, 6));
        assert_eq!(norm.c0_shift, BigInt::zero());
    }

    #[test]
    fn instance_validation() {
        let sigma = Cone::new(vec![0, 1]);
        let bad = BondalInstance::new(p2(), sigma.clone(), rat(0, 1), QDivisor::from_pairs([(0, rat(1, 2))]));
        assert_eq!(bad.unwrap_err(), BondalError::CoefficientRange(0));
        let bad = BondalInstance::new(p2(), sigma.clone(), rat(1, 1), QDivisor::zero());
        assert_eq!(bad.unwrap_err(), BondalError::ExceptionalCoefficientRange);
        let bad = BondalInstance::new(p2(), Cone::new(vec![1, 2]), rat(0, 1), QDivisor::zero());
        assert_eq!(bad.unwrap_err(), BondalError::CenterNotStandard);
        let bad = BondalInstance::new(p2(), Cone::new(vec![0]), rat(0, 1), QDivisor::zero());
        assert!(matches!(bad.unwrap_err(), BondalError::CenterTooSmall(_)));
    }

    #[test]
    fn z_removal_examples() {
        let ctx = BondalContext::new(p2_instance(rat(0, 1), rat(0, 1))).unwrap();
        assert!(ctx.punctured.removed.is_empty());
        assert_eq!(ctx.punctured.x, p2());

        let ctx = BondalContext::new(p3_instance(rat(0, 1), rat(0, 1))).unwrap();
        let c23 = Cone::new(vec![2, 3]);
        assert!(ctx.punctured.removed.contains(&c23));
        assert!(!ctx.punctured.x.contains_cone(&c23));
        assert!(!ctx.punctured.x_tilde.contains_cone(&c23));
        assert!(ctx.punctured.x.contains_cone(&Cone::new(vec![0, 1, 2])));
        assert!(!ctx.punctured.x.contains_cone(&Cone::new(vec![0, 2, 3])));

        let a2i = BondalInstance::new(a2(), Cone::new(vec![0, 1]), rat(0, 1), QDivisor::zero()).unwrap();
        let ctx = BondalContext::new(a2i).unwrap();
        assert!(ctx.punctured.removed.is_empty() && ctx.punctured.removed_tilde.is_empty());
    }

    #[test]
    fn blowup_of_p2_is_f1() {
        let ctx = BondalContext::new(p2_instance(rat(0, 1), rat(0, 1))).unwrap();
        assert_eq!(ctx.blowup.blown, f1());
        assert_eq!(ctx.blowup.exceptional, 3);
    }

    #[test]
    fn tilde_floor_examples() {
        let ctx = BondalContext::new(p2_instance(rat(0, 1), rat(0, 1))).unwrap();
        assert!(tilde_divisor_floor(&ctx, &rv(&[(0, 1), (0, 1)])).is_zero());
        assert_eq!(tilde_divisor_floor(&ctx, &rv(&[(1, 3), (1, 3)])), TDivisor::from_i64(&[(2, -1)]));
        assert_eq!(
            tilde_divisor_floor(&ctx, &rv(&[(1, 2), (2, 3)])),
            TDivisor::from_i64(&[(3, 1), (2, -2)])
        );
    }

    #[test]
    fn tilde_floor_matches_plain_floor_upstairs() {
        let ctx = BondalContext::new(p3_instance(rat(1, 2), rat(1, 3))).unwrap();
        let d = ctx.tilde_qdivisor();
        for u in [rv(&[(1, 4), (3, 4), (1, 2)]), rv(&[(0, 1), (5, 6), (2, 3)])] {
            assert_eq!(tilde_divisor_floor(&ctx, &u), divisor_floor(&ctx.punctured.x_tilde, &u, &d));
        }
    }

    #[test]
    fn pullback_examples() {
        let ctx = BondalContext::new(p2_instance(rat(0, 1), rat(0, 1))).unwrap();
        assert_eq!(pullback_divisor(&ctx.blowup, &TDivisor::prime(0)), TDivisor::from_i64(&[(0, 1), (3, 1)]));
        assert_eq!(pullback_divisor(&ctx.blowup, &TDivisor::prime(2)), TDivisor::prime(2));
        assert!(pullback_divisor(&ctx.blowup, &TDivisor::zero()).is_zero());
    }

    #[test]
    fn pullback_identity_on_grid() {
        let ctx = BondalContext::new(p2_instance(rat(0, 1), rat(0, 1))).unwrap();
        for u in [rv(&[(1, 3), (1, 3)]), rv(&[(1, 2), (2, 3)]), rv(&[(0, 1), (0, 1)])] {
            assert!(verify_pullback(&ctx, &u).unwrap());
        }
        assert!(matches!(
            verify_pullback(&ctx, &rv(&[(1, 1), (0, 1)])),
            Err(BondalError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn limit_floor_cases() {
        assert_eq!(limit_floor(&rat(1, 2), &rat(5, 1)), BigInt::zero());
        assert_eq!(limit_floor(&rat(1, 1), &rat(1, 1)), BigInt::zero());
        assert_eq!(limit_floor(&rat(1, 1), &rat(-1, 1)), BigInt::one());
        assert_eq!(limit_floor(&rat(1, 1), &rat(0, 1)), BigInt::one());
        assert_eq!(limit_floor(&rat(-1, 3), &rat(-1, 1)), BigInt::from(-1));
    }

    #[test]
    fn concrete_epsilon_agrees_with_limit() {
        let args = rv(&[(1, 2), (1, 1), (-2, 3), (0, 1)]);
        let slopes = rv(&[(3, 1), (2, 1), (-5, 1), (-1, 1)]);
        let eps = concrete_epsilon(&args, &slopes);
        for (x, g) in args.iter().zip(&slopes) {
            assert_eq!(floor_rat(&(x - &eps * g)), limit_floor(x, g));
        }
    }
}
