use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{divisor_of_signs, GeneratingSystem, Sign};
use crate::lattice::lp::{feasible_point, Constraint, Relation};
use crate::lattice::{dot, pair, to_rat_vec, Rat, RatVector};

/// A realizable sign pattern of points of the open `W⁺`, up to positive
/// scaling, with a witness point and the associated divisor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chamber {
    pub signs: Vec<Sign>,
    pub witness: RatVector,
    pub divisor: BTreeSet<String>,
}

pub fn sign_vector(gs: &GeneratingSystem, w: &[Rat]) -> Vec<Sign> {
    gs.items().iter().map(|it| Sign::of(&pair(it.half.normal(), w))).collect()
}

/// Every realizable sign vector, walls included. In dimension 2 the list
/// runs clockwise (from the end of `W⁺` reached last by a clockwise
/// rotation, i.e. decreasing angle); otherwise it is lexicographic in the
/// order `+ < 0 < -`.
pub fn chambers(gs: &GeneratingSystem) -> Vec<Chamber> {
    if gs.dim() == 2 {
        sweep(gs)
    } else {
        chambers_on_hyperplanes(gs, &[])
    }
}

fn make_chamber(gs: &GeneratingSystem, witness: RatVector) -> Chamber {
    let signs = sign_vector(gs, &witness);
    let divisor = divisor_of_signs(gs, &signs);
    Chamber { signs, witness, divisor }
}

fn sweep(gs: &GeneratingSystem) -> Vec<Chamber> {
    let fp = gs.wplus().normal();
    // `e` spans the boundary line on the clockwise end.
    let e = vec![fp[1].clone(), -&fp[0]];
    let mut walls: Vec<Vec<BigInt>> = gs
        .items()
        .iter()
        .map(|it| {
            let f = it.half.normal();
            let d = vec![-&f[1], f[0].clone()];
            if dot(fp, &d).is_negative() {
                d.into_iter().map(|x| -x).collect()
            } else {
                d
            }
        })
        .collect();
    walls.sort_by(|a, b| clockwise_cmp(a, b));
    walls.dedup();
    let add = |a: &[BigInt], b: &[BigInt]| -> Vec<BigInt> { a.iter().zip(b).map(|(x, y)| x + y).collect() };
    let mut witnesses: Vec<Vec<BigInt>> = Vec::new();
    match (walls.first(), walls.last()) {
        (Some(first), Some(last)) => {
            let neg_e: Vec<BigInt> = e.iter().map(|x| -x).collect();
            witnesses.push(add(first, &neg_e));
            for (i, w) in walls.iter().enumerate() {
                if i > 0 {
                    witnesses.push(add(&walls[i - 1], w));
                }
                witnesses.push(w.clone());
            }
            witnesses.push(add(last, &e));
        }
        _ => witnesses.push(fp.clone()),
    }
    witnesses.into_iter().map(|w| make_chamber(gs, to_rat_vec(&w))).collect()
}

/// `a` comes first going clockwise iff `a × b < 0`. Both vectors lie in
/// the same open half-plane, so this is a total order on directions.
pub(super) fn clockwise_cmp(a: &[BigInt], b: &[BigInt]) -> Ordering {
    let c = &a[0] * &b[1] - &a[1] * &b[0];
    if c.is_negative() {
        Ordering::Less
    } else if c.is_positive() {
        Ordering::Greater
    } else {
        Ordering::Equal
    }
}

fn constraints_for(gs: &GeneratingSystem, signs: &[Sign], eqs: &[RatVector]) -> Vec<Constraint> {
    let mut cons = vec![Constraint::new(to_rat_vec(gs.wplus().normal()), Relation::Ge, Rat::one())];
    for (it, s) in gs.items().iter().zip(signs) {
        let f = to_rat_vec(it.half.normal());
        cons.push(match s {
            Sign::Plus => Constraint::new(f, Relation::Ge, Rat::one()),
            Sign::Zero => Constraint::new(f, Relation::Eq, Rat::zero()),
            Sign::Minus => Constraint::new(f, Relation::Le, -Rat::one()),
        });
    }
    for e in eqs {
        cons.push(Constraint::new(e.clone(), Relation::Eq, Rat::zero()));
    }
    cons
}

/// A point of the open `W⁺` with exactly these signs, if one exists.
/// Strict inequalities are homogeneous, so they can be scaled to `≥ 1`.
pub fn realizes(gs: &GeneratingSystem, signs: &[Sign]) -> Option<RatVector> {
    if signs.len() != gs.items().len() {
        return None;
    }
    feasible_point(gs.dim(), &constraints_for(gs, signs, &[]))
}

/// Chambers of points of `W⁺` that also satisfy the linear equations
/// `(e, w) = 0`, by depth-first search over partial sign vectors pruned by
/// exact feasibility.
pub fn chambers_on_hyperplanes(gs: &GeneratingSystem, eqs: &[RatVector]) -> Vec<Chamber> {
    let mut out = Vec::new();
    let mut signs = Vec::new();
    dfs(gs, eqs, &mut signs, &mut out);
    out
}

fn dfs(gs: &GeneratingSystem, eqs: &[RatVector], signs: &mut Vec<Sign>, out: &mut Vec<Chamber>) {
    let Some(w) = feasible_point(gs.dim(), &constraints_for(gs, signs, eqs)) else {
        return;
    };
    if signs.len() == gs.items().len() {
        let divisor = divisor_of_signs(gs, signs);
        out.push(Chamber { signs: signs.clone(), witness: w, divisor });
        return;
    }
    for s in [Sign::Plus, Sign::Zero, Sign::Minus] {
        signs.push(s);
        dfs(gs, eqs, signs, out);
        signs.pop();
    }
}
