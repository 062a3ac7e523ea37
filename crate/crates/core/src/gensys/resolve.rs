//! Koszul resolutions of the structure sheaf from chamber line bundles,
//! following the planar induction and the quotient/slice reduction for
//! higher dimensions.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::certificate::{CertNode, Certificate, NodeKind};
use super::chamber::{chambers, clockwise_cmp};
use super::{formal_add, formal_from_set, formal_to_string, FormalSum, GenSysError, GeneratingSystem, HalfSpace, Item};
use crate::lattice::{dot, dot_rat, rat_int, rational, to_rat_vec, RatVector};

#[derive(Debug, Clone)]
enum Proof {
    Leaf(FormalSum),
    Koszul {
        target: FormalSum,
        d: BTreeSet<String>,
        e: BTreeSet<String>,
        children: Box<[Proof; 3]>,
    },
}

impl Proof {
    fn target(&self) -> &FormalSum {
        match self {
            Proof::Leaf(t) => t,
            Proof::Koszul { target, .. } => target,
        }
    }

    /// Tensors every node by `O(by)`.
    fn twist(self, by: &FormalSum) -> Proof {
        match self {
            Proof::Leaf(t) => Proof::Leaf(formal_add(&t, by, 1)),
            Proof::Koszul { target, d, e, children } => {
                let [a, b, c] = *children;
                Proof::Koszul {
                    target: formal_add(&target, by, 1),
                    d,
                    e,
                    children: Box::new([a.twist(by), b.twist(by), c.twist(by)]),
                }
            }
        }
    }

    /// Replaces every leaf by `f(leaf target)`.
    fn map_leaves(self, f: &mut dyn FnMut(&FormalSum) -> Result<Proof, GenSysError>) -> Result<Proof, GenSysError> {
        match self {
            Proof::Leaf(t) => f(&t),
            Proof::Koszul { target, d, e, children } => {
                let [a, b, c] = *children;
                Ok(Proof::Koszul {
                    target,
                    d,
                    e,
                    children: Box::new([a.map_leaves(f)?, b.map_leaves(f)?, c.map_leaves(f)?]),
                })
            }
        }
    }
}

/// A certificate that `O` is generated by the `O(-D_[w])`.
pub fn resolve(gs: &GeneratingSystem) -> Result<Certificate, GenSysError> {
    resolve_twisted(gs, &FormalSum::new())
}

/// The same resolution tensored by `O(twist)`: root target `twist`, leaves
/// `twist - D_[w]`.
pub fn resolve_twisted(gs: &GeneratingSystem, twist: &FormalSum) -> Result<Certificate, GenSysError> {
    let proof = prove(gs)?.twist(twist);
    let mut chamber_of: HashMap<FormalSum, String> = HashMap::new();
    for c in chambers(gs) {
        chamber_of
            .entry(formal_from_set(&c.divisor))
            .or_insert_with(|| super::signs_to_string(&c.signs));
    }
    let mut builder = DagBuilder { nodes: Vec::new(), index: HashMap::new() };
    let root = builder.add(&proof, twist, &chamber_of)?;
    Ok(Certificate { root, twist: twist.clone(), nodes: builder.nodes })
}

struct DagBuilder {
    nodes: Vec<CertNode>,
    index: HashMap<(FormalSum, NodeKind), usize>,
}

impl DagBuilder {
    fn add(&mut self, p: &Proof, twist: &FormalSum, chamber_of: &HashMap<FormalSum, String>) -> Result<usize, GenSysError> {
        let kind = match p {
            Proof::Leaf(t) => {
                let div = formal_add(twist, t, -1);
                let chamber = chamber_of
                    .get(&div)
                    .ok_or_else(|| GenSysError::NoChamberFor(formal_to_string(&div)))?
                    .clone();
                NodeKind::Leaf { chamber }
            }
            Proof::Koszul { d, e, children, .. } => {
                let mut ids = [0; 3];
                for (slot, c) in ids.iter_mut().zip(children.iter()) {
                    *slot = self.add(c, twist, chamber_of)?;
                }
                NodeKind::Koszul { d: formal_from_set(d), e: formal_from_set(e), children: ids }
            }
        };
        let key = (p.target().clone(), kind);
        if let Some(&id) = self.index.get(&key) {
            return Ok(id);
        }
        let id = self.nodes.len();
        self.nodes.push(CertNode { id, target: key.0.clone(), kind: key.1.clone() });
        self.index.insert(key, id);
        Ok(id)
    }
}

fn prove(gs: &GeneratingSystem) -> Result<Proof, GenSysError> {
    if gs.items().is_empty() {
        return Ok(Proof::Leaf(FormalSum::new()));
    }
    if gs.dim() == 2 {
        prove_planar(gs)
    } else {
        prove_higher(gs)
    }
}

/// Planar induction: look at the first wall met going clockwise.
fn prove_planar(gs: &GeneratingSystem) -> Result<Proof, GenSysError> {
    if gs.items().is_empty() {
        return Ok(Proof::Leaf(FormalSum::new()));
    }
    let fp = gs.wplus().normal();
    let e = vec![fp[1].clone(), -&fp[0]];
    let wall = |f: &[BigInt]| -> Vec<BigInt> {
        let d = vec![-&f[1], f[0].clone()];
        if dot(fp, &d).is_negative() {
            d.into_iter().map(|x| -x).collect()
        } else {
            d
        }
    };
    let walls: Vec<Vec<BigInt>> = gs.items().iter().map(|it| wall(it.half.normal())).collect();
    let first = walls
        .iter()
        .min_by(|a, b| clockwise_cmp(a, b))
        .unwrap()
        .clone();
    let at_first: Vec<usize> = (0..walls.len()).filter(|&i| walls[i] == first).collect();
    // An item is of "+" type when its positive side contains the clockwise
    // end `e`, "-" type otherwise.
    let plus_type = |i: usize| dot(gs.items()[i].half.normal(), &e).is_positive();
    if let Some(&minus) = at_first.iter().find(|&&i| !plus_type(i)) {
        return prove_planar(&without(gs, minus)?);
    }
    let p = at_first[0];
    let reduced = without(gs, p)?;
    let d1 = gs.items()[p].primes.clone();
    let e1: BTreeSet<String> = reduced
        .items()
        .iter()
        .filter(|it| !dot(it.half.normal(), &e).is_positive())
        .flat_map(|it| it.primes.iter().cloned())
        .collect();
    if e1.is_empty() {
        return Ok(Proof::Leaf(FormalSum::new()));
    }
    let neg_d1: FormalSum = formal_add(&FormalSum::new(), &formal_from_set(&d1), -1);
    let neg_e1: FormalSum = formal_add(&FormalSum::new(), &formal_from_set(&e1), -1);
    let neg_both = formal_add(&neg_d1, &formal_from_set(&e1), -1);
    let sub = prove_planar(&reduced)?.twist(&neg_d1);
    Ok(Proof::Koszul {
        target: FormalSum::new(),
        d: d1,
        e: e1,
        children: Box::new([sub, Proof::Leaf(neg_e1), Proof::Leaf(neg_both)]),
    })
}

fn without(gs: &GeneratingSystem, idx: usize) -> Result<GeneratingSystem, GenSysError> {
    let items = gs
        .items()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != idx)
        .map(|(_, it)| it.clone())
        .collect();
    GeneratingSystem::new(gs.dim(), gs.wplus().clone(), items)
}

/// Two-dimensional system on `W / U`, `U` the common boundary of `W⁺` and
/// item `pivot`. Coordinates on the quotient are `(f⁺·w, f_pivot·w)`.
/// Returns the system and the original indices of its items.
pub fn quotient_system(gs: &GeneratingSystem, pivot: usize) -> Result<(GeneratingSystem, Vec<usize>), GenSysError> {
    let fp = gs.wplus().normal();
    let f1 = gs.items()[pivot].half.normal();
    let rows: Vec<RatVector> = (0..gs.dim())
        .map(|j| vec![rat_int(fp[j].clone()), rat_int(f1[j].clone())])
        .collect();
    let mut items = Vec::new();
    let mut origin = Vec::new();
    for (i, it) in gs.items().iter().enumerate() {
        if let Some(ab) = rational::solve(&rows, &to_rat_vec(it.half.normal()), 2) {
            let half = HalfSpace::from_rat(&ab).expect("nonzero normal");
            items.push(Item { half, primes: it.primes.clone() });
            origin.push(i);
        }
    }
    let q = GeneratingSystem::new(2, HalfSpace::from_i64(&[1, 0]), items)?;
    Ok((q, origin))
}

/// The system induced on the hyperplane spanned by `u_basis` and `p`,
/// in the coordinates of that basis. Items whose boundary contains
/// `span(u_basis)` are left out; items with equal restrictions are merged.
pub fn slice_system(gs: &GeneratingSystem, u_basis: &[RatVector], p: &RatVector) -> Result<GeneratingSystem, GenSysError> {
    if u_basis.iter().chain(std::iter::once(p)).any(|b| b.len() != gs.dim()) {
        return Err(GenSysError::BadSliceBasis);
    }
    let basis: Vec<&RatVector> = u_basis.iter().chain(std::iter::once(p)).collect();
    let restrict = |f: &[BigInt]| -> RatVector {
        let f = to_rat_vec(f);
        basis.iter().map(|b| dot_rat(&f, b)).collect()
    };
    let wplus = HalfSpace::from_rat(&restrict(gs.wplus().normal())).ok_or(GenSysError::BadSliceBasis)?;
    let minus = wplus.opposite();
    let mut items: Vec<Item> = Vec::new();
    for (i, it) in gs.items().iter().enumerate() {
        let r = restrict(it.half.normal());
        if r[..u_basis.len()].iter().all(Zero::is_zero) {
            continue;
        }
        let half = HalfSpace::from_rat(&r).ok_or(GenSysError::VanishingOnSlice(i))?;
        if half == wplus || half == minus {
            return Err(GenSysError::DegenerateSlice(i));
        }
        match items.iter_mut().find(|x| x.half == half) {
            Some(existing) => existing.primes.extend(it.primes.iter().cloned()),
            None => items.push(Item { half, primes: it.primes.clone() }),
        }
    }
    GeneratingSystem::new(basis.len(), wplus, items)
}

/// Quotient/slice reduction: resolve `O` on the planar quotient, then
/// resolve each quotient leaf `O(-D'_{w'})` on the slice `H(w')`.
fn prove_higher(gs: &GeneratingSystem) -> Result<Proof, GenSysError> {
    let (quot, _) = quotient_system(gs, 0)?;
    let quot_chambers = chambers(&quot);
    let fp = to_rat_vec(gs.wplus().normal());
    let f1 = to_rat_vec(gs.items()[0].half.normal());
    let span_rows = vec![fp.clone(), f1.clone()];
    let u_basis = rational::nullspace(&span_rows, gs.dim());
    let mut memo: HashMap<FormalSum, Proof> = HashMap::new();
    prove_planar(&quot)?.map_leaves(&mut |target| {
        if let Some(p) = memo.get(target) {
            return Ok(p.clone());
        }
        let div = formal_add(&FormalSum::new(), target, -1);
        let ch = quot_chambers
            .iter()
            .find(|c| formal_from_set(&c.divisor) == div)
            .ok_or_else(|| GenSysError::NoChamberFor(formal_to_string(&div)))?;
        let p = rational::solve(&span_rows, &ch.witness, gs.dim()).expect("f⁺ and f_1 are independent");
        let slice = slice_system(gs, &u_basis, &p)?;
        let sub = prove(&slice)?.twist(target);
        memo.insert(target.clone(), sub.clone());
        Ok(sub)
    })
}
