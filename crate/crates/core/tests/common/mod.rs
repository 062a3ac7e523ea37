//! Random generators shared by the integration tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use rand::Rng;

use toric_thomsen::divisor::QDivisor;
use toric_thomsen::fan::examples::*;
use toric_thomsen::fan::{Cone, Fan};
use toric_thomsen::gensys::{
    chambers, signs_to_string, Certificate, GeneratingSystem, HalfSpace, Item, NodeKind,
};
use toric_thomsen::lattice::{int_vec, pair, rat, IntMatrix, Rat};

pub fn random_qdivisor<R: Rng>(rng: &mut R, fan: &Fan, max_den: i64) -> QDivisor {
    QDivisor::from_pairs(fan.ray_ids().into_iter().map(|id| {
        let den = rng.gen_range(1..=max_den);
        (id, rat(rng.gen_range(-2 * den..=2 * den), den))
    }))
}

fn nonzero_vec<R: Rng>(rng: &mut R, dim: usize, bound: i64) -> Vec<i64> {
    loop {
        let v: Vec<i64> = (0..dim).map(|_| rng.gen_range(-bound..=bound)).collect();
        if v.iter().any(|&x| x != 0) {
            return v;
        }
    }
}

/// A valid system with `s` items, each with one or two primes. Items
/// that would violate the system rules are redrawn.
pub fn random_system<R: Rng>(rng: &mut R, dim: usize, s: usize) -> GeneratingSystem {
    let wplus = HalfSpace::new(&int_vec(&nonzero_vec(rng, dim, 2))).unwrap();
    let mut items: Vec<Item> = Vec::new();
    let mut next = 0;
    while items.len() < s {
        let half = HalfSpace::new(&int_vec(&nonzero_vec(rng, dim, 3))).unwrap();
        if half == wplus || half == wplus.opposite() || items.iter().any(|it| it.half == half) {
            continue;
        }
        let k = rng.gen_range(1..=2);
        let primes: Vec<String> = (next..next + k).map(|i| format!("P{i}")).collect();
        next += k;
        items.push(Item::new(half, primes));
    }
    GeneratingSystem::new(dim, wplus, items).unwrap()
}

/// Random rational point of the open reference half-space.
pub fn sample_w<R: Rng>(rng: &mut R, gs: &GeneratingSystem) -> Vec<Rat> {
    loop {
        let den = rng.gen_range(1..=60);
        let w: Vec<Rat> = (0..gs.dim()).map(|_| rat(rng.gen_range(-5 * den..=5 * den), den)).collect();
        if pair(gs.wplus().normal(), &w) > Rat::from_integer(BigInt::from(0)) {
            return w;
        }
    }
}

/// A single-node change that no valid certificate survives, with a label.
pub fn mutate<R: Rng>(rng: &mut R, cert: &Certificate, gs: &GeneratingSystem) -> (Certificate, &'static str) {
    let mut bad = cert.clone();
    let alphabet: Vec<String> = gs.alphabet().into_iter().collect();
    let koszul: Vec<usize> =
        (0..bad.nodes.len()).filter(|&i| matches!(bad.nodes[i].kind, NodeKind::Koszul { .. })).collect();
    let leaves: Vec<usize> =
        (0..bad.nodes.len()).filter(|&i| matches!(bad.nodes[i].kind, NodeKind::Leaf { .. })).collect();
    match rng.gen_range(0..4) {
        1 if !koszul.is_empty() => {
            let i = koszul[rng.gen_range(0..koszul.len())];
            if let NodeKind::Koszul { d, e, .. } = &mut bad.nodes[i].kind {
                let p = e.keys().next().unwrap().clone();
                d.insert(p, 1);
            }
            return (bad, "shared Koszul prime");
        }
        2 if !koszul.is_empty() => {
            let i = koszul[rng.gen_range(0..koszul.len())];
            if let NodeKind::Koszul { children, .. } = &mut bad.nodes[i].kind {
                children.swap(0, 2);
            }
            return (bad, "swapped children");
        }
        3 => {
            let i = leaves[rng.gen_range(0..leaves.len())];
            let current = match &bad.nodes[i].kind {
                NodeKind::Leaf { chamber } => chamber.clone(),
                _ => unreachable!(),
            };
            let cur_div = chambers(gs).into_iter().find(|c| signs_to_string(&c.signs) == current).map(|c| c.divisor);
            if let Some(other) = chambers(gs).into_iter().find(|c| Some(&c.divisor) != cur_div.as_ref()) {
                bad.nodes[i].kind = NodeKind::Leaf { chamber: signs_to_string(&other.signs) };
                return (bad, "leaf chamber replaced");
            }
        }
        _ => {}
    }
    let i = rng.gen_range(0..bad.nodes.len());
    let name = if alphabet.is_empty() { "Q".to_string() } else { alphabet[rng.gen_range(0..alphabet.len())].clone() };
    let delta = if rng.gen_bool(0.5) { 1 } else { -1 };
    let t = &mut bad.nodes[i].target;
    let v = t.get(&name).copied().unwrap_or(0) + delta;
    if v == 0 {
        t.remove(&name);
    } else {
        t.insert(name, v);
    }
    (bad, "target coefficient changed")
}

pub fn random_unimodular<R: Rng>(rng: &mut R, n: usize) -> IntMatrix {
    let mut m = IntMatrix::identity(n);
    if n < 2 {
        if rng.gen_bool(0.5) {
            m.negate_row(0);
        }
        return m;
    }
    for _ in 0..rng.gen_range(0..6) {
        let a = rng.gen_range(0..n);
        let b = (a + rng.gen_range(1..n)) % n;
        match rng.gen_range(0..3) {
            0 => m.swap_rows(a, b),
            1 => m.negate_row(a),
            _ => m.add_row_multiple(a, b, &BigInt::from(rng.gen_range(-2i64..=2))),
        }
    }
    m
}

pub fn test_fans() -> Vec<Fan> {
    vec![p1(), p2(), p1xp1(), a2(), p3(), torsion(), f1()]
}

/// A test fan in random coordinates after up to two stellar subdivisions.
pub fn random_fan<R: Rng>(rng: &mut R) -> Fan {
    random_fan_from(rng, &test_fans())
}

pub fn random_fan_from<R: Rng>(rng: &mut R, bases: &[Fan]) -> Fan {
    let base = &bases[rng.gen_range(0..bases.len())];
    let mut fan = base.transform(&random_unimodular(rng, base.rank()));
    for _ in 0..rng.gen_range(0..=2) {
        let cones: Vec<Cone> = fan.all_cones().into_iter().filter(|c| c.dim() >= 2).collect();
        if cones.is_empty() {
            break;
        }
        let c = &cones[rng.gen_range(0..cones.len())];
        fan = fan.stellar_subdivision(c).unwrap().fan;
    }
    fan
}
