//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{mutate, random_qdivisor, random_system, sample_w};
use toric_thomsen::bondal::{
    admissible_points, d_window, expected_window, prepare, ray_witnesses, restriction_test, verify_descent,
    verify_pullback, BondalContext, BondalInstance,
};
use toric_thomsen::divisor::{ClassGroup, DivClass, QDivisor, TDivisor};
use toric_thomsen::fan::examples::*;
use toric_thomsen::fan::{Cone, Fan};
use toric_thomsen::gensys::{
    chambers, chambers_on_hyperplanes, formal_from_set, formal_to_string, resolve, sign_vector, verify_certificate,
    GeneratingSystem,
};
use toric_thomsen::lattice::{floor_rat, rat, Rat};
use toric_thomsen::thomsen::{divisor_floor, frobenius_cube, frobenius_lattice, shift_classes, thomsen_collection};

const SEED: u64 = 0x7463_6f6c_6c65;
const SYSTEMS_2D: usize = 100;
const SYSTEMS_3D: usize = 25;
const MUTATIONS: usize = 50;
const SAMPLES_PER_SYSTEM: usize = 1000;
const SHIFTS_PER_FAN: usize = 20;
const FLOOR_SAMPLES: usize = 10_000;
const MIN_PULLBACK_CHECKS: usize = 200;

type Check = Result<String, String>;
type Criterion = (&'static str, Box<dyn FnOnce(&mut ChaCha8Rng) -> Check>);

fn frobenius_fans() -> Vec<(&'static str, Fan)> {
    vec![("P1", p1()), ("P2", p2()), ("P1xP1", p1xp1()), ("A2", a2()), ("P3", p3()), ("torsion", torsion())]
}

fn distinct(a: &str, b: &str) -> bool {
    a != b
}

fn rank_identity() -> Check {
    let mut n_checks = 0;
    for (name, fan) in frobenius_fans() {
        for m in 1..=4u64 {
            let expected = m.pow(fan.rank() as u32);
            let cube = frobenius_cube(&fan, m, &TDivisor::zero()).map_err(|e| e.to_string())?;
            let lat = frobenius_lattice(&fan, m, &QDivisor::zero()).map_err(|e| e.to_string())?;
            if cube.total() != expected || lat.total() != expected {
                return Err(format!("{name}, m = {m}: totals {} / {}, expected {expected}", cube.total(), lat.total()));
            }
            n_checks += 1;
        }
    }
    Ok(format!("{n_checks} fan/m pairs sum to m^n"))
}

fn oracle_equivalence() -> Check {
    let mut n_checks = 0;
    for (name, fan) in frobenius_fans() {
        for m in 1..=4u64 {
            let cube = frobenius_cube(&fan, m, &TDivisor::zero()).map_err(|e| e.to_string())?;
            let lat = frobenius_lattice(&fan, m, &QDivisor::zero()).map_err(|e| e.to_string())?;
            if cube.multiplicities != lat.multiplicities {
                return Err(format!("{name}, m = {m}: methods disagree"));
            }
            n_checks += 1;
        }
    }
    let dec = frobenius_cube(&torsion(), 2, &TDivisor::zero()).unwrap();
    let zero = DivClass { free: vec![], torsion: vec![BigInt::from(0)] };
    let t = DivClass { free: vec![], torsion: vec![BigInt::from(1)] };
    let expected: BTreeMap<DivClass, u64> = [(zero, 2), (t, 2)].into_iter().collect();
    if dec.multiplicities != expected {
        return Err(format!("torsion fan at m = 2: {:?}", dec.multiplicities));
    }
    Ok(format!("{n_checks} fan/m pairs agree; torsion fan at m = 2 is {{[0]:2, [t]:2}}"))
}

/// Degrees of `D_u` on `P^n` straight from the floor formula, on the grid
/// `(1/m) Z^n ∩ [0,1)^n`.
fn projective_degrees(n: usize, m: i64) -> BTreeSet<i64> {
    let mut out = BTreeSet::new();
    let mut k = vec![0i64; n];
    loop {
        let s: i64 = k.iter().sum();
        let deg = k.iter().map(|x| x.div_euclid(m)).sum::<i64>() + (-s).div_euclid(m);
        out.insert(deg);
        let mut i = 0;
        while i < n {
            k[i] += 1;
            if k[i] < m {
                break;
            }
            k[i] = 0;
            i += 1;
        }
        if i == n {
            return out;
        }
    }
}

fn projective_collections() -> Check {
    for n in 1..=3usize {
        let fan = projective(n);
        let group = ClassGroup::new(&fan);
        let h = TDivisor::prime(fan.ray_ids()[0]);
        let got = thomsen_collection(&fan, &QDivisor::zero()).map_err(|e| e.to_string())?.classes;
        let brute: BTreeSet<DivClass> =
            projective_degrees(n, 12).into_iter().map(|d| group.class_of(&h.scale(&BigInt::from(d)))).collect();
        let hyperplane: BTreeSet<DivClass> =
            (0..=n as i64).map(|d| group.class_of(&h.scale(&BigInt::from(-d)))).collect();
        if got != brute || got != hyperplane {
            return Err(format!("P{n}: {} classes, brute force {}", got.len(), brute.len()));
        }
    }
    Ok("T(P^n, 0) = {0, -H, ..., -nH} for n = 1, 2, 3".into())
}

fn shift_property(rng: &mut ChaCha8Rng) -> Check {
    let fans = [("P1", p1()), ("P2", p2()), ("P1xP1", p1xp1()), ("A2", a2()), ("torsion", torsion())];
    let mut n_checks = 0;
    for (name, fan) in fans {
        let group = ClassGroup::new(&fan);
        for _ in 0..SHIFTS_PER_FAN {
            let d = random_qdivisor(rng, &fan, 3);
            let e = TDivisor::from_pairs(fan.ray_ids().into_iter().map(|id| (id, BigInt::from(rng.gen_range(-3i64..=3)))));
            let base = thomsen_collection(&fan, &d).map_err(|x| x.to_string())?.classes;
            let moved = thomsen_collection(&fan, &d.add(&e.to_q())).map_err(|x| x.to_string())?.classes;
            if moved != shift_classes(&group, &base, &group.class_of(&e)) {
                return Err(format!("{name}: D = {d:?}, E = {e}"));
            }
            n_checks += 1;
        }
    }
    Ok(format!("{n_checks} random shifts"))
}

fn floor_identity(rng: &mut ChaCha8Rng) -> Check {
    for _ in 0..FLOOR_SAMPLES {
        let num: i64 = rng.gen_range(-10_000..=10_000);
        let den: i64 = rng.gen_range(1..=500);
        let m: i64 = rng.gen_range(1..=50);
        let x = rat(num, den);
        let inner = floor_rat(&(x.clone() * Rat::from_integer(BigInt::from(m))));
        let lhs = floor_rat(&Rat::new(inner, BigInt::from(m)));
        // Independent route in machine integers.
        let direct = num.div_euclid(den);
        let twice = (num * m).div_euclid(den).div_euclid(m);
        if lhs != BigInt::from(direct) || twice != direct {
            return Err(format!("x = {num}/{den}, m = {m}"));
        }
    }
    Ok(format!("{FLOOR_SAMPLES} random rationals"))
}

fn hexagon() -> GeneratingSystem {
    GeneratingSystem::from_i64(
        &[0, 1],
        &[
            (&[-1, -1], &["A"]),
            (&[1, 1], &["B"]),
            (&[-1, 0], &["C"]),
            (&[1, 0], &["D"]),
            (&[-1, 1], &["E"]),
            (&[1, -1], &["F"]),
        ],
    )
    .unwrap()
}

fn chamber_sequence() -> Check {
    let got: Vec<String> =
        chambers(&hexagon()).iter().map(|c| formal_to_string(&formal_from_set(&c.divisor))).collect();
    let expected = ["A+C+E", "C+E", "B+C+E", "B+E", "B+D+E", "B+D", "B+D+F"];
    if got == expected {
        Ok(got.join(", "))
    } else {
        Err(format!("got {}", got.join(", ")))
    }
}

fn slice_sets() -> Check {
    let gs = GeneratingSystem::from_i64(
        &[0, 0, 1],
        &[(&[1, 0, 1], &["A"]), (&[-1, 0, 1], &["B"]), (&[0, 1, 1], &["C"]), (&[0, -1, 1], &["D"])],
    )
    .unwrap();
    // Slices by the planes x = t·z; the walls of A and B sit at t = -1 and t = 1.
    let on = |t: Rat| -> BTreeSet<String> {
        let plane = vec![rat(1, 1), rat(0, 1), -t];
        chambers_on_hyperplanes(&gs, &[plane]).iter().map(|c| formal_to_string(&formal_from_set(&c.divisor))).collect()
    };
    let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<BTreeSet<String>>();
    let low = set(&["B+C+D", "B+C", "B+D"]);
    let mid = set(&["A+B+C+D", "A+B+C", "A+B+D"]);
    for t in [rat(-1, 1), rat(-2, 1), rat(-5, 1)] {
        let got = on(t.clone());
        if got != low {
            return Err(format!("slice t = {t}: {got:?}"));
        }
    }
    for t in [rat(0, 1), rat(1, 2), rat(-1, 2)] {
        let got = on(t.clone());
        if got != mid {
            return Err(format!("slice t = {t}: {got:?}"));
        }
    }
    Ok("{B+C+D, B+C, B+D} and {A+B+C+D, A+B+C, A+B+D}".into())
}

fn certificate_round_trip(rng: &mut ChaCha8Rng) -> Check {
    let mut systems = Vec::new();
    while systems.len() < SYSTEMS_2D {
        let s = rng.gen_range(0..=6);
        systems.push(random_system(rng, 2, s));
    }
    while systems.len() < SYSTEMS_2D + SYSTEMS_3D {
        let s = rng.gen_range(0..=5);
        systems.push(random_system(rng, 3, s));
    }
    let mut certs = Vec::new();
    for (i, gs) in systems.iter().enumerate() {
        let cert = resolve(gs).map_err(|e| format!("system {i}: {e}"))?;
        verify_certificate(&cert, gs, &distinct).map_err(|v| format!("system {i}: {v:?}"))?;
        certs.push(cert);
    }
    let mut rejected = 0;
    for k in 0..MUTATIONS {
        let i = rng.gen_range(0..systems.len());
        let (bad, what) = mutate(rng, &certs[i], &systems[i]);
        if verify_certificate(&bad, &systems[i], &distinct).is_ok() {
            return Err(format!("mutation {k} ({what}) on system {i} was accepted"));
        }
        rejected += 1;
    }
    Ok(format!("{} systems verified, {rejected}/{MUTATIONS} mutations rejected", systems.len()))
}

fn chamber_sampling(rng: &mut ChaCha8Rng) -> Check {
    let mut systems = vec![hexagon()];
    for k in 0..10 {
        let dim = if k % 2 == 0 { 2 } else { 3 };
        let s = rng.gen_range(1..=5);
        systems.push(random_system(rng, dim, s));
    }
    for (i, gs) in systems.iter().enumerate() {
        let by_signs: BTreeMap<_, _> = chambers(gs).into_iter().map(|c| (c.signs, c.divisor)).collect();
        for _ in 0..SAMPLES_PER_SYSTEM {
            let w = sample_w(rng, gs);
            let signs = sign_vector(gs, &w);
            match by_signs.get(&signs) {
                Some(d) if *d == gs.divisor_at(&w) => {}
                Some(_) => return Err(format!("system {i}: divisor mismatch at {w:?}")),
                None => return Err(format!("system {i}: {w:?} lands in no chamber")),
            }
        }
    }
    Ok(format!("{} systems × {SAMPLES_PER_SYSTEM} samples", systems.len()))
}

fn blowup_f1() -> Check {
    let sub = p2().stellar_subdivision(&Cone::new(vec![0, 1])).map_err(|e| e.to_string())?;
    if sub.fan == f1() {
        Ok("rays (1,0),(0,1),(-1,-1),(1,1) with four maximal cones".into())
    } else {
        Err(format!("{:?}", sub.fan))
    }
}

struct Setup {
    name: &'static str,
    fan: Fan,
    outside: Vec<usize>,
}

fn setups() -> Vec<Setup> {
    vec![Setup { name: "P2", fan: p2(), outside: vec![2] }, Setup { name: "P3", fan: p3(), outside: vec![2, 3] }]
}

fn instances(s: &Setup) -> Vec<BondalInstance> {
    let mut out = Vec::new();
    for c0 in [rat(0, 1), rat(1, 2)] {
        for c in [rat(0, 1), rat(1, 3)] {
            let d = QDivisor::from_pairs(s.outside.iter().map(|&i| (i, c.clone())));
            let (inst, _) = prepare(&s.fan, &Cone::new(vec![0, 1]), &c0, &d).unwrap();
            out.push(inst);
        }
    }
    out
}

fn grid_points(n: usize, q: i64) -> Vec<Vec<Rat>> {
    let mut pts = vec![vec![]];
    for _ in 0..n {
        pts = pts.into_iter().flat_map(|p: Vec<Rat>| (0..q).map(move |k| [p.clone(), vec![rat(k, q)]].concat())).collect();
    }
    pts
}

fn pullback_identity() -> Check {
    let mut parts = Vec::new();
    for s in setups() {
        let mut checks = 0;
        for inst in instances(&s) {
            let ctx = BondalContext::new(inst.clone()).map_err(|e| e.to_string())?;
            for q in [4, 6] {
                for u in grid_points(inst.n(), q) {
                    if !verify_pullback(&ctx, &u).map_err(|e| e.to_string())? {
                        return Err(format!("{} at {u:?}", s.name));
                    }
                    checks += 1;
                }
            }
        }
        if checks < MIN_PULLBACK_CHECKS {
            return Err(format!("{}: only {checks} checks", s.name));
        }
        parts.push(format!("{}: {checks}", s.name));
    }
    Ok(format!("exact equality at every grid point ({})", parts.join(", ")))
}

fn descent() -> Check {
    let mut points = 0;
    let mut leaves = 0;
    for s in setups() {
        for inst in instances(&s) {
            let ctx = BondalContext::new(inst.clone()).map_err(|e| e.to_string())?;
            let coll = thomsen_collection(&ctx.punctured.x_tilde, &ctx.tilde_qdivisor()).map_err(|e| e.to_string())?;
            for q in [4, 6] {
                for u in admissible_points(&inst, q) {
                    let out = verify_descent(&ctx, &u, Some(&coll.classes))
                        .map_err(|e| format!("{} c0 = {} at {u:?}: {e}", s.name, inst.c0))?;
                    points += 1;
                    leaves += out.leaves.len();
                }
                let w = d_window(&inst, q);
                if w != expected_window(&inst) {
                    return Err(format!("{} c0 = {}, q = {q}: window {w:?}", s.name, inst.c0));
                }
            }
        }
    }
    Ok(format!("{points} admissible points, {leaves} leaves re-derived, windows match"))
}

fn witnesses() -> Check {
    let mut found = 0;
    for (name, fan) in [("P1", p1()), ("torsion", torsion())] {
        let d = QDivisor::zero();
        let ws = ray_witnesses(&fan, &d).map_err(|e| format!("{name}: {e}"))?;
        let covered: BTreeSet<_> = ws.iter().map(|w| w.ray).collect();
        if covered != fan.ray_ids().into_iter().collect() {
            return Err(format!("{name}: witnesses for {covered:?}"));
        }
        for w in &ws {
            let du = divisor_floor(&fan, &w.u, &d);
            let dv = divisor_floor(&fan, &w.u_prime, &d);
            if dv != du.sub(&TDivisor::prime(w.ray)) {
                return Err(format!("{name}, ray {}: {dv} vs {du}", w.ray));
            }
            found += 1;
        }
    }
    Ok(format!("{found} rays with D_u' = D_u - D_i"))
}

fn restriction() -> Check {
    let (inst, _) = prepare(&p3(), &Cone::new(vec![0, 1]), &rat(0, 1), &QDivisor::zero()).unwrap();
    let ctx = BondalContext::new(inst).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for u1 in [vec![rat(1, 3), rat(2, 3)], vec![rat(1, 2), rat(1, 2)]] {
        let out = restriction_test(&ctx, &u1, 6).map_err(|e| e.to_string())?;
        if !out.agrees() {
            return Err(format!("u1 = {u1:?}: {:?} vs {:?}", out.restricted, out.expected));
        }
        parts.push(format!("u1 = ({}, {}): {} classes", u1[0], u1[1], out.expected.len()));
    }
    Ok(parts.join("; "))
}

fn main() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let criteria: Vec<Criterion> = vec![
        ("Frobenius rank identity", Box::new(|_| rank_identity())),
        ("cube and lattice decompositions agree", Box::new(|_| oracle_equivalence())),
        ("Thomsen collections of projective spaces", Box::new(|_| projective_collections())),
        ("shift by an integral divisor", Box::new(shift_property)),
        ("nested floor identity", Box::new(floor_identity)),
        ("clockwise chamber sequence", Box::new(|_| chamber_sequence())),
        ("slice chamber sets", Box::new(|_| slice_sets())),
        ("certificate round-trip and mutations", Box::new(certificate_round_trip)),
        ("chamber sampling oracle", Box::new(chamber_sampling)),
        ("blow-up of P2 is F1", Box::new(|_| blowup_f1())),
        ("pullback floor identity", Box::new(|_| pullback_identity())),
        ("descent certificates and d-window", Box::new(|_| descent())),
        ("ray witnesses", Box::new(|_| witnesses())),
        ("restriction to the orbit closure", Box::new(|_| restriction())),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.into_iter().enumerate() {
        let t = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(|| f(&mut rng))).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.2}s]", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{secs:.2}s]", k + 1)
            }
        }
    }
    println!("{} criteria, {failed} failed, {:.1}s", 14, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
