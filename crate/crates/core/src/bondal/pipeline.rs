//! Runs every check on a grid of points and collects the results.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::{tilde_divisor_floor, verify_descent, verify_pullback, restriction_test, BondalContext, BondalError, BondalInstance};
use crate::divisor::{DivClass, TDivisor};
use crate::gensys::Certificate;
use crate::lattice::{cube_points, floor_rat, is_integral, Rat, RatVector};
use crate::thomsen::thomsen_collection;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PullbackRecord {
    pub u: RatVector,
    pub d_tilde: TDivisor,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescentRecord {
    pub u: RatVector,
    pub d: BigInt,
    pub items: usize,
    pub chambers: usize,
    pub leaves: usize,
    pub certificate: Option<Certificate>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestrictionRecord {
    pub u1: RatVector,
    pub grid: u64,
    pub restricted: BTreeSet<DivClass>,
    pub expected: BTreeSet<DivClass>,
    pub witnesses: usize,
    pub ok: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BondalReport {
    pub l: usize,
    pub n: usize,
    pub q: u64,
    pub c0: Rat,
    pub pullback: Vec<PullbackRecord>,
    pub descent: Vec<DescentRecord>,
    /// Values of `⌊u_1 + … + u_l + c_0⌋` reached on the grid.
    pub d_values: BTreeSet<BigInt>,
    pub expected_window: BTreeSet<BigInt>,
    pub restriction: Vec<RestrictionRecord>,
    pub failures: Vec<String>,
}

impl BondalReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let pullback_ok = self.pullback.iter().filter(|r| r.ok).count();
        let c2_ok = self.descent.iter().filter(|r| r.error.is_none()).count();
        let r_ok = self.restriction.iter().filter(|r| r.ok).count();
        let show = |set: &BTreeSet<BigInt>| set.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",");
        writeln!(s, "l = {}, n = {}, grid 1/{}, c0 = {}", self.l, self.n, self.q, self.c0).unwrap();
        writeln!(s, "pullback: {pullback_ok}/{} points", self.pullback.len()).unwrap();
        writeln!(s, "descent: {c2_ok}/{} points", self.descent.len()).unwrap();
        writeln!(s, "d window: {{{}}} (expected {{{}}})", show(&self.d_values), show(&self.expected_window)).unwrap();
        writeln!(s, "restriction: {r_ok}/{} fixed u1", self.restriction.len()).unwrap();
        for f in &self.failures {
            writeln!(s, "FAILED: {f}").unwrap();
        }
        writeln!(s, "{}", if self.passed() { "all checks passed" } else { "some checks failed" }).unwrap();
        s
    }
}

/// Grid points `u ∈ (1/q) Z^n ∩ [0,1)^n`.
fn grid(n: usize, q: u64) -> impl Iterator<Item = RatVector> {
    let qb = BigInt::from(q);
    cube_points(n, q).map(move |k| k.iter().map(|a| Rat::new(BigInt::from(*a), qb.clone())).collect())
}

/// Grid points with `0 < u_i < 1` for `i ≤ l` and `u_1 + … + u_l + c_0`
/// integral.
pub fn admissible_points(inst: &BondalInstance, q: u64) -> Vec<RatVector> {
    let l = inst.l();
    grid(inst.n(), q)
        .filter(|u| {
            u[..l].iter().all(|x| x.is_positive()) && is_integral(&(u[..l].iter().sum::<Rat>() + &inst.c0))
        })
        .collect()
}

/// `⌊u_1 + … + u_l + c_0⌋` over grid points with `0 ≤ u_i < 1` and an
/// integral sum.
pub fn d_window(inst: &BondalInstance, q: u64) -> BTreeSet<BigInt> {
    let l = inst.l();
    let mut out = BTreeSet::new();
    for k in cube_points(l, q) {
        let s = k.iter().map(|a| Rat::new(BigInt::from(*a), BigInt::from(q))).sum::<Rat>() + &inst.c0;
        if is_integral(&s) {
            out.insert(floor_rat(&s));
        }
    }
    out
}

/// `{0, …, l-1}` when `c_0 = 0`, `{1, …, l}` otherwise.
pub fn expected_window(inst: &BondalInstance) -> BTreeSet<BigInt> {
    let start = if inst.c0.is_zero() { 0 } else { 1 };
    (start..start + inst.l() as i64).map(BigInt::from).collect()
}

pub fn bondal_pipeline(inst: &BondalInstance, q: u64) -> Result<BondalReport, BondalError> {
    assert!(q >= 1, "grid denominator must be positive");
    let ctx = BondalContext::new(inst.clone())?;
    let l = inst.l();
    let n = inst.n();
    let mut failures = Vec::new();

    let mut pullback = Vec::new();
    for u in grid(n, q) {
        let ok = verify_pullback(&ctx, &u)?;
        if !ok {
            failures.push(format!("pullback at {}", show_point(&u)));
        }
        pullback.push(PullbackRecord { d_tilde: tilde_divisor_floor(&ctx, &u), u, ok });
    }

    let collection = match thomsen_collection(&ctx.punctured.x_tilde, &ctx.tilde_qdivisor()) {
        Ok(t) => Some(t.classes),
        Err(e) => {
            failures.push(format!("Thomsen collection upstairs: {e}"));
            None
        }
    };
    let mut descent = Vec::new();
    for u in admissible_points(inst, q) {
        let d = floor_rat(&(u[..l].iter().sum::<Rat>() + &inst.c0));
        match verify_descent(&ctx, &u, collection.as_ref()) {
            Ok(out) => descent.push(DescentRecord {
                u,
                d,
                items: out.system.items().len(),
                chambers: out.chambers_checked,
                leaves: out.leaves.len(),
                certificate: Some(out.certificate),
                error: None,
            }),
            Err(e) => {
                failures.push(format!("descent at {}: {e}", show_point(&u)));
                descent.push(DescentRecord {
                    u,
                    d,
                    items: 0,
                    chambers: 0,
                    leaves: 0,
                    certificate: None,
                    error: Some(e.to_string()),
                });
            }
        }
    }

    let d_values = d_window(inst, q);
    let expected = expected_window(inst);
    if d_values != expected {
        failures.push("d window differs from the expected consecutive range".into());
    }

    let mut u1s: Vec<RatVector> = admissible_points(inst, q).into_iter().map(|u| u[..l].to_vec()).collect();
    u1s.dedup();
    let mut restriction = Vec::new();
    for u1 in u1s {
        match restriction_test(&ctx, &u1, q) {
            Ok(out) => {
                let ok = out.agrees();
                if !ok {
                    failures.push(format!("restriction at u1 = {}", show_point(&u1)));
                }
                restriction.push(RestrictionRecord {
                    u1,
                    grid: out.grid,
                    witnesses: out.witnesses.len(),
                    restricted: out.restricted,
                    expected: out.expected,
                    ok,
                    error: None,
                });
            }
            Err(e) => {
                failures.push(format!("restriction at u1 = {}: {e}", show_point(&u1)));
                restriction.push(RestrictionRecord {
                    u1,
                    grid: 0,
                    restricted: BTreeSet::new(),
                    expected: BTreeSet::new(),
                    witnesses: 0,
                    ok: false,
                    error: Some(e.to_string()),
                });
            }
        }
    }

    Ok(BondalReport {
        l,
        n,
        q,
        c0: inst.c0.clone(),
        pullback,
        descent,
        d_values,
        expected_window: expected,
        restriction,
        failures,
    })
}

fn show_point(u: &[Rat]) -> String {
    let parts: Vec<String> = u.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(", "))
}
