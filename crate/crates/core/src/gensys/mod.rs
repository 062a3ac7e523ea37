//! Generating systems: a reference half-space `W⁺` and item half-spaces
//! carrying sets of prime divisor names, with chamber enumeration and
//! Koszul generation certificates.

mod certificate;
mod chamber;
mod resolve;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::lattice::{primitive_from_rat, primitive_part, IntVector, Rat};

pub use certificate::{
    verify_certificate, CertNode, Certificate, CertificateViolation, NodeKind,
};
pub use chamber::{chambers, chambers_on_hyperplanes, realizes, sign_vector, Chamber};
pub use resolve::{quotient_system, resolve, resolve_twisted, slice_system};

/// Formal integer combination of prime names. Zero coefficients are not
/// stored.
pub type FormalSum = BTreeMap<String, i64>;

pub fn formal_from_set<'a>(names: impl IntoIterator<Item = &'a String>) -> FormalSum {
    names.into_iter().map(|n| (n.clone(), 1)).collect()
}

pub fn formal_add(a: &FormalSum, b: &FormalSum, sign: i64) -> FormalSum {
    let mut out = a.clone();
    for (k, v) in b {
        let e = out.entry(k.clone()).or_insert(0);
        *e += sign * v;
        if *e == 0 {
            out.remove(k);
        }
    }
    out
}

pub fn formal_to_string(f: &FormalSum) -> String {
    if f.is_empty() {
        return "0".into();
    }
    let mut s = String::new();
    for (i, (k, v)) in f.iter().enumerate() {
        match (*v, i) {
            (1, 0) => s.push_str(k),
            (1, _) => s.push_str(&format!("+{k}")),
            (-1, _) => s.push_str(&format!("-{k}")),
            (v, 0) => s.push_str(&format!("{v}{k}")),
            (v, _) if v > 0 => s.push_str(&format!("+{v}{k}")),
            (v, _) => s.push_str(&format!("{v}{k}")),
        }
    }
    s
}

/// The open half-space `{w : (normal, w) > 0}`, normal primitive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfSpace {
    normal: IntVector,
}

impl HalfSpace {
    /// Canonicalizes by positive scaling. `None` for the zero vector.
    pub fn new(normal: &[BigInt]) -> Option<Self> {
        primitive_part(normal).map(|(normal, _)| HalfSpace { normal })
    }

    pub fn from_rat(normal: &[Rat]) -> Option<Self> {
        primitive_from_rat(normal).map(|normal| HalfSpace { normal })
    }

    pub fn from_i64(normal: &[i64]) -> Self {
        HalfSpace::new(&crate::lattice::int_vec(normal)).expect("zero normal")
    }

    pub fn normal(&self) -> &IntVector {
        &self.normal
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    pub fn opposite(&self) -> HalfSpace {
        HalfSpace { normal: self.normal.iter().map(|x| -x).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Item {
    pub half: HalfSpace,
    pub primes: BTreeSet<String>,
}

impl Item {
    pub fn new(half: HalfSpace, primes: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Item { half, primes: primes.into_iter().map(Into::into).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratingSystem {
    dim: usize,
    wplus: HalfSpace,
    items: Vec<Item>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SystemViolation {
    #[error("dimension {0} is below 2")]
    DimensionTooSmall(usize),
    #[error("reference half-space has dimension {0}")]
    WplusDimension(usize),
    #[error("item {item} has dimension {found}")]
    ItemDimension { item: usize, found: usize },
    #[error("item {0} coincides with the reference half-space")]
    EqualsWplus(usize),
    #[error("item {0} is opposite to the reference half-space")]
    OppositeWplus(usize),
    #[error("items {0} and {1} are the same half-space")]
    DuplicateHalf(usize, usize),
    #[error("item {0} has no primes")]
    EmptyPrimes(usize),
    #[error("prime {name} appears in items {first} and {second}")]
    SharedPrime { name: String, first: usize, second: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenSysError {
    #[error("invalid generating system: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<SystemViolation>),
    #[error("degenerate slice: item {0} restricts to the reference half-space or its opposite")]
    DegenerateSlice(usize),
    #[error("item {0} vanishes on the slice")]
    VanishingOnSlice(usize),
    #[error("slice basis does not have the expected shape")]
    BadSliceBasis,
    #[error("no chamber has divisor {0}")]
    NoChamberFor(String),
}

impl GeneratingSystem {
    pub fn new(dim: usize, wplus: HalfSpace, items: Vec<Item>) -> Result<Self, GenSysError> {
        let gs = GeneratingSystem { dim, wplus, items };
        let v = gs.validate();
        if v.is_empty() {
            Ok(gs)
        } else {
            Err(GenSysError::Invalid(v))
        }
    }

    /// Convenience constructor from small integer normals.
    pub fn from_i64(wplus: &[i64], items: &[(&[i64], &[&str])]) -> Result<Self, GenSysError> {
        GeneratingSystem::new(
            wplus.len(),
            HalfSpace::from_i64(wplus),
            items
                .iter()
                .map(|(n, p)| Item::new(HalfSpace::from_i64(n), p.iter().copied()))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn wplus(&self) -> &HalfSpace {
        &self.wplus
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn validate(&self) -> Vec<SystemViolation> {
        let mut out = Vec::new();
        if self.dim < 2 {
            out.push(SystemViolation::DimensionTooSmall(self.dim));
        }
        if self.wplus.dim() != self.dim {
            out.push(SystemViolation::WplusDimension(self.wplus.dim()));
            return out;
        }
        let minus = self.wplus.opposite();
        for (i, it) in self.items.iter().enumerate() {
            if it.half.dim() != self.dim {
                out.push(SystemViolation::ItemDimension { item: i, found: it.half.dim() });
                continue;
            }
            if it.half == self.wplus {
                out.push(SystemViolation::EqualsWplus(i));
            }
            if it.half == minus {
                out.push(SystemViolation::OppositeWplus(i));
            }
            if it.primes.is_empty() {
                out.push(SystemViolation::EmptyPrimes(i));
            }
            for (j, other) in self.items[..i].iter().enumerate() {
                if other.half == it.half {
                    out.push(SystemViolation::DuplicateHalf(j, i));
                }
            }
        }
        let mut owner: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, it) in self.items.iter().enumerate() {
            for p in &it.primes {
                if let Some(&j) = owner.get(p.as_str()) {
                    out.push(SystemViolation::SharedPrime { name: p.clone(), first: j, second: i });
                } else {
                    owner.insert(p, i);
                }
            }
        }
        out
    }

    /// Sum of the primes of items on whose positive side `w` lies.
    pub fn divisor_at(&self, w: &[Rat]) -> BTreeSet<String> {
        let signs = sign_vector(self, w);
        divisor_of_signs(self, &signs)
    }

    pub fn alphabet(&self) -> BTreeSet<String> {
        self.items.iter().flat_map(|it| it.primes.iter().cloned()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Plus,
    Zero,
    Minus,
}

impl Sign {
    pub fn of(x: &Rat) -> Sign {
        if x.is_positive() {
            Sign::Plus
        } else if x.is_zero() {
            Sign::Zero
        } else {
            Sign::Minus
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Zero => '0',
            Sign::Minus => '-',
        }
    }

    pub fn parse(c: char) -> Option<Sign> {
        match c {
            '+' => Some(Sign::Plus),
            '0' => Some(Sign::Zero),
            '-' => Some(Sign::Minus),
            _ => None,
        }
    }
}

pub fn signs_to_string(signs: &[Sign]) -> String {
    signs.iter().map(|s| s.symbol()).collect()
}

pub fn parse_signs(s: &str) -> Option<Vec<Sign>> {
    s.chars().map(Sign::parse).collect()
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

pub fn divisor_of_signs(gs: &GeneratingSystem, signs: &[Sign]) -> BTreeSet<String> {
    gs.items
        .iter()
        .zip(signs)
        .filter(|(_, s)| **s == Sign::Plus)
        .flat_map(|(it, _)| it.primes.iter().cloned())
        .collect()
}
