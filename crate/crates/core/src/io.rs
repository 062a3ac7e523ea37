//! JSON interchange for fans, Q-divisors, generating systems,
//! certificates, instances and reports. Rationals are `[num, den]` pairs;
//! object keys come out sorted, so emitted text is deterministic.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::bondal::{BondalReport, Normalization};
use crate::divisor::{DivClass, QDivisor, TDivisor};
use crate::fan::{Cone, Fan, RayId};
use crate::gensys::{CertNode, Certificate, FormalSum, GeneratingSystem, HalfSpace, Item, NodeKind};
use crate::lattice::{int_vec, Rat};
use crate::thomsen::{FrobeniusDecomposition, ThomsenCollection};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IoError {
    #[error("{path}: {msg}")]
    Read { path: String, msg: String },
    #[error("JSON error at line {line}, column {column}: {msg}")]
    Json { line: usize, column: usize, msg: String },
    #[error("field `{field}`: {msg}")]
    Schema { field: String, msg: String },
}

fn schema(field: impl Into<String>, msg: impl Into<String>) -> IoError {
    IoError::Schema { field: field.into(), msg: msg.into() }
}

impl From<serde_json::Error> for IoError {
    fn from(e: serde_json::Error) -> Self {
        IoError::Json { line: e.line(), column: e.column(), msg: e.to_string() }
    }
}

pub fn read_file(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|e| IoError::Read { path: path.display().to_string(), msg: e.to_string() })
}

pub fn write_file(path: &Path, text: &str) -> Result<(), IoError> {
    fs::write(path, text).map_err(|e| IoError::Read { path: path.display().to_string(), msg: e.to_string() })
}

/// Pretty JSON with a trailing newline.
pub fn to_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values always serialize");
    s.push('\n');
    s
}

fn int(x: &BigInt) -> Value {
    match x.to_i64() {
        Some(v) => json!(v),
        None => json!(x.to_string()),
    }
}

fn ints(v: &[BigInt]) -> Value {
    Value::Array(v.iter().map(int).collect())
}

pub fn rat_to_json(x: &Rat) -> Value {
    json!([int(x.numer()), int(x.denom())])
}

fn rat_from_pair(field: &str, p: &[i64; 2]) -> Result<Rat, IoError> {
    if p[1] == 0 {
        return Err(schema(field, "zero denominator"));
    }
    Ok(Rat::new(BigInt::from(p[0]), BigInt::from(p[1])))
}

/// `"a/b"` or `"a"`.
pub fn parse_rat_arg(s: &str) -> Option<Rat> {
    let (a, b) = match s.split_once('/') {
        Some((a, b)) => (a.trim().parse::<BigInt>().ok()?, b.trim().parse::<BigInt>().ok()?),
        None => (s.trim().parse::<BigInt>().ok()?, BigInt::from(1)),
    };
    (!b.is_zero()).then(|| Rat::new(a, b))
}

pub fn class_to_json(c: &DivClass) -> Value {
    json!({ "free": ints(&c.free), "torsion": ints(&c.torsion) })
}

fn classes_to_json<'a>(cs: impl IntoIterator<Item = &'a DivClass>) -> Value {
    Value::Array(cs.into_iter().map(class_to_json).collect())
}

// ---- fans ----

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FanJson {
    rank: usize,
    rays: Vec<Vec<i64>>,
    max_cones: Vec<Vec<usize>>,
}

pub fn parse_fan_str(text: &str) -> Result<Fan, IoError> {
    let raw: FanJson = serde_json::from_str(text)?;
    fan_from_raw(raw, "")
}

fn fan_from_raw(raw: FanJson, prefix: &str) -> Result<Fan, IoError> {
    for (i, r) in raw.rays.iter().enumerate() {
        if r.len() != raw.rank {
            return Err(schema(format!("{prefix}rays[{i}]"), format!("expected {} coordinates", raw.rank)));
        }
    }
    for (i, c) in raw.max_cones.iter().enumerate() {
        if let Some(&bad) = c.iter().find(|&&k| k >= raw.rays.len()) {
            return Err(schema(format!("{prefix}max_cones[{i}]"), format!("ray index {bad} out of range")));
        }
    }
    let rays = raw.rays.iter().map(|r| int_vec(r)).collect();
    Fan::new(raw.rank, rays, raw.max_cones).map_err(|e| schema(format!("{prefix}fan"), e.to_string()))
}

pub fn parse_fan(path: &Path) -> Result<Fan, IoError> {
    parse_fan_str(&read_file(path)?)
}

/// Rays in id order; cones as sorted position lists, sorted.
pub fn fan_to_json(fan: &Fan) -> Value {
    let rays: Vec<Value> = fan.rays().iter().map(|r| ints(&r.generator)).collect();
    let mut cones: Vec<Vec<usize>> = fan
        .max_cones()
        .iter()
        .map(|c| {
            let mut p: Vec<usize> = c.ray_ids().iter().map(|&id| fan.position(id).unwrap()).collect();
            p.sort();
            p
        })
        .collect();
    cones.sort();
    json!({ "rank": fan.rank(), "rays": rays, "max_cones": cones })
}

// ---- Q-divisors ----

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QDivisorJson {
    coeffs: BTreeMap<String, [i64; 2]>,
}

fn qdivisor_from_raw(raw: QDivisorJson, fan: Option<&Fan>, prefix: &str) -> Result<QDivisor, IoError> {
    let mut d = QDivisor::zero();
    for (k, p) in &raw.coeffs {
        let field = format!("{prefix}coeffs.{k}");
        let idx: usize = k.parse().map_err(|_| schema(&field, "key is not a ray index"))?;
        let id = match fan {
            Some(f) => f.rays().get(idx).map(|r| r.id).ok_or_else(|| schema(&field, "ray index out of range"))?,
            None => idx,
        };
        d.set_coeff(id, rat_from_pair(&field, p)?);
    }
    Ok(d)
}

/// Keys are ray indices; with a fan they are positions in its ray list.
pub fn parse_qdivisor_str(text: &str, fan: Option<&Fan>) -> Result<QDivisor, IoError> {
    qdivisor_from_raw(serde_json::from_str(text)?, fan, "")
}

pub fn parse_qdivisor(path: &Path, fan: Option<&Fan>) -> Result<QDivisor, IoError> {
    parse_qdivisor_str(&read_file(path)?, fan)
}

pub fn qdivisor_to_json(d: &QDivisor, fan: Option<&Fan>) -> Value {
    let coeffs: serde_json::Map<String, Value> = d
        .iter()
        .map(|(id, v)| {
            let key = fan.and_then(|f| f.position(*id)).unwrap_or(*id);
            (key.to_string(), rat_to_json(v))
        })
        .collect();
    json!({ "coeffs": coeffs })
}

pub fn tdivisor_to_json(d: &TDivisor) -> Value {
    let m: serde_json::Map<String, Value> = d.iter().map(|(id, v)| (id.to_string(), int(v))).collect();
    Value::Object(m)
}

// ---- generating systems and certificates ----

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ItemJson {
    normal: Vec<i64>,
    primes: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemJson {
    dim: usize,
    wplus: Vec<i64>,
    items: Vec<ItemJson>,
}

pub fn parse_system_str(text: &str) -> Result<GeneratingSystem, IoError> {
    let raw: SystemJson = serde_json::from_str(text)?;
    let wplus = HalfSpace::new(&int_vec(&raw.wplus)).ok_or_else(|| schema("wplus", "zero normal"))?;
    let mut items = Vec::new();
    for (i, it) in raw.items.iter().enumerate() {
        let half = HalfSpace::new(&int_vec(&it.normal)).ok_or_else(|| schema(format!("items[{i}].normal"), "zero normal"))?;
        let primes: BTreeSet<String> = it.primes.iter().cloned().collect();
        if primes.len() != it.primes.len() {
            return Err(schema(format!("items[{i}].primes"), "repeated prime"));
        }
        items.push(Item { half, primes });
    }
    GeneratingSystem::new(raw.dim, wplus, items).map_err(|e| schema("items", e.to_string()))
}

pub fn parse_system(path: &Path) -> Result<GeneratingSystem, IoError> {
    parse_system_str(&read_file(path)?)
}

pub fn system_to_json(gs: &GeneratingSystem) -> Value {
    let items: Vec<Value> = gs
        .items()
        .iter()
        .map(|it| json!({ "normal": ints(it.half.normal()), "primes": it.primes.iter().collect::<Vec<_>>() }))
        .collect();
    json!({ "dim": gs.dim(), "wplus": ints(gs.wplus().normal()), "items": items })
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeJson {
    id: usize,
    kind: String,
    target: FormalSum,
    #[serde(default)]
    chamber: Option<String>,
    #[serde(default)]
    d: Option<FormalSum>,
    #[serde(default)]
    e: Option<FormalSum>,
    #[serde(default)]
    children: Option<Vec<usize>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CertificateJson {
    root: usize,
    #[serde(default)]
    twist: FormalSum,
    nodes: Vec<NodeJson>,
}

pub fn parse_certificate_str(text: &str) -> Result<Certificate, IoError> {
    let raw: CertificateJson = serde_json::from_str(text)?;
    let mut nodes = Vec::new();
    for (i, n) in raw.nodes.into_iter().enumerate() {
        let field = |f: &str| format!("nodes[{i}].{f}");
        let strip = |f: FormalSum| -> FormalSum { f.into_iter().filter(|(_, v)| *v != 0).collect() };
        let kind = match n.kind.as_str() {
            "leaf" => NodeKind::Leaf { chamber: n.chamber.ok_or_else(|| schema(field("chamber"), "missing"))? },
            "koszul" => {
                let c = n.children.ok_or_else(|| schema(field("children"), "missing"))?;
                let children: [usize; 3] =
                    c.try_into().map_err(|_| schema(field("children"), "expected three children"))?;
                NodeKind::Koszul {
                    d: strip(n.d.ok_or_else(|| schema(field("d"), "missing"))?),
                    e: strip(n.e.ok_or_else(|| schema(field("e"), "missing"))?),
                    children,
                }
            }
            other => return Err(schema(field("kind"), format!("unknown kind {other:?}"))),
        };
        nodes.push(CertNode { id: n.id, target: strip(n.target), kind });
    }
    Ok(Certificate { root: raw.root, twist: raw.twist.into_iter().filter(|(_, v)| *v != 0).collect(), nodes })
}

pub fn parse_certificate(path: &Path) -> Result<Certificate, IoError> {
    parse_certificate_str(&read_file(path)?)
}

pub fn certificate_to_json(cert: &Certificate) -> Value {
    let nodes: Vec<Value> = cert
        .nodes
        .iter()
        .map(|n| match &n.kind {
            NodeKind::Leaf { chamber } => json!({ "id": n.id, "kind": "leaf", "target": n.target, "chamber": chamber }),
            NodeKind::Koszul { d, e, children } => json!({
                "id": n.id, "kind": "koszul", "target": n.target, "d": d, "e": e, "children": children,
            }),
        })
        .collect();
    json!({ "root": cert.root, "twist": cert.twist, "nodes": nodes })
}

pub fn emit_certificate(cert: &Certificate, path: &Path) -> Result<(), IoError> {
    write_file(path, &to_text(&certificate_to_json(cert)))
}

// ---- instances ----

/// An instance as read from disk, before normalization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawInstance {
    pub fan: Fan,
    pub sigma: Cone,
    pub c0: Rat,
    pub c: QDivisor,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceJson {
    fan: FanJson,
    sigma: Vec<usize>,
    c0: [i64; 2],
    #[serde(default)]
    c: Option<QDivisorJson>,
}

pub fn parse_instance_str(text: &str) -> Result<RawInstance, IoError> {
    let raw: InstanceJson = serde_json::from_str(text)?;
    let fan = fan_from_raw(raw.fan, "fan.")?;
    let ids: Vec<RayId> = raw
        .sigma
        .iter()
        .map(|&k| fan.rays().get(k).map(|r| r.id).ok_or_else(|| schema("sigma", format!("ray index {k} out of range"))))
        .collect::<Result<_, _>>()?;
    let c0 = rat_from_pair("c0", &raw.c0)?;
    let c = match raw.c {
        Some(q) => qdivisor_from_raw(q, Some(&fan), "c.")?,
        None => QDivisor::zero(),
    };
    Ok(RawInstance { fan, sigma: Cone::new(ids), c0, c })
}

pub fn parse_instance(path: &Path) -> Result<RawInstance, IoError> {
    parse_instance_str(&read_file(path)?)
}

pub fn instance_to_json(inst: &RawInstance) -> Value {
    let sigma: Vec<usize> = inst.sigma.ray_ids().iter().map(|&id| inst.fan.position(id).unwrap()).collect();
    json!({
        "fan": fan_to_json(&inst.fan),
        "sigma": sigma,
        "c0": rat_to_json(&inst.c0),
        "c": qdivisor_to_json(&inst.c, Some(&inst.fan)),
    })
}

// ---- reports ----

pub fn fan_report(fan: &Fan) -> Value {
    json!({
        "rank": fan.rank(),
        "rays": fan.rays().len(),
        "max_cones": fan.max_cones().len(),
        "smooth": fan.is_smooth(),
        "complete": fan.is_complete(),
        "codim_ge2_strata": fan.has_codim_ge2_strata(),
    })
}

pub fn frobenius_to_json(dec: &FrobeniusDecomposition) -> Value {
    let table: Vec<Value> = dec
        .multiplicities
        .iter()
        .map(|(c, k)| json!({ "class": class_to_json(c), "multiplicity": k }))
        .collect();
    json!({ "m": dec.m, "source": tdivisor_to_json(&dec.source), "total": dec.total(), "table": table })
}

pub fn thomsen_to_json(t: &ThomsenCollection) -> Value {
    json!({
        "classes": classes_to_json(&t.classes),
        "m_used": t.m_used,
        "stabilization_evidence": [t.stabilization_evidence.0, t.stabilization_evidence.1],
    })
}

fn point(u: &[Rat]) -> Value {
    Value::Array(u.iter().map(rat_to_json).collect())
}

pub fn normalization_to_json(n: &Normalization) -> Value {
    json!({
        "basis_change": n.basis_change.to_rows().iter().map(|r| ints(r)).collect::<Vec<_>>(),
        "shift": point(&n.shift),
        "integral_shift": tdivisor_to_json(&n.integral_shift),
        "c0_shift": int(&n.c0_shift),
    })
}

pub fn bondal_report_to_json(r: &BondalReport) -> Value {
    let pullback: Vec<Value> = r
        .pullback
        .iter()
        .map(|e| json!({ "u": point(&e.u), "d_tilde": tdivisor_to_json(&e.d_tilde), "ok": e.ok }))
        .collect();
    let descent: Vec<Value> = r
        .descent
        .iter()
        .map(|c| {
            json!({
                "u": point(&c.u),
                "d": int(&c.d),
                "items": c.items,
                "chambers": c.chambers,
                "leaves": c.leaves,
                "certificate": c.certificate.as_ref().map(certificate_to_json),
                "error": c.error,
            })
        })
        .collect();
    let restriction: Vec<Value> = r
        .restriction
        .iter()
        .map(|x| {
            json!({
                "u1": point(&x.u1),
                "grid": x.grid,
                "restricted": classes_to_json(&x.restricted),
                "expected": classes_to_json(&x.expected),
                "witnesses": x.witnesses,
                "ok": x.ok,
                "error": x.error,
            })
        })
        .collect();
    let window = |s: &BTreeSet<BigInt>| s.iter().map(int).collect::<Vec<_>>();
    json!({
        "l": r.l,
        "n": r.n,
        "q": r.q,
        "c0": rat_to_json(&r.c0),
        "pullback": pullback,
        "descent": descent,
        "d_values": window(&r.d_values),
        "expected_window": window(&r.expected_window),
        "restriction": restriction,
        "failures": r.failures,
        "passed": r.passed(),
    })
}

/// Canonical text of a fan file, for golden comparisons.
pub fn canonical_fan_text(text: &str) -> Result<String, IoError> {
    Ok(to_text(&fan_to_json(&parse_fan_str(text)?)))
}
