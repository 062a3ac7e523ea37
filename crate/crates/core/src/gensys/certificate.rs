use std::collections::BTreeMap;

use thiserror::Error;

use super::chamber::realizes;
use super::{divisor_of_signs, formal_add, formal_from_set, formal_to_string, parse_signs, FormalSum, GeneratingSystem};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NodeKind {
    /// `target = twist - D_[w]` for the chamber with this sign string.
    Leaf { chamber: String },
    /// Koszul step on `d`, `e` with disjoint supports; children prove
    /// `target - d`, `target - e`, `target - d - e` in that order.
    Koszul { d: FormalSum, e: FormalSum, children: [usize; 3] },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CertNode {
    pub id: usize,
    pub target: FormalSum,
    pub kind: NodeKind,
}

/// DAG of twisted Koszul steps proving that `O(twist)` lies in the
/// subcategory generated by the `O(twist - D_[w])`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub root: usize,
    pub twist: FormalSum,
    pub nodes: Vec<CertNode>,
}

impl Certificate {
    pub fn node(&self, id: usize) -> Option<&CertNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn leaves(&self) -> impl Iterator<Item = &CertNode> {
        self.nodes.iter().filter(|n| matches!(n.kind, NodeKind::Leaf { .. }))
    }

    pub fn koszul_targets(&self) -> Vec<FormalSum> {
        self.nodes
            .iter()
            .filter(|n| matches!(n.kind, NodeKind::Koszul { .. }))
            .map(|n| n.target.clone())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertificateViolation {
    #[error("node id {0} appears twice")]
    DuplicateId(usize),
    #[error("node {node} refers to missing node {child}")]
    MissingChild { node: usize, child: usize },
    #[error("root {0} is missing")]
    MissingRoot(usize),
    #[error("node {0} lies on a cycle")]
    Cycle(usize),
    #[error("root target {found} differs from the twist {expected}")]
    RootTarget { expected: String, found: String },
    #[error("node {0}: Koszul divisor is empty")]
    EmptyDivisor(usize),
    #[error("node {0}: Koszul divisor is not a set of primes")]
    NotReduced(usize),
    #[error("node {node}: primes {a} and {b} are not disjoint")]
    NotDisjoint { node: usize, a: String, b: String },
    #[error("node {node}: child {child} proves {found}, expected {expected}")]
    ChildTarget { node: usize, child: usize, expected: String, found: String },
    #[error("node {0}: malformed sign string")]
    BadSigns(usize),
    #[error("node {0}: sign pattern is not realized in the reference half-space")]
    Unrealizable(usize),
    #[error("node {node}: leaf proves {found}, chamber gives {expected}")]
    LeafTarget { node: usize, expected: String, found: String },
}

/// Checks every node of `cert` against `gs`. Chamber divisors are
/// recomputed from the sign strings, whose realizability is decided by
/// linear programming.
pub fn verify_certificate(
    cert: &Certificate,
    gs: &GeneratingSystem,
    disjoint: &dyn Fn(&str, &str) -> bool,
) -> Result<(), Vec<CertificateViolation>> {
    use CertificateViolation as V;
    let mut out = Vec::new();
    let mut by_id: BTreeMap<usize, &CertNode> = BTreeMap::new();
    for n in &cert.nodes {
        if by_id.insert(n.id, n).is_some() {
            out.push(V::DuplicateId(n.id));
        }
    }
    for n in &cert.nodes {
        if let NodeKind::Koszul { children, .. } = &n.kind {
            for &c in children {
                if !by_id.contains_key(&c) {
                    out.push(V::MissingChild { node: n.id, child: c });
                }
            }
        }
    }
    match by_id.get(&cert.root) {
        None => out.push(V::MissingRoot(cert.root)),
        Some(r) if r.target != cert.twist => out.push(V::RootTarget {
            expected: formal_to_string(&cert.twist),
            found: formal_to_string(&r.target),
        }),
        _ => {}
    }
    if !out.is_empty() {
        return Err(out);
    }
    if let Some(c) = find_cycle(&by_id) {
        return Err(vec![V::Cycle(c)]);
    }

    for n in &cert.nodes {
        match &n.kind {
            NodeKind::Koszul { d, e, children } => {
                for div in [d, e] {
                    if div.is_empty() {
                        out.push(V::EmptyDivisor(n.id));
                    }
                    if div.values().any(|&v| v != 1) {
                        out.push(V::NotReduced(n.id));
                    }
                }
                for a in d.keys() {
                    for b in e.keys() {
                        if a == b || !disjoint(a, b) {
                            out.push(V::NotDisjoint { node: n.id, a: a.clone(), b: b.clone() });
                        }
                    }
                }
                let a_d = formal_add(&n.target, d, -1);
                let a_e = formal_add(&n.target, e, -1);
                let a_de = formal_add(&a_d, e, -1);
                for (child, expected) in children.iter().zip([a_d, a_e, a_de]) {
                    let found = &by_id[child].target;
                    if *found != expected {
                        out.push(V::ChildTarget {
                            node: n.id,
                            child: *child,
                            expected: formal_to_string(&expected),
                            found: formal_to_string(found),
                        });
                    }
                }
            }
            NodeKind::Leaf { chamber } => {
                let Some(signs) = parse_signs(chamber).filter(|s| s.len() == gs.items().len()) else {
                    out.push(V::BadSigns(n.id));
                    continue;
                };
                if realizes(gs, &signs).is_none() {
                    out.push(V::Unrealizable(n.id));
                    continue;
                }
                let div = formal_from_set(&divisor_of_signs(gs, &signs));
                let expected = formal_add(&cert.twist, &div, -1);
                if expected != n.target {
                    out.push(V::LeafTarget {
                        node: n.id,
                        expected: formal_to_string(&expected),
                        found: formal_to_string(&n.target),
                    });
                }
            }
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

fn find_cycle(by_id: &BTreeMap<usize, &CertNode>) -> Option<usize> {
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state: BTreeMap<usize, u8> = BTreeMap::new();
    for &start in by_id.keys() {
        if state.get(&start).copied().unwrap_or(0) != 0 {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
        state.insert(start, 1);
        while let Some(&mut (id, ref mut next)) = stack.last_mut() {
            let children: &[usize] = match &by_id[&id].kind {
                NodeKind::Koszul { children, .. } => children,
                NodeKind::Leaf { .. } => &[],
            };
            if *next < children.len() {
                let c = children[*next];
                *next += 1;
                match state.get(&c).copied().unwrap_or(0) {
                    0 => {
                        state.insert(c, 1);
                        stack.push((c, 0));
                    }
                    1 => return Some(c),
                    _ => {}
                }
            } else {
                state.insert(id, 2);
                stack.pop();
            }
        }
    }
    None
}
