use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use super::{contraction_channel, enumerate_pairings, OperatorWord, Pairing};
use crate::error::{Error, Result};
use crate::greens::Channel;

/// A second-order vacuum graph: self-loops at each vertex and the edges
/// between them, each counted by channel. Cross edges are oriented from
/// vertex 1 to vertex 2, so `jk` means x at v1 and p at v2.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct DiagramSignature {
    pub cross: BTreeMap<Channel, usize>,
    pub loops_v1: BTreeMap<Channel, usize>,
    pub loops_v2: BTreeMap<Channel, usize>,
    pub multiplicity: u64,
}

impl DiagramSignature {
    fn key(&self) -> SignatureKey {
        (
            self.cross.clone(),
            self.loops_v1.clone(),
            self.loops_v2.clone(),
        )
    }
}

type SignatureKey = (
    BTreeMap<Channel, usize>,
    BTreeMap<Channel, usize>,
    BTreeMap<Channel, usize>,
);

fn swapped(key: &SignatureKey) -> SignatureKey {
    let cross = key.0.iter().map(|(&ch, &n)| (ch.transpose(), n)).collect();
    (cross, key.2.clone(), key.1.clone())
}

fn list(map: &BTreeMap<Channel, usize>) -> String {
    map.iter()
        .map(|(ch, &n)| {
            if n == 1 {
                ch.name().to_string()
            } else {
                format!("{}×{}", ch.name(), n)
            }
        })
        .collect::<Vec<_>>()
        .join(", ")
}

impl fmt::Display for DiagramSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if !self.cross.is_empty() {
            parts.push(format!("v1—v2: {}", list(&self.cross)));
        }
        if !self.loops_v1.is_empty() {
            parts.push(format!("v1-loop: {}", list(&self.loops_v1)));
        }
        if !self.loops_v2.is_empty() {
            parts.push(format!("v2-loop: {}", list(&self.loops_v2)));
        }
        write!(f, "{} × [{}]", self.multiplicity, parts.join("; "))
    }
}

/// Connected second-order graphs of a vertex word, with the bookkeeping
/// needed for the conservation check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Census {
    pub vertex: String,
    pub signatures: Vec<DiagramSignature>,
    pub connected: u64,
    pub disconnected: u64,
    pub total: u64,
}

impl Census {
    pub fn multiplicities(&self) -> Vec<u64> {
        let mut m: Vec<u64> = self.signatures.iter().map(|s| s.multiplicity).collect();
        m.sort_unstable();
        m
    }
}

fn classify(word: &OperatorWord, pairing: &Pairing, half: usize) -> Option<SignatureKey> {
    let mut key: SignatureKey = Default::default();
    for &(i, j) in pairing {
        let (a, b) = (word.letters[i].0, word.letters[j].0);
        let ch = contraction_channel(a, b);
        let (vi, vj) = (i < half, j < half);
        let slot = match (vi, vj) {
            (true, true) => &mut key.1,
            (false, false) => &mut key.2,
            _ => &mut key.0,
        };
        // Loops at one vertex are equal-time contractions; jk and kj agree there.
        let ch = if vi == vj && ch == Channel::Kj {
            Channel::Jk
        } else {
            ch
        };
        *slot.entry(ch).or_insert(0) += 1;
    }
    if key.0.is_empty() {
        return None;
    }
    let other = swapped(&key);
    Some(key.min(other))
}

/// Groups the pairings of two copies of `vertex` into connected graph
/// signatures. Only order 2 is supported.
pub fn connected_census(vertex: &OperatorWord, order: u32) -> Result<Census> {
    if order != 2 {
        return Err(Error::NotImplemented(format!(
            "graph census at order {order}; only order 2 is grouped by signature"
        )));
    }
    if vertex.is_empty() {
        return Err(Error::InvalidParameter("empty vertex word".into()));
    }
    let half = vertex.len();
    let word = vertex.relabel(1).concat(&vertex.relabel(2));
    let pairings = enumerate_pairings(&word);
    let total = pairings.len() as u64;
    let groups = pairings
        .par_iter()
        .fold(BTreeMap::<SignatureKey, u64>::new, |mut acc, p| {
            let key = classify(&word, p, half);
            *acc.entry(key.unwrap_or_default()).or_insert(0) += 1;
            acc
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });
    let mut disconnected = 0;
    let mut signatures = Vec::new();
    for (key, count) in groups {
        if key.0.is_empty() {
            disconnected += count;
            continue;
        }
        signatures.push(DiagramSignature {
            cross: key.0,
            loops_v1: key.1,
            loops_v2: key.2,
            multiplicity: count,
        });
    }
    signatures.sort_by(|a, b| {
        b.multiplicity
            .cmp(&a.multiplicity)
            .then_with(|| a.key().cmp(&b.key()))
    });
    Ok(Census {
        vertex: vertex.to_monomial_string(),
        connected: total - disconnected,
        signatures,
        disconnected,
        total,
    })
}
