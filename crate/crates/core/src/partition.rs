//! Isomorphism types of finite modules over a chain ring: a module is a
//! direct sum of cyclic pieces `R0/p^k`, so its type is the weakly decreasing
//! partition of the exponents k. In a truncation of depth N+1, a part equal
//! to N+1 records a free summand of the truncated ring.

use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct ModuleType {
    parts: Vec<u32>,
}

impl ModuleType {
    /// The trivial module.
    pub fn trivial() -> Self {
        ModuleType { parts: Vec::new() }
    }

    /// Validates that parts are positive and weakly decreasing.
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(Error::Parse("partition parts must be positive".into()));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Parse(
                "partition parts must be weakly decreasing".into(),
            ));
        }
        Ok(ModuleType { parts })
    }

    /// Sorts and drops zeros, accepting parts in any order.
    pub fn from_unsorted(mut parts: Vec<u32>) -> Self {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        ModuleType { parts }
    }

    /// Builds the type from Smith normal form diagonal exponents (weakly
    /// increasing); zero exponents are unit pivots and drop out.
    pub fn from_exponents(exponents: &[u32]) -> Self {
        let mut parts: Vec<u32> = exponents.iter().rev().copied().filter(|&e| e > 0).collect();
        debug_assert!(parts.windows(2).all(|w| w[0] >= w[1]));
        parts.sort_unstable_by(|a, b| b.cmp(a));
        ModuleType { parts }
    }

    /// In-place variant of `from_exponents` for reuse inside scan loops.
    pub(crate) fn set_from_exponents(&mut self, exponents: &[u32]) {
        self.parts.clear();
        self.parts
            .extend(exponents.iter().rev().copied().filter(|&e| e > 0));
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn is_trivial(&self) -> bool {
        self.parts.is_empty()
    }

    /// Number of parts: the residue-field dimension of G/pG.
    pub fn rank_q(&self) -> usize {
        self.parts.len()
    }

    /// Sum of the parts: log_q of the module size.
    pub fn total(&self) -> u32 {
        self.parts.iter().sum()
    }

    /// The type of G/p^k G: each part capped at k, zero parts dropped.
    pub fn reduce_mod(&self, k: u32) -> ModuleType {
        if k == 0 {
            return ModuleType::trivial();
        }
        ModuleType {
            parts: self.parts.iter().map(|&p| p.min(k)).collect(),
        }
    }

    /// Whether p^k annihilates the module, i.e. every part is at most k.
    pub fn annihilated_by(&self, k: u32) -> bool {
        self.parts.first().is_none_or(|&p| p <= k)
    }

    /// Restriction of scalars along an unramified degree-d extension: each
    /// cyclic summand of exponent k becomes d summands of exponent k.
    pub fn abelianize(&self, d: usize) -> ModuleType {
        let mut parts = Vec::with_capacity(self.parts.len() * d);
        for &p in &self.parts {
            parts.extend(std::iter::repeat_n(p, d));
        }
        ModuleType { parts }
    }

    /// Multiplicity of each distinct part, largest part first.
    pub fn multiplicities(&self) -> Vec<(u32, usize)> {
        let mut out: Vec<(u32, usize)> = Vec::new();
        for &p in &self.parts {
            match out.last_mut() {
                Some((v, c)) if *v == p => *c += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }
}

/// Deterministic report ordering: shorter partitions first, then lexicographic.
impl Ord for ModuleType {
    fn cmp(&self, other: &Self) -> Ordering {
        self.parts
            .len()
            .cmp(&other.parts.len())
            .then_with(|| self.parts.cmp(&other.parts))
    }
}

impl PartialOrd for ModuleType {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ModuleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for p in &self.parts {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for ModuleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

/// Parses "2,1,1"; the empty string is the trivial module. Parts may appear
/// in any order and are sorted.
impl FromStr for ModuleType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(ModuleType::trivial());
        }
        let parts: Vec<u32> = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u32>()
                    .map_err(|e| Error::Parse(format!("bad partition part {t:?}: {e}")))
            })
            .collect::<Result<_>>()?;
        if parts.contains(&0) {
            return Err(Error::Parse("partition parts must be positive".into()));
        }
        Ok(ModuleType::from_unsorted(parts))
    }
}

impl serde::Serialize for ModuleType {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for ModuleType {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
