//! Binary-addition-tree enumerators and subsystem configuration tables.
//!
//! Both enumerators behave like an odometer that adds one to the first
//! coordinate and carries toward the last. The forward BAT walks all binary
//! vectors; the upper-bound BAT walks all nonnegative integer vectors whose
//! coordinate sum stays below a cap `u`, which is exactly the set of count
//! vectors of a subsystem holding at most `u - 1` components.

use std::collections::HashSet;

use serde::Serialize;
use thiserror::Error;

use crate::model::{subsystem_aggregates, Aggregates, CountVector, SubsystemSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnumerationError {
    #[error("vector width must be at least 1, got {0}")]
    BadWidth(i64),
    #[error("sum cap must be at least 2, got {0}")]
    BadCap(i64),
    #[error("prefix width {j} is outside 1..={mu}")]
    BadPrefix { j: usize, mu: usize },
    #[error("{mu}-tuple binary enumeration is too large to materialize")]
    TooLarge { mu: usize },
}

/// Forward binary-addition-tree: all `2^mu` binary vectors, zero vector first.
#[derive(Debug, Clone)]
pub struct ForwardBat {
    x: Vec<u32>,
    started: bool,
    done: bool,
}

impl ForwardBat {
    pub fn new(mu: usize) -> Result<Self, EnumerationError> {
        if mu == 0 {
            return Err(EnumerationError::BadWidth(0));
        }
        Ok(Self { x: vec![0; mu], started: false, done: false })
    }
}

impl Iterator for ForwardBat {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(self.x.clone());
        }
        let mut i = 0;
        loop {
            if self.x[i] == 0 {
                self.x[i] = 1;
                return Some(self.x.clone());
            }
            if i + 1 == self.x.len() {
                self.done = true;
                return None;
            }
            self.x[i] = 0;
            i += 1;
        }
    }
}

/// Upper-bound binary-addition-tree: every `mu`-tuple of nonnegative
/// integers with coordinate sum at most `u - 1`, zero vector first.
#[derive(Debug, Clone)]
pub struct UpperBoundBat {
    x: Vec<u32>,
    sum: u32,
    limit: u32,
    started: bool,
    done: bool,
}

impl UpperBoundBat {
    pub fn new(mu: usize, u: u32) -> Result<Self, EnumerationError> {
        if mu == 0 {
            return Err(EnumerationError::BadWidth(0));
        }
        if u < 2 {
            return Err(EnumerationError::BadCap(i64::from(u)));
        }
        Ok(Self { x: vec![0; mu], sum: 0, limit: u - 1, started: false, done: false })
    }

    /// Advances to the next vector and returns a view of it.
    pub fn advance(&mut self) -> Option<&[u32]> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.x);
        }
        let mut i = 0;
        loop {
            if self.sum < self.limit {
                self.x[i] += 1;
                self.sum += 1;
                return Some(&self.x);
            }
            if i + 1 == self.x.len() {
                self.done = true;
                return None;
            }
            self.sum -= self.x[i];
            self.x[i] = 0;
            i += 1;
        }
    }
}

impl Iterator for UpperBoundBat {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        self.advance().map(<[u32]>::to_vec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BatKind {
    Forward,
    UpperBound,
}

/// A materialized enumeration in emission order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumerationOrder {
    pub kind: BatKind,
    pub mu: usize,
    /// Per-coordinate value count for the forward BAT (2), sum cap `u` for
    /// the upper-bound BAT.
    pub cap: u32,
    pub vectors: Vec<Vec<u32>>,
}

impl EnumerationOrder {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// CSV with columns `x1..xmu,sum`, one row per vector.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = (1..=self.mu).map(|j| format!("x{j}")).collect();
        out.push_str(&header.join(","));
        out.push_str(",sum\n");
        for v in &self.vectors {
            for x in v {
                out.push_str(&x.to_string());
                out.push(',');
            }
            out.push_str(&v.iter().sum::<u32>().to_string());
            out.push('\n');
        }
        out
    }
}

pub fn forward_bat(mu: usize) -> Result<EnumerationOrder, EnumerationError> {
    if mu > 24 {
        return Err(EnumerationError::TooLarge { mu });
    }
    let vectors = ForwardBat::new(mu)?.collect();
    Ok(EnumerationOrder { kind: BatKind::Forward, mu, cap: 2, vectors })
}

pub fn upper_bound_bat(mu: usize, u: u32) -> Result<EnumerationOrder, EnumerationError> {
    let vectors = UpperBoundBat::new(mu, u)?.collect();
    Ok(EnumerationOrder { kind: BatKind::UpperBound, mu, cap: u, vectors })
}

/// Distinct `j`-coordinate prefixes of `order`, in order of first occurrence.
pub fn prefix_restrict(order: &EnumerationOrder, j: usize) -> Result<EnumerationOrder, EnumerationError> {
    if j == 0 || j > order.mu {
        return Err(EnumerationError::BadPrefix { j, mu: order.mu });
    }
    let mut seen = HashSet::new();
    let vectors = order
        .vectors
        .iter()
        .map(|v| v[..j].to_vec())
        .filter(|p| seen.insert(p.clone()))
        .collect();
    Ok(EnumerationOrder { kind: order.kind, mu: j, cap: order.cap, vectors })
}

/// A subsystem configuration with its cached aggregates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredConfig {
    /// 0-based subsystem index.
    pub subsystem: usize,
    pub config: CountVector,
    pub aggregates: Aggregates,
}

/// Admissible configurations of one subsystem, in upper-bound BAT order.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsystemTable {
    /// 0-based subsystem index.
    pub subsystem: usize,
    pub entries: Vec<ScoredConfig>,
}

impl SubsystemTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn build_subsystem_table(subsystem: usize, spec: &SubsystemSpec) -> SubsystemTable {
    let mut bat = UpperBoundBat::new(spec.arity(), spec.max_total + 1).expect("validated spec has options");
    let mut entries = Vec::new();
    while let Some(x) = bat.advance() {
        let total: u32 = x.iter().sum();
        if total < spec.min_total {
            continue;
        }
        let config = CountVector(x.to_vec());
        let aggregates = subsystem_aggregates(&config, spec).expect("arity matches");
        entries.push(ScoredConfig { subsystem, config, aggregates });
    }
    SubsystemTable { subsystem, entries }
}
