//! Exhaustive reference solver and a seeded generator of small instances.
//!
//! Only the `model` module is shared with the stage-wise solver: the oracle
//! lists count vectors with its own recursion and applies no pruning at all.

use std::cmp::Ordering;
use std::time::Instant;

use num_bigint::BigUint;
use thiserror::Error;

use crate::model::{
    space_size_number_based, subsystem_aggregates, Aggregates, ComponentOption, CountVector, RapInstance,
    SolutionVector, SubsystemSpec,
};
use crate::solver::{Outcome, SolveReport};

/// Largest number-based space the oracle will walk.
pub const ORACLE_SPACE_LIMIT: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("search space has {size} points, above the oracle limit of {limit}")]
    SpaceTooLarge { size: BigUint, limit: u64 },
}

fn counts_with_total_in(arity: usize, min_total: u32, max_total: u32) -> Vec<Vec<u32>> {
    fn rec(prefix: &mut Vec<u32>, arity: usize, remaining: u32, min_total: u32, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == arity {
            let total: u32 = prefix.iter().sum();
            if total >= min_total {
                out.push(prefix.clone());
            }
            return;
        }
        for x in 0..=remaining {
            prefix.push(x);
            rec(prefix, arity, remaining - x, min_total, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(arity), arity, max_total, min_total, &mut out);
    out
}

fn prefer(a: &Aggregates, a_counts: &[u32], b: &Aggregates, b_counts: &[u32]) -> bool {
    let ord = a
        .reliability
        .total_cmp(&b.reliability)
        .then(b.cost.cmp(&a.cost))
        .then(b.weight.cmp(&a.weight));
    match ord {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => a_counts < b_counts,
    }
}

/// Walks every count-vector combination and returns the most reliable one
/// within the cost and weight ceilings. The instance's reliability lower
/// bound is ignored.
pub fn brute_force_solve(instance: &RapInstance) -> Result<SolveReport, OracleError> {
    let start = Instant::now();
    let size = space_size_number_based(instance).0;
    if size > BigUint::from(ORACLE_SPACE_LIMIT) {
        return Err(OracleError::SpaceTooLarge { size, limit: ORACLE_SPACE_LIMIT });
    }

    let per_subsystem: Vec<Vec<(CountVector, Aggregates)>> = instance
        .subsystems
        .iter()
        .map(|spec| {
            counts_with_total_in(spec.arity(), spec.min_total, spec.max_total)
                .into_iter()
                .map(|x| {
                    let x = CountVector(x);
                    let agg = subsystem_aggregates(&x, spec).expect("arity matches");
                    (x, agg)
                })
                .collect()
        })
        .collect();

    let n = per_subsystem.len();
    let mut idx = vec![0usize; n];
    let mut best: Option<(Aggregates, Vec<u32>, Vec<usize>)> = None;
    loop {
        let agg = idx
            .iter()
            .enumerate()
            .fold(Aggregates::IDENTITY, |acc, (i, &j)| acc.series(per_subsystem[i][j].1));
        if agg.cost <= instance.cost_ceiling && agg.weight <= instance.weight_ceiling {
            let counts: Vec<u32> =
                idx.iter().enumerate().flat_map(|(i, &j)| per_subsystem[i][j].0 .0.iter().copied()).collect();
            let replace = match &best {
                None => true,
                Some((b_agg, b_counts, _)) => prefer(&agg, &counts, b_agg, b_counts),
            };
            if replace {
                best = Some((agg, counts, idx.clone()));
            }
        }
        // odometer over the per-subsystem lists
        let mut k = 0;
        loop {
            if k == n {
                return Ok(report(best, &per_subsystem, start));
            }
            idx[k] += 1;
            if idx[k] < per_subsystem[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn report(
    best: Option<(Aggregates, Vec<u32>, Vec<usize>)>,
    per_subsystem: &[Vec<(CountVector, Aggregates)>],
    start: Instant,
) -> SolveReport {
    let optimum = best.map(|(aggregates, _, idx)| SolutionVector {
        configs: idx.iter().enumerate().map(|(i, &j)| per_subsystem[i][j].0.clone()).collect(),
        aggregates,
    });
    SolveReport {
        outcome: if optimum.is_some() { Outcome::Optimal } else { Outcome::Infeasible },
        optimal_aggregates: optimum.as_ref().map(|s| s.aggregates),
        optimum,
        stage_stats: Vec::new(),
        wall_time: start.elapsed().as_secs_f64(),
    }
}

/// 64-bit linear congruential generator (multiplier 6364136223846793005,
/// increment 1442695040888963407). Outputs are the high 31 bits of the state.
#[derive(Debug, Clone)]
pub struct Lcg {
    state: u64,
}

impl Lcg {
    pub const MULTIPLIER: u64 = 6_364_136_223_846_793_005;
    pub const INCREMENT: u64 = 1_442_695_040_888_963_407;

    pub fn new(seed: u64) -> Self {
        let mut lcg = Self { state: seed };
        lcg.next_u32();
        lcg
    }

    pub fn next_u32(&mut self) -> u32 {
        self.state = self.state.wrapping_mul(Self::MULTIPLIER).wrapping_add(Self::INCREMENT);
        (self.state >> 33) as u32
    }

    /// Integer in `lo..=hi` (modulo reduction).
    pub fn range(&mut self, lo: u32, hi: u32) -> u32 {
        assert!(lo <= hi);
        lo + self.next_u32() % (hi - lo + 1)
    }
}

/// Size caps for [`random_instance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceLimits {
    pub min_subsystems: u32,
    pub max_subsystems: u32,
    pub max_options: u32,
    pub max_total: u32,
}

impl Default for InstanceLimits {
    fn default() -> Self {
        Self { min_subsystems: 2, max_subsystems: 4, max_options: 3, max_total: 4 }
    }
}

/// Deterministic small instance from `seed`: reliabilities in `[0.50, 0.99]`
/// (two decimals), costs and weights in `1..=9`. Each ceiling is drawn from
/// the lower 60% of the range between its smallest and largest attainable
/// value, which leaves roughly half of the instances feasible.
pub fn random_instance(seed: u64, limits: InstanceLimits) -> RapInstance {
    let mut rng = Lcg::new(seed);
    let n = rng.range(limits.min_subsystems, limits.max_subsystems);
    let mut subsystems = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let m = rng.range(1, limits.max_options);
        let options = (0..m)
            .map(|_| {
                let r = f64::from(rng.range(50, 99)) / 100.0;
                let c = u64::from(rng.range(1, 9));
                let w = u64::from(rng.range(1, 9));
                ComponentOption::new(r, c, w).expect("r in (0, 1]")
            })
            .collect();
        let max_total = rng.range(1, limits.max_total);
        let min_total = if rng.range(0, 3) == 0 { rng.range(1, max_total) } else { 1 };
        subsystems.push(SubsystemSpec::new(options, min_total, max_total).expect("valid totals"));
    }

    let span = |f: fn(&ComponentOption) -> u64| {
        subsystems.iter().fold((0u64, 0u64), |(lo, hi), s| {
            let min = s.options.iter().map(f).min().unwrap();
            let max = s.options.iter().map(f).max().unwrap();
            (lo + u64::from(s.min_total) * min, hi + u64::from(s.max_total) * max)
        })
    };
    let (c_lo, c_hi) = span(|o| o.cost);
    let (w_lo, w_hi) = span(|o| o.weight);
    let cost_ceiling = c_lo + u64::from(rng.range(0, ((c_hi - c_lo) * 3 / 5) as u32));
    let weight_ceiling = w_lo + u64::from(rng.range(0, ((w_hi - w_lo) * 3 / 5) as u32));
    RapInstance::new(subsystems, cost_ceiling, weight_ceiling, None).expect("generated instance is valid")
}
