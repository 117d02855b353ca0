//! Stage-wise exact solver.
//!
//! Subsystem tables are built from the upper-bound BAT, optionally shrunk by
//! the reliability lower bound and the dominance rule, and then combined one
//! subsystem at a time. After every stage the surviving prefixes are checked
//! against the ceilings (tightened by the lightest/cheapest possible
//! completion) and reduced to their Pareto front. The most reliable element
//! of the last stage is the optimum.

use std::cmp::Ordering;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::enumeration::{build_subsystem_table, ScoredConfig, SubsystemTable};
use crate::model::{format_configs, Aggregates, CodecError, CountVector, RapInstance, SolutionVector};
use crate::pruning::{compute_suffix_bounds, dominance_filter_table, filter_by_rlb, pareto_indices, Scored};

/// Default limit on the number of prefixes kept at one stage.
pub const DEFAULT_MAX_SET_SIZE: usize = 50_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error(
        "stage {stage} produced more than {limit} partial solutions; \
         enable the dominance rule and/or the dynamic bounds"
    )]
    SetTooLarge { stage: usize, limit: usize },
    #[error("ceilings above {} are not supported", u32::MAX)]
    CeilingTooLarge,
    #[error("cannot append a configuration of subsystem {entry} to a prefix of {stage} subsystems")]
    StageMismatch { stage: usize, entry: usize },
    #[error("the report holds no optimal solution")]
    NoOptimum,
    #[error(transparent)]
    Codec(#[from] CodecError),
}

/// Which reductions to apply. Every combination returns the same optimal
/// reliability; the flags only change the amount of work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SolverOptions {
    pub use_rlb: bool,
    pub use_dominance: bool,
    pub use_dynamic_bounds: bool,
    pub collect_stats: bool,
    pub max_set_size: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            use_rlb: true,
            use_dominance: true,
            use_dynamic_bounds: true,
            collect_stats: true,
            max_set_size: DEFAULT_MAX_SET_SIZE,
        }
    }
}

impl SolverOptions {
    /// The eight on/off combinations of the three reduction flags.
    pub fn all_combinations() -> Vec<SolverOptions> {
        (0..8u8)
            .map(|bits| SolverOptions {
                use_rlb: bits & 1 != 0,
                use_dominance: bits & 2 != 0,
                use_dynamic_bounds: bits & 4 != 0,
                ..Default::default()
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StageStats {
    pub stage: usize,
    /// Extensions formed at this stage.
    pub generated: usize,
    /// Extensions that passed the ceiling, bound and reliability checks.
    pub after_bounds: usize,
    /// Survivors of the dominance rule (equal to `after_bounds` when it is off).
    pub after_dominance: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Optimal,
    Infeasible,
    /// Feasible solutions may exist, but none reaches the reliability lower bound.
    BelowLowerBound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub outcome: Outcome,
    pub optimum: Option<SolutionVector>,
    pub optimal_aggregates: Option<Aggregates>,
    pub stage_stats: Vec<StageStats>,
    /// Seconds.
    pub wall_time: f64,
}

impl SolveReport {
    /// Stage statistics as CSV with a fixed header.
    pub fn stats_csv(&self) -> String {
        let mut out = String::from("stage,generated,after_bounds,after_dominance\n");
        for s in &self.stage_stats {
            out.push_str(&format!("{},{},{},{}\n", s.stage, s.generated, s.after_bounds, s.after_dominance));
        }
        out
    }
}

/// A prefix covering the first `stage()` subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialSolution {
    pub configs: Vec<CountVector>,
    pub aggregates: Aggregates,
}

impl Default for PartialSolution {
    fn default() -> Self {
        Self::empty()
    }
}

impl PartialSolution {
    pub fn empty() -> Self {
        Self { configs: Vec::new(), aggregates: Aggregates::IDENTITY }
    }

    pub fn stage(&self) -> usize {
        self.configs.len()
    }

    /// Appends the configuration of the next subsystem.
    pub fn concat(&self, entry: &ScoredConfig) -> Result<PartialSolution, SolveError> {
        if entry.subsystem != self.stage() {
            return Err(SolveError::StageMismatch { stage: self.stage(), entry: entry.subsystem + 1 });
        }
        let mut configs = self.configs.clone();
        configs.push(entry.config.clone());
        Ok(PartialSolution { configs, aggregates: self.aggregates.series(entry.aggregates) })
    }
}

/// Digit-string form of the optimum.
pub fn reconstruct(report: &SolveReport) -> Result<String, SolveError> {
    let optimum = report.optimum.as_ref().ok_or(SolveError::NoOptimum)?;
    Ok(format_configs(&optimum.configs)?)
}

/// One prefix in a stage layer: aggregates plus a back-pointer into the
/// previous layer and the index of the appended table entry.
#[derive(Debug, Clone, Copy)]
struct Node {
    reliability: f64,
    weight: u32,
    cost: u32,
    parent: u32,
    entry: u32,
}

impl Node {
    fn aggregates(&self) -> Aggregates {
        Aggregates { reliability: self.reliability, weight: self.weight.into(), cost: self.cost.into() }
    }
}

impl Scored for Node {
    fn weight(&self) -> u64 {
        u64::from(self.weight)
    }
    fn cost(&self) -> u64 {
        u64::from(self.cost)
    }
    fn reliability(&self) -> f64 {
        self.reliability
    }
}

struct Limits {
    weight: u64,
    cost: u64,
    r_lb: Option<f64>,
}

impl Limits {
    #[inline]
    fn admits(&self, reliability: f64, weight: u64, cost: u64, suffix_weight: u64, suffix_cost: u64) -> bool {
        weight + suffix_weight <= self.weight
            && cost + suffix_cost <= self.cost
            && self.r_lb.is_none_or(|lb| reliability >= lb)
    }
}

#[inline]
fn extend(prev: &Node, entry: &ScoredConfig) -> (f64, u64, u64) {
    (
        prev.reliability * entry.aggregates.reliability,
        u64::from(prev.weight) + entry.aggregates.weight,
        u64::from(prev.cost) + entry.aggregates.cost,
    )
}

/// Builds the (possibly reduced) subsystem tables used by [`solve`].
pub fn prepare_tables(instance: &RapInstance, options: &SolverOptions) -> Vec<SubsystemTable> {
    let r_lb = instance.reliability_lb.filter(|_| options.use_rlb);
    instance
        .subsystems
        .iter()
        .enumerate()
        .map(|(i, spec)| {
            let mut table = build_subsystem_table(i, spec);
            if let Some(lb) = r_lb {
                table = filter_by_rlb(&table, lb);
            }
            if options.use_dominance {
                table = dominance_filter_table(&table);
            }
            table
        })
        .collect()
}

pub fn solve(instance: &RapInstance, options: &SolverOptions) -> Result<SolveReport, SolveError> {
    let start = Instant::now();
    if instance.weight_ceiling > u64::from(u32::MAX) || instance.cost_ceiling > u64::from(u32::MAX) {
        return Err(SolveError::CeilingTooLarge);
    }
    let n = instance.len();
    let r_lb = instance.reliability_lb.filter(|_| options.use_rlb);
    let empty_outcome = if r_lb.is_some() { Outcome::BelowLowerBound } else { Outcome::Infeasible };
    let finish = |outcome, optimum: Option<SolutionVector>, stage_stats| SolveReport {
        outcome,
        optimal_aggregates: optimum.as_ref().map(|s| s.aggregates),
        optimum,
        stage_stats,
        wall_time: start.elapsed().as_secs_f64(),
    };

    let tables = prepare_tables(instance, options);
    let mut stats = Vec::new();
    let (suffix_weight, suffix_cost) = if options.use_dynamic_bounds {
        match compute_suffix_bounds(&tables) {
            Ok(b) => (b.suffix_weight, b.suffix_cost),
            Err(_) => return Ok(finish(empty_outcome, None, stats)),
        }
    } else {
        if tables.iter().any(SubsystemTable::is_empty) {
            return Ok(finish(empty_outcome, None, stats));
        }
        (vec![0; n], vec![0; n])
    };
    let limits = Limits { weight: instance.weight_ceiling, cost: instance.cost_ceiling, r_lb };

    let root = Node { reliability: 1.0, weight: 0, cost: 0, parent: 0, entry: 0 };
    let mut layers: Vec<Vec<Node>> = Vec::with_capacity(n);
    let mut current: &[Node] = std::slice::from_ref(&root);

    for (k, table) in tables.iter().enumerate() {
        let (sw, sc) = (suffix_weight[k], suffix_cost[k]);
        let admitted = |prev: &Node, entry: &ScoredConfig| {
            let (r, w, c) = extend(prev, entry);
            limits.admits(r, w, c, sw, sc)
        };

        // count first so the layer is allocated once and the cap is checked
        // before any memory is committed
        let mut count = 0usize;
        for entry in &table.entries {
            for prev in current {
                if admitted(prev, entry) {
                    count += 1;
                }
            }
            if count > options.max_set_size {
                return Err(SolveError::SetTooLarge { stage: k + 1, limit: options.max_set_size });
            }
        }

        let mut next = Vec::with_capacity(count);
        for (ei, entry) in table.entries.iter().enumerate() {
            for (pi, prev) in current.iter().enumerate() {
                let (r, w, c) = extend(prev, entry);
                if limits.admits(r, w, c, sw, sc) {
                    next.push(Node { reliability: r, weight: w as u32, cost: c as u32, parent: pi as u32, entry: ei as u32 });
                }
            }
        }
        let generated = current.len() * table.len();
        let after_bounds = next.len();
        if options.use_dominance {
            let keep = pareto_indices(&next);
            if keep.len() < next.len() {
                next = keep.into_iter().map(|i| next[i]).collect();
            }
        }
        if options.collect_stats {
            stats.push(StageStats { stage: k + 1, generated, after_bounds, after_dominance: next.len() });
        }
        layers.push(next);
        current = layers.last().expect("just pushed");
        if current.is_empty() {
            // later stages stay empty; record them for a complete table
            if options.collect_stats {
                stats.extend((k + 2..=n).map(|stage| StageStats { stage, generated: 0, after_bounds: 0, after_dominance: 0 }));
            }
            return Ok(finish(empty_outcome, None, stats));
        }
    }

    let configs_of = |mut idx: usize| -> Vec<CountVector> {
        let mut configs = vec![CountVector::default(); n];
        for k in (0..n).rev() {
            let node = layers[k][idx];
            configs[k] = tables[k].entries[node.entry as usize].config.clone();
            idx = node.parent as usize;
        }
        configs
    };

    let last = layers.last().expect("n >= 1");
    let mut best = 0usize;
    let mut best_configs: Option<Vec<CountVector>> = None;
    for i in 1..last.len() {
        let ord = compare_nodes(&last[i], &last[best]);
        let better = match ord {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => {
                let challenger = configs_of(i);
                let incumbent = best_configs.get_or_insert_with(|| configs_of(best));
                let win = flatten(&challenger) < flatten(incumbent);
                if win {
                    best_configs = Some(challenger);
                }
                win
            }
        };
        if better {
            best = i;
            if ord != Ordering::Equal {
                best_configs = None;
            }
        }
    }
    let configs = best_configs.unwrap_or_else(|| configs_of(best));
    let optimum = SolutionVector {
        configs,
        aggregates: last[best].aggregates(),
    };
    Ok(finish(Outcome::Optimal, Some(optimum), stats))
}

fn compare_nodes(a: &Node, b: &Node) -> Ordering {
    compare_aggregates(&a.aggregates(), &b.aggregates())
}

/// Preference order among complete solutions: higher reliability, then lower
/// cost, then lower weight. Remaining ties go to the lexicographically
/// smallest count sequence.
pub fn compare_aggregates(a: &Aggregates, b: &Aggregates) -> Ordering {
    a.reliability
        .total_cmp(&b.reliability)
        .then(b.cost.cmp(&a.cost))
        .then(b.weight.cmp(&a.weight))
}

pub(crate) fn flatten(configs: &[CountVector]) -> Vec<u32> {
    configs.iter().flat_map(|c| c.0.iter().copied()).collect()
}
