//! Reduction rules: reliability lower-bound filtering, Pareto dominance over
//! (weight, cost, reliability), and suffix-minimum weight/cost bounds.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use thiserror::Error;

use crate::enumeration::{ScoredConfig, SubsystemTable};
use crate::model::{Aggregates, RapInstance};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PruneError {
    #[error("subsystem {subsystem} has no admissible configuration")]
    EmptyTable { subsystem: usize },
}

/// Anything carrying a weight, a cost and a reliability.
pub trait Scored {
    fn weight(&self) -> u64;
    fn cost(&self) -> u64;
    fn reliability(&self) -> f64;
}

impl Scored for Aggregates {
    fn weight(&self) -> u64 {
        self.weight
    }
    fn cost(&self) -> u64 {
        self.cost
    }
    fn reliability(&self) -> f64 {
        self.reliability
    }
}

impl Scored for ScoredConfig {
    fn weight(&self) -> u64 {
        self.aggregates.weight
    }
    fn cost(&self) -> u64 {
        self.aggregates.cost
    }
    fn reliability(&self) -> f64 {
        self.aggregates.reliability
    }
}

impl<T: Scored> Scored for &T {
    fn weight(&self) -> u64 {
        (*self).weight()
    }
    fn cost(&self) -> u64 {
        (*self).cost()
    }
    fn reliability(&self) -> f64 {
        (*self).reliability()
    }
}

/// Per-stage minima and suffix sums of the minima. Index `k - 1` holds stage `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuffixBounds {
    pub min_weight: Vec<u64>,
    pub min_cost: Vec<u64>,
    /// Sum of `min_weight` over the stages strictly after this one.
    pub suffix_weight: Vec<u64>,
    /// Sum of `min_cost` over the stages strictly after this one.
    pub suffix_cost: Vec<u64>,
}

impl SuffixBounds {
    pub fn len(&self) -> usize {
        self.min_weight.len()
    }

    pub fn is_empty(&self) -> bool {
        self.min_weight.is_empty()
    }
}

pub fn compute_suffix_bounds(tables: &[SubsystemTable]) -> Result<SuffixBounds, PruneError> {
    let n = tables.len();
    let mut min_weight = Vec::with_capacity(n);
    let mut min_cost = Vec::with_capacity(n);
    for (i, t) in tables.iter().enumerate() {
        let w = t.entries.iter().map(|e| e.aggregates.weight).min();
        let c = t.entries.iter().map(|e| e.aggregates.cost).min();
        match (w, c) {
            (Some(w), Some(c)) => {
                min_weight.push(w);
                min_cost.push(c);
            }
            _ => return Err(PruneError::EmptyTable { subsystem: i + 1 }),
        }
    }
    let mut suffix_weight = vec![0; n];
    let mut suffix_cost = vec![0; n];
    for k in (0..n.saturating_sub(1)).rev() {
        suffix_weight[k] = suffix_weight[k + 1] + min_weight[k + 1];
        suffix_cost[k] = suffix_cost[k + 1] + min_cost[k + 1];
    }
    Ok(SuffixBounds { min_weight, min_cost, suffix_weight, suffix_cost })
}

/// Drops entries whose reliability is strictly below `r_lb`.
pub fn filter_by_rlb(table: &SubsystemTable, r_lb: f64) -> SubsystemTable {
    SubsystemTable {
        subsystem: table.subsystem,
        entries: table.entries.iter().filter(|e| e.aggregates.reliability >= r_lb).cloned().collect(),
    }
}

fn sweep_order<T: Scored>(a: &T, b: &T) -> Ordering {
    a.weight()
        .cmp(&b.weight())
        .then(a.cost().cmp(&b.cost()))
        .then(b.reliability().total_cmp(&a.reliability()))
}

/// Indices (ascending) of the items that survive the dominance rule.
///
/// An item is dropped when another item is no heavier, no costlier and no
/// less reliable. Of several items with identical aggregates only the first
/// one survives.
pub fn pareto_indices<T: Scored>(items: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..items.len()).collect();
    // stable, so equal triples keep input order
    order.sort_by(|&a, &b| sweep_order(&items[a], &items[b]));

    // cost -> reliability of the nondominated points seen so far;
    // reliability strictly increases with cost
    let mut stair: BTreeMap<u64, f64> = BTreeMap::new();
    let mut keep = vec![false; items.len()];
    for idx in order {
        let (c, r) = (items[idx].cost(), items[idx].reliability());
        if let Some((_, &best)) = stair.range(..=c).next_back() {
            if best >= r {
                continue;
            }
        }
        let stale: Vec<u64> = stair.range(c..).take_while(|(_, &sr)| sr <= r).map(|(&sc, _)| sc).collect();
        for sc in stale {
            stair.remove(&sc);
        }
        stair.insert(c, r);
        keep[idx] = true;
    }
    keep.iter().enumerate().filter_map(|(i, &k)| k.then_some(i)).collect()
}

/// Survivors of the dominance rule, in input order.
pub fn dominance_filter<T: Scored + Clone>(items: &[T]) -> Vec<T> {
    pareto_indices(items).into_iter().map(|i| items[i].clone()).collect()
}

/// Quadratic reference implementation of [`pareto_indices`].
pub fn pareto_indices_reference<T: Scored>(items: &[T]) -> Vec<usize> {
    (0..items.len())
        .filter(|&i| {
            let x = &items[i];
            !items.iter().enumerate().any(|(j, y)| {
                if j == i {
                    return false;
                }
                let weakly = y.weight() <= x.weight() && y.cost() <= x.cost() && y.reliability() >= x.reliability();
                let equal =
                    y.weight() == x.weight() && y.cost() == x.cost() && y.reliability() == x.reliability();
                weakly && (!equal || j < i)
            })
        })
        .collect()
}

/// Applies [`dominance_filter`] to a subsystem table.
pub fn dominance_filter_table(table: &SubsystemTable) -> SubsystemTable {
    SubsystemTable { subsystem: table.subsystem, entries: dominance_filter(&table.entries) }
}

/// Prefix test with explicit limits: reject when the lightest (cheapest)
/// completion already breaks the weight (cost) ceiling, or when reliability
/// is below `r_lb`.
pub fn within_limits(
    agg: &Aggregates,
    suffix_weight: u64,
    suffix_cost: u64,
    weight_ceiling: u64,
    cost_ceiling: u64,
    r_lb: Option<f64>,
) -> bool {
    agg.weight + suffix_weight <= weight_ceiling
        && agg.cost + suffix_cost <= cost_ceiling
        && r_lb.is_none_or(|lb| agg.reliability >= lb)
}

/// Whether a prefix covering subsystems `1..=stage` may still be completed
/// into a feasible solution at or above the instance's reliability bound.
pub fn admit_partial(agg: &Aggregates, stage: usize, bounds: &SuffixBounds, instance: &RapInstance) -> bool {
    assert!(stage >= 1 && stage <= bounds.len(), "stage {stage} out of range");
    within_limits(
        agg,
        bounds.suffix_weight[stage - 1],
        bounds.suffix_cost[stage - 1],
        instance.weight_ceiling,
        instance.cost_ceiling,
        instance.reliability_lb,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn agg(w: u64, c: u64, r: f64) -> Aggregates {
        Aggregates { reliability: r, weight: w, cost: c }
    }

    #[test]
    fn weakly_better_item_removes_other() {
        let items = [agg(2, 2, 0.95), agg(3, 2, 0.94)];
        assert_eq!(pareto_indices(&items), vec![0]);
    }

    #[test]
    fn incomparable_items_both_kept() {
        let items = [agg(6, 2, 0.99), agg(7, 2, 0.993)];
        assert_eq!(pareto_indices(&items), vec![0, 1]);
    }

    #[test]
    fn equal_weight_cost_keeps_more_reliable() {
        let items = [agg(9, 3, 0.999), agg(9, 3, 0.9965)];
        assert_eq!(pareto_indices(&items), vec![0]);
        let items = [agg(9, 3, 0.9965), agg(9, 3, 0.999)];
        assert_eq!(pareto_indices(&items), vec![1]);
    }

    #[test]
    fn duplicates_keep_first() {
        let items = [agg(5, 5, 0.5), agg(1, 9, 0.1), agg(5, 5, 0.5)];
        assert_eq!(pareto_indices(&items), vec![0, 1]);
        assert_eq!(pareto_indices_reference(&items), vec![0, 1]);
    }

    #[test]
    fn staircase_replacement() {
        // later, cheaper-or-equal point with higher reliability knocks out stair entries
        let items = [agg(1, 5, 0.5), agg(1, 7, 0.6), agg(2, 4, 0.7), agg(3, 6, 0.65), agg(3, 8, 0.8)];
        assert_eq!(pareto_indices(&items), pareto_indices_reference(&items));
        assert_eq!(pareto_indices(&items), vec![0, 1, 2, 4]);
    }

    #[test]
    fn empty_input() {
        let items: [Aggregates; 0] = [];
        assert!(pareto_indices(&items).is_empty());
    }

    #[test]
    fn limits() {
        let a = agg(100, 10, 0.97);
        assert!(!within_limits(&a, 66, 0, 159, 130, None));
        assert!(within_limits(&a, 59, 0, 159, 130, None));
        assert!(within_limits(&a, 0, 0, 100, 10, None));
        assert!(!within_limits(&agg(1, 1, 0.95), 0, 0, 159, 130, Some(0.954565)));
        assert!(within_limits(&agg(1, 1, 0.954565), 0, 0, 159, 130, Some(0.954565)));
    }

    #[test]
    fn empty_table_is_reported() {
        let tables = vec![SubsystemTable { subsystem: 0, entries: vec![] }];
        assert_eq!(compute_suffix_bounds(&tables).unwrap_err(), PruneError::EmptyTable { subsystem: 1 });
    }
}
