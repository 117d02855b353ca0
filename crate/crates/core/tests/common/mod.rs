#![allow(dead_code)]

use rap_core::enumeration::{build_subsystem_table, SubsystemTable};
use rap_core::model::{Aggregates, RapInstance};

pub fn tables(instance: &RapInstance) -> Vec<SubsystemTable> {
    instance.subsystems.iter().enumerate().map(|(i, s)| build_subsystem_table(i, s)).collect()
}

/// Calls `f` with the entry indices and aggregates of every combination of
/// one entry per table.
pub fn for_each_combination(tables: &[SubsystemTable], mut f: impl FnMut(&[usize], Aggregates)) {
    if tables.iter().any(|t| t.is_empty()) {
        return;
    }
    let n = tables.len();
    let mut idx = vec![0usize; n];
    loop {
        let agg = idx.iter().enumerate().fold(Aggregates::IDENTITY, |a, (i, &j)| a.series(tables[i].entries[j].aggregates));
        f(&idx, agg);
        let mut k = n;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < tables[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

pub fn feasible(agg: &Aggregates, instance: &RapInstance) -> bool {
    agg.cost <= instance.cost_ceiling && agg.weight <= instance.weight_ceiling
}

pub fn combination_count(tables: &[SubsystemTable]) -> usize {
    tables.iter().map(|t| t.len()).product()
}
