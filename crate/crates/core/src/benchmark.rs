//! The 14-subsystem Fyffe instance, its 33 weight-ceiling variants, the
//! published optima, and a regression runner.
//!
//! Variant `id` has weight ceiling `159 + (id - 1)` and cost ceiling 130.
//! Data lives in `fyffe/instance.json` and `fyffe/expected.json` and is
//! embedded at compile time.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{parse_solution_string, Aggregates, RapInstance};
use crate::solver::{reconstruct, solve, SolveReport, SolverOptions, StageStats};

pub const FYFFE_INSTANCE_JSON: &str = include_str!("../fyffe/instance.json");
pub const FYFFE_EXPECTED_JSON: &str = include_str!("../fyffe/expected.json");

pub const FYFFE_VARIANTS: u32 = 33;
pub const FYFFE_BASE_WEIGHT_CEILING: u64 = 159;
pub const FYFFE_COST_CEILING: u64 = 130;

/// Absolute tolerance when comparing reliabilities with the published values.
pub const RELIABILITY_TOLERANCE: f64 = 1e-11;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BenchmarkError {
    #[error("variant id {0} is outside 1..=33")]
    BadId(i64),
}

/// Published data for one variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FyffeVariant {
    pub id: u32,
    pub weight_ceiling: u64,
    pub cost_ceiling: u64,
    /// Lower bound from a heuristic solution, digits as published.
    pub r_lb: f64,
    pub expected_reliability: f64,
    pub expected_weight: u64,
    pub expected_cost: u64,
    pub expected_solution: String,
}

#[derive(Deserialize)]
struct ExpectedFile {
    variants: Vec<FyffeVariant>,
}

/// The base instance (weight ceiling 159, no reliability bound).
pub fn fyffe_base_instance() -> RapInstance {
    RapInstance::from_json(FYFFE_INSTANCE_JSON).expect("embedded instance is valid")
}

pub fn fyffe_variants() -> Vec<FyffeVariant> {
    let file: ExpectedFile = serde_json::from_str(FYFFE_EXPECTED_JSON).expect("embedded expectations parse");
    file.variants
}

fn check_id(id: i64) -> Result<u32, BenchmarkError> {
    if (1..=i64::from(FYFFE_VARIANTS)).contains(&id) {
        Ok(id as u32)
    } else {
        Err(BenchmarkError::BadId(id))
    }
}

pub fn fyffe_variant(id: i64) -> Result<FyffeVariant, BenchmarkError> {
    let id = check_id(id)?;
    Ok(fyffe_variants().into_iter().find(|v| v.id == id).expect("all 33 variants embedded"))
}

/// Variant `id` with its ceilings and reliability lower bound set.
pub fn fyffe_instance(id: i64) -> Result<RapInstance, BenchmarkError> {
    let v = fyffe_variant(id)?;
    Ok(fyffe_base_instance()
        .with_weight_ceiling(FYFFE_BASE_WEIGHT_CEILING + u64::from(v.id - 1))
        .with_cost_ceiling(FYFFE_COST_CEILING)
        .with_reliability_lb(Some(v.r_lb)))
}

/// Recomputed aggregates of a variant's published solution string.
pub fn evaluate_expected_solution(variant: &FyffeVariant) -> Aggregates {
    let inst = fyffe_base_instance();
    parse_solution_string(&variant.expected_solution, &inst).expect("embedded solution parses").aggregates
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Found {
    pub reliability: f64,
    pub weight: u64,
    pub cost: u64,
    pub solution: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionRow {
    pub id: u32,
    pub weight_ceiling: u64,
    pub expected_reliability: f64,
    pub expected_weight: u64,
    pub expected_cost: u64,
    /// Solver result or the error message.
    pub found: Result<Found, String>,
    pub reliability_ok: bool,
    pub weight_ok: bool,
    pub cost_ok: bool,
    pub wall_time: f64,
    #[serde(skip)]
    pub stage_stats: Vec<StageStats>,
}

impl RegressionRow {
    pub fn pass(&self) -> bool {
        self.found.is_ok() && self.reliability_ok && self.weight_ok && self.cost_ok
    }

    pub fn reliability_error(&self) -> Option<f64> {
        self.found.as_ref().ok().map(|f| (f.reliability - self.expected_reliability).abs())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionReport {
    pub rows: Vec<RegressionRow>,
}

impl RegressionReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(RegressionRow::pass)
    }

    pub fn passed(&self) -> usize {
        self.rows.iter().filter(|r| r.pass()).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "id,weight_ceiling,reliability,weight,cost,expected_reliability,expected_weight,expected_cost,wall_time,pass,solution\n",
        );
        for r in &self.rows {
            match &r.found {
                Ok(f) => out.push_str(&format!(
                    "{},{},{:.11},{},{},{:.11},{},{},{:.3},{},{}\n",
                    r.id,
                    r.weight_ceiling,
                    f.reliability,
                    f.weight,
                    f.cost,
                    r.expected_reliability,
                    r.expected_weight,
                    r.expected_cost,
                    r.wall_time,
                    r.pass(),
                    f.solution
                )),
                Err(_) => out.push_str(&format!(
                    "{},{},,,,{:.11},{},{},{:.3},false,\n",
                    r.id, r.weight_ceiling, r.expected_reliability, r.expected_weight, r.expected_cost, r.wall_time
                )),
            }
        }
        out
    }
}

fn run_one(id: u32, options: &SolverOptions) -> RegressionRow {
    let variant = fyffe_variant(i64::from(id)).expect("checked id");
    let instance = fyffe_instance(i64::from(id)).expect("checked id");
    let result: Result<(SolveReport, Option<String>), String> = solve(&instance, options)
        .map_err(|e| e.to_string())
        .map(|report| {
            let s = reconstruct(&report).ok();
            (report, s)
        });
    let (found, wall_time, stage_stats) = match result {
        Ok((report, solution)) => match &report.optimum {
            Some(opt) => (
                Ok(Found {
                    reliability: opt.aggregates.reliability,
                    weight: opt.aggregates.weight,
                    cost: opt.aggregates.cost,
                    solution: solution.unwrap_or_default(),
                }),
                report.wall_time,
                report.stage_stats.clone(),
            ),
            None => (Err(format!("no solution ({:?})", report.outcome)), report.wall_time, report.stage_stats.clone()),
        },
        Err(e) => (Err(e), 0.0, Vec::new()),
    };
    let (reliability_ok, weight_ok, cost_ok) = match &found {
        Ok(f) => (
            (f.reliability - variant.expected_reliability).abs() <= RELIABILITY_TOLERANCE,
            f.weight == variant.expected_weight,
            f.cost == variant.expected_cost,
        ),
        Err(_) => (false, false, false),
    };
    RegressionRow {
        id,
        weight_ceiling: instance.weight_ceiling,
        expected_reliability: variant.expected_reliability,
        expected_weight: variant.expected_weight,
        expected_cost: variant.expected_cost,
        found,
        reliability_ok,
        weight_ok,
        cost_ok,
        wall_time,
        stage_stats,
    }
}

/// Solves the selected variants on up to `jobs` threads. Rows come back in
/// the order of `ids`; a failing variant does not stop the others.
pub fn run_regression(ids: &[i64], options: &SolverOptions, jobs: usize) -> Result<RegressionReport, BenchmarkError> {
    let ids: Vec<u32> = ids.iter().map(|&id| check_id(id)).collect::<Result<_, _>>()?;
    let jobs = jobs.clamp(1, ids.len().max(1));
    let next = AtomicUsize::new(0);
    let rows: Mutex<Vec<Option<RegressionRow>>> = Mutex::new(vec![None; ids.len()]);
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= ids.len() {
                    break;
                }
                let row = run_one(ids[i], options);
                rows.lock().expect("no poisoned workers")[i] = Some(row);
            });
        }
    });
    let rows = rows.into_inner().expect("no poisoned workers").into_iter().map(|r| r.expect("every id ran")).collect();
    Ok(RegressionReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceilings_follow_id() {
        let one = fyffe_instance(1).unwrap();
        assert_eq!((one.weight_ceiling, one.cost_ceiling), (159, 130));
        assert_eq!(fyffe_instance(33).unwrap().weight_ceiling, 191);
        assert_eq!(fyffe_instance(0).unwrap_err(), BenchmarkError::BadId(0));
        assert_eq!(fyffe_instance(34).unwrap_err(), BenchmarkError::BadId(34));
    }

    #[test]
    fn instance_shape() {
        let inst = fyffe_base_instance();
        assert_eq!(inst.len(), 14);
        let three: Vec<usize> = (0..14).filter(|&i| inst.subsystems[i].arity() == 3).map(|i| i + 1).collect();
        assert_eq!(three, vec![2, 4, 5, 7, 8, 10, 11, 13]);
        let s5 = &inst.subsystems[4];
        let r: Vec<f64> = s5.options.iter().map(|o| o.reliability).collect();
        let c: Vec<u64> = s5.options.iter().map(|o| o.cost).collect();
        let w: Vec<u64> = s5.options.iter().map(|o| o.weight).collect();
        assert_eq!((r, c, w), (vec![0.94, 0.93, 0.95], vec![2, 2, 3], vec![4, 3, 5]));
        assert!(inst.subsystems.iter().all(|s| s.min_total == 1 && s.max_total == 8));
    }

    #[test]
    fn variant_records() {
        let vs = fyffe_variants();
        assert_eq!(vs.len(), 33);
        for (i, v) in vs.iter().enumerate() {
            assert_eq!(v.id as usize, i + 1);
            assert_eq!(v.weight_ceiling, 159 + i as u64);
            assert_eq!(v.cost_ceiling, 130);
            assert!(v.expected_weight <= v.weight_ceiling && v.expected_cost <= v.cost_ceiling);
            assert!(v.expected_reliability >= v.r_lb);
        }
    }

    #[test]
    fn empty_regression() {
        let report = run_regression(&[], &SolverOptions::default(), 4).unwrap();
        assert!(report.rows.is_empty());
        assert!(run_regression(&[0], &SolverOptions::default(), 1).is_err());
    }
}
