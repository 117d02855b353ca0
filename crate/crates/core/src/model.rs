//! Instances, count vectors and the reliability/weight/cost algebra.
//!
//! A solution assigns to every subsystem a *count vector*: how many copies of
//! each component option are placed in parallel. Subsystems are wired in
//! series, so system reliability is the product of subsystem reliabilities
//! while weight and cost simply add up.
//!
//! Reliabilities are `f64`; weights and costs are exact `u64`.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default bounds on the number of parallel components in a subsystem.
pub const DEFAULT_MIN_TOTAL: u32 = 1;
pub const DEFAULT_MAX_TOTAL: u32 = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("component reliability must lie in (0, 1], got {0}")]
    BadReliability(f64),
    #[error("subsystem {subsystem} has no component options")]
    NoOptions { subsystem: usize },
    #[error("subsystem {subsystem}: need 1 <= min_total <= max_total, got {min}..{max}")]
    BadTotals { subsystem: usize, min: u32, max: u32 },
    #[error("instance has no subsystems")]
    NoSubsystems,
    #[error("reliability lower bound must lie in [0, 1), got {0}")]
    BadLowerBound(f64),
    #[error("count vector has {got} entries but the subsystem has {expected} options")]
    LengthMismatch { expected: usize, got: usize },
    #[error("solution has {got} subsystem configurations but the instance has {expected}")]
    SubsystemCountMismatch { expected: usize, got: usize },
    #[error("invalid instance document: {0}")]
    Json(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodecError {
    #[error("expected {expected} groups, found {got}")]
    GroupCount { expected: usize, got: usize },
    #[error("group {group} has length {got}, expected {expected}")]
    GroupLength { group: usize, expected: usize, got: usize },
    #[error("non-digit character {ch:?} in group {group} at position {position}")]
    NotADigit { group: usize, position: usize, ch: char },
    #[error("count {count} in subsystem {subsystem} does not fit in one digit")]
    CountTooLarge { subsystem: usize, count: u32 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// One purchasable component type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentOption {
    #[serde(rename = "r")]
    pub reliability: f64,
    #[serde(rename = "c")]
    pub cost: u64,
    #[serde(rename = "w")]
    pub weight: u64,
}

impl ComponentOption {
    pub fn new(reliability: f64, cost: u64, weight: u64) -> Result<Self, ModelError> {
        if !(reliability > 0.0 && reliability <= 1.0) {
            return Err(ModelError::BadReliability(reliability));
        }
        Ok(Self { reliability, cost, weight })
    }
}

/// The options available to one subsystem together with its redundancy bounds.
/// Option order fixes the coordinate order of count vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsystemSpec {
    pub options: Vec<ComponentOption>,
    #[serde(default = "default_min_total")]
    pub min_total: u32,
    #[serde(default = "default_max_total")]
    pub max_total: u32,
}

fn default_min_total() -> u32 {
    DEFAULT_MIN_TOTAL
}

fn default_max_total() -> u32 {
    DEFAULT_MAX_TOTAL
}

impl SubsystemSpec {
    pub fn new(options: Vec<ComponentOption>, min_total: u32, max_total: u32) -> Result<Self, ModelError> {
        let spec = Self { options, min_total, max_total };
        spec.validate(0)?;
        Ok(spec)
    }

    fn validate(&self, subsystem: usize) -> Result<(), ModelError> {
        if self.options.is_empty() {
            return Err(ModelError::NoOptions { subsystem });
        }
        for opt in &self.options {
            ComponentOption::new(opt.reliability, opt.cost, opt.weight)?;
        }
        if self.min_total < 1 || self.min_total > self.max_total {
            return Err(ModelError::BadTotals { subsystem, min: self.min_total, max: self.max_total });
        }
        Ok(())
    }

    /// Number of component options (the arity of a count vector).
    pub fn arity(&self) -> usize {
        self.options.len()
    }
}

/// A full redundancy allocation instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RapInstance {
    pub subsystems: Vec<SubsystemSpec>,
    pub cost_ceiling: u64,
    pub weight_ceiling: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reliability_lb: Option<f64>,
}

impl RapInstance {
    pub fn new(
        subsystems: Vec<SubsystemSpec>,
        cost_ceiling: u64,
        weight_ceiling: u64,
        reliability_lb: Option<f64>,
    ) -> Result<Self, ModelError> {
        let inst = Self { subsystems, cost_ceiling, weight_ceiling, reliability_lb };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.subsystems.is_empty() {
            return Err(ModelError::NoSubsystems);
        }
        for (i, s) in self.subsystems.iter().enumerate() {
            s.validate(i + 1)?;
        }
        if let Some(lb) = self.reliability_lb {
            if !(0.0..1.0).contains(&lb) {
                return Err(ModelError::BadLowerBound(lb));
            }
        }
        Ok(())
    }

    /// Parses and validates an instance document.
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let inst: Self = serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn with_weight_ceiling(mut self, weight_ceiling: u64) -> Self {
        self.weight_ceiling = weight_ceiling;
        self
    }

    pub fn with_cost_ceiling(mut self, cost_ceiling: u64) -> Self {
        self.cost_ceiling = cost_ceiling;
        self
    }

    pub fn with_reliability_lb(mut self, reliability_lb: Option<f64>) -> Self {
        self.reliability_lb = reliability_lb;
        self
    }
}

/// Number of copies of each component option in one subsystem.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CountVector(pub Vec<u32>);

impl CountVector {
    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len])
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }
}

impl From<Vec<u32>> for CountVector {
    fn from(v: Vec<u32>) -> Self {
        Self(v)
    }
}

/// Reliability, weight and cost of a subsystem configuration or of a
/// series combination of configurations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub reliability: f64,
    pub weight: u64,
    pub cost: u64,
}

impl Aggregates {
    /// Neutral element of [`Aggregates::series`]: an empty series system.
    pub const IDENTITY: Aggregates = Aggregates { reliability: 1.0, weight: 0, cost: 0 };

    /// Puts `other` in series after `self`.
    pub fn series(self, other: Aggregates) -> Aggregates {
        Aggregates {
            reliability: self.reliability * other.reliability,
            weight: self.weight + other.weight,
            cost: self.cost + other.cost,
        }
    }
}

/// A complete allocation: one count vector per subsystem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionVector {
    pub configs: Vec<CountVector>,
    pub aggregates: Aggregates,
}

impl SolutionVector {
    pub fn new(configs: Vec<CountVector>, instance: &RapInstance) -> Result<Self, ModelError> {
        let aggregates = system_aggregates(&configs, instance)?;
        Ok(Self { configs, aggregates })
    }
}

/// Aggregates of a single subsystem: `R = 1 - prod_j (1 - r_j)^x_j`,
/// `W = sum_j x_j w_j`, `C = sum_j x_j c_j`.
pub fn subsystem_aggregates(config: &CountVector, spec: &SubsystemSpec) -> Result<Aggregates, ModelError> {
    if config.len() != spec.options.len() {
        return Err(ModelError::LengthMismatch { expected: spec.options.len(), got: config.len() });
    }
    let mut unreliability = 1.0f64;
    let mut weight = 0u64;
    let mut cost = 0u64;
    for (&x, opt) in config.0.iter().zip(&spec.options) {
        let q = 1.0 - opt.reliability;
        // repeated multiplication, not powi, so results do not depend on libm
        for _ in 0..x {
            unreliability *= q;
        }
        weight += u64::from(x) * opt.weight;
        cost += u64::from(x) * opt.cost;
    }
    Ok(Aggregates { reliability: 1.0 - unreliability, weight, cost })
}

/// Series composition of the subsystem aggregates, folded in subsystem order
/// starting from [`Aggregates::IDENTITY`].
pub fn system_aggregates(configs: &[CountVector], instance: &RapInstance) -> Result<Aggregates, ModelError> {
    if configs.len() != instance.subsystems.len() {
        return Err(ModelError::SubsystemCountMismatch { expected: instance.subsystems.len(), got: configs.len() });
    }
    configs
        .iter()
        .zip(&instance.subsystems)
        .try_fold(Aggregates::IDENTITY, |acc, (x, spec)| Ok(acc.series(subsystem_aggregates(x, spec)?)))
}

/// A violated constraint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "constraint", rename_all = "snake_case")]
pub enum Violation {
    Cost { cost: u64, ceiling: u64 },
    Weight { weight: u64, ceiling: u64 },
    MinTotal { subsystem: usize, total: u32, min_total: u32 },
    MaxTotal { subsystem: usize, total: u32, max_total: u32 },
}

impl Violation {
    pub fn name(&self) -> &'static str {
        match self {
            Violation::Cost { .. } => "cost",
            Violation::Weight { .. } => "weight",
            Violation::MinTotal { .. } => "min_total",
            Violation::MaxTotal { .. } => "max_total",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Cost { cost, ceiling } => write!(f, "cost {cost} exceeds ceiling {ceiling}"),
            Violation::Weight { weight, ceiling } => write!(f, "weight {weight} exceeds ceiling {ceiling}"),
            Violation::MinTotal { subsystem, total, min_total } => {
                write!(f, "subsystem {subsystem} has {total} components, fewer than {min_total}")
            }
            Violation::MaxTotal { subsystem, total, max_total } => {
                write!(f, "subsystem {subsystem} has {total} components, more than {max_total}")
            }
        }
    }
}

/// Checks the ceilings and the per-subsystem component-count bounds.
/// Subsystem numbers in violations are 1-based.
pub fn feasibility_violations(solution: &SolutionVector, instance: &RapInstance) -> Vec<Violation> {
    let mut out = Vec::new();
    let agg = solution.aggregates;
    if agg.cost > instance.cost_ceiling {
        out.push(Violation::Cost { cost: agg.cost, ceiling: instance.cost_ceiling });
    }
    if agg.weight > instance.weight_ceiling {
        out.push(Violation::Weight { weight: agg.weight, ceiling: instance.weight_ceiling });
    }
    for (i, (x, spec)) in solution.configs.iter().zip(&instance.subsystems).enumerate() {
        let total = x.total();
        if total < spec.min_total {
            out.push(Violation::MinTotal { subsystem: i + 1, total, min_total: spec.min_total });
        }
        if total > spec.max_total {
            out.push(Violation::MaxTotal { subsystem: i + 1, total, max_total: spec.max_total });
        }
    }
    out
}

pub fn is_feasible(solution: &SolutionVector, instance: &RapInstance) -> (bool, Vec<Violation>) {
    let v = feasibility_violations(solution, instance);
    (v.is_empty(), v)
}

/// Parses the digit-group notation, e.g. `"0030 200 0002"`: one group per
/// subsystem, one digit per component option. Groups may be separated by
/// whitespace and/or commas; surrounding parentheses are ignored.
pub fn parse_solution_string(text: &str, instance: &RapInstance) -> Result<SolutionVector, CodecError> {
    let trimmed = text.trim().trim_start_matches('(').trim_end_matches(')');
    let groups: Vec<&str> = trimmed
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|g| !g.is_empty())
        .collect();
    if groups.len() != instance.subsystems.len() {
        return Err(CodecError::GroupCount { expected: instance.subsystems.len(), got: groups.len() });
    }
    let mut configs = Vec::with_capacity(groups.len());
    for (gi, (group, spec)) in groups.iter().zip(&instance.subsystems).enumerate() {
        let chars: Vec<char> = group.chars().collect();
        if chars.len() != spec.arity() {
            return Err(CodecError::GroupLength { group: gi + 1, expected: spec.arity(), got: chars.len() });
        }
        let counts = chars
            .iter()
            .enumerate()
            .map(|(pos, &ch)| {
                ch.to_digit(10).ok_or(CodecError::NotADigit { group: gi + 1, position: pos + 1, ch })
            })
            .collect::<Result<Vec<u32>, _>>()?;
        configs.push(CountVector(counts));
    }
    Ok(SolutionVector::new(configs, instance)?)
}

/// Renders configurations as space-separated digit groups.
pub fn format_configs(configs: &[CountVector]) -> Result<String, CodecError> {
    let mut groups = Vec::with_capacity(configs.len());
    for (i, x) in configs.iter().enumerate() {
        let mut g = String::with_capacity(x.len());
        for &c in &x.0 {
            let d = char::from_digit(c, 10).ok_or(CodecError::CountTooLarge { subsystem: i + 1, count: c })?;
            g.push(d);
        }
        groups.push(g);
    }
    Ok(groups.join(" "))
}

pub fn format_solution_string(solution: &SolutionVector) -> Result<String, CodecError> {
    format_configs(&solution.configs)
}

/// An exact solution-space size with a short scientific rendering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceSize(pub BigUint);

impl SpaceSize {
    /// Six significant digits, `E+` exponent, e.g. `1.20893E+72`.
    pub fn scientific(&self) -> String {
        scientific(&self.0, 6)
    }
}

impl fmt::Display for SpaceSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Renders `value` with `sig` significant digits, rounding half up.
pub fn scientific(value: &BigUint, sig: usize) -> String {
    assert!(sig >= 1);
    let digits = value.to_str_radix(10);
    let mut exp = digits.len() - 1;
    let mut mantissa: Vec<u8> = digits.bytes().map(|b| b - b'0').collect();
    if mantissa.len() > sig {
        let round_up = mantissa[sig] >= 5;
        mantissa.truncate(sig);
        if round_up {
            let mut i = sig;
            loop {
                if i == 0 {
                    mantissa.insert(0, 1);
                    mantissa.truncate(sig);
                    exp += 1;
                    break;
                }
                i -= 1;
                if mantissa[i] == 9 {
                    mantissa[i] = 0;
                } else {
                    mantissa[i] += 1;
                    break;
                }
            }
        }
    }
    mantissa.resize(sig, 0);
    let mut s = String::new();
    s.push((b'0' + mantissa[0]) as char);
    if sig > 1 {
        s.push('.');
        s.extend(mantissa[1..].iter().map(|&d| (b'0' + d) as char));
    }
    format!("{s}E+{exp:02}")
}

/// Size of the space where every one of a subsystem's `max_total` positions
/// holds either nothing or one of its `m_i` component types:
/// `prod_i (m_i + 1)^max_total`.
pub fn space_size_component_based(instance: &RapInstance) -> SpaceSize {
    let mut total = BigUint::one();
    for s in &instance.subsystems {
        total *= BigUint::from(s.arity() as u64 + 1).pow(s.max_total);
    }
    SpaceSize(total)
}

/// Number of count vectors of a subsystem with `min_total <= sum <= max_total`:
/// `sum_k C(k + m - 1, m - 1)`.
pub fn subsystem_config_count(spec: &SubsystemSpec) -> BigUint {
    let m = spec.arity() as u64;
    (spec.min_total..=spec.max_total)
        .map(|k| binomial(u64::from(k) + m - 1, m - 1))
        .fold(BigUint::zero(), |a, b| a + b)
}

/// Size of the count-vector space: the product of [`subsystem_config_count`].
pub fn space_size_number_based(instance: &RapInstance) -> SpaceSize {
    SpaceSize(instance.subsystems.iter().map(subsystem_config_count).fold(BigUint::one(), |a, b| a * b))
}

pub(crate) fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}
