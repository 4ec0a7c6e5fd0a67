//! Orbits, terminal cycles and Collatz-like classification.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ivt::{rule_count, Base, Ivt, IvtIndex, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrbitStatus {
    ConvergedToCycle,
    Diverged,
    IterationCapHit,
}

impl fmt::Display for OrbitStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OrbitStatus::ConvergedToCycle => "converged-to-cycle",
            OrbitStatus::Diverged => "diverged",
            OrbitStatus::IterationCapHit => "iteration-cap-hit",
        })
    }
}

/// Bounds applied while following a single orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OrbitLimits {
    /// Maximum number of step applications.
    pub max_iter: usize,
    /// Any value above this counts as divergence.
    pub value_cap: Value,
}

impl Default for OrbitLimits {
    fn default() -> Self {
        OrbitLimits {
            max_iter: 10_000,
            value_cap: 1_000_000_000,
        }
    }
}

/// A trajectory split into its transient part and terminal cycle.
///
/// For a diverged or capped orbit `cycle` is empty and `transient` holds every
/// representable value visited.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Orbit {
    pub start: Value,
    pub transient: Vec<Value>,
    pub cycle: Vec<Value>,
    pub status: OrbitStatus,
}

impl Orbit {
    pub fn converged(&self) -> bool {
        self.status == OrbitStatus::ConvergedToCycle
    }

    /// The full trajectory, transient then cycle.
    pub fn values(&self) -> impl Iterator<Item = Value> + '_ {
        self.transient.iter().chain(self.cycle.iter()).copied()
    }
}

/// Follows `step` from `start` until the first repeated value.
///
/// A step error (overflow) or a value above `limits.value_cap` ends the orbit
/// as `Diverged`.
pub fn iterate_orbit<F>(mut step: F, start: Value, limits: OrbitLimits) -> Result<Orbit>
where
    F: FnMut(Value) -> Result<Value>,
{
    if limits.max_iter == 0 {
        return Err(Error::InvalidParameter(
            "max_iter must be at least 1".into(),
        ));
    }
    let mut seen: HashMap<Value, usize> = HashMap::new();
    let mut trajectory: Vec<Value> = Vec::new();
    let mut x = start;
    let diverged = |trajectory: Vec<Value>| Orbit {
        start,
        transient: trajectory,
        cycle: Vec::new(),
        status: OrbitStatus::Diverged,
    };
    loop {
        if let Some(&at) = seen.get(&x) {
            let cycle = trajectory.split_off(at);
            return Ok(Orbit {
                start,
                transient: trajectory,
                cycle,
                status: OrbitStatus::ConvergedToCycle,
            });
        }
        if x > limits.value_cap {
            trajectory.push(x);
            return Ok(diverged(trajectory));
        }
        if trajectory.len() > limits.max_iter {
            return Ok(Orbit {
                start,
                transient: trajectory,
                cycle: Vec::new(),
                status: OrbitStatus::IterationCapHit,
            });
        }
        seen.insert(x, trajectory.len());
        trajectory.push(x);
        x = match step(x) {
            Ok(next) => next,
            Err(Error::Overflow) => return Ok(diverged(trajectory)),
            Err(e) => return Err(e),
        };
    }
}

/// Orbit of a pure IVT.
pub fn ivt_orbit(rule: &Ivt, start: Value, limits: OrbitLimits) -> Result<Orbit> {
    iterate_orbit(|x| rule.apply(x), start, limits)
}

/// A terminal cycle identified by its minimum element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AttractorInfo {
    pub representative: Value,
    pub cycle_length: usize,
    /// The cycle rotated so that it starts at `representative`.
    pub cycle: Vec<Value>,
    /// Inclusive range of initial values known to reach this cycle.
    pub basin_checked: (Value, Value),
}

impl fmt::Display for AttractorInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.representative)?;
        if self.cycle_length > 1 {
            let c: Vec<String> = self.cycle.iter().map(Value::to_string).collect();
            write!(f, " [cycle {}]", c.join(" "))?;
        }
        Ok(())
    }
}

pub fn attractor_of(orbit: &Orbit) -> Result<AttractorInfo> {
    if !orbit.converged() {
        return Err(Error::NotConverged {
            start: orbit.start,
            status: orbit.status.to_string(),
        });
    }
    let (at, &representative) = orbit
        .cycle
        .iter()
        .enumerate()
        .min_by_key(|&(_, v)| *v)
        .expect("converged orbit has a non-empty cycle");
    let mut cycle = orbit.cycle.clone();
    cycle.rotate_left(at);
    Ok(AttractorInfo {
        representative,
        cycle_length: cycle.len(),
        cycle,
        basin_checked: (orbit.start, orbit.start),
    })
}

/// Whether a terminal cycle of any length qualifies, or only a fixed point.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttractorMode {
    #[default]
    Cycle,
    FixedPoint,
}

/// Horizon and bounds for a Collatz-like scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ScanConfig {
    /// Every start in `0..=scan_limit` is checked.
    pub scan_limit: Value,
    pub limits: OrbitLimits,
    pub mode: AttractorMode,
}

impl ScanConfig {
    pub fn new(scan_limit: Value) -> Self {
        ScanConfig {
            scan_limit,
            limits: OrbitLimits::default(),
            mode: AttractorMode::Cycle,
        }
    }

    pub fn with_limits(mut self, limits: OrbitLimits) -> Self {
        self.limits = limits;
        self
    }

    pub fn strict(mut self) -> Self {
        self.mode = AttractorMode::FixedPoint;
        self
    }
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig::new(242)
    }
}

/// Why a map failed to be Collatz-like.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    SecondAttractor {
        start: Value,
        representative: Value,
        first_representative: Value,
    },
    Diverged {
        start: Value,
    },
    IterationCapHit {
        start: Value,
    },
    CycleNotFixed {
        start: Value,
        cycle_length: usize,
    },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::SecondAttractor {
                start,
                representative,
                first_representative,
            } => write!(
                f,
                "start {start} reaches attractor {representative}, not {first_representative}"
            ),
            Witness::Diverged { start } => write!(f, "orbit from {start} diverges"),
            Witness::IterationCapHit { start } => {
                write!(f, "orbit from {start} hit the iteration cap")
            }
            Witness::CycleNotFixed {
                start,
                cycle_length,
            } => write!(
                f,
                "start {start} ends on a {cycle_length}-cycle, not a fixed point"
            ),
        }
    }
}

/// Outcome of scanning one map over a range of starts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub attractor: Option<AttractorInfo>,
    pub witness: Option<Witness>,
}

impl Classification {
    pub fn is_collatz_like(&self) -> bool {
        self.witness.is_none() && self.attractor.is_some()
    }
}

/// Checks whether every start in `0..=scan_limit` reaches one and the same
/// terminal cycle under `step`.
pub fn classify_map<F>(step: F, config: &ScanConfig) -> Result<Classification>
where
    F: Fn(Value) -> Result<Value>,
{
    let mut found: Option<AttractorInfo> = None;
    for start in 0..=config.scan_limit {
        let orbit = iterate_orbit(&step, start, config.limits)?;
        let failure = match orbit.status {
            OrbitStatus::Diverged => Some(Witness::Diverged { start }),
            OrbitStatus::IterationCapHit => Some(Witness::IterationCapHit { start }),
            OrbitStatus::ConvergedToCycle => None,
        };
        if let Some(witness) = failure {
            return Ok(Classification {
                attractor: None,
                witness: Some(witness),
            });
        }
        let info = attractor_of(&orbit)?;
        if config.mode == AttractorMode::FixedPoint && info.cycle_length != 1 {
            return Ok(Classification {
                attractor: None,
                witness: Some(Witness::CycleNotFixed {
                    start,
                    cycle_length: info.cycle_length,
                }),
            });
        }
        match &mut found {
            None => found = Some(info),
            Some(first) if first.representative == info.representative => {
                first.basin_checked.1 = start;
            }
            Some(first) => {
                return Ok(Classification {
                    attractor: None,
                    witness: Some(Witness::SecondAttractor {
                        start,
                        representative: info.representative,
                        first_representative: first.representative,
                    }),
                });
            }
        }
    }
    if let Some(info) = &mut found {
        info.basin_checked = (0, config.scan_limit);
    }
    Ok(Classification {
        attractor: found,
        witness: None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CollatzVerdict {
    pub rule: IvtIndex,
    pub is_collatz_like: bool,
    pub attractor: Option<AttractorInfo>,
    pub witness: Option<Witness>,
    pub scan_limit: Value,
}

fn check_horizon(base: Base, scan_limit: Value) -> Result<()> {
    let min = base.pow(2)?;
    if scan_limit < min {
        return Err(Error::InvalidParameter(format!(
            "scan_limit {scan_limit} must be at least p^2 = {min}"
        )));
    }
    Ok(())
}

/// Collatz-like verdict for the pure iteration of one IVT.
pub fn classify_collatz_like(rule: IvtIndex, config: &ScanConfig) -> Result<CollatzVerdict> {
    check_horizon(rule.base(), config.scan_limit)?;
    let ivt = Ivt::from_index(rule);
    let c = classify_map(|x| ivt.apply(x), config)?;
    Ok(CollatzVerdict {
        rule,
        is_collatz_like: c.is_collatz_like(),
        attractor: c.attractor,
        witness: c.witness,
        scan_limit: config.scan_limit,
    })
}

/// All Collatz-like rules of `T^{p,1}` at the given horizon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CollatzCensus {
    pub base: Base,
    pub scan_limit: Value,
    pub rules: Vec<u64>,
    pub count: u64,
    /// `p^(p-1)`, the expected count.
    pub claimed_count: u64,
    /// `p^(p-1) - 1`, an alternative count that excludes one rule.
    pub claimed_count_nontrivial: u64,
}

impl CollatzCensus {
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.count != self.claimed_count {
            out.push(format!(
                "measured {} Collatz-like rules for p={}, claim p^(p-1) = {}",
                self.count, self.base, self.claimed_count
            ));
        }
        if self.count != self.claimed_count_nontrivial {
            out.push(format!(
                "claim p^(p-1) - 1 = {} is inconsistent with the measured count {} for p={}",
                self.claimed_count_nontrivial, self.count, self.base
            ));
        }
        out
    }
}

pub fn enumerate_collatz_like(base: Base, config: &ScanConfig) -> Result<CollatzCensus> {
    check_horizon(base, config.scan_limit)?;
    let total = rule_count(base, 1)?;
    let verdicts: Vec<Result<Option<u64>>> = (0..total)
        .into_par_iter()
        .map(|j| {
            let v = classify_collatz_like(IvtIndex::unary(base, j)?, config)?;
            Ok(v.is_collatz_like.then_some(j))
        })
        .collect();
    let mut rules = Vec::new();
    for v in verdicts {
        if let Some(j) = v? {
            rules.push(j);
        }
    }
    let claimed = base.pow(base.get() - 1)?;
    Ok(CollatzCensus {
        base,
        scan_limit: config.scan_limit,
        count: rules.len() as u64,
        rules,
        claimed_count: claimed,
        claimed_count_nontrivial: claimed - 1,
    })
}
