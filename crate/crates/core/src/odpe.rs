//! Three-layer scheduling hierarchy derived from a Collatz-like IVT.
//!
//! The attractor node 0 is the controlling agent (SCA). Its one-step
//! preimages are the stations, and every other node is a sub-station that
//! reaches a station by iterating the rule.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::adds::Quotient;
use crate::analysis::{csv_err, finish_csv};
use crate::dynamics::{classify_collatz_like, ivt_orbit, OrbitLimits, ScanConfig};
use crate::error::{Error, Result};
use crate::ivt::{rule_count, Base, Ivt, IvtIndex, Value};

/// Largest node count a topology may hold.
pub const MAX_NODES: Value = 1 << 24;

/// Reference average hop counts for rules 7 and 8 at p=3, horizon 100.
pub const REFERENCE_HOPS: [(u64, f64); 2] = [(7, 6.46), (8, 4.73)];

/// Tolerance for matching a convention against [`REFERENCE_HOPS`].
pub const CALIBRATION_TOLERANCE: f64 = 0.05;

fn scan_for(base: Base, top: Value) -> Result<ScanConfig> {
    let default = base.pow(5).map(|v| v - 1).unwrap_or(Value::MAX);
    Ok(ScanConfig::new(default.max(top)))
}

/// Fails unless `rule` is Collatz-like with attractor representative 0 on
/// `[0, top]` (and at least the default horizon).
fn require_zero_attractor(rule: IvtIndex, top: Value) -> Result<Ivt> {
    let verdict = classify_collatz_like(rule, &scan_for(rule.base(), top)?)?;
    if !verdict.is_collatz_like {
        let detail = verdict
            .witness
            .map(|w| w.to_string())
            .unwrap_or_else(|| "no attractor".into());
        return Err(Error::NotCollatzLike {
            j: rule.j(),
            detail,
        });
    }
    let representative = verdict.attractor.map(|a| a.representative).unwrap_or(0);
    if representative != 0 {
        return Err(Error::AttractorNotZero {
            j: rule.j(),
            representative,
        });
    }
    Ok(Ivt::from_index(rule))
}

fn node_count(base: Base, digit_budget: u32) -> Result<Value> {
    if digit_budget == 0 {
        return Err(Error::InvalidParameter(
            "digit budget must be at least 1".into(),
        ));
    }
    let n = base.pow(digit_budget)?;
    if n > MAX_NODES {
        return Err(Error::InvalidParameter(format!(
            "p^{digit_budget} = {n} nodes exceeds the limit of {MAX_NODES}"
        )));
    }
    Ok(n)
}

/// Nonzero nodes below `p^n` that the rule sends to 0 in one step.
pub fn stations_of(rule: IvtIndex, digit_budget: u32) -> Result<Vec<Value>> {
    let n = node_count(rule.base(), digit_budget)?;
    let ivt = require_zero_attractor(rule, n - 1)?;
    stations_below(&ivt, n)
}

fn stations_below(ivt: &Ivt, n: Value) -> Result<Vec<Value>> {
    let mut out = Vec::new();
    for x in 1..n {
        if ivt.apply(x)? == 0 {
            out.push(x);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Topology {
    pub base: Base,
    pub rule: IvtIndex,
    pub digit_budget: u32,
    pub node_count: Value,
    pub sca: Value,
    pub stations: Vec<Value>,
    pub substations: Vec<Value>,
    /// Path from each sub-station to the first station it meets.
    pub routes: BTreeMap<Value, Vec<Value>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeKind {
    /// Station to SCA.
    Core,
    /// One rule application between two non-SCA nodes.
    Hop,
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeKind::Core => "core",
            EdgeKind::Hop => "hop",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub source: Value,
    pub target: Value,
    pub kind: EdgeKind,
}

impl Topology {
    pub fn route(&self, node: Value) -> Option<&[Value]> {
        self.routes.get(&node).map(Vec::as_slice)
    }

    /// Layer of a node: 0 for the SCA, 1 for stations, 2 for sub-stations.
    pub fn layer(&self, node: Value) -> Option<u8> {
        if node == self.sca {
            Some(0)
        } else if self.stations.binary_search(&node).is_ok() {
            Some(1)
        } else if self.substations.binary_search(&node).is_ok() {
            Some(2)
        } else {
            None
        }
    }

    /// Every station's link to the SCA and every sub-station's next hop,
    /// sorted by source.
    pub fn edges(&self) -> Vec<Edge> {
        let mut edges: Vec<Edge> = self
            .stations
            .iter()
            .map(|&s| Edge {
                source: s,
                target: self.sca,
                kind: EdgeKind::Core,
            })
            .chain(self.routes.iter().map(|(&u, path)| Edge {
                source: u,
                target: path[1],
                kind: EdgeKind::Hop,
            }))
            .collect();
        edges.sort_by_key(|e| e.source);
        edges
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Export<'a> {
            #[serde(flatten)]
            topology: &'a Topology,
            edges: Vec<Edge>,
        }
        serde_json::to_string_pretty(&Export {
            topology: self,
            edges: self.edges(),
        })
        .map_err(|e| Error::InvalidParameter(format!("json export failed: {e}")))
    }

    pub fn edges_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["source", "target", "kind"])
            .map_err(csv_err)?;
        for e in self.edges() {
            w.write_record([
                e.source.to_string(),
                e.target.to_string(),
                e.kind.to_string(),
            ])
            .map_err(csv_err)?;
        }
        finish_csv(w)
    }
}

pub fn build_topology(rule: IvtIndex, digit_budget: u32) -> Result<Topology> {
    let n = node_count(rule.base(), digit_budget)?;
    let ivt = require_zero_attractor(rule, n - 1)?;
    let stations = stations_below(&ivt, n)?;
    let station_set: BTreeSet<Value> = stations.iter().copied().collect();
    let substations: Vec<Value> = (1..n).filter(|x| !station_set.contains(x)).collect();
    let limits = OrbitLimits::default();

    let routes = substations
        .par_iter()
        .map(|&start| {
            let mut path = vec![start];
            let mut x = start;
            while !station_set.contains(&x) {
                if path.len() > limits.max_iter {
                    return Err(Error::NotConverged {
                        start,
                        status: "no station within the iteration cap".into(),
                    });
                }
                x = ivt.apply(x)?;
                path.push(x);
            }
            Ok((start, path))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;

    Ok(Topology {
        base: rule.base(),
        rule,
        digit_budget,
        node_count: n,
        sca: 0,
        stations,
        substations,
        routes,
    })
}

/// Where a hop count stops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HopTarget {
    /// First station (or the SCA, for node 0).
    Station,
    /// The SCA itself.
    Sca,
}

/// Which naturals are checked up to the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HopRange {
    OneTo,
    ZeroTo,
}

/// What the total is divided by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HopDenominator {
    /// Number of nodes checked.
    Count,
    /// The horizon itself.
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct HopConvention {
    pub target: HopTarget,
    pub range: HopRange,
    pub denominator: HopDenominator,
}

impl HopConvention {
    /// Hops to the SCA over `1..=horizon`, divided by the node count. This is
    /// the calibration's nearest match to [`REFERENCE_HOPS`].
    pub const PINNED: HopConvention = HopConvention {
        target: HopTarget::Sca,
        range: HopRange::OneTo,
        denominator: HopDenominator::Count,
    };

    /// All conventions, in tie-breaking order.
    pub fn all() -> Vec<HopConvention> {
        let mut out = Vec::new();
        for target in [HopTarget::Station, HopTarget::Sca] {
            for range in [HopRange::OneTo, HopRange::ZeroTo] {
                for denominator in [HopDenominator::Count, HopDenominator::Max] {
                    out.push(HopConvention {
                        target,
                        range,
                        denominator,
                    });
                }
            }
        }
        out
    }
}

impl Default for HopConvention {
    fn default() -> Self {
        HopConvention::PINNED
    }
}

impl fmt::Display for HopConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let target = match self.target {
            HopTarget::Station => "station",
            HopTarget::Sca => "sca",
        };
        let range = match self.range {
            HopRange::OneTo => "1..N",
            HopRange::ZeroTo => "0..N",
        };
        let denominator = match self.denominator {
            HopDenominator::Count => "count",
            HopDenominator::Max => "max",
        };
        write!(f, "{target}/{range}/{denominator}")
    }
}

impl FromStr for HopConvention {
    type Err = Error;

    /// Parses the `target/range/denominator` form printed by `Display`.
    fn from_str(s: &str) -> Result<Self> {
        HopConvention::all()
            .into_iter()
            .find(|c| c.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown hop convention {s:?}")))
    }
}

fn hops_with(ivt: &Ivt, node: Value, target: HopTarget, limits: OrbitLimits) -> Result<u64> {
    let mut x = node;
    let mut hops = 0u64;
    loop {
        if x == 0 {
            return Ok(hops);
        }
        let next = ivt.apply(x)?;
        if target == HopTarget::Station && next == 0 {
            return Ok(hops);
        }
        if hops as usize >= limits.max_iter {
            return Err(Error::NotConverged {
                start: node,
                status: "did not reach 0 within the iteration cap".into(),
            });
        }
        x = next;
        hops += 1;
    }
}

/// Rule applications from `node` until it first meets a station or the SCA.
/// Stations and the SCA have hop count 0.
pub fn hop_count(rule: IvtIndex, node: Value) -> Result<u64> {
    let ivt = require_zero_attractor(rule, node)?;
    hops_with(&ivt, node, HopTarget::Station, OrbitLimits::default())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HopStats {
    pub rule: IvtIndex,
    pub convention: HopConvention,
    pub horizon: Value,
    pub total_hops: u64,
    pub denominator: u64,
    pub average_hopping: Quotient,
    /// `average_hopping` as a float, for display.
    pub average: f64,
    pub per_node: BTreeMap<Value, u64>,
}

pub fn average_hopping(
    rule: IvtIndex,
    horizon: Value,
    convention: HopConvention,
) -> Result<HopStats> {
    let min = rule.base().pow(3)?;
    if horizon < min {
        return Err(Error::InvalidParameter(format!(
            "horizon {horizon} must be at least p^3 = {min}"
        )));
    }
    let ivt = require_zero_attractor(rule, horizon)?;
    let first = match convention.range {
        HopRange::OneTo => 1,
        HopRange::ZeroTo => 0,
    };
    let limits = OrbitLimits::default();
    let per_node = (first..=horizon)
        .into_par_iter()
        .map(|x| Ok((x, hops_with(&ivt, x, convention.target, limits)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    let total_hops: u64 = per_node.values().sum();
    let denominator = match convention.denominator {
        HopDenominator::Count => per_node.len() as u64,
        HopDenominator::Max => horizon,
    };
    let average_hopping = Quotient::new(total_hops, denominator);
    Ok(HopStats {
        rule,
        convention,
        horizon,
        total_hops,
        denominator,
        average_hopping,
        average: average_hopping.as_f64(),
        per_node,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationRow {
    pub convention: HopConvention,
    /// `(j, measured average, published value, |difference|)`.
    pub values: Vec<(u64, f64, f64, f64)>,
    pub max_residual: f64,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub horizon: Value,
    pub tolerance: f64,
    pub rows: Vec<CalibrationRow>,
    /// Best convention by largest residual; the first in [`HopConvention::all`]
    /// order wins ties.
    pub nearest: HopConvention,
    pub nearest_residual: f64,
    pub any_match: bool,
}

impl Calibration {
    pub fn warnings(&self) -> Vec<String> {
        if self.any_match {
            return Vec::new();
        }
        let row = self.rows.iter().find(|r| r.convention == self.nearest);
        let detail = row
            .map(|r| {
                r.values
                    .iter()
                    .map(|(j, got, want, _)| format!("j={j}: {got:.2} vs {want:.2}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            })
            .unwrap_or_default();
        vec![format!(
            "no hop convention reproduces the published averages within {}; nearest {} has residual {:.2} ({detail})",
            self.tolerance, self.nearest, self.nearest_residual
        )]
    }
}

/// Scores every convention against the published p=3 averages.
pub fn calibrate_hop_convention(horizon: Value) -> Result<Calibration> {
    let base = Base::new(3)?;
    let mut rows = Vec::new();
    for convention in HopConvention::all() {
        let mut values = Vec::new();
        for (j, published) in REFERENCE_HOPS {
            let stats = average_hopping(IvtIndex::unary(base, j)?, horizon, convention)?;
            values.push((
                j,
                stats.average,
                published,
                (stats.average - published).abs(),
            ));
        }
        let max_residual = values.iter().map(|v| v.3).fold(0.0, f64::max);
        rows.push(CalibrationRow {
            convention,
            values,
            max_residual,
            matches: max_residual <= CALIBRATION_TOLERANCE,
        });
    }
    let best = rows
        .iter()
        .fold(None::<&CalibrationRow>, |best, r| match best {
            // Residuals that agree to 1e-9 are ties.
            Some(b) if b.max_residual <= r.max_residual + 1e-9 => Some(b),
            _ => Some(r),
        })
        .expect("at least one convention");
    Ok(Calibration {
        horizon,
        tolerance: CALIBRATION_TOLERANCE,
        nearest: best.convention,
        nearest_residual: best.max_residual,
        any_match: rows.iter().any(|r| r.matches),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Escape {
    pub node: Value,
    /// First value on the node's orbit above the capacity.
    pub first_above: Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CapacityPolicy {
    pub rule: IvtIndex,
    pub capacity: Value,
    pub excluded: Vec<Escape>,
}

impl CapacityPolicy {
    pub fn excluded_nodes(&self) -> Vec<Value> {
        self.excluded.iter().map(|e| e.node).collect()
    }

    pub fn admits(&self, node: Value) -> bool {
        node <= self.capacity
            && self
                .excluded
                .binary_search_by_key(&node, |e| e.node)
                .is_err()
    }
}

/// Nodes in `[0, capacity]` whose forward orbit ever leaves `[0, capacity]`.
pub fn capacity_check(rule: IvtIndex, capacity: Value) -> Result<CapacityPolicy> {
    let ivt = Ivt::from_index(rule);
    let limits = OrbitLimits::default();
    let mut excluded = Vec::new();
    for node in 0..=capacity {
        let orbit = ivt_orbit(&ivt, node, limits)?;
        if !orbit.converged() {
            return Err(Error::NotConverged {
                start: node,
                status: orbit.status.to_string(),
            });
        }
        let escape = orbit.values().find(|&v| v > capacity);
        if let Some(v) = escape {
            excluded.push(Escape {
                node,
                first_above: v,
            });
        }
    }
    Ok(CapacityPolicy {
        rule,
        capacity,
        excluded,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestRule {
    pub base: Base,
    pub horizon: Value,
    pub convention: HopConvention,
    /// Collatz-like rules with attractor 0 where exactly one digit maps to 0.
    pub single_zero_digit: Vec<u64>,
    /// Of those, the rules whose zero digit is `p - 1`.
    pub top_digit_zero: Vec<u64>,
    /// `(j, average hopping)` over `top_digit_zero`.
    pub hops: Vec<(u64, Quotient)>,
    pub best: u64,
    /// `p^(p-1) - 1`.
    pub expected: u64,
}

/// Picks the scheduling rule: Collatz-like with attractor 0, a single digit
/// sent to 0 and that digit being `p - 1`, then least average hopping (ties to
/// the smaller index).
pub fn select_best_rule(base: Base, horizon: Value, convention: HopConvention) -> Result<BestRule> {
    let total = rule_count(base, 1)?;
    let top = (base.get() - 1) as u8;
    let single: Vec<u64> = (0..total)
        .into_par_iter()
        .map(|j| {
            let ivt = Ivt::new(base, j)?;
            if ivt.zero_preimages().len() != 1 {
                return Ok(None);
            }
            Ok(require_zero_attractor(ivt.index(), horizon)
                .is_ok()
                .then_some(j))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let top_digit_zero: Vec<u64> = single
        .iter()
        .copied()
        .filter(|&j| {
            Ivt::new(base, j)
                .map(|i| i.zero_preimages() == [top])
                .unwrap_or(false)
        })
        .collect();

    let hops = top_digit_zero
        .iter()
        .map(|&j| {
            let stats = average_hopping(IvtIndex::unary(base, j)?, horizon, convention)?;
            Ok((j, stats.average_hopping))
        })
        .collect::<Result<Vec<_>>>()?;

    let best = hops
        .iter()
        .min_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)))
        .map(|h| h.0)
        .ok_or_else(|| Error::InvalidParameter(format!("no candidate rule for p={base}")))?;

    Ok(BestRule {
        base,
        horizon,
        convention,
        single_zero_digit: single,
        top_digit_zero,
        hops,
        best,
        expected: base.pow(base.get() - 1)? - 1,
    })
}
