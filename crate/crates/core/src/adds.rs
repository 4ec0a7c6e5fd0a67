//! Affine discrete dynamical systems built on a unary IVT.
//!
//! Type I iterates `Y <- A*IVT(Y) + B`, type II iterates `y <- IVT(a*y + b)`.
//! The two are conjugate through `Y = a*y + b`: one type-I step from `Y`
//! lands on `a*IVT(Y) + b`, after which the type-I orbit is the affine image
//! of the type-II orbit started at `IVT(Y)`.
//!
//! Stability is measured empirically by pairwise difference quotients
//! `|step(x) - step(y)| / |x - y|` of the full step map.

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::dynamics::Orbit;
use crate::dynamics::{
    attractor_of, classify_map, iterate_orbit, AttractorInfo, Classification, OrbitLimits,
    ScanConfig, Witness,
};
use crate::error::{Error, Result};
use crate::ivt::{rule_count, Base, Ivt, IvtIndex, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Variant {
    #[serde(rename = "I")]
    TypeI,
    #[serde(rename = "II")]
    TypeII,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::TypeI => "I",
            Variant::TypeII => "II",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "I" | "1" | "TYPE_I" | "TYPE-I" => Ok(Variant::TypeI),
            "II" | "2" | "TYPE_II" | "TYPE-II" => Ok(Variant::TypeII),
            _ => Err(Error::InvalidParameter(format!("unknown variant {s:?}"))),
        }
    }
}

/// One affine system: variant, rule and coefficients.
///
/// `mul` is `A` (type I) or `a` (type II), `add` is `B` or `b`.
#[derive(Debug, Clone, Serialize)]
pub struct AddsSpec {
    pub variant: Variant,
    pub rule: IvtIndex,
    pub mul: Value,
    pub add: Value,
    #[serde(skip)]
    ivt: Ivt,
}

impl PartialEq for AddsSpec {
    fn eq(&self, other: &Self) -> bool {
        (self.variant, self.rule, self.mul, self.add)
            == (other.variant, other.rule, other.mul, other.add)
    }
}

impl Eq for AddsSpec {}

impl AddsSpec {
    pub fn new(variant: Variant, rule: IvtIndex, mul: Value, add: Value) -> Result<Self> {
        if rule.arity() != 1 {
            return Err(Error::ArityMismatch {
                expected: 1,
                got: rule.arity() as usize,
            });
        }
        let p = rule.base().as_value();
        if mul >= p || add >= p {
            return Err(Error::InvalidParameter(format!(
                "coefficients ({mul}, {add}) must both be below p = {p}"
            )));
        }
        Ok(AddsSpec {
            variant,
            rule,
            mul,
            add,
            ivt: Ivt::from_index(rule),
        })
    }

    pub fn type_i(base: Base, j: u64, a: Value, b: Value) -> Result<Self> {
        Self::new(Variant::TypeI, IvtIndex::unary(base, j)?, a, b)
    }

    pub fn type_ii(base: Base, j: u64, a: Value, b: Value) -> Result<Self> {
        Self::new(Variant::TypeII, IvtIndex::unary(base, j)?, a, b)
    }

    /// `Y <- IVT(Y)`, the linearized type-I system.
    pub fn linear(base: Base, j: u64) -> Result<Self> {
        Self::type_i(base, j, 1, 0)
    }

    pub fn base(&self) -> Base {
        self.rule.base()
    }

    pub fn ivt(&self) -> &Ivt {
        &self.ivt
    }

    /// `mul = 0` collapses the system to a constant map.
    pub fn is_degenerate(&self) -> bool {
        self.mul == 0
    }

    /// The same rule and coefficients under the other variant.
    pub fn counterpart(&self) -> AddsSpec {
        let variant = match self.variant {
            Variant::TypeI => Variant::TypeII,
            Variant::TypeII => Variant::TypeI,
        };
        AddsSpec {
            variant,
            ..self.clone()
        }
    }

    pub fn step(&self, y: Value) -> Result<Value> {
        match self.variant {
            Variant::TypeI => self
                .ivt
                .apply(y)?
                .checked_mul(self.mul)
                .and_then(|v| v.checked_add(self.add))
                .ok_or(Error::Overflow),
            Variant::TypeII => {
                let arg = y
                    .checked_mul(self.mul)
                    .and_then(|v| v.checked_add(self.add))
                    .ok_or(Error::Overflow)?;
                self.ivt.apply(arg)
            }
        }
    }

    fn label(&self) -> String {
        match self.variant {
            Variant::TypeI => format!("Y <- {}*IVT_{}(Y) + {}", self.mul, self.rule.j(), self.add),
            Variant::TypeII => {
                format!("y <- IVT_{}({}*y + {})", self.rule.j(), self.mul, self.add)
            }
        }
    }
}

impl fmt::Display for AddsSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (p={})", self.label(), self.base())
    }
}

pub fn adds_orbit(spec: &AddsSpec, start: Value, limits: OrbitLimits) -> Result<Orbit> {
    iterate_orbit(|y| spec.step(y), start, limits)
}

pub fn classify_adds(spec: &AddsSpec, config: &ScanConfig) -> Result<Classification> {
    classify_map(|y| spec.step(y), config)
}

/// An exact non-negative ratio, ordered without rounding.
#[derive(Debug, Clone, Copy)]
pub struct Quotient {
    pub num: u64,
    pub den: u64,
}

impl Quotient {
    pub const ZERO: Quotient = Quotient { num: 0, den: 1 };

    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0, "quotient denominator must be positive");
        Quotient { num, den }
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn below_one(self) -> bool {
        self.num < self.den
    }

    fn reduced(self) -> (u64, u64) {
        let g = gcd(self.num, self.den);
        (self.num / g, self.den / g)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

impl PartialEq for Quotient {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Quotient {}

impl PartialOrd for Quotient {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Quotient {
    fn cmp(&self, other: &Self) -> Ordering {
        (u128::from(self.num) * u128::from(other.den))
            .cmp(&(u128::from(other.num) * u128::from(self.den)))
    }
}

impl fmt::Display for Quotient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, d) = self.reduced();
        if d == 1 {
            write!(f, "{n}")
        } else {
            write!(f, "{n}/{d}")
        }
    }
}

impl Serialize for Quotient {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Largest difference quotient over a set of pairs, with the first pair that
/// attains it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QuotientBound {
    pub max_quotient: Quotient,
    pub pair: Option<(Value, Value)>,
}

impl QuotientBound {
    fn empty() -> Self {
        QuotientBound {
            max_quotient: Quotient::ZERO,
            pair: None,
        }
    }

    fn offer(&mut self, x: Value, fx: Value, y: Value, fy: Value) {
        let q = Quotient::new(fx.abs_diff(fy), x.abs_diff(y));
        if self.pair.is_none() || q > self.max_quotient {
            self.max_quotient = q;
            self.pair = Some((x.min(y), x.max(y)));
        }
    }
}

fn eval_range(f: &dyn Fn(Value) -> Result<Value>, lo: Value, hi: Value) -> Result<Vec<Value>> {
    (lo..=hi).map(f).collect()
}

/// Pairs sampled for global quotients: every pair at distance at most `p^2`,
/// plus the extremal pairs between consecutive digit lengths.
fn sampled_pairs(base: Base, bound: Value) -> Vec<(Value, Value)> {
    let near = base.pow(2).unwrap_or(Value::MAX);
    let mut pairs = Vec::new();
    for x in 0..=bound {
        let top = x.saturating_add(near).min(bound);
        for y in x + 1..=top {
            pairs.push((x, y));
        }
    }
    pairs.extend(cross_length_pairs(base, bound));
    pairs
}

fn cross_length_pairs(base: Base, bound: Value) -> Vec<(Value, Value)> {
    let p = base.as_value();
    let mut pairs = Vec::new();
    let mut lo: Value = 0;
    let mut hi: Value = p - 1;
    while let Some(next_hi) = hi.checked_mul(p).and_then(|v| v.checked_add(p - 1)) {
        let next_lo = hi + 1;
        if next_lo > bound {
            break;
        }
        let next_hi = next_hi.min(bound);
        for x in [lo, hi] {
            for y in [next_lo, next_hi] {
                pairs.push((x, y));
            }
        }
        lo = next_lo;
        hi = next_hi;
        if next_hi == bound {
            break;
        }
    }
    pairs
}

fn quotient_over_pairs(
    f: &dyn Fn(Value) -> Result<Value>,
    pairs: &[(Value, Value)],
    values: &[Value],
) -> Result<QuotientBound> {
    let mut bound = QuotientBound::empty();
    for &(x, y) in pairs {
        let fx = values.get(x as usize).copied().map_or_else(|| f(x), Ok)?;
        let fy = values.get(y as usize).copied().map_or_else(|| f(y), Ok)?;
        bound.offer(x, fx, y, fy);
    }
    Ok(bound)
}

fn require_bound(base: Base, bound: Value, what: &str) -> Result<()> {
    let min = base.pow(3)? - 1;
    if bound < min {
        return Err(Error::InvalidParameter(format!(
            "{what} {bound} must be at least p^3 - 1 = {min}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SteadyStateReport {
    pub spec: AddsSpec,
    pub search_bound: Value,
    pub steady_points: Vec<Value>,
    pub unique: bool,
}

impl SteadyStateReport {
    pub fn unique_point(&self) -> Option<Value> {
        self.unique.then(|| self.steady_points[0])
    }
}

/// Exhaustive fixed-point scan of `0..=search_bound`.
pub fn steady_states(spec: &AddsSpec, search_bound: Value) -> Result<SteadyStateReport> {
    require_bound(spec.base(), search_bound, "search_bound")?;
    let mut steady_points = Vec::new();
    for y in 0..=search_bound {
        match spec.step(y) {
            Ok(v) if v == y => steady_points.push(y),
            Ok(_) | Err(Error::Overflow) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(SteadyStateReport {
        spec: spec.clone(),
        search_bound,
        unique: steady_points.len() == 1,
        steady_points,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalStability {
    pub steady_point: Value,
    pub radius: Value,
    pub max_quotient: Quotient,
    pub pair: Option<(Value, Value)>,
    pub locally_stable: bool,
}

/// Largest quotient over all pairs in `[steady - radius, steady + radius]`.
pub fn local_stability(
    spec: &AddsSpec,
    steady_point: Value,
    radius: Value,
) -> Result<LocalStability> {
    if spec.step(steady_point)? != steady_point {
        return Err(Error::NotFixedPoint(steady_point));
    }
    if radius == 0 {
        return Err(Error::InvalidParameter("radius must be at least 1".into()));
    }
    let lo = steady_point.saturating_sub(radius);
    let hi = steady_point.checked_add(radius).ok_or(Error::Overflow)?;
    let f = |y| spec.step(y);
    let values = eval_range(&f, lo, hi)?;
    let mut bound = QuotientBound::empty();
    for (i, &fx) in values.iter().enumerate() {
        for (k, &fy) in values.iter().enumerate().skip(i + 1) {
            bound.offer(lo + i as Value, fx, lo + k as Value, fy);
        }
    }
    Ok(LocalStability {
        steady_point,
        radius,
        max_quotient: bound.max_quotient,
        pair: bound.pair,
        locally_stable: bound.max_quotient.below_one(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GlobalStability {
    pub scan_bound: Value,
    pub max_quotient: Quotient,
    pub pair: Option<(Value, Value)>,
    pub globally_stable: bool,
}

pub fn global_stability(spec: &AddsSpec, scan_bound: Value) -> Result<GlobalStability> {
    require_bound(spec.base(), scan_bound, "scan_bound")?;
    let f = |y| spec.step(y);
    let values = eval_range(&f, 0, scan_bound)?;
    let pairs = sampled_pairs(spec.base(), scan_bound);
    let bound = quotient_over_pairs(&f, &pairs, &values)?;
    Ok(GlobalStability {
        scan_bound,
        max_quotient: bound.max_quotient,
        pair: bound.pair,
        globally_stable: bound.max_quotient.below_one(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StabilityReport {
    pub spec: AddsSpec,
    pub steady_point: Value,
    pub local_radius: Value,
    pub local_max_quotient: Quotient,
    pub locally_stable: bool,
    pub global_max_quotient: Quotient,
    pub globally_stable: bool,
}

pub fn stability_report(
    spec: &AddsSpec,
    steady_point: Value,
    radius: Value,
    scan_bound: Value,
) -> Result<StabilityReport> {
    let local = local_stability(spec, steady_point, radius)?;
    let global = global_stability(spec, scan_bound)?;
    Ok(StabilityReport {
        spec: spec.clone(),
        steady_point,
        local_radius: radius,
        local_max_quotient: local.max_quotient,
        locally_stable: local.locally_stable,
        global_max_quotient: global.max_quotient,
        globally_stable: global.globally_stable,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContractionVerdict {
    pub rule: IvtIndex,
    pub scan_bound: Value,
    pub is_contraction: bool,
    pub max_quotient: Quotient,
    /// Largest quotient between values of equal digit length.
    pub equal_length: QuotientBound,
    /// Largest quotient between values of different digit length.
    pub cross_length: QuotientBound,
    /// A pair with quotient at least 1, equal-length pairs preferred.
    pub witness: Option<(Value, Value)>,
}

/// Contraction test for the raw IVT over the sampled pairs.
pub fn is_contraction(rule: IvtIndex, scan_bound: Value) -> Result<ContractionVerdict> {
    let base = rule.base();
    require_bound(base, scan_bound, "scan_bound")?;
    let ivt = Ivt::from_index(rule);
    let f = |x| ivt.apply(x);
    let values = eval_range(&f, 0, scan_bound)?;
    let mut equal = QuotientBound::empty();
    let mut cross = QuotientBound::empty();
    for (x, y) in sampled_pairs(base, scan_bound) {
        let (fx, fy) = (values[x as usize], values[y as usize]);
        if base.digit_len(x) == base.digit_len(y) {
            equal.offer(x, fx, y, fy);
        } else {
            cross.offer(x, fx, y, fy);
        }
    }
    let max_quotient = equal.max_quotient.max(cross.max_quotient);
    let violates = |b: &QuotientBound| b.pair.filter(|_| !b.max_quotient.below_one());
    let witness = violates(&equal).or_else(|| violates(&cross));
    Ok(ContractionVerdict {
        rule,
        scan_bound,
        is_contraction: max_quotient.below_one(),
        max_quotient,
        equal_length: equal,
        cross_length: cross,
        witness,
    })
}

/// Settings shared by table generation and the steady-state checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TableConfig {
    pub scan: ScanConfig,
    /// Upper end of the fixed-point search and of the global quotient scan.
    pub search_bound: Value,
    pub local_radius: Value,
}

impl TableConfig {
    /// Defaults for base `p`: horizon and search bound `p^5 - 1`, radius 2.
    pub fn for_base(base: Base) -> Self {
        let bound = base.pow(5).map(|v| v - 1).unwrap_or(Value::MAX);
        TableConfig {
            scan: ScanConfig::new(bound),
            search_bound: bound,
            local_radius: 2,
        }
    }
}

/// One rule under one coefficient pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableEntry {
    pub j: u64,
    pub collatz_like: bool,
    pub attractor: Option<AttractorInfo>,
    pub witness: Option<Witness>,
    pub diverged: bool,
    pub steady_points: Vec<Value>,
    /// Set only for Collatz-like rules with exactly one steady point.
    pub unique_steady: Option<Value>,
    pub locally_stable: Option<bool>,
    pub globally_stable: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableRow {
    pub mul: Value,
    pub add: Value,
    pub entries: Vec<TableEntry>,
}

/// `(j, point)` listing in ascending `j`.
pub type Column = Vec<(u64, Value)>;

impl TableRow {
    pub fn attractors(&self) -> Column {
        self.entries
            .iter()
            .filter_map(|e| e.attractor.as_ref().map(|a| (e.j, a.representative)))
            .collect()
    }

    pub fn unique_steady(&self) -> Column {
        self.entries
            .iter()
            .filter_map(|e| e.unique_steady.map(|y| (e.j, y)))
            .collect()
    }

    pub fn locally_stable(&self) -> Column {
        self.entries
            .iter()
            .filter(|e| e.locally_stable == Some(true))
            .filter_map(|e| e.unique_steady.map(|y| (e.j, y)))
            .collect()
    }

    pub fn globally_stable(&self) -> Column {
        self.entries
            .iter()
            .filter(|e| e.globally_stable == Some(true))
            .filter_map(|e| e.unique_steady.map(|y| (e.j, y)))
            .collect()
    }

    /// Rules whose orbit left the value cap from some start.
    pub fn divergent(&self) -> Vec<u64> {
        self.entries
            .iter()
            .filter(|e| e.diverged)
            .map(|e| e.j)
            .collect()
    }
}

/// Renders a column the way the published tables do: `0(0),6(0),9(0)`.
pub fn format_column(column: &[(u64, Value)]) -> String {
    column
        .iter()
        .map(|(j, v)| format!("{j}({v})"))
        .collect::<Vec<_>>()
        .join(",")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AttractorTable {
    pub base: Base,
    pub variant: Variant,
    pub config: TableConfig,
    pub rows: Vec<TableRow>,
}

fn table_entry(spec: &AddsSpec, config: &TableConfig) -> Result<TableEntry> {
    let class = classify_adds(spec, &config.scan)?;
    let collatz_like = class.is_collatz_like();
    let diverged = matches!(class.witness, Some(Witness::Diverged { .. }));
    let steady = steady_states(spec, config.search_bound)?;
    let unique_steady = if collatz_like {
        steady.unique_point()
    } else {
        None
    };
    let (locally_stable, globally_stable) = match unique_steady {
        Some(y) => (
            Some(local_stability(spec, y, config.local_radius)?.locally_stable),
            Some(global_stability(spec, config.search_bound)?.globally_stable),
        ),
        None => (None, None),
    };
    Ok(TableEntry {
        j: spec.rule.j(),
        collatz_like,
        attractor: class.attractor,
        witness: class.witness,
        diverged,
        steady_points: steady.steady_points,
        unique_steady,
        locally_stable,
        globally_stable,
    })
}

/// Classifies every rule of `T^{p,1}` under each coefficient pair.
pub fn attractor_table(
    base: Base,
    variant: Variant,
    coefficients: &[(Value, Value)],
    config: &TableConfig,
) -> Result<AttractorTable> {
    let p = base.as_value();
    for &(m, a) in coefficients {
        if m == 0 || m >= p || a >= p {
            return Err(Error::InvalidParameter(format!(
                "coefficient pair ({m}, {a}) outside [1, {p}) x [0, {p})"
            )));
        }
    }
    let total = rule_count(base, 1)?;
    let mut rows = Vec::with_capacity(coefficients.len());
    for &(mul, add) in coefficients {
        let entries: Result<Vec<TableEntry>> = (0..total)
            .into_par_iter()
            .map(|j| {
                let spec = AddsSpec::new(variant, IvtIndex::unary(base, j)?, mul, add)?;
                table_entry(&spec, config)
            })
            .collect();
        rows.push(TableRow {
            mul,
            add,
            entries: entries?,
        });
    }
    Ok(AttractorTable {
        base,
        variant,
        config: *config,
        rows,
    })
}

/// The six coefficient rows of the published base-3 tables, in table order.
pub const PUBLISHED_ROWS: [(Value, Value); 6] = [(1, 0), (1, 1), (1, 2), (2, 2), (2, 0), (2, 1)];

/// Every pair in `[1, p) x [0, p)`.
pub fn all_coefficients(base: Base) -> Vec<(Value, Value)> {
    let p = base.as_value();
    (1..p).flat_map(|m| (0..p).map(move |a| (m, a))).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorrespondenceRecord {
    pub rule: IvtIndex,
    pub mul: Value,
    pub add: Value,
    pub type1_attractor: Value,
    pub type2_attractor: Option<Value>,
    /// `(type1 - B)` is a non-negative multiple of `A`.
    pub divisible: bool,
    pub relation_holds: bool,
}

/// Checks that the type-II attractor is `(type1 - B) / A`.
pub fn verify_type_correspondence(
    rule: IvtIndex,
    mul: Value,
    add: Value,
    scan: &ScanConfig,
) -> Result<CorrespondenceRecord> {
    if mul == 0 {
        return Err(Error::InvalidParameter("A must be at least 1".into()));
    }
    let type1 = AddsSpec::new(Variant::TypeI, rule, mul, add)?;
    let c1 = classify_adds(&type1, scan)?;
    let a1 = match (&c1.attractor, &c1.witness) {
        (Some(a), None) => a.representative,
        (_, w) => {
            return Err(Error::NotCollatzLike {
                j: rule.j(),
                detail: format!(
                    "type I with A={mul}, B={add}: {}",
                    w.as_ref()
                        .map_or_else(|| "no attractor".to_string(), |w| w.to_string())
                ),
            })
        }
    };
    let c2 = classify_adds(&type1.counterpart(), scan)?;
    let type2_attractor = if c2.is_collatz_like() {
        c2.attractor.map(|a| a.representative)
    } else {
        None
    };
    let divisible = a1 >= add && (a1 - add).is_multiple_of(mul);
    let relation_holds = divisible && type2_attractor == Some((a1 - add) / mul);
    Ok(CorrespondenceRecord {
        rule,
        mul,
        add,
        type1_attractor: a1,
        type2_attractor,
        divisible,
        relation_holds,
    })
}

/// A type-II Collatz-like system whose type-I counterpart is not Collatz-like
/// or lands on a different attractor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConverseWitness {
    pub spec: AddsSpec,
    pub type2_attractor: Value,
    pub type1: Classification,
}

/// Sweeps every rule under each coefficient pair looking for a
/// [`ConverseWitness`].
pub fn find_converse_witness(
    base: Base,
    coefficients: &[(Value, Value)],
    scan: &ScanConfig,
) -> Result<Option<ConverseWitness>> {
    let total = rule_count(base, 1)?;
    for &(mul, add) in coefficients {
        for j in 0..total {
            let spec = AddsSpec::type_ii(base, j, mul, add)?;
            let c2 = classify_adds(&spec, scan)?;
            let Some(g) = c2.attractor.filter(|_| c2.witness.is_none()) else {
                continue;
            };
            let c1 = classify_adds(&spec.counterpart(), scan)?;
            let matches = match (&c1.attractor, &c1.witness) {
                (Some(a), None) => {
                    a.representative >= add
                        && (a.representative - add) % mul == 0
                        && (a.representative - add) / mul == g.representative
                }
                _ => false,
            };
            if !matches {
                return Ok(Some(ConverseWitness {
                    spec,
                    type2_attractor: g.representative,
                    type1: c1,
                }));
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UniqueZeroSteady {
    pub base: Base,
    pub scan_limit: Value,
    pub rules: Vec<u64>,
    pub count: u64,
    /// `p^(p-2)`.
    pub expected: u64,
}

/// Collatz-like rules of the linearized system whose only steady point is 0.
pub fn count_unique_zero_steady(base: Base, scan: &ScanConfig) -> Result<UniqueZeroSteady> {
    let total = rule_count(base, 1)?;
    let bound = scan.scan_limit.max(base.pow(3)? - 1);
    let hits: Result<Vec<Option<u64>>> = (0..total)
        .into_par_iter()
        .map(|j| {
            let spec = AddsSpec::linear(base, j)?;
            if !classify_adds(&spec, scan)?.is_collatz_like() {
                return Ok(None);
            }
            let steady = steady_states(&spec, bound)?;
            Ok((steady.unique_point() == Some(0)).then_some(j))
        })
        .collect();
    let rules: Vec<u64> = hits?.into_iter().flatten().collect();
    let expected = base.pow(base.get() - 2)?;
    Ok(UniqueZeroSteady {
        base,
        scan_limit: scan.scan_limit,
        count: rules.len() as u64,
        rules,
        expected,
    })
}

/// Attractor of a single orbit, for callers that only need one start.
pub fn orbit_attractor(
    spec: &AddsSpec,
    start: Value,
    limits: OrbitLimits,
) -> Result<AttractorInfo> {
    attractor_of(&adds_orbit(spec, start, limits)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b3() -> Base {
        Base::new(3).unwrap()
    }

    fn b2() -> Base {
        Base::new(2).unwrap()
    }

    #[test]
    fn step_examples() {
        let s = AddsSpec::type_i(b3(), 6, 1, 1).unwrap();
        assert_eq!(s.ivt().table(), &[0, 2, 0]);
        assert_eq!(s.step(1), Ok(3));
        let s = AddsSpec::type_ii(b3(), 0, 2, 2).unwrap();
        assert_eq!(s.step(7), Ok(0));
        let s = AddsSpec::type_i(b3(), 18, 2, 2).unwrap();
        assert_eq!(s.ivt().table(), &[0, 0, 2]);
        assert_eq!(s.step(6), Ok(14));
        assert_eq!(s.step(14), Ok(6));
    }

    #[test]
    fn spec_validation() {
        assert!(AddsSpec::type_i(b3(), 6, 3, 0).is_err());
        assert!(AddsSpec::type_i(b3(), 6, 1, 3).is_err());
        let d = AddsSpec::type_i(b3(), 6, 0, 1).unwrap();
        assert!(d.is_degenerate());
        assert_eq!(d.step(100), Ok(1));
    }

    #[test]
    fn step_overflow_is_an_error() {
        let s = AddsSpec::type_ii(b3(), 21, 2, 0).unwrap();
        assert_eq!(s.step(u64::MAX / 2 + 1), Err(Error::Overflow));
    }

    #[test]
    fn orbit_examples() {
        let lim = OrbitLimits::default();
        let s = AddsSpec::type_i(b3(), 7, 1, 1).unwrap();
        let o = adds_orbit(&s, 0, lim).unwrap();
        assert_eq!(o.transient, vec![0, 2]);
        assert_eq!(o.cycle, vec![1, 3, 8]);

        let s = AddsSpec::type_i(b3(), 0, 1, 2).unwrap();
        for start in [0, 5, 100] {
            assert_eq!(adds_orbit(&s, start, lim).unwrap().cycle, vec![2]);
        }

        let s = AddsSpec::type_ii(b3(), 6, 1, 1).unwrap();
        assert_eq!(orbit_attractor(&s, 0, lim).unwrap().representative, 2);
    }

    #[test]
    fn affine_growth_is_reported_as_divergence() {
        // 2*IVT_21(Y) + 1 = 2Y + 1 grows without bound.
        let s = AddsSpec::type_i(b3(), 21, 2, 1).unwrap();
        let o = adds_orbit(&s, 1, OrbitLimits::default()).unwrap();
        assert_eq!(o.status, crate::dynamics::OrbitStatus::Diverged);
    }

    #[test]
    fn steady_state_examples() {
        let r = steady_states(&AddsSpec::type_i(b3(), 0, 1, 1).unwrap(), 242).unwrap();
        assert_eq!(r.steady_points, vec![1]);
        assert!(r.unique);
        for (a, b) in all_coefficients(b3()) {
            let r = steady_states(&AddsSpec::type_ii(b3(), 0, a, b).unwrap(), 242).unwrap();
            assert_eq!(r.steady_points, vec![0]);
        }
        let r = steady_states(&AddsSpec::type_i(b3(), 6, 1, 1).unwrap(), 242).unwrap();
        assert!(r.steady_points.is_empty());
        assert!(!r.unique);
        assert!(steady_states(&AddsSpec::linear(b3(), 6).unwrap(), 10).is_err());
    }

    #[test]
    fn identity_steady_states_match_closed_form() {
        // y = A*y + B over p = 2: A = 1, B = 0 fixes everything; A = 1, B = 1 nothing.
        let r = steady_states(&AddsSpec::type_i(b2(), 2, 1, 0).unwrap(), 31).unwrap();
        assert_eq!(r.steady_points.len(), 32);
        let r = steady_states(&AddsSpec::type_i(b2(), 2, 1, 1).unwrap(), 31).unwrap();
        assert!(r.steady_points.is_empty());
        // A = 0 is the constant system with steady point B.
        let r = steady_states(&AddsSpec::type_i(b2(), 2, 0, 1).unwrap(), 31).unwrap();
        assert_eq!(r.steady_points, vec![1]);
    }

    #[test]
    fn local_stability_examples() {
        let r = local_stability(&AddsSpec::linear(b3(), 0).unwrap(), 0, 2).unwrap();
        assert_eq!(r.max_quotient, Quotient::ZERO);
        assert!(r.locally_stable);

        let r = local_stability(&AddsSpec::linear(b3(), 6).unwrap(), 0, 2).unwrap();
        assert!(r.max_quotient >= Quotient::new(2, 1));
        assert!(!r.locally_stable);

        let r = local_stability(&AddsSpec::type_ii(b3(), 0, 1, 1).unwrap(), 0, 2).unwrap();
        assert_eq!(r.max_quotient, Quotient::ZERO);
        assert!(r.locally_stable);

        assert_eq!(
            local_stability(&AddsSpec::linear(b3(), 6).unwrap(), 1, 2),
            Err(Error::NotFixedPoint(1))
        );
    }

    #[test]
    fn global_stability_examples() {
        for (a, b) in all_coefficients(b3()) {
            let r = global_stability(&AddsSpec::type_i(b3(), 0, a, b).unwrap(), 242).unwrap();
            assert!(r.globally_stable);
        }
        let r = global_stability(&AddsSpec::linear(b2(), 2).unwrap(), 31).unwrap();
        assert_eq!(r.max_quotient, Quotient::new(1, 1));
        assert!(!r.globally_stable);

        let r = global_stability(&AddsSpec::linear(b3(), 9).unwrap(), 242).unwrap();
        assert!(r.max_quotient >= Quotient::new(1, 1));
        assert!(!r.globally_stable);
    }

    #[test]
    fn quotient_ordering() {
        assert!(Quotient::new(1, 3) < Quotient::new(1, 2));
        assert_eq!(Quotient::new(2, 4), Quotient::new(1, 2));
        assert_eq!(Quotient::new(2, 4).to_string(), "1/2");
        assert_eq!(Quotient::new(6, 2).to_string(), "3");
        assert!(!Quotient::new(5, 5).below_one());
    }

    #[test]
    fn cross_length_pairs_cover_digit_boundaries() {
        let pairs = cross_length_pairs(b3(), 26);
        assert!(pairs.contains(&(2, 3)));
        assert!(pairs.contains(&(0, 8)));
        assert!(pairs.contains(&(8, 9)));
        assert!(pairs.contains(&(3, 26)));
        assert!(pairs.iter().all(|&(x, y)| x < y && y <= 26));
    }

    #[test]
    fn contraction_examples() {
        let v = |j| is_contraction(IvtIndex::unary(b2(), j).unwrap(), 31).unwrap();
        let c0 = v(0);
        assert!(c0.is_contraction);
        assert_eq!(c0.witness, None);

        let c1 = v(1);
        assert!(!c1.is_contraction);
        let (x, y) = c1.witness.unwrap();
        assert_eq!(b2().digit_len(x), b2().digit_len(y));
        assert_eq!(c1.equal_length.max_quotient, Quotient::new(1, 1));

        let c2 = v(2);
        assert!(!c2.is_contraction);
        assert_eq!(c2.max_quotient, Quotient::new(1, 1));

        let c3 = v(3);
        assert!(!c3.is_contraction);
        let (x, y) = c3.witness.unwrap();
        assert_ne!(b2().digit_len(x), b2().digit_len(y));
        assert!(c3.max_quotient > Quotient::new(1, 1));
    }

    #[test]
    fn correspondence_examples() {
        let scan = ScanConfig::default();
        let r = verify_type_correspondence(IvtIndex::unary(b3(), 6).unwrap(), 1, 1, &scan).unwrap();
        assert_eq!((r.type1_attractor, r.type2_attractor), (3, Some(2)));
        assert!(r.relation_holds);
        let r =
            verify_type_correspondence(IvtIndex::unary(b3(), 18).unwrap(), 2, 2, &scan).unwrap();
        assert_eq!((r.type1_attractor, r.type2_attractor), (6, Some(2)));
        assert!(r.relation_holds);
        let r = verify_type_correspondence(IvtIndex::unary(b3(), 0).unwrap(), 1, 0, &scan).unwrap();
        assert_eq!((r.type1_attractor, r.type2_attractor), (0, Some(0)));

        let err = verify_type_correspondence(IvtIndex::unary(b3(), 21).unwrap(), 1, 0, &scan);
        assert!(matches!(err, Err(Error::NotCollatzLike { j: 21, .. })));
    }

    #[test]
    fn unique_zero_steady() {
        let r = count_unique_zero_steady(b3(), &ScanConfig::default()).unwrap();
        assert_eq!(r.rules, vec![0, 6, 9]);
        assert_eq!((r.count, r.expected), (3, 3));
        let r = count_unique_zero_steady(b2(), &ScanConfig::new(31)).unwrap();
        assert_eq!(r.rules, vec![0]);
        assert_eq!((r.count, r.expected), (1, 1));
    }
}
