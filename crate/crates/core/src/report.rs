//! Run configuration, the versioned report envelope and table rendering.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::adds::{format_column, AttractorTable, Column, TableConfig, TableRow, Variant};
use crate::analysis::{csv_err, finish_csv};
use crate::dynamics::{OrbitLimits, ScanConfig};
use crate::error::{Error, Result};
use crate::ivt::{Base, Value};
use crate::odpe::HopConvention;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Frozen header of the table CSV export.
pub const TABLE_CSV_HEADER: [&str; 7] = [
    "A",
    "B",
    "j",
    "attractor",
    "unique_steady",
    "locally_stable",
    "globally_stable",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
    Plain,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Plain => "plain",
        })
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "plain" | "text" => Ok(Format::Plain),
            _ => Err(Error::InvalidParameter(format!("unknown format {s:?}"))),
        }
    }
}

/// Every tunable of a run. Runs are deterministic, so identical configs give
/// byte-identical reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub p: u32,
    pub j: u64,
    pub variant: Variant,
    #[serde(rename = "A")]
    pub mul: Value,
    #[serde(rename = "B")]
    pub add: Value,
    pub scan_limit: Value,
    pub max_iter: usize,
    pub value_cap: Value,
    pub horizon: Value,
    pub digit_budget: u32,
    pub hop_convention: HopConvention,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        let limits = OrbitLimits::default();
        RunConfig {
            p: 3,
            j: 0,
            variant: Variant::TypeI,
            mul: 1,
            add: 0,
            scan_limit: 242,
            max_iter: limits.max_iter,
            value_cap: limits.value_cap,
            horizon: 100,
            digit_budget: 3,
            hop_convention: HopConvention::PINNED,
            format: Format::Json,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("{key}: cannot parse {value:?}")))
}

impl RunConfig {
    pub fn base(&self) -> Result<Base> {
        Base::new(self.p)
    }

    pub fn limits(&self) -> OrbitLimits {
        OrbitLimits {
            max_iter: self.max_iter,
            value_cap: self.value_cap,
        }
    }

    pub fn scan(&self) -> ScanConfig {
        ScanConfig::new(self.scan_limit).with_limits(self.limits())
    }

    /// Table settings: the scan limit doubles as the steady-state search bound.
    pub fn table(&self) -> TableConfig {
        TableConfig {
            scan: self.scan(),
            search_bound: self.scan_limit,
            local_radius: 2,
        }
    }

    /// Sets one `key=value` pair and returns the canonical key. Keys match
    /// the long flag names, with `_` or `-` accepted.
    pub fn set(&mut self, key: &str, value: &str) -> Result<String> {
        let value = value.trim();
        let canonical = key.trim().replace('-', "_");
        match canonical.as_str() {
            "p" => self.p = parse_num(key, value)?,
            "j" => self.j = parse_num(key, value)?,
            "variant" => self.variant = value.parse()?,
            "A" | "a" | "mul" => self.mul = parse_num(key, value)?,
            "B" | "b" | "add" => self.add = parse_num(key, value)?,
            "scan_limit" => self.scan_limit = parse_num(key, value)?,
            "max_iter" => self.max_iter = parse_num(key, value)?,
            "value_cap" => self.value_cap = parse_num(key, value)?,
            "horizon" => self.horizon = parse_num(key, value)?,
            "digit_budget" | "digits" => self.digit_budget = parse_num(key, value)?,
            "hop_convention" => self.hop_convention = value.parse()?,
            "format" => self.format = value.parse()?,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown config key {other:?}"
                )))
            }
        }
        Ok(canonical)
    }

    /// Applies a config file: one `key=value` per line, `#` starts a comment.
    /// Returns the keys that were set.
    pub fn apply_file(&mut self, text: &str) -> Result<Vec<String>> {
        let mut keys = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidParameter(format!("config line {}: expected key=value", n + 1))
            })?;
            keys.push(self.set(key, value)?);
        }
        Ok(keys)
    }

    pub fn validate(&self) -> Result<()> {
        self.base()?;
        let positive = [
            ("scan_limit", self.scan_limit),
            ("max_iter", self.max_iter as Value),
            ("value_cap", self.value_cap),
            ("horizon", self.horizon),
            ("digit_budget", Value::from(self.digit_budget)),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::InvalidParameter(format!("{name} must be positive")));
            }
        }
        Ok(())
    }
}

/// Envelope around every command's output.
#[derive(Debug, Clone, Serialize)]
pub struct Report<T: Serialize> {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub command: String,
    pub config: RunConfig,
    pub payload: T,
    pub warnings: Vec<String>,
}

impl<T: Serialize> Report<T> {
    pub fn new(command: impl Into<String>, config: RunConfig, payload: T) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            tool_version: TOOL_VERSION,
            command: command.into(),
            config,
            payload,
            warnings: Vec::new(),
        }
    }

    pub fn with_warnings(mut self, warnings: Vec<String>) -> Self {
        self.warnings.extend(warnings);
        self
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map(|mut s| {
                s.push('\n');
                s
            })
            .map_err(|e| Error::InvalidParameter(format!("json: {e}")))
    }
}

/// Published base-3 type-I table, verbatim (tab separated).
pub const GOLDEN_TYPE_I: &str = "\
A=1,B=0\t0(0),1(0),2(0),6(0),7(0),8(0),9(0),10(0),11(0)\t0(0),6(0), 9(0)\t0(0)\t0(0)
A=1,B=1\t0(1),1(1),6(3),7(1)\t0(1),1(1)\t0(1)\t0(1)
A=1,B=2\t0(2),2(2),9(2),11(2)\t0(2),2(2)\t0(2)\t0(2)
A=2,B=2\t0(2),1(2),18(6)\t0(2),1(2)\t0(2)\t0(2)
A=2,B=0\t0(0),1(0),2(0),3(0),4(0),18(0), 19(0),20(0)\t0(0),18(0)\t0(0)\t0(0)
A=2,B=1\t0(1),2(1),3(3)\t0(1),2(1)\t0(1)\t0(1)
";

/// Published base-3 type-II table, verbatim (tab separated).
pub const GOLDEN_TYPE_II: &str = "\
a=1,b=0\t0(0),1(0),2(0),6(0),7(0),8(0),9(0),10(0),11(0)\t0(0),6(0), 9(0)\t0(0)\t0(0)
a=1,b=1\t0(0),1(0),6(2),7(0)\t0(0),1(0)\t0(0)\t0(0)
a=1,b=2\t0(0),2(0),9(0),11(0)\t0(0),2(0)\t0(0)\t0(0)
a=2,b=2\t0(0),1(0),18(2)\t0(0),1(0)\t0(0)\t0(0)
a=2,b=0\t0(0),1(0),2(0),3(0),4(0),18(0), 19(0),20(0)\t0(0),3(0)18(0)\t0(0)\t0(0)
a=2,b=1\t0(0),2(0),3(1)\t0(0),2(0)\t0(0)\t0(0)
";

pub const COLUMN_NAMES: [&str; 4] = [
    "attractor",
    "unique_steady",
    "locally_stable",
    "globally_stable",
];

/// Reads every `j(point)` token in order, ignoring separators. The published
/// cells are not consistently comma separated.
pub fn parse_cell(cell: &str) -> Result<Column> {
    let bad = || Error::InvalidParameter(format!("malformed table cell {cell:?}"));
    let mut out = Vec::new();
    let mut rest = cell;
    while let Some(start) = rest.find(|c: char| c.is_ascii_digit()) {
        rest = &rest[start..];
        let open = rest.find('(').ok_or_else(bad)?;
        let close = rest.find(')').ok_or_else(bad)?;
        let j = rest[..open].trim().parse().map_err(|_| bad())?;
        let v = rest[open + 1..close].trim().parse().map_err(|_| bad())?;
        out.push((j, v));
        rest = &rest[close + 1..];
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GoldenRow {
    pub mul: Value,
    pub add: Value,
    /// Attractor, unique-steady, locally-stable, globally-stable.
    pub columns: [Column; 4],
}

pub fn golden_rows(variant: Variant) -> Result<Vec<GoldenRow>> {
    let text = match variant {
        Variant::TypeI => GOLDEN_TYPE_I,
        Variant::TypeII => GOLDEN_TYPE_II,
    };
    text.lines()
        .map(|line| {
            let cells: Vec<&str> = line.split('\t').collect();
            if cells.len() != 5 {
                return Err(Error::InvalidParameter(format!("golden line {line:?}")));
            }
            let label = parse_label(cells[0])?;
            Ok(GoldenRow {
                mul: label.0,
                add: label.1,
                columns: [
                    parse_cell(cells[1])?,
                    parse_cell(cells[2])?,
                    parse_cell(cells[3])?,
                    parse_cell(cells[4])?,
                ],
            })
        })
        .collect()
}

fn parse_label(label: &str) -> Result<(Value, Value)> {
    let bad = || Error::InvalidParameter(format!("golden label {label:?}"));
    let (m, a) = label.split_once(',').ok_or_else(bad)?;
    let num = |part: &str| -> Result<Value> {
        let (_, v) = part.split_once('=').ok_or_else(bad)?;
        v.trim().parse().map_err(|_| bad())
    };
    Ok((num(m)?, num(a)?))
}

pub fn measured_columns(row: &TableRow) -> [Column; 4] {
    [
        row.attractors(),
        row.unique_steady(),
        row.locally_stable(),
        row.globally_stable(),
    ]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub mul: Value,
    pub add: Value,
    pub column: &'static str,
    pub published: String,
    pub measured: String,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "row ({}, {}) {}: published {}, measured {}",
            self.mul, self.add, self.column, self.published, self.measured
        )
    }
}

/// Compares a measured table with the golden copy of its variant. Only base
/// 3 and rows present in the golden table are compared.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GoldenDiff {
    pub variant: Variant,
    pub rows_compared: usize,
    pub mismatches: Vec<Mismatch>,
}

impl GoldenDiff {
    pub fn warnings(&self) -> Vec<String> {
        self.mismatches
            .iter()
            .map(|m| format!("type-{} golden table discrepancy: {m}", self.variant))
            .collect()
    }
}

pub fn diff_against_golden(table: &AttractorTable) -> Result<Option<GoldenDiff>> {
    if table.base.get() != 3 {
        return Ok(None);
    }
    let golden = golden_rows(table.variant)?;
    let mut mismatches = Vec::new();
    let mut rows_compared = 0;
    for row in &table.rows {
        let Some(g) = golden.iter().find(|g| (g.mul, g.add) == (row.mul, row.add)) else {
            continue;
        };
        rows_compared += 1;
        for ((name, published), measured) in COLUMN_NAMES
            .iter()
            .zip(&g.columns)
            .zip(measured_columns(row))
        {
            if *published != measured {
                mismatches.push(Mismatch {
                    mul: row.mul,
                    add: row.add,
                    column: name,
                    published: format_column(published),
                    measured: format_column(&measured),
                });
            }
        }
    }
    Ok(Some(GoldenDiff {
        variant: table.variant,
        rows_compared,
        mismatches,
    }))
}

/// One CSV line per `(A, B, j)`; blank cells mean "not applicable".
pub fn table_csv(table: &AttractorTable) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TABLE_CSV_HEADER).map_err(csv_err)?;
    let opt = |v: Option<String>| v.unwrap_or_default();
    for row in &table.rows {
        for e in &row.entries {
            w.write_record([
                row.mul.to_string(),
                row.add.to_string(),
                e.j.to_string(),
                opt(e.attractor.as_ref().map(|a| a.representative.to_string())),
                opt(e.unique_steady.map(|y| y.to_string())),
                opt(e.locally_stable.map(|b| b.to_string())),
                opt(e.globally_stable.map(|b| b.to_string())),
            ])
            .map_err(csv_err)?;
        }
    }
    finish_csv(w)
}

/// The table in the published layout: a label then the four columns, tab
/// separated.
pub fn table_plain(table: &AttractorTable) -> String {
    let (m, a) = match table.variant {
        Variant::TypeI => ("A", "B"),
        Variant::TypeII => ("a", "b"),
    };
    let mut out = format!("{m},{a}\t{}\n", COLUMN_NAMES.join("\t"));
    for row in &table.rows {
        let cols = measured_columns(row).map(|c| format_column(&c));
        out.push_str(&format!(
            "{m}={},{a}={}\t{}\n",
            row.mul,
            row.add,
            cols.join("\t")
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adds::{attractor_table, PUBLISHED_ROWS};

    #[test]
    fn cells_parse_loosely() {
        assert_eq!(
            parse_cell("0(0),6(0), 9(0)").unwrap(),
            vec![(0, 0), (6, 0), (9, 0)]
        );
        assert_eq!(
            parse_cell("0(0),3(0)18(0)").unwrap(),
            vec![(0, 0), (3, 0), (18, 0)]
        );
        assert_eq!(parse_cell("").unwrap(), vec![]);
        assert!(parse_cell("3(").is_err());
    }

    #[test]
    fn golden_tables_load() {
        for variant in [Variant::TypeI, Variant::TypeII] {
            let rows = golden_rows(variant).unwrap();
            let keys: Vec<_> = rows.iter().map(|r| (r.mul, r.add)).collect();
            assert_eq!(keys, PUBLISHED_ROWS.to_vec());
        }
        let rows = golden_rows(Variant::TypeI).unwrap();
        assert_eq!(rows[3].columns[0], vec![(0, 2), (1, 2), (18, 6)]);
    }

    #[test]
    fn config_file_overrides() {
        let mut c = RunConfig::default();
        c.apply_file("# comment\np = 2\nscan-limit=31 # trailing\n\nvariant=II\nA=1\nformat=csv\n")
            .unwrap();
        assert_eq!(
            (c.p, c.scan_limit, c.variant, c.mul, c.format),
            (2, 31, Variant::TypeII, 1, Format::Csv)
        );
        assert!(c.clone().apply_file("bogus=1").is_err());
        assert!(c.clone().apply_file("p").is_err());
        assert!(c.clone().apply_file("p=x").is_err());
        c.horizon = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn type_one_diff_flags_only_the_known_gap() {
        let base = Base::new(3).unwrap();
        let table = attractor_table(
            base,
            Variant::TypeI,
            &PUBLISHED_ROWS,
            &TableConfig::for_base(base),
        )
        .unwrap();
        let diff = diff_against_golden(&table).unwrap().unwrap();
        assert_eq!(diff.rows_compared, 6);
        assert_eq!(diff.mismatches.len(), 1, "{:?}", diff.mismatches);
        let m = &diff.mismatches[0];
        assert_eq!((m.mul, m.add, m.column), (2, 0, "unique_steady"));
        assert_eq!(m.measured, "0(0),3(0),18(0)");

        let csv = table_csv(&table).unwrap();
        assert!(csv.starts_with("A,B,j,attractor,unique_steady,locally_stable,globally_stable\n"));
        assert_eq!(csv.lines().count(), 1 + 6 * 27);
        assert!(table_plain(&table).contains("A=2,B=2\t0(2),1(2),18(6)\t0(2),1(2)\t0(2)\t0(2)\n"));
    }

    #[test]
    fn report_envelope() {
        let r = Report::new("apply", RunConfig::default(), 14u64).with_warnings(vec!["w".into()]);
        let v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["payload"], 14);
        assert_eq!(v["config"]["hop_convention"]["target"], "sca");
        assert_eq!(v["warnings"][0], "w");
    }
}
