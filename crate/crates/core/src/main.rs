use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ivt::adds::{
    adds_orbit, all_coefficients, attractor_table, classify_adds, count_unique_zero_steady,
    is_contraction, stability_report, steady_states, verify_type_correspondence, AddsSpec, Variant,
    PUBLISHED_ROWS,
};
use ivt::analysis::{box_dimension, graph_points, ratio_sequence, CoverMode};
use ivt::dynamics::{attractor_of, enumerate_collatz_like};
use ivt::odpe::{
    average_hopping, build_topology, calibrate_hop_convention, capacity_check, select_best_rule,
    HopConvention,
};
use ivt::report::{diff_against_golden, table_csv, table_plain, Format, Report, RunConfig};
use ivt::{Error, IvtIndex, LocalRule, Value};

const EXIT_USAGE: u8 = 2;
const EXIT_DOMAIN: u8 = 3;

const AFTER_HELP: &str = "\
Exit status: 0 on success, 2 on a usage error (bad flags, config file or
output format), 3 when the computation itself fails (for example a rule that
is not Collatz-like where one is required).

Precedence: built-in defaults, then --config FILE (key=value lines), then
flags. IVT_THREADS sets the worker thread count.";

#[derive(Parser)]
#[command(name = "ivt", version, about = "Integral value transformations and the systems built on them", after_help = AFTER_HELP)]
struct Cli {
    /// key=value file overriding the defaults
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// json, csv or plain
    #[arg(long, global = true, value_parser = parse::<Format>)]
    format: Option<Format>,
    /// Base
    #[arg(long, global = true)]
    p: Option<u32>,
    /// Every start in 0..=scan-limit is checked
    #[arg(long, global = true)]
    scan_limit: Option<Value>,
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    /// Orbit values above this count as divergence
    #[arg(long, global = true)]
    value_cap: Option<Value>,
    #[command(subcommand)]
    command: Command,
}

fn parse<T: FromStr<Err = Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args, Default)]
struct System {
    /// Rule index
    #[arg(long)]
    j: Option<u64>,
    /// I: Y <- A*IVT(Y)+B, II: y <- IVT(a*y+b)
    #[arg(long, value_parser = parse::<Variant>)]
    variant: Option<Variant>,
    #[arg(long = "A", visible_alias = "a")]
    mul: Option<Value>,
    #[arg(long = "B", visible_alias = "b")]
    add: Option<Value>,
}

#[derive(Subcommand)]
enum Command {
    /// Apply a rule once; repeat --x for a k-ary rule
    Apply {
        #[arg(long)]
        j: Option<u64>,
        #[arg(long, required = true)]
        x: Vec<Value>,
    },
    /// Print a local rule's digit table
    Rule {
        #[arg(long)]
        j: Option<u64>,
        #[arg(long, default_value_t = 1)]
        arity: u32,
    },
    /// Follow one orbit of a rule or affine system
    Orbit {
        #[command(flatten)]
        system: System,
        #[arg(long)]
        start: Value,
    },
    /// Collatz-like verdict for one rule or affine system
    Classify {
        #[command(flatten)]
        system: System,
        /// Require the attractor to be a fixed point
        #[arg(long)]
        strict: bool,
    },
    /// List every Collatz-like rule of the base
    Enumerate {
        #[arg(long)]
        strict: bool,
    },
    /// Attractor, steady-state and stability table
    Tables {
        #[arg(long, value_parser = parse::<Variant>)]
        variant: Option<Variant>,
        /// Coefficient pair "A,B"; repeatable. Defaults to the six published
        /// rows at p=3 and every pair otherwise
        #[arg(long)]
        rows: Vec<String>,
    },
    /// Scheduling hierarchy
    #[command(subcommand)]
    Odpe(OdpeCommand),
    /// Graphs, series, contraction and steady states
    #[command(subcommand)]
    Analysis(AnalysisCommand),
}

#[derive(Subcommand)]
enum OdpeCommand {
    /// Build the three-layer topology
    Build {
        #[arg(long)]
        j: Option<u64>,
        #[arg(long)]
        digits: Option<u32>,
    },
    /// Average hopping over 1..=horizon
    Hops {
        #[arg(long)]
        j: Option<u64>,
        #[arg(long)]
        horizon: Option<Value>,
        /// target/range/denominator, e.g. sca/1..N/count
        #[arg(long, value_parser = parse::<HopConvention>)]
        convention: Option<HopConvention>,
    },
    /// Select the scheduling rule of a base
    Best {
        #[arg(long)]
        horizon: Option<Value>,
        #[arg(long, value_parser = parse::<HopConvention>)]
        convention: Option<HopConvention>,
    },
    /// Nodes whose orbit leaves [0, capacity]
    Capacity {
        #[arg(long)]
        j: Option<u64>,
        #[arg(long)]
        capacity: Value,
    },
    /// Score every hop convention against the published averages
    Calibrate {
        #[arg(long)]
        horizon: Option<Value>,
    },
}

#[derive(Subcommand)]
enum AnalysisCommand {
    /// Box-counting dimension of the one-step graph
    Fractal {
        #[command(flatten)]
        system: System,
        #[arg(long, default_value_t = 729)]
        points: Value,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6")]
        levels: Vec<u32>,
        /// polyline or points
        #[arg(long, value_parser = parse::<CoverMode>, default_value = "polyline")]
        mode: CoverMode,
    },
    /// Dump the (Y0, Y1) graph points
    Graph {
        #[command(flatten)]
        system: System,
        #[arg(long, default_value_t = 729)]
        points: Value,
    },
    /// Ratio test of the series with terms step(n)
    Series {
        #[command(flatten)]
        system: System,
        #[arg(long, default_value_t = 1000)]
        n_max: usize,
    },
    /// Contraction test of the raw rule
    Contraction {
        #[arg(long)]
        j: Option<u64>,
    },
    /// Steady points and their stability
    Steady {
        #[command(flatten)]
        system: System,
        #[arg(long, default_value_t = 2)]
        radius: Value,
    },
    /// Linear rules with 0 as unique steady point
    UniqueZero,
    /// Compare the type-I and type-II attractors of one rule
    Correspondence {
        #[command(flatten)]
        system: System,
    },
}

enum Failure {
    Usage(String),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_DOMAIN)
        }
    }
}

fn set_threads() -> Outcome {
    let Ok(raw) = std::env::var("IVT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| Failure::Usage(format!("IVT_THREADS={raw:?} is not a thread count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(format!("IVT_THREADS: {e}")))
}

fn base_config(cli: &Cli) -> Outcome<RunConfig> {
    let mut config = RunConfig::default();
    let mut scan_given = cli.scan_limit.is_some();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        let keys = config
            .apply_file(&text)
            .map_err(|e| Failure::Usage(e.to_string()))?;
        scan_given |= keys.iter().any(|k| k == "scan_limit");
    }
    set(&mut config.p, cli.p);
    set(&mut config.scan_limit, cli.scan_limit);
    set(&mut config.max_iter, cli.max_iter);
    set(&mut config.value_cap, cli.value_cap);
    set(&mut config.format, cli.format);
    // The default horizon is p^5 - 1 for whichever base was chosen.
    if !scan_given {
        config.scan_limit = config.base()?.pow(5).map(|v| v - 1).unwrap_or(Value::MAX);
    }
    Ok(config)
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl System {
    fn merge(&self, config: &mut RunConfig) {
        set(&mut config.j, self.j);
        set(&mut config.variant, self.variant);
        set(&mut config.mul, self.mul);
        set(&mut config.add, self.add);
    }
}

fn spec_of(config: &RunConfig) -> Outcome<AddsSpec> {
    let rule = IvtIndex::unary(config.base()?, config.j)?;
    Ok(AddsSpec::new(config.variant, rule, config.mul, config.add)?)
}

fn unary(config: &RunConfig) -> Outcome<IvtIndex> {
    Ok(IvtIndex::unary(config.base()?, config.j)?)
}

/// Writes a report in the configured format. Warnings go to stderr for the
/// non-JSON formats so they are never lost.
fn emit<T: Serialize>(
    report: Report<T>,
    csv: Option<ivt::Result<String>>,
    plain: impl FnOnce(&T) -> String,
) -> Outcome {
    let out = match report.config.format {
        Format::Json => report.to_json()?,
        Format::Csv => match csv {
            Some(text) => text?,
            None => {
                return Err(Failure::Usage(format!(
                    "csv output is not available for `{}`",
                    report.command
                )))
            }
        },
        Format::Plain => plain(&report.payload),
    };
    if report.config.format != Format::Json {
        for w in &report.warnings {
            eprintln!("warning: {w}");
        }
    }
    print!("{out}");
    if !out.ends_with('\n') {
        println!();
    }
    Ok(())
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>, sep: &str) -> String {
    items
        .into_iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(sep)
}

fn simple_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> ivt::Result<String> {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

fn run(cli: Cli) -> Outcome {
    set_threads()?;
    let mut config = base_config(&cli)?;
    match cli.command {
        Command::Apply { j, x } => {
            set(&mut config.j, j);
            config.validate()?;
            cmd_apply(config, &x)
        }
        Command::Rule { j, arity } => {
            set(&mut config.j, j);
            config.validate()?;
            cmd_rule(config, arity)
        }
        Command::Orbit { system, start } => {
            system.merge(&mut config);
            config.validate()?;
            cmd_orbit(config, start)
        }
        Command::Classify { system, strict } => {
            system.merge(&mut config);
            config.validate()?;
            cmd_classify(config, strict)
        }
        Command::Enumerate { strict } => {
            config.validate()?;
            cmd_enumerate(config, strict)
        }
        Command::Tables { variant, rows } => {
            set(&mut config.variant, variant);
            config.validate()?;
            cmd_tables(config, &rows)
        }
        Command::Odpe(cmd) => cmd_odpe(config, cmd),
        Command::Analysis(cmd) => cmd_analysis(config, cmd),
    }
}

fn cmd_apply(config: RunConfig, x: &[Value]) -> Outcome {
    #[derive(Serialize)]
    struct Applied {
        rule: IvtIndex,
        operands: Vec<Value>,
        value: Value,
    }
    let arity = x.len() as u32;
    let rule = IvtIndex::new(config.base()?, arity, config.j)?;
    let value = LocalRule::from_index(rule).apply_k(x)?;
    let payload = Applied {
        rule,
        operands: x.to_vec(),
        value,
    };
    let csv = simple_csv(&["value"], [vec![value.to_string()]]);
    emit(Report::new("apply", config, payload), Some(csv), |p| {
        p.value.to_string()
    })
}

fn cmd_rule(config: RunConfig, arity: u32) -> Outcome {
    #[derive(Serialize)]
    struct RuleTable {
        rule: IvtIndex,
        /// `(operand digits, image)`, first operand first.
        entries: Vec<(Vec<u8>, u8)>,
    }
    let base = config.base()?;
    let rule = IvtIndex::new(base, arity, config.j)?;
    let p = base.get() as usize;
    let entries: Vec<(Vec<u8>, u8)> = LocalRule::from_index(rule)
        .table()
        .iter()
        .enumerate()
        .map(|(slot, &image)| {
            let digits = (0..arity).map(|i| (slot / p.pow(i) % p) as u8).collect();
            (digits, image)
        })
        .collect();
    let csv = simple_csv(
        &["digits", "image"],
        entries
            .iter()
            .map(|(d, v)| vec![join(d, " "), v.to_string()]),
    );
    let payload = RuleTable { rule, entries };
    emit(Report::new("rule", config, payload), Some(csv), |p| {
        p.entries
            .iter()
            .map(|(d, v)| format!("{} -> {v}\n", join(d, " ")))
            .collect()
    })
}

fn cmd_orbit(config: RunConfig, start: Value) -> Outcome {
    let spec = spec_of(&config)?;
    let orbit = adds_orbit(&spec, start, config.limits())?;
    let attractor = if orbit.converged() {
        Some(attractor_of(&orbit)?)
    } else {
        None
    };
    #[derive(Serialize)]
    struct OrbitReport {
        spec: AddsSpec,
        orbit: ivt::dynamics::Orbit,
        attractor: Option<ivt::dynamics::AttractorInfo>,
    }
    let csv = simple_csv(
        &["step", "value", "in_cycle"],
        orbit
            .transient
            .iter()
            .map(|v| (v, false))
            .chain(orbit.cycle.iter().map(|v| (v, true)))
            .enumerate()
            .map(|(i, (v, c))| vec![i.to_string(), v.to_string(), c.to_string()]),
    );
    let payload = OrbitReport {
        spec,
        orbit,
        attractor,
    };
    emit(Report::new("orbit", config, payload), Some(csv), |p| {
        let o = &p.orbit;
        let path = join(o.transient.iter().chain(o.cycle.first()), " ");
        if o.converged() {
            format!("{path} | cycle: {}", join(&o.cycle, " "))
        } else {
            format!("{path} | {}", o.status)
        }
    })
}

fn cmd_classify(config: RunConfig, strict: bool) -> Outcome {
    let spec = spec_of(&config)?;
    let scan = if strict {
        config.scan().strict()
    } else {
        config.scan()
    };
    #[derive(Serialize)]
    struct Verdict {
        spec: AddsSpec,
        scan_limit: Value,
        strict: bool,
        is_collatz_like: bool,
        classification: ivt::dynamics::Classification,
    }
    let classification = classify_adds(&spec, &scan)?;
    let payload = Verdict {
        spec,
        scan_limit: scan.scan_limit,
        strict,
        is_collatz_like: classification.is_collatz_like(),
        classification,
    };
    emit(Report::new("classify", config, payload), None, |v| {
        match (&v.classification.attractor, &v.classification.witness) {
            (Some(a), None) => format!("{}: Collatz-like, attractor {a}", v.spec),
            (_, Some(w)) => format!("{}: not Collatz-like ({w})", v.spec),
            (None, None) => format!("{}: not Collatz-like", v.spec),
        }
    })
}

fn cmd_enumerate(config: RunConfig, strict: bool) -> Outcome {
    let scan = if strict {
        config.scan().strict()
    } else {
        config.scan()
    };
    let census = enumerate_collatz_like(config.base()?, &scan)?;
    let warnings = census.warnings();
    let csv = simple_csv(&["j"], census.rules.iter().map(|j| vec![j.to_string()]));
    let report = Report::new("enumerate", config, census).with_warnings(warnings);
    emit(report, Some(csv), |c| {
        format!("{}\ncount {}", join(&c.rules, " "), c.count)
    })
}

fn parse_rows(rows: &[String]) -> Outcome<Vec<(Value, Value)>> {
    let mut out = Vec::new();
    for raw in rows {
        for pair in raw.split(';').filter(|s| !s.trim().is_empty()) {
            let parsed = pair
                .split_once(',')
                .and_then(|(m, a)| Some((m.trim().parse().ok()?, a.trim().parse().ok()?)));
            out.push(parsed.ok_or_else(|| {
                Failure::Usage(format!("--rows expects A,B pairs, got {pair:?}"))
            })?);
        }
    }
    Ok(out)
}

fn cmd_tables(config: RunConfig, rows: &[String]) -> Outcome {
    let base = config.base()?;
    let mut coefficients = parse_rows(rows)?;
    if coefficients.is_empty() {
        coefficients = if base.get() == 3 {
            PUBLISHED_ROWS.to_vec()
        } else {
            all_coefficients(base)
        };
    }
    let table = attractor_table(base, config.variant, &coefficients, &config.table())?;
    let diff = diff_against_golden(&table)?;
    let warnings = diff.as_ref().map(|d| d.warnings()).unwrap_or_default();
    let csv = table_csv(&table);
    #[derive(Serialize)]
    struct Tables {
        table: ivt::adds::AttractorTable,
        golden_diff: Option<ivt::report::GoldenDiff>,
    }
    let payload = Tables {
        table,
        golden_diff: diff,
    };
    let report = Report::new("tables", config, payload).with_warnings(warnings);
    emit(report, Some(csv), |t| table_plain(&t.table))
}

fn cmd_odpe(mut config: RunConfig, cmd: OdpeCommand) -> Outcome {
    match cmd {
        OdpeCommand::Build { j, digits } => {
            set(&mut config.j, j);
            set(&mut config.digit_budget, digits);
            config.validate()?;
            let topology = build_topology(unary(&config)?, config.digit_budget)?;
            let csv = topology.edges_csv();
            emit(
                Report::new("odpe build", config, topology),
                Some(csv),
                |t| {
                    let mut s = format!(
                        "sca: {}\nstations: {}\nsubstations: {}\n",
                        t.sca,
                        join(&t.stations, " "),
                        t.substations.len()
                    );
                    for (node, path) in &t.routes {
                        let _ = writeln!(s, "{node}: {}", join(path, " -> "));
                    }
                    s
                },
            )
        }
        OdpeCommand::Hops {
            j,
            horizon,
            convention,
        } => {
            set(&mut config.j, j);
            set(&mut config.horizon, horizon);
            set(&mut config.hop_convention, convention);
            config.validate()?;
            let stats = average_hopping(unary(&config)?, config.horizon, config.hop_convention)?;
            let csv = simple_csv(
                &["node", "hops"],
                stats
                    .per_node
                    .iter()
                    .map(|(n, h)| vec![n.to_string(), h.to_string()]),
            );
            emit(Report::new("odpe hops", config, stats), Some(csv), |s| {
                format!(
                    "average hopping {} = {:.2} ({} hops / {}), convention {}",
                    s.average_hopping, s.average, s.total_hops, s.denominator, s.convention
                )
            })
        }
        OdpeCommand::Best {
            horizon,
            convention,
        } => {
            set(&mut config.horizon, horizon);
            set(&mut config.hop_convention, convention);
            config.validate()?;
            let best = select_best_rule(config.base()?, config.horizon, config.hop_convention)?;
            let mut warnings = Vec::new();
            if best.best != best.expected {
                warnings.push(format!(
                    "selected j={} but p^(p-1)-1 = {}",
                    best.best, best.expected
                ));
            }
            let csv = simple_csv(
                &["j", "average_hopping"],
                best.hops
                    .iter()
                    .map(|(j, q)| vec![j.to_string(), format!("{:.6}", q.as_f64())]),
            );
            let report = Report::new("odpe best", config, best).with_warnings(warnings);
            emit(report, Some(csv), |b| {
                format!(
                    "best rule: {}\nsingle zero digit: {}\nzero digit p-1: {}\naverages: {}",
                    b.best,
                    join(&b.single_zero_digit, " "),
                    join(&b.top_digit_zero, " "),
                    join(
                        b.hops.iter().map(|(j, q)| format!("{j}={:.2}", q.as_f64())),
                        " "
                    )
                )
            })
        }
        OdpeCommand::Capacity { j, capacity } => {
            set(&mut config.j, j);
            config.validate()?;
            let policy = capacity_check(unary(&config)?, capacity)?;
            let csv = simple_csv(
                &["node", "first_above"],
                policy
                    .excluded
                    .iter()
                    .map(|e| vec![e.node.to_string(), e.first_above.to_string()]),
            );
            emit(
                Report::new("odpe capacity", config, policy),
                Some(csv),
                |c| {
                    let list = join(
                        c.excluded
                            .iter()
                            .map(|e| format!("{}->{}", e.node, e.first_above)),
                        " ",
                    );
                    format!(
                        "capacity {}: {} excluded {list}",
                        c.capacity,
                        c.excluded.len()
                    )
                },
            )
        }
        OdpeCommand::Calibrate { horizon } => {
            set(&mut config.horizon, horizon);
            config.validate()?;
            let cal = calibrate_hop_convention(config.horizon)?;
            let warnings = cal.warnings();
            let csv = simple_csv(
                &["convention", "j", "measured", "published", "residual"],
                cal.rows.iter().flat_map(|r| {
                    r.values.iter().map(move |(j, got, want, res)| {
                        vec![
                            r.convention.to_string(),
                            j.to_string(),
                            format!("{got:.4}"),
                            format!("{want:.2}"),
                            format!("{res:.4}"),
                        ]
                    })
                }),
            );
            let report = Report::new("odpe calibrate", config, cal).with_warnings(warnings);
            emit(report, Some(csv), |c| {
                let mut s = String::new();
                for r in &c.rows {
                    let vals = join(
                        r.values
                            .iter()
                            .map(|(j, got, _, _)| format!("j={j}:{got:.2}")),
                        " ",
                    );
                    let _ = writeln!(
                        s,
                        "{:<20} {vals} max residual {:.2}",
                        r.convention.to_string(),
                        r.max_residual
                    );
                }
                let _ = writeln!(s, "nearest: {}", c.nearest);
                s
            })
        }
    }
}

fn cmd_analysis(mut config: RunConfig, cmd: AnalysisCommand) -> Outcome {
    match cmd {
        AnalysisCommand::Fractal {
            system,
            points,
            levels,
            mode,
        } => {
            system.merge(&mut config);
            config.validate()?;
            let sample = graph_points(&spec_of(&config)?, points)?;
            let fit = box_dimension(&sample, &levels, mode)?;
            let csv = fit.to_csv();
            emit(
                Report::new("analysis fractal", config, fit),
                Some(csv),
                |f| {
                    format!(
                        "dimension {:.4} ({} cover, levels {}, residual {:.4})",
                        f.dimension,
                        match f.mode {
                            CoverMode::Points => "points",
                            CoverMode::Polyline => "polyline",
                        },
                        join(&f.levels, ","),
                        f.fit_residual
                    )
                },
            )
        }
        AnalysisCommand::Graph { system, points } => {
            system.merge(&mut config);
            config.validate()?;
            let sample = graph_points(&spec_of(&config)?, points)?;
            let csv = sample.to_csv();
            emit(
                Report::new("analysis graph", config, sample),
                Some(csv),
                |s| s.points.iter().map(|(x, y)| format!("{x} {y}\n")).collect(),
            )
        }
        AnalysisCommand::Series { system, n_max } => {
            system.merge(&mut config);
            config.validate()?;
            let series = ratio_sequence(&spec_of(&config)?, n_max)?;
            let csv = series.to_csv();
            emit(
                Report::new("analysis series", config, series),
                Some(csv),
                |s| {
                    let limit = s
                        .limit_estimate
                        .map(|l| format!("{l:.6}"))
                        .unwrap_or_else(|| "none".into());
                    let spread = s
                        .tail_spread
                        .map(|l| format!("{l:.6}"))
                        .unwrap_or_else(|| "none".into());
                    format!("verdict {}, limit {limit}, tail spread {spread}", s.verdict)
                },
            )
        }
        AnalysisCommand::Contraction { j } => {
            set(&mut config.j, j);
            config.validate()?;
            let verdict = is_contraction(unary(&config)?, config.scan_limit)?;
            emit(
                Report::new("analysis contraction", config, verdict),
                None,
                |v| match v.witness {
                    Some((x, y)) => format!(
                        "contraction: {}, max quotient {}, witness ({x}, {y})",
                        v.is_contraction, v.max_quotient
                    ),
                    None => format!(
                        "contraction: {}, max quotient {}",
                        v.is_contraction, v.max_quotient
                    ),
                },
            )
        }
        AnalysisCommand::Steady { system, radius } => {
            system.merge(&mut config);
            config.validate()?;
            let spec = spec_of(&config)?;
            let steady = steady_states(&spec, config.scan_limit)?;
            let stability = match steady.unique_point() {
                Some(y) => Some(stability_report(&spec, y, radius, config.scan_limit)?),
                None => None,
            };
            #[derive(Serialize)]
            struct Steady {
                steady: ivt::adds::SteadyStateReport,
                stability: Option<ivt::adds::StabilityReport>,
            }
            let payload = Steady { steady, stability };
            emit(Report::new("analysis steady", config, payload), None, |s| {
                let mut out = format!("steady points: {}\n", join(&s.steady.steady_points, " "));
                if let Some(r) = &s.stability {
                    let _ = writeln!(
                        out,
                        "local max quotient {} (stable: {}), global max quotient {} (stable: {})",
                        r.local_max_quotient,
                        r.locally_stable,
                        r.global_max_quotient,
                        r.globally_stable
                    );
                }
                out
            })
        }
        AnalysisCommand::UniqueZero => {
            config.validate()?;
            let result = count_unique_zero_steady(config.base()?, &config.scan())?;
            let mut warnings = Vec::new();
            if result.count != result.expected {
                warnings.push(format!(
                    "measured {} rules, p^(p-2) = {}",
                    result.count, result.expected
                ));
            }
            let report =
                Report::new("analysis unique-zero", config, result).with_warnings(warnings);
            emit(report, None, |r| {
                format!("count {}: {}", r.count, join(&r.rules, " "))
            })
        }
        AnalysisCommand::Correspondence { system } => {
            system.merge(&mut config);
            config.validate()?;
            let record = verify_type_correspondence(
                unary(&config)?,
                config.mul,
                config.add,
                &config.scan(),
            )?;
            emit(
                Report::new("analysis correspondence", config, record),
                None,
                |r| {
                    format!(
                        "type I attractor {}, type II attractor {}, relation holds: {}",
                        r.type1_attractor,
                        r.type2_attractor
                            .map(|v| v.to_string())
                            .unwrap_or_else(|| "none".into()),
                        r.relation_holds
                    )
                },
            )
        }
    }
}
