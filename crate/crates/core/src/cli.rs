//! Command-line front end.
//!
//! Each query produces a line `<query>\t<True|False>`, optionally followed by
//! a statistics line and a witness line. Exit status: 0 when every query was
//! decided, 2 on syntax or validation errors, 3 on unreadable files, 4 when a
//! resource limit left some query undecided, 5 when `--selftest` finds the
//! configurations disagreeing.

use std::ffi::OsString;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use thiserror::Error;

use crate::explorer::{check, Limit, Options, Order, Outcome, Subsumption, Verdict};
use crate::model::{ClockConstraint, LocationId, Network};
use crate::parser::{self, print_query, Diagnostic, Query, StatePattern};
use crate::zone::{DbmBackend, FormulaBackend, ZoneBackend};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SYNTAX: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;
pub const EXIT_DIVERGENCE: i32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Dbm,
    Formula,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OrderArg {
    Dfs,
    Bfs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SubsumeArg {
    Equal,
    Include,
}

/// Reachability queries over networks of timed automata.
#[derive(Debug, Parser)]
#[command(name = "tareach", version)]
pub struct Args {
    /// Network specification file.
    spec: PathBuf,
    #[arg(long, value_enum, default_value = "dbm")]
    backend: Backend,
    #[arg(long, value_enum, default_value = "dfs")]
    order: OrderArg,
    #[arg(long = "subsume", value_enum, default_value = "include")]
    subsume: SubsumeArg,
    /// Disable max-constant extrapolation (exploration may not terminate).
    #[arg(long)]
    no_extrapolate: bool,
    /// Equality subsumption without extrapolation.
    #[arg(long, conflicts_with_all = ["subsume", "no_extrapolate"])]
    faithful: bool,
    /// Print stored/popped zone counts and wall time after each verdict.
    #[arg(long)]
    stats: bool,
    /// Print the label sequence reaching the target for `True` verdicts.
    #[arg(long)]
    witness: bool,
    /// Give up on a query after storing this many zones.
    #[arg(long, value_name = "N")]
    max_zones: Option<usize>,
    /// Give up on a query after this many seconds.
    #[arg(long, value_name = "S")]
    timeout: Option<f64>,
    /// Query text; may be repeated.
    #[arg(long = "query", value_name = "TEXT")]
    queries: Vec<String>,
    /// File with one query per line.
    #[arg(long = "queries", value_name = "FILE")]
    query_file: Option<PathBuf>,
    /// Check that both backends and both search orders agree on every query.
    /// Without queries, targets every location vector of the product from
    /// the first location of each automaton.
    #[arg(long)]
    selftest: bool,
}

impl Args {
    pub fn options(&self) -> Options {
        if self.faithful {
            return Options {
                order: self.order.into(),
                max_zones: self.max_zones,
                timeout: self.timeout.map(Duration::from_secs_f64),
                ..Options::faithful()
            };
        }
        Options {
            order: self.order.into(),
            subsumption: match self.subsume {
                SubsumeArg::Equal => Subsumption::Equal,
                SubsumeArg::Include => Subsumption::Include,
            },
            extrapolate: !self.no_extrapolate,
            max_zones: self.max_zones,
            timeout: self.timeout.map(Duration::from_secs_f64),
        }
    }
}

impl From<OrderArg> for Order {
    fn from(o: OrderArg) -> Self {
        match o {
            OrderArg::Dfs => Order::Dfs,
            OrderArg::Bfs => Order::Bfs,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}", render_diagnostics(origin, diagnostics))]
    Syntax {
        origin: String,
        diagnostics: Vec<Diagnostic>,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => EXIT_IO,
            CliError::Syntax { .. } => EXIT_SYNTAX,
        }
    }
}

fn render_diagnostics(origin: &str, diagnostics: &[Diagnostic]) -> String {
    let lines: Vec<String> = diagnostics
        .iter()
        .map(|d| format!("{origin}:{d}"))
        .collect();
    lines.join("\n")
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.into(),
        source,
    })
}

pub fn load_network(path: &Path) -> Result<Network, CliError> {
    let text = read(path)?;
    parser::parse_spec(&text).map_err(|diagnostics| CliError::Syntax {
        origin: path.display().to_string(),
        diagnostics,
    })
}

/// A query as written by the user, with its parsed form.
#[derive(Debug, Clone)]
pub struct QueryItem {
    pub text: String,
    pub query: Query,
}

fn parse_lines(
    net: &Network,
    origin: &str,
    lines: Vec<(usize, String)>,
) -> Result<Vec<QueryItem>, CliError> {
    let mut items = Vec::new();
    let mut diagnostics = Vec::new();
    for (line, text) in lines {
        match parser::parse_query(&text, net) {
            Ok(query) => items.push(QueryItem { text, query }),
            Err(ds) => diagnostics.extend(ds.into_iter().map(|mut d| {
                d.pos.line = line;
                d
            })),
        }
    }
    if diagnostics.is_empty() {
        Ok(items)
    } else {
        Err(CliError::Syntax {
            origin: origin.into(),
            diagnostics,
        })
    }
}

/// Source: the first declared location of every automaton, unconstrained.
/// Targets: every location vector of the product.
pub fn generated_suite(net: &Network) -> Vec<QueryItem> {
    let source = StatePattern {
        locations: net.automata.iter().map(|a| a.locations[0]).collect(),
        constraint: ClockConstraint::truth(),
    };
    let mut vectors: Vec<Vec<LocationId>> = vec![Vec::new()];
    for a in &net.automata {
        vectors = vectors
            .into_iter()
            .flat_map(|v| {
                a.locations.iter().map(move |l| {
                    let mut v = v.clone();
                    v.push(*l);
                    v
                })
            })
            .collect();
    }
    vectors
        .into_iter()
        .map(|locations| {
            let target = StatePattern {
                locations,
                constraint: ClockConstraint::truth(),
            };
            let query = Query {
                source: source.clone(),
                target,
            };
            QueryItem {
                text: print_query(net, &query),
                query,
            }
        })
        .collect()
}

pub fn run_query(net: &Network, backend: Backend, options: Options, query: &Query) -> Outcome {
    let clocks = net.clock_count();
    match backend {
        Backend::Dbm => check(net, DbmBackend::new(clocks), options, query),
        Backend::Formula => check(net, FormulaBackend::new(clocks), options, query),
    }
}

fn describe_limit(limit: Limit) -> String {
    match limit {
        Limit::Zones(n) => format!("stored-zone limit {n} reached"),
        Limit::Time(d) => format!("time limit {:.2} s reached", d.as_secs_f64()),
    }
}

fn verdict_word(v: &Verdict) -> &'static str {
    match v {
        Verdict::True => "True",
        Verdict::False => "False",
        Verdict::Inconclusive(_) => "Inconclusive",
    }
}

/// Result of running queries under several configurations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelftestReport {
    pub agreed: usize,
    pub total: usize,
    /// First query (in suite order) whose verdicts differ, with the verdict
    /// of every configuration.
    pub divergence: Option<(String, Vec<(String, Verdict)>)>,
    pub inconclusive: usize,
}

/// Runs every query under `a` and `b`, each with both search orders.
pub fn selftest<A, B>(
    net: &Network,
    items: &[QueryItem],
    a: A,
    b: B,
    options: Options,
) -> SelftestReport
where
    A: ZoneBackend + Clone,
    B: ZoneBackend + Clone,
{
    let results: Vec<Vec<(String, Verdict)>> = items
        .par_iter()
        .map(|item| {
            let mut verdicts = Vec::new();
            for order in [Order::Dfs, Order::Bfs] {
                let opts = Options { order, ..options };
                let tag = |name: &str| format!("{name}/{order:?}").to_lowercase();
                let va = check(net, a.clone(), opts, &item.query).verdict;
                verdicts.push((tag(a.name()), va));
                let vb = check(net, b.clone(), opts, &item.query).verdict;
                verdicts.push((tag(b.name()), vb));
            }
            verdicts
        })
        .collect();
    let mut report = SelftestReport {
        agreed: 0,
        total: items.len(),
        divergence: None,
        inconclusive: 0,
    };
    for (item, verdicts) in items.iter().zip(results) {
        if verdicts
            .iter()
            .any(|(_, v)| matches!(v, Verdict::Inconclusive(_)))
        {
            report.inconclusive += 1;
        }
        if verdicts.iter().all(|(_, v)| *v == verdicts[0].1) {
            report.agreed += 1;
        } else if report.divergence.is_none() {
            report.divergence = Some((item.text.clone(), verdicts));
        }
    }
    report
}

pub fn write_selftest(report: &SelftestReport, out: &mut dyn Write) -> io::Result<i32> {
    writeln!(out, "agree: {}/{}", report.agreed, report.total)?;
    if let Some((query, verdicts)) = &report.divergence {
        let parts: Vec<String> = verdicts
            .iter()
            .map(|(tag, v)| format!("{tag}={}", verdict_word(v)))
            .collect();
        writeln!(out, "divergence: {query}\t{}", parts.join(" "))?;
        return Ok(EXIT_DIVERGENCE);
    }
    if report.inconclusive > 0 {
        writeln!(out, "inconclusive: {}", report.inconclusive)?;
        return Ok(EXIT_INCONCLUSIVE);
    }
    Ok(EXIT_OK)
}

fn gather_queries(
    args: &Args,
    net: &Network,
    stdin: &mut dyn Read,
) -> Result<Vec<QueryItem>, CliError> {
    let mut items = parse_lines(
        net,
        "--query",
        args.queries
            .iter()
            .map(|q| (1, q.trim().to_owned()))
            .collect(),
    )?;
    if let Some(path) = &args.query_file {
        let text = read(path)?;
        items.extend(parse_lines(
            net,
            &path.display().to_string(),
            parser::query_lines(&text),
        )?);
    }
    if items.is_empty() && args.query_file.is_none() {
        if args.selftest {
            return Ok(generated_suite(net));
        }
        let mut text = String::new();
        stdin
            .read_to_string(&mut text)
            .map_err(|source| CliError::Io {
                path: "<stdin>".into(),
                source,
            })?;
        items = parse_lines(net, "<stdin>", parser::query_lines(&text))?;
    }
    Ok(items)
}

/// Runs the front end on parsed arguments and returns the exit status.
pub fn run(
    args: &Args,
    stdin: &mut dyn Read,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> io::Result<i32> {
    let loaded = load_network(&args.spec).and_then(|net| {
        let items = gather_queries(args, &net, stdin)?;
        Ok((net, items))
    });
    let (net, items) = match loaded {
        Ok(x) => x,
        Err(e) => {
            writeln!(err, "{e}")?;
            return Ok(e.exit_code());
        }
    };
    let options = args.options();
    let clocks = net.clock_count();

    if args.selftest {
        let report = selftest(
            &net,
            &items,
            DbmBackend::new(clocks),
            FormulaBackend::new(clocks),
            options,
        );
        return write_selftest(&report, out);
    }

    let outcomes: Vec<Outcome> = items
        .par_iter()
        .map(|item| run_query(&net, args.backend, options, &item.query))
        .collect();
    let mut status = EXIT_OK;
    for (item, outcome) in items.iter().zip(outcomes) {
        match &outcome.verdict {
            Verdict::Inconclusive(limit) => {
                writeln!(
                    err,
                    "{}: inconclusive: {}",
                    item.text,
                    describe_limit(*limit)
                )?;
                status = EXIT_INCONCLUSIVE;
            }
            v => writeln!(out, "{}\t{}", item.text, verdict_word(v))?,
        }
        if args.stats {
            let s = outcome.stats;
            writeln!(
                out,
                "stored: {}\tpopped: {}\ttime: {:.2} s",
                s.stored,
                s.popped,
                s.elapsed.as_secs_f64()
            )?;
        }
        if args.witness {
            if let Some(w) = &outcome.witness {
                let labels: Vec<&str> = w.iter().map(|s| net.label_name(s.label)).collect();
                writeln!(out, "witness: {}", labels.join(" "))?;
            }
        }
    }
    Ok(status)
}

/// Parses `argv` and runs; usage errors are reported by clap.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let stdin = io::stdin();
    let stdout = io::stdout();
    let stderr = io::stderr();
    match run(
        &args,
        &mut stdin.lock(),
        &mut stdout.lock(),
        &mut stderr.lock(),
    ) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("tareach: {e}");
            EXIT_IO
        }
    }
}
