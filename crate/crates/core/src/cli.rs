//! Command-line front end.
//!
//! Every command writes a report that embeds the tool version and the fully
//! resolved configuration (including the seed), so identical inputs and flags
//! produce byte-identical output. Exit codes: 0 on success, 1 on validation
//! failures, 2 on I/O failures.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::bias::{apply_correction, BiasTerms, SampleSizeConvention};
use crate::error::Error;
use crate::histogram::Histogram;
use crate::ingestion::{
    build_sequences, parse_event_log, partition_group_individual, write_jsonl, CohortConfig, DedupPolicy,
    EventRecord, LogFormat, RowDiagnostic,
};
use crate::oracle::{simulate_events, SimulationConfig};
use crate::robustness::markoff_sweep;
use crate::seeds::{derive_seed, DOMAIN_USER};
use crate::sequence::{fit_models, report_from_models, ActivitySequence, EstimatorMode};
use crate::significance::{bootstrap_mi_test, compare_groups, BootstrapOptions, BootstrapResult, TTestKind};

pub const TOOL_NAME: &str = "seqpredict";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "seqpredict", version, about = "Predictability of discrete event sequences")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-user entropies and mutual information.
    Analyze(AnalysisArgs),
    /// Per-user shuffle test of the mutual information.
    Bootstrap(AnalysisArgs),
    /// Shuffle tests after randomly hiding a growing fraction of each sequence.
    Markoff(MarkoffArgs),
    /// Gap statistics of individual versus group activity streams.
    Compare(AnalysisArgs),
    /// Write a synthetic event log from a Markov cohort description.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Jsonl,
    Csv,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum DedupArg {
    #[default]
    KeepAll,
    CollapseEqualTimestamps,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    #[default]
    Split,
    Positions,
    Transitions,
}

#[derive(Debug, Clone, Args)]
pub struct AnalysisArgs {
    /// Event log(s); `-` reads standard input.
    #[arg(long, short, required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    /// Input format; inferred from the file extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = crate::significance::DEFAULT_REPLICATES)]
    pub replicates: usize,
    #[arg(long, default_value_t = crate::ingestion::DEFAULT_MIN_EVENTS)]
    pub min_events: usize,
    /// Use bias-corrected mutual information (default).
    #[arg(long, overrides_with = "raw")]
    pub corrected: bool,
    /// Use plug-in mutual information without bias correction.
    #[arg(long, overrides_with = "corrected")]
    pub raw: bool,
    /// Measure MI against the successor marginal.
    #[arg(long, overrides_with = "full_mode")]
    pub aligned: bool,
    /// Measure MI against the marginal over all positions (default).
    #[arg(long, overrides_with = "aligned")]
    pub full_mode: bool,
    /// Analyze group and individual activity as separate streams.
    #[arg(long)]
    pub split_groups: bool,
    #[arg(long, value_enum, default_value_t)]
    pub dedup: DedupArg,
    /// Observation count used in the bias terms.
    #[arg(long, value_enum, default_value_t)]
    pub convention: ConventionArg,
    /// Clamp corrected values to [0, corrected h1] in tables.
    #[arg(long)]
    pub clamp: bool,
    /// Use Welch's unequal-variance t-test instead of the pooled test.
    #[arg(long)]
    pub welch: bool,
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub output_format: OutputFormat,
}

#[derive(Debug, Clone, Args)]
pub struct MarkoffArgs {
    #[command(flatten)]
    pub common: AnalysisArgs,
    /// Comma-separated rates or a `start:end:step` range.
    #[arg(long, default_value = "0.0:0.9:0.1")]
    pub rates: String,
    /// Only sweep this user.
    #[arg(long)]
    pub user: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// JSON cohort description or a single Markov spec.
    #[arg(long, short)]
    pub config: PathBuf,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// Failure of a CLI run, split by exit code.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(m) => CliError::Io(m),
            other => CliError::Validation(other.to_string()),
        }
    }
}

fn io_err(path: &Path, e: io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// The resolved configuration embedded in every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub inputs: Vec<String>,
    pub format: Option<FormatArg>,
    pub seed: u64,
    pub replicates: usize,
    pub rates: Option<Vec<f64>>,
    pub min_events: usize,
    pub corrected: bool,
    pub mode: EstimatorMode,
    pub split_groups: bool,
    pub dedup_policy: DedupPolicy,
    pub convention: SampleSizeConvention,
    pub clamp: bool,
    pub t_test: TTestKind,
    pub bins: usize,
    pub user: Option<String>,
    /// Destination only; left out of reports so the same run written to two
    /// places yields identical bytes.
    #[serde(skip)]
    pub output: Option<String>,
    pub output_format: OutputFormat,
}

impl RunConfig {
    fn from_args(command: &'static str, a: &AnalysisArgs) -> Self {
        RunConfig {
            command,
            inputs: a.input.iter().map(|p| p.display().to_string()).collect(),
            format: a.format,
            seed: a.seed,
            replicates: a.replicates,
            rates: None,
            min_events: a.min_events,
            corrected: !a.raw,
            mode: if a.aligned { EstimatorMode::Aligned } else { EstimatorMode::Full },
            split_groups: a.split_groups,
            dedup_policy: match a.dedup {
                DedupArg::KeepAll => DedupPolicy::KeepAll,
                DedupArg::CollapseEqualTimestamps => DedupPolicy::CollapseEqualTimestamps,
            },
            convention: match a.convention {
                ConventionArg::Split => SampleSizeConvention::Split,
                ConventionArg::Positions => SampleSizeConvention::Positions,
                ConventionArg::Transitions => SampleSizeConvention::Transitions,
            },
            clamp: a.clamp,
            t_test: if a.welch { TTestKind::Welch } else { TTestKind::Pooled },
            bins: a.bins,
            user: None,
            output: a.output.as_ref().map(|p| p.display().to_string()),
            output_format: a.output_format,
        }
    }

    fn cohort(&self) -> CohortConfig {
        CohortConfig {
            min_events: self.min_events,
            split_groups: self.split_groups,
            dedup_policy: self.dedup_policy,
        }
    }

    fn bootstrap_options(&self, seed: u64) -> BootstrapOptions {
        BootstrapOptions {
            replicates: self.replicates,
            seed,
            corrected: self.corrected,
            mode: self.mode,
            convention: self.convention,
        }
    }
}

/// Parses `a,b,c` or `start:end:step` (inclusive of `end`).
pub fn parse_rates(spec: &str) -> Result<Vec<f64>, String> {
    let spec = spec.trim();
    if let [start, end, step] = spec.split(':').collect::<Vec<_>>()[..] {
        let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("bad rate range {spec:?}: {e}"));
        let (start, end, step) = (parse(start)?, parse(end)?, parse(step)?);
        if step.is_nan() || step <= 0.0 || end < start {
            return Err(format!("bad rate range {spec:?}"));
        }
        let count = ((end - start) / step + 1e-9).floor() as usize;
        // rounded to 12 decimals so 0.1 * 3 prints as 0.3
        return Ok((0..=count)
            .map(|k| ((start + step * k as f64) * 1e12).round() / 1e12)
            .collect());
    }
    spec.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| format!("bad rate {s:?}: {e}")))
        .collect()
}

/// A value in an output table.
#[derive(Debug, Clone)]
pub enum Cell {
    Str(String),
    Int(i64),
    Float(f64),
    Bool(bool),
    Missing,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Str(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format!("{x:.6}"),
            Cell::Bool(b) => b.to_string(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Str(s) => json!(s),
            Cell::Int(i) => json!(i),
            Cell::Float(x) => json!(x),
            Cell::Bool(b) => json!(b),
            Cell::Missing => Value::Null,
        }
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Str(s.to_owned())
    }
}
impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Str(s)
    }
}
impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}
impl From<u64> for Cell {
    // seeds are written as text so they survive JSON consumers with f64 numbers
    fn from(i: u64) -> Self {
        Cell::Str(i.to_string())
    }
}
impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}
impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}
impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Missing, Into::into)
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(name: impl Into<String>, columns: &[&'static str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn to_json(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> =
                    self.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.json())).collect();
                Value::Object(obj)
            })
            .collect();
        Value::Array(rows)
    }
}

fn histogram_table(name: &str, hists: &[(&str, &Histogram)]) -> Table {
    let mut t = Table::new(name, &["series", "bin", "lower", "upper", "count", "density"]);
    for (series, h) in hists {
        for (k, (&count, &density)) in h.counts.iter().zip(&h.density).enumerate() {
            t.push(vec![
                (*series).into(),
                k.into(),
                h.edges[k].into(),
                h.edges[k + 1].into(),
                count.into(),
                density.into(),
            ]);
        }
    }
    t
}

/// Output of one command before serialization.
#[derive(Debug)]
pub struct Report {
    pub config: RunConfig,
    pub summary: Map<String, Value>,
    pub tables: Vec<Table>,
    pub warnings: Vec<String>,
    pub diagnostics: Vec<RowDiagnostic>,
}

impl Report {
    fn new(config: RunConfig) -> Self {
        Report {
            config,
            summary: Map::new(),
            tables: Vec::new(),
            warnings: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => self.render_json(),
            OutputFormat::Csv => self.render_csv(),
        }
    }

    fn render_json(&self) -> String {
        let tables: Map<String, Value> = self.tables.iter().map(|t| (t.name.clone(), t.to_json())).collect();
        let doc = json!({
            "tool": TOOL_NAME,
            "version": TOOL_VERSION,
            "command": self.config.command,
            "seed": self.config.seed.to_string(),
            "config": self.config,
            "warnings": self.warnings,
            "input_diagnostics": self.diagnostics,
            "summary": self.summary,
            "tables": tables,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# tool: {TOOL_NAME} {TOOL_VERSION}\n"));
        out.push_str(&format!("# seed: {}\n", self.config.seed));
        out.push_str(&format!(
            "# config: {}\n",
            serde_json::to_string(&self.config).expect("config serializes")
        ));
        for w in &self.warnings {
            out.push_str(&format!("# warning: {w}\n"));
        }
        for (k, v) in &self.summary {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        for table in &self.tables {
            out.push_str(&format!("\n# table: {}\n", table.name));
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&table.columns).expect("in-memory write");
            for row in &table.rows {
                w.write_record(row.iter().map(Cell::csv)).expect("in-memory write");
            }
            out.push_str(&String::from_utf8(w.into_inner().expect("flush")).expect("utf-8"));
        }
        out
    }
}

fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    if path.as_os_str() == "-" {
        io::stdin().read_to_end(&mut buf).map_err(|e| io_err(path, e))?;
    } else {
        File::open(path)
            .and_then(|mut f| f.read_to_end(&mut buf))
            .map_err(|e| io_err(path, e))?;
    }
    Ok(buf)
}

fn load_events(config: &RunConfig, inputs: &[PathBuf], report: &mut Report) -> Result<Vec<EventRecord>, CliError> {
    let mut events = Vec::new();
    for path in inputs {
        let format = match config.format {
            Some(FormatArg::Jsonl) => LogFormat::Jsonl,
            Some(FormatArg::Csv) => LogFormat::Csv,
            None => LogFormat::from_path(path).ok_or_else(|| {
                CliError::Validation(format!("cannot infer format of {}; pass --format", path.display()))
            })?,
        };
        let bytes = read_input(path)?;
        let parsed = parse_event_log(&bytes[..], format)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        for d in &parsed.diagnostics {
            eprintln!("warning: {}:{}: {}", path.display(), d.line, d.message);
        }
        report.diagnostics.extend(parsed.diagnostics);
        events.extend(parsed.records);
    }
    Ok(events)
}

/// Sequences to analyze: one per user, or one per non-empty stream when
/// splitting group from individual activity.
fn load_sequences(config: &RunConfig, inputs: &[PathBuf], report: &mut Report) -> Result<Vec<ActivitySequence>, CliError> {
    config.cohort().validate()?;
    let events = load_events(config, inputs, report)?;
    let seqs: Vec<ActivitySequence> = if config.split_groups {
        partition_group_individual(&events, &config.cohort())
            .into_values()
            .flat_map(|p| [p.individual, p.group])
            .flatten()
            .collect()
    } else {
        build_sequences(&events, &config.cohort()).into_values().collect()
    };
    if seqs.is_empty() {
        let w = format!("no sequence has at least {} events", config.min_events);
        eprintln!("warning: {w}");
        report.warnings.push(w);
    }
    Ok(seqs)
}

fn stable_hash(s: &str) -> u64 {
    // FNV-1a
    s.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Bootstrap seed for one sequence; depends only on the run seed, the user
/// and the stream kind.
pub fn sequence_seed(run_seed: u64, seq: &ActivitySequence) -> u64 {
    let key = format!("{}\u{0}{}", seq.source_user(), seq.kind());
    derive_seed(run_seed, DOMAIN_USER, stable_hash(&key))
}

fn cmd_analyze(config: RunConfig, inputs: &[PathBuf]) -> Result<Report, CliError> {
    let mut report = Report::new(config);
    let config = &report.config.clone();
    let seqs = load_sequences(config, inputs, &mut report)?;
    let analyses = seqs
        .par_iter()
        .map(|seq| {
            let (uni, bi) = fit_models(seq)?;
            let raw = report_from_models(&uni, &bi)?;
            let terms = BiasTerms::from_models(&uni, &bi, config.convention)?;
            apply_correction(&raw, &terms, config.clamp)
        })
        .collect::<Result<Vec<_>, Error>>()?;

    let mut table = Table::new(
        "users",
        &[
            "user", "kind", "n", "M", "h0", "h1", "h2", "mi", "h1_aligned", "mi_aligned", "h1_corrected",
            "h2_corrected", "mi_corrected", "mi_aligned_corrected", "mi_exceeds_h1",
        ],
    );
    for (seq, r) in seqs.iter().zip(&analyses) {
        let c = r.corrected.expect("corrected values present");
        table.push(vec![
            seq.source_user().into(),
            seq.kind().as_str().into(),
            r.n.into(),
            r.alphabet_size.into(),
            r.h0.into(),
            r.h1.into(),
            r.h2.into(),
            r.mi.into(),
            r.h1_aligned.into(),
            r.mi_aligned.into(),
            c.h1.into(),
            c.h2.into(),
            c.mi.into(),
            c.mi_aligned.into(),
            c.mi_exceeds_h1.into(),
        ]);
    }

    let h0: Vec<f64> = analyses.iter().map(|r| r.h0).collect();
    let h1: Vec<f64> = analyses.iter().map(|r| r.h1).collect();
    let h2: Vec<f64> = analyses.iter().map(|r| r.h2).collect();
    let upper = h0.iter().copied().fold(0.0f64, f64::max).max(1.0);
    let range = Some((0.0, upper));
    let hists = [
        ("h0", Histogram::new(&h0, config.bins, range)),
        ("h1", Histogram::new(&h1, config.bins, range)),
        ("h2", Histogram::new(&h2, config.bins, range)),
    ];
    let refs: Vec<(&str, &Histogram)> = hists.iter().map(|(n, h)| (*n, h)).collect();

    report.summary.insert("sequences".into(), json!(seqs.len()));
    report.summary.insert(
        "h2_below_h1".into(),
        json!(analyses.iter().filter(|r| r.h2 < r.h1).count()),
    );
    report.tables.push(table);
    report.tables.push(histogram_table("entropy_histograms", &refs));
    Ok(report)
}

fn bootstrap_all(config: &RunConfig, seqs: &[ActivitySequence]) -> Result<Vec<(u64, BootstrapResult)>, CliError> {
    seqs.par_iter()
        .map(|seq| {
            let seed = sequence_seed(config.seed, seq);
            bootstrap_mi_test(seq, &config.bootstrap_options(seed)).map(|r| (seed, r))
        })
        .collect::<Result<Vec<_>, Error>>()
        .map_err(CliError::from)
}

const GAP_COLUMNS: [&str; 10] = ["user", "kind", "n", "M", "mi_true", "p025", "p975", "gap", "reject_null", "seed"];

/// Rows sorted by increasing gap, then user and kind.
fn gap_table(name: &str, seqs: &[ActivitySequence], results: &[(u64, BootstrapResult)]) -> Table {
    let mut order: Vec<usize> = (0..seqs.len()).collect();
    order.sort_by(|&a, &b| {
        results[a]
            .1
            .gap
            .total_cmp(&results[b].1.gap)
            .then_with(|| seqs[a].source_user().cmp(seqs[b].source_user()))
            .then_with(|| seqs[a].kind().cmp(&seqs[b].kind()))
    });
    let mut t = Table::new(name, &GAP_COLUMNS);
    for k in order {
        let (seq, (seed, r)) = (&seqs[k], &results[k]);
        t.push(vec![
            seq.source_user().into(),
            seq.kind().as_str().into(),
            seq.len().into(),
            seq.alphabet_size().into(),
            r.mi_true.into(),
            r.p025.into(),
            r.p975.into(),
            r.gap.into(),
            r.reject_null.into(),
            (*seed).into(),
        ]);
    }
    t
}

fn cmd_bootstrap(config: RunConfig, inputs: &[PathBuf]) -> Result<Report, CliError> {
    let mut report = Report::new(config);
    let config = &report.config.clone();
    let seqs = load_sequences(config, inputs, &mut report)?;
    let results = bootstrap_all(config, &seqs)?;
    let rejected = results.iter().filter(|(_, r)| r.reject_null).count();
    report.summary.insert("sequences".into(), json!(seqs.len()));
    report.summary.insert("rejected".into(), json!(rejected));
    report.tables.push(gap_table("users", &seqs, &results));
    Ok(report)
}

fn cmd_markoff(config: RunConfig, inputs: &[PathBuf]) -> Result<Report, CliError> {
    let rates = config.rates.clone().expect("rates resolved");
    let mut report = Report::new(config);
    let config = &report.config.clone();
    let mut seqs = load_sequences(config, inputs, &mut report)?;
    if let Some(user) = &config.user {
        seqs.retain(|s| s.source_user() == user);
        if seqs.is_empty() {
            return Err(CliError::Validation(format!("user {user:?} has no qualifying sequence")));
        }
    }
    let mut points = Table::new(
        "rates",
        &["user", "kind", "rate", "retained", "mi_true", "p025", "p975", "gap", "reject_null"],
    );
    let mut critical = Table::new("critical_rates", &["user", "kind", "n", "critical_rate", "seed"]);
    for seq in &seqs {
        let seed = sequence_seed(config.seed, seq);
        let profile = markoff_sweep(seq, &rates, &config.bootstrap_options(seed))?;
        for p in &profile.points {
            points.push(vec![
                seq.source_user().into(),
                seq.kind().as_str().into(),
                p.rate.into(),
                p.retained.into(),
                p.result.mi_true.into(),
                p.result.p025.into(),
                p.result.p975.into(),
                p.result.gap.into(),
                p.result.reject_null.into(),
            ]);
        }
        critical.push(vec![
            seq.source_user().into(),
            seq.kind().as_str().into(),
            seq.len().into(),
            profile.critical_rate.into(),
            seed.into(),
        ]);
    }
    report.summary.insert("sequences".into(), json!(seqs.len()));
    report.tables.push(points);
    report.tables.push(critical);
    Ok(report)
}

fn cmd_compare(mut config: RunConfig, inputs: &[PathBuf]) -> Result<Report, CliError> {
    config.split_groups = true;
    let mut report = Report::new(config);
    let config = &report.config.clone();
    config.cohort().validate()?;
    let events = load_events(config, inputs, &mut report)?;
    let pairs = partition_group_individual(&events, &config.cohort());
    let individual: Vec<ActivitySequence> = pairs.values().filter_map(|p| p.individual.clone()).collect();
    let group: Vec<ActivitySequence> = pairs.values().filter_map(|p| p.group.clone()).collect();
    let ind_results = bootstrap_all(config, &individual)?;
    let grp_results = bootstrap_all(config, &group)?;
    let ind_gaps: Vec<f64> = ind_results.iter().map(|(_, r)| r.gap).collect();
    let grp_gaps: Vec<f64> = grp_results.iter().map(|(_, r)| r.gap).collect();

    report.tables.push(gap_table("individual", &individual, &ind_results));
    report.tables.push(gap_table("group", &group, &grp_results));
    let cmp = compare_groups(&ind_gaps, &grp_gaps, config.t_test, config.bins)
        .map_err(|e| CliError::Validation(format!("cannot compare gap populations: {e}")))?;
    report
        .tables
        .push(histogram_table("gap_histograms", &[("individual", &cmp.hist_individual), ("group", &cmp.hist_group)]));
    let t = &cmp.ttest;
    let mut ttest = Table::new(
        "t_test",
        &["kind", "t_stat", "df", "p_value", "mean_individual", "mean_group", "n_individual", "n_group", "reject_equal_means"],
    );
    ttest.push(vec![
        match t.kind {
            TTestKind::Pooled => "pooled",
            TTestKind::Welch => "welch",
        }
        .into(),
        t.t_stat.into(),
        t.df.into(),
        t.p_value.into(),
        t.mean_a.into(),
        t.mean_b.into(),
        t.n_a.into(),
        t.n_b.into(),
        cmp.reject_equal_means.into(),
    ]);
    report.tables.push(ttest);
    report.summary.insert("verdict".into(), json!(cmp.verdict));
    report.summary.insert("p_value".into(), json!(t.p_value));
    Ok(report)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<Vec<u8>, CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| io_err(&args.config, e))?;
    let sim: SimulationConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", args.config.display())))?;
    let events = simulate_events(&sim.into_cohort())?;
    let mut buf = Vec::new();
    write_jsonl(&mut buf, &events)?;
    Ok(buf)
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| io_err(p, e))?;
            let mut w = BufWriter::new(f);
            w.write_all(bytes).and_then(|_| w.flush()).map_err(|e| io_err(p, e))
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes).and_then(|_| out.flush()).map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

/// Runs a parsed command line, writing its output.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let (report, output) = match &cli.command {
        Command::Simulate(args) => {
            let bytes = cmd_simulate(args)?;
            return write_output(args.output.as_deref(), &bytes);
        }
        Command::Analyze(a) => (cmd_analyze(RunConfig::from_args("analyze", a), &a.input)?, a),
        Command::Bootstrap(a) => (cmd_bootstrap(RunConfig::from_args("bootstrap", a), &a.input)?, a),
        Command::Compare(a) => (cmd_compare(RunConfig::from_args("compare", a), &a.input)?, a),
        Command::Markoff(m) => {
            let mut config = RunConfig::from_args("markoff", &m.common);
            config.rates = Some(parse_rates(&m.rates).map_err(CliError::Validation)?);
            config.user = m.user.clone();
            (cmd_markoff(config, &m.common.input)?, &m.common)
        }
    };
    let text = report.render(output.output_format);
    write_output(output.output.as_deref(), text.as_bytes())
}

/// Entry point for the binary; returns the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
