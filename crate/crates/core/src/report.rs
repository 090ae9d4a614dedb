//! Comparison tables and result files.
//!
//! Accuracies are stored as percentages. Text output always uses `.` as the
//! decimal separator and two decimals.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::attack::{Algorithm, Scenario};
use crate::dfl::{ConvergenceTime, ExperimentResult, RoundMetrics};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "attack,convergence_time,min_accuracy,avg_accuracy";
pub const PLOT_HEADER: &str = "round\tavg\tmin\tbest_avg";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub attack: Algorithm,
    pub convergence: ConvergenceTime,
    pub max_rounds: usize,
    pub min_accuracy: f64,
    pub avg_accuracy: f64,
}

impl SummaryRow {
    pub fn label(&self) -> &'static str {
        self.attack.label()
    }

    /// Round index, or `≥ max_rounds` when the run never converged.
    pub fn convergence_cell(&self) -> String {
        match self.convergence {
            ConvergenceTime::Converged(t) => t.to_string(),
            ConvergenceTime::NotConverged => format!("≥ {}", self.max_rounds),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (min, avg) = (self.min_accuracy, self.avg_accuracy);
        if !(0.0..=100.0).contains(&min) || !(0.0..=100.0).contains(&avg) {
            return Err(Error::SummaryInvariant(format!(
                "{}: accuracies must lie in [0, 100], got min {min} avg {avg}",
                self.label()
            )));
        }
        if min > avg {
            return Err(Error::SummaryInvariant(format!(
                "{}: minimum accuracy {min} exceeds average {avg}",
                self.label()
            )));
        }
        Ok(())
    }
}

/// Summary of `result`, with accuracies at the round that first reached the
/// best average.
pub fn summarize(result: &ExperimentResult, attack: Algorithm) -> Result<SummaryRow> {
    let s = result
        .summary()
        .ok_or_else(|| Error::SummaryInvariant(format!("{}: no rounds were run", attack.label())))?;
    let row = SummaryRow {
        attack,
        convergence: s.convergence,
        max_rounds: result.max_rounds,
        min_accuracy: 100.0 * s.minimum_accuracy,
        avg_accuracy: 100.0 * s.average_accuracy,
    };
    row.validate()?;
    Ok(row)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowGroup {
    Baseline,
    UnlimitedRange,
    LimitedRange,
}

impl RowGroup {
    pub fn for_scenario(scenario: Scenario) -> Self {
        match scenario {
            Scenario::None => RowGroup::Baseline,
            Scenario::S1 => RowGroup::UnlimitedRange,
            Scenario::S2 => RowGroup::LimitedRange,
        }
    }

    pub fn heading(&self) -> Option<&'static str> {
        match self {
            RowGroup::Baseline => None,
            RowGroup::UnlimitedRange => Some("Unlimited jamming range"),
            RowGroup::LimitedRange => Some("Limited jamming range"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlotPoint {
    pub round: usize,
    pub avg: f64,
    pub min: f64,
    pub best_avg: f64,
}

impl From<&RoundMetrics> for PlotPoint {
    fn from(m: &RoundMetrics) -> Self {
        PlotPoint {
            round: m.round,
            avg: m.average,
            min: m.minimum,
            best_avg: m.best_average,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub group: RowGroup,
    pub summary: SummaryRow,
    pub series: Vec<PlotPoint>,
}

impl TableRow {
    pub fn new(scenario: Scenario, attack: Algorithm, result: &ExperimentResult) -> Result<Self> {
        Ok(TableRow {
            group: RowGroup::for_scenario(scenario),
            summary: summarize(result, attack)?,
            series: result.rounds.iter().map(PlotPoint::from).collect(),
        })
    }

    /// File-name friendly label, unique within a table.
    pub fn slug(&self) -> String {
        row_slug(self.group, self.summary.attack)
    }
}

pub fn row_slug(group: RowGroup, attack: Algorithm) -> String {
    let base = match attack {
        Algorithm::None => "no_attack",
        Algorithm::All => "attack_all",
        Algorithm::Mcba => "mcba",
        Algorithm::Ndba => "ndba",
        Algorithm::Random => "random",
    };
    match group {
        RowGroup::Baseline => base.to_string(),
        RowGroup::UnlimitedRange => format!("{base}_s1"),
        RowGroup::LimitedRange => format!("{base}_s2"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub topology: String,
    pub rows: Vec<TableRow>,
}

impl ComparisonTable {
    pub fn new(topology: impl Into<String>) -> Self {
        ComparisonTable {
            topology: topology.into(),
            rows: Vec::new(),
        }
    }

    /// Appends a row, keeping baselines first, then unlimited-range, then
    /// limited-range rows, each group in insertion order.
    pub fn push(&mut self, row: TableRow) -> Result<()> {
        row.summary.validate()?;
        let at = self.rows.partition_point(|r| r.group <= row.group);
        self.rows.insert(at, row);
        Ok(())
    }

    pub fn row(&self, group: RowGroup, attack: Algorithm) -> Option<&TableRow> {
        self.rows
            .iter()
            .find(|r| r.group == group && r.summary.attack == attack)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let table: ComparisonTable = serde_json::from_str(text)?;
        for r in &table.rows {
            r.summary.validate()?;
        }
        Ok(table)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    TsvPlotData,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "tsv-plotdata" | "tsv" => Ok(Format::TsvPlotData),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::TsvPlotData => "tsv-plotdata",
        })
    }
}

fn csv(table: &ComparisonTable) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    let mut group = None;
    for r in &table.rows {
        // group headings span the row, as in a printed table
        if group != Some(r.group) {
            if let Some(h) = r.group.heading() {
                out.push_str(h);
                out.push_str(",,,\n");
            }
            group = Some(r.group);
        }
        let s = &r.summary;
        out.push_str(&format!(
            "{},{},{:.2},{:.2}\n",
            s.label(),
            s.convergence_cell(),
            s.min_accuracy,
            s.avg_accuracy
        ));
    }
    out
}

/// Per-round series of one row: header plus one line per executed round.
pub fn plot_data(row: &TableRow) -> String {
    let mut out = String::from(PLOT_HEADER);
    out.push('\n');
    for p in &row.series {
        out.push_str(&format!("{}\t{}\t{}\t{}\n", p.round, p.avg, p.min, p.best_avg));
    }
    out
}

fn plot_data_all(table: &ComparisonTable) -> String {
    let mut out = format!("label\t{PLOT_HEADER}\n");
    for r in &table.rows {
        let slug = r.slug();
        for p in &r.series {
            out.push_str(&format!("{slug}\t{}\t{}\t{}\t{}\n", p.round, p.avg, p.min, p.best_avg));
        }
    }
    out
}

pub fn emit(table: &ComparisonTable, format: Format) -> Result<Vec<u8>> {
    Ok(match format {
        Format::Csv => csv(table).into_bytes(),
        Format::Json => {
            let mut bytes = serde_json::to_vec_pretty(table)?;
            bytes.push(b'\n');
            bytes
        }
        Format::TsvPlotData => plot_data_all(table).into_bytes(),
    })
}

/// Emits with a format given by name, e.g. from a command-line flag.
pub fn emit_named(table: &ComparisonTable, format: &str) -> Result<Vec<u8>> {
    emit(table, format.parse()?)
}

/// Streams per-round metrics to two CSV sinks: one line per node and one
/// aggregate line per round.
pub struct MetricsWriter<N: Write, R: Write> {
    nodes: N,
    rounds: R,
}

impl<N: Write, R: Write> MetricsWriter<N, R> {
    pub fn new(mut nodes: N, mut rounds: R) -> io::Result<Self> {
        writeln!(nodes, "round,node,accuracy")?;
        writeln!(rounds, "round,avg,min,best_avg")?;
        Ok(MetricsWriter { nodes, rounds })
    }

    pub fn record(&mut self, m: &RoundMetrics) -> io::Result<()> {
        for (node, acc) in m.node_accuracy.iter().enumerate() {
            writeln!(self.nodes, "{},{node},{acc}", m.round)?;
        }
        writeln!(
            self.rounds,
            "{},{},{},{}",
            m.round, m.average, m.minimum, m.best_average
        )
    }

    pub fn finish(mut self) -> io::Result<(N, R)> {
        self.nodes.flush()?;
        self.rounds.flush()?;
        Ok((self.nodes, self.rounds))
    }
}
