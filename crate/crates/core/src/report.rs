//! Sweep result files and the summary table rendered from them.
//!
//! The sweep CSV keeps full-precision means and standard deviations. The
//! report renders one row per configuration with `mean ± std` cells at two
//! decimals. Report CSV output can itself be fed back into the report, which
//! reproduces it byte for byte.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::evaluation::{MeanStd, SweepRow};

pub const SWEEP_HEADER: [&str; 12] = [
    "id",
    "h1",
    "h2",
    "epochs",
    "k",
    "r",
    "precision_mean",
    "precision_std",
    "recall_mean",
    "recall_std",
    "f1_mean",
    "f1_std",
];

pub const REPORT_HEADER: [&str; 9] = [
    "id",
    "h1-size",
    "h2-size",
    "Epoch",
    "k",
    "r",
    "Precision",
    "Recall",
    "F1-score",
];

/// Streams sweep rows to CSV, flushing after each one.
pub struct SweepWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> SweepWriter<W> {
    pub fn new(out: W) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(out);
        inner.write_record(SWEEP_HEADER)?;
        inner.flush()?;
        Ok(SweepWriter { inner })
    }

    pub fn write_row(&mut self, row: &SweepRow) -> Result<()> {
        let m = &row.metrics;
        let hp = &row.hp;
        let rec = [
            row.id.to_string(),
            hp.h1.to_string(),
            hp.h2.to_string(),
            hp.epochs().to_string(),
            hp.k.to_string(),
            hp.r.to_string(),
            m.precision.mean.to_string(),
            m.precision.std.to_string(),
            m.recall.mean.to_string(),
            m.recall.std.to_string(),
            m.f1.mean.to_string(),
            m.f1.std.to_string(),
        ];
        self.inner.write_record(&rec)?;
        self.inner.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> Result<W> {
        self.inner
            .into_inner()
            .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
    }
}

/// A metric cell value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell(pub MeanStd);

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2} ± {:.2}", self.0.mean, self.0.std)
    }
}

impl FromStr for Cell {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Validation(format!("invalid metric cell {s:?}"));
        let (mean, std) = s.split_once('±').ok_or_else(bad)?;
        Ok(Cell(MeanStd {
            mean: mean.trim().parse().map_err(|_| bad())?,
            std: std.trim().parse().map_err(|_| bad())?,
        }))
    }
}

/// One rendered table row. Integer columns are kept as read.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub id: u64,
    pub h1: u64,
    pub h2: u64,
    pub epochs: u64,
    pub k: u64,
    pub r: u64,
    pub precision: MeanStd,
    pub recall: MeanStd,
    pub f1: MeanStd,
}

impl ReportRow {
    fn scaled(mut self, factor: f64) -> Self {
        for m in [&mut self.precision, &mut self.recall, &mut self.f1] {
            m.mean *= factor;
            m.std *= factor;
        }
        self
    }

    fn cells(&self) -> [String; 9] {
        [
            self.id.to_string(),
            self.h1.to_string(),
            self.h2.to_string(),
            self.epochs.to_string(),
            self.k.to_string(),
            self.r.to_string(),
            Cell(self.precision).to_string(),
            Cell(self.recall).to_string(),
            Cell(self.f1).to_string(),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::Config(format!(
                "unknown report format {other:?} (expected markdown or csv)"
            ))),
        }
    }
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::Schema(name.to_string()))
}

fn field<T: FromStr>(rec: &csv::StringRecord, idx: usize, name: &str, line: usize) -> Result<T> {
    let raw = rec.get(idx).unwrap_or("").trim();
    raw.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {name} value {raw:?}"),
    })
}

/// Reads rows from either a sweep CSV or a previously rendered report CSV.
/// The report layout is recognized by its `h1-size` column.
pub fn read_rows<R: Read>(input: R) -> Result<Vec<ReportRow>> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let headers = rdr.headers()?.clone();
    let rendered = headers.iter().any(|h| h.trim() == "h1-size");
    let names: &[&str] = if rendered { &REPORT_HEADER } else { &SWEEP_HEADER };
    let idx = names
        .iter()
        .map(|n| column(&headers, n))
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let int = |c: usize| field::<u64>(&rec, idx[c], names[c], line);
        let metric = |c: usize| -> Result<MeanStd> {
            if rendered {
                Ok(field::<Cell>(&rec, idx[c], names[c], line)?.0)
            } else {
                // mean and std columns are adjacent in the sweep header
                let c = 6 + 2 * (c - 6);
                Ok(MeanStd {
                    mean: field(&rec, idx[c], names[c], line)?,
                    std: field(&rec, idx[c + 1], names[c + 1], line)?,
                })
            }
        };
        rows.push(ReportRow {
            id: int(0)?,
            h1: int(1)?,
            h2: int(2)?,
            epochs: int(3)?,
            k: int(4)?,
            r: int(5)?,
            precision: metric(6)?,
            recall: metric(7)?,
            f1: metric(8)?,
        });
    }
    Ok(rows)
}

/// Writes the table sorted by id. `scale` multiplies every metric (100 turns
/// fractions into percentages).
pub fn render<W: Write>(rows: &[ReportRow], format: ReportFormat, scale: f64, out: W) -> Result<()> {
    let mut rows: Vec<ReportRow> = rows.iter().cloned().map(|r| r.scaled(scale)).collect();
    rows.sort_by_key(|r| r.id);
    match format {
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(REPORT_HEADER)?;
            for row in &rows {
                w.write_record(row.cells())?;
            }
            w.flush()?;
        }
        ReportFormat::Markdown => {
            let mut out = out;
            writeln!(out, "| {} |", REPORT_HEADER.join(" | "))?;
            writeln!(out, "|{}", "---|".repeat(REPORT_HEADER.len()))?;
            for row in &rows {
                writeln!(out, "| {} |", row.cells().join(" | "))?;
            }
            out.flush()?;
        }
    }
    Ok(())
}
