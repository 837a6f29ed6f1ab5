//! `tagproj` command line: `repr`, `run`, `sweep` and `report`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::GridConfigFile;
use crate::corpus::load_dir;
use crate::error::Result;
use crate::evaluation::{grid_search_with, run_protocol, EvalMode, HyperParams, SweepRow, DEFAULT_SEED};
use crate::network::{TrainConfig, DEFAULT_BATCH_SIZE, DEFAULT_LEARNING_RATE};
use crate::report::{read_rows, render, ReportFormat, SweepWriter};
use crate::representation::{build_matrix, RepresentationMode};

#[derive(Debug, Parser)]
#[command(name = "tagproj", version, about = "Named-entity tag projection over parallel corpora")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Export word representations of both corpus sides as CSV
    Repr {
        /// Directory holding source.conll and target.conll or target.txt
        corpus_dir: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Itf)]
        mode: ModeArg,
        /// Output prefix; writes <out>.source.csv and <out>.target.csv
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the repeated k-fold protocol for one configuration
    Run {
        corpus_dir: PathBuf,
        #[command(flatten)]
        hp: RunArgs,
    },
    /// Run every configuration of a grid file and write the sweep CSV
    Sweep {
        corpus_dir: PathBuf,
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a sweep CSV as a summary table
    Report {
        results: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Markdown)]
        format: FormatArg,
        /// Multiply metrics by 100 before display
        #[arg(long)]
        percent: bool,
        /// Write to a file instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Binary,
    Itf,
}

impl From<ModeArg> for RepresentationMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Binary => RepresentationMode::Binary,
            ModeArg::Itf => RepresentationMode::Itf,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvalArg {
    Projection,
    Holdout,
}

impl From<EvalArg> for EvalMode {
    fn from(m: EvalArg) -> Self {
        match m {
            EvalArg::Projection => EvalMode::ProjectionTarget,
            EvalArg::Holdout => EvalMode::HoldoutSource,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Markdown,
    Csv,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Markdown => ReportFormat::Markdown,
            FormatArg::Csv => ReportFormat::Csv,
        }
    }
}

/// Defaults reproduce the 640/160 baseline configuration.
#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = 640, value_parser = clap::value_parser!(u64).range(1..))]
    pub h1: u64,
    #[arg(long, default_value_t = 160, value_parser = clap::value_parser!(u64).range(1..))]
    pub h2: u64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub epochs: u64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(2..))]
    pub k: u64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub r: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long = "eval", value_enum, default_value_t = EvalArg::Projection)]
    pub eval: EvalArg,
    #[arg(long, value_enum, default_value_t = ModeArg::Itf)]
    pub mode: ModeArg,
    #[arg(long = "lr", default_value_t = DEFAULT_LEARNING_RATE)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = DEFAULT_BATCH_SIZE as u64, value_parser = clap::value_parser!(u64).range(1..))]
    pub batch_size: u64,
}

impl RunArgs {
    pub fn to_hyperparams(&self) -> Result<HyperParams> {
        let hp = HyperParams {
            h1: self.h1 as usize,
            h2: self.h2 as usize,
            k: self.k as usize,
            r: self.r as usize,
            train: TrainConfig::new(
                self.epochs as usize,
                self.learning_rate,
                self.batch_size as usize,
                self.seed,
            )?,
            mode: self.mode.into(),
            eval_mode: self.eval.into(),
        };
        hp.validate()?;
        Ok(hp)
    }
}

fn side_path(prefix: &Path, side: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(format!(".{side}.csv"));
    PathBuf::from(s)
}

/// Writes `<out>.source.csv` and `<out>.target.csv`; returns both paths.
pub fn cmd_repr(corpus_dir: &Path, mode: RepresentationMode, out: &Path) -> Result<[PathBuf; 2]> {
    let corpus = load_dir(corpus_dir)?;
    let source = build_matrix(corpus.source(), mode);
    let target = build_matrix(corpus.target(), mode);
    let paths = [side_path(out, "source"), side_path(out, "target")];
    source.write_csv(BufWriter::new(File::create(&paths[0])?))?;
    target.write_csv(BufWriter::new(File::create(&paths[1])?))?;
    Ok(paths)
}

/// Runs one configuration and writes a header plus one sweep-format row.
pub fn cmd_run<W: Write>(corpus_dir: &Path, hp: &HyperParams, out: W) -> Result<SweepRow> {
    let corpus = load_dir(corpus_dir)?;
    hp.validate_for(&corpus)?;
    let row = SweepRow {
        id: 1,
        hp: *hp,
        metrics: run_protocol(&corpus, hp)?,
    };
    let mut w = SweepWriter::new(out)?;
    w.write_row(&row)?;
    Ok(row)
}

/// Validates everything, then runs the grid, appending and flushing one CSV
/// row per finished configuration. Progress goes to `progress`.
pub fn cmd_sweep<P: Write>(corpus_dir: &Path, grid_path: &Path, out: &Path, mut progress: P) -> Result<usize> {
    let grid = GridConfigFile::load(grid_path)?.to_grid()?;
    let corpus = load_dir(corpus_dir)?;
    let configs = grid.configurations();
    for hp in &configs {
        hp.validate_for(&corpus)?;
    }
    let total = configs.len();
    let mut writer = SweepWriter::new(BufWriter::new(File::create(out)?))?;
    let result = grid_search_with(&corpus, &grid, |row| {
        writer.write_row(row)?;
        let m = &row.metrics;
        writeln!(
            progress,
            "[{}/{}] h1={} h2={} epochs={} k={} r={} f1={:.4}±{:.4}",
            row.id,
            total,
            row.hp.h1,
            row.hp.h2,
            row.hp.epochs(),
            row.hp.k,
            row.hp.r,
            m.f1.mean,
            m.f1.std
        )?;
        Ok(())
    })?;
    Ok(result.rows.len())
}

pub fn cmd_report<W: Write>(results: &Path, format: ReportFormat, percent: bool, out: W) -> Result<()> {
    if !results.is_file() {
        return Err(crate::error::Error::NotFound { path: results.to_path_buf() });
    }
    let rows = read_rows(File::open(results)?)?;
    let scale = if percent { 100.0 } else { 1.0 };
    render(&rows, format, scale, out)
}

/// Executes a parsed command line. Returns the process exit status.
pub fn execute(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Repr { corpus_dir, mode, out } => cmd_repr(&corpus_dir, mode.into(), &out).map(|_| ()),
        Command::Run { corpus_dir, hp } => hp
            .to_hyperparams()
            .and_then(|hp| cmd_run(&corpus_dir, &hp, io::stdout().lock()).map(|_| ())),
        Command::Sweep { corpus_dir, grid, out } => {
            cmd_sweep(&corpus_dir, &grid, &out, io::stderr().lock()).map(|_| ())
        }
        Command::Report {
            results,
            format,
            percent,
            out,
        } => match out {
            Some(path) => File::create(&path)
                .map_err(Into::into)
                .and_then(|f| cmd_report(&results, format.into(), percent, BufWriter::new(f))),
            None => cmd_report(&results, format.into(), percent, io::stdout().lock()),
        },
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            1
        }
    }
}
