//! Repeated k-fold evaluation of tag projection.
//!
//! One protocol run repeats `r` iterations. Each iteration splits the aligned
//! phrase indices into `k` folds and, for every fold, trains a fresh network
//! on the source tokens outside the fold and tags the held-out phrases.
//! Outcome counts are pooled over the `k` folds into one precision / recall /
//! F1 triple per iteration, and the `r` triples are summarized as mean and
//! sample standard deviation.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::corpus::{CorpusSide, ParallelCorpus, TagSet};
use crate::error::{Error, Result};
use crate::network::{
    self, init_params, Example, NetworkSpec, TrainConfig, DEFAULT_BATCH_SIZE, DEFAULT_LEARNING_RATE,
};
use crate::representation::{build_matrix, RepresentationMatrix, RepresentationMode};
use crate::seed::{self, Purpose};

pub const DEFAULT_SEED: u64 = 42;

/// Which side's held-out tokens are scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum EvalMode {
    /// Predicted target tags against gold target tags.
    #[default]
    ProjectionTarget,
    /// Predicted source tags against gold source tags.
    HoldoutSource,
}

impl EvalMode {
    pub fn as_str(self) -> &'static str {
        match self {
            EvalMode::ProjectionTarget => "projection",
            EvalMode::HoldoutSource => "holdout",
        }
    }
}

impl fmt::Display for EvalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EvalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "projection" => Ok(EvalMode::ProjectionTarget),
            "holdout" => Ok(EvalMode::HoldoutSource),
            other => Err(Error::Config(format!(
                "unknown evaluation mode {other:?} (expected projection or holdout)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperParams {
    pub h1: usize,
    pub h2: usize,
    /// Number of folds.
    pub k: usize,
    /// Number of repeated iterations.
    pub r: usize,
    /// Epochs, learning rate, batch size and root seed.
    pub train: TrainConfig,
    pub mode: RepresentationMode,
    pub eval_mode: EvalMode,
}

impl HyperParams {
    /// The 640/160 network, 10 epochs, 10 folds, 10 iterations.
    pub fn baseline() -> Self {
        HyperParams {
            h1: 640,
            h2: 160,
            k: 10,
            r: 10,
            train: TrainConfig {
                epochs: 10,
                learning_rate: DEFAULT_LEARNING_RATE,
                batch_size: DEFAULT_BATCH_SIZE,
                seed: DEFAULT_SEED,
            },
            mode: RepresentationMode::Itf,
            eval_mode: EvalMode::ProjectionTarget,
        }
    }

    pub fn epochs(&self) -> usize {
        self.train.epochs
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::Config(format!("k must be at least 2, got {}", self.k)));
        }
        if self.r < 1 {
            return Err(Error::Config("r must be at least 1".into()));
        }
        if self.h1 < 1 || self.h2 < 1 {
            return Err(Error::Config("layer sizes must be at least 1".into()));
        }
        self.train.validate()
    }

    /// Checks the parameters against a specific corpus.
    pub fn validate_for(&self, corpus: &ParallelCorpus) -> Result<()> {
        self.validate()?;
        if self.k > corpus.phrase_count() {
            return Err(Error::Config(format!(
                "k = {} exceeds the number of phrases ({})",
                self.k,
                corpus.phrase_count()
            )));
        }
        if self.eval_mode == EvalMode::ProjectionTarget && !corpus.target().is_annotated() {
            return Err(Error::Config(
                "projection evaluation needs an annotated target side (target.conll)".into(),
            ));
        }
        Ok(())
    }
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams::baseline()
    }
}

/// Seeded random partition of `0..n` into `k` folds whose sizes differ by at
/// most one. The first `n % k` folds get the extra element.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::Config(format!("k must be at least 2, got {k}")));
    }
    if k > n {
        return Err(Error::Config(format!("k = {k} exceeds n = {n}")));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut seed::rng(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        folds.push(perm[start..start + size].to_vec());
        start += size;
    }
    Ok(folds)
}

/// Token-level outcome counts over entity (non-outside) tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl std::ops::AddAssign for Counts {
    fn add_assign(&mut self, o: Counts) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
    }
}

pub fn count_outcomes(gold: &[usize], pred: &[usize], tagset: &TagSet) -> Result<Counts> {
    if gold.len() != pred.len() {
        return Err(Error::Shape {
            expected: gold.len(),
            actual: pred.len(),
        });
    }
    let o = tagset.outside_index();
    let mut c = Counts::default();
    for (&g, &p) in gold.iter().zip(pred) {
        if g == p {
            if g != o {
                c.tp += 1;
            }
            continue;
        }
        if p != o {
            c.fp += 1;
        }
        if g != o {
            c.fn_ += 1;
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Precision, recall and F1; zero denominators give 0.
pub fn prf(c: Counts) -> RunMetrics {
    let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    RunMetrics {
        precision,
        recall,
        f1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AggregateMetrics {
    pub precision: MeanStd,
    pub recall: MeanStd,
    pub f1: MeanStd,
    pub r: usize,
}

/// Mean and sample (n - 1) standard deviation; std is 0 for one value.
pub fn mean_std(values: &[f64]) -> MeanStd {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    MeanStd { mean, std }
}

pub fn aggregate(runs: &[RunMetrics]) -> Result<AggregateMetrics> {
    if runs.is_empty() {
        return Err(Error::Validation("cannot aggregate zero runs".into()));
    }
    let col = |f: fn(&RunMetrics) -> f64| -> Vec<f64> { runs.iter().map(f).collect() };
    Ok(AggregateMetrics {
        precision: mean_std(&col(|m| m.precision)),
        recall: mean_std(&col(|m| m.recall)),
        f1: mean_std(&col(|m| m.f1)),
        r: runs.len(),
    })
}

/// Token stream of one side as `(word id, gold tag)` per phrase.
fn token_ids(side: &CorpusSide) -> Vec<Vec<(usize, usize)>> {
    side.phrases()
        .iter()
        .map(|p| {
            p.tokens
                .iter()
                .map(|t| (side.word_id(&t.surface).expect("token in vocabulary"), t.tag_index))
                .collect()
        })
        .collect()
}

/// Corpus data prepared once and shared read-only by every fold job.
struct Prepared {
    source: RepresentationMatrix,
    eval: Option<RepresentationMatrix>,
    source_tokens: Vec<Vec<(usize, usize)>>,
    eval_tokens: Vec<Vec<(usize, usize)>>,
    tagset: TagSet,
}

impl Prepared {
    fn new(corpus: &ParallelCorpus, hp: &HyperParams) -> Self {
        let source = build_matrix(corpus.source(), hp.mode);
        let (eval, eval_tokens) = match hp.eval_mode {
            EvalMode::ProjectionTarget => (
                Some(build_matrix(corpus.target(), hp.mode)),
                token_ids(corpus.target()),
            ),
            EvalMode::HoldoutSource => (None, token_ids(corpus.source())),
        };
        Prepared {
            source_tokens: token_ids(corpus.source()),
            source,
            eval,
            eval_tokens,
            tagset: corpus.tagset().clone(),
        }
    }

    fn eval_matrix(&self) -> &RepresentationMatrix {
        self.eval.as_ref().unwrap_or(&self.source)
    }
}

fn split_seed(iteration_seed: u64) -> u64 {
    seed::derive(iteration_seed, &[Purpose::FoldSplit as u64])
}

/// Trains on everything outside `held_out` and counts outcomes inside it.
fn run_fold(
    data: &Prepared,
    hp: &HyperParams,
    held_out: &[usize],
    iteration_seed: u64,
    fold: usize,
) -> Result<Counts> {
    let phrase_count = data.source_tokens.len();
    let mut in_fold = vec![false; phrase_count];
    for &p in held_out {
        in_fold[p] = true;
    }

    let examples: Vec<Example<'_>> = data
        .source_tokens
        .iter()
        .enumerate()
        .filter(|(p, _)| !in_fold[*p])
        .flat_map(|(_, toks)| toks.iter().map(|&(w, t)| (data.source.row(w), t)))
        .collect();

    let spec = NetworkSpec::new(phrase_count, hp.h1, hp.h2, data.tagset.len())?;
    let init = init_params(spec, seed::fold_seed(iteration_seed, fold, Purpose::Init));
    let config = TrainConfig {
        seed: seed::fold_seed(iteration_seed, fold, Purpose::Shuffle),
        ..hp.train
    };
    let params = network::train(&init, &examples, &config)?;

    // identical vectors get identical predictions, so predict once per word
    let matrix = data.eval_matrix();
    let mut cache: Vec<Option<usize>> = vec![None; matrix.word_count()];
    let mut gold = Vec::new();
    let mut pred = Vec::new();
    let mut sorted = held_out.to_vec();
    sorted.sort_unstable();
    for p in sorted {
        for &(w, t) in &data.eval_tokens[p] {
            let tag = match cache[w] {
                Some(tag) => tag,
                None => {
                    let tag = network::predict(&params, matrix.row(w))?;
                    cache[w] = Some(tag);
                    tag
                }
            };
            gold.push(t);
            pred.push(tag);
        }
    }
    count_outcomes(&gold, &pred, &data.tagset)
}

/// Per-iteration metrics, in iteration order.
pub fn run_iterations(corpus: &ParallelCorpus, hp: &HyperParams) -> Result<Vec<RunMetrics>> {
    hp.validate_for(corpus)?;
    let data = Prepared::new(corpus, hp);
    let p = corpus.phrase_count();

    let splits = (0..hp.r)
        .map(|j| {
            let s = seed::iteration_seed(hp.train.seed, j);
            kfold_split(p, hp.k, split_seed(s)).map(|folds| (s, folds))
        })
        .collect::<Result<Vec<_>>>()?;

    let jobs: Vec<(usize, usize)> = (0..hp.r).flat_map(|j| (0..hp.k).map(move |f| (j, f))).collect();
    let counts = jobs
        .par_iter()
        .map(|&(j, f)| {
            let (s, folds) = &splits[j];
            run_fold(&data, hp, &folds[f], *s, f)
        })
        .collect::<Result<Vec<Counts>>>()?;

    Ok(counts
        .chunks(hp.k)
        .map(|per_fold| {
            let mut total = Counts::default();
            for c in per_fold {
                total += *c;
            }
            prf(total)
        })
        .collect())
}

pub fn run_protocol(corpus: &ParallelCorpus, hp: &HyperParams) -> Result<AggregateMetrics> {
    aggregate(&run_iterations(corpus, hp)?)
}

/// Candidate values per swept hyperparameter, plus the settings held fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub h1: Vec<usize>,
    pub h2: Vec<usize>,
    pub epochs: Vec<usize>,
    pub k: Vec<usize>,
    pub r: Vec<usize>,
    /// Supplies learning rate, batch size, seed and the two modes.
    pub base: HyperParams,
}

impl Grid {
    /// Every combination in lexicographic axis order h1, h2, epochs, k, r,
    /// with r varying fastest.
    pub fn configurations(&self) -> Vec<HyperParams> {
        let mut out = Vec::new();
        for &h1 in &self.h1 {
            for &h2 in &self.h2 {
                for &epochs in &self.epochs {
                    for &k in &self.k {
                        for &r in &self.r {
                            let mut hp = self.base;
                            hp.h1 = h1;
                            hp.h2 = h2;
                            hp.train.epochs = epochs;
                            hp.k = k;
                            hp.r = r;
                            out.push(hp);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        for (name, axis) in [
            ("h1", &self.h1),
            ("h2", &self.h2),
            ("epochs", &self.epochs),
            ("k", &self.k),
            ("r", &self.r),
        ] {
            if axis.is_empty() {
                return Err(Error::Config(format!("grid axis {name} is empty")));
            }
        }
        self.configurations().iter().try_for_each(HyperParams::validate)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub id: usize,
    pub hp: HyperParams,
    pub metrics: AggregateMetrics,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

/// Runs every grid configuration in order, calling `on_row` as each one
/// finishes. The whole grid is validated before the first run.
pub fn grid_search_with<F>(corpus: &ParallelCorpus, grid: &Grid, mut on_row: F) -> Result<SweepResult>
where
    F: FnMut(&SweepRow) -> Result<()>,
{
    grid.validate()?;
    let configs = grid.configurations();
    for hp in &configs {
        hp.validate_for(corpus)?;
    }
    let mut result = SweepResult::default();
    for (i, hp) in configs.into_iter().enumerate() {
        let row = SweepRow {
            id: i + 1,
            hp,
            metrics: run_protocol(corpus, &hp)?,
        };
        on_row(&row)?;
        result.rows.push(row);
    }
    Ok(result)
}

pub fn grid_search(corpus: &ParallelCorpus, grid: &Grid) -> Result<SweepResult> {
    grid_search_with(corpus, grid, |_| Ok(()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tags() -> TagSet {
        TagSet::from_tags(["O", "PER", "LOC"], "O").unwrap()
    }

    #[test]
    fn kfold_examples() {
        let folds = kfold_split(10, 5, 1).unwrap();
        assert_eq!(folds.len(), 5);
        assert!(folds.iter().all(|f| f.len() == 2));
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());

        let sizes: Vec<usize> = kfold_split(7, 3, 1).unwrap().iter().map(Vec::len).collect();
        assert_eq!(sizes, [3, 2, 2]);

        assert!(kfold_split(5, 10, 1).is_err());
        assert!(kfold_split(5, 1, 1).is_err());
    }

    #[test]
    fn outcome_examples() {
        let t = tags();
        assert_eq!(
            count_outcomes(&[1, 0, 2], &[1, 0, 0], &t).unwrap(),
            Counts { tp: 1, fp: 0, fn_: 1 }
        );
        assert_eq!(
            count_outcomes(&[0, 0], &[1, 2], &t).unwrap(),
            Counts { tp: 0, fp: 2, fn_: 0 }
        );
        assert_eq!(
            count_outcomes(&[1, 2, 2, 1], &[1, 2, 2, 1], &t).unwrap(),
            Counts { tp: 4, fp: 0, fn_: 0 }
        );
        assert!(count_outcomes(&[0], &[0, 1], &t).is_err());
        // a wrong entity type is both a false positive and a false negative
        assert_eq!(
            count_outcomes(&[1], &[2], &t).unwrap(),
            Counts { tp: 0, fp: 1, fn_: 1 }
        );
    }

    #[test]
    fn prf_examples() {
        let m = prf(Counts { tp: 3, fp: 1, fn_: 2 });
        assert_eq!(m.precision, 0.75);
        assert_eq!(m.recall, 0.6);
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(prf(Counts::default()), RunMetrics::default());
        let m = prf(Counts { tp: 5, fp: 0, fn_: 0 });
        assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn aggregate_examples() {
        let runs: Vec<RunMetrics> = [1.0, 2.0, 3.0]
            .iter()
            .map(|&f1| RunMetrics { precision: 0.5, recall: 0.5, f1 })
            .collect();
        let a = aggregate(&runs).unwrap();
        assert_eq!(a.f1.mean, 2.0);
        assert_eq!(a.f1.std, 1.0);
        assert_eq!(a.precision.std, 0.0);
        assert_eq!(a.r, 3);
        assert_eq!(aggregate(&runs[..1]).unwrap().f1.std, 0.0);
        assert!(aggregate(&[]).is_err());
    }

    #[test]
    fn eval_mode_parsing() {
        assert_eq!("projection".parse::<EvalMode>().unwrap(), EvalMode::ProjectionTarget);
        assert_eq!("holdout".parse::<EvalMode>().unwrap(), EvalMode::HoldoutSource);
        assert!("both".parse::<EvalMode>().is_err());
    }

    #[test]
    fn grid_order_and_validation() {
        let grid = Grid {
            h1: vec![10, 20],
            h2: vec![5],
            epochs: vec![1],
            k: vec![2, 3],
            r: vec![1],
            base: HyperParams::baseline(),
        };
        let c = grid.configurations();
        let axes: Vec<(usize, usize)> = c.iter().map(|hp| (hp.h1, hp.k)).collect();
        assert_eq!(axes, [(10, 2), (10, 3), (20, 2), (20, 3)]);
        assert!(grid.validate().is_ok());

        let bad = Grid { k: vec![1], ..grid.clone() };
        assert!(bad.validate().is_err());
        let empty = Grid { r: vec![], ..grid };
        assert!(empty.validate().is_err());
    }

    #[test]
    fn baseline_values() {
        let hp = HyperParams::baseline();
        assert_eq!((hp.h1, hp.h2, hp.epochs(), hp.k, hp.r), (640, 160, 10, 10, 10));
    }
}
