//! Phrase-occurrence word representations.
//!
//! A word is represented by a vector with one component per phrase of its
//! side. In [`RepresentationMode::Binary`] a component is 1 when the word
//! occurs in that phrase. In [`RepresentationMode::Itf`] the ones are
//! replaced by the word's inverse term frequency `1 / tf`, so rare words
//! (named entities, mostly) get larger components than common ones.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::corpus::CorpusSide;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum RepresentationMode {
    Binary,
    #[default]
    Itf,
}

impl RepresentationMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RepresentationMode::Binary => "binary",
            RepresentationMode::Itf => "itf",
        }
    }
}

impl fmt::Display for RepresentationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RepresentationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(RepresentationMode::Binary),
            "itf" => Ok(RepresentationMode::Itf),
            other => Err(Error::Config(format!(
                "unknown representation mode {other:?} (expected binary or itf)"
            ))),
        }
    }
}

/// Token occurrence counts per word, indexed like the side's vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermFrequencyTable {
    counts: Vec<u64>,
    index: HashMap<String, usize>,
}

impl TermFrequencyTable {
    pub fn get(&self, word: &str) -> Option<u64> {
        self.index.get(word).map(|&i| self.counts[i])
    }

    /// Counts in vocabulary order.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// Counts token occurrences (not distinct phrases) of every word.
pub fn term_frequencies(side: &CorpusSide) -> TermFrequencyTable {
    let mut counts = vec![0u64; side.vocabulary().len()];
    for phrase in side.phrases() {
        for tok in &phrase.tokens {
            let id = side.word_id(&tok.surface).expect("token in vocabulary");
            counts[id] += 1;
        }
    }
    let index = side
        .vocabulary()
        .iter()
        .enumerate()
        .map(|(i, w)| (w.clone(), i))
        .collect();
    TermFrequencyTable { counts, index }
}

/// Inverse term frequency, `1 / tf`, in `(0, 1]`.
pub fn itf(tf: u64) -> Result<f64> {
    if tf == 0 {
        return Err(Error::Domain("term frequency must be at least 1".into()));
    }
    Ok(1.0 / tf as f64)
}

/// Sorted, deduplicated phrase indices in which each word occurs.
fn supports(side: &CorpusSide) -> Vec<Vec<usize>> {
    let mut support = vec![Vec::new(); side.vocabulary().len()];
    for (p, phrase) in side.phrases().iter().enumerate() {
        for tok in &phrase.tokens {
            let id = side.word_id(&tok.surface).expect("token in vocabulary");
            // phrases are visited in order, so a repeat can only be the last entry
            if support[id].last() != Some(&p) {
                support[id].push(p);
            }
        }
    }
    support
}

/// 0/1 occurrence vector of `word` over the side's phrases.
pub fn occurrence_row(word: &str, side: &CorpusSide) -> Result<Vec<f64>> {
    if side.word_id(word).is_none() {
        return Err(Error::UnknownWord(word.to_string()));
    }
    Ok(side
        .phrases()
        .iter()
        .map(|p| {
            if p.tokens.iter().any(|t| t.surface == word) {
                1.0
            } else {
                0.0
            }
        })
        .collect())
}

/// Dense word-by-phrase representation of one corpus side.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationMatrix {
    mode: RepresentationMode,
    dimension: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    rows: Vec<f64>,
}

impl RepresentationMatrix {
    pub fn mode(&self) -> RepresentationMode {
        self.mode
    }

    /// Vector length, i.e. the phrase count.
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn word_count(&self) -> usize {
        self.words.len()
    }

    pub fn row(&self, word_id: usize) -> &[f64] {
        let d = self.dimension;
        &self.rows[word_id * d..(word_id + 1) * d]
    }

    pub fn vector(&self, word: &str) -> Option<&[f64]> {
        self.index.get(word).map(|&i| self.row(i))
    }

    pub fn word_id(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// Writes `word,mode,v0,...,v{P-1}` rows in vocabulary order.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["word".to_string(), "mode".to_string()];
        header.extend((0..self.dimension).map(|i| format!("v{i}")));
        w.write_record(&header)?;
        for (i, word) in self.words.iter().enumerate() {
            let mut rec = Vec::with_capacity(self.dimension + 2);
            rec.push(word.clone());
            rec.push(self.mode.to_string());
            rec.extend(self.row(i).iter().map(|v| format_real(*v)));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// 17 significant digits; parses back to the identical `f64`.
pub(crate) fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn build_matrix(side: &CorpusSide, mode: RepresentationMode) -> RepresentationMatrix {
    let dimension = side.phrase_count();
    let words = side.vocabulary().to_vec();
    let tf = term_frequencies(side);
    let mut rows = vec![0.0; words.len() * dimension];
    for (id, support) in supports(side).into_iter().enumerate() {
        let value = match mode {
            RepresentationMode::Binary => 1.0,
            RepresentationMode::Itf => itf(tf.counts[id]).expect("vocabulary words have tf >= 1"),
        };
        let row = &mut rows[id * dimension..(id + 1) * dimension];
        for p in support {
            row[p] = value;
        }
    }
    let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
    RepresentationMatrix {
        mode,
        dimension,
        words,
        index,
        rows,
    }
}
