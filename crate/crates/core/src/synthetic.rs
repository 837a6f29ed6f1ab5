//! Generated parallel corpora with a known answer.
//!
//! The target side mirrors the source: phrase `i` of the target contains the
//! translations of exactly the words in source phrase `i` (in a shuffled
//! order), each source word maps to one target word, and target gold tags are
//! the clean source tags. Target occurrence vectors therefore equal the
//! source ones. Named entities are rare (a few occurrences each) and common
//! words are frequent.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::corpus::{align, CorpusSide, ParallelCorpus, DEFAULT_OUTSIDE_TAG};
use crate::error::{Error, Result};
use crate::seed;

const NOISE_STREAM: u64 = 0x006e_6f69_7365;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub phrases: usize,
    pub entity_tags: Vec<String>,
    pub entities_per_tag: usize,
    /// Occurrences of every entity word across the corpus.
    pub entity_occurrences: usize,
    pub common_words: usize,
    pub common_per_phrase: usize,
    /// Probability that a source token's tag is replaced by a different one.
    pub label_noise: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    /// 100 phrases, 60 words per side (36 entities over PER/LOC/ORG, 24
    /// common words), no label noise.
    fn default() -> Self {
        SyntheticConfig {
            phrases: 100,
            entity_tags: vec!["PER".into(), "LOC".into(), "ORG".into()],
            entities_per_tag: 12,
            entity_occurrences: 4,
            common_words: 24,
            common_per_phrase: 4,
            label_noise: 0.0,
            seed: 0,
        }
    }
}

/// Target-side spelling of a source word.
pub fn translate(word: &str) -> String {
    format!("{}_ew", word.to_lowercase())
}

pub fn mirrored_corpus(cfg: &SyntheticConfig) -> Result<ParallelCorpus> {
    if cfg.phrases == 0 || cfg.common_words == 0 {
        return Err(Error::Config("synthetic corpus needs phrases and common words".into()));
    }
    if !(0.0..=1.0).contains(&cfg.label_noise) {
        return Err(Error::Config("label noise must lie in [0, 1]".into()));
    }
    let mut rng = seed::rng(cfg.seed);
    let mut noise_rng = seed::rng(seed::derive(cfg.seed, &[NOISE_STREAM]));

    let entities: Vec<(String, String)> = cfg
        .entity_tags
        .iter()
        .flat_map(|tag| {
            let stem = capitalize(tag);
            (0..cfg.entities_per_tag).map(move |i| (format!("{stem}{i}"), tag.clone()))
        })
        .collect();
    let common: Vec<String> = (0..cfg.common_words).map(|i| format!("w{i}")).collect();

    // every entity word gets exactly `entity_occurrences` slots, spread so
    // each phrase receives at least one while slots last
    let mut slots: Vec<usize> = (0..entities.len())
        .flat_map(|e| std::iter::repeat_n(e, cfg.entity_occurrences))
        .collect();
    slots.shuffle(&mut rng);
    let mut phrase_entities: Vec<Vec<usize>> = vec![Vec::new(); cfg.phrases];
    for (i, e) in slots.into_iter().enumerate() {
        let p = if i < cfg.phrases {
            i
        } else {
            rng.random_range(0..cfg.phrases)
        };
        phrase_entities[p].push(e);
    }

    let mut source = Vec::with_capacity(cfg.phrases);
    let mut target = Vec::with_capacity(cfg.phrases);
    for ents in phrase_entities {
        let mut clean: Vec<(String, String)> = (0..cfg.common_per_phrase)
            .map(|_| {
                let w = common.choose(&mut rng).expect("common words").clone();
                (w, DEFAULT_OUTSIDE_TAG.to_string())
            })
            .collect();
        clean.extend(ents.into_iter().map(|e| entities[e].clone()));
        clean.shuffle(&mut rng);

        let mut translated: Vec<(String, String)> =
            clean.iter().map(|(w, t)| (translate(w), t.clone())).collect();
        translated.shuffle(&mut rng);
        target.push(translated);

        let noisy: Vec<(String, String)> = clean
            .into_iter()
            .map(|(w, t)| {
                if cfg.label_noise > 0.0 && noise_rng.random_bool(cfg.label_noise) {
                    (w, other_tag(&t, &cfg.entity_tags, &mut noise_rng))
                } else {
                    (w, t)
                }
            })
            .collect();
        source.push(noisy);
    }

    let source = CorpusSide::from_tagged(source, DEFAULT_OUTSIDE_TAG)?;
    let target = CorpusSide::from_tagged(target, DEFAULT_OUTSIDE_TAG)?;
    align(source, target)
}

fn capitalize(tag: &str) -> String {
    let lower = tag.to_lowercase();
    let mut chars = lower.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// A tag drawn uniformly from `O` plus `entity_tags`, excluding `current`.
fn other_tag<R: Rng>(current: &str, entity_tags: &[String], rng: &mut R) -> String {
    let choices: Vec<&str> = std::iter::once(DEFAULT_OUTSIDE_TAG)
        .chain(entity_tags.iter().map(String::as_str))
        .filter(|t| *t != current)
        .collect();
    choices
        .choose(rng)
        .map_or_else(|| current.to_string(), |t| t.to_string())
}
