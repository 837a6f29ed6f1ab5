//! Sentence-aligned parallel corpora with named-entity tags.
//!
//! A corpus side is a list of phrases (one sentence each). The annotated
//! format is two tab-separated columns, `surface<TAB>tag`, with a blank line
//! between phrases. The plain format is one phrase per line with tokens
//! separated by spaces. Tokens are taken verbatim: no case folding and no
//! punctuation handling.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const DEFAULT_OUTSIDE_TAG: &str = "O";

pub const SOURCE_FILE: &str = "source.conll";
pub const TARGET_ANNOTATED_FILE: &str = "target.conll";
pub const TARGET_PLAIN_FILE: &str = "target.txt";

/// Ordered set of tag labels. A tag's index is its position in the list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagSet {
    tags: Vec<String>,
    outside: usize,
}

impl TagSet {
    /// A tag set holding only the outside tag.
    pub fn new(outside_tag: &str) -> Self {
        TagSet {
            tags: vec![outside_tag.to_string()],
            outside: 0,
        }
    }

    pub fn from_tags<I, S>(tags: I, outside_tag: &str) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tags: Vec<String> = tags.into_iter().map(Into::into).collect();
        for (i, t) in tags.iter().enumerate() {
            if tags[..i].contains(t) {
                return Err(Error::Validation(format!("duplicate tag {t:?}")));
            }
        }
        let outside = tags
            .iter()
            .position(|t| t == outside_tag)
            .ok_or_else(|| {
                Error::Validation(format!("outside tag {outside_tag:?} is not in the tag set"))
            })?;
        Ok(TagSet { tags, outside })
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    pub fn outside_index(&self) -> usize {
        self.outside
    }

    pub fn outside_tag(&self) -> &str {
        &self.tags[self.outside]
    }

    pub fn index(&self, tag: &str) -> Option<usize> {
        self.tags.iter().position(|t| t == tag)
    }

    pub fn label(&self, index: usize) -> Option<&str> {
        self.tags.get(index).map(String::as_str)
    }

    /// Returns the index of `tag`, appending it if unseen.
    pub fn intern(&mut self, tag: &str) -> usize {
        match self.index(tag) {
            Some(i) => i,
            None => {
                self.tags.push(tag.to_string());
                self.tags.len() - 1
            }
        }
    }
}

impl Default for TagSet {
    fn default() -> Self {
        TagSet::new(DEFAULT_OUTSIDE_TAG)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedToken {
    pub surface: String,
    pub tag_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Phrase {
    pub index: usize,
    pub tokens: Vec<AnnotatedToken>,
}

/// One side of a parallel corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusSide {
    phrases: Vec<Phrase>,
    vocabulary: Vec<String>,
    word_ids: HashMap<String, usize>,
    tagset: TagSet,
    annotated: bool,
}

impl CorpusSide {
    fn build(raw: Vec<Vec<(String, usize)>>, tagset: TagSet, annotated: bool) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::Validation("no phrases".into()));
        }
        let mut vocabulary = Vec::new();
        let mut word_ids = HashMap::new();
        let mut phrases = Vec::with_capacity(raw.len());
        for (index, tokens) in raw.into_iter().enumerate() {
            if tokens.is_empty() {
                return Err(Error::Validation(format!("phrase {index} has no tokens")));
            }
            let tokens = tokens
                .into_iter()
                .map(|(surface, tag_index)| {
                    validate_surface(&surface)?;
                    if tag_index >= tagset.len() {
                        return Err(Error::Validation(format!(
                            "tag index {tag_index} out of range for {} tags",
                            tagset.len()
                        )));
                    }
                    if !word_ids.contains_key(&surface) {
                        word_ids.insert(surface.clone(), vocabulary.len());
                        vocabulary.push(surface.clone());
                    }
                    Ok(AnnotatedToken { surface, tag_index })
                })
                .collect::<Result<Vec<_>>>()?;
            phrases.push(Phrase { index, tokens });
        }
        Ok(CorpusSide {
            phrases,
            vocabulary,
            word_ids,
            tagset,
            annotated,
        })
    }

    /// Builds a side from already tokenized phrases of `(surface, tag)` pairs.
    pub fn from_tagged<P, T>(phrases: P, outside_tag: &str) -> Result<Self>
    where
        P: IntoIterator<Item = T>,
        T: IntoIterator<Item = (String, String)>,
    {
        let mut tagset = TagSet::new(outside_tag);
        let raw = phrases
            .into_iter()
            .map(|p| {
                p.into_iter()
                    .map(|(s, t)| {
                        let i = tagset.intern(&t);
                        (s, i)
                    })
                    .collect()
            })
            .collect();
        CorpusSide::build(raw, tagset, true)
    }

    /// Builds an unannotated side; every token gets the outside tag.
    pub fn from_untagged<P, T>(phrases: P) -> Result<Self>
    where
        P: IntoIterator<Item = T>,
        T: IntoIterator<Item = String>,
    {
        let tagset = TagSet::default();
        let o = tagset.outside_index();
        let raw = phrases
            .into_iter()
            .map(|p| p.into_iter().map(|s| (s, o)).collect())
            .collect();
        CorpusSide::build(raw, tagset, false)
    }

    pub fn phrases(&self) -> &[Phrase] {
        &self.phrases
    }

    pub fn phrase_count(&self) -> usize {
        self.phrases.len()
    }

    /// Distinct surfaces in first-occurrence order.
    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn word_id(&self, surface: &str) -> Option<usize> {
        self.word_ids.get(surface).copied()
    }

    pub fn tagset(&self) -> &TagSet {
        &self.tagset
    }

    pub fn is_annotated(&self) -> bool {
        self.annotated
    }

    pub fn token_count(&self) -> usize {
        self.phrases.iter().map(|p| p.tokens.len()).sum()
    }

    /// Serializes to the two-column annotated format.
    pub fn to_conll(&self) -> String {
        let mut out = String::new();
        for (i, phrase) in self.phrases.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            for tok in &phrase.tokens {
                let _ = writeln!(out, "{}\t{}", tok.surface, self.tagset.tags[tok.tag_index]);
            }
        }
        out
    }

    /// Serializes to the plain one-phrase-per-line format, dropping tags.
    pub fn to_plain(&self) -> String {
        let mut out = String::new();
        for phrase in &self.phrases {
            let line: Vec<&str> = phrase.tokens.iter().map(|t| t.surface.as_str()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Re-expresses tag indices against `tagset`, which must contain every
    /// tag used by this side.
    fn retag(mut self, tagset: &TagSet) -> Self {
        let mapping: Vec<usize> = self
            .tagset
            .tags
            .iter()
            .map(|t| tagset.index(t).expect("tag present in merged set"))
            .collect();
        for phrase in &mut self.phrases {
            for tok in &mut phrase.tokens {
                tok.tag_index = mapping[tok.tag_index];
            }
        }
        self.tagset = tagset.clone();
        self
    }
}

fn validate_surface(surface: &str) -> Result<()> {
    if surface.is_empty() {
        return Err(Error::Validation("empty token surface".into()));
    }
    if surface.chars().any(char::is_whitespace) {
        return Err(Error::Validation(format!(
            "token surface {surface:?} contains whitespace"
        )));
    }
    Ok(())
}

/// Parses the annotated two-column format. The tag set is inferred from the
/// file, with the outside tag `O` always at index 0.
pub fn parse_annotated_side(text: &str) -> Result<CorpusSide> {
    let mut tagset = TagSet::default();
    let mut raw: Vec<Vec<(String, usize)>> = Vec::new();
    let mut current: Vec<(String, usize)> = Vec::new();
    // line number of a blank separator not yet followed by a token
    let mut pending_blank: Option<usize> = None;

    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            if current.is_empty() {
                // blank at the very start, or a second blank in a row
                pending_blank.get_or_insert(lineno);
            } else {
                raw.push(std::mem::take(&mut current));
                pending_blank = None;
            }
            continue;
        }
        if let Some(at) = pending_blank.take() {
            return Err(Error::Validation(format!("empty phrase at line {at}")));
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 2 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected 2 tab-separated columns, found {}", cols.len()),
            });
        }
        let (surface, tag) = (cols[0], cols[1]);
        if surface.is_empty() || tag.is_empty() {
            return Err(Error::Parse {
                line: lineno,
                message: "empty column".into(),
            });
        }
        if surface.chars().any(char::is_whitespace) || tag.chars().any(char::is_whitespace) {
            return Err(Error::Parse {
                line: lineno,
                message: "column contains whitespace".into(),
            });
        }
        let tag_index = tagset.intern(tag);
        current.push((surface.to_string(), tag_index));
    }
    if !current.is_empty() {
        raw.push(current);
    }
    CorpusSide::build(raw, tagset, true)
}

/// Parses the plain format, one whitespace-tokenized phrase per line.
pub fn parse_plain_side(text: &str) -> Result<CorpusSide> {
    let lines: Vec<&str> = text.lines().collect();
    // trailing blank lines are not phrases
    let end = lines
        .iter()
        .rposition(|l| !l.trim().is_empty())
        .map_or(0, |i| i + 1);
    let mut raw = Vec::with_capacity(end);
    for (i, line) in lines[..end].iter().enumerate() {
        let tokens: Vec<String> = line.split_whitespace().map(str::to_string).collect();
        if tokens.is_empty() {
            return Err(Error::Validation(format!("empty phrase at line {}", i + 1)));
        }
        raw.push(tokens);
    }
    CorpusSide::from_untagged(raw)
}

/// Sentence-aligned pair of sides sharing one phrase index space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParallelCorpus {
    source: CorpusSide,
    target: CorpusSide,
}

impl ParallelCorpus {
    pub fn source(&self) -> &CorpusSide {
        &self.source
    }

    pub fn target(&self) -> &CorpusSide {
        &self.target
    }

    pub fn phrase_count(&self) -> usize {
        self.source.phrase_count()
    }

    /// The tag set shared by both sides.
    pub fn tagset(&self) -> &TagSet {
        self.source.tagset()
    }
}

/// Pairs two sides by phrase index. No token-level alignment is attempted.
///
/// When the target is annotated, both sides are re-indexed against the union
/// of their tag sets (source tags first) so tag indices agree.
pub fn align(source: CorpusSide, target: CorpusSide) -> Result<ParallelCorpus> {
    if !source.is_annotated() {
        return Err(Error::Validation("source side must be annotated".into()));
    }
    if source.phrase_count() != target.phrase_count() {
        return Err(Error::Alignment {
            source_count: source.phrase_count(),
            target_count: target.phrase_count(),
        });
    }
    let mut merged = source.tagset.clone();
    if target.is_annotated() {
        for t in target.tagset.tags() {
            merged.intern(t);
        }
    }
    let source = source.retag(&merged);
    let target = if target.is_annotated() {
        target.retag(&merged)
    } else {
        let o = merged.index(target.tagset.outside_tag()).unwrap_or(merged.outside);
        let mut target = target;
        for phrase in &mut target.phrases {
            for tok in &mut phrase.tokens {
                tok.tag_index = o;
            }
        }
        target.tagset = merged;
        target
    };
    Ok(ParallelCorpus { source, target })
}

/// Loads `source.conll` plus exactly one of `target.conll` or `target.txt`.
pub fn load_dir(dir: &Path) -> Result<ParallelCorpus> {
    let source_path = dir.join(SOURCE_FILE);
    if !source_path.is_file() {
        return Err(Error::NotFound { path: SOURCE_FILE.into() });
    }
    let annotated = dir.join(TARGET_ANNOTATED_FILE);
    let plain = dir.join(TARGET_PLAIN_FILE);
    let target = match (annotated.is_file(), plain.is_file()) {
        (true, false) => parse_annotated_side(&fs::read_to_string(&annotated)?)?,
        (false, true) => parse_plain_side(&fs::read_to_string(&plain)?)?,
        (true, true) => {
            return Err(Error::Validation(format!(
                "both {TARGET_ANNOTATED_FILE} and {TARGET_PLAIN_FILE} present; expected exactly one"
            )))
        }
        (false, false) => {
            return Err(Error::NotFound {
                path: format!("{TARGET_ANNOTATED_FILE} or {TARGET_PLAIN_FILE}").into(),
            })
        }
    };
    let source = parse_annotated_side(&fs::read_to_string(&source_path)?)?;
    align(source, target)
}
