//! C ABI over [`tagproj`].
//!
//! Every fallible function returns a [`TpStatus`] and writes its result
//! through an out pointer. On failure the message is stored per thread and
//! can be read with [`tp_last_error`]. Handles are opaque, owned by the
//! caller and released with the matching `_free` function. Panics never
//! cross the boundary; they surface as [`TpStatus::Panic`].
//!
//! The generated header lives at `include/tagproj.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use tagproj::evaluation::MeanStd;
use tagproj::{
    align, build_matrix, itf, load_dir, parse_annotated_side, parse_plain_side, prf, run_protocol, Counts,
    EvalMode, HyperParams, ParallelCorpus, RepresentationMatrix, RepresentationMode, TrainConfig,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Parse = 4,
    Validation = 5,
    Alignment = 6,
    Config = 7,
    Domain = 8,
    Shape = 9,
    UnknownWord = 10,
    NotFound = 11,
    Io = 12,
    Panic = 13,
}

pub const TP_SIDE_SOURCE: u32 = 0;
pub const TP_SIDE_TARGET: u32 = 1;

pub const TP_MODE_BINARY: u32 = 0;
pub const TP_MODE_ITF: u32 = 1;

pub const TP_EVAL_PROJECTION: u32 = 0;
pub const TP_EVAL_HOLDOUT: u32 = 1;

/// A sentence-aligned corpus with an annotated source side.
pub struct TpCorpus {
    inner: ParallelCorpus,
}

/// Word-by-phrase representation of one corpus side.
pub struct TpMatrix {
    inner: RepresentationMatrix,
}

/// Protocol settings. Start from [`tp_hyperparams_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TpHyperParams {
    pub h1: usize,
    pub h2: usize,
    pub epochs: usize,
    pub k: usize,
    pub r: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    /// `TP_MODE_BINARY` or `TP_MODE_ITF`.
    pub mode: u32,
    /// `TP_EVAL_PROJECTION` or `TP_EVAL_HOLDOUT`.
    pub eval_mode: u32,
}

/// Scores of a single run.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TpRunMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Mean and sample standard deviation over `iterations` runs.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TpMetrics {
    pub precision_mean: f64,
    pub precision_std: f64,
    pub recall_mean: f64,
    pub recall_std: f64,
    pub f1_mean: f64,
    pub f1_std: f64,
    pub iterations: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(TpStatus, String);

impl From<tagproj::Error> for Failure {
    fn from(e: tagproj::Error) -> Self {
        use tagproj::Error as E;
        let status = match &e {
            E::Parse { .. } | E::Schema(_) | E::Csv(_) => TpStatus::Parse,
            E::Validation(_) => TpStatus::Validation,
            E::Alignment { .. } => TpStatus::Alignment,
            E::Config(_) | E::Json(_) => TpStatus::Config,
            E::Domain(_) => TpStatus::Domain,
            E::Shape { .. } => TpStatus::Shape,
            E::UnknownWord(_) => TpStatus::UnknownWord,
            E::NotFound { .. } => TpStatus::NotFound,
            E::Io(_) => TpStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(TpStatus::NullPointer, format!("{what} is null"))
}

fn invalid(message: String) -> Failure {
    Failure(TpStatus::InvalidArgument, message)
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> TpStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            TpStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let detail = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {detail}"));
            TpStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(TpStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

fn mode_from(code: u32) -> Result<RepresentationMode, Failure> {
    match code {
        TP_MODE_BINARY => Ok(RepresentationMode::Binary),
        TP_MODE_ITF => Ok(RepresentationMode::Itf),
        other => Err(invalid(format!("unknown representation mode {other}"))),
    }
}

fn eval_from(code: u32) -> Result<EvalMode, Failure> {
    match code {
        TP_EVAL_PROJECTION => Ok(EvalMode::ProjectionTarget),
        TP_EVAL_HOLDOUT => Ok(EvalMode::HoldoutSource),
        other => Err(invalid(format!("unknown evaluation mode {other}"))),
    }
}

fn side_of(corpus: &ParallelCorpus, side: u32) -> Result<&tagproj::CorpusSide, Failure> {
    match side {
        TP_SIDE_SOURCE => Ok(corpus.source()),
        TP_SIDE_TARGET => Ok(corpus.target()),
        other => Err(invalid(format!("unknown corpus side {other}"))),
    }
}

fn metrics_from(m: &tagproj::AggregateMetrics) -> TpMetrics {
    let MeanStd { mean: pm, std: ps } = m.precision;
    let MeanStd { mean: rm, std: rs } = m.recall;
    let MeanStd { mean: fm, std: fs } = m.f1;
    TpMetrics {
        precision_mean: pm,
        precision_std: ps,
        recall_mean: rm,
        recall_std: rs,
        f1_mean: fm,
        f1_std: fs,
        iterations: m.r,
    }
}

fn hyperparams_from(p: &TpHyperParams) -> Result<HyperParams, Failure> {
    let hp = HyperParams {
        h1: p.h1,
        h2: p.h2,
        k: p.k,
        r: p.r,
        train: TrainConfig::new(p.epochs, p.learning_rate, p.batch_size, p.seed)?,
        mode: mode_from(p.mode)?,
        eval_mode: eval_from(p.eval_mode)?,
    };
    hp.validate()?;
    Ok(hp)
}

impl From<&HyperParams> for TpHyperParams {
    fn from(hp: &HyperParams) -> Self {
        TpHyperParams {
            h1: hp.h1,
            h2: hp.h2,
            epochs: hp.train.epochs,
            k: hp.k,
            r: hp.r,
            learning_rate: hp.train.learning_rate,
            batch_size: hp.train.batch_size,
            seed: hp.train.seed,
            mode: match hp.mode {
                RepresentationMode::Binary => TP_MODE_BINARY,
                RepresentationMode::Itf => TP_MODE_ITF,
            },
            eval_mode: match hp.eval_mode {
                EvalMode::ProjectionTarget => TP_EVAL_PROJECTION,
                EvalMode::HoldoutSource => TP_EVAL_HOLDOUT,
            },
        }
    }
}

/// Message of the last failed call on this thread, or null after a
/// successful call. The pointer stays valid until the next call into the
/// library from the same thread.
#[no_mangle]
pub extern "C" fn tp_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads `source.conll` plus `target.conll` or `target.txt` from `dir`.
///
/// # Safety
/// `dir` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn tp_corpus_load_dir(dir: *const c_char, out: *mut *mut TpCorpus) -> TpStatus {
    guard(|| {
        let dir = text(dir, "dir")?;
        let corpus = load_dir(Path::new(dir))?;
        write(out, Box::into_raw(Box::new(TpCorpus { inner: corpus })), "out")
    })
}

/// Builds a corpus from in-memory text. The source is two-column CoNLL;
/// the target is CoNLL when `target_annotated` is true, otherwise one
/// space-separated phrase per line.
///
/// # Safety
/// Both strings must be NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tp_corpus_from_text(
    source_conll: *const c_char,
    target: *const c_char,
    target_annotated: bool,
    out: *mut *mut TpCorpus,
) -> TpStatus {
    guard(|| {
        let source = parse_annotated_side(text(source_conll, "source_conll")?)?;
        let target_text = text(target, "target")?;
        let target = if target_annotated {
            parse_annotated_side(target_text)?
        } else {
            parse_plain_side(target_text)?
        };
        let corpus = align(source, target)?;
        write(out, Box::into_raw(Box::new(TpCorpus { inner: corpus })), "out")
    })
}

/// # Safety
/// `corpus` must come from this library and not be used afterwards.
/// Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn tp_corpus_free(corpus: *mut TpCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// # Safety
/// `corpus` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tp_corpus_phrase_count(corpus: *const TpCorpus, out: *mut usize) -> TpStatus {
    guard(|| write(out, borrow(corpus, "corpus")?.inner.phrase_count(), "out"))
}

/// Number of tags, the outside tag included.
///
/// # Safety
/// `corpus` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tp_corpus_tag_count(corpus: *const TpCorpus, out: *mut usize) -> TpStatus {
    guard(|| write(out, borrow(corpus, "corpus")?.inner.tagset().len(), "out"))
}

/// Distinct words on one side (`TP_SIDE_SOURCE` or `TP_SIDE_TARGET`).
///
/// # Safety
/// `corpus` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tp_corpus_vocabulary_size(corpus: *const TpCorpus, side: u32, out: *mut usize) -> TpStatus {
    guard(|| {
        let corpus = borrow(corpus, "corpus")?;
        write(out, side_of(&corpus.inner, side)?.vocabulary().len(), "out")
    })
}

/// # Safety
/// `corpus` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tp_matrix_build(
    corpus: *const TpCorpus,
    side: u32,
    mode: u32,
    out: *mut *mut TpMatrix,
) -> TpStatus {
    guard(|| {
        let corpus = borrow(corpus, "corpus")?;
        let matrix = build_matrix(side_of(&corpus.inner, side)?, mode_from(mode)?);
        write(out, Box::into_raw(Box::new(TpMatrix { inner: matrix })), "out")
    })
}

/// # Safety
/// `matrix` must come from this library and not be used afterwards.
/// Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn tp_matrix_free(matrix: *mut TpMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

/// Number of rows (distinct words).
///
/// # Safety
/// `matrix` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tp_matrix_word_count(matrix: *const TpMatrix, out: *mut usize) -> TpStatus {
    guard(|| write(out, borrow(matrix, "matrix")?.inner.word_count(), "out"))
}

/// Row length, equal to the number of aligned phrases.
///
/// # Safety
/// `matrix` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tp_matrix_dimension(matrix: *const TpMatrix, out: *mut usize) -> TpStatus {
    guard(|| write(out, borrow(matrix, "matrix")?.inner.dimension(), "out"))
}

/// Row index of `word`; fails with `UnknownWord` if absent.
///
/// # Safety
/// `matrix` must be a live handle, `word` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tp_matrix_word_id(matrix: *const TpMatrix, word: *const c_char, out: *mut usize) -> TpStatus {
    guard(|| {
        let matrix = borrow(matrix, "matrix")?;
        let word = text(word, "word")?;
        let id = matrix
            .inner
            .word_id(word)
            .ok_or_else(|| Failure::from(tagproj::Error::UnknownWord(word.to_string())))?;
        write(out, id, "out")
    })
}

/// Copies row `word_id` into `buffer`, which must hold at least
/// `tp_matrix_dimension` values; `capacity` is its length.
///
/// # Safety
/// `matrix` must be a live handle and `buffer` valid for `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn tp_matrix_row(
    matrix: *const TpMatrix,
    word_id: usize,
    buffer: *mut f64,
    capacity: usize,
) -> TpStatus {
    guard(|| {
        let matrix = &borrow(matrix, "matrix")?.inner;
        if word_id >= matrix.word_count() {
            return Err(invalid(format!(
                "word id {word_id} out of range ({} words)",
                matrix.word_count()
            )));
        }
        let row = matrix.row(word_id);
        if capacity < row.len() {
            return Err(tagproj::Error::Shape {
                expected: row.len(),
                actual: capacity,
            }
            .into());
        }
        if buffer.is_null() {
            return Err(null("buffer"));
        }
        ptr::copy_nonoverlapping(row.as_ptr(), buffer, row.len());
        Ok(())
    })
}

/// Inverse term frequency weight of a word seen `term_frequency` times.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tp_itf(term_frequency: u64, out: *mut f64) -> TpStatus {
    guard(|| write(out, itf(term_frequency)?, "out"))
}

/// Precision, recall and F1 from outcome counts; zero denominators give 0.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tp_prf(
    true_positives: u64,
    false_positives: u64,
    false_negatives: u64,
    out: *mut TpRunMetrics,
) -> TpStatus {
    guard(|| {
        let m = prf(Counts {
            tp: true_positives,
            fp: false_positives,
            fn_: false_negatives,
        });
        write(
            out,
            TpRunMetrics {
                precision: m.precision,
                recall: m.recall,
                f1: m.f1,
            },
            "out",
        )
    })
}

/// Fills `out` with the library's baseline settings.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tp_hyperparams_default(out: *mut TpHyperParams) -> TpStatus {
    guard(|| write(out, TpHyperParams::from(&HyperParams::baseline()), "out"))
}

/// Runs the repeated k-fold protocol. Deterministic for a given seed.
///
/// # Safety
/// `corpus` must be a live handle, `params` readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tp_run_protocol(
    corpus: *const TpCorpus,
    params: *const TpHyperParams,
    out: *mut TpMetrics,
) -> TpStatus {
    guard(|| {
        let corpus = &borrow(corpus, "corpus")?.inner;
        let hp = hyperparams_from(borrow(params, "params")?)?;
        hp.validate_for(corpus)?;
        let metrics = run_protocol(corpus, &hp)?;
        write(out, metrics_from(&metrics), "out")
    })
}
