//! Independent oracles shared by the integration suites.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tagproj::corpus::{CorpusSide, TagSet};
use tagproj::network::{Dense, NetworkParams};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random tokenized phrases over a vocabulary of at most `max_words` words.
pub fn random_phrases(rng: &mut ChaCha8Rng, max_phrases: usize, max_words: usize) -> Vec<Vec<String>> {
    let phrases = rng.random_range(1..=max_phrases);
    let words = rng.random_range(1..=max_words);
    (0..phrases)
        .map(|_| {
            let len = rng.random_range(1..=6);
            (0..len).map(|_| format!("t{}", rng.random_range(0..words))).collect()
        })
        .collect()
}

/// Brute-force `(binary rows, itf rows)` keyed by vocabulary order, by
/// scanning the raw token lists.
pub fn brute_force_matrix(phrases: &[Vec<String>], vocabulary: &[String]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut binary = Vec::new();
    let mut itf = Vec::new();
    for word in vocabulary {
        let mut tf = 0u64;
        let mut row = Vec::new();
        for phrase in phrases {
            let mut hit = false;
            for tok in phrase {
                if tok == word {
                    tf += 1;
                    hit = true;
                }
            }
            row.push(if hit { 1.0 } else { 0.0 });
        }
        let weight = 1.0 / tf as f64;
        itf.push(row.iter().map(|v| if *v == 1.0 { weight } else { 0.0 }).collect());
        binary.push(row);
    }
    (binary, itf)
}

/// Straight-line forward pass over the public weight accessors. Returns the
/// mean loss over `batch` and the ReLU activation pattern of every example.
pub fn naive_mean_loss(params: &NetworkParams, batch: &[(Vec<f64>, usize)]) -> (f64, Vec<bool>) {
    fn layer(l: &Dense, x: &[f64]) -> Vec<f64> {
        (0..l.rows())
            .map(|r| {
                let mut s = l.bias()[r];
                for (c, xv) in x.iter().enumerate() {
                    s += l.weight(r, c) * xv;
                }
                s
            })
            .collect()
    }
    let [l1, l2, l3] = params.layers();
    let mut total = 0.0;
    let mut pattern = Vec::new();
    for (x, gold) in batch {
        let z1 = layer(l1, x);
        pattern.extend(z1.iter().map(|v| *v > 0.0));
        let a1: Vec<f64> = z1.iter().map(|v| v.max(0.0)).collect();
        let z2 = layer(l2, &a1);
        pattern.extend(z2.iter().map(|v| *v > 0.0));
        let a2: Vec<f64> = z2.iter().map(|v| v.max(0.0)).collect();
        let z3 = layer(l3, &a2);
        let m = z3.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let denom: f64 = z3.iter().map(|z| (z - m).exp()).sum();
        let p = (z3[*gold] - m).exp() / denom;
        total += -(p + 1e-12).ln();
    }
    (total / batch.len() as f64, pattern)
}

/// Outcome of comparing an analytic gradient with central differences.
pub struct GradCheck {
    pub max_rel_error: f64,
    pub checked: usize,
    /// Coordinates skipped because the perturbation crossed a ReLU kink.
    pub skipped: usize,
}

/// Relative error floor: below it both values count as zero.
pub const REL_FLOOR: f64 = 1e-6;

pub fn central_difference_check(
    params: &NetworkParams,
    batch: &[(Vec<f64>, usize)],
    analytic: &NetworkParams,
    step: f64,
) -> GradCheck {
    let analytic: Vec<f64> = analytic.values().copied().collect();
    let (_, base_pattern) = naive_mean_loss(params, batch);
    let mut probe = params.clone();
    let mut out = GradCheck {
        max_rel_error: 0.0,
        checked: 0,
        skipped: 0,
    };
    for (i, &a) in analytic.iter().enumerate() {
        let original = *probe.values_mut().nth(i).unwrap();
        *probe.values_mut().nth(i).unwrap() = original + step;
        let (plus, pp) = naive_mean_loss(&probe, batch);
        *probe.values_mut().nth(i).unwrap() = original - step;
        let (minus, pm) = naive_mean_loss(&probe, batch);
        *probe.values_mut().nth(i).unwrap() = original;
        if pp != base_pattern || pm != base_pattern {
            out.skipped += 1;
            continue;
        }
        let numeric = (plus - minus) / (2.0 * step);
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(REL_FLOOR);
        out.max_rel_error = out.max_rel_error.max(rel);
        out.checked += 1;
    }
    out
}

/// Per-class recount of micro outcomes over entity tags.
pub fn brute_force_counts(gold: &[usize], pred: &[usize], tagset: &TagSet) -> (u64, u64, u64) {
    let o = tagset.outside_index();
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for class in (0..tagset.len()).filter(|c| *c != o) {
        for (g, p) in gold.iter().zip(pred) {
            match (*g == class, *p == class) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fn_ += 1,
                (false, false) => {}
            }
        }
    }
    (tp, fp, fn_)
}

pub fn two_pass_mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mut sum = 0.0;
    for v in values {
        sum += v;
    }
    let mean = sum / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let mut sq = 0.0;
    for v in values {
        sq += (v - mean) * (v - mean);
    }
    (mean, (sq / (n - 1) as f64).sqrt())
}

pub fn side_from(phrases: &[Vec<String>]) -> CorpusSide {
    CorpusSide::from_untagged(phrases.iter().cloned()).unwrap()
}
