//! Feed-forward tag classifier with two ReLU hidden layers and a softmax
//! output, trained with plain mini-batch SGD on mean cross-entropy.
//!
//! Everything is `f64` and single-threaded per run, so a fixed seed gives
//! bit-identical parameters.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::seed;

pub mod checkpoint;

/// Added to the gold probability before taking the log.
pub const LOSS_EPSILON: f64 = 1e-12;

pub const DEFAULT_LEARNING_RATE: f64 = 0.05;
pub const DEFAULT_BATCH_SIZE: usize = 1;

/// One training example: an input vector and its gold tag index.
pub type Example<'a> = (&'a [f64], usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetworkSpec {
    pub input_dim: usize,
    pub h1: usize,
    pub h2: usize,
    pub output_dim: usize,
}

impl NetworkSpec {
    pub fn new(input_dim: usize, h1: usize, h2: usize, output_dim: usize) -> Result<Self> {
        let spec = NetworkSpec {
            input_dim,
            h1,
            h2,
            output_dim,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("input_dim", self.input_dim),
            ("h1", self.h1),
            ("h2", self.h2),
            ("output_dim", self.output_dim),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }

    /// `(rows, cols)` of each weight matrix, input side first.
    pub fn layer_shapes(&self) -> [(usize, usize); 3] {
        [
            (self.h1, self.input_dim),
            (self.h2, self.h1),
            (self.output_dim, self.h2),
        ]
    }
}

/// A fully connected layer: `rows x cols` row-major weights plus a bias per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl Dense {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Dense {
            rows,
            cols,
            weights: vec![0.0; rows * cols],
            bias: vec![0.0; rows],
        }
    }

    pub fn from_parts(rows: usize, cols: usize, weights: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        if weights.len() != rows * cols {
            return Err(Error::Shape {
                expected: rows * cols,
                actual: weights.len(),
            });
        }
        if bias.len() != rows {
            return Err(Error::Shape {
                expected: rows,
                actual: bias.len(),
            });
        }
        if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(Error::Validation("non-finite parameter".into()));
        }
        Ok(Dense {
            rows,
            cols,
            weights,
            bias,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    pub fn weight(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.cols + col]
    }

    fn fill(&mut self, v: f64) {
        self.weights.fill(v);
        self.bias.fill(v);
    }

    /// `out = W x + b`.
    fn affine(&self, x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let row = &self.weights[r * self.cols..(r + 1) * self.cols];
            *o = self.bias[r] + dot(row, x);
        }
    }

    /// `out = W x + b` reading only the listed nonzero input positions.
    fn affine_sparse(&self, x: &[f64], nonzero: &[usize], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let row = &self.weights[r * self.cols..(r + 1) * self.cols];
            let mut acc = 0.0;
            for &j in nonzero {
                acc += row[j] * x[j];
            }
            *o = self.bias[r] + acc;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Weights and biases of the three layers (input to h1, h1 to h2, h2 to output).
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    spec: NetworkSpec,
    layers: [Dense; 3],
}

/// Parameter-shaped gradient.
pub type Gradient = NetworkParams;

impl NetworkParams {
    pub fn zeros(spec: NetworkSpec) -> Self {
        let [a, b, c] = spec.layer_shapes();
        NetworkParams {
            spec,
            layers: [Dense::zeros(a.0, a.1), Dense::zeros(b.0, b.1), Dense::zeros(c.0, c.1)],
        }
    }

    pub fn from_layers(spec: NetworkSpec, layers: [Dense; 3]) -> Result<Self> {
        spec.validate()?;
        for (layer, (rows, cols)) in layers.iter().zip(spec.layer_shapes()) {
            if layer.rows != rows || layer.cols != cols {
                return Err(Error::Shape {
                    expected: rows * cols,
                    actual: layer.rows * layer.cols,
                });
            }
        }
        Ok(NetworkParams { spec, layers })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn layers(&self) -> &[Dense; 3] {
        &self.layers
    }

    pub fn layer_mut(&mut self, index: usize) -> &mut Dense {
        &mut self.layers[index]
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// All parameters in the order W1, b1, W2, b2, W3, b3.
    pub fn values(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(l.bias.iter()))
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.bias.iter_mut()))
    }

    fn fill(&mut self, v: f64) {
        for l in &mut self.layers {
            l.fill(v);
        }
    }

    /// `self -= rate * grad`.
    fn descend(&mut self, grad: &Gradient, rate: f64) {
        for (p, g) in self.values_mut().zip(grad.values()) {
            *p -= rate * g;
        }
    }

    fn scale(&mut self, factor: f64) {
        for v in self.values_mut() {
            *v *= factor;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl TrainConfig {
    pub fn new(epochs: usize, learning_rate: f64, batch_size: usize, seed: u64) -> Result<Self> {
        let c = TrainConfig {
            epochs,
            learning_rate,
            batch_size,
            seed,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        Ok(())
    }
}

/// Glorot-uniform weights, zero biases.
pub fn init_params(spec: NetworkSpec, seed: u64) -> NetworkParams {
    let mut rng = seed::rng(seed);
    let mut params = NetworkParams::zeros(spec);
    for layer in &mut params.layers {
        let bound = (6.0 / (layer.rows + layer.cols) as f64).sqrt();
        for w in &mut layer.weights {
            *w = rng.random_range(-bound..=bound);
        }
    }
    params
}

/// Intermediate values of one forward pass.
#[derive(Debug, Clone, Default)]
pub struct Trace {
    pub pre1: Vec<f64>,
    pub act1: Vec<f64>,
    pub pre2: Vec<f64>,
    pub act2: Vec<f64>,
    pub logits: Vec<f64>,
    pub probs: Vec<f64>,
    nonzero: Vec<usize>,
}

impl Trace {
    fn for_spec(spec: &NetworkSpec) -> Self {
        Trace {
            pre1: vec![0.0; spec.h1],
            act1: vec![0.0; spec.h1],
            pre2: vec![0.0; spec.h2],
            act2: vec![0.0; spec.h2],
            logits: vec![0.0; spec.output_dim],
            probs: vec![0.0; spec.output_dim],
            nonzero: Vec::new(),
        }
    }
}

fn check_input(params: &NetworkParams, x: &[f64]) -> Result<()> {
    if x.len() != params.spec.input_dim {
        return Err(Error::Shape {
            expected: params.spec.input_dim,
            actual: x.len(),
        });
    }
    Ok(())
}

fn relu(pre: &[f64], act: &mut [f64]) {
    for (a, &p) in act.iter_mut().zip(pre) {
        *a = if p > 0.0 { p } else { 0.0 };
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64], out: &mut [f64]) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, &z) in out.iter_mut().zip(logits) {
        *o = (z - max).exp();
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

fn forward_into(params: &NetworkParams, x: &[f64], t: &mut Trace) {
    let [l1, l2, l3] = &params.layers;
    t.nonzero.clear();
    t.nonzero.extend(x.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, _)| i));
    // occurrence vectors are mostly zeros
    if t.nonzero.len() * 2 < x.len() {
        l1.affine_sparse(x, &t.nonzero, &mut t.pre1);
    } else {
        l1.affine(x, &mut t.pre1);
    }
    relu(&t.pre1, &mut t.act1);
    l2.affine(&t.act1, &mut t.pre2);
    relu(&t.pre2, &mut t.act2);
    l3.affine(&t.act2, &mut t.logits);
    softmax(&t.logits, &mut t.probs);
}

/// Full forward pass, keeping every intermediate vector.
pub fn forward_trace(params: &NetworkParams, x: &[f64]) -> Result<Trace> {
    check_input(params, x)?;
    let mut t = Trace::for_spec(&params.spec);
    forward_into(params, x, &mut t);
    Ok(t)
}

/// Output-layer pre-softmax values.
pub fn logits(params: &NetworkParams, x: &[f64]) -> Result<Vec<f64>> {
    Ok(forward_trace(params, x)?.logits)
}

/// Tag probability distribution for input `x`.
pub fn forward(params: &NetworkParams, x: &[f64]) -> Result<Vec<f64>> {
    Ok(forward_trace(params, x)?.probs)
}

/// Cross-entropy `-ln(p[gold] + 1e-12)`.
pub fn loss(probs: &[f64], gold: usize) -> Result<f64> {
    let p = probs.get(gold).ok_or_else(|| {
        Error::Domain(format!("gold index {gold} out of range for {} tags", probs.len()))
    })?;
    Ok(-(p + LOSS_EPSILON).ln())
}

/// First index of the maximum; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub fn predict(params: &NetworkParams, x: &[f64]) -> Result<usize> {
    Ok(argmax(&forward(params, x)?))
}

/// Scratch buffers for backpropagation.
struct Backprop {
    trace: Trace,
    d_out: Vec<f64>,
    d2: Vec<f64>,
    d1: Vec<f64>,
}

impl Backprop {
    fn new(spec: &NetworkSpec) -> Self {
        Backprop {
            trace: Trace::for_spec(spec),
            d_out: vec![0.0; spec.output_dim],
            d2: vec![0.0; spec.h2],
            d1: vec![0.0; spec.h1],
        }
    }

    /// Adds the loss gradient of one example to `grad`.
    fn accumulate(&mut self, params: &NetworkParams, x: &[f64], gold: usize, grad: &mut Gradient) {
        forward_into(params, x, &mut self.trace);
        let t = &self.trace;
        let [_, l2, l3] = &params.layers;
        let [g1, g2, g3] = &mut grad.layers;

        // d(-ln(p_g + eps))/dz = p_g / (p_g + eps) * (p - onehot(g))
        let pg = t.probs[gold];
        let c = pg / (pg + LOSS_EPSILON);
        for (k, d) in self.d_out.iter_mut().enumerate() {
            let y = if k == gold { 1.0 } else { 0.0 };
            *d = c * (t.probs[k] - y);
        }

        outer_accumulate(g3, &self.d_out, &t.act2);
        back_through(l3, &self.d_out, &t.pre2, &mut self.d2);

        outer_accumulate(g2, &self.d2, &t.act1);
        back_through(l2, &self.d2, &t.pre1, &mut self.d1);

        // input layer: only nonzero inputs contribute to dW1
        for (r, &d) in self.d1.iter().enumerate() {
            g1.bias[r] += d;
            if d == 0.0 {
                continue;
            }
            let row = &mut g1.weights[r * g1.cols..(r + 1) * g1.cols];
            for &j in &t.nonzero {
                row[j] += d * x[j];
            }
        }
    }
}

/// `g.W += delta ⊗ input`, `g.b += delta`.
fn outer_accumulate(g: &mut Dense, delta: &[f64], input: &[f64]) {
    for (r, &d) in delta.iter().enumerate() {
        g.bias[r] += d;
        let row = &mut g.weights[r * g.cols..(r + 1) * g.cols];
        for (w, &a) in row.iter_mut().zip(input) {
            *w += d * a;
        }
    }
}

/// `out = (Wᵀ delta) ⊙ relu'(pre)`.
fn back_through(layer: &Dense, delta: &[f64], pre: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    for (r, &d) in delta.iter().enumerate() {
        let row = &layer.weights[r * layer.cols..(r + 1) * layer.cols];
        for (o, &w) in out.iter_mut().zip(row) {
            *o += w * d;
        }
    }
    for (o, &p) in out.iter_mut().zip(pre) {
        if p <= 0.0 {
            *o = 0.0;
        }
    }
}

fn check_batch(params: &NetworkParams, batch: &[Example<'_>]) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::Validation("empty batch".into()));
    }
    for (x, gold) in batch {
        check_input(params, x)?;
        if *gold >= params.spec.output_dim {
            return Err(Error::Domain(format!(
                "gold index {gold} out of range for {} tags",
                params.spec.output_dim
            )));
        }
    }
    Ok(())
}

/// Gradient of the mean cross-entropy over `batch`.
pub fn gradient(params: &NetworkParams, batch: &[Example<'_>]) -> Result<Gradient> {
    check_batch(params, batch)?;
    let mut grad = NetworkParams::zeros(params.spec);
    let mut bp = Backprop::new(&params.spec);
    for &(x, gold) in batch {
        bp.accumulate(params, x, gold, &mut grad);
    }
    grad.scale(1.0 / batch.len() as f64);
    Ok(grad)
}

/// Mean cross-entropy over `batch`.
pub fn mean_loss(params: &NetworkParams, batch: &[Example<'_>]) -> Result<f64> {
    check_batch(params, batch)?;
    let mut total = 0.0;
    for &(x, gold) in batch {
        total += loss(&forward(params, x)?, gold)?;
    }
    Ok(total / batch.len() as f64)
}

/// Fraction of examples whose prediction matches the gold tag.
pub fn accuracy(params: &NetworkParams, examples: &[Example<'_>]) -> Result<f64> {
    if examples.is_empty() {
        return Ok(0.0);
    }
    let mut hits = 0usize;
    for &(x, gold) in examples {
        if predict(params, x)? == gold {
            hits += 1;
        }
    }
    Ok(hits as f64 / examples.len() as f64)
}

/// Epoch-at-a-time SGD driver. [`train`] runs it for `config.epochs`.
pub struct Trainer {
    config: TrainConfig,
    rng: ChaCha8Rng,
    order: Vec<usize>,
    grad: Gradient,
    bp: Backprop,
    epochs_done: usize,
}

impl Trainer {
    pub fn new(params: &NetworkParams, example_count: usize, config: TrainConfig) -> Result<Self> {
        config.validate()?;
        Ok(Trainer {
            config,
            rng: seed::rng(config.seed),
            order: (0..example_count).collect(),
            grad: NetworkParams::zeros(params.spec),
            bp: Backprop::new(&params.spec),
            epochs_done: 0,
        })
    }

    pub fn epochs_done(&self) -> usize {
        self.epochs_done
    }

    /// One shuffled pass over `examples`, one SGD step per batch.
    pub fn run_epoch(&mut self, params: &mut NetworkParams, examples: &[Example<'_>]) -> Result<()> {
        if examples.len() != self.order.len() {
            return Err(Error::Shape {
                expected: self.order.len(),
                actual: examples.len(),
            });
        }
        self.order.shuffle(&mut self.rng);
        for chunk in self.order.chunks(self.config.batch_size) {
            self.grad.fill(0.0);
            for &i in chunk {
                let (x, gold) = examples[i];
                self.bp.accumulate(params, x, gold, &mut self.grad);
            }
            self.grad.scale(1.0 / chunk.len() as f64);
            params.descend(&self.grad, self.config.learning_rate);
        }
        self.epochs_done += 1;
        Ok(())
    }
}

/// Mini-batch SGD for `config.epochs` epochs, reshuffling every epoch.
pub fn train(
    params: &NetworkParams,
    examples: &[Example<'_>],
    config: &TrainConfig,
) -> Result<NetworkParams> {
    check_batch(params, examples)?;
    let mut params = params.clone();
    let mut trainer = Trainer::new(&params, examples.len(), *config)?;
    for _ in 0..config.epochs {
        trainer.run_epoch(&mut params, examples)?;
    }
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(p: usize, h1: usize, h2: usize, o: usize) -> NetworkSpec {
        NetworkSpec::new(p, h1, h2, o).unwrap()
    }

    #[test]
    fn init_is_deterministic_with_zero_biases() {
        let s = spec(2, 3, 2, 2);
        let a = init_params(s, 42);
        let b = init_params(s, 42);
        assert_eq!(a, b);
        assert_ne!(a, init_params(s, 43));
        for l in a.layers() {
            assert!(l.bias().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn init_shapes_and_bounds() {
        let p = init_params(spec(4, 640, 160, 5), 1);
        let shapes: Vec<(usize, usize)> = p.layers().iter().map(|l| (l.rows(), l.cols())).collect();
        assert_eq!(shapes, [(640, 4), (160, 640), (5, 160)]);
        for l in p.layers() {
            let bound = (6.0 / (l.rows() + l.cols()) as f64).sqrt();
            assert!(l.weights().iter().all(|w| w.abs() <= bound));
        }
    }

    #[test]
    fn zero_network_is_uniform() {
        let p = NetworkParams::zeros(spec(3, 4, 4, 2));
        assert_eq!(forward(&p, &[0.3, 1.0, -2.0]).unwrap(), [0.5, 0.5]);
        let p = NetworkParams::zeros(spec(3, 4, 4, 5));
        assert_eq!(forward(&p, &[1.0, 0.0, 0.0]).unwrap(), [0.2; 5]);
        assert_eq!(predict(&p, &[1.0, 0.0, 0.0]).unwrap(), 0);
    }

    #[test]
    fn forward_rejects_wrong_dimension() {
        let p = NetworkParams::zeros(spec(3, 2, 2, 2));
        assert!(matches!(forward(&p, &[1.0]), Err(Error::Shape { expected: 3, actual: 1 })));
    }

    #[test]
    fn loss_values() {
        assert!(loss(&[1.0, 0.0], 0).unwrap().abs() < 1e-9);
        assert!((loss(&[0.5, 0.5], 1).unwrap() - std::f64::consts::LN_2).abs() < 1e-9);
        assert!(loss(&[0.5, 0.5], 7).is_err());
    }

    #[test]
    fn argmax_ties_to_lowest() {
        assert_eq!(argmax(&[0.1, 0.7, 0.2]), 1);
        assert_eq!(argmax(&[0.5, 0.5]), 0);
    }

    #[test]
    fn duplicated_batch_gives_same_gradient() {
        let p = init_params(spec(3, 4, 3, 2), 7);
        let x = [0.5, 0.0, 1.0];
        let single = gradient(&p, &[(&x, 1)]).unwrap();
        let double = gradient(&p, &[(&x, 1), (&x, 1)]).unwrap();
        assert_eq!(single, double);
    }

    #[test]
    fn gradient_rejects_empty_batch() {
        let p = init_params(spec(3, 4, 3, 2), 7);
        assert!(gradient(&p, &[]).is_err());
        assert!(gradient(&p, &[(&[1.0, 0.0, 0.0], 2)]).is_err());
    }

    #[test]
    fn train_config_invariants() {
        assert!(TrainConfig::new(0, 0.1, 1, 0).is_err());
        assert!(TrainConfig::new(1, 0.0, 1, 0).is_err());
        assert!(TrainConfig::new(1, 0.1, 0, 0).is_err());
        assert!(TrainConfig::new(1, 0.1, 1, 0).is_ok());
    }

    #[test]
    fn memorizes_single_example() {
        let p = init_params(spec(2, 8, 8, 2), 3);
        let x = [0.7, -0.2];
        let cfg = TrainConfig::new(200, 0.5, DEFAULT_BATCH_SIZE, 9).unwrap();
        let trained = train(&p, &[(&x, 1)], &cfg).unwrap();
        assert_eq!(predict(&trained, &x).unwrap(), 1);
    }

    #[test]
    fn training_is_bit_reproducible() {
        let p = init_params(spec(3, 5, 4, 3), 11);
        let xs = [[1.0, 0.0, 0.5], [0.0, 1.0, 0.0], [0.2, 0.2, 0.0], [0.0, 0.0, 1.0]];
        let ex: Vec<Example<'_>> = xs.iter().enumerate().map(|(i, x)| (&x[..], i % 3)).collect();
        let cfg = TrainConfig::new(20, 0.1, 3, 5).unwrap();
        let a = train(&p, &ex, &cfg).unwrap();
        let b = train(&p, &ex, &cfg).unwrap();
        assert!(a.values().zip(b.values()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn sparse_and_dense_first_layer_agree() {
        let p = init_params(spec(6, 5, 3, 2), 2);
        let x = [0.0, 0.25, 0.0, 0.0, 0.0, 0.25];
        let mut sparse = vec![0.0; 5];
        let mut dense = vec![0.0; 5];
        p.layers()[0].affine_sparse(&x, &[1, 5], &mut sparse);
        p.layers()[0].affine(&x, &mut dense);
        for (a, b) in sparse.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
