//! Fully-connected ReLU classifier with softmax output, trained by
//! mini-batch RMSprop with inverted dropout. Double precision throughout.

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FnnSpec {
    pub input_size: usize,
    pub hidden_sizes: Vec<usize>,
    pub output_size: usize,
    pub dropout_rate: f64,
}

impl Default for FnnSpec {
    /// 32 → 128 → 64 → 32 → 2, dropout 0.2.
    fn default() -> Self {
        FnnSpec {
            input_size: 32,
            hidden_sizes: vec![128, 64, 32],
            output_size: 2,
            dropout_rate: 0.2,
        }
    }
}

impl FnnSpec {
    pub fn validate(&self) -> Result<()> {
        if self.input_size == 0 || self.output_size == 0 || self.hidden_sizes.contains(&0) {
            return Err(Error::config("fnn", "layer sizes must be positive"));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::config("dropout_rate", "must lie in [0, 1)"));
        }
        Ok(())
    }

    /// `(fan_in, fan_out)` for each dense layer, input to output.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        let sizes: Vec<usize> = std::iter::once(self.input_size)
            .chain(self.hidden_sizes.iter().copied())
            .chain(std::iter::once(self.output_size))
            .collect();
        sizes.windows(2).map(|w| (w[0], w[1])).collect()
    }
}

pub fn param_count(spec: &FnnSpec) -> usize {
    spec.layer_dims()
        .iter()
        .map(|&(fan_in, fan_out)| fan_in * fan_out + fan_out)
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub rms_decay: f64,
    pub rms_epsilon: f64,
    pub batch_size: usize,
    pub epochs_per_round: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            rms_decay: 0.9,
            rms_epsilon: 1e-7,
            batch_size: 32,
            epochs_per_round: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config("learning_rate", "must be finite and non-negative"));
        }
        if !(self.rms_decay > 0.0 && self.rms_decay < 1.0) {
            return Err(Error::config("rms_decay", "must lie in (0, 1)"));
        }
        if !(self.rms_epsilon > 0.0) {
            return Err(Error::config("rms_epsilon", "must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size", "must be at least 1"));
        }
        Ok(())
    }
}

/// One dense layer; `weights` is `fan_out × fan_in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    layers: Vec<Layer>,
}

impl ModelParams {
    pub fn zeros(spec: &FnnSpec) -> Self {
        ModelParams {
            layers: spec
                .layer_dims()
                .into_iter()
                .map(|(fan_in, fan_out)| Layer {
                    weights: Array2::zeros((fan_out, fan_in)),
                    bias: Array1::zeros(fan_out),
                })
                .collect(),
        }
    }

    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        for (i, l) in layers.iter().enumerate() {
            if l.weights.nrows() != l.bias.len() {
                return Err(Error::ShapeMismatch);
            }
            if i > 0 && layers[i - 1].weights.nrows() != l.weights.ncols() {
                return Err(Error::ShapeMismatch);
            }
        }
        if layers.is_empty() {
            return Err(Error::Empty("layer list"));
        }
        Ok(ModelParams { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].weights.ncols()
    }

    pub fn output_size(&self) -> usize {
        self.layers[self.layers.len() - 1].weights.nrows()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn same_shape(&self, other: &ModelParams) -> bool {
        self.layers.len() == other.layers.len()
            && self
                .layers
                .iter()
                .zip(&other.layers)
                .all(|(a, b)| a.weights.dim() == b.weights.dim() && a.bias.len() == b.bias.len())
    }

    /// All parameters, layer by layer: weights row-major, then bias.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend(l.weights.iter());
            out.extend(l.bias.iter());
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().all(|v| v.is_finite()) && l.bias.iter().all(|v| v.is_finite()))
    }

    /// Squared euclidean distance between two parameter vectors.
    pub fn distance_sq(&self, other: &ModelParams) -> f64 {
        self.layers
            .iter()
            .zip(&other.layers)
            .map(|(a, b)| {
                let w: f64 = Zip::from(&a.weights)
                    .and(&b.weights)
                    .fold(0.0, |acc, x, y| acc + (x - y) * (x - y));
                let c: f64 = Zip::from(&a.bias)
                    .and(&b.bias)
                    .fold(0.0, |acc, x, y| acc + (x - y) * (x - y));
                w + c
            })
            .sum()
    }

    fn map_with(&mut self, other: &ModelParams, mut f: impl FnMut(&mut f64, f64)) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            Zip::from(&mut a.weights).and(&b.weights).for_each(|x, &y| f(x, y));
            Zip::from(&mut a.bias).and(&b.bias).for_each(|x, &y| f(x, y));
        }
    }
}

/// Weights uniform in `±sqrt(6 / (fan_in + fan_out))`, biases zero.
pub fn init<R: Rng + ?Sized>(spec: &FnnSpec, rng: &mut R) -> ModelParams {
    let mut params = ModelParams::zeros(spec);
    for layer in &mut params.layers {
        let (fan_out, fan_in) = layer.weights.dim();
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        layer.weights.mapv_inplace(|_| rng.random_range(-limit..limit));
    }
    params
}

/// Per-node RMSprop accumulators. Never exchanged between nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct RmsProp {
    mean_sq: ModelParams,
}

impl RmsProp {
    pub fn new(like: &ModelParams) -> Self {
        let mut mean_sq = like.clone();
        for l in &mut mean_sq.layers {
            l.weights.fill(0.0);
            l.bias.fill(0.0);
        }
        RmsProp { mean_sq }
    }

    pub fn accumulators(&self) -> &ModelParams {
        &self.mean_sq
    }

    pub fn step(&mut self, params: &mut ModelParams, grads: &ModelParams, config: &TrainConfig) {
        let (rho, lr, eps) = (config.rms_decay, config.learning_rate, config.rms_epsilon);
        for ((p, s), g) in params
            .layers
            .iter_mut()
            .zip(&mut self.mean_sq.layers)
            .zip(&grads.layers)
        {
            Zip::from(&mut p.weights)
                .and(&mut s.weights)
                .and(&g.weights)
                .for_each(|p, s, &g| {
                    *s = rho * *s + (1.0 - rho) * g * g;
                    *p -= lr * g / (s.sqrt() + eps);
                });
            Zip::from(&mut p.bias)
                .and(&mut s.bias)
                .and(&g.bias)
                .for_each(|p, s, &g| {
                    *s = rho * *s + (1.0 - rho) * g * g;
                    *p -= lr * g / (s.sqrt() + eps);
                });
        }
    }
}

/// Feature rows with class indices.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledData {
    features: Array2<f64>,
    labels: Vec<usize>,
}

impl LabeledData {
    pub fn new(features: Array2<f64>, labels: Vec<usize>) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::Dimension {
                expected: features.nrows(),
                got: labels.len(),
            });
        }
        Ok(LabeledData { features, labels })
    }

    pub fn from_rows<'a>(rows: impl IntoIterator<Item = (&'a [f64], usize)>, width: usize) -> Result<Self> {
        let mut flat = Vec::new();
        let mut labels = Vec::new();
        for (row, label) in rows {
            if row.len() != width {
                return Err(Error::Dimension {
                    expected: width,
                    got: row.len(),
                });
            }
            flat.extend_from_slice(row);
            labels.push(label);
        }
        let features = Array2::from_shape_vec((labels.len(), width), flat).expect("row widths checked above");
        Ok(LabeledData { features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn select(&self, rows: &[usize]) -> LabeledData {
        LabeledData {
            features: self.features.select(Axis(0), rows),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
        }
    }

    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a LabeledData>) -> Result<LabeledData> {
        let parts: Vec<&LabeledData> = parts.into_iter().collect();
        let first = parts.first().ok_or(Error::Empty("data"))?;
        let views: Vec<ArrayView2<f64>> = parts.iter().map(|p| p.features.view()).collect();
        let features = ndarray::concatenate(Axis(0), &views).map_err(|_| Error::Dimension {
            expected: first.features.ncols(),
            got: parts
                .iter()
                .map(|p| p.features.ncols())
                .find(|&c| c != first.features.ncols())
                .unwrap_or(0),
        })?;
        Ok(LabeledData {
            features,
            labels: parts.iter().flat_map(|p| p.labels.iter().copied()).collect(),
        })
    }
}

/// Forward-pass mode. Training applies inverted dropout to every hidden
/// activation; evaluation applies neither dropout nor rescaling.
pub enum Mode<'r, R: ?Sized> {
    Eval,
    Train { dropout_rate: f64, rng: &'r mut R },
}

struct Trace {
    /// Input to each layer.
    inputs: Vec<Array2<f64>>,
    /// Pre-activations of hidden layers.
    pre: Vec<Array2<f64>>,
    /// Scaled dropout masks of hidden layers.
    masks: Vec<Option<Array2<f64>>>,
    probs: Array2<f64>,
}

fn check_input(params: &ModelParams, width: usize) -> Result<()> {
    if width != params.input_size() {
        return Err(Error::Dimension {
            expected: params.input_size(),
            got: width,
        });
    }
    Ok(())
}

fn affine(x: &ArrayView2<f64>, layer: &Layer) -> Array2<f64> {
    let mut z = x.dot(&layer.weights.t());
    z += &layer.bias;
    z
}

fn softmax_rows(logits: &mut Array2<f64>) {
    for mut row in logits.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row /= sum;
    }
}

fn run_forward<R: Rng + ?Sized>(params: &ModelParams, x: ArrayView2<f64>, mut mode: Mode<'_, R>) -> Trace {
    let hidden = params.layers.len() - 1;
    let mut inputs = Vec::with_capacity(params.layers.len());
    let mut pre = Vec::with_capacity(hidden);
    let mut masks = Vec::with_capacity(hidden);
    let mut act = x.to_owned();
    for layer in &params.layers[..hidden] {
        let z = affine(&act.view(), layer);
        let mut h = z.mapv(|v| v.max(0.0));
        let mask =
            match &mut mode {
                Mode::Train { dropout_rate, rng } if *dropout_rate > 0.0 => {
                    let keep = 1.0 / (1.0 - *dropout_rate);
                    let m = Array2::from_shape_simple_fn(h.dim(), || {
                        if rng.random::<f64>() < *dropout_rate {
                            0.0
                        } else {
                            keep
                        }
                    });
                    h *= &m;
                    Some(m)
                }
                _ => None,
            };
        inputs.push(std::mem::replace(&mut act, h));
        pre.push(z);
        masks.push(mask);
    }
    let mut logits = affine(&act.view(), &params.layers[hidden]);
    inputs.push(act);
    softmax_rows(&mut logits);
    Trace {
        inputs,
        pre,
        masks,
        probs: logits,
    }
}

/// Class probabilities for a single feature vector.
pub fn forward<R: Rng + ?Sized>(params: &ModelParams, features: &[f64], mode: Mode<'_, R>) -> Result<Vec<f64>> {
    check_input(params, features.len())?;
    let x = ArrayView2::from_shape((1, features.len()), features).expect("contiguous row");
    Ok(run_forward(params, x, mode).probs.row(0).to_vec())
}

/// Class probabilities for every row of `x`, evaluation mode.
pub fn predict_proba(params: &ModelParams, x: ArrayView2<f64>) -> Result<Array2<f64>> {
    check_input(params, x.ncols())?;
    Ok(run_forward::<rand::rngs::ThreadRng>(params, x, Mode::Eval).probs)
}

/// Mean cross-entropy of `batch` and its gradient with respect to every
/// parameter.
pub fn loss_and_gradient<R: Rng + ?Sized>(
    params: &ModelParams,
    batch: &LabeledData,
    mode: Mode<'_, R>,
) -> Result<(f64, ModelParams)> {
    if batch.is_empty() {
        return Err(Error::Empty("batch"));
    }
    check_input(params, batch.features.ncols())?;
    let classes = params.output_size();
    if let Some(&bad) = batch.labels.iter().find(|&&l| l >= classes) {
        return Err(Error::Dimension {
            expected: classes,
            got: bad + 1,
        });
    }
    let trace = run_forward(params, batch.features.view(), mode);
    let n = batch.len() as f64;

    let mut loss = 0.0;
    let mut delta = trace.probs.clone();
    for (i, &label) in batch.labels.iter().enumerate() {
        loss -= trace.probs[[i, label]].max(f64::MIN_POSITIVE).ln();
        delta[[i, label]] -= 1.0;
    }
    delta /= n;
    loss /= n;

    let mut grads = Vec::with_capacity(params.layers.len());
    for l in (0..params.layers.len()).rev() {
        let dw = delta.t().dot(&trace.inputs[l]);
        let db = delta.sum_axis(Axis(0));
        grads.push(Layer { weights: dw, bias: db });
        if l > 0 {
            let mut back = delta.dot(&params.layers[l].weights);
            if let Some(mask) = &trace.masks[l - 1] {
                back *= mask;
            }
            Zip::from(&mut back).and(&trace.pre[l - 1]).for_each(|d, &z| {
                if z <= 0.0 {
                    *d = 0.0;
                }
            });
            delta = back;
        }
    }
    grads.reverse();
    Ok((loss, ModelParams { layers: grads }))
}

/// Runs `epochs_per_round` shuffled mini-batch passes over `data`, updating
/// `optimizer` in place, and returns the trained parameters.
pub fn train_local<R: Rng + ?Sized>(
    spec: &FnnSpec,
    params: &ModelParams,
    optimizer: &mut RmsProp,
    data: &LabeledData,
    config: &TrainConfig,
    rng: &mut R,
) -> Result<ModelParams> {
    if data.is_empty() {
        return Err(Error::Empty("training data"));
    }
    config.validate()?;
    if !optimizer.mean_sq.same_shape(params) {
        return Err(Error::ShapeMismatch);
    }
    let mut params = params.clone();
    let mut order: Vec<usize> = (0..data.len()).collect();
    for _ in 0..config.epochs_per_round {
        order.shuffle(rng);
        for chunk in order.chunks(config.batch_size) {
            let batch = data.select(chunk);
            let mode = Mode::Train {
                dropout_rate: spec.dropout_rate,
                rng: &mut *rng,
            };
            let (_, grads) = loss_and_gradient(&params, &batch, mode)?;
            optimizer.step(&mut params, &grads, config);
        }
    }
    Ok(params)
}

/// Index of the largest probability; ties go to the lower class index.
pub fn argmax(row: impl IntoIterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in row.into_iter().enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

const EVAL_BLOCK: usize = 256;

/// Fraction of rows whose predicted class equals the label.
pub fn evaluate(params: &ModelParams, data: &LabeledData) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Empty("evaluation data"));
    }
    check_input(params, data.features.ncols())?;
    let mut hits = 0;
    // fixed blocks keep intermediates small
    for (block, labels) in data
        .features
        .axis_chunks_iter(Axis(0), EVAL_BLOCK)
        .zip(data.labels.chunks(EVAL_BLOCK))
    {
        let probs = predict_proba(params, block)?;
        hits += probs
            .rows()
            .into_iter()
            .zip(labels)
            .filter(|(row, &label)| argmax(row.iter().copied()) == label)
            .count();
    }
    Ok(hits as f64 / data.len() as f64)
}

/// Element-wise mean with uniform weights, summed left to right.
pub fn federated_average<'a>(models: impl IntoIterator<Item = &'a ModelParams>) -> Result<ModelParams> {
    let mut iter = models.into_iter();
    let first = iter.next().ok_or(Error::Empty("model list"))?;
    let mut sum = first.clone();
    let mut count = 1usize;
    for m in iter {
        if !m.same_shape(&sum) {
            return Err(Error::ShapeMismatch);
        }
        sum.map_with(m, |acc, v| *acc += v);
        count += 1;
    }
    if count > 1 {
        let denom = count as f64;
        for l in &mut sum.layers {
            l.weights.mapv_inplace(|v| v / denom);
            l.bias.mapv_inplace(|v| v / denom);
        }
    }
    Ok(sum)
}

const CHECKPOINT_MAGIC: &[u8; 4] = b"DFLM";
const CHECKPOINT_VERSION: u32 = 1;

/// Binary checkpoint of a list of models: magic, version and model count,
/// then per model its layer count and per layer `(fan_out, fan_in)` followed
/// by the weights (row-major) and bias as little-endian `f64`.
pub fn encode_checkpoint(models: &[ModelParams]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&(models.len() as u32).to_le_bytes());
    for m in models {
        out.extend_from_slice(&(m.layers.len() as u32).to_le_bytes());
        for l in &m.layers {
            let (rows, cols) = l.weights.dim();
            out.extend_from_slice(&(rows as u32).to_le_bytes());
            out.extend_from_slice(&(cols as u32).to_le_bytes());
            for v in l.weights.iter().chain(l.bias.iter()) {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.bytes.len() < n {
            return Err(Error::Checkpoint("truncated".into()));
        }
        let (head, tail) = self.bytes.split_at(n);
        self.bytes = tail;
        Ok(head)
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as usize)
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(
            n.checked_mul(8)
                .ok_or_else(|| Error::Checkpoint("size overflow".into()))?,
        )?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<Vec<ModelParams>> {
    let mut r = Reader { bytes };
    if r.take(4)? != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION as usize {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let count = r.u32()?;
    let mut models = Vec::with_capacity(count.min(1024));
    for _ in 0..count {
        let layer_count = r.u32()?;
        let mut layers = Vec::with_capacity(layer_count.min(64));
        for _ in 0..layer_count {
            let rows = r.u32()?;
            let cols = r.u32()?;
            let weights = Array2::from_shape_vec((rows, cols), r.f64s(rows * cols)?)
                .map_err(|e| Error::Checkpoint(e.to_string()))?;
            let bias = Array1::from(r.f64s(rows)?);
            layers.push(Layer { weights, bias });
        }
        models.push(ModelParams::from_layers(layers).map_err(|e| Error::Checkpoint(e.to_string()))?);
    }
    if !r.bytes.is_empty() {
        return Err(Error::Checkpoint("trailing bytes".into()));
    }
    Ok(models)
}
