//! The linear three-branch head: class logits plus start/end inclusion
//! probabilities over one stacked feature vector, together with its analytic
//! backward pass.

use crate::classifier::loss::{total_loss, BCE_EPS};
use crate::domain::{ClipLabels, ClipScores};
use crate::error::{Error, Result};
use crate::par;
use crate::rng::{SimRng, Stream};

/// One stacked feature vector with its training targets.
#[derive(Clone, Debug, PartialEq)]
pub struct Example {
    pub features: Vec<f64>,
    pub labels: ClipLabels,
}

/// Learnable blocks of the head. Also used for gradients and momentum
/// buffers, which share the same shape.
#[derive(Clone, Debug, PartialEq)]
pub struct HeadWeights {
    pub n_classes: usize,
    pub dim: usize,
    /// Row-major `n_classes × dim`.
    pub w_cls: Vec<f64>,
    pub b_cls: Vec<f64>,
    pub w_start: Vec<f64>,
    pub b_start: f64,
    pub w_end: Vec<f64>,
    pub b_end: f64,
}

/// Block names in serialization order.
pub const BLOCK_NAMES: [&str; 6] = ["w_cls", "b_cls", "w_start", "b_start", "w_end", "b_end"];

impl HeadWeights {
    pub fn zeros(n_classes: usize, dim: usize) -> Self {
        HeadWeights {
            n_classes,
            dim,
            w_cls: vec![0.0; n_classes * dim],
            b_cls: vec![0.0; n_classes],
            w_start: vec![0.0; dim],
            b_start: 0.0,
            w_end: vec![0.0; dim],
            b_end: 0.0,
        }
    }

    /// Fan-in scaled uniform weights in `±1/sqrt(dim)`, zero biases.
    pub fn init(n_classes: usize, dim: usize, seed: u64) -> Self {
        let mut rng = SimRng::derived(seed, 0, Stream::Init);
        let bound = 1.0 / (dim as f64).sqrt();
        let mut draw =
            |n: usize| -> Vec<f64> { (0..n).map(|_| rng.range(-bound, bound)).collect() };
        let w_cls = draw(n_classes * dim);
        let w_start = draw(dim);
        let w_end = draw(dim);
        HeadWeights {
            n_classes,
            dim,
            w_cls,
            b_cls: vec![0.0; n_classes],
            w_start,
            b_start: 0.0,
            w_end,
            b_end: 0.0,
        }
    }

    pub fn blocks(&self) -> [&[f64]; 6] {
        [
            &self.w_cls,
            &self.b_cls,
            &self.w_start,
            std::slice::from_ref(&self.b_start),
            &self.w_end,
            std::slice::from_ref(&self.b_end),
        ]
    }

    pub fn blocks_mut(&mut self) -> [&mut [f64]; 6] {
        [
            &mut self.w_cls,
            &mut self.b_cls,
            &mut self.w_start,
            std::slice::from_mut(&mut self.b_start),
            &mut self.w_end,
            std::slice::from_mut(&mut self.b_end),
        ]
    }

    /// Whether block `i` (in [`BLOCK_NAMES`] order) holds weights rather than biases.
    pub fn is_weight_block(i: usize) -> bool {
        matches!(i, 0 | 2 | 4)
    }

    pub fn is_finite(&self) -> bool {
        self.blocks()
            .iter()
            .all(|b| b.iter().all(|v| v.is_finite()))
    }

    pub(crate) fn add_assign(&mut self, other: &HeadWeights) {
        for (dst, src) in self.blocks_mut().into_iter().zip(other.blocks()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        }
    }

    pub(crate) fn scale(&mut self, k: f64) {
        for block in self.blocks_mut() {
            for v in block.iter_mut() {
                *v *= k;
            }
        }
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Dimension {
                what: "stacked feature",
                expected: self.dim,
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("stacked feature"));
        }
        Ok(())
    }

    fn logits(&self, x: &[f64]) -> Vec<f64> {
        self.w_cls
            .chunks_exact(self.dim)
            .zip(&self.b_cls)
            .map(|(row, b)| dot(row, x) + b)
            .collect()
    }

    /// Scores one stacked feature vector.
    pub fn forward(&self, x: &[f64]) -> Result<ClipScores> {
        self.check_input(x)?;
        Ok(ClipScores {
            class_logits: self.logits(x),
            p_start: sigmoid(dot(&self.w_start, x) + self.b_start),
            p_end: sigmoid(dot(&self.w_end, x) + self.b_end),
        })
    }

    /// Mean total loss over `batch`.
    pub fn mean_loss(&self, batch: &[Example], lambda: f64) -> Result<f64> {
        let mut sum = 0.0;
        for ex in batch {
            sum += total_loss(&self.forward(&ex.features)?, &ex.labels, lambda);
        }
        Ok(sum / batch.len() as f64)
    }

    /// Gradient of one example's total loss, plus the loss itself.
    pub fn example_gradient(&self, ex: &Example, lambda: f64) -> Result<(HeadWeights, f64)> {
        let mut g = HeadWeights::zeros(self.n_classes, self.dim);
        let loss = self.accumulate_gradient(ex, lambda, &mut g)?;
        Ok((g, loss))
    }

    /// Adds one example's gradient into `acc` and returns its loss.
    fn accumulate_gradient(&self, ex: &Example, lambda: f64, acc: &mut HeadWeights) -> Result<f64> {
        let scores = self.forward(&ex.features)?;
        let loss = total_loss(&scores, &ex.labels, lambda);
        let x = &ex.features;

        let probs = crate::domain::softmax(&scores.class_logits);
        for (k, p) in probs.iter().enumerate() {
            let dz = p - if k == ex.labels.class.index() {
                1.0
            } else {
                0.0
            };
            acc.b_cls[k] += dz;
            for (gw, xv) in acc.w_cls[k * self.dim..(k + 1) * self.dim]
                .iter_mut()
                .zip(x)
            {
                *gw += dz * xv;
            }
        }

        if ex.labels.class.is_behavior() {
            let half_lambda = 0.5 * lambda;
            let dz_st = half_lambda * bce_logit_grad(scores.p_start, ex.labels.start_inclusion);
            let dz_end = half_lambda * bce_logit_grad(scores.p_end, ex.labels.end_inclusion);
            acc.b_start += dz_st;
            acc.b_end += dz_end;
            for ((gs, ge), xv) in acc.w_start.iter_mut().zip(acc.w_end.iter_mut()).zip(x) {
                *gs += dz_st * xv;
                *ge += dz_end * xv;
            }
        }
        Ok(loss)
    }

    /// Summed gradient and loss over one slice of a batch, in order.
    fn chunk_gradient(&self, chunk: &[Example], lambda: f64) -> Result<(HeadWeights, f64)> {
        let mut acc = HeadWeights::zeros(self.n_classes, self.dim);
        let mut loss = 0.0;
        for ex in chunk {
            loss += self.accumulate_gradient(ex, lambda, &mut acc)?;
        }
        Ok((acc, loss))
    }
}

/// Examples per unit of parallel work. Fixed, so the summation order (and
/// therefore every bit of the result) does not depend on the thread count.
const GRADIENT_CHUNK: usize = 64;

/// Gradient of the mean total loss over `batch`, with the mean loss.
///
/// The batch is split into fixed-size chunks that may run in parallel; chunk
/// sums are always reduced in batch order, so the result is bit-identical to
/// [`gradient_seq`].
pub fn gradient(
    weights: &HeadWeights,
    batch: &[Example],
    lambda: f64,
) -> Result<(HeadWeights, f64)> {
    let chunks: Vec<&[Example]> = batch.chunks(GRADIENT_CHUNK).collect();
    let parts = par::map(&chunks, |c| weights.chunk_gradient(c, lambda));
    reduce(weights, parts, batch.len())
}

/// Single-threaded [`gradient`].
pub fn gradient_seq(
    weights: &HeadWeights,
    batch: &[Example],
    lambda: f64,
) -> Result<(HeadWeights, f64)> {
    let chunks: Vec<&[Example]> = batch.chunks(GRADIENT_CHUNK).collect();
    let parts = par::map_seq(&chunks, |c| weights.chunk_gradient(c, lambda));
    reduce(weights, parts, batch.len())
}

fn reduce(
    weights: &HeadWeights,
    parts: Vec<Result<(HeadWeights, f64)>>,
    n: usize,
) -> Result<(HeadWeights, f64)> {
    if n == 0 {
        return Err(Error::Empty("batch"));
    }
    let mut total = HeadWeights::zeros(weights.n_classes, weights.dim);
    let mut loss = 0.0;
    for part in parts {
        let (g, l) = part?;
        total.add_assign(&g);
        loss += l;
    }
    total.scale(1.0 / n as f64);
    Ok((total, loss / n as f64))
}

/// d bce(sigmoid(z), y) / dz, zero where the probability clamp is active.
fn bce_logit_grad(p: f64, y: bool) -> f64 {
    if !(BCE_EPS..=1.0 - BCE_EPS).contains(&p) {
        return 0.0;
    }
    p - if y { 1.0 } else { 0.0 }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Head weights plus SGD momentum buffers.
#[derive(Clone, Debug, PartialEq)]
pub struct HeadParameters {
    pub weights: HeadWeights,
    pub momentum: HeadWeights,
}

impl HeadParameters {
    pub fn new(weights: HeadWeights) -> Self {
        let momentum = HeadWeights::zeros(weights.n_classes, weights.dim);
        HeadParameters { weights, momentum }
    }

    pub fn forward(&self, x: &[f64]) -> Result<ClipScores> {
        self.weights.forward(x)
    }
}
