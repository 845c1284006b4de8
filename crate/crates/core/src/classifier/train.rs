//! Minibatch SGD with classic momentum and step learning-rate decay.

use crate::classifier::head::{gradient, Example, HeadParameters, HeadWeights};
use crate::classifier::loss::DEFAULT_LAMBDA;
use crate::error::{Error, Result};
use crate::rng::{SimRng, Stream};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    /// Epochs between learning-rate drops.
    pub lr_step: usize,
    /// Multiplier applied at each drop.
    pub lr_factor: f64,
    pub batch_size: usize,
    pub lambda: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-2,
            momentum: 0.9,
            weight_decay: 1e-5,
            epochs: 30,
            lr_step: 10,
            lr_factor: 0.1,
            batch_size: 8,
            lambda: DEFAULT_LAMBDA,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("train: {what}")));
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be finite and >= 0");
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("momentum must be in [0, 1)");
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return bad("weight_decay must be >= 0");
        }
        if self.epochs == 0 || self.lr_step == 0 || self.batch_size == 0 {
            return bad("epochs, lr_step and batch_size must be positive");
        }
        if !(self.lr_factor > 0.0 && self.lr_factor <= 1.0) {
            return bad("lr_factor must be in (0, 1]");
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be >= 0");
        }
        Ok(())
    }

    /// Learning rate used during 1-based `epoch`.
    pub fn lr_at(&self, epoch: usize) -> f64 {
        let drops = (epoch.saturating_sub(1) / self.lr_step) as i32;
        self.learning_rate * self.lr_factor.powi(drops)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub learning_rate: f64,
    /// Mean total loss over the epoch's minibatches, measured before each update.
    pub mean_loss: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    pub params: HeadParameters,
    pub log: Vec<EpochLog>,
}

/// Trains a freshly initialized head on `data`.
pub fn train(data: &[Example], n_classes: usize, config: &TrainConfig) -> Result<TrainOutcome> {
    let dim = check_dataset(data, n_classes)?;
    let params = HeadParameters::new(HeadWeights::init(n_classes, dim, config.seed));
    train_from(params, data, config)
}

/// Continues training `params` on `data`.
pub fn train_from(
    mut params: HeadParameters,
    data: &[Example],
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    let dim = check_dataset(data, params.weights.n_classes)?;
    if dim != params.weights.dim {
        return Err(Error::Dimension {
            what: "stacked feature",
            expected: params.weights.dim,
            got: dim,
        });
    }

    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut log = Vec::with_capacity(config.epochs);
    let mut batch: Vec<Example> = Vec::with_capacity(config.batch_size);
    for epoch in 1..=config.epochs {
        let lr = config.lr_at(epoch);
        SimRng::derived(config.seed, epoch as u64, Stream::Shuffle).shuffle(&mut order);

        let mut loss_sum = 0.0;
        for idx in order.chunks(config.batch_size) {
            batch.clear();
            batch.extend(idx.iter().map(|&i| data[i].clone()));
            let (mut grad, loss) = gradient(&params.weights, &batch, config.lambda)?;
            loss_sum += loss * batch.len() as f64;
            sgd_step(&mut params, &mut grad, lr, config);
        }
        let mean_loss = loss_sum / data.len() as f64;
        if !mean_loss.is_finite() || !params.weights.is_finite() {
            return Err(Error::NonFinite("training state"));
        }
        log.push(EpochLog {
            epoch,
            learning_rate: lr,
            mean_loss,
        });
    }
    Ok(TrainOutcome { params, log })
}

/// `g += wd·θ` (weights only), `v = μv + g`, `θ -= lr·v`.
fn sgd_step(params: &mut HeadParameters, grad: &mut HeadWeights, lr: f64, config: &TrainConfig) {
    let weights = params.weights.blocks_mut();
    let velocity = params.momentum.blocks_mut();
    let grads = grad.blocks_mut();
    for (i, ((theta, v), g)) in weights.into_iter().zip(velocity).zip(grads).enumerate() {
        let decay = if HeadWeights::is_weight_block(i) {
            config.weight_decay
        } else {
            0.0
        };
        for ((t, v), g) in theta.iter_mut().zip(v.iter_mut()).zip(g.iter_mut()) {
            *g += decay * *t;
            *v = config.momentum * *v + *g;
            *t -= lr * *v;
        }
    }
}

fn check_dataset(data: &[Example], n_classes: usize) -> Result<usize> {
    let first = data.first().ok_or(Error::Empty("training set"))?;
    let dim = first.features.len();
    for ex in data {
        if ex.features.len() != dim {
            return Err(Error::Dimension {
                what: "stacked feature",
                expected: dim,
                got: ex.features.len(),
            });
        }
        if ex.labels.class.index() >= n_classes {
            return Err(Error::ClassOutOfRange {
                class: ex.labels.class.index(),
                n_classes,
            });
        }
    }
    Ok(dim)
}
