//! Multi-task classifier head over stacked two-view features.

mod features;
pub mod head;
pub mod loss;
mod train;

pub use features::{stack_features, FeatureDims, FeatureRecord, ViewMode};
pub use head::{
    gradient, gradient_seq, sigmoid, Example, HeadParameters, HeadWeights, BLOCK_NAMES,
};
pub use loss::{bce, cls_loss, inc_loss, total_loss, BCE_EPS, DEFAULT_LAMBDA};
pub use train::{train, train_from, EpochLog, TrainConfig, TrainOutcome};
