//! Joint text + path model: global score, objective, SGD training,
//! candidate scoring and checkpoints.

mod checkpoint;
mod data;
mod model;
mod objective;
mod score;
pub mod toy;
mod train;

pub use checkpoint::{decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint, MAGIC, TENSOR_ORDER, VERSION};
pub use data::{Dataset, TrainItem};
pub use model::{global_score, JointConfig, Model, ModelDims, Net};
pub use objective::{objective, objective_with_grads};
pub use score::{score_all, score_candidates, PairScores};
pub use train::{train, TrainReport};
