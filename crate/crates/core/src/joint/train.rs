use std::path::Path;

use log::{debug, info};

use crate::error::{Error, Result};
use crate::numkernel::SeededRng;
use crate::scalar::Scalar;

use super::checkpoint::save_checkpoint;
use super::data::{Dataset, TrainItem};
use super::model::{JointConfig, Model};
use super::objective::{run_items, Pass};

const STREAM_SHUFFLE: u64 = 0x5EF1;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// `J` with dropout off before training (index 0) and after each epoch.
    pub epoch_objective: Vec<f64>,
    pub steps: usize,
}

/// Mini-batch SGD ascent on `J`.
///
/// Items are reshuffled every epoch from `(seed, epoch)`. When `checkpoint`
/// is given the model is saved before the first epoch and after each one,
/// so a divergence leaves the last good state on disk; the in-memory model
/// is never updated with a non-finite step either.
pub fn train<T: Scalar>(
    model: &mut Model<T>,
    data: &Dataset,
    cfg: &JointConfig,
    checkpoint: Option<&Path>,
) -> Result<TrainReport> {
    cfg.validate()?;
    let items = data.items();
    if items.is_empty() {
        return Err(Error::Argument("no training items".into()));
    }
    let lr = T::from_f64_lossy(cfg.lr);
    let eval_items: Vec<(usize, TrainItem)> = items.iter().copied().enumerate().collect();
    let eval = |m: &Model<T>| run_items(&m.net, &m.store, data, cfg, &eval_items, Pass::Eval, false).map(|r| r.0);

    let mut log = vec![eval(model)?];
    info!("epoch 0: J = {:.6} over {} items", log[0], items.len());
    if let Some(p) = checkpoint {
        save_checkpoint(model, p)?;
    }
    let shuffle = SeededRng::new(cfg.seed).fork(STREAM_SHUFFLE);
    let mut steps = 0;
    for epoch in 1..=cfg.epochs {
        let mut order: Vec<(usize, TrainItem)> = items.iter().copied().enumerate().collect();
        shuffle.fork(epoch as u64).shuffle(&mut order);
        // positions index the shuffled order so item streams are unique per epoch
        for (pos, slot) in order.iter_mut().enumerate() {
            slot.0 = pos;
        }
        for batch in order.chunks(cfg.batch) {
            let (j, grads) = run_items(&model.net, &model.store, data, cfg, batch, Pass::Train { epoch }, true)?;
            model.store.accumulate(&grads.expect("gradients requested"))?;
            model.store.sgd_step(lr)?;
            steps += 1;
            debug!("epoch {epoch} step {steps}: batch J = {j:.6}");
        }
        let j = eval(model)?;
        info!("epoch {epoch}: J = {j:.6}");
        log.push(j);
        if let Some(p) = checkpoint {
            save_checkpoint(model, p)?;
        }
    }
    Ok(TrainReport {
        epoch_objective: log,
        steps,
    })
}
