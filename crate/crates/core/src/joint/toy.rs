//! Tiny fixtures for gradient checking and smoke tests.

use crate::corpus::{EntityId, EntityMention, RelationId, SentenceInstance, Vocabulary};
use crate::error::Result;
use crate::numkernel::{finite_diff_check, GradCheckReport, ParamStore, SeededRng};
use crate::path_encoder::HopMode;
use crate::scalar::Scalar;
use crate::text_encoder::{BagMode, EncoderConfig};

use super::data::{Dataset, TrainItem};
use super::model::{JointConfig, Model};
use super::objective::{objective_with_grads, run_items, Pass};

/// `d_w=4, d_p=2, d_c=6, k=3, n_r=5, d_R=6`.
pub fn tiny_encoder_config() -> EncoderConfig {
    EncoderConfig {
        d_w: 4,
        d_p: 2,
        d_c: 6,
        window: 3,
        n_rel: 5,
        pos_clip: 4,
    }
}

pub const TINY_D_REL: usize = 6;

const WORDS: [&str; 8] = ["alpha", "beta", "gamma", "delta", "eps", "zeta", "eta", "theta"];

fn sentence(rng: &mut SeededRng, head: u32, tail: u32, label: u32) -> SentenceInstance {
    let len = 3 + rng.below(4);
    let tokens: Vec<String> = (0..len).map(|_| WORDS[rng.below(WORDS.len())].to_string()).collect();
    let h = rng.below(len);
    let mut t = rng.below(len);
    while t == h {
        t = rng.below(len);
    }
    SentenceInstance {
        tokens,
        head: EntityMention::new(EntityId(head), h, h + 1),
        tail: EntityMention::new(EntityId(tail), t, t + 1),
        label: RelationId(label),
    }
}

/// Three entities and four labeled bags of two sentences:
/// `(0,1):r1, (1,2):r2, (0,2):r3, (1,0):r4`. Exactly two paths exist,
/// `0→1→2` for `(0,2)` and `1→0→2` for `(1,2)`.
pub fn tiny_world(seed: u64) -> (Model<f64>, Dataset, JointConfig) {
    let mut rng = SeededRng::new(seed);
    let mut sents = Vec::new();
    for &(h, t, r) in &[(0, 1, 1), (1, 2, 2), (0, 2, 3), (1, 0, 4)] {
        for _ in 0..2 {
            sents.push(sentence(&mut rng, h, t, r));
        }
    }
    let vocab = Vocabulary::from_tokens(WORDS.iter().map(|w| w.to_string()));
    let data = Dataset::build(&vocab, &sents, &[], 8);
    let cfg = tiny_encoder_config();
    let mut model = Model::random(cfg, TINY_D_REL, &vocab, &mut rng).expect("valid tiny config");
    // wide weights so every gradient entry is well above round-off
    for id in model.store.ids().collect::<Vec<_>>() {
        for x in model.store.value_mut(id).data_mut() {
            *x = rng.uniform_in(-0.5, 0.5);
        }
    }
    let jc = JointConfig {
        beta: 0.5,
        keep: 1.0,
        bag_mode: BagMode::Max,
        hop_mode: HopMode::Greedy,
        seed,
        ..JointConfig::default()
    };
    (model, data, jc)
}

/// Central-difference check of `dJ/dθ` through the whole pipeline on the
/// tiny world, dropout off, at 64-bit.
pub fn full_pipeline_grad_check(seed: u64) -> Result<GradCheckReport> {
    grad_check_at::<f64>(seed, 1e-5)
}

/// Same check at any precision.
pub fn grad_check_at<T: Scalar>(seed: u64, eps: f64) -> Result<GradCheckReport> {
    let (model, data, cfg) = tiny_world(seed);
    let model: Model<T> = model.cast();
    let items = data.items();
    let mut store = model.store.clone();
    let (_, grads) = objective_with_grads(&model.net, &store, &data, &cfg, &items)?;
    store.zero_grads();
    store.accumulate(&grads)?;
    let net = model.net;
    let loss = |s: &ParamStore<T>| {
        run_items(&net, s, &data, &cfg, &positions(&items), Pass::Eval, false)
            .map(|r| r.0)
            .unwrap_or(f64::NAN)
    };
    Ok(finite_diff_check(loss, &mut store, eps))
}

fn positions(items: &[TrainItem]) -> Vec<(usize, TrainItem)> {
    items.iter().copied().enumerate().collect()
}
