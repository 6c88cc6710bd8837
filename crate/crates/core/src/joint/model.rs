use crate::corpus::{random_embeddings, Vocabulary};
use crate::error::{Error, Result};
use crate::numkernel::{ParamStore, SeededRng, Tensor};
use crate::path_encoder::{HopMode, PathEncoder};
use crate::scalar::Scalar;
use crate::text_encoder::{BagMode, EncoderConfig, TextEncoder};

/// Training and scoring hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct JointConfig {
    /// Path weight; `0` gives the text-only model.
    pub beta: f64,
    pub lr: f64,
    /// Entity pairs per mini-batch.
    pub batch: usize,
    pub epochs: usize,
    pub bag_mode: BagMode,
    pub hop_mode: HopMode,
    /// Dropout keep probability on the pooled sentence vector.
    pub keep: f64,
    pub seed: u64,
    pub threads: usize,
    /// Treat hop confidences as constants in the gradient.
    pub freeze_hops: bool,
}

impl Default for JointConfig {
    fn default() -> Self {
        JointConfig {
            beta: 0.5,
            lr: 0.01,
            batch: 160,
            epochs: 25,
            bag_mode: BagMode::Max,
            hop_mode: HopMode::Greedy,
            keep: 0.5,
            seed: 1,
            threads: 1,
            freeze_hops: false,
        }
    }
}

impl JointConfig {
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            bad.push(format!("beta must be >= 0, got {}", self.beta));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            bad.push(format!("lr must be > 0, got {}", self.lr));
        }
        if self.batch == 0 {
            bad.push("batch must be >= 1".to_string());
        }
        if !(self.keep > 0.0 && self.keep <= 1.0) {
            bad.push(format!("keep must be in (0, 1], got {}", self.keep));
        }
        if self.threads == 0 {
            bad.push("threads must be >= 1".to_string());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(bad))
        }
    }
}

/// `L = E + (1 - E) β G`.
#[inline]
pub fn global_score<T: Scalar>(e: T, g: T, beta: T) -> T {
    e + (T::one() - e) * beta * g
}

/// Architecture: where each component's tensors live in the store.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Net {
    pub encoder: TextEncoder,
    pub path: PathEncoder,
}

impl Net {
    pub fn n_rel(&self) -> usize {
        self.encoder.cfg.n_rel
    }
}

/// Shape of a model as recorded in a checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelDims {
    pub d_w: usize,
    pub d_p: usize,
    pub d_c: usize,
    pub window: usize,
    pub n_rel: usize,
    pub d_rel: usize,
    pub vocab_size: usize,
    pub pos_clip: usize,
}

impl ModelDims {
    pub fn as_array(&self) -> [usize; 8] {
        [
            self.d_w,
            self.d_p,
            self.d_c,
            self.window,
            self.n_rel,
            self.d_rel,
            self.vocab_size,
            self.pos_clip,
        ]
    }
}

/// Parameters plus architecture, generic over the scalar type.
#[derive(Debug, Clone)]
pub struct Model<T> {
    pub net: Net,
    pub store: ParamStore<T>,
    pub vocab_hash: u64,
}

impl<T: Scalar> Model<T> {
    /// Registers tensors in checkpoint order: encoder tensors, then
    /// relation embeddings.
    pub fn new(
        cfg: EncoderConfig,
        d_rel: usize,
        word_table: Tensor<T>,
        vocab_hash: u64,
        rng: &mut SeededRng,
    ) -> Result<Self> {
        let mut store = ParamStore::new();
        let encoder = TextEncoder::register(cfg, word_table, &mut store, rng)?;
        let path = PathEncoder::register(cfg.n_rel, d_rel, &mut store, rng)?;
        Ok(Model {
            net: Net { encoder, path },
            store,
            vocab_hash,
        })
    }

    /// Model with random word embeddings for `vocab`.
    pub fn random(cfg: EncoderConfig, d_rel: usize, vocab: &Vocabulary, rng: &mut SeededRng) -> Result<Self> {
        let table = random_embeddings(vocab, cfg.d_w, &mut rng.fork(0x77));
        Self::new(cfg, d_rel, table, vocab.content_hash(), rng)
    }

    pub fn dims(&self) -> ModelDims {
        let c = &self.net.encoder.cfg;
        ModelDims {
            d_w: c.d_w,
            d_p: c.d_p,
            d_c: c.d_c,
            window: c.window,
            n_rel: c.n_rel,
            d_rel: self.net.path.d_rel,
            vocab_size: self.store.value(self.net.encoder.ids.word).rows(),
            pos_clip: c.pos_clip,
        }
    }

    /// Errors with the first mismatching dimension.
    pub fn check_dims(&self, expected: &ModelDims) -> Result<()> {
        let got = self.dims();
        if got == *expected {
            Ok(())
        } else {
            Err(Error::dim("checkpoint dims", &got.as_array(), &expected.as_array()))
        }
    }

    pub fn cast<U: Scalar>(&self) -> Model<U> {
        Model {
            net: self.net,
            store: self.store.cast(),
            vocab_hash: self.vocab_hash,
        }
    }
}
