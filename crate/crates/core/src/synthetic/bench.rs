use crate::corpus::{RelationId, SentenceInstance, Vocabulary};
use crate::error::{Error, Result};
use crate::eval::{gold_facts, longtail_slice, max_f1, noise_slice, pr_curve, rank_predictions};
use crate::joint::{train, Dataset, JointConfig, Model, TrainReport};
use crate::numkernel::SeededRng;
use crate::text_encoder::EncoderConfig;

use super::world::{generate, World, WorldConfig, N_RELATIONS, R3};

/// Small-scale settings for the compositional benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub world: WorldConfig,
    pub encoder: EncoderConfig,
    pub d_rel: usize,
    /// Training settings; `beta` is replaced per model.
    pub joint: JointConfig,
    pub path_beta: f64,
    pub max_paths: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            world: WorldConfig::default(),
            encoder: EncoderConfig {
                d_w: 16,
                d_p: 4,
                d_c: 32,
                window: 3,
                n_rel: N_RELATIONS + 1,
                pos_clip: 10,
            },
            d_rel: 12,
            joint: JointConfig {
                lr: 0.05,
                batch: 16,
                epochs: 12,
                keep: 0.8,
                ..JointConfig::default()
            },
            path_beta: 0.5,
            max_paths: 8,
        }
    }
}

/// One generated world with its training dataset.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub seed: u64,
    pub world: World,
    pub vocab: Vocabulary,
    pub train: Dataset,
}

pub fn prepare(cfg: &BenchConfig, seed: u64) -> Prepared {
    let world = generate(&cfg.world, seed);
    let vocab = Vocabulary::from_tokens(World::tokens());
    let train = Dataset::build(&vocab, &world.train, &[], cfg.max_paths);
    Prepared {
        seed,
        world,
        vocab,
        train,
    }
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub beta: f64,
    pub model: Model<f32>,
    pub report: TrainReport,
}

impl BenchConfig {
    pub fn joint_for(&self, beta: f64, seed: u64) -> JointConfig {
        JointConfig {
            beta,
            seed,
            ..self.joint.clone()
        }
    }
}

/// Trains one model on the prepared world; `beta = 0` is the text-only
/// baseline with the same initialization and item order.
pub fn train_model(cfg: &BenchConfig, prep: &Prepared, beta: f64) -> Result<Trained> {
    let mut rng = SeededRng::new(prep.seed).fork(0xBE7C);
    let mut model: Model<f32> = Model::random(cfg.encoder, cfg.d_rel, &prep.vocab, &mut rng)?;
    let report = train(&mut model, &prep.train, &cfg.joint_for(beta, prep.seed), None)?;
    Ok(Trained { beta, model, report })
}

/// Max-F1 of the ranking of candidate `r3` over all pairs of `test`, with
/// hop bags drawn from training and test sentences.
pub fn target_max_f1(cfg: &BenchConfig, prep: &Prepared, m: &Trained, test: &[SentenceInstance]) -> Result<f64> {
    let data = Dataset::build(&prep.vocab, test, &prep.world.train, cfg.max_paths);
    let jc = cfg.joint_for(m.beta, prep.seed);
    let ranked = rank_predictions(&m.model, &data, &jc, Some(&[R3]))?;
    let gold = gold_facts(test);
    if gold.iter().any(|f| f.relation != R3) {
        return Err(Error::Internal("benchmark test set holds a non-target fact".into()));
    }
    Ok(max_f1(&pr_curve(&ranked, &gold)?))
}

/// Test sets for one world: full, singleton facts, and NA-noise levels.
#[derive(Debug, Clone)]
pub struct Slices {
    pub full: Vec<SentenceInstance>,
    pub longtail: Vec<SentenceInstance>,
    pub noise: Vec<(f64, Vec<SentenceInstance>)>,
}

pub const NOISE_LEVELS: [f64; 3] = [0.75, 0.85, 0.95];

pub fn slices(prep: &Prepared) -> Result<Slices> {
    let full = prep.world.test.clone();
    let longtail = longtail_slice(&full, 1)?;
    let noise = NOISE_LEVELS
        .iter()
        .map(|&t| {
            let mut rng = SeededRng::new(prep.seed).fork((t * 1000.0) as u64);
            noise_slice(&full, t, &mut rng).map(|(s, _)| (t, s))
        })
        .collect::<Result<_>>()?;
    Ok(Slices { full, longtail, noise })
}

/// Max-F1 of one model on every slice.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceScores {
    pub full: f64,
    pub longtail: f64,
    pub noise: Vec<(f64, f64)>,
}

pub fn score_slices(cfg: &BenchConfig, prep: &Prepared, m: &Trained, s: &Slices) -> Result<SliceScores> {
    Ok(SliceScores {
        full: target_max_f1(cfg, prep, m, &s.full)?,
        longtail: target_max_f1(cfg, prep, m, &s.longtail)?,
        noise: s
            .noise
            .iter()
            .map(|(t, set)| target_max_f1(cfg, prep, m, set).map(|f| (*t, f)))
            .collect::<Result<_>>()?,
    })
}

/// Path model and baseline results for one seed.
#[derive(Debug, Clone)]
pub struct SeedResult {
    pub seed: u64,
    pub path: SliceScores,
    pub baseline: SliceScores,
    pub path_log: Vec<f64>,
    pub baseline_log: Vec<f64>,
}

pub fn run_seed(cfg: &BenchConfig, seed: u64) -> Result<SeedResult> {
    let prep = prepare(cfg, seed);
    let s = slices(&prep)?;
    let path = train_model(cfg, &prep, cfg.path_beta)?;
    let base = train_model(cfg, &prep, 0.0)?;
    Ok(SeedResult {
        seed,
        path: score_slices(cfg, &prep, &path, &s)?,
        baseline: score_slices(cfg, &prep, &base, &s)?,
        path_log: path.report.epoch_objective,
        baseline_log: base.report.epoch_objective,
    })
}

pub fn target_relation() -> RelationId {
    R3
}
