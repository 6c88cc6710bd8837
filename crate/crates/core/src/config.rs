//! Flat `key = value` run configuration shared by every command.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::corpus::{SplitRatios, DEFAULT_MAX_PATHS};
use crate::error::{Error, Result};
use crate::joint::JointConfig;
use crate::path_encoder::HopMode;
use crate::text_encoder::{BagMode, EncoderConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub lr: f64,
    pub d_c: usize,
    pub window: usize,
    pub batch: usize,
    pub d_rel: usize,
    pub beta: f64,
    pub d_w: usize,
    pub d_p: usize,
    pub keep: f64,
    pub epochs: usize,
    pub min_count: usize,
    pub pos_clip: usize,
    pub max_len: usize,
    pub max_paths: usize,
    pub hop_mode: HopMode,
    pub bag_mode: BagMode,
    pub seed: u64,
    pub threads: usize,
    pub freeze_hops: bool,
    /// Negatives per KB triple.
    pub neg_ratio: f64,
    pub train_ratio: f64,
    pub valid_ratio: f64,
    pub test_ratio: f64,
    /// Word vectors in text format; random initialization when empty.
    pub embeddings: String,
    pub top_n: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let split = SplitRatios::default();
        RunConfig {
            lr: 0.01,
            d_c: 230,
            window: 3,
            batch: 160,
            d_rel: 40,
            beta: 0.5,
            d_w: 50,
            d_p: 5,
            keep: 0.5,
            epochs: 25,
            min_count: 100,
            pos_clip: 30,
            max_len: 120,
            max_paths: DEFAULT_MAX_PATHS,
            hop_mode: HopMode::Greedy,
            bag_mode: BagMode::Max,
            seed: 1,
            threads: 1,
            freeze_hops: false,
            neg_ratio: 1.0,
            train_ratio: split.train,
            valid_ratio: split.valid,
            test_ratio: split.test,
            embeddings: String::new(),
            top_n: crate::eval::TOP_N,
        }
    }
}

pub const KEYS: [&str; 25] = [
    "lr", "d_c", "window", "batch", "d_rel", "beta", "d_w", "d_p", "keep", "epochs", "min_count", "pos_clip",
    "max_len", "max_paths", "hop_mode", "bag_mode", "seed", "threads", "freeze_hops", "neg_ratio", "train_ratio",
    "valid_ratio", "test_ratio", "embeddings", "top_n",
];

fn num<T: FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
    v.parse().map_err(|_| format!("{key}: cannot parse `{v}`"))
}

pub fn parse_hop_mode(v: &str) -> std::result::Result<HopMode, String> {
    match v {
        "greedy" => Ok(HopMode::Greedy),
        "exhaustive" => Ok(HopMode::Exhaustive),
        _ => Err(format!("hop_mode: expected greedy or exhaustive, got `{v}`")),
    }
}

pub fn parse_bag_mode(v: &str) -> std::result::Result<BagMode, String> {
    match v {
        "max" => Ok(BagMode::Max),
        "rand" => Ok(BagMode::Rand),
        _ => Err(format!("bag_mode: expected max or rand, got `{v}`")),
    }
}

fn hop_name(m: HopMode) -> &'static str {
    match m {
        HopMode::Greedy => "greedy",
        HopMode::Exhaustive => "exhaustive",
    }
}

fn bag_name(m: BagMode) -> &'static str {
    match m {
        BagMode::Max => "max",
        BagMode::Rand => "rand",
    }
}

impl RunConfig {
    /// Sets one key; the message names the key on failure.
    pub fn set(&mut self, key: &str, v: &str) -> std::result::Result<(), String> {
        let v = v.trim();
        match key {
            "lr" => self.lr = num(key, v)?,
            "d_c" => self.d_c = num(key, v)?,
            "window" | "k" => self.window = num(key, v)?,
            "batch" => self.batch = num(key, v)?,
            "d_rel" => self.d_rel = num(key, v)?,
            "beta" => self.beta = num(key, v)?,
            "d_w" => self.d_w = num(key, v)?,
            "d_p" => self.d_p = num(key, v)?,
            "keep" => self.keep = num(key, v)?,
            "epochs" => self.epochs = num(key, v)?,
            "min_count" => self.min_count = num(key, v)?,
            "pos_clip" => self.pos_clip = num(key, v)?,
            "max_len" => self.max_len = num(key, v)?,
            "max_paths" => self.max_paths = num(key, v)?,
            "hop_mode" => self.hop_mode = parse_hop_mode(v)?,
            "bag_mode" => self.bag_mode = parse_bag_mode(v)?,
            "seed" => self.seed = num(key, v)?,
            "threads" => self.threads = num(key, v)?,
            "freeze_hops" => self.freeze_hops = num(key, v)?,
            "neg_ratio" => self.neg_ratio = num(key, v)?,
            "train_ratio" => self.train_ratio = num(key, v)?,
            "valid_ratio" => self.valid_ratio = num(key, v)?,
            "test_ratio" => self.test_ratio = num(key, v)?,
            "embeddings" => self.embeddings = v.to_string(),
            "top_n" => self.top_n = num(key, v)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Parses `key = value` lines (`#` starts a comment) over the defaults.
    /// Every bad line and failed check is reported in one error.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut bad = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line.split_once('=') {
                Some((k, v)) => {
                    if let Err(e) = cfg.set(k.trim(), v) {
                        bad.push(format!("line {}: {e}", i + 1));
                    }
                }
                None => bad.push(format!("line {}: expected key = value", i + 1)),
            }
        }
        bad.extend(cfg.problems());
        if bad.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::Config(bad))
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Applies `key=value` overrides, then validates; all failures at once.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<()> {
        let mut bad = Vec::new();
        for o in overrides {
            let o = o.as_ref();
            match o.split_once('=') {
                Some((k, v)) => {
                    if let Err(e) = self.set(k.trim(), v) {
                        bad.push(e);
                    }
                }
                None => bad.push(format!("override `{o}` is not key=value")),
            }
        }
        bad.extend(self.problems());
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(bad))
        }
    }

    /// Every range violation, one message per key.
    pub fn problems(&self) -> Vec<String> {
        let mut bad = Vec::new();
        let positive = [
            ("d_c", self.d_c),
            ("window", self.window),
            ("batch", self.batch),
            ("d_rel", self.d_rel),
            ("d_w", self.d_w),
            ("d_p", self.d_p),
            ("pos_clip", self.pos_clip),
            ("max_len", self.max_len),
            ("max_paths", self.max_paths),
            ("threads", self.threads),
            ("top_n", self.top_n),
        ];
        for (k, v) in positive {
            if v == 0 {
                bad.push(format!("{k} must be >= 1"));
            }
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            bad.push(format!("lr must be > 0, got {}", self.lr));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            bad.push(format!("beta must be >= 0, got {}", self.beta));
        }
        if !(self.keep > 0.0 && self.keep <= 1.0) {
            bad.push(format!("keep must be in (0, 1], got {}", self.keep));
        }
        if !(self.neg_ratio >= 0.0 && self.neg_ratio.is_finite()) {
            bad.push(format!("neg_ratio must be >= 0, got {}", self.neg_ratio));
        }
        match self.split().validate() {
            Ok(()) => {}
            Err(Error::Config(v)) => bad.extend(v),
            Err(e) => bad.push(e.to_string()),
        }
        bad
    }

    /// Effective configuration as reloadable text, keys in fixed order.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("lr", self.lr.to_string());
        kv("d_c", self.d_c.to_string());
        kv("window", self.window.to_string());
        kv("batch", self.batch.to_string());
        kv("d_rel", self.d_rel.to_string());
        kv("beta", self.beta.to_string());
        kv("d_w", self.d_w.to_string());
        kv("d_p", self.d_p.to_string());
        kv("keep", self.keep.to_string());
        kv("epochs", self.epochs.to_string());
        kv("min_count", self.min_count.to_string());
        kv("pos_clip", self.pos_clip.to_string());
        kv("max_len", self.max_len.to_string());
        kv("max_paths", self.max_paths.to_string());
        kv("hop_mode", hop_name(self.hop_mode).to_string());
        kv("bag_mode", bag_name(self.bag_mode).to_string());
        kv("seed", self.seed.to_string());
        kv("threads", self.threads.to_string());
        kv("freeze_hops", self.freeze_hops.to_string());
        kv("neg_ratio", self.neg_ratio.to_string());
        kv("train_ratio", self.train_ratio.to_string());
        kv("valid_ratio", self.valid_ratio.to_string());
        kv("test_ratio", self.test_ratio.to_string());
        kv("embeddings", self.embeddings.clone());
        kv("top_n", self.top_n.to_string());
        s
    }

    pub fn split(&self) -> SplitRatios {
        SplitRatios {
            train: self.train_ratio,
            valid: self.valid_ratio,
            test: self.test_ratio,
        }
    }

    pub fn encoder(&self, n_rel: usize) -> EncoderConfig {
        EncoderConfig {
            d_w: self.d_w,
            d_p: self.d_p,
            d_c: self.d_c,
            window: self.window,
            n_rel,
            pos_clip: self.pos_clip,
        }
    }

    pub fn joint(&self) -> JointConfig {
        JointConfig {
            beta: self.beta,
            lr: self.lr,
            batch: self.batch,
            epochs: self.epochs,
            bag_mode: self.bag_mode,
            hop_mode: self.hop_mode,
            keep: self.keep,
            seed: self.seed,
            threads: self.threads,
            freeze_hops: self.freeze_hops,
        }
    }
}
