use crate::corpus::{extract_paths_for, Bag, PairKey, Triple};
use crate::error::{Error, Result};
use crate::joint::{Dataset, Model};
use crate::numkernel::{softmax_in_place, SeededRng};
use crate::path_encoder::infer_hop_greedy;
use crate::scalar::Scalar;
use crate::text_encoder::BagMode;

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeExample {
    pub features: Vec<f64>,
    pub label: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeConfig {
    pub lr: f64,
    pub l2: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            lr: 0.1,
            l2: 1e-4,
            epochs: 100,
            seed: 1,
        }
    }
}

/// Multinomial logistic regression `softmax(W x + b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticProbe {
    pub classes: usize,
    pub dim: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl LogisticProbe {
    pub fn probs(&self, x: &[f64]) -> Vec<f64> {
        let mut z: Vec<f64> = (0..self.classes)
            .map(|c| self.b[c] + self.w[c * self.dim..(c + 1) * self.dim].iter().zip(x).map(|(w, x)| w * x).sum::<f64>())
            .collect();
        softmax_in_place(&mut z);
        z
    }

    /// Most probable class, ties → lowest.
    pub fn predict(&self, x: &[f64]) -> usize {
        let p = self.probs(x);
        (0..p.len()).fold(0, |best, c| if p[c] > p[best] { c } else { best })
    }

    /// Per-example SGD on cross-entropy with L2 on `W`.
    pub fn fit(examples: &[ProbeExample], classes: usize, cfg: &ProbeConfig) -> Result<Self> {
        let Some(first) = examples.first() else {
            return Err(Error::Argument("empty probe training set".into()));
        };
        let dim = first.features.len();
        if let Some(bad) = examples.iter().find(|e| e.features.len() != dim || e.label >= classes) {
            return Err(Error::Argument(format!(
                "probe example with {} features and label {} (expected {dim} features, {classes} classes)",
                bad.features.len(),
                bad.label
            )));
        }
        let mut m = LogisticProbe {
            classes,
            dim,
            w: vec![0.0; classes * dim],
            b: vec![0.0; classes],
        };
        let mut order: Vec<usize> = (0..examples.len()).collect();
        let rng = SeededRng::new(cfg.seed);
        for epoch in 0..cfg.epochs {
            rng.fork(epoch as u64).shuffle(&mut order);
            for &i in &order {
                let ex = &examples[i];
                let p = m.probs(&ex.features);
                for c in 0..classes {
                    let g = p[c] - if c == ex.label { 1.0 } else { 0.0 };
                    let row = &mut m.w[c * dim..(c + 1) * dim];
                    for (w, &x) in row.iter_mut().zip(&ex.features) {
                        *w -= cfg.lr * (g * x + cfg.l2 * *w);
                    }
                    m.b[c] -= cfg.lr * g;
                }
            }
        }
        Ok(m)
    }

    pub fn accuracy(&self, examples: &[ProbeExample]) -> f64 {
        if examples.is_empty() {
            return 0.0;
        }
        let hits = examples.iter().filter(|e| self.predict(&e.features) == e.label).count();
        hits as f64 / examples.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub train_examples: usize,
    pub test_examples: usize,
    pub train_accuracy: f64,
    pub accuracy: f64,
}

/// Trains the probe on `train` and reports accuracy on `test`.
pub fn zero_shot_probe(
    train: &[ProbeExample],
    test: &[ProbeExample],
    classes: usize,
    cfg: &ProbeConfig,
) -> Result<ProbeReport> {
    if test.is_empty() {
        return Err(Error::Argument("empty probe test set".into()));
    }
    let m = LogisticProbe::fit(train, classes, cfg)?;
    Ok(ProbeReport {
        train_examples: train.len(),
        test_examples: test.len(),
        train_accuracy: m.accuracy(train),
        accuracy: m.accuracy(test),
    })
}

/// Pooled vector of one sentence of `bag`: the most confident sentence
/// for the bag's greedy relation in max mode, a random one in rand mode.
fn hop_vector<T: Scalar>(
    model: &Model<T>,
    data: &Dataset,
    bag: &Bag,
    mode: BagMode,
    rng: &mut SeededRng,
) -> Result<Vec<f64>> {
    let enc = &model.net.encoder;
    let params = model.store.view();
    let sents = data.bag_sentences(bag);
    let pick = match mode {
        BagMode::Rand => rng.below(sents.len()),
        BagMode::Max => {
            let probs = sents
                .iter()
                .map(|s| enc.sentence_probs(s, params))
                .collect::<Result<Vec<_>>>()?;
            let mut e = probs[0].clone();
            for p in &probs[1..] {
                for (a, &b) in e.iter_mut().zip(p) {
                    if b > *a {
                        *a = b;
                    }
                }
            }
            match infer_hop_greedy(&e) {
                Some(h) => (0..probs.len())
                    .fold(0, |best, i| if probs[i][h.relation.index()] > probs[best][h.relation.index()] { i } else { best }),
                None => 0,
            }
        }
    };
    Ok(enc.sentence_repr(sents[pick], params)?.into_iter().map(|x| x.to_f64_lossy()).collect())
}

/// Features `[s_hop1 ; s_hop2]` for facts whose pair has no sentence of
/// its own in `data.hops` but has a two-hop path there. The best-supported
/// path is used; facts without one are skipped.
pub fn build_probe_examples<T: Scalar>(
    model: &Model<T>,
    data: &Dataset,
    facts: &[Triple],
    mode: BagMode,
    rng: &mut SeededRng,
) -> Result<Vec<ProbeExample>> {
    let pairs: Vec<PairKey> = facts
        .iter()
        .map(|f| f.pair())
        .filter(|p| data.hops.get(*p).is_none())
        .collect();
    let paths = extract_paths_for(&data.hops, pairs, 1);
    let mut out = Vec::new();
    for f in facts {
        if data.hops.get(f.pair()).is_some() {
            continue;
        }
        let Some(path) = paths.paths(f.pair()).first() else {
            continue;
        };
        let a = data.hops.get(path.hop1()).expect("path hops have bags");
        let b = data.hops.get(path.hop2()).expect("path hops have bags");
        let mut features = hop_vector(model, data, a, mode, rng)?;
        features.extend(hop_vector(model, data, b, mode, rng)?);
        out.push(ProbeExample {
            features,
            label: f.relation.index(),
        });
    }
    Ok(out)
}
