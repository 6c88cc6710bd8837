use std::collections::{BTreeSet, HashMap};

use crate::corpus::{Bag, PairKey, RelationId};
use crate::error::Result;
use crate::numkernel::ParamView;
use crate::parallel::par_map;
use crate::path_encoder::{infer_hop_greedy, path_relation_prob, HopMode, PathProbTable};
use crate::scalar::Scalar;

use super::data::Dataset;
use super::model::{global_score, JointConfig, Model, Net};
use super::objective::{bag_probs, max_per_relation};

/// Test-mode scores of one pair for every relation.
#[derive(Debug, Clone, PartialEq)]
pub struct PairScores<T> {
    pub pair: PairKey,
    /// `E(h, r, t)` per relation.
    pub text: Vec<T>,
    /// `G(h, r, t)` per relation; all zero without paths or with `β = 0`.
    pub path: Vec<T>,
    /// `L(h, r, t)` per relation.
    pub global: Vec<T>,
}

/// Bag scores `E(·)` of every hop bag referenced by a path of `bags`.
fn hop_scores<T: Scalar>(
    net: &Net,
    params: ParamView<'_, T>,
    data: &Dataset,
    bags: &[&Bag],
    threads: usize,
) -> Result<HashMap<PairKey, Vec<T>>> {
    let keys: BTreeSet<PairKey> = bags
        .iter()
        .flat_map(|b| data.paths.paths(b.key))
        .flat_map(|p| [p.hop1(), p.hop2()])
        .filter(|k| data.hops.get(*k).is_some())
        .collect();
    let keys: Vec<PairKey> = keys.into_iter().collect();
    let scores = par_map(&keys, threads, |k| {
        let bag = data.hops.get(*k).expect("filtered above");
        bag_probs(net, params, &data.bag_sentences(bag)).map(|p| max_per_relation(&p).0)
    });
    keys.into_iter()
        .zip(scores)
        .map(|(k, s)| s.map(|s| (k, s)))
        .collect()
}

/// Max over paths of the path score for every relation. Hop relations
/// are predicted from the hop bags' own scores (NA excluded).
fn path_scores<T: Scalar>(
    net: &Net,
    params: ParamView<'_, T>,
    data: &Dataset,
    key: PairKey,
    hops: &HashMap<PairKey, Vec<T>>,
    mode: HopMode,
    table: Option<&PathProbTable<T>>,
) -> Vec<T> {
    let n = net.n_rel();
    let mut g = vec![T::zero(); n];
    let rel = params.get(net.path.rel_emb);
    for path in data.paths.paths(key) {
        let (Some(ea), Some(eb)) = (hops.get(&path.hop1()), hops.get(&path.hop2())) else {
            continue;
        };
        match (mode, table) {
            (HopMode::Exhaustive, Some(table)) => {
                for (r, gr) in g.iter_mut().enumerate() {
                    if let Some((s, _, _)) = table.best_hops(RelationId(r as u32), ea, eb) {
                        if s > *gr {
                            *gr = s;
                        }
                    }
                }
            }
            _ => {
                let (Some(ha), Some(hb)) = (infer_hop_greedy(ea), infer_hop_greedy(eb)) else {
                    continue;
                };
                let p = path_relation_prob(rel, ha.relation, hb.relation);
                let w = ha.confidence * hb.confidence;
                for (gr, &pr) in g.iter_mut().zip(&p) {
                    let s = w * pr;
                    if s > *gr {
                        *gr = s;
                    }
                }
            }
        }
    }
    g
}

fn score_bags<T: Scalar>(model: &Model<T>, data: &Dataset, cfg: &JointConfig, bags: &[&Bag]) -> Result<Vec<PairScores<T>>> {
    let net = &model.net;
    let params = model.store.view();
    let beta = T::from_f64_lossy(cfg.beta);
    let use_paths = cfg.beta > 0.0;
    let hops = if use_paths {
        hop_scores(net, params, data, bags, cfg.threads)?
    } else {
        HashMap::new()
    };
    let table = (use_paths && cfg.hop_mode == HopMode::Exhaustive)
        .then(|| PathProbTable::new(params.get(net.path.rel_emb)));
    let scored = par_map(bags, cfg.threads, |bag| -> Result<PairScores<T>> {
        let text = max_per_relation(&bag_probs(net, params, &data.bag_sentences(bag))?).0;
        if !use_paths {
            return Ok(PairScores {
                pair: bag.key,
                global: text.clone(),
                path: vec![T::zero(); text.len()],
                text,
            });
        }
        let path = path_scores(net, params, data, bag.key, &hops, cfg.hop_mode, table.as_ref());
        let global = text.iter().zip(&path).map(|(&e, &g)| global_score(e, g, beta)).collect();
        Ok(PairScores {
            pair: bag.key,
            text,
            path,
            global,
        })
    });
    scored.into_iter().collect()
}

/// Scores every direct pair of `data`, in bag order. Dropout is off; with
/// `β = 0` the result is exactly the text-only model.
pub fn score_all<T: Scalar>(model: &Model<T>, data: &Dataset, cfg: &JointConfig) -> Result<Vec<PairScores<T>>> {
    let bags: Vec<&Bag> = data.direct.iter().filter(|b| !b.is_empty()).collect();
    score_bags(model, data, cfg, &bags)
}

/// `L(h, r, t)` for each candidate; `None` if the pair has no direct bag.
pub fn score_candidates<T: Scalar>(
    model: &Model<T>,
    data: &Dataset,
    cfg: &JointConfig,
    pair: PairKey,
    candidates: &[RelationId],
) -> Result<Option<Vec<T>>> {
    let Some(bag) = data.direct.get(pair).filter(|b| !b.is_empty()) else {
        return Ok(None);
    };
    let s = score_bags(model, data, &JointConfig { threads: 1, ..cfg.clone() }, &[bag])?;
    Ok(Some(candidates.iter().map(|r| s[0].global[r.index()]).collect()))
}
