use std::collections::BTreeSet;

use log::warn;

use crate::corpus::{EntityId, RelationId, SentenceInstance, Triple};
use crate::error::{Error, Result};
use crate::joint::{score_all, Dataset, JointConfig, Model, PairScores};
use crate::scalar::Scalar;

/// One predicted relational fact with its global score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedFact {
    pub head: EntityId,
    pub relation: RelationId,
    pub tail: EntityId,
    pub score: f64,
}

impl RankedFact {
    pub fn triple(&self) -> Triple {
        Triple::new(self.head, self.relation, self.tail)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint {
    pub cutoff: usize,
    pub precision: f64,
    pub recall: f64,
}

/// Relational facts (non-NA labels) of a sentence set.
pub fn gold_facts(instances: &[SentenceInstance]) -> BTreeSet<Triple> {
    instances
        .iter()
        .filter(|s| !s.label.is_na())
        .map(|s| s.fact())
        .collect()
}

/// Every (pair, non-NA relation) as a fact, optionally restricted to
/// `only`, sorted by descending score then `(head, relation, tail)`.
pub fn rank_scores<T: Scalar>(scores: &[PairScores<T>], only: Option<&[RelationId]>) -> Vec<RankedFact> {
    let mut out = Vec::new();
    for s in scores {
        for (r, &l) in s.global.iter().enumerate().skip(1) {
            let relation = RelationId(r as u32);
            if only.is_some_and(|o| !o.contains(&relation)) {
                continue;
            }
            out.push(RankedFact {
                head: s.pair.head,
                relation,
                tail: s.pair.tail,
                score: l.to_f64_lossy(),
            });
        }
    }
    sort_ranked(&mut out);
    out
}

pub fn sort_ranked(facts: &mut [RankedFact]) {
    facts.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.triple().cmp(&b.triple())));
}

/// Scores all direct pairs of `data` and ranks the resulting facts.
pub fn rank_predictions<T: Scalar>(
    model: &Model<T>,
    data: &Dataset,
    cfg: &JointConfig,
    only: Option<&[RelationId]>,
) -> Result<Vec<RankedFact>> {
    Ok(rank_scores(&score_all(model, data, cfg)?, only))
}

/// Precision and recall at every cutoff `1..=ranked.len()`.
pub fn pr_curve(ranked: &[RankedFact], gold: &BTreeSet<Triple>) -> Result<Vec<PrPoint>> {
    if gold.is_empty() {
        return Err(Error::Argument("P/R curve needs a nonempty gold set".into()));
    }
    let total = gold.len() as f64;
    let mut correct = 0usize;
    Ok(ranked
        .iter()
        .enumerate()
        .map(|(i, f)| {
            if gold.contains(&f.triple()) {
                correct += 1;
            }
            PrPoint {
                cutoff: i + 1,
                precision: correct as f64 / (i + 1) as f64,
                recall: correct as f64 / total,
            }
        })
        .collect())
}

/// Precision among the top `⌊N f⌋` facts for each fraction `f`. With
/// fewer than `N` ranked facts, `N` shrinks to the ranking length.
pub fn p_at_fractions(
    ranked: &[RankedFact],
    gold: &BTreeSet<Triple>,
    total: usize,
    fractions: &[f64],
) -> Result<Vec<f64>> {
    let n = if ranked.len() < total {
        warn!("only {} ranked facts, P@N uses N = {} instead of {total}", ranked.len(), ranked.len());
        ranked.len()
    } else {
        total
    };
    fractions
        .iter()
        .map(|&f| {
            let k = (n as f64 * f).floor() as usize;
            if k == 0 {
                return Err(Error::Argument(format!("fraction {f} of {n} facts selects nothing")));
            }
            let hits = ranked[..k].iter().filter(|x| gold.contains(&x.triple())).count();
            Ok(hits as f64 / k as f64)
        })
        .collect()
}

pub fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Max F1 over the curve's cutoffs; `0` for an empty curve.
pub fn max_f1(points: &[PrPoint]) -> f64 {
    points.iter().map(|p| f1(p.precision, p.recall)).fold(0.0, f64::max)
}
