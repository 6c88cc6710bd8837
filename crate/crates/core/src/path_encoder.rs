//! Relation-path encoder.
//!
//! A path `h -rA-> e -rB-> t` is embedded as `r_A + r_B`; every relation
//! is scored by its negative L1 distance to that sum, and the path score is
//! the relation probability weighted by both hop confidences. Several paths
//! are aggregated by max.

use crate::corpus::RelationId;
use crate::error::{Error, Result};
use crate::numkernel::{sign0, softmax_backward, softmax_in_place, ParamId, ParamStore, SeededRng, Tensor};
use crate::scalar::Scalar;
use crate::text_encoder::uniform;

/// Relation embedding table `n_r × d_R` registered in a parameter store.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathEncoder {
    pub n_rel: usize,
    pub d_rel: usize,
    pub rel_emb: ParamId,
}

impl PathEncoder {
    pub fn register<T: Scalar>(
        n_rel: usize,
        d_rel: usize,
        store: &mut ParamStore<T>,
        rng: &mut SeededRng,
    ) -> Result<Self> {
        if n_rel == 0 || d_rel == 0 {
            return Err(Error::Config(vec!["n_rel and d_rel must be positive".into()]));
        }
        let rel_emb = store.add("rel_emb", uniform(&[n_rel, d_rel], 0.01, rng));
        Ok(PathEncoder { n_rel, d_rel, rel_emb })
    }
}

/// `o_i = -‖r_i - (r_A + r_B)‖₁` for every relation `i`.
pub fn path_logits<T: Scalar>(table: &Tensor<T>, ra: RelationId, rb: RelationId) -> Vec<T> {
    let (a, b) = (table.row(ra.index()), table.row(rb.index()));
    (0..table.rows())
        .map(|i| {
            -table
                .row(i)
                .iter()
                .zip(a.iter().zip(b))
                .map(|(&ri, (&x, &y))| (ri - (x + y)).abs())
                .sum::<T>()
        })
        .collect()
}

/// `p(r | r_A, r_B) = softmax(o)`.
pub fn path_relation_prob<T: Scalar>(table: &Tensor<T>, ra: RelationId, rb: RelationId) -> Vec<T> {
    let mut o = path_logits(table, ra, rb);
    softmax_in_place(&mut o);
    o
}

/// Accumulates into `grad_table` the gradient of `L` given `dL/dp` for
/// `p = path_relation_prob(table, ra, rb)`. Uses `sign(0) = 0` for the L1
/// subgradient.
pub fn path_prob_backward<T: Scalar>(
    table: &Tensor<T>,
    ra: RelationId,
    rb: RelationId,
    probs: &[T],
    dprobs: &[T],
    grad_table: &mut Tensor<T>,
) {
    let d = table.cols();
    let dlogits = softmax_backward(probs, dprobs);
    let c: Vec<T> = table
        .row(ra.index())
        .iter()
        .zip(table.row(rb.index()))
        .map(|(&x, &y)| x + y)
        .collect();
    let mut dc = vec![T::zero(); d];
    for (i, &g) in dlogits.iter().enumerate() {
        if g == T::zero() {
            continue;
        }
        let ri = table.row(i);
        let gi = grad_table.row_mut(i);
        for m in 0..d {
            let sg = sign0(ri[m] - c[m]);
            gi[m] -= g * sg;
            dc[m] += g * sg;
        }
    }
    for hop in [ra, rb] {
        for (g, &x) in grad_table.row_mut(hop.index()).iter_mut().zip(&dc) {
            *g += x;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HopSource {
    Gold,
    Predicted,
}

/// Relation assigned to one hop of a path, with its text confidence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopAssignment<T> {
    pub relation: RelationId,
    pub confidence: T,
    pub source: HopSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HopMode {
    /// Per-hop argmax over non-NA relations.
    #[default]
    Greedy,
    /// Joint maximization of `E_A E_B p(r | r_A, r_B)` over non-NA pairs.
    Exhaustive,
}

/// Training-time assignment: the hop bag's KB relation. With several gold
/// relations the most confident one wins (ties → lowest id). Returns `None`
/// for an `NA` bag, which discards the path.
pub fn infer_hop_gold<T: Scalar>(bag_scores: &[T], gold: &[RelationId]) -> Option<HopAssignment<T>> {
    let mut best: Option<HopAssignment<T>> = None;
    for &r in gold.iter().filter(|r| !r.is_na()) {
        let e = bag_scores[r.index()];
        if best.is_none_or(|b| e > b.confidence) {
            best = Some(HopAssignment {
                relation: r,
                confidence: e,
                source: HopSource::Gold,
            });
        }
    }
    best
}

/// Inference-time assignment: argmax of the bag score over non-NA
/// relations, ties → lowest id. `None` if the inventory has no relation
/// besides NA.
pub fn infer_hop_greedy<T: Scalar>(bag_scores: &[T]) -> Option<HopAssignment<T>> {
    let mut best: Option<HopAssignment<T>> = None;
    for (i, &e) in bag_scores.iter().enumerate().skip(1) {
        if best.is_none_or(|b| e > b.confidence) {
            best = Some(HopAssignment {
                relation: RelationId(i as u32),
                confidence: e,
                source: HopSource::Predicted,
            });
        }
    }
    best
}

/// `G = E_A · E_B · p(r | r_A, r_B)`.
pub fn path_score<T: Scalar>(
    r: RelationId,
    hop_a: &HopAssignment<T>,
    hop_b: &HopAssignment<T>,
    table: &Tensor<T>,
) -> T {
    let p = path_relation_prob(table, hop_a.relation, hop_b.relation);
    hop_a.confidence * hop_b.confidence * p[r.index()]
}

/// Max over path scores with the index of the (lowest) maximizer; an empty
/// list gives `0` and no index.
pub fn aggregate_paths<T: Scalar>(scores: &[T]) -> (T, Option<usize>) {
    let mut best: Option<usize> = None;
    for (i, &s) in scores.iter().enumerate() {
        if best.is_none_or(|b| s > scores[b]) {
            best = Some(i);
        }
    }
    match best {
        Some(i) => (scores[i], Some(i)),
        None => (T::zero(), None),
    }
}

/// `p(· | r_A, r_B)` for every ordered pair of relations, computed once per
/// parameter state for exhaustive hop search.
#[derive(Debug, Clone)]
pub struct PathProbTable<T> {
    n_rel: usize,
    probs: Vec<T>,
}

impl<T: Scalar> PathProbTable<T> {
    pub fn new(table: &Tensor<T>) -> Self {
        let n = table.rows();
        let mut probs = Vec::with_capacity(n * n * n);
        for a in 0..n {
            for b in 0..n {
                probs.extend(path_relation_prob(table, RelationId(a as u32), RelationId(b as u32)));
            }
        }
        PathProbTable { n_rel: n, probs }
    }

    pub fn get(&self, ra: RelationId, rb: RelationId) -> &[T] {
        let n = self.n_rel;
        let at = (ra.index() * n + rb.index()) * n;
        &self.probs[at..at + n]
    }

    /// Best `(G, r_A, r_B)` for candidate `r` over non-NA hop relations;
    /// ties keep the lexicographically smallest `(r_A, r_B)`.
    pub fn best_hops(&self, r: RelationId, scores_a: &[T], scores_b: &[T]) -> Option<(T, RelationId, RelationId)> {
        let mut best: Option<(T, RelationId, RelationId)> = None;
        for a in 1..self.n_rel {
            for b in 1..self.n_rel {
                let (ra, rb) = (RelationId(a as u32), RelationId(b as u32));
                let g = scores_a[a] * scores_b[b] * self.get(ra, rb)[r.index()];
                if best.is_none_or(|(bg, _, _)| g > bg) {
                    best = Some((g, ra, rb));
                }
            }
        }
        best
    }
}
