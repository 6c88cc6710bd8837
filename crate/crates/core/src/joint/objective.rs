use crate::corpus::{Bag, EncodedSentence, RelationId};
use crate::error::{Error, Result};
use crate::numkernel::{GradBuffer, ParamStore, ParamView, SeededRng};
use crate::path_encoder::{infer_hop_gold, path_prob_backward, path_relation_prob};
use crate::scalar::Scalar;
use crate::text_encoder::{select_sentence, BagMode, SentenceForward};

use super::data::{Dataset, TrainItem};
use super::model::{global_score, JointConfig, Model, Net};

const STREAM_EVAL: u64 = 0xE7A1;
const STREAM_TRAIN: u64 = 0x7EA1;

/// Test-mode relation distributions of every sentence in a bag.
pub(crate) fn bag_probs<T: Scalar>(
    net: &Net,
    params: ParamView<'_, T>,
    sentences: &[&EncodedSentence],
) -> Result<Vec<Vec<T>>> {
    sentences
        .iter()
        .map(|s| net.encoder.sentence_probs(s, params))
        .collect()
}

/// Per relation: max over sentences and the lowest maximizing sentence.
pub(crate) fn max_per_relation<T: Scalar>(probs: &[Vec<T>]) -> (Vec<T>, Vec<usize>) {
    let mut best = probs[0].clone();
    let mut arg = vec![0usize; best.len()];
    for (i, p) in probs.iter().enumerate().skip(1) {
        for r in 0..best.len() {
            if p[r] > best[r] {
                best[r] = p[r];
                arg[r] = i;
            }
        }
    }
    (best, arg)
}

fn non_finite(bag: &Bag, r: RelationId) -> Error {
    Error::NonFiniteObjective {
        head: format!("#{}", bag.key.head.0),
        tail: format!("#{}", bag.key.tail.0),
        relation: format!("#{}", r.0),
    }
}

/// Forward of one selected sentence, with dropout in training mode.
fn forward_selected<T: Scalar>(
    net: &Net,
    params: ParamView<'_, T>,
    sent: &EncodedSentence,
    rng: &mut SeededRng,
    train: Option<f64>,
) -> Result<SentenceForward<T>> {
    net.encoder.forward(sent, params, train.map(|keep| (rng, keep)))
}

struct PathChoice<T> {
    ra: RelationId,
    rb: RelationId,
    fwd_a: SentenceForward<T>,
    fwd_b: SentenceForward<T>,
    probs: Vec<T>,
}

/// `ln L` for one (bag, relation) item, accumulating `d ln L / dθ` into
/// `grads` when given.
///
/// Discrete choices (sentence, path, hop relation) are made on test-mode
/// scores; the chosen sentences are then re-run with dropout when
/// `train` carries a keep probability. Hop relations are the hop bags'
/// gold labels.
#[allow(clippy::too_many_arguments)]
pub(crate) fn item_objective<T: Scalar>(
    net: &Net,
    params: ParamView<'_, T>,
    data: &Dataset,
    cfg: &JointConfig,
    item: TrainItem,
    rng: &mut SeededRng,
    train: Option<f64>,
    grads: Option<&mut GradBuffer<T>>,
) -> Result<T> {
    let bag = &data.direct.bags()[item.bag];
    let r = item.relation;
    let sents = data.bag_sentences(bag);
    if sents.is_empty() {
        return Err(Error::Argument("training item with an empty bag".into()));
    }
    let pick = match cfg.bag_mode {
        BagMode::Max if sents.len() > 1 => {
            let scores: Vec<T> = bag_probs(net, params, &sents)?.into_iter().map(|p| p[r.index()]).collect();
            select_sentence(&scores, BagMode::Max, rng)?.1
        }
        BagMode::Max => 0,
        BagMode::Rand => rng.below(sents.len()),
    };
    let direct = forward_selected(net, params, sents[pick], rng, train)?;
    let e = direct.probs[r.index()];

    let beta = T::from_f64_lossy(cfg.beta);
    let choice = if cfg.beta > 0.0 {
        choose_path(net, params, data, bag, r, rng, train)?
    } else {
        None
    };
    let g = match &choice {
        Some(c) => c.fwd_a.probs[c.ra.index()] * c.fwd_b.probs[c.rb.index()] * c.probs[r.index()],
        None => T::zero(),
    };
    let l = global_score(e, g, beta);
    let ln_l = l.ln();
    if !ln_l.is_finite() {
        return Err(non_finite(bag, r));
    }

    if let Some(grads) = grads {
        let dl = T::one() / l;
        let mut dp = vec![T::zero(); net.n_rel()];
        dp[r.index()] = dl * (T::one() - beta * g);
        net.encoder.backward(&direct, &dp, params, grads)?;
        if let Some(c) = &choice {
            let dg = dl * (T::one() - e) * beta;
            let (ea, eb) = (c.fwd_a.probs[c.ra.index()], c.fwd_b.probs[c.rb.index()]);
            let p = c.probs[r.index()];
            let mut dpath = vec![T::zero(); net.n_rel()];
            dpath[r.index()] = dg * ea * eb;
            let table = params.get(net.path.rel_emb);
            path_prob_backward(table, c.ra, c.rb, &c.probs, &dpath, grads.get_mut(net.path.rel_emb));
            if !cfg.freeze_hops {
                let mut da = vec![T::zero(); net.n_rel()];
                da[c.ra.index()] = dg * eb * p;
                net.encoder.backward(&c.fwd_a, &da, params, grads)?;
                let mut db = vec![T::zero(); net.n_rel()];
                db[c.rb.index()] = dg * ea * p;
                net.encoder.backward(&c.fwd_b, &db, params, grads)?;
            }
        }
    }
    Ok(ln_l)
}

/// Highest-scoring path with gold hop relations; paths through NA hop
/// bags are discarded.
fn choose_path<T: Scalar>(
    net: &Net,
    params: ParamView<'_, T>,
    data: &Dataset,
    bag: &Bag,
    r: RelationId,
    rng: &mut SeededRng,
    train: Option<f64>,
) -> Result<Option<PathChoice<T>>> {
    let table = params.get(net.path.rel_emb);
    let mut best: Option<(T, RelationId, RelationId, usize, usize)> = None;
    for path in data.paths.paths(bag.key) {
        let (Some(bag_a), Some(bag_b)) = (data.hops.get(path.hop1()), data.hops.get(path.hop2())) else {
            continue;
        };
        let sa = data.bag_sentences(bag_a);
        let sb = data.bag_sentences(bag_b);
        let (ea, arg_a) = max_per_relation(&bag_probs(net, params, &sa)?);
        let (eb, arg_b) = max_per_relation(&bag_probs(net, params, &sb)?);
        let (Some(ha), Some(hb)) = (infer_hop_gold(&ea, &bag_a.gold), infer_hop_gold(&eb, &bag_b.gold)) else {
            continue;
        };
        let p = path_relation_prob(table, ha.relation, hb.relation);
        let g = ha.confidence * hb.confidence * p[r.index()];
        if best.is_none_or(|b| g > b.0) {
            best = Some((
                g,
                ha.relation,
                hb.relation,
                bag_a.sentences[arg_a[ha.relation.index()]],
                bag_b.sentences[arg_b[hb.relation.index()]],
            ));
        }
    }
    let Some((_, ra, rb, sa, sb)) = best else {
        return Ok(None);
    };
    let fwd_a = forward_selected(net, params, &data.sentences[sa], rng, train)?;
    let fwd_b = forward_selected(net, params, &data.sentences[sb], rng, train)?;
    Ok(Some(PathChoice {
        ra,
        rb,
        fwd_a,
        fwd_b,
        probs: path_relation_prob(table, ra, rb),
    }))
}

/// Which pass an item belongs to; fixes its random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Pass {
    /// Dropout off; used for objective reports and gradient checks.
    Eval,
    Train { epoch: usize },
}

/// Sum of `ln L` over `items` (each tagged with its position in the
/// pass), plus the summed gradient when requested. Work is split into
/// `threads` contiguous chunks whose buffers merge in chunk order.
pub(crate) fn run_items<T: Scalar>(
    net: &Net,
    store: &ParamStore<T>,
    data: &Dataset,
    cfg: &JointConfig,
    items: &[(usize, TrainItem)],
    pass: Pass,
    want_grads: bool,
) -> Result<(f64, Option<GradBuffer<T>>)> {
    let params = store.view();
    let base = SeededRng::new(cfg.seed);
    let (base, keep) = match pass {
        Pass::Eval => (base.fork(STREAM_EVAL), None),
        Pass::Train { epoch } => (base.fork(STREAM_TRAIN).fork(epoch as u64), Some(cfg.keep)),
    };
    let work = |chunk: &[(usize, TrainItem)]| -> Result<(Vec<f64>, Option<GradBuffer<T>>)> {
        let mut buf = want_grads.then(|| store.new_grad_buffer());
        let mut terms = Vec::with_capacity(chunk.len());
        for &(pos, item) in chunk {
            let mut rng = base.fork(pos as u64);
            let t = item_objective(net, params, data, cfg, item, &mut rng, keep, buf.as_mut())?;
            terms.push(t.to_f64_lossy());
        }
        Ok((terms, buf))
    };

    let threads = cfg.threads.max(1).min(items.len().max(1));
    let results: Vec<Result<(Vec<f64>, Option<GradBuffer<T>>)>> = if threads == 1 {
        vec![work(items)]
    } else {
        let size = items.len().div_ceil(threads);
        std::thread::scope(|scope| {
            let handles: Vec<_> = items.chunks(size).map(|c| scope.spawn(move || work(c))).collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(Error::Internal("worker panicked".into()))))
                .collect()
        })
    };

    let mut total = 0.0;
    let mut merged: Option<GradBuffer<T>> = None;
    for res in results {
        let (terms, buf) = res?;
        total += terms.iter().sum::<f64>();
        if let Some(buf) = buf {
            match merged.as_mut() {
                None => merged = Some(buf),
                Some(m) => m.add(&buf)?,
            }
        }
    }
    if want_grads && merged.is_none() {
        merged = Some(store.new_grad_buffer());
    }
    Ok((total, merged))
}

/// `J = Σ ln L` over every training item with dropout off.
pub fn objective<T: Scalar>(model: &Model<T>, data: &Dataset, cfg: &JointConfig) -> Result<f64> {
    let items: Vec<(usize, TrainItem)> = data.items().into_iter().enumerate().collect();
    Ok(run_items(&model.net, &model.store, data, cfg, &items, Pass::Eval, false)?.0)
}

/// `J` over `items` and its gradient with dropout off.
pub fn objective_with_grads<T: Scalar>(
    net: &Net,
    store: &ParamStore<T>,
    data: &Dataset,
    cfg: &JointConfig,
    items: &[TrainItem],
) -> Result<(f64, GradBuffer<T>)> {
    let items: Vec<(usize, TrainItem)> = items.iter().copied().enumerate().collect();
    let (j, g) = run_items(net, store, data, cfg, &items, Pass::Eval, true)?;
    Ok((j, g.expect("gradients requested")))
}
