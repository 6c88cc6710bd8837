use std::collections::BTreeSet;
use std::path::Path;

use log::{info, warn};
use pathrex::config::RunConfig;
use pathrex::corpus::io::{read_tagged_sentences, read_triple_names, resolve_triples, write_instances, write_paths, write_relations, write_triples};
use pathrex::corpus::{
    align, extract_paths_for, load_embeddings, random_embeddings, sample_negatives, split, BagSet, EntityId, Part,
    PairKey, RelationInventory, SentenceInstance, Symbols, Triple, Vocabulary,
};
use pathrex::eval::{
    build_probe_examples, gold_facts, longtail_slice, max_f1, metrics_csv, noise_slice, p_at_fractions, pr_csv,
    pr_curve, pr_svg, rank_predictions, write_text, zero_shot_probe, ProbeConfig, P_AT_FRACTIONS,
};
use pathrex::joint::toy::full_pipeline_grad_check;
use pathrex::joint::{load_checkpoint, train, Dataset, Model};
use pathrex::numkernel::{SeededRng, Tensor};
use pathrex::synthetic::bench::{run_seed, BenchConfig};
use pathrex::synthetic::{generate, WorldConfig};
use pathrex::{Error, Model32, Result};

use crate::artifacts::*;
use crate::{effective_config, Command, Common};

pub enum Failure {
    Error(Error),
    /// A check ran but its result is out of tolerance.
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

const GRAD_TOLERANCE: f64 = 1e-4;

pub fn run(common: &Common, cmd: Command) -> std::result::Result<String, Failure> {
    Ok(match cmd {
        Command::BuildCorpus {
            triples,
            sentences,
            ratio,
        } => {
            let extra: Vec<String> = ratio.map(|r| format!("neg_ratio={r}")).into_iter().collect();
            let cfg = effective_config(common, None, &extra)?;
            build_corpus(common, &cfg, &triples, &sentences)?
        }
        Command::ExtractPaths { corpus } => {
            let cfg = effective_config(common, None, &[])?;
            extract(common, &cfg, &corpus)?
        }
        Command::Train { corpus, beta, paths } => {
            let extra: Vec<String> = beta.map(|b| format!("beta={b}")).into_iter().collect();
            let cfg = effective_config(common, None, &extra)?;
            train_cmd(common, &cfg, &corpus, paths.as_deref())?
        }
        Command::Eval {
            corpus,
            model,
            test,
            beta,
            paths,
            relations,
        } => {
            let extra: Vec<String> = beta.map(|b| format!("beta={b}")).into_iter().collect();
            let cfg = effective_config(common, Some(&model.join(CONFIG)), &extra)?;
            eval_cmd(common, &cfg, &corpus, &model, test.as_deref(), paths.as_deref(), &relations)?
        }
        Command::Slice {
            corpus,
            longtail,
            noise,
        } => {
            let cfg = effective_config(common, None, &[])?;
            slice_cmd(common, &cfg, &corpus, &longtail, &noise)?
        }
        Command::ZeroShot { corpus, model } => {
            let cfg = effective_config(common, Some(&model.join(CONFIG)), &[])?;
            zero_shot_cmd(common, &cfg, &corpus, &model)?
        }
        Command::GradCheck { runs } => grad_check(common, runs)?,
        Command::Synth { bench } => {
            let cfg = effective_config(common, None, &[])?;
            synth(common, &cfg, bench)?
        }
    })
}

fn build_corpus(common: &Common, cfg: &RunConfig, triples: &Path, sentences: &Path) -> Result<String> {
    let names = read_triple_names(triples)?;
    if names.iter().any(|(_, r, _)| r == pathrex::corpus::NA_NAME) {
        return Err(Error::Argument(format!("{}: the NA relation cannot appear in the KB", triples.display())));
    }
    let mut symbols = Symbols::new(RelationInventory::sorted(names.iter().map(|(_, r, _)| r.as_str())));
    let kb = resolve_triples(&names, &mut symbols)?;
    let tagged = read_tagged_sentences(sentences, &mut symbols)?;
    let out = out_dir(common.out.as_ref())?;

    let rng = SeededRng::new(cfg.seed);
    let pool: Vec<EntityId> = symbols.entities.ids().collect();
    let negatives = sample_negatives(&kb, &pool, cfg.neg_ratio, &mut rng.fork(1))?;
    let aligned = align(&kb, &negatives, &tagged, cfg.max_len);
    let parts = split(&aligned.instances, &cfg.split(), &mut rng.fork(2))?;

    write_relations(&out.join(RELATIONS), &symbols.relations)?;
    write_triples(&out.join(KB), &kb, &symbols)?;
    write_triples(&out.join("negatives.tsv"), &negatives, &symbols)?;
    let mut rows = Vec::new();
    for (name, part) in SPLITS.iter().zip([Part::Train, Part::Valid, Part::Test]) {
        let inst = parts.select(part, &aligned.instances);
        write_instances(&split_file(&out, name), &inst, &symbols)?;
        let na = inst.iter().filter(|s| s.label.is_na()).count();
        rows.push((format!("{name}_sentences"), inst.len() as f64));
        rows.push((format!("{name}_na_sentences"), na as f64));
        rows.push((format!("{name}_facts"), facts(&inst).len() as f64));
    }
    let r = &aligned.report;
    rows.extend([
        ("kb_triples".to_string(), kb.len() as f64),
        ("negatives".to_string(), negatives.len() as f64),
        ("sentences_in".to_string(), r.sentences_in as f64),
        ("instances".to_string(), aligned.instances.len() as f64),
        ("bags".to_string(), aligned.bags.len() as f64),
        ("skipped_invalid".to_string(), r.skipped_invalid as f64),
        ("skipped_too_long".to_string(), r.skipped_too_long as f64),
        ("unmatched".to_string(), r.unmatched as f64),
        ("truncated".to_string(), r.truncated as f64),
    ]);
    write_text(&out.join("stats.csv"), &metrics_csv(&rows))?;
    write_config(&out, cfg)?;
    Ok(format!(
        "corpus: {} instances in {} bags ({} train / {} valid / {} test), {} negatives -> {}",
        aligned.instances.len(),
        aligned.bags.len(),
        parts.train.len(),
        parts.valid.len(),
        parts.test.len(),
        negatives.len(),
        out.display()
    ))
}

fn facts(inst: &[SentenceInstance]) -> BTreeSet<Triple> {
    gold_facts(inst)
}

fn pairs(inst: &[SentenceInstance]) -> BTreeSet<PairKey> {
    inst.iter().map(SentenceInstance::pair).collect()
}

/// Paths of each split use hop bags from training plus the split itself.
fn extract(common: &Common, cfg: &RunConfig, dir: &Path) -> Result<String> {
    let corpus = Corpus::load(dir)?;
    let out = out_dir(common.out.as_ref())?;
    let mut summary = Vec::new();
    for (name, inst) in SPLITS.iter().zip([&corpus.train, &corpus.valid, &corpus.test]) {
        let hops: Vec<SentenceInstance> = if *name == "train" {
            corpus.train.clone()
        } else {
            inst.iter().chain(&corpus.train).cloned().collect()
        };
        let index = extract_paths_for(&BagSet::from_sentences(&hops), pairs(inst), cfg.max_paths);
        write_paths(&paths_file(&out, name), &index, &corpus.symbols)?;
        summary.push(format!("{name} {} paths over {} pairs", index.total_paths(), index.pairs_with_paths()));
    }
    write_config(&out, cfg)?;
    Ok(format!("paths: {} -> {}", summary.join(", "), out.display()))
}

fn word_table(cfg: &RunConfig, vocab: &Vocabulary, rng: &SeededRng) -> Result<Tensor<f32>> {
    let mut rng = rng.fork(0x77);
    if cfg.embeddings.is_empty() {
        return Ok(random_embeddings(vocab, cfg.d_w, &mut rng));
    }
    let t = load_embeddings(Path::new(&cfg.embeddings), vocab, cfg.d_w, &mut rng)?;
    info!(
        "embeddings: {} rows loaded, {} random, {} duplicate tokens",
        t.covered,
        t.random_rows,
        t.duplicates.len()
    );
    Ok(t.table)
}

fn dataset(
    corpus: &mut Corpus,
    vocab: &Vocabulary,
    direct: &[SentenceInstance],
    extra: &[SentenceInstance],
    paths: Option<(&Path, &str)>,
    max_paths: usize,
) -> Result<Dataset> {
    Ok(match paths {
        Some((dir, split)) => {
            let index = corpus.paths(dir, split)?;
            Dataset::with_paths(vocab, direct, extra, &index)
        }
        None => Dataset::build(vocab, direct, extra, max_paths),
    })
}

fn train_cmd(common: &Common, cfg: &RunConfig, dir: &Path, paths: Option<&Path>) -> Result<String> {
    let mut corpus = Corpus::load(dir)?;
    let out = out_dir(common.out.as_ref())?;
    let vocab = Vocabulary::from_instances(&corpus.train, cfg.min_count);
    let rng = SeededRng::new(cfg.seed).fork(0xB11D);
    let table = word_table(cfg, &vocab, &rng)?;
    let mut model: Model32 = Model::new(
        cfg.encoder(corpus.symbols.relations.len()),
        cfg.d_rel,
        table,
        vocab.content_hash(),
        &mut rng.fork(1),
    )?;
    let train_inst = corpus.train.clone();
    let data = dataset(&mut corpus, &vocab, &train_inst, &[], paths.map(|p| (p, "train")), cfg.max_paths)?;
    write_config(&out, cfg)?;
    save_vocab(&out, &vocab)?;
    let report = train(&mut model, &data, &cfg.joint(), Some(&out.join(CHECKPOINT)))?;
    let rows: Vec<String> = report
        .epoch_objective
        .iter()
        .enumerate()
        .map(|(e, j)| format!("{e},{j}"))
        .collect();
    write_csv(&out.join("epochs.csv"), "epoch,objective", &rows)?;
    let log = &report.epoch_objective;
    Ok(format!(
        "trained {} bags, {} paths, beta {}: J {:.4} -> {:.4} after {} epochs -> {}",
        data.direct.len(),
        data.paths.total_paths(),
        cfg.beta,
        log[0],
        log[log.len() - 1],
        log.len() - 1,
        out.join(CHECKPOINT).display()
    ))
}

fn load_model(model_dir: &Path) -> Result<(Model32, Vocabulary)> {
    let model: Model32 = load_checkpoint(&model_dir.join(CHECKPOINT))?;
    let vocab = load_vocab(model_dir)?;
    if vocab.content_hash() != model.vocab_hash {
        return Err(Error::Format(format!(
            "{} does not match the vocabulary the checkpoint was trained with",
            model_dir.join(VOCAB).display()
        )));
    }
    Ok((model, vocab))
}

fn check_relations(model: &Model32, symbols: &Symbols) -> Result<()> {
    if model.net.n_rel() != symbols.relations.len() {
        return Err(Error::Dimension {
            op: "model relations vs corpus relations",
            left: vec![model.net.n_rel()],
            right: vec![symbols.relations.len()],
        });
    }
    Ok(())
}

fn eval_cmd(
    common: &Common,
    cfg: &RunConfig,
    dir: &Path,
    model_dir: &Path,
    test: Option<&Path>,
    paths: Option<&Path>,
    relations: &[String],
) -> Result<String> {
    let mut corpus = Corpus::load(dir)?;
    let (model, vocab) = load_model(model_dir)?;
    check_relations(&model, &corpus.symbols)?;
    let out = out_dir(common.out.as_ref())?;
    let test_inst = match test {
        Some(p) => corpus.read_sentences(p)?,
        None => corpus.test.clone(),
    };
    let only = relations
        .iter()
        .map(|r| corpus.symbols.relations.require(r))
        .collect::<Result<Vec<_>>>()?;
    let train_inst = corpus.train.clone();
    let data = dataset(&mut corpus, &vocab, &test_inst, &train_inst, paths.map(|p| (p, "test")), cfg.max_paths)?;

    let only = (!only.is_empty()).then_some(only.as_slice());
    let ranked = rank_predictions(&model, &data, &cfg.joint(), only)?;
    let gold: BTreeSet<Triple> = gold_facts(&test_inst)
        .into_iter()
        .filter(|f| only.is_none_or(|o| o.contains(&f.relation)))
        .collect();
    let curve = pr_curve(&ranked, &gold)?;
    let best = max_f1(&curve);

    let mut metrics = vec![
        ("max_f1".to_string(), best),
        ("ranked".to_string(), ranked.len() as f64),
        ("gold".to_string(), gold.len() as f64),
    ];
    let n = cfg.top_n.min(ranked.len());
    if n < cfg.top_n {
        warn!("only {n} ranked facts, P@N uses N = {n} instead of {}", cfg.top_n);
    }
    for &f in &P_AT_FRACTIONS {
        match p_at_fractions(&ranked, &gold, n, &[f]) {
            Ok(p) => metrics.push((format!("p_at_{}pct", (f * 100.0).round()), p[0])),
            Err(e) => warn!("skipping P@{f}: {e}"),
        }
    }
    write_text(&out.join("pr.csv"), &pr_csv(&curve))?;
    write_text(&out.join("pr.svg"), &pr_svg(&curve, "Precision / recall"))?;
    write_text(&out.join("metrics.csv"), &metrics_csv(&metrics))?;
    let s = &corpus.symbols;
    let top: Vec<String> = ranked
        .iter()
        .take(cfg.top_n)
        .map(|f| {
            format!(
                "{}\t{}\t{}\t{}",
                s.entities.name(f.head),
                s.relations.name(f.relation),
                s.entities.name(f.tail),
                f.score
            )
        })
        .collect();
    write_csv(&out.join("ranked.tsv"), "head\trelation\ttail\tscore", &top)?;
    write_config(&out, cfg)?;
    Ok(format!(
        "eval: max-F1 {best:.4} over {} ranked facts ({} gold) -> {}",
        ranked.len(),
        gold.len(),
        out.display()
    ))
}

fn slice_cmd(common: &Common, cfg: &RunConfig, dir: &Path, longtail: &[usize], noise: &[f64]) -> Result<String> {
    let corpus = Corpus::load(dir)?;
    let out = out_dir(common.out.as_ref())?;
    let mut written = Vec::new();
    for &n in longtail {
        let s = longtail_slice(&corpus.test, n)?;
        write_instances(&out.join(format!("longtail_{n}.jsonl")), &s, &corpus.symbols)?;
        written.push(format!("longtail_{n} ({} sentences)", s.len()));
    }
    let mut rows = Vec::new();
    let base = SeededRng::new(cfg.seed).fork(0x5A1C);
    for (i, &t) in noise.iter().enumerate() {
        let (s, rep) = noise_slice(&corpus.test, t, &mut base.fork(i as u64))?;
        let name = format!("noise_{}", (t * 100.0).round());
        write_instances(&out.join(format!("{name}.jsonl")), &s, &corpus.symbols)?;
        rows.push(format!("{t},{},{},{},{}", rep.relational, rep.na_kept, rep.na_available, rep.achieved));
        written.push(format!("{name} ({:.1}% NA)", 100.0 * rep.achieved));
    }
    write_csv(&out.join("noise.csv"), "target,relational,na_kept,na_available,achieved", &rows)?;
    write_config(&out, cfg)?;
    Ok(format!("slices: {} -> {}", written.join(", "), out.display()))
}

/// Probe over KB facts that have no sentence of their own in the corpus
/// but are connected by a two-hop path; examples are split by the
/// configured training share.
fn zero_shot_cmd(common: &Common, cfg: &RunConfig, dir: &Path, model_dir: &Path) -> Result<String> {
    let mut corpus = Corpus::load(dir)?;
    let (model, vocab) = load_model(model_dir)?;
    check_relations(&model, &corpus.symbols)?;
    let out = out_dir(common.out.as_ref())?;
    let kb = corpus.kb()?;
    let all: Vec<SentenceInstance> = corpus
        .train
        .iter()
        .chain(&corpus.valid)
        .chain(&corpus.test)
        .cloned()
        .collect();
    let data = Dataset::build(&vocab, &all, &[], 1);
    let rng = SeededRng::new(cfg.seed).fork(0x2E50);
    let mut examples = build_probe_examples(&model, &data, &kb, cfg.bag_mode, &mut rng.fork(1))?;
    if examples.len() < 2 {
        return Err(Error::Argument(format!(
            "zero-shot probe needs at least 2 path-only facts, found {}",
            examples.len()
        )));
    }
    rng.fork(2).shuffle(&mut examples);
    let n_train = ((examples.len() as f64 * cfg.train_ratio).round() as usize).clamp(1, examples.len() - 1);
    let (train_ex, test_ex) = examples.split_at(n_train);
    let probe = ProbeConfig {
        seed: cfg.seed,
        ..ProbeConfig::default()
    };
    let rep = zero_shot_probe(train_ex, test_ex, corpus.symbols.relations.len(), &probe)?;
    let rows = vec![
        ("train_examples".to_string(), rep.train_examples as f64),
        ("test_examples".to_string(), rep.test_examples as f64),
        ("train_accuracy".to_string(), rep.train_accuracy),
        ("accuracy".to_string(), rep.accuracy),
    ];
    write_text(&out.join("probe.csv"), &metrics_csv(&rows))?;
    write_config(&out, cfg)?;
    Ok(format!(
        "zero-shot: accuracy {:.4} on {} test facts ({} train) -> {}",
        rep.accuracy,
        rep.test_examples,
        rep.train_examples,
        out.display()
    ))
}

fn grad_check(common: &Common, runs: u64) -> std::result::Result<String, Failure> {
    let first = common.seed.unwrap_or(1);
    let mut worst = 0.0f64;
    let mut rows = Vec::new();
    for seed in first..first + runs.max(1) {
        let r = full_pipeline_grad_check(seed)?;
        rows.push(format!("{seed},{},{}", r.max_rel_error, r.coordinates));
        worst = worst.max(r.max_rel_error);
    }
    if let Some(out) = &common.out {
        let out = out_dir(Some(out))?;
        write_csv(&out.join("gradcheck.csv"), "seed,max_rel_error,coordinates", &rows)?;
    }
    if worst < GRAD_TOLERANCE {
        Ok(format!("grad-check: max rel error {worst:.3e} < 1e-4"))
    } else {
        Err(Failure::Check(format!("grad-check: max rel error {worst:.3e} >= 1e-4")))
    }
}

/// Writes the synthetic world as a corpus directory (empty validation
/// split). With `bench`, also trains the path model and the text-only
/// baseline on three consecutive seeds.
fn synth(common: &Common, cfg: &RunConfig, bench: bool) -> Result<String> {
    let out = out_dir(common.out.as_ref())?;
    let world = generate(&WorldConfig::default(), cfg.seed);
    let mut symbols = Symbols::new(world.relations.clone());
    for e in 0..world.entities {
        symbols.entities.intern(&format!("e{e}"));
    }
    write_relations(&out.join(RELATIONS), &symbols.relations)?;
    write_triples(&out.join(KB), &world.kb, &symbols)?;
    write_instances(&split_file(&out, "train"), &world.train, &symbols)?;
    write_instances(&split_file(&out, "valid"), &[], &symbols)?;
    write_instances(&split_file(&out, "test"), &world.test, &symbols)?;
    write_config(&out, cfg)?;
    let mut summary = format!(
        "synthetic corpus: {} train / {} test sentences, {} held-out facts -> {}",
        world.train.len(),
        world.test.len(),
        world.held_out.len(),
        out.display()
    );
    if bench {
        let mut bc = BenchConfig::default();
        bc.joint.threads = cfg.threads;
        let mut rows = Vec::new();
        let mut gaps = Vec::new();
        for seed in cfg.seed..cfg.seed + 3 {
            let r = run_seed(&bc, seed)?;
            for (model, s) in [("path", &r.path), ("baseline", &r.baseline)] {
                let noise: Vec<String> = s.noise.iter().map(|(_, f)| f.to_string()).collect();
                rows.push(format!("{seed},{model},{},{},{}", s.full, s.longtail, noise.join(",")));
            }
            gaps.push(r.path.full - r.baseline.full);
        }
        let header = "seed,model,full,longtail_1,noise_75,noise_85,noise_95";
        write_csv(&out.join("bench.csv"), header, &rows)?;
        let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
        summary.push_str(&format!("; bench: mean max-F1 gap {:.1} points", 100.0 * mean));
    }
    Ok(summary)
}
