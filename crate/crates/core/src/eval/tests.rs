use std::collections::BTreeSet;

use proptest::prelude::*;

use super::*;
use crate::corpus::{EntityId, EntityMention, PairKey, RelationId, SentenceInstance, Triple};
use crate::error::Error;
use crate::joint::toy::tiny_world;
use crate::joint::{score_all, PairScores};
use crate::numkernel::SeededRng;

fn fact(h: u32, r: u32, t: u32, score: f64) -> RankedFact {
    RankedFact {
        head: EntityId(h),
        relation: RelationId(r),
        tail: EntityId(t),
        score,
    }
}

fn gold(facts: &[(u32, u32, u32)]) -> BTreeSet<Triple> {
    facts
        .iter()
        .map(|&(h, r, t)| Triple::new(EntityId(h), RelationId(r), EntityId(t)))
        .collect()
}

#[test]
fn cartesian_ranking_with_deterministic_ties() {
    let scores: Vec<PairScores<f64>> = (0..3)
        .map(|i| PairScores {
            pair: PairKey::new(EntityId(i), EntityId(i + 10)),
            text: vec![0.0; 5],
            path: vec![0.0; 5],
            global: vec![0.9, 0.5, 0.5, 0.2, 0.1],
        })
        .collect();
    let ranked = rank_scores(&scores, None);
    assert_eq!(ranked.len(), 12);
    assert!(ranked.iter().all(|f| !f.relation.is_na()));
    // equal scores ordered by (head, relation, tail)
    let top: Vec<(u32, u32)> = ranked[..6].iter().map(|f| (f.head.0, f.relation.0)).collect();
    assert_eq!(top, vec![(0, 1), (0, 2), (1, 1), (1, 2), (2, 1), (2, 2)]);
    let only = rank_scores(&scores, Some(&[RelationId(3)]));
    assert_eq!(only.len(), 3);
}

#[test]
fn ranking_matches_brute_force_sort() {
    let (model, data, cfg) = tiny_world(11);
    let a = rank_predictions(&model, &data, &cfg, None).unwrap();
    let b = rank_predictions(&model, &data, &cfg, None).unwrap();
    assert_eq!(a, b);
    let mut brute = Vec::new();
    for s in score_all(&model, &data, &cfg).unwrap() {
        for r in 1..s.global.len() {
            brute.push((-s.global[r], s.pair.head, RelationId(r as u32), s.pair.tail));
        }
    }
    brute.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2, x.3).cmp(&(y.1, y.2, y.3))));
    let got: Vec<_> = a.iter().map(|f| (-f.score, f.head, f.relation, f.tail)).collect();
    assert_eq!(got, brute);
}

#[test]
fn pr_curve_examples() {
    let ranked = [fact(0, 1, 1, 0.9), fact(2, 1, 3, 0.8), fact(4, 1, 5, 0.7)];
    let g = gold(&[(0, 1, 1), (4, 1, 5)]);
    let pts = pr_curve(&ranked, &g).unwrap();
    let want = [(1.0, 0.5), (0.5, 0.5), (2.0 / 3.0, 1.0)];
    for (p, (pr, rc)) in pts.iter().zip(want) {
        assert!((p.precision - pr).abs() < 1e-15 && (p.recall - rc).abs() < 1e-15);
    }
    assert!((max_f1(&pts) - 0.8).abs() < 1e-12);

    let g = gold(&[(0, 1, 1), (9, 1, 9), (8, 1, 8)]);
    let p1 = pr_curve(&ranked[..1], &g).unwrap()[0];
    assert_eq!((p1.precision, p1.recall), (1.0, 1.0 / 3.0));

    let none = gold(&[(7, 2, 7)]);
    assert!(pr_curve(&ranked, &none).unwrap().iter().all(|p| p.precision == 0.0));
    assert!(matches!(pr_curve(&ranked, &BTreeSet::new()), Err(Error::Argument(_))));
}

#[test]
fn max_f1_examples() {
    let pt = |p, r| PrPoint {
        cutoff: 1,
        precision: p,
        recall: r,
    };
    assert_eq!(max_f1(&[pt(0.2, 0.1), pt(1.0, 1.0)]), 1.0);
    assert_eq!(max_f1(&[pt(0.5, 0.5)]), 0.5);
    assert_eq!(max_f1(&[pt(0.0, 0.0)]), 0.0);
}

#[test]
fn p_at_fraction_examples() {
    let correct = [true, true, false, true, true, false, false, false, false, false];
    let ranked: Vec<RankedFact> = correct
        .iter()
        .enumerate()
        .map(|(i, _)| fact(i as u32, 1, 100, 1.0 - i as f64 / 100.0))
        .collect();
    let g: BTreeSet<Triple> = ranked
        .iter()
        .zip(correct)
        .filter(|(_, c)| *c)
        .map(|(f, _)| f.triple())
        .collect();
    assert_eq!(p_at_fractions(&ranked, &g, 10, &[0.5]).unwrap(), vec![0.8]);
    assert!(matches!(p_at_fractions(&ranked, &g, 10, &[0.05]), Err(Error::Argument(_))));
    let all: BTreeSet<Triple> = ranked.iter().map(|f| f.triple()).collect();
    assert_eq!(p_at_fractions(&ranked, &all, 20_000, &P_AT_FRACTIONS).unwrap(), vec![1.0; 3]);
    // consistent with the curve at the same cutoff
    let curve = pr_curve(&ranked, &g).unwrap();
    assert_eq!(p_at_fractions(&ranked, &g, 10, &[0.2]).unwrap()[0], curve[1].precision);
}

fn inst(h: u32, t: u32, r: u32, tag: usize) -> SentenceInstance {
    SentenceInstance {
        tokens: vec![format!("w{tag}"), "x".into(), "y".into()],
        head: EntityMention::new(EntityId(h), 0, 1),
        tail: EntityMention::new(EntityId(t), 2, 3),
        label: RelationId(r),
    }
}

#[test]
fn longtail_examples() {
    let mut test = vec![inst(0, 1, 1, 0)];
    test.extend((0..3).map(|i| inst(2, 3, 1, i)));
    test.extend((0..2).map(|i| inst(4, 5, 2, i)));
    test.extend((0..4).map(|i| inst(6, 7, 0, i)));
    let one = longtail_slice(&test, 1).unwrap();
    assert_eq!(one.len(), 1 + 4);
    let two = longtail_slice(&test, 2).unwrap();
    assert_eq!(gold_facts(&two), gold(&[(0, 1, 1), (4, 2, 5)]));
    assert_eq!(two.iter().filter(|s| s.label.is_na()).count(), 4);
    assert_eq!(longtail_slice(&two, 2).unwrap(), two);
    assert!(longtail_slice(&test, 0).is_err());
}

#[test]
fn noise_examples() {
    let mut test: Vec<SentenceInstance> = (0..100).map(|i| inst(i, i + 1000, 1, 0)).collect();
    test.extend((0..500).map(|i| inst(5000 + i, 6000 + i, 0, 0)));
    let (s75, rep) = noise_slice(&test, 0.75, &mut SeededRng::new(1)).unwrap();
    assert_eq!(rep.na_kept, 300);
    assert_eq!(s75.len(), 400);
    assert!((rep.achieved - 0.75).abs() <= 0.005);
    let (again, _) = noise_slice(&test, 0.75, &mut SeededRng::new(1)).unwrap();
    assert_eq!(again, s75);
    let (twice, _) = noise_slice(&s75, 0.75, &mut SeededRng::new(1)).unwrap();
    assert_eq!(twice, s75);
    let (zero, rep) = noise_slice(&test, 0.0, &mut SeededRng::new(1)).unwrap();
    assert_eq!((zero.len(), rep.na_kept), (100, 0));
    let (most, rep) = noise_slice(&test, 0.95, &mut SeededRng::new(1)).unwrap();
    assert_eq!(rep.na_kept, 500);
    assert_eq!(most.len(), 600);
}

proptest! {
    #[test]
    fn curve_invariants(marks in proptest::collection::vec(any::<bool>(), 1..60), extra in 0usize..5) {
        let ranked: Vec<RankedFact> = (0..marks.len()).map(|i| fact(i as u32, 1, 0, -(i as f64))).collect();
        let mut g: BTreeSet<Triple> = ranked.iter().zip(&marks).filter(|(_, m)| **m).map(|(f, _)| f.triple()).collect();
        for k in 0..extra {
            g.insert(Triple::new(EntityId(10_000 + k as u32), RelationId(1), EntityId(0)));
        }
        prop_assume!(!g.is_empty());
        let pts = pr_curve(&ranked, &g).unwrap();
        for w in pts.windows(2) {
            prop_assert!(w[1].recall >= w[0].recall);
        }
        for p in &pts {
            let c = p.precision * p.cutoff as f64;
            prop_assert!((c - c.round()).abs() < 1e-9);
            prop_assert!((0.0..=1.0).contains(&p.precision) && (0.0..=1.0).contains(&p.recall));
        }
    }

    #[test]
    fn noise_hits_target(rel in 1usize..80, na in 0usize..400, target in 0.0f64..0.95, seed in 0u64..50) {
        let mut test: Vec<SentenceInstance> = (0..rel).map(|i| inst(i as u32, 1_000, 1, 0)).collect();
        test.extend((0..na).map(|i| inst(i as u32, 2_000, 0, 0)));
        let (out, rep) = noise_slice(&test, target, &mut SeededRng::new(seed)).unwrap();
        prop_assert_eq!(out.iter().filter(|s| !s.label.is_na()).count(), rel);
        let need = na_needed(rel, target).unwrap();
        if need <= na {
            prop_assert_eq!(rep.na_kept, need);
            // rounding to whole sentences is the only error
            prop_assert!((rep.achieved - target).abs() <= 0.5 / out.len() as f64 + 1e-12);
        } else {
            prop_assert_eq!(rep.na_kept, na);
        }
        let (twice, _) = noise_slice(&out, target, &mut SeededRng::new(seed)).unwrap();
        prop_assert_eq!(twice, out);
    }
}

#[test]
fn probe_separable_features() {
    let mut rng = SeededRng::new(3);
    let make = |rng: &mut SeededRng, n: usize| -> Vec<ProbeExample> {
        (0..n)
            .map(|i| {
                let label = i % 3;
                let mut features = vec![rng.uniform_in(-0.1, 0.1); 4];
                features[label] += 1.0;
                ProbeExample { features, label }
            })
            .collect()
    };
    let train = make(&mut rng, 150);
    let test = make(&mut rng, 60);
    let rep = zero_shot_probe(&train, &test, 3, &ProbeConfig::default()).unwrap();
    assert_eq!(rep.accuracy, 1.0);
}

#[test]
fn probe_shuffled_labels_is_chance() {
    let mut rng = SeededRng::new(4);
    let mut make = |n: usize| -> Vec<ProbeExample> {
        (0..n)
            .map(|_| ProbeExample {
                features: (0..6).map(|_| rng.uniform_in(-1.0, 1.0)).collect(),
                label: rng.below(4),
            })
            .collect()
    };
    let train = make(2000);
    let test = make(2000);
    let cfg = ProbeConfig {
        epochs: 20,
        ..ProbeConfig::default()
    };
    let rep = zero_shot_probe(&train, &test, 4, &cfg).unwrap();
    assert!((rep.accuracy - 0.25).abs() < 0.05, "{rep:?}");
}

#[test]
fn probe_uninformative_features_predict_majority() {
    let labels = [0, 0, 0, 1, 2, 0, 1, 0, 2, 0];
    let ex: Vec<ProbeExample> = labels
        .iter()
        .map(|&label| ProbeExample {
            features: vec![0.3, -0.2],
            label,
        })
        .collect();
    let rep = zero_shot_probe(&ex, &ex, 3, &ProbeConfig::default()).unwrap();
    assert_eq!(rep.accuracy, 0.6);
    assert!(zero_shot_probe(&ex, &[], 3, &ProbeConfig::default()).is_err());
    assert!(zero_shot_probe(&[], &ex, 3, &ProbeConfig::default()).is_err());
}

#[test]
fn probe_features_from_hop_sentences() {
    let (model, data, _) = tiny_world(12);
    let facts = [
        Triple::new(EntityId(0), RelationId(3), EntityId(2)),
        Triple::new(EntityId(2), RelationId(2), EntityId(0)),
    ];
    let ex = build_probe_examples(&model, &data, &facts, crate::text_encoder::BagMode::Max, &mut SeededRng::new(1)).unwrap();
    // (0,2) has a direct bag and (2,0) has no path
    assert!(ex.is_empty());

    let mut direct_free = data.clone();
    let keep: Vec<_> = data.hops.bags().iter().filter(|b| b.key != PairKey::new(EntityId(0), EntityId(2))).cloned().collect();
    direct_free.hops = crate::corpus::BagSet::from_bags(keep);
    let ex = build_probe_examples(&model, &direct_free, &facts[..1], crate::text_encoder::BagMode::Max, &mut SeededRng::new(1)).unwrap();
    assert_eq!(ex.len(), 1);
    assert_eq!(ex[0].features.len(), 2 * 6);
    assert_eq!(ex[0].label, 3);
}

#[test]
fn outputs_are_well_formed() {
    let pts = [
        PrPoint {
            cutoff: 1,
            precision: 1.0,
            recall: 0.5,
        },
        PrPoint {
            cutoff: 2,
            precision: 0.5,
            recall: 0.5,
        },
    ];
    let csv = pr_csv(&pts);
    assert_eq!(csv, "cutoff,precision,recall\n1,1,0.5\n2,0.5,0.5\n");
    assert_eq!(metrics_csv(&[("max_f1".into(), 0.8)]), "metric,value\nmax_f1,0.8\n");
    let svg = pr_svg(&pts, "a < b");
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert!(svg.contains("polyline") && svg.contains("a &lt; b"));
}
