use std::collections::{HashMap, HashSet};

use super::types::{
    BagSet, EntityMention, PairKey, RelationId, SentenceInstance, TaggedSentence, Triple,
};

/// Labeled output of distant-supervision alignment.
#[derive(Debug, Clone, Default)]
pub struct Alignment {
    pub instances: Vec<SentenceInstance>,
    pub bags: BagSet,
    pub report: AlignReport,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AlignReport {
    pub sentences_in: usize,
    /// Spans out of range, empty, overlapping, or naming one entity twice.
    pub skipped_invalid: usize,
    /// Mentions too far apart to fit in `max_len` tokens.
    pub skipped_too_long: usize,
    /// Sentences whose pair matched neither the KB nor the negative set.
    pub unmatched: usize,
    pub truncated: usize,
}

/// Labels every sentence whose ordered entity pair (in either mention
/// order) appears in `kb` with that triple's relation, or with `NA` when
/// the pair only appears in `negatives`. A pair with several KB relations
/// yields one instance per relation. KB relations take precedence over
/// negatives for the same pair.
pub fn align(
    kb: &[Triple],
    negatives: &[Triple],
    sentences: &[TaggedSentence],
    max_len: usize,
) -> Alignment {
    let mut by_pair: HashMap<PairKey, Vec<RelationId>> = HashMap::new();
    for t in kb {
        by_pair.entry(t.pair()).or_default().push(t.relation);
    }
    for rels in by_pair.values_mut() {
        rels.sort();
        rels.dedup();
    }
    let negative_pairs: HashSet<PairKey> = negatives.iter().map(Triple::pair).collect();

    let mut report = AlignReport {
        sentences_in: sentences.len(),
        ..Default::default()
    };
    let mut instances = Vec::new();

    for s in sentences {
        let len = s.tokens.len();
        if !s.head.is_valid_in(len)
            || !s.tail.is_valid_in(len)
            || s.head.overlaps(&s.tail)
            || s.head.entity == s.tail.entity
        {
            report.skipped_invalid += 1;
            continue;
        }
        let mut matched = false;
        for (head, tail) in [(s.head, s.tail), (s.tail, s.head)] {
            let key = PairKey::new(head.entity, tail.entity);
            let labels: Vec<RelationId> = match by_pair.get(&key) {
                Some(rels) => rels.clone(),
                None if negative_pairs.contains(&key) => vec![RelationId::NA],
                None => continue,
            };
            matched = true;
            let Some((tokens, head, tail, cut)) = fit_window(&s.tokens, head, tail, max_len) else {
                report.skipped_too_long += 1;
                continue;
            };
            if cut {
                report.truncated += 1;
            }
            for label in labels {
                instances.push(SentenceInstance {
                    tokens: tokens.clone(),
                    head,
                    tail,
                    label,
                });
            }
        }
        if !matched {
            report.unmatched += 1;
        }
    }
    if report.skipped_invalid > 0 {
        log::warn!("alignment skipped {} sentences with unresolvable spans", report.skipped_invalid);
    }
    if report.skipped_too_long > 0 {
        log::warn!(
            "alignment skipped {} sentences whose mentions do not fit in {max_len} tokens",
            report.skipped_too_long
        );
    }
    let bags = BagSet::from_sentences(&instances);
    Alignment {
        instances,
        bags,
        report,
    }
}

/// Cuts `tokens` to at most `max_len`, centering the window on the midpoint
/// of the span covering both mentions. Returns `None` when the mentions
/// themselves span more than `max_len` tokens.
pub fn fit_window(
    tokens: &[String],
    head: EntityMention,
    tail: EntityMention,
    max_len: usize,
) -> Option<(Vec<String>, EntityMention, EntityMention, bool)> {
    if tokens.len() <= max_len {
        return Some((tokens.to_vec(), head, tail, false));
    }
    let lo = head.start.min(tail.start);
    let hi = head.end.max(tail.end);
    if hi - lo > max_len {
        return None;
    }
    let mid = (lo + hi) / 2;
    let start = mid
        .saturating_sub(max_len / 2)
        .min(lo)
        .max(hi.saturating_sub(max_len))
        .min(tokens.len() - max_len);
    let shift = |m: EntityMention| EntityMention::new(m.entity, m.start - start, m.end - start);
    Some((
        tokens[start..start + max_len].to_vec(),
        shift(head),
        shift(tail),
        true,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::types::EntityId;

    const A: EntityId = EntityId(0);
    const B: EntityId = EntityId(1);
    const C: EntityId = EntityId(2);

    fn toks(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("w{i}")).collect()
    }

    fn tagged(h: EntityId, hs: usize, t: EntityId, ts: usize, n: usize) -> TaggedSentence {
        TaggedSentence {
            tokens: toks(n),
            head: EntityMention::new(h, hs, hs + 1),
            tail: EntityMention::new(t, ts, ts + 1),
        }
    }

    #[test]
    fn single_fact_single_sentence() {
        let kb = [Triple::new(A, RelationId(1), B)];
        let out = align(&kb, &[], &[tagged(A, 0, B, 3, 5)], 120);
        assert_eq!(out.instances.len(), 1);
        assert_eq!(out.instances[0].label, RelationId(1));
        assert_eq!(out.bags.len(), 1);
    }

    #[test]
    fn sentence_needs_both_entities() {
        let kb = [Triple::new(A, RelationId(1), B)];
        let out = align(&kb, &[], &[tagged(A, 0, C, 3, 5)], 120);
        assert!(out.instances.is_empty());
        assert_eq!(out.report.unmatched, 1);
    }

    #[test]
    fn bag_collects_all_sentences_of_a_pair() {
        let kb = [Triple::new(A, RelationId(1), B)];
        let s = [
            tagged(A, 0, B, 3, 5),
            tagged(A, 1, B, 2, 6),
            tagged(B, 0, A, 4, 7), // reversed mention order still supports (A, B)
        ];
        let out = align(&kb, &[], &s, 120);
        // brute-force count of sentences containing both A and B
        let expected = s
            .iter()
            .filter(|x| {
                let ents = [x.head.entity, x.tail.entity];
                ents.contains(&A) && ents.contains(&B)
            })
            .count();
        let bag = out.bags.get(PairKey::new(A, B)).unwrap();
        assert_eq!(bag.len(), expected);
        assert_eq!(bag.len(), 3);
        for &i in &bag.sentences {
            assert_eq!(out.instances[i].head.entity, A);
        }
    }

    #[test]
    fn multi_relation_pair_duplicates_instances() {
        let kb = [
            Triple::new(A, RelationId(1), B),
            Triple::new(A, RelationId(2), B),
        ];
        let out = align(&kb, &[], &[tagged(A, 0, B, 3, 5)], 120);
        assert_eq!(out.instances.len(), 2);
        let bag = out.bags.get(PairKey::new(A, B)).unwrap();
        assert_eq!(bag.gold, vec![RelationId(1), RelationId(2)]);
        assert_eq!(bag.len(), 1);
    }

    #[test]
    fn negatives_become_na_and_kb_wins() {
        let kb = [Triple::new(A, RelationId(1), B)];
        let neg = [Triple::new(C, RelationId(1), B), Triple::new(A, RelationId(2), B)];
        let out = align(&kb, &neg, &[tagged(C, 0, B, 2, 4), tagged(A, 0, B, 2, 4)], 120);
        let labels: Vec<RelationId> = out.instances.iter().map(|i| i.label).collect();
        assert_eq!(labels, vec![RelationId::NA, RelationId(1)]);
    }

    #[test]
    fn invalid_spans_are_counted() {
        let kb = [Triple::new(A, RelationId(1), B)];
        let bad = [
            tagged(A, 0, B, 9, 5),
            tagged(A, 1, B, 1, 5),
            tagged(A, 0, A, 2, 5),
        ];
        let out = align(&kb, &[], &bad, 120);
        assert_eq!(out.report.skipped_invalid, 3);
        assert!(out.instances.is_empty());
    }

    #[test]
    fn long_sentences_are_cut_around_the_mentions() {
        let kb = [Triple::new(A, RelationId(1), B)];
        let out = align(&kb, &[], &[tagged(A, 100, B, 110, 300)], 20);
        let i = &out.instances[0];
        assert_eq!(i.tokens.len(), 20);
        assert_eq!(i.tokens[i.head.start], "w100");
        assert_eq!(i.tokens[i.tail.start], "w110");
        assert_eq!(out.report.truncated, 1);

        let out = align(&kb, &[], &[tagged(A, 0, B, 50, 60)], 20);
        assert!(out.instances.is_empty());
        assert_eq!(out.report.skipped_too_long, 1);
    }

    #[test]
    fn window_edges() {
        for (h, t, n) in [(0, 3, 30), (27, 29, 30), (5, 14, 30), (10, 19, 30)] {
            let (tk, hm, tm, _) = fit_window(
                &toks(n),
                EntityMention::new(A, h, h + 1),
                EntityMention::new(B, t, t + 1),
                10,
            )
            .unwrap();
            assert_eq!(tk.len(), 10);
            assert_eq!(tk[hm.start], format!("w{h}"));
            assert_eq!(tk[tm.start], format!("w{t}"));
        }
    }
}
