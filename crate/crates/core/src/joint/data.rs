use crate::corpus::{
    extract_paths_for, Bag, BagSet, EncodedSentence, PairKey, PathIndex, RelationId, SentenceInstance, Vocabulary,
};

/// Encoded sentences with the bags to train on or score (`direct`), the
/// bags usable as path hops, and the paths of every direct pair.
///
/// Direct bags index the first `direct.len()` sentences; hop bags index
/// the whole list.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub sentences: Vec<EncodedSentence>,
    pub direct: BagSet,
    pub hops: BagSet,
    pub paths: PathIndex,
}

/// One objective term: a direct bag and one of its gold relations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainItem {
    pub bag: usize,
    pub relation: RelationId,
}

impl Dataset {
    /// Hops come from `direct` plus `extra_hops`; paths are extracted for
    /// the direct pairs only.
    pub fn build(
        vocab: &Vocabulary,
        direct: &[SentenceInstance],
        extra_hops: &[SentenceInstance],
        max_paths: usize,
    ) -> Self {
        let (sentences, direct_bags, hops) = Self::encode(vocab, direct, extra_hops);
        let pairs: Vec<PairKey> = direct_bags.iter().map(|b| b.key).collect();
        let paths = extract_paths_for(&hops, pairs, max_paths);
        Dataset {
            sentences,
            direct: direct_bags,
            hops,
            paths,
        }
    }

    /// As [`Dataset::build`] with precomputed paths (records for pairs
    /// outside `direct` are dropped).
    pub fn with_paths(
        vocab: &Vocabulary,
        direct: &[SentenceInstance],
        extra_hops: &[SentenceInstance],
        paths: &PathIndex,
    ) -> Self {
        let (sentences, direct_bags, hops) = Self::encode(vocab, direct, extra_hops);
        let paths = PathIndex::from_records(
            paths
                .records()
                .filter(|r| direct_bags.get(r.pair()).is_some())
                .copied(),
        );
        Dataset {
            sentences,
            direct: direct_bags,
            hops,
            paths,
        }
    }

    fn encode(
        vocab: &Vocabulary,
        direct: &[SentenceInstance],
        extra_hops: &[SentenceInstance],
    ) -> (Vec<EncodedSentence>, BagSet, BagSet) {
        let all: Vec<SentenceInstance> = direct.iter().chain(extra_hops).cloned().collect();
        let sentences = all.iter().map(|s| vocab.encode(s)).collect();
        let direct_bags = BagSet::from_sentences(direct);
        let hops = BagSet::from_sentences(&all);
        (sentences, direct_bags, hops)
    }

    pub fn bag_sentences<'a>(&'a self, bag: &Bag) -> Vec<&'a EncodedSentence> {
        bag.sentences.iter().map(|&i| &self.sentences[i]).collect()
    }

    /// Every (direct bag, gold relation) pair, NA bags included, in bag order.
    pub fn items(&self) -> Vec<TrainItem> {
        self.direct
            .iter()
            .enumerate()
            .flat_map(|(i, b)| b.gold.iter().map(move |&r| TrainItem { bag: i, relation: r }))
            .collect()
    }
}
