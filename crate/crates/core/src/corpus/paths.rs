use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::types::{BagSet, EntityId, PairKey, PathRecord};

pub const DEFAULT_MAX_PATHS: usize = 8;

/// Two-hop paths for each entity pair, extracted once before training.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PathIndex {
    by_pair: BTreeMap<PairKey, Vec<PathRecord>>,
}

impl PathIndex {
    pub fn paths(&self, pair: PairKey) -> &[PathRecord] {
        self.by_pair.get(&pair).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Number of pairs with at least one path.
    pub fn pairs_with_paths(&self) -> usize {
        self.by_pair.len()
    }

    pub fn total_paths(&self) -> usize {
        self.by_pair.values().map(Vec::len).sum()
    }

    /// All records, sorted by pair then by selection rank.
    pub fn records(&self) -> impl Iterator<Item = &PathRecord> {
        self.by_pair.values().flatten()
    }

    /// Rebuilds an index from stored records, keeping their order per pair.
    pub fn from_records(records: impl IntoIterator<Item = PathRecord>) -> Self {
        let mut by_pair: BTreeMap<PairKey, Vec<PathRecord>> = BTreeMap::new();
        for r in records {
            by_pair.entry(r.pair()).or_default().push(r);
        }
        PathIndex { by_pair }
    }
}

/// Finds, for every pair that has a bag or is listed in `candidates`, each
/// intermediate `e` with nonempty bags `(h, e)` and `(e, t)`. When more than
/// `max_paths` exist, keeps those with the largest `min(|bag(h,e)|, |bag(e,t)|)`,
/// ties broken by ascending entity id.
pub fn extract_paths(bags: &BagSet, candidates: &[PairKey], max_paths: usize) -> PathIndex {
    let pairs: BTreeSet<PairKey> = bags
        .iter()
        .map(|b| b.key)
        .chain(candidates.iter().copied())
        .collect();
    extract_paths_for(bags, pairs, max_paths)
}

/// Like [`extract_paths`] but only for the given pairs.
pub fn extract_paths_for(
    bags: &BagSet,
    pairs: impl IntoIterator<Item = PairKey>,
    max_paths: usize,
) -> PathIndex {
    let mut out_edges: HashMap<EntityId, Vec<(EntityId, usize)>> = HashMap::new();
    let mut sizes: HashMap<PairKey, usize> = HashMap::new();
    for b in bags.iter().filter(|b| !b.is_empty()) {
        out_edges
            .entry(b.key.head)
            .or_default()
            .push((b.key.tail, b.len()));
        sizes.insert(b.key, b.len());
    }

    let mut by_pair = BTreeMap::new();
    for pair in pairs {
        let Some(first_hops) = out_edges.get(&pair.head) else {
            continue;
        };
        let mut found: Vec<(usize, EntityId)> = first_hops
            .iter()
            .filter(|(e, _)| *e != pair.head && *e != pair.tail)
            .filter_map(|&(e, s1)| {
                sizes
                    .get(&PairKey::new(e, pair.tail))
                    .map(|&s2| (s1.min(s2), e))
            })
            .collect();
        if found.is_empty() {
            continue;
        }
        found.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        found.truncate(max_paths);
        by_pair.insert(
            pair,
            found
                .into_iter()
                .map(|(_, e)| PathRecord {
                    head: pair.head,
                    mid: e,
                    tail: pair.tail,
                })
                .collect(),
        );
    }
    PathIndex { by_pair }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::types::{Bag, RelationId};

    fn bag(h: u32, t: u32, n: usize) -> Bag {
        Bag {
            key: PairKey::new(EntityId(h), EntityId(t)),
            sentences: (0..n).collect(),
            gold: vec![RelationId(1)],
        }
    }

    const A: u32 = 0;
    const B: u32 = 1;

    #[test]
    fn single_join() {
        let bags = BagSet::from_bags(vec![bag(A, 10, 1), bag(10, B, 1), bag(A, 11, 1)]);
        let idx = extract_paths(&bags, &[PairKey::new(EntityId(A), EntityId(B))], 8);
        assert_eq!(
            idx.paths(PairKey::new(EntityId(A), EntityId(B))),
            &[PathRecord {
                head: EntityId(A),
                mid: EntityId(10),
                tail: EntityId(B)
            }]
        );
        assert_eq!(idx.total_paths(), 1);
    }

    #[test]
    fn no_shared_intermediate() {
        let bags = BagSet::from_bags(vec![bag(A, 10, 1), bag(11, B, 1)]);
        let idx = extract_paths(&bags, &[PairKey::new(EntityId(A), EntityId(B))], 8);
        assert!(idx.paths(PairKey::new(EntityId(A), EntityId(B))).is_empty());
    }

    #[test]
    fn cap_keeps_best_supported_intermediates() {
        // intermediates 10..15 with min bag sizes 2, 5, 3, 5, 1
        let sizes = [(2, 4), (5, 6), (3, 3), (7, 5), (1, 9)];
        let mut bags = Vec::new();
        for (i, &(s1, s2)) in sizes.iter().enumerate() {
            bags.push(bag(A, 10 + i as u32, s1));
            bags.push(bag(10 + i as u32, B, s2));
        }
        let idx = extract_paths(&BagSet::from_bags(bags), &[PairKey::new(EntityId(A), EntityId(B))], 3);
        let mids: Vec<u32> = idx
            .paths(PairKey::new(EntityId(A), EntityId(B)))
            .iter()
            .map(|p| p.mid.0)
            .collect();
        assert_eq!(mids, vec![11, 13, 12]);
    }
}
