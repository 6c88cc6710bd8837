use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntityId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelationId(pub u32);

impl RelationId {
    /// The "no relation" label; always index 0 of an inventory.
    pub const NA: RelationId = RelationId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_na(self) -> bool {
        self == Self::NA
    }
}

impl EntityId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

impl fmt::Display for RelationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

/// String ↔ dense id table for entities. Ids follow first-seen order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EntityTable {
    names: Vec<String>,
    index: HashMap<String, EntityId>,
}

impl EntityTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, name: &str) -> EntityId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = EntityId(self.names.len() as u32);
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<EntityId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: EntityId) -> &str {
        &self.names[id.index()]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = EntityId> {
        (0..self.names.len() as u32).map(EntityId)
    }
}

/// Relation names with `NA` pinned at index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationInventory {
    names: Vec<String>,
    index: HashMap<String, RelationId>,
}

pub const NA_NAME: &str = "NA";

impl RelationInventory {
    /// Builds an inventory from relation names; `NA` is prepended and
    /// duplicates are dropped, keeping first occurrence order.
    pub fn new<S: AsRef<str>>(names: impl IntoIterator<Item = S>) -> Self {
        let mut inv = RelationInventory {
            names: vec![NA_NAME.to_string()],
            index: HashMap::from([(NA_NAME.to_string(), RelationId::NA)]),
        };
        for n in names {
            let n = n.as_ref();
            if !inv.index.contains_key(n) {
                let id = RelationId(inv.names.len() as u32);
                inv.names.push(n.to_string());
                inv.index.insert(n.to_string(), id);
            }
        }
        inv
    }

    /// `NA` followed by the given names in sorted order.
    pub fn sorted<S: AsRef<str>>(names: impl IntoIterator<Item = S>) -> Self {
        let mut v: Vec<String> = names.into_iter().map(|s| s.as_ref().to_string()).collect();
        v.sort();
        v.dedup();
        Self::new(v.into_iter().filter(|n| n != NA_NAME))
    }

    pub fn get(&self, name: &str) -> Option<RelationId> {
        self.index.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<RelationId> {
        self.get(name)
            .ok_or_else(|| Error::Argument(format!("unknown relation `{name}`")))
    }

    pub fn name(&self, id: RelationId) -> &str {
        &self.names[id.index()]
    }

    /// Total count including `NA`.
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn ids(&self) -> impl Iterator<Item = RelationId> {
        (0..self.names.len() as u32).map(RelationId)
    }

    pub fn non_na(&self) -> impl Iterator<Item = RelationId> {
        (1..self.names.len() as u32).map(RelationId)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// Entity and relation symbol tables shared by every artifact of a corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct Symbols {
    pub entities: EntityTable,
    pub relations: RelationInventory,
}

impl Symbols {
    pub fn new(relations: RelationInventory) -> Self {
        Symbols {
            entities: EntityTable::new(),
            relations,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub head: EntityId,
    pub relation: RelationId,
    pub tail: EntityId,
}

impl Triple {
    pub fn new(head: EntityId, relation: RelationId, tail: EntityId) -> Self {
        Triple {
            head,
            relation,
            tail,
        }
    }

    pub fn pair(&self) -> PairKey {
        PairKey::new(self.head, self.tail)
    }
}

/// Ordered entity pair; `(h, t)` and `(t, h)` are distinct keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairKey {
    pub head: EntityId,
    pub tail: EntityId,
}

impl PairKey {
    pub fn new(head: EntityId, tail: EntityId) -> Self {
        PairKey { head, tail }
    }
}

/// Half-open token span `[start, end)` naming one entity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EntityMention {
    pub entity: EntityId,
    pub start: usize,
    pub end: usize,
}

impl EntityMention {
    pub fn new(entity: EntityId, start: usize, end: usize) -> Self {
        EntityMention { entity, start, end }
    }

    pub fn is_valid_in(&self, len: usize) -> bool {
        self.start < self.end && self.end <= len
    }

    pub fn overlaps(&self, other: &EntityMention) -> bool {
        self.start < other.end && other.start < self.end
    }

    /// Position used for relative-offset features: the first token.
    pub fn anchor(&self) -> usize {
        self.start
    }
}

/// A sentence with two annotated mentions, before any relation label.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggedSentence {
    pub tokens: Vec<String>,
    pub head: EntityMention,
    pub tail: EntityMention,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentenceInstance {
    pub tokens: Vec<String>,
    pub head: EntityMention,
    pub tail: EntityMention,
    pub label: RelationId,
}

impl SentenceInstance {
    pub fn pair(&self) -> PairKey {
        PairKey::new(self.head.entity, self.tail.entity)
    }

    pub fn fact(&self) -> Triple {
        Triple::new(self.head.entity, self.label, self.tail.entity)
    }

    /// Same tokens and spans, ignoring the label.
    pub fn same_text(&self, other: &SentenceInstance) -> bool {
        self.head == other.head && self.tail == other.tail && self.tokens == other.tokens
    }
}

/// Sentence mapped through a vocabulary, ready for the text encoder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedSentence {
    pub words: Vec<u32>,
    pub head_pos: usize,
    pub tail_pos: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bag {
    pub key: PairKey,
    /// Indices into the owning sentence list, one per distinct text.
    pub sentences: Vec<usize>,
    /// Sorted relations holding for the pair, or `[NA]`.
    pub gold: Vec<RelationId>,
}

impl Bag {
    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn is_na(&self) -> bool {
        self.gold.iter().all(|r| r.is_na())
    }

    /// Gold relations other than `NA`.
    pub fn relational_gold(&self) -> impl Iterator<Item = RelationId> + '_ {
        self.gold.iter().copied().filter(|r| !r.is_na())
    }
}

/// All bags over one sentence list, sorted by pair key.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BagSet {
    bags: Vec<Bag>,
    index: HashMap<PairKey, usize>,
}

impl BagSet {
    /// Groups sentences by ordered pair. Duplicate texts (the same sentence
    /// labeled with several relations) collapse into one bag member, and
    /// the labels are merged into the gold set.
    pub fn from_sentences(sentences: &[SentenceInstance]) -> Self {
        let mut groups: HashMap<PairKey, (Vec<usize>, Vec<RelationId>)> = HashMap::new();
        for (i, s) in sentences.iter().enumerate() {
            let entry = groups.entry(s.pair()).or_default();
            if !entry.0.iter().any(|&j| sentences[j].same_text(s)) {
                entry.0.push(i);
            }
            entry.1.push(s.label);
        }
        let mut keys: Vec<PairKey> = groups.keys().copied().collect();
        keys.sort();
        let mut bags = Vec::with_capacity(keys.len());
        for key in keys {
            let (idx, mut gold) = groups.remove(&key).expect("key from map");
            gold.sort();
            gold.dedup();
            if gold.len() > 1 {
                gold.retain(|r| !r.is_na());
            }
            bags.push(Bag {
                key,
                sentences: idx,
                gold,
            });
        }
        Self::from_bags(bags)
    }

    pub fn from_bags(mut bags: Vec<Bag>) -> Self {
        bags.sort_by_key(|b| b.key);
        let index = bags.iter().enumerate().map(|(i, b)| (b.key, i)).collect();
        BagSet { bags, index }
    }

    pub fn get(&self, key: PairKey) -> Option<&Bag> {
        self.index.get(&key).map(|&i| &self.bags[i])
    }

    pub fn position(&self, key: PairKey) -> Option<usize> {
        self.index.get(&key).copied()
    }

    pub fn bags(&self) -> &[Bag] {
        &self.bags
    }

    pub fn len(&self) -> usize {
        self.bags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bags.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Bag> {
        self.bags.iter()
    }
}

/// Two-hop connection `head → mid → tail` backed by bags `(head, mid)`
/// and `(mid, tail)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PathRecord {
    pub head: EntityId,
    pub mid: EntityId,
    pub tail: EntityId,
}

impl PathRecord {
    pub fn hop1(&self) -> PairKey {
        PairKey::new(self.head, self.mid)
    }

    pub fn hop2(&self) -> PairKey {
        PairKey::new(self.mid, self.tail)
    }

    pub fn pair(&self) -> PairKey {
        PairKey::new(self.head, self.tail)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(h: u32, t: u32, label: u32, tokens: &[&str]) -> SentenceInstance {
        SentenceInstance {
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
            head: EntityMention::new(EntityId(h), 0, 1),
            tail: EntityMention::new(EntityId(t), 1, 2),
            label: RelationId(label),
        }
    }

    #[test]
    fn inventory_pins_na_first() {
        let inv = RelationInventory::sorted(["b", "a", "NA", "a"]);
        assert_eq!(inv.names(), &["NA", "a", "b"]);
        assert_eq!(inv.get("NA"), Some(RelationId::NA));
        assert_eq!(inv.non_na().count(), 2);
    }

    #[test]
    fn bags_merge_duplicate_texts_and_labels() {
        let s = vec![
            inst(0, 1, 1, &["x", "y"]),
            inst(0, 1, 2, &["x", "y"]),
            inst(0, 1, 1, &["x", "y", "z"]),
            inst(1, 0, 0, &["y", "x"]),
        ];
        let bags = BagSet::from_sentences(&s);
        assert_eq!(bags.len(), 2);
        let b = bags.get(PairKey::new(EntityId(0), EntityId(1))).unwrap();
        assert_eq!(b.sentences, vec![0, 2]);
        assert_eq!(b.gold, vec![RelationId(1), RelationId(2)]);
        let r = bags.get(PairKey::new(EntityId(1), EntityId(0))).unwrap();
        assert!(r.is_na());
    }

    #[test]
    fn mention_overlap() {
        let a = EntityMention::new(EntityId(0), 0, 2);
        let b = EntityMention::new(EntityId(1), 2, 3);
        let c = EntityMention::new(EntityId(1), 1, 3);
        assert!(!a.overlaps(&b));
        assert!(a.overlaps(&c));
        assert!(a.is_valid_in(2));
        assert!(!a.is_valid_in(1));
    }
}
