use std::collections::HashMap;

use super::types::{EncodedSentence, SentenceInstance};

pub const PAD: u32 = 0;
pub const UNK: u32 = 1;
pub const PAD_TOKEN: &str = "<pad>";
pub const UNK_TOKEN: &str = "<unk>";

#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    /// Keeps tokens seen strictly more than `min_count` times. Kept tokens
    /// are ordered by descending frequency, then lexicographically.
    pub fn build<'a>(sentences: impl IntoIterator<Item = &'a [String]>, min_count: usize) -> Self {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for s in sentences {
            for t in s {
                *counts.entry(t.as_str()).or_default() += 1;
            }
        }
        let mut kept: Vec<(&str, usize)> = counts
            .into_iter()
            .filter(|&(t, c)| c > min_count && t != PAD_TOKEN && t != UNK_TOKEN)
            .collect();
        kept.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        Self::from_tokens(kept.into_iter().map(|(t, _)| t.to_string()))
    }

    pub fn from_instances(instances: &[SentenceInstance], min_count: usize) -> Self {
        Self::build(instances.iter().map(|i| i.tokens.as_slice()), min_count)
    }

    /// Reserved entries followed by `tokens` in order; repeated or reserved
    /// tokens are ignored.
    pub fn from_tokens(tokens: impl IntoIterator<Item = String>) -> Self {
        let mut v = Vocabulary {
            tokens: vec![PAD_TOKEN.to_string(), UNK_TOKEN.to_string()],
            index: HashMap::from([(PAD_TOKEN.to_string(), PAD), (UNK_TOKEN.to_string(), UNK)]),
        };
        for t in tokens {
            if !v.index.contains_key(&t) {
                v.index.insert(t.clone(), v.tokens.len() as u32);
                v.tokens.push(t);
            }
        }
        v
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lookup(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(UNK)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn token(&self, id: u32) -> &str {
        &self.tokens[id as usize]
    }

    /// All entries in index order, reserved ones first.
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn encode(&self, s: &SentenceInstance) -> EncodedSentence {
        EncodedSentence {
            words: s.tokens.iter().map(|t| self.lookup(t)).collect(),
            head_pos: s.head.anchor(),
            tail_pos: s.tail.anchor(),
        }
    }

    /// 64-bit FNV-1a over the entries in index order, each followed by a
    /// 0xFF separator. Stable across platforms and releases.
    pub fn content_hash(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for t in &self.tokens {
            for &b in t.as_bytes().iter().chain(std::iter::once(&0xFFu8)) {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01B3);
            }
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(text: &str) -> Vec<Vec<String>> {
        vec![text.split_whitespace().map(String::from).collect()]
    }

    #[test]
    fn strict_min_count() {
        let c = corpus("a a b");
        let v = Vocabulary::build(c.iter().map(|s| s.as_slice()), 1);
        assert_eq!(v.tokens(), &[PAD_TOKEN, UNK_TOKEN, "a"]);
        assert_eq!(v.lookup("b"), UNK);
    }

    #[test]
    fn zero_min_count_keeps_everything() {
        let c = corpus("a a b c");
        let v = Vocabulary::build(c.iter().map(|s| s.as_slice()), 0);
        assert_eq!(v.len(), 5);
        assert_eq!(v.token(2), "a");
        assert_eq!(v.lookup("never-seen"), UNK);
        assert_ne!(PAD, UNK);
    }

    #[test]
    fn hash_depends_on_order_and_content() {
        let a = Vocabulary::from_tokens(["x".to_string(), "y".to_string()]);
        let b = Vocabulary::from_tokens(["y".to_string(), "x".to_string()]);
        let c = Vocabulary::from_tokens(["xy".to_string()]);
        let d = Vocabulary::from_tokens(["x".to_string(), "y".to_string()]);
        assert_ne!(a.content_hash(), b.content_hash());
        assert_ne!(a.content_hash(), c.content_hash());
        assert_eq!(a.content_hash(), d.content_hash());
    }
}
