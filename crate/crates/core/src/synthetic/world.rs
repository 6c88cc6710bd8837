
use crate::corpus::{EntityId, EntityMention, RelationId, RelationInventory, SentenceInstance, Triple};
use crate::numkernel::SeededRng;

pub const N_RELATIONS: usize = 12;
pub const ENTITY_TOKEN: &str = "ENT";
pub const R1: RelationId = RelationId(1);
pub const R2: RelationId = RelationId(2);
pub const R3: RelationId = RelationId(3);

const FILLER: [&str; 16] = [
    "the", "of", "and", "in", "a", "to", "was", "for", "on", "with", "as", "by", "at", "from", "that", "it",
];
const SYNONYMS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct WorldConfig {
    /// Chains whose `r3` fact is in training; every other one gets only uninformative sentences.
    pub train_chains: usize,
    /// Chains whose `r3` fact is held out (hop facts stay in training).
    pub test_chains: usize,
    /// Facts per relation `r4..r12`.
    pub other_facts: usize,
    /// NA pairs with a non-`r1∘r2` path, per split.
    pub distractors: usize,
    pub train_na_pairs: usize,
    pub test_na_pairs: usize,
    /// Share of held-out `r3` facts with a single sentence.
    pub singleton_share: f64,
    /// Most sentences per fact.
    pub max_sentences: usize,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig {
            train_chains: 80,
            test_chains: 60,
            other_facts: 16,
            distractors: 40,
            train_na_pairs: 240,
            test_na_pairs: 1800,
            singleton_share: 0.4,
            max_sentences: 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct World {
    pub relations: RelationInventory,
    pub train: Vec<SentenceInstance>,
    pub test: Vec<SentenceInstance>,
    /// Every true fact of the world (train and held-out).
    pub kb: Vec<Triple>,
    /// Held-out `r3` facts.
    pub held_out: Vec<Triple>,
    pub entities: u32,
}

impl World {
    /// Every token the generator can emit.
    pub fn tokens() -> Vec<String> {
        let mut v: Vec<String> = FILLER.iter().map(|s| s.to_string()).collect();
        v.push(ENTITY_TOKEN.to_string());
        for r in 1..=N_RELATIONS {
            for s in 0..SYNONYMS {
                v.push(keyword(r, s));
            }
        }
        v
    }
}

fn keyword(r: usize, s: usize) -> String {
    format!("rel{r}w{s}")
}

struct Gen {
    rng: SeededRng,
    next_entity: u32,
}

impl Gen {
    fn entity(&mut self) -> EntityId {
        self.next_entity += 1;
        EntityId(self.next_entity - 1)
    }

    fn filler(&mut self, out: &mut Vec<String>, lo: usize, hi: usize) {
        let n = lo + self.rng.below(hi - lo + 1);
        for _ in 0..n {
            out.push(FILLER[self.rng.below(FILLER.len())].to_string());
        }
    }

    /// `filler ENT filler [keyword] filler ENT filler`.
    fn sentence(&mut self, h: EntityId, t: EntityId, label: RelationId, keyword_of: Option<usize>) -> SentenceInstance {
        let mut tokens = Vec::new();
        self.filler(&mut tokens, 0, 2);
        let hp = tokens.len();
        tokens.push(ENTITY_TOKEN.to_string());
        match keyword_of {
            Some(r) => {
                self.filler(&mut tokens, 0, 2);
                tokens.push(keyword(r, self.rng.below(SYNONYMS)));
                self.filler(&mut tokens, 0, 2);
            }
            None => self.filler(&mut tokens, 1, 4),
        }
        let tp = tokens.len();
        tokens.push(ENTITY_TOKEN.to_string());
        self.filler(&mut tokens, 0, 2);
        SentenceInstance {
            tokens,
            head: EntityMention::new(h, hp, hp + 1),
            tail: EntityMention::new(t, tp, tp + 1),
            label,
        }
    }

    fn count(&mut self, max: usize) -> usize {
        1 + self.rng.below(max)
    }

    fn informative(&mut self, out: &mut Vec<SentenceInstance>, f: Triple, max: usize) {
        for _ in 0..self.count(max) {
            out.push(self.sentence(f.head, f.tail, f.relation, Some(f.relation.index())));
        }
    }

    fn uninformative(&mut self, out: &mut Vec<SentenceInstance>, h: EntityId, t: EntityId, label: RelationId, n: usize) {
        for _ in 0..n {
            out.push(self.sentence(h, t, label, None));
        }
    }

    /// NA pair `(a, c)` with a path `a -x-> b -y-> c` where `(x, y) != (r1, r2)`.
    fn distractor(&mut self, train: &mut Vec<SentenceInstance>, kb: &mut Vec<Triple>, max: usize) -> (EntityId, EntityId) {
        let (a, b, c) = (self.entity(), self.entity(), self.entity());
        let other = RelationId(4 + self.rng.below(N_RELATIONS - 3) as u32);
        let (x, y) = if self.rng.coin() { (R1, other) } else { (other, R2) };
        for f in [Triple::new(a, x, b), Triple::new(b, y, c)] {
            kb.push(f);
            self.informative(train, f, max);
        }
        (a, c)
    }
}

pub fn relation_inventory() -> RelationInventory {
    RelationInventory::new((1..=N_RELATIONS).map(|r| format!("r{r}")))
}

/// Generates a world; identical seeds give identical worlds.
pub fn generate(cfg: &WorldConfig, seed: u64) -> World {
    let mut g = Gen {
        rng: SeededRng::new(seed),
        next_entity: 0,
    };
    let max = cfg.max_sentences.max(1);
    let (mut train, mut test, mut kb, mut held_out) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());

    for i in 0..cfg.train_chains + cfg.test_chains {
        let (h, e, t) = (g.entity(), g.entity(), g.entity());
        for f in [Triple::new(h, R1, e), Triple::new(e, R2, t)] {
            kb.push(f);
            g.informative(&mut train, f, max);
        }
        let f = Triple::new(h, R3, t);
        kb.push(f);
        if i < cfg.train_chains {
            if i % 2 == 0 {
                g.informative(&mut train, f, max);
            } else {
                let n = g.count(max);
                g.uninformative(&mut train, h, t, R3, n);
            }
        } else {
            held_out.push(f);
            let n = if g.rng.uniform() < cfg.singleton_share {
                1
            } else {
                2 + g.rng.below(max.max(2) - 1)
            };
            g.uninformative(&mut test, h, t, R3, n);
        }
    }
    for r in 4..=N_RELATIONS {
        for _ in 0..cfg.other_facts {
            let f = Triple::new(g.entity(), RelationId(r as u32), g.entity());
            kb.push(f);
            g.informative(&mut train, f, max);
        }
    }
    for split in 0..2 {
        for _ in 0..cfg.distractors {
            let (a, c) = g.distractor(&mut train, &mut kb, max);
            let n = g.count(2);
            let out = if split == 0 { &mut train } else { &mut test };
            g.uninformative(out, a, c, RelationId::NA, n);
        }
    }
    for _ in 0..cfg.train_na_pairs {
        let (a, b) = (g.entity(), g.entity());
        let n = g.count(2);
        g.uninformative(&mut train, a, b, RelationId::NA, n);
    }
    for _ in 0..cfg.test_na_pairs {
        let (a, b) = (g.entity(), g.entity());
        let n = if g.rng.uniform() < 0.7 { 1 } else { 2 };
        g.uninformative(&mut test, a, b, RelationId::NA, n);
    }

    World {
        relations: relation_inventory(),
        train,
        test,
        kb,
        held_out,
        entities: g.next_entity,
    }
}
