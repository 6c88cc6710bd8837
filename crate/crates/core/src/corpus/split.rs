use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::numkernel::SeededRng;

use super::types::{PairKey, SentenceInstance, Triple};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRatios {
    pub train: f64,
    pub valid: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.6,
            valid: 0.2,
            test: 0.2,
        }
    }
}

impl SplitRatios {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.valid, self.test];
        if parts.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::Argument(format!("split ratios must be positive: {self:?}")));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Argument(format!("split ratios must sum to 1, got {sum}")));
        }
        Ok(())
    }

    /// `(train, valid, test)` sizes for `n` units: valid and test get the
    /// floor of their share, train takes the remainder.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let share = |r: f64| ((n as f64) * r + 1e-9).floor() as usize;
        let valid = share(self.valid);
        let test = share(self.test).min(n - valid);
        (n - valid - test, valid, test)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Part {
    Train,
    Valid,
    Test,
}

/// Instance indices per split.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Splits {
    pub train: Vec<usize>,
    pub valid: Vec<usize>,
    pub test: Vec<usize>,
}

impl Splits {
    pub fn part(&self, p: Part) -> &[usize] {
        match p {
            Part::Train => &self.train,
            Part::Valid => &self.valid,
            Part::Test => &self.test,
        }
    }

    pub fn select(&self, p: Part, instances: &[SentenceInstance]) -> Vec<SentenceInstance> {
        self.part(p).iter().map(|&i| instances[i].clone()).collect()
    }
}

fn assign<K: Copy + Eq + std::hash::Hash>(
    mut units: Vec<K>,
    ratios: &SplitRatios,
    rng: &mut SeededRng,
) -> HashMap<K, Part> {
    rng.shuffle(&mut units);
    let (_, valid, test) = ratios.sizes(units.len());
    units
        .into_iter()
        .enumerate()
        .map(|(i, k)| {
            let p = if i < valid {
                Part::Valid
            } else if i < valid + test {
                Part::Test
            } else {
                Part::Train
            };
            (k, p)
        })
        .collect()
}

/// Partitions instances so that each relational fact `(h, r, t)` is
/// mentioned in exactly one split. `NA` instances are partitioned by
/// ordered pair instead, independently of the facts.
pub fn split(
    instances: &[SentenceInstance],
    ratios: &SplitRatios,
    rng: &mut SeededRng,
) -> Result<Splits> {
    ratios.validate()?;
    if instances.is_empty() {
        return Err(Error::Argument("cannot split an empty corpus".into()));
    }
    let mut facts: Vec<Triple> = instances
        .iter()
        .filter(|i| !i.label.is_na())
        .map(SentenceInstance::fact)
        .collect();
    facts.sort();
    facts.dedup();
    let mut na_pairs: Vec<PairKey> = instances
        .iter()
        .filter(|i| i.label.is_na())
        .map(SentenceInstance::pair)
        .collect();
    na_pairs.sort();
    na_pairs.dedup();

    let fact_part = assign(facts, ratios, &mut rng.fork(1));
    let na_part = assign(na_pairs, ratios, &mut rng.fork(2));

    let mut out = Splits::default();
    for (i, inst) in instances.iter().enumerate() {
        let p = if inst.label.is_na() {
            na_part[&inst.pair()]
        } else {
            fact_part[&inst.fact()]
        };
        match p {
            Part::Train => out.train.push(i),
            Part::Valid => out.valid.push(i),
            Part::Test => out.test.push(i),
        }
    }
    Ok(out)
}
