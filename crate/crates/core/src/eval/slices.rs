use std::collections::HashMap;

use log::warn;

use crate::corpus::{SentenceInstance, Triple};
use crate::error::{Error, Result};
use crate::numkernel::SeededRng;

/// Keeps sentences of facts with at most `n_s` test sentences, plus every
/// NA sentence. Input order is preserved.
pub fn longtail_slice(test: &[SentenceInstance], n_s: usize) -> Result<Vec<SentenceInstance>> {
    if n_s == 0 {
        return Err(Error::Argument("long-tail threshold must be >= 1".into()));
    }
    let mut counts: HashMap<Triple, usize> = HashMap::new();
    for s in test.iter().filter(|s| !s.label.is_na()) {
        *counts.entry(s.fact()).or_default() += 1;
    }
    Ok(test
        .iter()
        .filter(|s| s.label.is_na() || counts[&s.fact()] <= n_s)
        .cloned()
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseReport {
    pub relational: usize,
    pub na_kept: usize,
    pub na_available: usize,
    /// NA sentences over all kept sentences.
    pub achieved: f64,
}

/// NA sentence count giving fraction `target` next to `relational` others.
pub fn na_needed(relational: usize, target: f64) -> Option<usize> {
    if target <= 0.0 {
        Some(0)
    } else if target >= 1.0 {
        None
    } else {
        Some((target * relational as f64 / (1.0 - target)).round() as usize)
    }
}

/// Keeps all relational sentences and a seeded random subset of NA
/// sentences so that NA sentences make up `target` of the result. If too
/// few NA sentences exist, keeps them all and warns. Input order is
/// preserved.
pub fn noise_slice(
    test: &[SentenceInstance],
    target: f64,
    rng: &mut SeededRng,
) -> Result<(Vec<SentenceInstance>, NoiseReport)> {
    if !(0.0..=1.0).contains(&target) {
        return Err(Error::Argument(format!("noise target {target} outside [0, 1]")));
    }
    let na: Vec<usize> = (0..test.len()).filter(|&i| test[i].label.is_na()).collect();
    let relational = test.len() - na.len();
    let want = na_needed(relational, target).unwrap_or(na.len());
    let keep_n = if want > na.len() {
        warn!(
            "noise target {target} needs {want} NA sentences but only {} exist",
            na.len()
        );
        na.len()
    } else {
        want
    };
    let mut chosen = na.clone();
    rng.shuffle(&mut chosen);
    chosen.truncate(keep_n);
    let mut keep = vec![false; test.len()];
    for i in chosen {
        keep[i] = true;
    }
    let out: Vec<SentenceInstance> = test
        .iter()
        .enumerate()
        .filter(|(i, s)| !s.label.is_na() || keep[*i])
        .map(|(_, s)| s.clone())
        .collect();
    let report = NoiseReport {
        relational,
        na_kept: keep_n,
        na_available: na.len(),
        achieved: if out.is_empty() { 0.0 } else { keep_n as f64 / out.len() as f64 },
    };
    Ok((out, report))
}
