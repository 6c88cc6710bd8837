use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::numkernel::SeededRng;

use super::types::{EntityId, Triple};

pub const DEFAULT_MAX_RETRIES: usize = 100;

/// Builds the corrupted triple set S⁻ by replacing the head or the tail of
/// KB triples with a random entity from `pool`.
///
/// `ratio` negatives are drawn per positive (fractional ratios round the
/// total). Source triples are visited round-robin in `kb` order. No output
/// triple is in `kb`, none repeats, and none has `head == tail`.
pub fn sample_negatives(
    kb: &[Triple],
    pool: &[EntityId],
    ratio: f64,
    rng: &mut SeededRng,
) -> Result<Vec<Triple>> {
    sample_negatives_with_retries(kb, pool, ratio, rng, DEFAULT_MAX_RETRIES)
}

pub fn sample_negatives_with_retries(
    kb: &[Triple],
    pool: &[EntityId],
    ratio: f64,
    rng: &mut SeededRng,
    max_retries: usize,
) -> Result<Vec<Triple>> {
    if !(ratio >= 0.0) || !ratio.is_finite() {
        return Err(Error::Argument(format!("negative ratio must be >= 0, got {ratio}")));
    }
    let total = (kb.len() as f64 * ratio).round() as usize;
    if total == 0 {
        return Ok(Vec::new());
    }
    if pool.is_empty() {
        return Err(Error::Generation("empty entity pool".into()));
    }
    let known: HashSet<Triple> = kb.iter().copied().collect();
    let mut produced: HashSet<Triple> = HashSet::with_capacity(total);
    let mut out = Vec::with_capacity(total);

    for i in 0..total {
        let src = kb[i % kb.len()];
        let mut found = None;
        for _ in 0..max_retries {
            let replace_head = rng.coin();
            let e = pool[rng.below(pool.len())];
            let cand = if replace_head {
                Triple::new(e, src.relation, src.tail)
            } else {
                Triple::new(src.head, src.relation, e)
            };
            if cand.head != cand.tail && !known.contains(&cand) && !produced.contains(&cand) {
                found = Some(cand);
                break;
            }
        }
        let Some(cand) = found else {
            return Err(Error::Generation(format!(
                "no fresh corruption of triple #{} after {max_retries} attempts (pool of {})",
                i % kb.len(),
                pool.len()
            )));
        };
        produced.insert(cand);
        out.push(cand);
    }
    Ok(out)
}
