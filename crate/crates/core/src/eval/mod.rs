//! Held-out evaluation: ranking, P/R curves, P@N, max-F1, long-tail and
//! noise slices, and the zero-shot feature probe.

mod output;
mod probe;
mod ranking;
mod slices;

pub use output::{metrics_csv, pr_csv, pr_svg, write_text};
pub use probe::{build_probe_examples, zero_shot_probe, LogisticProbe, ProbeConfig, ProbeExample, ProbeReport};
pub use ranking::{
    f1, gold_facts, max_f1, p_at_fractions, pr_curve, rank_predictions, rank_scores, sort_ranked, PrPoint,
    RankedFact,
};
pub use slices::{longtail_slice, na_needed, noise_slice, NoiseReport};

/// Default ranking size for P@N.
pub const TOP_N: usize = 20_000;
pub const P_AT_FRACTIONS: [f64; 3] = [0.1, 0.2, 0.5];

#[cfg(test)]
mod tests;
