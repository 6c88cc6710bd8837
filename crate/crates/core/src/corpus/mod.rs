//! Distant-supervision dataset construction: alignment of a triple store
//! with annotated sentences, negative sampling, fact-disjoint splits,
//! two-hop path extraction, vocabulary and embedding tables.

mod align;
mod embeddings;
pub mod io;
mod negatives;
mod paths;
mod split;
mod types;
mod vocab;

pub use align::{align, fit_window, AlignReport, Alignment};
pub use embeddings::{load_embeddings, random_embeddings, read_embeddings, EmbeddingTable};
pub use negatives::{sample_negatives, sample_negatives_with_retries, DEFAULT_MAX_RETRIES};
pub use paths::{extract_paths, extract_paths_for, PathIndex, DEFAULT_MAX_PATHS};
pub use split::{split, Part, SplitRatios, Splits};
pub use types::{
    Bag, BagSet, EncodedSentence, EntityId, EntityMention, EntityTable, PairKey, PathRecord,
    RelationId, RelationInventory, SentenceInstance, Symbols, TaggedSentence, Triple, NA_NAME,
};
pub use vocab::{Vocabulary, PAD, PAD_TOKEN, UNK, UNK_TOKEN};
