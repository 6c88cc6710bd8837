//! Compositional toy world: `r3(h, t)` holds exactly when some `e` gives
//! `r1(h, e)` and `r2(e, t)`.
//!
//! Hop relations and the other relations are expressed by keyword
//! templates. Held-out `r3` facts only get uninformative sentences, which
//! share their templates with NA pairs, so the only usable evidence for
//! them is the `r1 → r2` path. NA distractor pairs carry paths of other
//! relation compositions.

pub mod bench;
mod world;

pub use world::{generate, relation_inventory, World, WorldConfig, ENTITY_TOKEN, N_RELATIONS, R1, R2, R3};
