pub mod config;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod joint;
pub mod numkernel;
mod parallel;
pub mod path_encoder;
pub mod scalar;
pub mod synthetic;
pub mod text_encoder;

pub use error::{Error, Result};
pub use parallel::par_map;
pub use scalar::Scalar;

pub type Model32 = joint::Model<f32>;
pub type Model64 = joint::Model<f64>;
