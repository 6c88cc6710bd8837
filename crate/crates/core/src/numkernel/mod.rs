//! Minimal dense numeric kernel the encoders are built on.

mod gradcheck;
mod ops;
mod params;
mod rng;
mod tensor;

pub use gradcheck::{finite_diff_check, finite_diff_check_params, relative_error, GradCheckReport};
pub use ops::{affine, dropout_mask, l1_distance, sign0, softmax, softmax_backward, DropoutMode};
pub(crate) use ops::{affine_into, softmax_in_place};
pub use params::{GradBuffer, ParamId, ParamStore, ParamView};
pub use rng::SeededRng;
pub use tensor::Tensor;
