//! Minimal reverse-mode automatic differentiation over dense matrices,
//! plus the layers, optimizer and checkpoint format built on it.

mod adam;
mod checkpoint;
mod gradcheck;
mod nn;
mod tape;
mod tensor;

pub use adam::{AdamConfig, AdamState};
pub use checkpoint::Checkpoint;
pub use gradcheck::{grad_check, relative_error, GradCheck, RELATIVE_FLOOR};
pub use nn::{add_grads, glorot, scale_grads, zero_grads, Dropout, Mlp, ParamSet};
pub use tape::{sigmoid, Tape, Var};
pub use tensor::Tensor;
