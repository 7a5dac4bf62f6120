//! Minimal CPU tensor engine: the layers the architectures need, with
//! hand-written backward passes and SGEMM-backed convolutions.

pub mod checkpoint;
pub mod gemm;
pub mod layers;
pub mod network;
pub mod optim;
pub mod tensor;

pub use checkpoint::{load_checkpoint, load_weights_from, save_checkpoint};
pub use layers::{sigmoid, Ctx};
pub use network::Network;
pub use optim::{clip_weights, max_abs_weight, Optimizer, OptimizerKind};
pub use tensor::{Param, Tensor};
