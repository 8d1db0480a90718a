//! Dense tensors, a recorded reverse-mode graph, Adam, and a
//! finite-difference gradient checker.

mod gradcheck;
mod graph;
mod optim;
mod tensor;

pub use gradcheck::{grad_check, GradCheckReport, MIN_COORDINATES};
pub use graph::{cross_entropy_loss, softmax, Gradients, Graph, Node, ParamId, ParamStore};
pub use optim::{optimizer_step, AdamConfig, AdamState};
pub use tensor::Tensor;
