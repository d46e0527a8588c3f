//! Dense linear algebra, shallow layers with hand-written backward passes,
//! Adam, and a central-difference gradient checker.

mod adam;
mod gradcheck;
mod layer;
mod matrix;

pub use adam::{adam_step, AdamState};
pub use gradcheck::check_gradient;
pub use layer::{sigmoid, softplus, tanh, Activation, DenseLayer, GradTape, LayerGrad};
pub use matrix::dot;
pub use matrix::Matrix;
