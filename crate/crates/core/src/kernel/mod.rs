//! Chart-local tensor calculus on jets.

pub mod chart;
pub mod conformal;
pub mod curvature;
pub mod forms;
pub mod jet;
pub mod lie;
pub mod patch;
pub mod sampling;
pub mod tensor;
pub mod transport;
