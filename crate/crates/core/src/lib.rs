//! Constructs circle-invariant symplectic forms on 4-manifolds that fiber as
//! principal circle bundles over the flat 3-torus, and certifies them.

pub mod certify;
pub mod construct;
pub mod flow;
pub mod forms;
pub mod topology;
