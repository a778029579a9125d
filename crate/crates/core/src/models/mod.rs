//! Ready-made systems for NV centers and radical pairs.

pub mod nv;
pub mod scrp;
