//! Exact invariant calculus on SU(3)/T² and the G₂ cone over it, with the
//! numerical kernels for the slowly converging perturbation.

pub mod calculus;
pub mod forms;
pub mod liealg;
pub mod poly;
pub mod cone;
pub mod obstruction;
pub mod spectral_ode;
pub mod band;
pub mod adams_simon;
pub mod tables;
