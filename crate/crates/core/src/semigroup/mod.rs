//! Finite-volume dynamical semigroups `γ_t(Λ) = exp(t L♯)` generated by
//! Lindblad models, with a dense exact backend and an RK4 observable backend.

mod evolve;
mod generator;
mod model;

pub use evolve::{
    duality_check, evolve_exact, evolve_ode, DualityReport, EvolutionBackend, OdeParams,
    DEFAULT_EXACT_CAP,
};
pub use generator::{build_generator, Generator};
pub use model::{
    HamiltonianTerm, JumpTerm, LindbladModel, CATALOG, DEFAULT_COUPLING, DEFAULT_FIELD,
    DEFAULT_RATE, MAX_PATTERN_SITES,
};
