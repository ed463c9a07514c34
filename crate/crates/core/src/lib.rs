//! Evolution maps for Lie groups presented as projective-limit chains of
//! Banach levels.
//!
//! Given an integrable control `γ: [0, 1] → 𝔤`, the solver computes the
//! Carathéodory solution of `ẏ = γ(t).y, y(0) = e` by chart-local Picard
//! contraction on pieces of small L¹ mass, then glues the rescaled pieces by
//! right translation.

pub mod chain;
pub mod controls;
pub mod error;
pub mod instances;
pub mod oracle;
pub mod quadrature;
pub mod solver;
mod vecops;

pub use chain::{validate_chain, Chain, RightInvariantField, ValidationReport};
pub use controls::{choose_subdivision_count, ControlSignal, Generator, Grading};
pub use error::{Error, Result};
pub use instances::{make_instance, InstanceKind};
pub use solver::{
    continuity_probe, evol_full, evolve, right_log_derivative, EvolutionReport, LocalBounds,
    SolverConfig, Trajectory,
};
