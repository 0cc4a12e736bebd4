//! Local Fourier analysis of two-grid multigrid methods and nonsmooth
//! minimax tuning of their parameters.
//!
//! The crate builds Fourier symbols `Ẽ(p, θ)` of two-grid error propagation
//! for a small catalog of model problems ([`problems`]), evaluates the
//! objective `Ψ(p) = max_θ ρ(Ẽ(p, θ))` ([`fourier`]), and minimizes it with
//! brute force, gradient sampling on a fixed frequency grid, or outer
//! approximation over a growing frequency set ([`optim`]). A discrete 1D
//! solver ([`mgvalidate`]) checks the predictions against measured
//! convergence.

pub mod cli;
pub mod counter;
pub mod eigen;
pub mod error;
pub mod fourier;
pub mod linalg;
pub mod mgvalidate;
pub mod optim;
pub mod problems;

pub use counter::EvalCounter;
pub use eigen::GradientMode;
pub use error::{Error, Result};
pub use fourier::{Frequency, FrequencyRegion};
pub use problems::{problem_by_name, ProblemSpec};
