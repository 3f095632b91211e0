//! Pseudo-spectral laboratory for the Gross-Pitaevskii equation near the
//! constant state `|psi| = 1`.
//!
//! The crate is organised around a periodic computational box ([`grid`],
//! [`field`]) on which the remaining modules operate:
//!
//! * [`madelung`]: transforms between the wavefunction, the hydrodynamic
//!   pair `(a, u)` and the augmented pair `(b, z)`, plus vortex detection;
//! * [`dynamics`]: split-step Fourier integration of the semiclassical GP
//!   equation, pseudo-spectral RK4 for the hydrodynamic system, conserved
//!   energies and 1-D travelling waves;
//! * [`linear`]: exact per-mode propagators for the free wave system, the
//!   dispersive operator with symbol `sqrt(2)|xi| sqrt(1 + eps^2 |xi|^2)`,
//!   Duhamel variants and the associated unitary groups;
//! * [`lp`]: Littlewood-Paley partition, Besov/Sobolev/Lipschitz norms,
//!   the `1/eps` low/high split, weighted energy functionals and numeric
//!   checkers for commutator/tame-product bounds;
//! * [`experiments`]: reproducible scenario harness measuring horizons,
//!   approximation errors, decay exponents and estimate constants.

pub mod dynamics;
pub mod experiments;
pub mod field;
pub mod grid;
pub mod linear;
pub mod lp;
pub mod madelung;
pub mod snapshot;

pub use num_complex::Complex64;

/// Scalar type used throughout the crate.
pub type Real = f64;
/// Complex scalar type used throughout the crate.
pub type Cplx = Complex64;

/// Speed of the acoustic waves about the constant state.
pub const SOUND_SPEED: f64 = std::f64::consts::SQRT_2;

/// Crate-wide error type aggregating the per-module failures.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Grid(#[from] grid::GridError),
    #[error(transparent)]
    Madelung(#[from] madelung::MadelungError),
    #[error(transparent)]
    Dynamics(#[from] dynamics::DynamicsError),
    #[error(transparent)]
    Linear(#[from] linear::LinearError),
    #[error(transparent)]
    Lp(#[from] lp::LpError),
    #[error(transparent)]
    Experiment(#[from] experiments::ExperimentError),
    #[error(transparent)]
    Snapshot(#[from] snapshot::SnapshotError),
}

pub type Result<T> = std::result::Result<T, Error>;
