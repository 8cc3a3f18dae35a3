//! Desk-scale reproduction of a one-dimensional superfluid He-4 nanodrop
//! bouncing off an infinitely hard wall.
//!
//! The drop is described by a local density functional (nonlinear
//! Schrödinger equation in one space dimension). The crate solves the
//! stationary profile from the first integral of the stationary equation,
//! boosts it toward a Dirichlet wall, time-evolves it with a five-value
//! predictor–corrector under a norm/energy conservation monitor — in the
//! full quantum dynamics and in a quantum-potential-subtracted "classical"
//! variant — and extracts the multi-peak diffraction tail that separates
//! the two.
//!
//! Internally everything is in Kelvin–Ångström units (ħ = k_B = 1);
//! laboratory units (m/s, seconds) appear only at the API boundary.

pub mod analysis;
pub mod dynamics;
pub mod functional;
pub mod grid;
pub mod io;
pub mod stationary;
pub mod stencil;
pub mod units;

pub use analysis::{AnalysisError, PhaseField, ProfileDistance, TailReport};
pub use dynamics::{
    ConservationSample, EvolutionConfig, EvolveError, Mode, Snapshot, Trajectory, WaveField,
};
pub use functional::{FieldError, FunctionalParams};
pub use grid::{Grid, GridError};
pub use stationary::{DensityProfile, ProfileError};
pub use units::PhysicalConstants;
