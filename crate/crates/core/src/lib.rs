//! Simulation of a two-phase mud/water system in a narrow canal.
//!
//! The mud obeys a nonlinear Darcy law with a width-averaged effective
//! viscosity, the water a linear one. Both potentials are solved on fixed
//! reference strips after flattening the interface `y = f(x)`, the interface
//! velocity is recovered from an implicit nonlocal equation, and the interface
//! is advanced in time.
//!
//! Module map:
//!
//! * [`rheology`]: viscosity laws and the effective viscosity `μ_m`.
//! * [`geometry`]: periodic profiles, curvature, the flattening map.
//! * [`discretization`]: Fourier x Chebyshev grids and fields.
//! * [`water`] / [`mud`]: the transformed elliptic problems and their solvers.
//! * [`evolution`]: the nonlocal operator, the velocity solve, time stepping.
//! * [`io`]: configuration, outputs and the command line front end.
//! * [`selftest`]: the numerical acceptance checks, runnable from the CLI.

pub mod discretization;
pub mod error;
pub mod evolution;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod mud;
pub mod rheology;
pub mod selftest;
pub mod water;

pub use discretization::{Domain, Field2D, Grid};
pub use error::{Error, Result};
pub use evolution::{ModelParams, SimState, Trajectory};
pub use geometry::PeriodicProfile;
pub use rheology::{EffectiveViscosity, ViscosityModel};
