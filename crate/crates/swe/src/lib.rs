//! High-order finite-difference solver for the shallow water equations with
//! non-flat bottom topography, on static and adaptive moving meshes.
//!
//! The equations are solved in the reformulated four-variable form
//! `U = (h, hv1, hv2, b)` (three-variable `(h, hv1, b)` in one dimension), in
//! which the bottom `b` is carried as an unknown with trivial flux. Spatial
//! discretisation combines two-point energy-conservative fluxes into central
//! schemes of order 2, 4 or 6; energy stability is obtained by adding
//! WENO-based dissipation switched by sign conditions on reconstructed jumps.
//! Mesh adaptation solves a monitor-weighted Winslow equation with Jacobi
//! sweeps, and the mesh motion enters the scheme through temporal metric
//! terms that satisfy discrete geometric conservation laws, so lake-at-rest
//! states are preserved to rounding even while the mesh moves.
//!
//! Layout:
//! - [`state`]: pointwise state algebra — fluxes, the modified energy pair,
//!   energy variables, entropy eigen-scaling, interface rotation.
//! - [`metrics`]: grids, mesh metrics, and the discrete conservation-law
//!   residuals that certify them.
//! - [`flux`]: two-point energy-conservative flux, source and energy-flux
//!   kernels.
//! - [`weno`]: WENO-Z midpoint interpolation, plain and pair-coupled.
//! - [`dissipation`]: interface dissipation operators and their sign gates.
//! - [`rhs_1d`], [`rhs_2d`]: semi-discrete right-hand sides (conservative and
//!   stabilised variants) with energy-flux diagnostics.
//! - [`mesh`]: monitor functions, smoothing, Jacobi redistribution, step
//!   limiting and mesh velocities.
//! - [`time`]: CFL time-step control and the coupled SSP-RK3 update.
//! - [`problems`], [`config`], [`driver`], [`output`]: the batch front end —
//!   problem registry, run configuration, simulation loop, CSV artifacts and
//!   convergence studies.
//!
//! Runnable demonstrations live in `examples/`; the `swe` binary drives batch
//! runs from TOML configs.

pub mod boundary;
pub mod config;
pub mod dissipation;
pub mod driver;
pub mod error;
pub mod flux;
pub mod mesh;
pub mod metrics;
pub mod output;
pub mod problems;
pub mod rhs_1d;
pub mod rhs_2d;
pub mod state;
pub mod time;
pub mod weno;

pub use error::SolverError;
pub use state::PhysicsParams;

/// Spatial flux family: strictly energy-conservative interface fluxes, or
/// the stabilised variant that subtracts switched WENO dissipation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    EnergyConservative,
    EnergyStable,
    /// Diagnostic variant of [`Scheme::EnergyStable`] that omits the
    /// mesh-transport dissipation and keeps only the characteristic part.
    /// Exists to demonstrate what the transport term prevents on moving
    /// meshes; not selectable from run configurations.
    EnergyStableNoTransport,
}

impl Scheme {
    /// Whether interface dissipation is subtracted at all.
    pub fn stabilised(self) -> bool {
        !matches!(self, Scheme::EnergyConservative)
    }

    /// Whether the mesh-transport dissipation acts.
    pub fn transport_dissipation(self) -> bool {
        matches!(self, Scheme::EnergyStable)
    }
}
