//! Simulation library for the two-band quantum anomalous Hall model
//! `H = sin kx σx + sin ky σy + (m − cos kx − cos ky) σz`.
//!
//! The crate covers
//! - the spectrum and the two gauge-fixed lower-band eigenstates ([`bloch`]),
//! - Berry connections, gauge patches, windings and Chern numbers computed by
//!   a patch (vorticity) route and by lattice plaquettes ([`topology`]),
//! - exact post-quench evolution and Loschmidt amplitudes ([`quench`]),
//! - the vortex/antivortex memory observables: vorticity series, flip
//!   detection, period estimation and quench-mass readout ([`memory`]),
//! - the `qwzmem` command-line pipelines ([`cli`]).

pub mod bloch;
pub mod cli;
pub mod error;
pub mod field;
pub mod memory;
pub mod quench;
pub mod topology;

pub use bloch::{
    band_energies, ground_state, ground_state_field, ground_state_field_masked,
    ground_state_gauge_a, ground_state_gauge_b, r_vector, Band, BlochVector, Gauge, KGrid,
    MassParameter, MomentumPoint, Spinor,
};
pub use error::{Error, Result};
pub use field::{PlanarField, SpinorField, VectorField};
