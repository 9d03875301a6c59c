//! Berry connection, gauge patches, windings, vortex indices and Chern numbers.
//!
//! Sign convention: loops run counterclockwise in the `(kx, ky)` plane, and
//! the Chern number is the total vorticity of the outer-patch connection,
//! equal to minus the lower-band Berry flux over 2π. With it `0 < m < 2`
//! gives `C = −1` (an antivortex at Γ).

mod chern;
mod connection;
mod winding;

pub use chern::{
    berry_phase_vorticity, chern_fhs, chern_patchwise, chern_patchwise_with_radius,
    hall_conductance, plaquette_flux, Disk, PatchDecomposition, DEFAULT_DISK_RADIUS, DISK_RADII,
    MIN_PLAQUETTE_MODULUS,
};
pub use connection::{
    berry_connection, berry_connection_lenient, ConnectionField, Direction, MIN_LINK_OVERLAP,
};
pub use winding::{
    gauge_transition_phase, loop_vorticity, vorticity_on_loop, vorticity_z2, winding_number,
    wrap_angle, TransitionPhase, VortexReading, WindingLoop, DEFAULT_VORTICITY_FLOOR,
    PHASE_TOLERANCE, ROTATION_TOLERANCE,
};
