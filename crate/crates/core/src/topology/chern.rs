use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::bloch::{
    gauge_a_singular, gauge_b_singular, ground_state_field_masked, r_vector, Gauge, KGrid,
    MassParameter, MomentumPoint,
};
use crate::error::{Error, Result};
use crate::field::SpinorField;
use crate::topology::connection::{link_overlap, Direction};
use crate::topology::{winding_number, ConnectionField, WindingLoop};

pub const DEFAULT_DISK_RADIUS: f64 = 0.3;
/// Radii tried, in order, when a loop hits an undefined transition phase.
pub const DISK_RADII: [f64; 3] = [DEFAULT_DISK_RADIUS, 0.2, 0.45];
/// Wilson-loop products below this modulus are unresolved.
pub const MIN_PLAQUETTE_MODULUS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub center: MomentumPoint,
    pub radius: f64,
}

/// Outer gauge on the Brillouin zone minus small disks around its singular
/// nodes; the inner gauge covers the disks.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchDecomposition {
    pub disks: Vec<Disk>,
    pub outer_gauge: Gauge,
    pub inner_gauge: Gauge,
}

impl PatchDecomposition {
    /// Picks the gauge with fewer singular nodes as the outer one (B on ties)
    /// and places a disk of `radius` on each of its singular nodes.
    pub fn for_ground_state(m: impl Into<MassParameter>, grid: KGrid, radius: f64) -> Result<Self> {
        let m = m.into();
        if m.is_critical() {
            return Err(Error::CriticalMass { m: m.value() });
        }
        let mut sing_a = Vec::new();
        let mut sing_b = Vec::new();
        for k in grid.points() {
            let r = r_vector(m, k);
            if gauge_a_singular(&r) {
                sing_a.push(k);
            }
            if gauge_b_singular(&r) {
                sing_b.push(k);
            }
        }
        let (outer_gauge, inner_gauge, centers) = if sing_a.len() < sing_b.len() {
            (Gauge::A, Gauge::B, sing_a)
        } else {
            (Gauge::B, Gauge::A, sing_b)
        };
        for (i, a) in centers.iter().enumerate() {
            for b in &centers[i + 1..] {
                if a.distance_to(b) <= 2.0 * radius {
                    return Err(Error::InvalidLoop(format!(
                        "disks of radius {radius} about {a} and {b} overlap"
                    )));
                }
            }
        }
        Ok(Self {
            disks: centers
                .into_iter()
                .map(|center| Disk { center, radius })
                .collect(),
            outer_gauge,
            inner_gauge,
        })
    }

    /// Chern number from the transition-phase windings on the disk boundaries.
    ///
    /// Counted as the total winding of the outer-gauge connection: with B
    /// outside, `C = −Σ wind ξ_BA`; with A outside, `C = +Σ wind ξ_BA`.
    pub fn chern(&self, field: &SpinorField) -> Result<i32> {
        let mut total = 0;
        for d in &self.disks {
            let lp = WindingLoop::circle(field.grid(), d.center, d.radius)?;
            total += winding_number(field, &lp)?;
        }
        Ok(match self.outer_gauge {
            Gauge::A => total,
            _ => -total,
        })
    }
}

pub fn chern_patchwise_with_radius(
    m: impl Into<MassParameter>,
    grid: KGrid,
    radius: f64,
) -> Result<i32> {
    let m = m.into();
    let patches = PatchDecomposition::for_ground_state(m, grid, radius)?;
    let field = ground_state_field_masked(m, grid, Gauge::Patched);
    patches.chern(&field)
}

/// Chern number of the lower band from the vorticity of the gauge patches,
/// retrying the disk radius over [`DISK_RADII`] if a loop is unusable.
pub fn chern_patchwise(m: impl Into<MassParameter>, grid: KGrid) -> Result<i32> {
    let m = m.into();
    let mut last = None;
    for r in DISK_RADII {
        match chern_patchwise_with_radius(m, grid, r) {
            Err(e @ (Error::UndefinedPhaseOnLoop { .. } | Error::InvalidLoop(_))) => last = Some(e),
            other => return other,
        }
    }
    Err(last.expect("at least one radius tried"))
}

/// Berry flux through every plaquette `[k, k+δx] × [k, k+δy]` (counterclockwise
/// Wilson loop phase), indexed like the grid nodes.
pub fn plaquette_flux(field: &SpinorField) -> Result<Vec<f64>> {
    let grid = field.grid();
    (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (ix, iy) = grid.coords(idx);
            let jx = grid.wrap(ix as i64 + 1);
            let jy = grid.wrap(iy as i64 + 1);
            let plaquette = |_| Error::SingularPlaquette {
                ix,
                iy,
                modulus: 0.0,
            };
            let u1 = link_overlap(field, ix, iy, Direction::X).map_err(plaquette)?;
            let u2 = link_overlap(field, jx, iy, Direction::Y).map_err(plaquette)?;
            let u3 = link_overlap(field, ix, jy, Direction::X).map_err(plaquette)?;
            let u4 = link_overlap(field, ix, iy, Direction::Y).map_err(plaquette)?;
            let w = u1 * u2 * u3.conj() * u4.conj();
            if w.norm() < MIN_PLAQUETTE_MODULUS {
                return Err(Error::SingularPlaquette {
                    ix,
                    iy,
                    modulus: w.norm(),
                });
            }
            Ok(w.arg())
        })
        .collect()
}

/// Lattice (plaquette) Chern number, in the same sign convention as
/// [`chern_patchwise`]: minus the total Berry flux over 2π.
pub fn chern_fhs(field: &SpinorField) -> Result<i32> {
    let total: f64 = plaquette_flux(field)?.iter().sum();
    Ok(-(total / TAU).round() as i32)
}

/// Hall conductance in units of e²/h.
pub fn hall_conductance(c: i32) -> f64 {
    f64::from(-c)
}

/// Integer vorticity of a gauge's connection about a loop: `∮A·dk / 2π`, rounded.
pub fn berry_phase_vorticity(conn: &ConnectionField, lp: &WindingLoop) -> Result<i32> {
    Ok((conn.loop_integral(lp)? / TAU).round() as i32)
}
