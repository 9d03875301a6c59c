use std::f64::consts::{PI, TAU};

use crate::bloch::{KGrid, MomentumPoint, Spinor};
use crate::error::{Error, Result};
use crate::field::{PlanarField, SpinorField};

/// A component below this modulus has no usable phase.
pub const PHASE_TOLERANCE: f64 = 1e-9;

/// Mean loop magnitude below which no vortex is reported.
pub const DEFAULT_VORTICITY_FLOOR: f64 = 1e-3;

/// Relative circulation `|Γ| / ∮|V||dk|` below which the rotation sense is
/// considered undetermined.
pub const ROTATION_TOLERANCE: f64 = 1e-6;

/// Reduces an angle to `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// Closed, counterclockwise chain of 8-neighbour grid nodes approximating a circle.
#[derive(Debug, Clone)]
pub struct WindingLoop {
    grid: KGrid,
    center: MomentumPoint,
    center_node: (usize, usize),
    radius: f64,
    /// integer offsets from the center node, closed (first = last)
    offsets: Vec<(i64, i64)>,
}

impl WindingLoop {
    /// Rasterises the circle of `radius` about the grid node `center`.
    ///
    /// The radius must be at least 0.75 grid spacings (so the loop never
    /// touches the center) and at most π/2.
    pub fn circle(grid: KGrid, center: MomentumPoint, radius: f64) -> Result<Self> {
        let center_node = grid
            .node_of(&center)
            .ok_or_else(|| Error::InvalidLoop(format!("center {center} is not a grid node")))?;
        let h = grid.spacing();
        if !radius.is_finite() || radius < 0.75 * h || radius > PI / 2.0 {
            return Err(Error::InvalidLoop(format!(
                "radius {radius} outside [{}, π/2] for n_side = {}",
                0.75 * h,
                grid.n_side()
            )));
        }
        let r = radius / h;
        let n = (16.0 * r).ceil() as usize + 16;
        let mut offsets: Vec<(i64, i64)> = Vec::with_capacity(n + 1);
        for s in 0..=n {
            let th = TAU * s as f64 / n as f64;
            let o = ((r * th.cos()).round() as i64, (r * th.sin()).round() as i64);
            if offsets.last() != Some(&o) {
                offsets.push(o);
            }
        }
        debug_assert_eq!(offsets.first(), offsets.last());
        debug_assert!(offsets
            .windows(2)
            .all(|w| (w[1].0 - w[0].0).abs() <= 1 && (w[1].1 - w[0].1).abs() <= 1));
        Ok(Self {
            grid,
            center: grid.point(center_node.0, center_node.1),
            center_node,
            radius,
            offsets,
        })
    }

    pub fn grid(&self) -> KGrid {
        self.grid
    }

    pub fn center(&self) -> MomentumPoint {
        self.center
    }

    pub fn center_node(&self) -> (usize, usize) {
        self.center_node
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Integer node offsets from the center, closed.
    pub fn offsets(&self) -> &[(i64, i64)] {
        &self.offsets
    }

    /// Number of distinct samples (the closing repeat excluded).
    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn node(&self, o: (i64, i64)) -> (usize, usize) {
        let (cx, cy) = self.center_node;
        (
            self.grid.wrap(cx as i64 + o.0),
            self.grid.wrap(cy as i64 + o.1),
        )
    }

    /// Grid nodes of the loop, closed (first = last).
    pub fn samples(&self) -> Vec<(usize, usize)> {
        self.offsets.iter().map(|&o| self.node(o)).collect()
    }

    /// Distinct grid nodes, without the closing repeat.
    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.offsets[..self.len()].iter().map(|&o| self.node(o))
    }

    /// Sample positions relative to the center, in units of k.
    pub fn positions(&self) -> Vec<[f64; 2]> {
        let h = self.grid.spacing();
        self.offsets
            .iter()
            .map(|&(a, b)| [a as f64 * h, b as f64 * h])
            .collect()
    }

    /// `(start node, (dx, dy))` for every step along the loop.
    pub(crate) fn steps(&self) -> impl Iterator<Item = ((usize, usize), (i64, i64))> + '_ {
        self.offsets
            .windows(2)
            .map(|w| (self.node(w[0]), (w[1].0 - w[0].0, w[1].1 - w[0].1)))
    }
}

/// Transition phase `ξ_BA` of a spinor: `arg c2 − arg c1` in `(−π, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionPhase {
    pub xi_ba: f64,
    pub defined: bool,
}

pub fn gauge_transition_phase(psi: &Spinor) -> TransitionPhase {
    if psi.c1.norm() < PHASE_TOLERANCE || psi.c2.norm() < PHASE_TOLERANCE {
        return TransitionPhase {
            xi_ba: 0.0,
            defined: false,
        };
    }
    TransitionPhase {
        xi_ba: wrap_angle(psi.c2.arg() - psi.c1.arg()),
        defined: true,
    }
}

fn phase_winding(angles: &[f64]) -> i32 {
    let total: f64 = angles
        .iter()
        .zip(angles.iter().cycle().skip(1))
        .map(|(a, b)| wrap_angle(b - a))
        .sum();
    (total / TAU).round() as i32
}

/// Winding of `ξ_BA` around the loop.
pub fn winding_number(field: &SpinorField, lp: &WindingLoop) -> Result<i32> {
    let mut phases = Vec::with_capacity(lp.len());
    for (ix, iy) in lp.nodes() {
        let phase = field
            .get(ix, iy)
            .map(gauge_transition_phase)
            .filter(|p| p.defined)
            .ok_or(Error::UndefinedPhaseOnLoop { ix, iy })?;
        phases.push(phase.xi_ba);
    }
    Ok(phase_winding(&phases))
}

/// Vortex diagnostics of a planar field on one loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VortexReading {
    /// +1 counterclockwise, −1 clockwise, 0 none
    pub index: i8,
    /// Poincaré index of the field direction along the loop
    pub raw_winding: i32,
    /// `∮ V · dk` (trapezoid rule)
    pub circulation: f64,
    pub mean_magnitude: f64,
}

impl VortexReading {
    pub const NONE: VortexReading = VortexReading {
        index: 0,
        raw_winding: 0,
        circulation: 0.0,
        mean_magnitude: 0.0,
    };
}

/// Classifies the vectors sampled on `lp.nodes()`.
///
/// A vortex needs a nonzero Poincaré index and a mean magnitude at or above
/// `floor`; its ℤ₂ index is the sense of rotation, i.e. the sign of the
/// circulation.
pub fn loop_vorticity(lp: &WindingLoop, vectors: &[[f64; 2]], floor: f64) -> VortexReading {
    assert_eq!(vectors.len(), lp.len(), "one vector per loop sample");
    let pos = lp.positions();
    let n = vectors.len();
    let mut circulation = 0.0;
    let mut scale = 0.0;
    let mut sum_mag = 0.0;
    let mut angles = Vec::with_capacity(n);
    for i in 0..n {
        let (v0, v1) = (vectors[i], vectors[(i + 1) % n]);
        let d = [pos[i + 1][0] - pos[i][0], pos[i + 1][1] - pos[i][1]];
        let dl = d[0].hypot(d[1]);
        let m0 = v0[0].hypot(v0[1]);
        let m1 = v1[0].hypot(v1[1]);
        circulation += 0.5 * ((v0[0] + v1[0]) * d[0] + (v0[1] + v1[1]) * d[1]);
        scale += 0.5 * (m0 + m1) * dl;
        sum_mag += m0;
        angles.push(v0[1].atan2(v0[0]));
    }
    let mean_magnitude = sum_mag / n as f64;
    let raw_winding = phase_winding(&angles);
    let index = if mean_magnitude < floor
        || raw_winding == 0
        || circulation.abs() <= ROTATION_TOLERANCE * scale
    {
        0
    } else if circulation > 0.0 {
        1
    } else {
        -1
    };
    VortexReading {
        index,
        raw_winding,
        circulation,
        mean_magnitude,
    }
}

/// [`loop_vorticity`] reading the vectors from a field.
pub fn vorticity_on_loop(
    field: &impl PlanarField,
    lp: &WindingLoop,
    floor: f64,
) -> Result<VortexReading> {
    let vectors = lp
        .nodes()
        .map(|(ix, iy)| {
            field.vector(ix, iy).ok_or(Error::SingularField {
                ix,
                iy,
                overlap: 0.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(loop_vorticity(lp, &vectors, floor))
}

/// ℤ₂ vortex index of a planar field about `center`.
pub fn vorticity_z2(
    field: &impl PlanarField,
    center: MomentumPoint,
    radius: f64,
    floor: f64,
) -> Result<VortexReading> {
    let lp = WindingLoop::circle(field.grid(), center, radius)?;
    vorticity_on_loop(field, &lp, floor)
}
