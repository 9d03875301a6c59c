use num_complex::Complex64;
use rayon::prelude::*;

use crate::bloch::KGrid;
use crate::error::{Error, Result};
use crate::field::{PlanarField, SpinorField};
use crate::topology::WindingLoop;

/// Adjacent states whose overlap modulus falls below this are treated as
/// orthogonal: the grid does not resolve the texture there.
pub const MIN_LINK_OVERLAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    X,
    Y,
}

/// Overlap `⟨ψ(k)|ψ(k+δ)⟩` along one lattice link.
pub(crate) fn link_overlap(
    field: &SpinorField,
    ix: usize,
    iy: usize,
    dir: Direction,
) -> Result<Complex64> {
    let grid = field.grid();
    let (jx, jy) = match dir {
        Direction::X => (grid.wrap(ix as i64 + 1), iy),
        Direction::Y => (ix, grid.wrap(iy as i64 + 1)),
    };
    let singular = |overlap| Error::SingularField { ix, iy, overlap };
    let (Some(a), Some(b)) = (field.get(ix, iy), field.get(jx, jy)) else {
        return Err(singular(0.0));
    };
    let u = a.inner(b);
    if u.norm() < MIN_LINK_OVERLAP {
        return Err(singular(u.norm()));
    }
    Ok(u)
}

/// Berry connection `A = −i⟨ψ|∇ψ⟩` discretised on links:
/// `A_μ(k) = arg⟨ψ(k)|ψ(k+δ_μ)⟩ / Δk`.
#[derive(Debug, Clone)]
pub struct ConnectionField {
    grid: KGrid,
    ax: Vec<f64>,
    ay: Vec<f64>,
    time: f64,
}

impl ConnectionField {
    pub fn grid(&self) -> KGrid {
        self.grid
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn ax(&self, ix: usize, iy: usize) -> f64 {
        self.ax[self.grid.index(ix, iy)]
    }

    pub fn ay(&self, ix: usize, iy: usize) -> f64 {
        self.ay[self.grid.index(ix, iy)]
    }

    /// `∮ A · dk` along a loop, taking each diagonal step as an x-link then a y-link.
    ///
    /// The integer part of the result divided by `2π` is the vorticity of this
    /// gauge around the loop; the fractional part is the enclosed Berry flux.
    pub fn loop_integral(&self, lp: &WindingLoop) -> Result<f64> {
        let g = self.grid;
        let h = g.spacing();
        let mut total = 0.0;
        let take = |v: f64, ix: usize, iy: usize| -> Result<f64> {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::SingularField {
                    ix,
                    iy,
                    overlap: 0.0,
                })
            }
        };
        for w in lp.steps() {
            let ((i0, j0), (di, dj)) = w;
            let i1 = g.wrap(i0 as i64 + di);
            match di {
                1 => total += take(self.ax(i0, j0), i0, j0)? * h,
                -1 => total -= take(self.ax(i1, j0), i1, j0)? * h,
                _ => {}
            }
            match dj {
                1 => total += take(self.ay(i1, j0), i1, j0)? * h,
                -1 => {
                    let j1 = g.wrap(j0 as i64 - 1);
                    total -= take(self.ay(i1, j1), i1, j1)? * h
                }
                _ => {}
            }
        }
        Ok(total)
    }
}

impl PlanarField for ConnectionField {
    fn grid(&self) -> KGrid {
        self.grid
    }

    fn vector(&self, ix: usize, iy: usize) -> Option<[f64; 2]> {
        let v = [self.ax(ix, iy), self.ay(ix, iy)];
        (v[0].is_finite() && v[1].is_finite()).then_some(v)
    }
}

fn connection_components(field: &SpinorField) -> Vec<(Result<f64>, Result<f64>)> {
    let grid = field.grid();
    let h = grid.spacing();
    (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (ix, iy) = grid.coords(idx);
            let ax = link_overlap(field, ix, iy, Direction::X).map(|u| u.arg() / h);
            let ay = link_overlap(field, ix, iy, Direction::Y).map(|u| u.arg() / h);
            (ax, ay)
        })
        .collect()
}

/// Link-phase Berry connection of a spinor field with periodic wraparound.
///
/// Fails with [`Error::SingularField`] on the first link touching an empty
/// node or with overlap modulus below [`MIN_LINK_OVERLAP`].
pub fn berry_connection(field: &SpinorField) -> Result<ConnectionField> {
    let parts = connection_components(field);
    let mut ax = Vec::with_capacity(parts.len());
    let mut ay = Vec::with_capacity(parts.len());
    for (x, y) in parts {
        ax.push(x?);
        ay.push(y?);
    }
    Ok(ConnectionField {
        grid: field.grid(),
        ax,
        ay,
        time: field.time(),
    })
}

/// Like [`berry_connection`] but stores NaN on singular links instead of failing.
pub fn berry_connection_lenient(field: &SpinorField) -> ConnectionField {
    let (ax, ay) = connection_components(field)
        .into_iter()
        .map(|(x, y)| (x.unwrap_or(f64::NAN), y.unwrap_or(f64::NAN)))
        .unzip();
    ConnectionField {
        grid: field.grid(),
        ax,
        ay,
        time: field.time(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::{ground_state_field_masked, Band, Gauge, MomentumPoint, Spinor};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn constant_field_has_zero_connection() {
        let grid = KGrid::new(12).unwrap();
        let f = SpinorField::from_fn(grid, Gauge::B, |_, _| {
            Spinor::normalized(0.0.into(), 1.0.into(), Band::Lower, Gauge::B)
        });
        let a = berry_connection(&f).unwrap();
        for i in 0..grid.n_side() {
            for j in 0..grid.n_side() {
                assert_eq!(a.ax(i, j), 0.0);
                assert_eq!(a.ay(i, j), 0.0);
            }
        }
    }

    #[test]
    fn pure_phase_gradient() {
        let grid = KGrid::new(16).unwrap();
        let f = SpinorField::from_fn(grid, Gauge::B, |ix, iy| {
            let k = grid.point(ix, iy);
            Spinor::normalized(
                0.0.into(),
                Complex64::from_polar(1.0, k.kx()),
                Band::Lower,
                Gauge::B,
            )
        });
        let a = berry_connection(&f).unwrap();
        let h = grid.spacing();
        for i in 0..grid.n_side() {
            for j in 0..grid.n_side() {
                assert_abs_diff_eq!(a.ax(i, j), 1.0, epsilon = h * h);
                assert_abs_diff_eq!(a.ay(i, j), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn gauge_b_berry_phase_around_gamma_for_m1() {
        let grid = KGrid::new(100).unwrap();
        let f = ground_state_field_masked(1.0, grid, Gauge::B);
        assert!(berry_connection(&f).is_err());
        let a = berry_connection_lenient(&f);
        let lp = WindingLoop::circle(grid, MomentumPoint::GAMMA, 0.3).unwrap();
        let phase = a.loop_integral(&lp).unwrap();
        assert!(
            (phase + TAU).abs() < 0.05 * TAU,
            "∮A = {phase}, expected ≈ −2π"
        );
        // around (π,π) the gauge-B connection is smooth: no integer vorticity
        let lp = WindingLoop::circle(grid, MomentumPoint::M, 0.3).unwrap();
        assert!(a.loop_integral(&lp).unwrap().abs() < PI);
    }

    #[test]
    fn excluded_node_is_singular() {
        let grid = KGrid::new(8).unwrap();
        let f = ground_state_field_masked(1.0, grid, Gauge::B);
        match berry_connection(&f) {
            Err(Error::SingularField { overlap, .. }) => assert_eq!(overlap, 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn orthogonal_neighbours_are_singular() {
        let grid = KGrid::new(4).unwrap();
        let f = SpinorField::from_fn(grid, Gauge::B, |ix, _| {
            let (a, b) = if ix % 2 == 0 { (1.0, 0.0) } else { (0.0, 1.0) };
            Spinor::normalized(a.into(), b.into(), Band::Lower, Gauge::B)
        });
        assert!(matches!(
            berry_connection(&f),
            Err(Error::SingularField { .. })
        ));
    }
}
