//! Exact post-quench evolution `e^{−itH(m′)}` of lower-band states.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bloch::{
    ground_state, ground_state_field_masked, r_vector, BlochVector, Gauge, KGrid, MassParameter,
    MomentumPoint, Spinor,
};
use crate::error::{Error, Result};
use crate::field::{PlanarField, SpinorField};
use crate::topology::{berry_connection, berry_connection_lenient, ConnectionField};

pub const DEFAULT_DT: f64 = 0.01;
/// Upper bound on the automatic `t_max`.
pub const MAX_DEFAULT_T_MAX: f64 = 1000.0;
/// Oscillation periods covered by the automatic `t_max`.
pub const DEFAULT_PERIODS: f64 = 10.0;
/// Below this `|R|` the gap is treated as closed.
pub const GAP_TOLERANCE: f64 = 1e-12;
const MAX_STEPS: usize = 100_000_000;

/// `sin(x)/x`, finite through 0.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Sudden quench `m_initial → m_quench` at `quench_time`, sampled on
/// `t = 0, dt, …, t_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuenchProtocol {
    m_initial: MassParameter,
    m_quench: MassParameter,
    t_max: f64,
    dt: f64,
    initial_gauge: Gauge,
    quench_time: f64,
}

impl QuenchProtocol {
    /// Protocol starting from the gauge-B ground state with the quench at `t = 0`.
    pub fn new(
        m_initial: impl Into<MassParameter>,
        m_quench: impl Into<MassParameter>,
        t_max: f64,
        dt: f64,
    ) -> Result<Self> {
        let m_initial = m_initial.into();
        let m_quench = m_quench.into();
        let bad = |msg: String| Err(Error::InvalidProtocol(msg));
        if !m_initial.value().is_finite() || !m_quench.value().is_finite() {
            return bad("masses must be finite".into());
        }
        if m_initial.is_critical() {
            return bad(format!(
                "initial mass {} is critical; the initial band is gapless",
                m_initial.value()
            ));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return bad(format!("dt must be positive, got {dt}"));
        }
        if !(t_max.is_finite() && t_max > 0.0) {
            return bad(format!("t_max must be positive, got {t_max}"));
        }
        if dt > t_max {
            return bad(format!("dt = {dt} exceeds t_max = {t_max}"));
        }
        if t_max / dt > MAX_STEPS as f64 {
            return bad(format!(
                "t_max/dt = {} exceeds {MAX_STEPS} steps",
                t_max / dt
            ));
        }
        Ok(Self {
            m_initial,
            m_quench,
            t_max,
            dt,
            initial_gauge: Gauge::B,
            quench_time: 0.0,
        })
    }

    pub fn with_initial_gauge(mut self, gauge: Gauge) -> Self {
        self.initial_gauge = gauge;
        self
    }

    /// Delays the quench: the state is stationary until `tau`.
    pub fn with_quench_time(mut self, tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(Error::InvalidProtocol(format!(
                "quench time must be >= 0, got {tau}"
            )));
        }
        self.quench_time = tau;
        Ok(self)
    }

    pub fn m_initial(&self) -> MassParameter {
        self.m_initial
    }

    pub fn m_quench(&self) -> MassParameter {
        self.m_quench
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn initial_gauge(&self) -> Gauge {
        self.initial_gauge
    }

    pub fn quench_time(&self) -> f64 {
        self.quench_time
    }

    pub fn n_steps(&self) -> usize {
        (self.t_max / self.dt + 1e-9).floor() as usize + 1
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_steps()).map(|i| self.time(i)).collect()
    }

    /// Time spent under the post-quench Hamiltonian at lab time `t`.
    pub fn elapsed(&self, t: f64) -> f64 {
        (t - self.quench_time).max(0.0)
    }
}

/// `t_max` covering [`DEFAULT_PERIODS`] periods `2π/ΔE` at `k`, capped at
/// [`MAX_DEFAULT_T_MAX`].
pub fn default_t_max(m_quench: impl Into<MassParameter>, k: MomentumPoint) -> Result<f64> {
    let m = m_quench.into();
    let e = r_vector(m, k).norm();
    if e < GAP_TOLERANCE {
        return Err(Error::GapClosed { m: m.value(), k });
    }
    Ok((DEFAULT_PERIODS * PI / e).min(MAX_DEFAULT_T_MAX))
}

/// `e^{−it R·σ}ψ = cos(|R|t)ψ − i sin(|R|t)/|R| (R·σ)ψ`.
pub fn propagate(psi: &Spinor, r: &BlochVector, t: f64) -> Spinor {
    let e = r.norm();
    let c = (e * t).cos();
    let s = Complex64::new(0.0, t * sinc(e * t));
    let [h1, h2] = r.apply(psi.components());
    Spinor {
        c1: c * psi.c1 - s * h1,
        c2: c * psi.c2 - s * h2,
        band: psi.band,
        gauge: Gauge::Evolved,
    }
}

pub fn evolve_spinor(
    psi0: &Spinor,
    m_quench: impl Into<MassParameter>,
    k: MomentumPoint,
    t: f64,
) -> Spinor {
    propagate(psi0, &r_vector(m_quench, k), t)
}

/// Grid-wide evolved state at one time.
#[derive(Debug, Clone)]
pub struct EvolvedState {
    pub time: f64,
    pub field: SpinorField,
}

/// Evolves the initial ground-state field to lab time `t`. Nodes where the
/// initial gauge is singular stay empty and are listed by
/// [`SpinorField::excluded_nodes`].
pub fn evolve_field(protocol: &QuenchProtocol, grid: KGrid, t: f64) -> EvolvedState {
    let initial = ground_state_field_masked(protocol.m_initial, grid, protocol.initial_gauge);
    let tau = protocol.elapsed(t);
    let m = protocol.m_quench;
    let spinors: Vec<Option<Spinor>> = initial
        .slots()
        .par_iter()
        .enumerate()
        .map(|(idx, s)| s.map(|s| propagate(&s, &r_vector(m, grid.point_at(idx)), tau)))
        .collect();
    let field = SpinorField::from_parts(grid, spinors, Gauge::Evolved, t, protocol.m_initial);
    EvolvedState { time: t, field }
}

/// `⟨ψ₀|e^{−itH(m′)}|ψ₀⟩` with `ψ₀` the lower-band state of `H(m)` in `gauge`.
pub fn loschmidt_pointwise(
    m: impl Into<MassParameter>,
    m_quench: impl Into<MassParameter>,
    k: MomentumPoint,
    t: f64,
    gauge: Gauge,
) -> Result<Complex64> {
    let psi0 = ground_state(m, k, gauge)?;
    Ok(psi0.inner(&evolve_spinor(&psi0, m_quench, k, t)))
}

/// `cos(|R′|t) + i sin(|R′|t) R̂·R̂′` for the lower band.
pub fn loschmidt_closed_form(
    m: impl Into<MassParameter>,
    m_quench: impl Into<MassParameter>,
    k: MomentumPoint,
    t: f64,
) -> Result<Complex64> {
    let m = m.into();
    let r = r_vector(m, k);
    let rn = r.norm();
    if rn < GAP_TOLERANCE {
        return Err(Error::GapClosed { m: m.value(), k });
    }
    let rq = r_vector(m_quench, k);
    let e = rq.norm();
    Ok(Complex64::new(
        (e * t).cos(),
        t * sinc(e * t) * r.dot(&rq) / rn,
    ))
}

/// Loschmidt amplitude sampled at one momentum.
#[derive(Debug, Clone, PartialEq)]
pub struct LoschmidtSeries {
    pub probe: MomentumPoint,
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl LoschmidtSeries {
    pub fn dt(&self) -> f64 {
        self.times.get(1).copied().unwrap_or(0.0) - self.times[0]
    }
}

pub fn loschmidt_series(protocol: &QuenchProtocol, k: MomentumPoint) -> Result<LoschmidtSeries> {
    let psi0 = ground_state(protocol.m_initial, k, protocol.initial_gauge)?;
    let r = r_vector(protocol.m_quench, k);
    let times = protocol.times();
    let values = times
        .iter()
        .map(|&t| psi0.inner(&propagate(&psi0, &r, protocol.elapsed(t))))
        .collect();
    Ok(LoschmidtSeries {
        probe: k,
        times,
        values,
    })
}

/// Berry connection of the evolved field at lab time `t`.
pub fn time_dependent_connection(
    protocol: &QuenchProtocol,
    grid: KGrid,
    t: f64,
) -> Result<ConnectionField> {
    berry_connection(&evolve_field(protocol, grid, t).field).map_err(|e| Error::AtTime {
        t,
        source: Box::new(e),
    })
}

/// As [`time_dependent_connection`], NaN on singular links.
pub fn time_dependent_connection_lenient(
    protocol: &QuenchProtocol,
    grid: KGrid,
    t: f64,
) -> ConnectionField {
    berry_connection_lenient(&evolve_field(protocol, grid, t).field)
}

/// Pseudospin `⟨σ⟩` per node. As a [`PlanarField`] it exposes `(⟨σx⟩, ⟨σy⟩)`.
#[derive(Debug, Clone)]
pub struct TextureField {
    grid: KGrid,
    spins: Vec<Option<[f64; 3]>>,
    time: f64,
}

impl TextureField {
    pub fn from_field(field: &SpinorField) -> Self {
        Self {
            grid: field.grid(),
            spins: field
                .slots()
                .iter()
                .map(|s| s.map(|s| s.bloch_vector()))
                .collect(),
            time: field.time(),
        }
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn spin(&self, ix: usize, iy: usize) -> Option<[f64; 3]> {
        self.spins[self.grid.index(ix, iy)]
    }
}

impl PlanarField for TextureField {
    fn grid(&self) -> KGrid {
        self.grid
    }

    fn vector(&self, ix: usize, iy: usize) -> Option<[f64; 2]> {
        self.spin(ix, iy).map(|s| [s[0], s[1]])
    }
}

pub fn pseudospin_texture(protocol: &QuenchProtocol, grid: KGrid, t: f64) -> TextureField {
    TextureField::from_field(&evolve_field(protocol, grid, t).field)
}
