//! Memory observables: vorticity series at a probe momentum, flip detection,
//! oscillation periods and the inversion of the period law.
//!
//! The vortex probed here is that of the in-plane pseudospin texture
//! `(⟨σx⟩, ⟨σy⟩)` of the evolved state on a small loop around the probe. Its
//! rotation sense reverses every half period `π/|R′(probe)|`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::bloch::{ground_state, r_vector, KGrid, MassParameter, MomentumPoint};
use crate::error::{Error, Result};
use crate::quench::{default_t_max, propagate, QuenchProtocol, DEFAULT_DT, GAP_TOLERANCE};
use crate::topology::{loop_vorticity, WindingLoop, DEFAULT_VORTICITY_FLOOR};

pub use crate::quench::LoschmidtSeries;

/// Default probe-loop radius: one grid spacing, i.e. the 8 neighbours.
pub fn default_probe_radius(grid: KGrid) -> f64 {
    grid.spacing()
}

/// Vortex index at the probe over time.
#[derive(Debug, Clone, PartialEq)]
pub struct VorticitySeries {
    pub probe: MomentumPoint,
    pub dt: f64,
    pub times: Vec<f64>,
    pub indices: Vec<i8>,
    /// Poincaré index of the texture along the loop
    pub raw_windings: Vec<i32>,
    pub circulations: Vec<f64>,
}

impl VorticitySeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

pub fn vorticity_series(
    protocol: &QuenchProtocol,
    grid: KGrid,
    probe: MomentumPoint,
    radius: f64,
) -> Result<VorticitySeries> {
    let lp = WindingLoop::circle(grid, probe, radius)?;
    let nodes: Vec<(usize, usize)> = lp.nodes().collect();
    let mut initial = Vec::with_capacity(nodes.len());
    let mut fields = Vec::with_capacity(nodes.len());
    for &(ix, iy) in &nodes {
        let k = grid.point(ix, iy);
        let psi =
            ground_state(protocol.m_initial(), k, protocol.initial_gauge()).map_err(|_| {
                Error::AtTime {
                    t: 0.0,
                    source: Box::new(Error::SingularField {
                        ix,
                        iy,
                        overlap: 0.0,
                    }),
                }
            })?;
        initial.push(psi);
        fields.push(r_vector(protocol.m_quench(), k));
    }
    let times = protocol.times();
    let readings: Vec<_> = times
        .par_iter()
        .map(|&t| {
            let tau = protocol.elapsed(t);
            let vectors: Vec<[f64; 2]> = initial
                .iter()
                .zip(&fields)
                .map(|(psi, r)| {
                    let s = propagate(psi, r, tau).bloch_vector();
                    [s[0], s[1]]
                })
                .collect();
            loop_vorticity(&lp, &vectors, DEFAULT_VORTICITY_FLOOR)
        })
        .collect();
    Ok(VorticitySeries {
        probe: lp.center(),
        dt: protocol.dt(),
        times,
        indices: readings.iter().map(|r| r.index).collect(),
        raw_windings: readings.iter().map(|r| r.raw_winding).collect(),
        circulations: readings.iter().map(|r| r.circulation).collect(),
    })
}

/// Times at which the sign of a sampled quantity reverses.
///
/// Zero samples are skipped: a reversal is placed midway between the last
/// sample of the old sign and the first sample of the new one. Onsets from
/// zero are not reversals.
fn sign_reversals(times: &[f64], signs: impl Iterator<Item = i8>) -> Vec<f64> {
    let mut out = Vec::new();
    let mut last: Option<(i8, f64)> = None;
    for (&t, s) in times.iter().zip(signs) {
        if s == 0 {
            continue;
        }
        if let Some((prev, tp)) = last {
            if prev != s {
                out.push(0.5 * (tp + t));
            }
        }
        last = Some((s, t));
    }
    out
}

fn sign_of(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Vortex ↔ antivortex reversals in a series.
pub fn flip_times(series: &VorticitySeries) -> Vec<f64> {
    sign_reversals(&series.times, series.indices.iter().copied())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodEstimate {
    pub period: f64,
    /// Full oscillations spanned by the flips used.
    pub n_cycles_used: usize,
    pub n_flips: usize,
    pub uncertainty: f64,
}

/// Period from flip times: two flips per oscillation.
pub fn estimate_period(flips: &[f64], dt: f64) -> Result<PeriodEstimate> {
    if flips.len() < 3 {
        return Err(Error::InsufficientCycles { flips: flips.len() });
    }
    let gaps: Vec<f64> = flips.windows(2).map(|w| w[1] - w[0]).collect();
    let n = gaps.len() as f64;
    let mean = gaps.iter().sum::<f64>() / n;
    let var = gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / n;
    Ok(PeriodEstimate {
        period: 2.0 * mean,
        n_cycles_used: gaps.len() / 2,
        n_flips: flips.len(),
        uncertainty: (0.5 * dt).max(var.sqrt()),
    })
}

/// `2π/ΔE` with `ΔE = 2|R(m′, k)|`.
pub fn theoretical_period(m_quench: impl Into<MassParameter>, k: MomentumPoint) -> Result<f64> {
    let m = m_quench.into();
    let e = r_vector(m, k).norm();
    if e < GAP_TOLERANCE {
        return Err(Error::GapClosed { m: m.value(), k });
    }
    Ok(PI / e)
}

/// Parameters shared by every row of a period scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSettings {
    pub m_initial: MassParameter,
    pub grid: KGrid,
    pub probe: MomentumPoint,
    pub dt: f64,
    /// `None` picks [`default_t_max`] per row.
    pub t_max: Option<f64>,
    pub radius: f64,
}

impl ScanSettings {
    pub fn new(m_initial: impl Into<MassParameter>, grid: KGrid, probe: MomentumPoint) -> Self {
        Self {
            m_initial: m_initial.into(),
            grid,
            probe,
            dt: DEFAULT_DT,
            t_max: None,
            radius: default_probe_radius(grid),
        }
    }

    pub fn protocol(&self, m_quench: f64) -> Result<QuenchProtocol> {
        let t_max = match self.t_max {
            Some(t) => t,
            None => default_t_max(m_quench, self.probe)?,
        };
        QuenchProtocol::new(self.m_initial, m_quench, t_max, self.dt)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub m_quench: f64,
    pub measured: Result<PeriodEstimate>,
    pub theory: Result<f64>,
}

impl ScanRow {
    pub fn ratio(&self) -> Option<f64> {
        match (&self.measured, &self.theory) {
            (Ok(p), Ok(t)) => Some(p.period / t),
            _ => None,
        }
    }
}

pub fn measure_period(settings: &ScanSettings, m_quench: f64) -> Result<PeriodEstimate> {
    let protocol = settings.protocol(m_quench)?;
    let series = vorticity_series(&protocol, settings.grid, settings.probe, settings.radius)?;
    estimate_period(&flip_times(&series), series.dt)
}

/// One row per quench mass, sorted by mass; failures are kept per row.
pub fn scan_period_with(settings: &ScanSettings, m_values: &[f64]) -> Vec<ScanRow> {
    let mut rows: Vec<ScanRow> = m_values
        .par_iter()
        .map(|&m| ScanRow {
            m_quench: m,
            measured: measure_period(settings, m),
            theory: theoretical_period(m, settings.probe),
        })
        .collect();
    rows.sort_by(|a, b| a.m_quench.total_cmp(&b.m_quench));
    rows
}

pub fn scan_period_vs_mass(
    m_initial: impl Into<MassParameter>,
    m_values: &[f64],
    grid: KGrid,
    probe: MomentumPoint,
) -> Vec<ScanRow> {
    scan_period_with(&ScanSettings::new(m_initial, grid, probe), m_values)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Coincidence {
    /// `(flip time, nearest Loschmidt sign change)`
    pub matched_pairs: Vec<(f64, f64)>,
    pub max_offset: f64,
}

/// Sign changes of `Re L` and of `Im L`, merged and sorted.
pub fn loschmidt_sign_changes(l: &LoschmidtSeries) -> Vec<f64> {
    let mut out = sign_reversals(&l.times, l.values.iter().map(|v| sign_of(v.re)));
    out.extend(sign_reversals(
        &l.times,
        l.values.iter().map(|v| sign_of(v.im)),
    ));
    out.sort_by(f64::total_cmp);
    out
}

/// Pairs every vorticity flip with the nearest sign change of `Re L` or `Im L`.
pub fn coincidence_test(l: &LoschmidtSeries, v: &VorticitySeries) -> Result<Coincidence> {
    if l.times.len() != v.times.len()
        || l.times
            .iter()
            .zip(&v.times)
            .any(|(a, b)| (a - b).abs() > 1e-9)
    {
        return Err(Error::MismatchedSeries(format!(
            "Loschmidt series has {} samples, vorticity series {}; time grids differ",
            l.times.len(),
            v.times.len()
        )));
    }
    let window = 5.0 * v.dt;
    let changes = loschmidt_sign_changes(l);
    let mut out = Coincidence::default();
    for t in flip_times(v) {
        let nearest = changes
            .iter()
            .copied()
            .min_by(|a, b| (a - t).abs().total_cmp(&(b - t).abs()));
        match nearest {
            Some(s) if (s - t).abs() <= window => {
                out.max_offset = out.max_offset.max((s - t).abs());
                out.matched_pairs.push((t, s));
            }
            _ => return Err(Error::UnmatchedFlip { t, window }),
        }
    }
    Ok(out)
}

/// Which of the two masses sharing a period to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchHint {
    /// the larger candidate
    Above,
    /// the smaller candidate
    Below,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodedMass {
    pub m_quench: MassParameter,
    pub uncertainty: f64,
}

/// Gap-closing mass at a supported probe: −2 at (π,π), +2 at (0,0).
fn probe_offset(probe: MomentumPoint) -> Result<f64> {
    if probe.distance_to(&MomentumPoint::M) < 1e-9 {
        Ok(-2.0)
    } else if probe.distance_to(&MomentumPoint::GAMMA) < 1e-9 {
        Ok(2.0)
    } else {
        Err(Error::UnsupportedProbe(probe))
    }
}

/// The two masses `m₀ ∓ π/P` consistent with period `P`, plus their common
/// uncertainty `π σ_P / P²`.
fn candidates(period: &PeriodEstimate, probe: MomentumPoint) -> Result<([f64; 2], f64)> {
    let m0 = probe_offset(probe)?;
    let d = PI / period.period;
    let sigma = PI * period.uncertainty / period.period.powi(2);
    Ok(([m0 - d, m0 + d], sigma))
}

/// Inverts the period law at `probe`. The law is even in `m′ − m₀`, so a
/// branch hint is required; without one the candidates are returned in
/// [`Error::AmbiguousBranch`].
pub fn decode_from_period(
    period: &PeriodEstimate,
    probe: MomentumPoint,
    hint: Option<BranchHint>,
) -> Result<DecodedMass> {
    let ([lo, hi], sigma) = candidates(period, probe)?;
    let m = match hint {
        Some(BranchHint::Above) => hi,
        Some(BranchHint::Below) => lo,
        None => return Err(Error::AmbiguousBranch(lo, hi)),
    };
    Ok(DecodedMass {
        m_quench: MassParameter(m),
        uncertainty: sigma,
    })
}

pub fn decode_quench_mass(
    series: &VorticitySeries,
    probe: MomentumPoint,
    hint: Option<BranchHint>,
) -> Result<DecodedMass> {
    probe_offset(probe)?;
    let period = estimate_period(&flip_times(series), series.dt)?;
    decode_from_period(&period, probe, hint)
}

/// Resolves the branch from two probes: the pair of candidates that agree
/// best is combined by inverse-variance weighting.
pub fn decode_joint(
    a: (&PeriodEstimate, MomentumPoint),
    b: (&PeriodEstimate, MomentumPoint),
) -> Result<DecodedMass> {
    let (ca, sa) = candidates(a.0, a.1)?;
    let (cb, sb) = candidates(b.0, b.1)?;
    if probe_offset(a.1)? == probe_offset(b.1)? {
        return Err(Error::MismatchedSeries(
            "joint decoding needs one (π,π) and one (0,0) series".into(),
        ));
    }
    let (x, y) = ca
        .iter()
        .flat_map(|&x| cb.iter().map(move |&y| (x, y)))
        .min_by(|p, q| (p.0 - p.1).abs().total_cmp(&(q.0 - q.1).abs()))
        .expect("four candidate pairs");
    let (wa, wb) = (1.0 / (sa * sa), 1.0 / (sb * sb));
    Ok(DecodedMass {
        m_quench: MassParameter((wa * x + wb * y) / (wa + wb)),
        uncertainty: (1.0 / (wa + wb)).sqrt(),
    })
}

/// [`decode_joint`] on two vorticity series.
pub fn decode_joint_series(a: &VorticitySeries, b: &VorticitySeries) -> Result<DecodedMass> {
    let pa = estimate_period(&flip_times(a), a.dt)?;
    let pb = estimate_period(&flip_times(b), b.dt)?;
    decode_joint((&pa, a.probe), (&pb, b.probe))
}
