//! Momentum grid and the spectral data of the two-band Hamiltonian
//! `H(k) = R(m, k) · σ` with `R = (sin kx, sin ky, m − cos kx − cos ky)`.
//!
//! Lower-band eigenstates come in two gauges. Gauge A is built from
//! `(R_z − |R|, R_x + iR_y)` and fails where `R_x = R_y = 0, R_z ≥ 0`;
//! gauge B is built from `(−R_x + iR_y, R_z + |R|)` and fails where
//! `R_x = R_y = 0, R_z ≤ 0`. Gauge A is phase-fixed so its first component
//! is real and positive, gauge B so its second component is real and
//! non-negative.

use std::f64::consts::{PI, TAU};
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result, SingularNode};
use crate::field::SpinorField;

/// `rx² + ry²` below this (with the forbidden sign of `rz`) marks a gauge as ill-defined.
pub const SINGULARITY_TOLERANCE: f64 = 1e-18;

/// Distance from `m ∈ {0, ±2}` within which a mass is treated as critical.
pub const CRITICAL_MASS_TOLERANCE: f64 = 1e-9;

/// A crystal momentum on the Brillouin-zone torus.
///
/// Stored as signed angles in `(−π, π]` so that `k` and `−k` are exact
/// negatives of each other; [`kx`](Self::kx) and [`ky`](Self::ky) report the
/// `[0, 2π)` representative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumPoint {
    sx: f64,
    sy: f64,
}

fn signed_angle(k: f64) -> f64 {
    let r = (k + PI).rem_euclid(TAU) - PI;
    if r <= -PI {
        PI
    } else {
        r
    }
}

fn unsigned_angle(s: f64) -> f64 {
    if s >= 0.0 {
        return s;
    }
    let r = s + TAU;
    // tiny negatives round up to exactly TAU
    if r >= TAU {
        0.0
    } else {
        r
    }
}

impl MomentumPoint {
    pub fn new(kx: f64, ky: f64) -> Self {
        Self {
            sx: signed_angle(kx),
            sy: signed_angle(ky),
        }
    }

    pub const GAMMA: MomentumPoint = MomentumPoint { sx: 0.0, sy: 0.0 };
    pub const X: MomentumPoint = MomentumPoint { sx: PI, sy: 0.0 };
    pub const Y: MomentumPoint = MomentumPoint { sx: 0.0, sy: PI };
    pub const M: MomentumPoint = MomentumPoint { sx: PI, sy: PI };

    /// The four time-reversal-invariant momenta `(0,0), (π,0), (0,π), (π,π)`.
    pub const HIGH_SYMMETRY: [MomentumPoint; 4] = [Self::GAMMA, Self::X, Self::Y, Self::M];

    /// `kx` in `[0, 2π)`.
    pub fn kx(&self) -> f64 {
        unsigned_angle(self.sx)
    }

    /// `ky` in `[0, 2π)`.
    pub fn ky(&self) -> f64 {
        unsigned_angle(self.sy)
    }

    pub(crate) fn signed(&self) -> (f64, f64) {
        (self.sx, self.sy)
    }

    /// The point `(−kx, −ky)`, i.e. `(2π − kx, 2π − ky)` reduced.
    pub fn reflected(&self) -> Self {
        Self::new(-self.sx, -self.sy)
    }

    /// Shortest signed displacement from `self` to `other` on the torus.
    pub fn displacement_to(&self, other: &MomentumPoint) -> (f64, f64) {
        (
            signed_angle(other.sx - self.sx),
            signed_angle(other.sy - self.sy),
        )
    }

    pub fn distance_to(&self, other: &MomentumPoint) -> f64 {
        let (dx, dy) = self.displacement_to(other);
        dx.hypot(dy)
    }
}

impl fmt::Display for MomentumPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.6}, {:.6})", self.kx(), self.ky())
    }
}

/// Periodic `n_side × n_side` discretisation of the Brillouin zone torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KGrid {
    n_side: usize,
}

impl KGrid {
    pub const DEFAULT_N_SIDE: usize = 100;

    /// `n_side` must be even and at least 4 so that `(π, π)` is a node.
    pub fn new(n_side: usize) -> Result<Self> {
        if n_side < 4 || !n_side.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "n_side must be even and >= 4, got {n_side}"
            )));
        }
        Ok(Self { n_side })
    }

    pub fn n_side(&self) -> usize {
        self.n_side
    }

    pub fn spacing(&self) -> f64 {
        TAU / self.n_side as f64
    }

    pub fn len(&self) -> usize {
        self.n_side * self.n_side
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Row-major flat index, `ix` slowest.
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        ix * self.n_side + iy
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx / self.n_side, idx % self.n_side)
    }

    /// Periodic wrap of a possibly out-of-range node index.
    pub fn wrap(&self, i: i64) -> usize {
        i.rem_euclid(self.n_side as i64) as usize
    }

    pub fn point(&self, ix: usize, iy: usize) -> MomentumPoint {
        let n = self.n_side as i64;
        // signed node index in (−n/2, n/2] keeps mirrored nodes exact negatives
        let angle = |i: usize| {
            let i = i as i64 % n;
            let s = if i > n / 2 { i - n } else { i };
            PI * (2 * s) as f64 / n as f64
        };
        MomentumPoint {
            sx: angle(ix),
            sy: angle(iy),
        }
    }

    pub fn point_at(&self, idx: usize) -> MomentumPoint {
        let (ix, iy) = self.coords(idx);
        self.point(ix, iy)
    }

    /// The node `k` sits on, if it is within `1e-9` rad of one.
    pub fn node_of(&self, k: &MomentumPoint) -> Option<(usize, usize)> {
        let h = self.spacing();
        let ix = (k.kx() / h).round() as i64;
        let iy = (k.ky() / h).round() as i64;
        let (ix, iy) = (self.wrap(ix), self.wrap(iy));
        (self.point(ix, iy).distance_to(k) < 1e-9).then_some((ix, iy))
    }

    pub fn points(&self) -> impl Iterator<Item = MomentumPoint> + '_ {
        (0..self.len()).map(move |i| self.point_at(i))
    }
}

impl Default for KGrid {
    fn default() -> Self {
        Self {
            n_side: Self::DEFAULT_N_SIDE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub rx: f64,
    pub ry: f64,
    pub rz: f64,
}

impl BlochVector {
    pub fn norm(&self) -> f64 {
        (self.rx * self.rx + self.ry * self.ry + self.rz * self.rz).sqrt()
    }

    pub fn in_plane_sqr(&self) -> f64 {
        self.rx * self.rx + self.ry * self.ry
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.rx * other.rx + self.ry * other.ry + self.rz * other.rz
    }

    /// `(R·σ) ψ` for a two-component state.
    pub fn apply(&self, c: [Complex64; 2]) -> [Complex64; 2] {
        let off_lo = Complex64::new(self.rx, self.ry);
        let off_hi = off_lo.conj();
        [
            c[0] * self.rz + off_hi * c[1],
            off_lo * c[0] - c[1] * self.rz,
        ]
    }
}

impl fmt::Display for BlochVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.6}, {:.6}, {:.6})", self.rx, self.ry, self.rz)
    }
}

/// The flux-controlled mass `m` (or `m'` after a quench).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct MassParameter(pub f64);

impl MassParameter {
    pub fn value(&self) -> f64 {
        self.0
    }

    /// True at the gap-closing masses `m = 0, ±2`.
    pub fn is_critical(&self) -> bool {
        [0.0, 2.0, -2.0]
            .iter()
            .any(|c| (self.0 - c).abs() <= CRITICAL_MASS_TOLERANCE)
    }
}

impl From<f64> for MassParameter {
    fn from(m: f64) -> Self {
        MassParameter(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Band {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gauge {
    A,
    B,
    /// Gauge B wherever it is defined, gauge A on the remaining nodes.
    Patched,
    Evolved,
}

impl fmt::Display for Gauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Gauge::A => "A",
            Gauge::B => "B",
            Gauge::Patched => "patched",
            Gauge::Evolved => "evolved",
        };
        f.write_str(s)
    }
}

/// A normalised two-component Bloch state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spinor {
    pub c1: Complex64,
    pub c2: Complex64,
    pub band: Band,
    pub gauge: Gauge,
}

impl Spinor {
    /// Normalises `(c1, c2)`; `None` for a zero vector.
    pub fn normalized(c1: Complex64, c2: Complex64, band: Band, gauge: Gauge) -> Option<Self> {
        let n = (c1.norm_sqr() + c2.norm_sqr()).sqrt();
        (n > 0.0 && n.is_finite()).then(|| Self {
            c1: c1 / n,
            c2: c2 / n,
            band,
            gauge,
        })
    }

    pub fn components(&self) -> [Complex64; 2] {
        [self.c1, self.c2]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c1.norm_sqr() + self.c2.norm_sqr()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Spinor) -> Complex64 {
        self.c1.conj() * other.c1 + self.c2.conj() * other.c2
    }

    /// `e^{iφ}|self⟩`.
    pub fn with_phase(&self, phi: f64) -> Spinor {
        let p = Complex64::from_polar(1.0, phi);
        Spinor {
            c1: self.c1 * p,
            c2: self.c2 * p,
            ..*self
        }
    }

    /// Pseudospin expectation `(⟨σx⟩, ⟨σy⟩, ⟨σz⟩)`.
    pub fn bloch_vector(&self) -> [f64; 3] {
        let z = self.c1.conj() * self.c2;
        [
            2.0 * z.re,
            2.0 * z.im,
            self.c1.norm_sqr() - self.c2.norm_sqr(),
        ]
    }
}

/// `R(m, k) = (sin kx, sin ky, m − cos kx − cos ky)`.
pub fn r_vector(m: impl Into<MassParameter>, k: MomentumPoint) -> BlochVector {
    let m = m.into().value();
    let (kx, ky) = k.signed();
    let (sx, cx) = kx.sin_cos();
    let (sy, cy) = ky.sin_cos();
    BlochVector {
        rx: sx,
        ry: sy,
        rz: m - cx - cy,
    }
}

/// `(−|R|, +|R|)`.
pub fn band_energies(m: impl Into<MassParameter>, k: MomentumPoint) -> (f64, f64) {
    let e = r_vector(m, k).norm();
    (-e, e)
}

/// Where gauge A is ill-defined: `R_x = R_y = 0` and `R_z ≥ 0`.
pub fn gauge_a_singular(r: &BlochVector) -> bool {
    r.in_plane_sqr() < SINGULARITY_TOLERANCE && r.rz >= 0.0
}

/// Where gauge B is ill-defined: `R_x = R_y = 0` and `R_z ≤ 0`.
pub fn gauge_b_singular(r: &BlochVector) -> bool {
    r.in_plane_sqr() < SINGULARITY_TOLERANCE && r.rz <= 0.0
}

fn singular_at(gauge: Gauge, k: MomentumPoint, r: BlochVector) -> Error {
    Error::GaugeSingularity {
        gauge,
        nodes: vec![SingularNode { ix: 0, iy: 0, k, r }],
    }
}

/// Lower-band state from `R` in gauge A, or `None` where the gauge fails.
pub(crate) fn lower_state_a(r: &BlochVector) -> Option<Spinor> {
    if gauge_a_singular(r) {
        return None;
    }
    let norm = r.norm();
    let perp = r.in_plane_sqr();
    // |R| − R_z without cancellation when R_z > 0
    let gap = if r.rz > 0.0 {
        perp / (norm + r.rz)
    } else {
        norm - r.rz
    };
    Spinor::normalized(
        Complex64::new(gap, 0.0),
        -Complex64::new(r.rx, r.ry),
        Band::Lower,
        Gauge::A,
    )
}

/// Lower-band state from `R` in gauge B, or `None` where the gauge fails.
pub(crate) fn lower_state_b(r: &BlochVector) -> Option<Spinor> {
    if gauge_b_singular(r) {
        return None;
    }
    let norm = r.norm();
    let perp = r.in_plane_sqr();
    // R_z + |R| without cancellation when R_z < 0
    let sum = if r.rz < 0.0 {
        perp / (norm - r.rz)
    } else {
        norm + r.rz
    };
    Spinor::normalized(
        Complex64::new(-r.rx, r.ry),
        Complex64::new(sum, 0.0),
        Band::Lower,
        Gauge::B,
    )
}

pub(crate) fn lower_state(r: &BlochVector, gauge: Gauge) -> Option<Spinor> {
    match gauge {
        Gauge::A => lower_state_a(r),
        Gauge::B => lower_state_b(r),
        Gauge::Patched | Gauge::Evolved => {
            lower_state_b(r)
                .or_else(|| lower_state_a(r))
                .map(|s| Spinor {
                    gauge: Gauge::Patched,
                    ..s
                })
        }
    }
}

pub fn ground_state_gauge_a(m: impl Into<MassParameter>, k: MomentumPoint) -> Result<Spinor> {
    let r = r_vector(m, k);
    lower_state_a(&r).ok_or_else(|| singular_at(Gauge::A, k, r))
}

pub fn ground_state_gauge_b(m: impl Into<MassParameter>, k: MomentumPoint) -> Result<Spinor> {
    let r = r_vector(m, k);
    lower_state_b(&r).ok_or_else(|| singular_at(Gauge::B, k, r))
}

/// Lower-band state in the requested gauge; `Patched` falls back from B to A.
pub fn ground_state(m: impl Into<MassParameter>, k: MomentumPoint, gauge: Gauge) -> Result<Spinor> {
    let r = r_vector(m, k);
    lower_state(&r, gauge).ok_or_else(|| singular_at(gauge, k, r))
}

/// Lower-band state on every node. Fails listing every node where `gauge`
/// is ill-defined.
pub fn ground_state_field(
    m: impl Into<MassParameter>,
    grid: KGrid,
    gauge: Gauge,
) -> Result<SpinorField> {
    let field = ground_state_field_masked(m, grid, gauge);
    let nodes: Vec<SingularNode> = field.excluded_nodes().collect();
    if nodes.is_empty() {
        Ok(field)
    } else {
        Err(Error::GaugeSingularity { gauge, nodes })
    }
}

/// Like [`ground_state_field`] but leaves singular nodes empty instead of failing.
pub fn ground_state_field_masked(
    m: impl Into<MassParameter>,
    grid: KGrid,
    gauge: Gauge,
) -> SpinorField {
    let m = m.into();
    let spinors: Vec<Option<Spinor>> = (0..grid.len())
        .into_par_iter()
        .map(|idx| lower_state(&r_vector(m, grid.point_at(idx)), gauge))
        .collect();
    SpinorField::from_parts(grid, spinors, gauge, 0.0, m)
}
