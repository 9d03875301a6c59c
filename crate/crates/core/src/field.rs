//! Grid-valued fields: spinor fields and planar vector fields.

use crate::bloch::{r_vector, Gauge, KGrid, MassParameter, Spinor};
use crate::error::SingularNode;

/// One lower-band spinor per grid node. Nodes where the source gauge is
/// ill-defined are left empty and reported by [`excluded_nodes`](Self::excluded_nodes).
#[derive(Debug, Clone)]
pub struct SpinorField {
    grid: KGrid,
    spinors: Vec<Option<Spinor>>,
    gauge: Gauge,
    time: f64,
    mass: MassParameter,
}

impl SpinorField {
    pub(crate) fn from_parts(
        grid: KGrid,
        spinors: Vec<Option<Spinor>>,
        gauge: Gauge,
        time: f64,
        mass: MassParameter,
    ) -> Self {
        debug_assert_eq!(spinors.len(), grid.len());
        Self {
            grid,
            spinors,
            gauge,
            time,
            mass,
        }
    }

    /// Builds a field from a closure over the grid, e.g. for synthetic textures.
    pub fn from_fn(
        grid: KGrid,
        gauge: Gauge,
        mut f: impl FnMut(usize, usize) -> Option<Spinor>,
    ) -> Self {
        let spinors = (0..grid.len())
            .map(|i| {
                let (ix, iy) = grid.coords(i);
                f(ix, iy)
            })
            .collect();
        Self::from_parts(grid, spinors, gauge, 0.0, MassParameter(f64::NAN))
    }

    pub fn grid(&self) -> KGrid {
        self.grid
    }

    pub fn gauge(&self) -> Gauge {
        self.gauge
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Mass of the Hamiltonian whose ground state seeded this field
    /// (NaN for synthetic fields).
    pub fn mass(&self) -> MassParameter {
        self.mass
    }

    pub fn len(&self) -> usize {
        self.spinors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spinors.is_empty()
    }

    pub fn get(&self, ix: usize, iy: usize) -> Option<&Spinor> {
        self.spinors[self.grid.index(ix, iy)].as_ref()
    }

    pub fn get_index(&self, idx: usize) -> Option<&Spinor> {
        self.spinors[idx].as_ref()
    }

    /// Defined spinors in grid order.
    pub fn spinors(&self) -> impl Iterator<Item = &Spinor> {
        self.spinors.iter().flatten()
    }

    pub fn slots(&self) -> &[Option<Spinor>] {
        &self.spinors
    }

    pub fn is_complete(&self) -> bool {
        self.spinors.iter().all(Option::is_some)
    }

    pub fn excluded_nodes(&self) -> impl Iterator<Item = SingularNode> + '_ {
        self.spinors
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_none())
            .map(move |(idx, _)| {
                let (ix, iy) = self.grid.coords(idx);
                let k = self.grid.point(ix, iy);
                SingularNode {
                    ix,
                    iy,
                    k,
                    r: r_vector(self.mass, k),
                }
            })
    }

    /// Multiplies every spinor by `e^{iθ(ix, iy)}`.
    pub fn regauged(&self, mut theta: impl FnMut(usize, usize) -> f64) -> SpinorField {
        let spinors = self
            .spinors
            .iter()
            .enumerate()
            .map(|(idx, s)| {
                let (ix, iy) = self.grid.coords(idx);
                s.map(|s| s.with_phase(theta(ix, iy)))
            })
            .collect();
        Self {
            spinors,
            ..self.clone()
        }
    }
}

/// A real 2-vector per grid node, possibly undefined at some nodes.
pub trait PlanarField {
    fn grid(&self) -> KGrid;

    /// The vector at a node, `None` where the field is undefined.
    fn vector(&self, ix: usize, iy: usize) -> Option<[f64; 2]>;
}

/// Plain planar vector field, mostly for synthetic inputs.
#[derive(Debug, Clone)]
pub struct VectorField {
    grid: KGrid,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl VectorField {
    pub fn from_fn(grid: KGrid, mut f: impl FnMut(usize, usize) -> [f64; 2]) -> Self {
        let (x, y) = (0..grid.len())
            .map(|i| {
                let (ix, iy) = grid.coords(i);
                let v = f(ix, iy);
                (v[0], v[1])
            })
            .unzip();
        Self { grid, x, y }
    }
}

impl PlanarField for VectorField {
    fn grid(&self) -> KGrid {
        self.grid
    }

    fn vector(&self, ix: usize, iy: usize) -> Option<[f64; 2]> {
        let i = self.grid.index(ix, iy);
        let v = [self.x[i], self.y[i]];
        (v[0].is_finite() && v[1].is_finite()).then_some(v)
    }
}
