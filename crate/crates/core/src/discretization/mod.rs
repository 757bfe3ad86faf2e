//! Structured-grid discretization: the reference rectangle, boundary
//! classification, dead loads, and the assembled discrete energy.
//!
//! The domain is the open rectangle (0, Lx) x (0, Ly) covered by a
//! node-centered grid. Nodes are indexed `idx = j * nx + i` with `i` along x.
//! Derivatives use second-order difference stencils (one-sided at the
//! boundary), integrals use trapezoid quadrature, and boundary terms use the
//! matching 1-D trapezoid rule along each edge; see [`stencil`] and
//! [`assembly`].
//!
//! Two problem variants are supported. The mixed problem clamps at least one
//! edge (value and normal derivative prescribed) and applies tractions and
//! hypertractions on free edges only. The pinned problem prescribes values on
//! the whole boundary and admits hypertractions everywhere but no tractions,
//! since the deformation is fixed wherever a traction could act.

mod assembly;
mod stencil;

pub use assembly::{
    discrete_norms, divergence_identity_check, load_functional, quadrature_weights, total_energy,
    total_gradient, EnergyTerms, Norms,
};
pub use stencil::{evaluate_kinematics, min_jacobian, node_derivatives};

use serde::{Deserialize, Serialize};

use crate::energy::MaterialParams;
use crate::error::Error;
use crate::kinematics::Tensor32;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub hx: f64,
    pub hy: f64,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self, Error> {
        if nx < 3 || ny < 3 {
            return Err(Error::config("grid", "need at least 3 nodes per axis"));
        }
        if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
            return Err(Error::config("grid", "extent must be positive and finite"));
        }
        Ok(Grid2D {
            nx,
            ny,
            lx,
            ly,
            hx: lx / (nx - 1) as f64,
            hy: ly / (ny - 1) as f64,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn coords(&self, i: usize, j: usize) -> (f64, f64) {
        (i as f64 * self.hx, j as f64 * self.hy)
    }
}

/// Boundary edges of the rectangle, in the fixed order used for per-edge data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Edge {
    South,
    East,
    North,
    West,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::South, Edge::East, Edge::North, Edge::West];

    pub fn index(self) -> usize {
        match self {
            Edge::South => 0,
            Edge::East => 1,
            Edge::North => 2,
            Edge::West => 3,
        }
    }

    /// Outward unit normal in the reference plane.
    pub fn outward_normal(self) -> [f64; 2] {
        match self {
            Edge::South => [0.0, -1.0],
            Edge::East => [1.0, 0.0],
            Edge::North => [0.0, 1.0],
            Edge::West => [-1.0, 0.0],
        }
    }

    pub fn node_count(self, grid: &Grid2D) -> usize {
        match self {
            Edge::South | Edge::North => grid.nx,
            Edge::East | Edge::West => grid.ny,
        }
    }

    /// Node spacing along the edge.
    pub fn spacing(self, grid: &Grid2D) -> f64 {
        match self {
            Edge::South | Edge::North => grid.hx,
            Edge::East | Edge::West => grid.hy,
        }
    }

    /// Grid indices of the k-th node along the edge.
    pub fn node(self, grid: &Grid2D, k: usize) -> (usize, usize) {
        match self {
            Edge::South => (k, 0),
            Edge::North => (k, grid.ny - 1),
            Edge::West => (0, k),
            Edge::East => (grid.nx - 1, k),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeTag {
    /// Value and normal derivative prescribed.
    Clamped,
    /// Value prescribed only.
    Pinned,
    Free,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    Mixed,
    Pinned,
}

/// Nodal values of a deformation (or variation) on the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DeformationField {
    pub values: Vec<[f64; 3]>,
}

impl DeformationField {
    pub fn from_fn(grid: &Grid2D, f: impl Fn(f64, f64) -> [f64; 3]) -> Self {
        let mut values = Vec::with_capacity(grid.node_count());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let (x, y) = grid.coords(i, j);
                values.push(f(x, y));
            }
        }
        DeformationField { values }
    }

    /// The flat reference placement f(x) = (x1, x2, 0).
    pub fn identity(grid: &Grid2D) -> Self {
        Self::from_fn(grid, |x, y| [x, y, 0.0])
    }

    pub fn zeros(grid: &Grid2D) -> Self {
        DeformationField {
            values: vec![[0.0; 3]; grid.node_count()],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Per-edge boundary tags plus the prescribed placement sampled at all nodes
/// (only its boundary-adjacent values are consumed by the constraints).
#[derive(Clone, Debug)]
pub struct BoundarySpec {
    pub south: EdgeTag,
    pub east: EdgeTag,
    pub north: EdgeTag,
    pub west: EdgeTag,
    pub f_o: DeformationField,
}

impl BoundarySpec {
    pub fn tag(&self, edge: Edge) -> EdgeTag {
        match edge {
            Edge::South => self.south,
            Edge::East => self.east,
            Edge::North => self.north,
            Edge::West => self.west,
        }
    }

    /// Classify the problem variant from the tags. All edges pinned is the
    /// pinned problem; otherwise at least one edge must be clamped.
    pub fn kind(&self) -> Result<ProblemKind, Error> {
        let tags = Edge::ALL.map(|e| self.tag(e));
        if tags.iter().all(|t| *t == EdgeTag::Pinned) {
            return Ok(ProblemKind::Pinned);
        }
        if tags.iter().any(|t| *t == EdgeTag::Clamped) {
            return Ok(ProblemKind::Mixed);
        }
        Err(Error::config(
            "boundary",
            "need at least one clamped edge, or all edges pinned",
        ))
    }
}

/// Dead loads, sampled nodally. Per-edge vectors follow [`Edge::node`] order
/// and are indexed by [`Edge::index`].
#[derive(Clone, Debug, Default)]
pub struct LoadSpec {
    /// Body force b per node, work-conjugate to f.
    pub body_force: Option<Vec<[f64; 3]>>,
    /// Generalized body force B per node, work-conjugate to the gradient.
    pub body_couple: Option<Vec<Tensor32>>,
    /// Traction per edge node, free edges of the mixed problem only.
    pub traction: [Option<Vec<[f64; 3]>>; 4],
    /// Hypertraction per edge node, work-conjugate to the normal derivative.
    pub hypertraction: [Option<Vec<[f64; 3]>>; 4],
}

impl LoadSpec {
    pub fn none() -> Self {
        LoadSpec::default()
    }

    pub fn is_zero(&self) -> bool {
        self.body_force.is_none()
            && self.body_couple.is_none()
            && self.traction.iter().all(|t| t.is_none())
            && self.hypertraction.iter().all(|m| m.is_none())
    }
}

/// A fully specified discrete problem. Construct through [`ProblemSpec::new`],
/// which validates dimensions and load placement.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub grid: Grid2D,
    pub material: MaterialParams,
    pub boundary: BoundarySpec,
    pub loads: LoadSpec,
}

impl ProblemSpec {
    pub fn new(
        grid: Grid2D,
        material: MaterialParams,
        boundary: BoundarySpec,
        loads: LoadSpec,
    ) -> Result<Self, Error> {
        material.validate()?;
        let kind = boundary.kind()?;
        if boundary.f_o.len() != grid.node_count() {
            return Err(Error::config(
                "boundary.f_o",
                format!(
                    "prescribed field has {} nodes, grid has {}",
                    boundary.f_o.len(),
                    grid.node_count()
                ),
            ));
        }
        if let Some(b) = &loads.body_force {
            if b.len() != grid.node_count() {
                return Err(Error::config("loads.b", "node count mismatch"));
            }
        }
        if let Some(bb) = &loads.body_couple {
            if bb.len() != grid.node_count() {
                return Err(Error::config("loads.B", "node count mismatch"));
            }
        }
        for edge in Edge::ALL {
            let tag = boundary.tag(edge);
            let name = edge_name(edge);
            if let Some(tau) = &loads.traction[edge.index()] {
                if kind == ProblemKind::Pinned {
                    return Err(Error::config(
                        format!("loads.tau.{name}"),
                        "tractions do no work on a pinned boundary",
                    ));
                }
                if tag != EdgeTag::Free {
                    return Err(Error::config(
                        format!("loads.tau.{name}"),
                        "tractions act on free edges only",
                    ));
                }
                if tau.len() != edge.node_count(&grid) {
                    return Err(Error::config(format!("loads.tau.{name}"), "edge node count mismatch"));
                }
            }
            if let Some(mu) = &loads.hypertraction[edge.index()] {
                if kind == ProblemKind::Mixed && tag != EdgeTag::Free {
                    return Err(Error::config(
                        format!("loads.mu.{name}"),
                        "hypertractions act on free edges in the mixed problem",
                    ));
                }
                if mu.len() != edge.node_count(&grid) {
                    return Err(Error::config(format!("loads.mu.{name}"), "edge node count mismatch"));
                }
            }
        }
        Ok(ProblemSpec {
            grid,
            material,
            boundary,
            loads,
        })
    }

    pub fn kind(&self) -> ProblemKind {
        self.boundary.kind().expect("validated at construction")
    }

    /// Nodes whose values are fixed by the boundary conditions. Pinned edges
    /// fix the edge nodes; clamped edges additionally fix the first interior
    /// layer, which pins the two-point normal difference and hence the
    /// discrete normal derivative.
    pub fn constrained_mask(&self) -> Vec<bool> {
        let grid = &self.grid;
        let mut mask = vec![false; grid.node_count()];
        for edge in Edge::ALL {
            let tag = self.boundary.tag(edge);
            if tag == EdgeTag::Free {
                continue;
            }
            for k in 0..edge.node_count(grid) {
                let (i, j) = edge.node(grid, k);
                mask[grid.idx(i, j)] = true;
                if tag == EdgeTag::Clamped {
                    let (ii, jj) = interior_neighbor(edge, i, j);
                    mask[grid.idx(ii, jj)] = true;
                }
            }
        }
        mask
    }

    /// Overwrite constrained nodes with the prescribed placement. Idempotent.
    pub fn project_field(&self, field: &mut DeformationField) {
        let mask = self.constrained_mask();
        for (idx, fixed) in mask.iter().enumerate() {
            if *fixed {
                field.values[idx] = self.boundary.f_o.values[idx];
            }
        }
    }

    /// Zero constrained entries of a variation or gradient. Idempotent.
    pub fn project_variation(&self, dir: &mut [[f64; 3]]) {
        let mask = self.constrained_mask();
        for (idx, fixed) in mask.iter().enumerate() {
            if *fixed {
                dir[idx] = [0.0; 3];
            }
        }
    }

    /// Whether the starting point satisfies its constraints already.
    pub fn is_projected(&self, field: &DeformationField) -> bool {
        let mask = self.constrained_mask();
        mask.iter()
            .enumerate()
            .all(|(idx, fixed)| !*fixed || field.values[idx] == self.boundary.f_o.values[idx])
    }
}

fn interior_neighbor(edge: Edge, i: usize, j: usize) -> (usize, usize) {
    match edge {
        Edge::South => (i, j + 1),
        Edge::North => (i, j - 1),
        Edge::West => (i + 1, j),
        Edge::East => (i - 1, j),
    }
}

fn edge_name(edge: Edge) -> &'static str {
    match edge {
        Edge::South => "south",
        Edge::East => "east",
        Edge::North => "north",
        Edge::West => "west",
    }
}
