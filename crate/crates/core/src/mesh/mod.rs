//! Triangulated topological quadrilaterals: the four-arc boundary model, its
//! combinatorial validation, the text format, a grid generator and the
//! derived conductance network.

mod format;
mod grid;
mod layout;
mod network;
mod validate;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::numeric::{int, Rational};

pub use format::{parse_quadnet, parse_quadnet_unchecked, to_quadnet, ParseError, ParseErrorKind};
pub use grid::{generate_grid, grid_id, ConductanceSampler, DiagonalRule, GridError, GridSpec};
pub use layout::tutte_embedding;
pub use network::{derive_network, unit_distance, Edge, Network, NetworkError, VertexSet, UNREACHABLE};
pub use validate::{validate, ValidationReport, Violation};

/// One of the four boundary arcs, listed in cyclic order around the boundary.
///
/// P2 and P4 carry Dirichlet data (0 and `g`), P1 and P3 carry zero Neumann
/// data. Vertical paths run P3 → P1, horizontal paths P2 → P4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ArcId {
    P1,
    P2,
    P3,
    P4,
}

impl ArcId {
    pub const ALL: [ArcId; 4] = [ArcId::P1, ArcId::P2, ArcId::P3, ArcId::P4];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        ["P1", "P2", "P3", "P4"][self.index()]
    }

    pub fn from_name(name: &str) -> Option<ArcId> {
        ArcId::ALL.into_iter().find(|a| a.name() == name)
    }

    pub fn next(self) -> ArcId {
        ArcId::ALL[(self.index() + 1) % 4]
    }
}

impl fmt::Display for ArcId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub id: String,
    pub position: Option<[f64; 2]>,
}

impl Vertex {
    pub fn new(id: impl Into<String>) -> Self {
        Vertex { id: id.into(), position: None }
    }

    pub fn at(id: impl Into<String>, x: f64, y: f64) -> Self {
        Vertex { id: id.into(), position: Some([x, y]) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MeshError {
    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(String),
    #[error("vertex index {0} out of range")]
    VertexOutOfRange(usize),
}

/// A triangulation of a quadrilateral together with its boundary arcs, corner
/// assignment, conductances and Dirichlet constant.
///
/// Arcs are vertex-disjoint: `corners[i]` sits at the junction of arc `i` and
/// arc `i + 1` (cyclically) and is stored as either the last vertex of arc `i`
/// or the first vertex of arc `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation {
    vertices: Vec<Vertex>,
    index: HashMap<String, usize>,
    pub triangles: Vec<[usize; 3]>,
    pub arcs: [Vec<usize>; 4],
    pub corners: [usize; 4],
    pub default_conductance: Rational,
    /// Per-edge conductances keyed by `(min, max)` vertex index.
    pub conductance_overrides: BTreeMap<(usize, usize), Rational>,
    /// Value imposed on P4; P2 is held at zero.
    pub g: Rational,
}

impl Triangulation {
    /// Builds a triangulation with unit conductance, `g = 1` and the default
    /// corner assignment (corners stored on the Dirichlet arcs).
    pub fn new(vertices: Vec<Vertex>, triangles: Vec<[usize; 3]>, arcs: [Vec<usize>; 4]) -> Result<Self, MeshError> {
        let mut index = HashMap::with_capacity(vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            if index.insert(v.id.clone(), i).is_some() {
                return Err(MeshError::DuplicateVertex(v.id.clone()));
            }
        }
        let n = vertices.len();
        for &i in triangles.iter().flatten().chain(arcs.iter().flatten()) {
            if i >= n {
                return Err(MeshError::VertexOutOfRange(i));
            }
        }
        let corners = default_corners(&arcs);
        Ok(Triangulation {
            vertices,
            index,
            triangles,
            arcs,
            corners,
            default_conductance: int(1),
            conductance_overrides: BTreeMap::new(),
            g: int(1),
        })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn id(&self, v: usize) -> &str {
        &self.vertices[v].id
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn arc(&self, arc: ArcId) -> &[usize] {
        &self.arcs[arc.index()]
    }

    pub fn has_positions(&self) -> bool {
        !self.vertices.is_empty() && self.vertices.iter().all(|v| v.position.is_some())
    }

    pub fn set_positions(&mut self, positions: &[[f64; 2]]) {
        for (v, p) in self.vertices.iter_mut().zip(positions) {
            v.position = Some(*p);
        }
    }

    /// Undirected edges induced by the triangles, as `(min, max)` pairs.
    pub fn edges(&self) -> BTreeSet<(usize, usize)> {
        let mut edges = BTreeSet::new();
        for t in &self.triangles {
            for (a, b) in triangle_edges(t) {
                if a != b {
                    edges.insert(edge_key(a, b));
                }
            }
        }
        edges
    }

    pub fn conductance(&self, a: usize, b: usize) -> &Rational {
        self.conductance_overrides.get(&edge_key(a, b)).unwrap_or(&self.default_conductance)
    }

    pub fn set_conductance(&mut self, a: usize, b: usize, c: Rational) {
        self.conductance_overrides.insert(edge_key(a, b), c);
    }

    /// Multiplies every conductance (default and overrides) by `factor`.
    pub fn scale_conductances(&mut self, factor: &Rational) {
        self.default_conductance = &self.default_conductance * factor;
        for c in self.conductance_overrides.values_mut() {
            *c = &*c * factor;
        }
    }

    /// Number of triangles on each edge.
    pub(crate) fn edge_triangle_counts(&self) -> BTreeMap<(usize, usize), usize> {
        let mut counts = BTreeMap::new();
        for t in &self.triangles {
            for (a, b) in triangle_edges(t) {
                if a != b {
                    *counts.entry(edge_key(a, b)).or_insert(0) += 1;
                }
            }
        }
        counts
    }

    /// Vertices incident to an edge that lies on exactly one triangle.
    pub fn boundary_vertices(&self) -> BTreeSet<usize> {
        self.edge_triangle_counts().into_iter().filter(|&(_, n)| n == 1).flat_map(|((a, b), _)| [a, b]).collect()
    }
}

pub(crate) fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

pub(crate) fn triangle_edges(t: &[usize; 3]) -> [(usize, usize); 3] {
    [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])]
}

/// Corners placed on the Dirichlet arcs: both ends of P2 and both ends of P4.
pub fn default_corners(arcs: &[Vec<usize>; 4]) -> [usize; 4] {
    let first = |a: &Vec<usize>| a.first().copied().unwrap_or(0);
    let last = |a: &Vec<usize>| a.last().copied().unwrap_or(0);
    [first(&arcs[1]), last(&arcs[1]), first(&arcs[3]), last(&arcs[3])]
}
