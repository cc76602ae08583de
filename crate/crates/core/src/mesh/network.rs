use std::collections::{BTreeMap, HashMap, VecDeque};

use thiserror::Error;

use super::{edge_key, validate, ArcId, Triangulation, ValidationReport};
use crate::numeric::{Rational, Scalar};

/// Distance reported for vertices not reachable from the sources.
pub const UNREACHABLE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub ends: (usize, usize),
    pub conductance: Rational,
    pub conductance_f64: f64,
    /// True when at least one endpoint is interior, i.e. the edge belongs to
    /// the network's edge set.
    pub incident: bool,
}

impl Edge {
    pub fn conductance<S: Scalar>(&self) -> S {
        S::from_cached(&self.conductance, self.conductance_f64)
    }

    pub fn other(&self, v: usize) -> usize {
        if self.ends.0 == v {
            self.ends.1
        } else {
            self.ends.0
        }
    }
}

/// Membership mask over the vertices of a network.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    members: Vec<bool>,
}

impl VertexSet {
    pub fn empty(n: usize) -> Self {
        VertexSet { members: vec![false; n] }
    }

    pub fn from_indices(n: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut set = VertexSet::empty(n);
        for i in indices {
            set.members[i] = true;
        }
        set
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members[v]
    }

    pub fn insert(&mut self, v: usize) {
        self.members[v] = true;
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.members.iter().any(|&m| m)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("triangulation is invalid ({} violations)", .0.violations.len())]
    Invalid(ValidationReport),
    #[error("triangulation has no interior vertex")]
    NoInteriorVertex,
}

/// The finite network induced by a triangulation: interior set F, vertex
/// boundary, incident edges with conductances and the full edge graph (the
/// latter is needed for the unit-metric distance).
#[derive(Debug, Clone)]
pub struct Network {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    positions: Option<Vec<[f64; 2]>>,
    adjacency: Vec<Vec<(usize, usize)>>,
    edges: Vec<Edge>,
    interior: VertexSet,
    arc_of: Vec<Option<ArcId>>,
    arcs: [Vec<usize>; 4],
    corners: [usize; 4],
    degree: Vec<usize>,
    g: Rational,
    uniform_conductance: bool,
}

/// Derives the network of a valid triangulation.
pub fn derive_network(t: &Triangulation) -> Result<Network, NetworkError> {
    let report = validate(t);
    if !report.ok {
        return Err(NetworkError::Invalid(report));
    }
    let n = t.vertex_count();
    let boundary = t.boundary_vertices();
    let interior = VertexSet::from_indices(n, (0..n).filter(|v| !boundary.contains(v)));
    if interior.is_empty() {
        return Err(NetworkError::NoInteriorVertex);
    }

    let mut edges = Vec::new();
    let mut edge_index = BTreeMap::new();
    for (a, b) in t.edges() {
        let c = t.conductance(a, b).clone();
        edge_index.insert((a, b), edges.len());
        edges.push(Edge {
            ends: (a, b),
            conductance_f64: crate::numeric::rational_to_f64(&c),
            conductance: c,
            incident: interior.contains(a) || interior.contains(b),
        });
    }

    let positions = t.has_positions().then(|| t.vertices().iter().map(|v| v.position.unwrap()).collect::<Vec<_>>());
    let adjacency = (0..n)
        .map(|v| {
            rotation_order(t, v, positions.as_deref())
                .into_iter()
                .map(|w| (w, edge_index[&edge_key(v, w)]))
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>();

    let mut arc_of = vec![None; n];
    for arc in ArcId::ALL {
        for &v in t.arc(arc) {
            arc_of[v] = Some(arc);
        }
    }
    let degree = (0..n)
        .map(|v| {
            if interior.contains(v) {
                adjacency[v].len()
            } else {
                adjacency[v].iter().filter(|&&(w, _)| interior.contains(w)).count()
            }
        })
        .collect();
    let uniform_conductance = edges
        .iter()
        .filter(|e| e.incident)
        .all(|e| e.conductance == edges.iter().find(|e| e.incident).unwrap().conductance);

    Ok(Network {
        ids: t.vertices().iter().map(|v| v.id.clone()).collect(),
        index: t.vertices().iter().enumerate().map(|(i, v)| (v.id.clone(), i)).collect(),
        positions,
        adjacency,
        edges,
        interior,
        arc_of,
        arcs: t.arcs.clone(),
        corners: t.corners,
        degree,
        g: t.g.clone(),
        uniform_conductance,
    })
}

/// Neighbors of `v` in rotation order: by angle when coordinates exist,
/// otherwise by walking the fan of triangles around `v`.
fn rotation_order(t: &Triangulation, v: usize, positions: Option<&[[f64; 2]]>) -> Vec<usize> {
    let mut link: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for tri in t.triangles.iter().filter(|tri| tri.contains(&v)) {
        let k = tri.iter().position(|&x| x == v).unwrap();
        let (a, b) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
        link.entry(a).or_default().push(b);
        link.entry(b).or_default().push(a);
    }
    if let Some(pos) = positions {
        let [cx, cy] = pos[v];
        let mut order: Vec<usize> = link.keys().copied().collect();
        order.sort_by(|&a, &b| {
            let angle = |w: usize| (pos[w][1] - cy).atan2(pos[w][0] - cx);
            angle(a).total_cmp(&angle(b)).then(a.cmp(&b))
        });
        return order;
    }
    let start = link.iter().find(|(_, nbrs)| nbrs.len() == 1).map(|(&w, _)| w).or_else(|| link.keys().next().copied());
    let Some(start) = start else { return Vec::new() };
    let mut order = vec![start];
    let mut prev = None;
    let mut cur = start;
    loop {
        let next = link[&cur].iter().copied().filter(|&w| Some(w) != prev && w != start).min();
        match next {
            Some(w) if !order.contains(&w) => {
                order.push(w);
                prev = Some(cur);
                cur = w;
            }
            _ => break,
        }
    }
    if order.len() != link.len() {
        return link.keys().copied().collect();
    }
    order
}

impl Network {
    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn id(&self, v: usize) -> &str {
        &self.ids[v]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn positions(&self) -> Option<&[[f64; 2]]> {
        self.positions.as_deref()
    }

    /// The interior set F.
    pub fn interior(&self) -> &VertexSet {
        &self.interior
    }

    pub fn is_interior(&self, v: usize) -> bool {
        self.interior.contains(v)
    }

    /// Membership in the vertex boundary. Boundary vertices with no interior
    /// neighbor are kept, with degree zero.
    pub fn is_vertex_boundary(&self, v: usize) -> bool {
        !self.interior.contains(v)
    }

    pub fn arc_of(&self, v: usize) -> Option<ArcId> {
        self.arc_of[v]
    }

    pub fn arc(&self, arc: ArcId) -> &[usize] {
        &self.arcs[arc.index()]
    }

    pub fn corners(&self) -> [usize; 4] {
        self.corners
    }

    pub fn is_corner(&self, v: usize) -> bool {
        self.corners.contains(&v)
    }

    pub fn g(&self) -> &Rational {
        &self.g
    }

    /// True when every incident edge carries the same conductance.
    pub fn has_uniform_conductance(&self) -> bool {
        self.uniform_conductance
    }

    /// All neighbors in the triangulation graph, rotation order.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, &Edge)> + '_ {
        self.adjacency[v].iter().map(move |&(w, e)| (w, &self.edges[e]))
    }

    /// Neighbors relative to a reference set: all neighbors for members, only
    /// members for non-members.
    pub fn neighbors_within<'a>(
        &'a self,
        v: usize,
        set: &'a VertexSet,
    ) -> impl Iterator<Item = (usize, &'a Edge)> + 'a {
        let inside = set.contains(v);
        self.neighbors(v).filter(move |&(w, _)| inside || set.contains(w))
    }

    /// Network neighbors: relative to F.
    pub fn network_neighbors(&self, v: usize) -> impl Iterator<Item = (usize, &Edge)> + '_ {
        self.neighbors_within(v, &self.interior)
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<&Edge> {
        self.neighbors(a).find(|&(w, _)| w == b).map(|(_, e)| e)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// The network edge set: edges with at least one interior endpoint.
    pub fn incident_edges(&self) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.iter().filter(|e| e.incident)
    }

    /// Degree in the network (interior neighbors only for boundary vertices).
    pub fn degree(&self, v: usize) -> usize {
        self.degree[v]
    }

    pub fn max_degree(&self) -> usize {
        self.degree.iter().copied().max().unwrap_or(0)
    }

    /// Closure of a vertex set: the set together with its vertex boundary.
    pub fn closure(&self, set: &VertexSet) -> VertexSet {
        let mut closure = set.clone();
        for v in set.iter() {
            for (w, _) in self.neighbors(v) {
                closure.insert(w);
            }
        }
        closure
    }

    /// Vertex boundary of a set: non-members adjacent to a member.
    pub fn vertex_boundary_of(&self, set: &VertexSet) -> VertexSet {
        let mut boundary = VertexSet::empty(self.vertex_count());
        for v in set.iter() {
            for (w, _) in self.neighbors(v) {
                if !set.contains(w) {
                    boundary.insert(w);
                }
            }
        }
        boundary
    }
}

/// Multi-source breadth-first distance in the triangulation graph (the
/// metric that is identically one).
pub fn unit_distance(network: &Network, sources: &[usize]) -> Vec<u32> {
    let mut dist = vec![UNREACHABLE; network.vertex_count()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if dist[s] != 0 {
            dist[s] = 0;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        for (w, _) in network.neighbors(v) {
            if dist[w] == UNREACHABLE {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}
