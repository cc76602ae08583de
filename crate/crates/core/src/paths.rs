//! Thick paths: feasibility, shortest search under the gradient metric, an
//! exhaustive enumeration oracle and the region cut off by a vertical path.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::mesh::{unit_distance, ArcId, Network, VertexSet};
use crate::numeric::Scalar;
use crate::potential::GradientMetric;

/// Default vertex-count guard for [`enumerate_thick_paths`].
pub const ENUMERATION_GUARD: usize = 30;

/// Relative tolerance under which two path lengths count as tied.
const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// From P3 to P1.
    Vertical,
    /// From P2 to P4.
    Horizontal,
}

impl Orientation {
    pub const BOTH: [Orientation; 2] = [Orientation::Vertical, Orientation::Horizontal];

    pub fn start_arc(self) -> ArcId {
        match self {
            Orientation::Vertical => ArcId::P3,
            Orientation::Horizontal => ArcId::P2,
        }
    }

    pub fn end_arc(self) -> ArcId {
        match self {
            Orientation::Vertical => ArcId::P1,
            Orientation::Horizontal => ArcId::P4,
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::Vertical => "vertical",
            Orientation::Horizontal => "horizontal",
        })
    }
}

impl FromStr for Orientation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "vertical" => Ok(Orientation::Vertical),
            "horizontal" => Ok(Orientation::Horizontal),
            other => Err(format!("unknown orientation `{other}` (vertical|horizontal)")),
        }
    }
}

/// Which set the separation condition (4) keeps horizontal paths away from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HorizontalVariant {
    /// P3 ∪ P4 ∪ P1, the same set as for vertical paths.
    #[default]
    Verbatim,
    /// The whole vertex boundary.
    DeltaF,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ThickRules {
    pub horizontal_variant: HorizontalVariant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThickCondition {
    /// Fewer than three vertices.
    TooShort,
    /// A vertex repeats.
    NotSimple,
    /// Consecutive vertices are not adjacent.
    NotConnected,
    /// (1) endpoints on the right arcs, meeting them only there.
    Endpoints,
    /// (2) endpoints are not corners.
    CornerEndpoint,
    /// (3) inner vertices are interior.
    InteriorVertices,
    /// (4) middle vertices stay at unit distance > 1 from the separation set.
    Separation,
    /// (5) second and second-to-last vertices touch the contact set only at
    /// the endpoints.
    UniqueContact,
}

impl ThickCondition {
    /// The numbered condition (1-5), zero for structural failures.
    pub fn number(self) -> u8 {
        match self {
            ThickCondition::TooShort | ThickCondition::NotSimple | ThickCondition::NotConnected => 0,
            ThickCondition::Endpoints => 1,
            ThickCondition::CornerEndpoint => 2,
            ThickCondition::InteriorVertices => 3,
            ThickCondition::Separation => 4,
            ThickCondition::UniqueContact => 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThickViolation {
    pub condition: ThickCondition,
    pub vertices: Vec<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThickCheck {
    pub ok: bool,
    pub violations: Vec<ThickViolation>,
}

impl ThickCheck {
    pub fn violates(&self, condition: ThickCondition) -> bool {
        self.violations.iter().any(|v| v.condition == condition)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PathError {
    #[error("no {0} thick path exists")]
    NoThickPath(Orientation),
    #[error("instance too large for enumeration: {vertices} vertices, guard {guard}")]
    TooLarge { vertices: usize, guard: usize },
    #[error("path vertex index {0} has no metric value")]
    UnknownVertex(usize),
}

/// Precomputed vertex classes for one orientation.
pub struct ThickContext<'a> {
    network: &'a Network,
    orientation: Orientation,
    /// Unit distance to the separation set of condition (4).
    separation_distance: Vec<u32>,
    /// Membership in the contact set of condition (5).
    contact: VertexSet,
}

impl<'a> ThickContext<'a> {
    pub fn new(network: &'a Network, orientation: Orientation, rules: ThickRules) -> Self {
        let n = network.vertex_count();
        let side_arcs = [ArcId::P3, ArcId::P4, ArcId::P1];
        let arc_union = |arcs: &[ArcId]| arcs.iter().flat_map(|&a| network.arc(a).iter().copied()).collect::<Vec<_>>();
        let boundary: Vec<usize> = (0..n).filter(|&v| network.is_vertex_boundary(v)).collect();
        let separation = match (orientation, rules.horizontal_variant) {
            (Orientation::Horizontal, HorizontalVariant::DeltaF) => boundary.clone(),
            _ => arc_union(&side_arcs),
        };
        let contact = match orientation {
            Orientation::Vertical => arc_union(&side_arcs),
            Orientation::Horizontal => boundary,
        };
        ThickContext {
            network,
            orientation,
            separation_distance: unit_distance(network, &separation),
            contact: VertexSet::from_indices(n, contact),
        }
    }

    fn contacts(&self, v: usize) -> BTreeSet<usize> {
        self.network.neighbors(v).map(|(w, _)| w).filter(|&w| self.contact.contains(w)).collect()
    }

    fn separated(&self, v: usize) -> bool {
        self.separation_distance[v] > 1
    }

    /// Evaluates every thickness condition on `path`.
    pub fn check(&self, path: &[usize]) -> ThickCheck {
        let net = self.network;
        let ids = |vs: &[usize]| vs.iter().map(|&v| net.id(v).to_string()).collect::<Vec<_>>();
        let mut violations = Vec::new();
        let mut fail = |condition, vs: &[usize], message: String| {
            violations.push(ThickViolation { condition, vertices: ids(vs), message });
        };

        if path.len() < 3 {
            fail(ThickCondition::TooShort, path, "a thick path needs at least three vertices".into());
            return ThickCheck { ok: false, violations };
        }
        let n = path.len() - 1;
        let (x0, xn) = (path[0], path[n]);

        let mut seen = BTreeSet::new();
        let repeated: Vec<usize> = path.iter().copied().filter(|&v| !seen.insert(v)).collect();
        if !repeated.is_empty() {
            fail(ThickCondition::NotSimple, &repeated, "path repeats a vertex".into());
        }
        for pair in path.windows(2) {
            if net.edge_between(pair[0], pair[1]).is_none() {
                fail(ThickCondition::NotConnected, pair, "consecutive vertices are not adjacent".into());
            }
        }

        let (start, end) = (self.orientation.start_arc(), self.orientation.end_arc());
        if net.arc_of(x0) != Some(start) {
            fail(ThickCondition::Endpoints, &[x0], format!("first vertex must lie on {start}"));
        }
        if net.arc_of(xn) != Some(end) {
            fail(ThickCondition::Endpoints, &[xn], format!("last vertex must lie on {end}"));
        }
        for (i, &v) in path.iter().enumerate() {
            let arc = net.arc_of(v);
            if (arc == Some(start) && i != 0) || (arc == Some(end) && i != n) {
                fail(ThickCondition::Endpoints, &[v], "path meets an end arc away from its endpoint".into());
            }
        }

        for v in [x0, xn] {
            if net.is_corner(v) {
                fail(ThickCondition::CornerEndpoint, &[v], "endpoint is a corner".into());
            }
        }

        for &v in &path[1..n] {
            if !net.is_interior(v) {
                fail(ThickCondition::InteriorVertices, &[v], "inner vertex is not interior".into());
            }
        }

        for &v in path.iter().take(n - 1).skip(2) {
            if !self.separated(v) {
                fail(
                    ThickCondition::Separation,
                    &[v],
                    "middle vertex is within unit distance 1 of the separation set".into(),
                );
            }
        }

        for (inner, end_vertex) in [(path[1], x0), (path[n - 1], xn)] {
            let contacts = self.contacts(inner);
            if self.contact.contains(inner) || contacts != BTreeSet::from([end_vertex]) {
                let mut vs = vec![inner];
                vs.extend(contacts.iter().copied().filter(|&w| w != end_vertex));
                fail(
                    ThickCondition::UniqueContact,
                    &vs,
                    format!("vertex must touch the contact set only at `{}`", net.id(end_vertex)),
                );
            }
        }

        ThickCheck { ok: violations.is_empty(), violations }
    }
}

/// Checks the five thickness conditions (plus simplicity and adjacency).
pub fn check_thick(path: &[usize], orientation: Orientation, network: &Network, rules: ThickRules) -> ThickCheck {
    ThickContext::new(network, orientation, rules).check(path)
}

/// A thick path with its gradient-metric length.
#[derive(Debug, Clone, PartialEq)]
pub struct ThickPath<S> {
    pub vertices: Vec<usize>,
    pub orientation: Orientation,
    pub length: f64,
    /// Squared metric value at each vertex (exact in exact mode).
    pub length_squared_terms: Vec<S>,
}

impl<S: Scalar> ThickPath<S> {
    pub fn new(vertices: Vec<usize>, orientation: Orientation, metric: &GradientMetric<S>) -> Result<Self, PathError> {
        let length = path_length(metric, &vertices)?;
        let length_squared_terms = vertices.iter().map(|&v| metric.rho_sq[v].clone()).collect();
        Ok(ThickPath { vertices, orientation, length, length_squared_terms })
    }

    pub fn ids<'a>(&self, network: &'a Network) -> Vec<&'a str> {
        self.vertices.iter().map(|&v| network.id(v)).collect()
    }

    pub fn to_json(&self, network: &Network) -> Value {
        json!({
            "orientation": self.orientation,
            "vertices": self.ids(network),
            "length": self.length,
            "lengthSquaredTerms": self.length_squared_terms.iter().map(Scalar::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Sum of the metric over the path's vertices, endpoints included.
pub fn path_length<S: Scalar>(metric: &GradientMetric<S>, path: &[usize]) -> Result<f64, PathError> {
    path.iter().try_fold(0.0, |acc, &v| metric.rho.get(v).map(|r| acc + r).ok_or(PathError::UnknownVertex(v)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Cost {
    length: f64,
    hops: u32,
}

impl Cost {
    fn tie(&self, other: &Cost) -> bool {
        (self.length - other.length).abs() <= TIE_EPS * (1.0 + self.length.abs().max(other.length.abs()))
    }

    /// Length first (with the tie tolerance), then vertex count.
    fn compare(&self, other: &Cost) -> Ordering {
        if self.tie(other) {
            self.hops.cmp(&other.hops)
        } else {
            self.length.total_cmp(&other.length)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct QueueEntry(Cost, usize);

impl Eq for QueueEntry {}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.length.total_cmp(&other.0.length).then(self.0.hops.cmp(&other.0.hops)).then(self.1.cmp(&other.1))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const LAYERS: usize = 5;
const START: usize = 0;
const SECOND: usize = 1;
const MIDDLE: usize = 2;
const PENULTIMATE: usize = 3;
const END: usize = 4;

/// Shortest thick path under the gradient metric.
///
/// Node-weighted Dijkstra over a five-layer state graph (first vertex, second
/// vertex, middle vertices, second-to-last vertex, last vertex) whose layers
/// encode the positional thickness conditions. Ties go to fewer vertices and
/// then to the lexicographically smallest id sequence.
pub fn shortest_thick_path<S: Scalar>(
    metric: &GradientMetric<S>,
    network: &Network,
    orientation: Orientation,
    rules: ThickRules,
) -> Result<ThickPath<S>, PathError> {
    let ctx = ThickContext::new(network, orientation, rules);
    let n = network.vertex_count();
    let start_arc = orientation.start_arc();
    let end_arc = orientation.end_arc();

    // The unique contact of an interior vertex, if it has exactly one.
    let sole_contact = |v: usize| -> Option<usize> {
        if !network.is_interior(v) {
            return None;
        }
        let contacts = ctx.contacts(v);
        (contacts.len() == 1).then(|| *contacts.iter().next().unwrap())
    };
    let valid_endpoint = |v: usize, arc: ArcId| network.arc_of(v) == Some(arc) && !network.is_corner(v);
    let second_for: Vec<Option<usize>> =
        (0..n).map(|v| sole_contact(v).filter(|&c| valid_endpoint(c, start_arc))).collect();
    let penultimate_for: Vec<Option<usize>> =
        (0..n).map(|v| sole_contact(v).filter(|&c| valid_endpoint(c, end_arc))).collect();
    let middle: Vec<bool> = (0..n).map(|v| network.is_interior(v) && ctx.separated(v)).collect();

    let state = |v: usize, layer: usize| v * LAYERS + layer;
    let successors = |s: usize| -> Vec<usize> {
        let (v, layer) = (s / LAYERS, s % LAYERS);
        let mut out = Vec::new();
        for (w, _) in network.neighbors(v) {
            match layer {
                START => {
                    if second_for[w] == Some(v) {
                        out.push(state(w, SECOND));
                    }
                }
                SECOND | MIDDLE => {
                    if middle[w] {
                        out.push(state(w, MIDDLE));
                    }
                    if penultimate_for[w].is_some() {
                        out.push(state(w, PENULTIMATE));
                    }
                }
                PENULTIMATE if penultimate_for[v] == Some(w) => out.push(state(w, END)),
                _ => {}
            }
        }
        out
    };

    let total = n * LAYERS;
    let mut best: Vec<Option<Cost>> = vec![None; total];
    let mut parent: Vec<Option<usize>> = vec![None; total];
    let mut done = vec![false; total];
    let mut heap = BinaryHeap::new();

    let sequence = |s: usize, parent: &[Option<usize>]| -> Vec<usize> {
        let mut seq = vec![s / LAYERS];
        let mut cur = s;
        while let Some(p) = parent[cur] {
            seq.push(p / LAYERS);
            cur = p;
        }
        seq.reverse();
        seq
    };
    let id_order = |a: &[usize], b: &[usize]| a.iter().map(|&v| network.id(v)).cmp(b.iter().map(|&v| network.id(v)));

    for &v in network.arc(start_arc) {
        if valid_endpoint(v, start_arc) {
            let s = state(v, START);
            let cost = Cost { length: metric.rho[v], hops: 1 };
            best[s] = Some(cost);
            heap.push(Reverse(QueueEntry(cost, s)));
        }
    }

    let mut finals: Vec<usize> = Vec::new();
    while let Some(Reverse(QueueEntry(cost, s))) = heap.pop() {
        if done[s] || best[s] != Some(cost) {
            continue;
        }
        done[s] = true;
        if s % LAYERS == END {
            finals.push(s);
            continue;
        }
        for t in successors(s) {
            if done[t] {
                continue;
            }
            let w = t / LAYERS;
            let candidate = Cost { length: cost.length + metric.rho[w], hops: cost.hops + 1 };
            let replace = match best[t] {
                None => true,
                Some(current) => match candidate.compare(&current) {
                    Ordering::Less => true,
                    Ordering::Greater => false,
                    Ordering::Equal => {
                        let mut via = sequence(s, &parent);
                        via.push(w);
                        id_order(&via, &sequence(t, &parent)) == Ordering::Less
                    }
                },
            };
            if replace {
                best[t] = Some(candidate);
                parent[t] = Some(s);
                heap.push(Reverse(QueueEntry(candidate, t)));
            }
        }
    }

    let winner = finals.into_iter().min_by(|&a, &b| {
        best[a].unwrap().compare(&best[b].unwrap()).then_with(|| id_order(&sequence(a, &parent), &sequence(b, &parent)))
    });
    let Some(winner) = winner else {
        return Err(PathError::NoThickPath(orientation));
    };
    ThickPath::new(sequence(winner, &parent), orientation, metric)
}

/// Every thick path with at most `max_vertices` vertices, sorted by length,
/// then vertex count, then id sequence. Simple paths are enumerated
/// exhaustively (only through interior vertices, extending past position 1
/// only from vertices that satisfy the separation condition) and each
/// complete candidate is judged by [`check_thick`].
pub fn enumerate_thick_paths<S: Scalar>(
    metric: &GradientMetric<S>,
    network: &Network,
    orientation: Orientation,
    rules: ThickRules,
    max_vertices: usize,
    guard: usize,
) -> Result<Vec<ThickPath<S>>, PathError> {
    if network.vertex_count() > guard {
        return Err(PathError::TooLarge { vertices: network.vertex_count(), guard });
    }
    let ctx = ThickContext::new(network, orientation, rules);
    let end_arc = orientation.end_arc();
    let mut found: Vec<Vec<usize>> = Vec::new();

    fn extend(
        ctx: &ThickContext<'_>,
        end_arc: ArcId,
        max_vertices: usize,
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        found: &mut Vec<Vec<usize>>,
    ) {
        if path.len() >= max_vertices {
            return;
        }
        let net = ctx.network;
        let last = *path.last().unwrap();
        let position = path.len() - 1;
        for (w, _) in net.neighbors(last) {
            if on_path[w] {
                continue;
            }
            if net.arc_of(w) == Some(end_arc) && position >= 1 {
                path.push(w);
                if ctx.check(path).ok {
                    found.push(path.clone());
                }
                path.pop();
            } else if net.is_interior(w) && (position < 2 || ctx.separated(last)) {
                path.push(w);
                on_path[w] = true;
                extend(ctx, end_arc, max_vertices, path, on_path, found);
                on_path[w] = false;
                path.pop();
            }
        }
    }

    let mut on_path = vec![false; network.vertex_count()];
    for &start in network.arc(orientation.start_arc()) {
        if max_vertices == 0 {
            break;
        }
        let mut path = vec![start];
        on_path[start] = true;
        extend(&ctx, end_arc, max_vertices, &mut path, &mut on_path, &mut found);
        on_path[start] = false;
    }

    let mut paths = found.into_iter().map(|p| ThickPath::new(p, orientation, metric)).collect::<Result<Vec<_>, _>>()?;
    paths.sort_by(|a, b| {
        a.length
            .total_cmp(&b.length)
            .then(a.vertices.len().cmp(&b.vertices.len()))
            .then_with(|| a.ids(network).cmp(&b.ids(network)))
    });
    Ok(paths)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegionError {
    #[error("path must be vertical")]
    NotVertical,
    #[error("no interior vertex lies on the P4 side of the path")]
    Empty,
    #[error("region boundary differs from path ∪ P1 part ∪ P4 ∪ P3 part (offending: {0:?})")]
    BoundaryMismatch(Vec<String>),
}

/// The interior region between a vertical path and P4.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub interior: VertexSet,
    /// Vertex boundary of `interior`.
    pub boundary: VertexSet,
    pub cut_path: Vec<usize>,
    /// Boundary vertices of the region on P1, in arc order.
    pub p1_part: Vec<usize>,
    /// Boundary vertices of the region on P3, in arc order.
    pub p3_part: Vec<usize>,
    /// P4 vertices with an interior neighbor.
    pub p4: Vec<usize>,
}

/// Flood fill of the interior minus the path, seeded from the interior
/// neighbors of P4. Verifies that the region is non-empty and that its
/// vertex boundary is exactly path ∪ P1 part ∪ P4 ∪ P3 part.
pub fn enclosed_region<S: Scalar>(network: &Network, path: &ThickPath<S>) -> Result<Region, RegionError> {
    if path.orientation != Orientation::Vertical {
        return Err(RegionError::NotVertical);
    }
    let n = network.vertex_count();
    let on_path = VertexSet::from_indices(n, path.vertices.iter().copied());
    let mut interior = VertexSet::empty(n);
    let mut stack: Vec<usize> = Vec::new();
    for &b in network.arc(ArcId::P4) {
        for (w, _) in network.neighbors(b) {
            if network.is_interior(w) && !on_path.contains(w) && !interior.contains(w) {
                interior.insert(w);
                stack.push(w);
            }
        }
    }
    while let Some(v) = stack.pop() {
        for (w, _) in network.neighbors(v) {
            if network.is_interior(w) && !on_path.contains(w) && !interior.contains(w) {
                interior.insert(w);
                stack.push(w);
            }
        }
    }
    if interior.is_empty() {
        return Err(RegionError::Empty);
    }

    let boundary = network.vertex_boundary_of(&interior);
    let part = |arc: ArcId| network.arc(arc).iter().copied().filter(|&v| boundary.contains(v)).collect::<Vec<_>>();
    let p1_part = part(ArcId::P1);
    let p3_part = part(ArcId::P3);
    let p4: Vec<usize> = network.arc(ArcId::P4).iter().copied().filter(|&v| network.degree(v) > 0).collect();

    let expected = VertexSet::from_indices(n, path.vertices.iter().chain(&p1_part).chain(&p3_part).chain(&p4).copied());
    let mismatched: Vec<String> =
        (0..n).filter(|&v| expected.contains(v) != boundary.contains(v)).map(|v| network.id(v).to_string()).collect();
    if !mismatched.is_empty() {
        return Err(RegionError::BoundaryMismatch(mismatched));
    }
    Ok(Region { interior, boundary, cut_path: path.vertices.clone(), p1_part, p3_part, p4 })
}
