use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use serde::Serialize;

use super::{edge_key, ArcId, Triangulation};

/// A single failed invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub invariant: &'static str,
    pub vertices: Vec<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn has(&self, invariant: &str) -> bool {
        self.violations.iter().any(|v| v.invariant == invariant)
    }
}

struct Collector<'a> {
    t: &'a Triangulation,
    violations: Vec<Violation>,
}

impl Collector<'_> {
    fn push(&mut self, invariant: &'static str, vertices: &[usize], message: String) {
        self.violations.push(Violation {
            invariant,
            vertices: vertices.iter().map(|&v| self.t.id(v).to_string()).collect(),
            message,
        });
    }
}

/// Checks every structural invariant of a triangulated quadrilateral and
/// reports all violations found.
pub fn validate(t: &Triangulation) -> ValidationReport {
    let mut c = Collector { t, violations: Vec::new() };
    let n = t.vertex_count();

    let mut seen_triangles = BTreeSet::new();
    for tri in &t.triangles {
        if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
            c.push("triangle-distinct-vertices", tri, "triangle repeats a vertex".into());
            continue;
        }
        let mut key = *tri;
        key.sort_unstable();
        if !seen_triangles.insert(key) {
            c.push("duplicate-triangle", tri, "triangle listed twice".into());
        }
    }

    let counts = t.edge_triangle_counts();
    for (&(a, b), &k) in &counts {
        if k > 2 {
            c.push("edge-manifold", &[a, b], format!("edge lies on {k} triangles"));
        }
    }

    let mut used = vec![false; n];
    for &v in t.triangles.iter().flatten() {
        used[v] = true;
    }
    for v in (0..n).filter(|&v| !used[v]) {
        c.push("isolated-vertex", &[v], "vertex lies on no triangle".into());
    }

    let mut adjacency = vec![Vec::new(); n];
    for &(a, b) in counts.keys() {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    if n > 0 && component_count(&adjacency) > 1 {
        c.push("connected", &[], "edge graph is disconnected".into());
    }

    check_links(&mut c);

    let boundary = boundary_cycle_check(&mut c, &counts, n);

    let edge_count = counts.len() as i64;
    let euler = n as i64 - edge_count + t.triangles.len() as i64;
    if euler != 1 {
        c.push("euler-characteristic", &[], format!("V - E + T = {euler}, a disk requires 1"));
    }

    check_arcs(&mut c, &counts, &boundary);
    check_corners(&mut c);

    if t.default_conductance <= Zero::zero() {
        c.push("conductance-positive", &[], "default conductance must be positive".into());
    }
    for (&(a, b), value) in &t.conductance_overrides {
        if !counts.contains_key(&(a, b)) {
            c.push("conductance-edge", &[a, b], "conductance declared on a non-edge".into());
        }
        if *value <= Zero::zero() {
            c.push("conductance-positive", &[a, b], "conductance must be positive".into());
        }
    }
    if t.g <= Zero::zero() {
        c.push("g-positive", &[], "Dirichlet constant must be positive".into());
    }

    let violations = c.violations;
    ValidationReport { ok: violations.is_empty(), violations }
}

fn component_count(adjacency: &[Vec<usize>]) -> usize {
    let mut seen = vec![false; adjacency.len()];
    let mut components = 0;
    for start in 0..adjacency.len() {
        if seen[start] || adjacency[start].is_empty() {
            continue;
        }
        components += 1;
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            for &w in &adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    components
}

/// The triangles around each vertex must form a single fan (a path or a cycle
/// in the link).
fn check_links(c: &mut Collector<'_>) {
    let t = c.t;
    let mut links: Vec<Vec<(usize, usize)>> = vec![Vec::new(); t.vertex_count()];
    for tri in &t.triangles {
        if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
            continue;
        }
        for k in 0..3 {
            links[tri[k]].push((tri[(k + 1) % 3], tri[(k + 2) % 3]));
        }
    }
    for (v, link) in links.iter().enumerate() {
        if link.is_empty() {
            continue;
        }
        let mut degree: BTreeMap<usize, usize> = BTreeMap::new();
        let mut adjacency: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &(a, b) in link {
            *degree.entry(a).or_default() += 1;
            *degree.entry(b).or_default() += 1;
            adjacency.entry(a).or_default().push(b);
            adjacency.entry(b).or_default().push(a);
        }
        let ends = degree.values().filter(|&&d| d == 1).count();
        let fan = degree.values().all(|&d| d <= 2) && (ends == 0 || ends == 2) && {
            let start = *adjacency.keys().next().unwrap();
            let mut seen = BTreeSet::from([start]);
            let mut stack = vec![start];
            while let Some(x) = stack.pop() {
                for &y in &adjacency[&x] {
                    if seen.insert(y) {
                        stack.push(y);
                    }
                }
            }
            seen.len() == adjacency.len()
        };
        if !fan {
            c.push("vertex-manifold", &[v], "triangles around the vertex do not form a single fan".into());
        }
    }
}

/// Returns the boundary cycle in traversal order when it is a single simple
/// cycle.
fn boundary_cycle_check(
    c: &mut Collector<'_>,
    counts: &BTreeMap<(usize, usize), usize>,
    n: usize,
) -> Option<Vec<usize>> {
    let mut adjacency = vec![Vec::new(); n];
    let mut boundary_edges = 0;
    for (&(a, b), &k) in counts {
        if k == 1 {
            adjacency[a].push(b);
            adjacency[b].push(a);
            boundary_edges += 1;
        }
    }
    if boundary_edges == 0 {
        c.push("boundary-single-cycle", &[], "triangulation has no boundary".into());
        return None;
    }
    let branching: Vec<usize> = (0..n).filter(|&v| !adjacency[v].is_empty() && adjacency[v].len() != 2).collect();
    if !branching.is_empty() {
        c.push("boundary-single-cycle", &branching, "boundary vertices must have exactly two boundary edges".into());
        return None;
    }
    let start = (0..n).find(|&v| !adjacency[v].is_empty()).unwrap();
    let mut cycle = vec![start];
    let (mut prev, mut cur) = (start, adjacency[start][0]);
    while cur != start {
        cycle.push(cur);
        let next = if adjacency[cur][0] == prev { adjacency[cur][1] } else { adjacency[cur][0] };
        prev = cur;
        cur = next;
    }
    if cycle.len() != boundary_edges {
        c.push(
            "boundary-single-cycle",
            &[],
            format!(
                "boundary splits into several cycles ({} of {} boundary edges on the first)",
                cycle.len(),
                boundary_edges
            ),
        );
        return None;
    }
    Some(cycle)
}

fn check_arcs(c: &mut Collector<'_>, counts: &BTreeMap<(usize, usize), usize>, boundary: &Option<Vec<usize>>) {
    let t = c.t;
    let mut owner: BTreeMap<usize, ArcId> = BTreeMap::new();
    for arc in ArcId::ALL {
        let vertices = t.arc(arc);
        if vertices.is_empty() {
            c.push("arc-nontrivial", &[], format!("arc {arc} is empty"));
        }
        for &v in vertices {
            if let Some(prev) = owner.insert(v, arc) {
                c.push("arcs-disjoint", &[v], format!("vertex appears in {prev} and {arc}"));
            }
        }
    }

    let on_boundary = t.boundary_vertices();
    let off: Vec<usize> = owner.keys().copied().filter(|v| !on_boundary.contains(v)).collect();
    if !off.is_empty() {
        c.push("arcs-on-boundary", &off, "arc vertex is not on the boundary".into());
    }
    let missing: Vec<usize> = on_boundary.iter().copied().filter(|v| !owner.contains_key(v)).collect();
    if !missing.is_empty() {
        c.push("arcs-cover-boundary", &missing, "arcs do not cover the boundary".into());
    }

    // Walking P1, P2, P3, P4 in order must follow boundary edges all the way round.
    let sequence: Vec<usize> = ArcId::ALL.iter().flat_map(|&a| t.arc(a).iter().copied()).collect();
    if boundary.is_some() && sequence.len() >= 3 {
        for i in 0..sequence.len() {
            let (a, b) = (sequence[i], sequence[(i + 1) % sequence.len()]);
            if counts.get(&edge_key(a, b)) != Some(&1) {
                c.push(
                    "arcs-cyclic-order",
                    &[a, b],
                    "consecutive arc vertices are not joined by a boundary edge".into(),
                );
            }
        }
    }
}

fn check_corners(c: &mut Collector<'_>) {
    let t = c.t;
    let corners = t.corners;
    let distinct: BTreeSet<usize> = corners.iter().copied().collect();
    if distinct.len() != 4 {
        c.push("corners-distinct", &corners, "the four corners must be distinct vertices".into());
    }
    for arc in ArcId::ALL {
        let corner = corners[arc.index()];
        let at_end = t.arc(arc).last() == Some(&corner);
        let at_start = t.arc(arc.next()).first() == Some(&corner);
        if !(at_end || at_start) {
            c.push("corner-placement", &[corner], format!("corner must end {arc} or start {}", arc.next()));
        }
    }
}
