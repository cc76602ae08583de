//! Reconstruction of the worked eleven-vertex example.
//!
//! Only the solution values, the two shortest thick paths, their lengths, the
//! energy and the maximal degree of the example are known, not its adjacency.
//! This module searches a family of wheel-shaped triangulations for every
//! adjacency that reproduces all of them:
//!
//! * a center `X` whose link is the 8-cycle of `C1..C4, S, T, Y, L`, with `C1`
//!   opposite `C3`, `C2` opposite `C4` and `S, T, Y, L` on the slots between
//!   them (48 cyclic orders, `C3` fixed in slot 0);
//! * an outer ring where each link vertex sees a fan of `e + 1` consecutive
//!   ring vertices, `e` in `0..=3`, consecutive fans sharing one vertex;
//! * a ring labelling `U, 0.., V, 1..` (P1 = `[U]`, P2 = zeros, P3 = `[V]`,
//!   P4 = ones).
//!
//! The harmonic equation of each link vertex prunes the search as soon as its
//! fan is labelled; surviving leaves are solved exactly and checked against
//! every published quantity.

use std::collections::BTreeSet;

use crate::bvp::solve_network_exact;
use crate::mesh::{derive_network, tutte_embedding, Triangulation, Vertex};
use crate::numeric::{ratio, Rational};
use crate::paths::{shortest_thick_path, Orientation, ThickRules};
use crate::potential::{dirichlet_energy, gradient_metric, network_constants};

/// Published solution, in the order it is listed.
pub const PUBLISHED_VALUES: [(&str, i64, i64); 11] = [
    ("X", 1, 2),
    ("V", 1, 2),
    ("S", 31, 44),
    ("T", 13, 44),
    ("Y", 13, 44),
    ("L", 31, 44),
    ("U", 1, 2),
    ("C1", 3, 11),
    ("C2", 1, 2),
    ("C3", 8, 11),
    ("C4", 1, 2),
];
pub const PUBLISHED_ENERGY: (i64, i64) = (16, 11);
pub const PUBLISHED_HORIZONTAL_LENGTH: f64 = 2.23111;
pub const PUBLISHED_VERTICAL_LENGTH: f64 = 1.67733;
pub const PUBLISHED_GAP: f64 = 2.21929;
pub const PUBLISHED_MAX_DEGREE: usize = 8;
/// Published shortest horizontal path; `0` and `1` stand for its endpoints.
pub const PUBLISHED_HORIZONTAL_PATH: [&str; 5] = ["0", "C1", "X", "C3", "1"];
pub const PUBLISHED_VERTICAL_PATH: [&str; 5] = ["V", "C2", "X", "C4", "U"];
/// Published numbers are given to five decimals.
pub const PUBLISHED_TOLERANCE: f64 = 1e-4;

const MAX_FAN: usize = 3;

fn published_value(name: &str) -> Rational {
    let &(_, p, q) = PUBLISHED_VALUES.iter().find(|(n, _, _)| *n == name).expect("named vertex");
    ratio(p, q)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RingLabel {
    Zero,
    One,
    U,
    V,
}

impl RingLabel {
    const ALL: [RingLabel; 4] = [RingLabel::Zero, RingLabel::One, RingLabel::U, RingLabel::V];

    fn value(self) -> Rational {
        match self {
            RingLabel::Zero => ratio(0, 1),
            RingLabel::One => ratio(1, 1),
            RingLabel::U => published_value("U"),
            RingLabel::V => published_value("V"),
        }
    }

    fn code(self) -> char {
        match self {
            RingLabel::Zero => '0',
            RingLabel::One => '1',
            RingLabel::U | RingLabel::V => 'h',
        }
    }
}

/// One member of the search family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    /// Link of `X` in cyclic order, starting with `C3`.
    pub link: [&'static str; 8],
    /// Fan sizes `e` per link slot.
    pub fans: [usize; 8],
    /// Ring labels in ring order; link slot `i` sees ring positions
    /// `p_i ..= p_i + e_i` (mod ring length) with `p_i = e_0 + .. + e_{i-1}`.
    pub ring: Vec<RingLabel>,
}

/// A candidate that reproduces every published quantity.
#[derive(Debug, Clone)]
pub struct Match {
    pub candidate: Candidate,
    pub triangulation: Triangulation,
    /// Value-coloured structure, identical for mirror images.
    pub signature: String,
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub link_orders: usize,
    /// Leaves that passed every local harmonic equation.
    pub solved_leaves: usize,
    pub matches: Vec<Match>,
}

impl Reconstruction {
    pub fn distinct_signatures(&self) -> usize {
        self.matches.iter().map(|m| &m.signature).collect::<BTreeSet<_>>().len()
    }

    /// All matches agree up to mirror symmetry and renaming of equal-valued
    /// vertices.
    pub fn is_unique(&self) -> bool {
        self.distinct_signatures() == 1
    }
}

fn link_orders() -> Vec<[&'static str; 8]> {
    let mut out = Vec::new();
    let diagonals = ["S", "T", "Y", "L"];
    let mut perms = Vec::new();
    permutations(&mut diagonals.to_vec(), 0, &mut perms);
    for (c2_slot, c4_slot) in [(2, 6), (6, 2)] {
        for p in &perms {
            let mut link = [""; 8];
            link[0] = "C3";
            link[4] = "C1";
            link[c2_slot] = "C2";
            link[c4_slot] = "C4";
            for (slot, name) in [1, 3, 5, 7].into_iter().zip(p) {
                link[slot] = name;
            }
            out.push(link);
        }
    }
    out
}

fn permutations(items: &mut Vec<&'static str>, k: usize, out: &mut Vec<Vec<&'static str>>) {
    if k == items.len() {
        out.push(items.clone());
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permutations(items, k + 1, out);
        items.swap(k, i);
    }
}

/// Cyclic ring label sequence of the form `U, a.., V, b..` with one of `a`,
/// `b` all zeros and the other all ones, both non-empty.
fn ring_pattern_ok(ring: &[RingLabel]) -> bool {
    let Some(u) = ring.iter().position(|&l| l == RingLabel::U) else { return false };
    let n = ring.len();
    let rotated: Vec<RingLabel> = (0..n).map(|i| ring[(u + i) % n]).collect();
    let Some(v) = rotated.iter().position(|&l| l == RingLabel::V) else { return false };
    let (first, second) = (&rotated[1..v], &rotated[v + 1..]);
    let uniform = |side: &[RingLabel], l: RingLabel| !side.is_empty() && side.iter().all(|&x| x == l);
    (uniform(first, RingLabel::Zero) && uniform(second, RingLabel::One))
        || (uniform(first, RingLabel::One) && uniform(second, RingLabel::Zero))
}

struct Dfs<'a> {
    link: &'a [&'static str; 8],
    link_values: Vec<Rational>,
    fans: [usize; 8],
    ring: Vec<RingLabel>,
    leaves: Vec<Candidate>,
}

impl Dfs<'_> {
    /// `f(l_i) (e_i + 4) - f(X) - f(l_{i-1}) - f(l_{i+1})`: what the fan must sum to.
    fn fan_target(&self, i: usize, e: usize) -> Rational {
        let v = &self.link_values;
        &v[i] * ratio(e as i64 + 4, 1) - published_value("X") - &v[(i + 7) % 8] - &v[(i + 1) % 8]
    }

    fn step(&mut self, i: usize) {
        if i == 8 {
            if ring_pattern_ok(&self.ring) {
                self.leaves.push(Candidate { link: *self.link, fans: self.fans, ring: self.ring.clone() });
            }
            return;
        }
        if i == 0 {
            for l in RingLabel::ALL {
                self.ring.push(l);
                self.fan(i);
                self.ring.pop();
            }
        } else {
            self.fan(i);
        }
    }

    fn fan(&mut self, i: usize) {
        for e in 0..=MAX_FAN {
            // The last fan closes the ring on position 0.
            if i == 7 && e == 0 {
                continue;
            }
            self.fans[i] = e;
            let target = self.fan_target(i, e);
            let start = self.ring.len() - 1;
            let fresh = if i == 7 { e - 1 } else { e };
            self.label(i, start, fresh, &target);
        }
    }

    fn label(&mut self, i: usize, start: usize, fresh: usize, target: &Rational) {
        let assigned = self.ring.len() - 1 - start;
        if assigned == fresh {
            let mut sum: Rational = self.ring[start..].iter().map(|l| l.value()).sum();
            if i == 7 {
                sum += self.ring[0].value();
            }
            let unique = |l: RingLabel| self.ring.iter().filter(|&&x| x == l).count() <= 1;
            if sum == *target && unique(RingLabel::U) && unique(RingLabel::V) {
                self.step(i + 1);
            }
            return;
        }
        for l in RingLabel::ALL {
            self.ring.push(l);
            self.label(i, start, fresh, target);
            self.ring.pop();
        }
    }
}

impl Candidate {
    fn ring_len(&self) -> usize {
        self.ring.len()
    }

    /// Ring positions in boundary order: from `U` towards the zeros.
    fn boundary_order(&self) -> Vec<usize> {
        let n = self.ring_len();
        let u = self.ring.iter().position(|&l| l == RingLabel::U).expect("ring has U");
        let forward = self.ring[(u + 1) % n] == RingLabel::Zero;
        (0..n).map(|i| if forward { (u + i) % n } else { (u + n - i) % n }).collect()
    }

    /// Builds the triangulation; `zero` and `one` are the ring positions to
    /// be named `0` and `1`, the remaining ring vertices get `0_j` / `1_j` in
    /// boundary order.
    fn build(&self, zero: Option<usize>, one: Option<usize>) -> Triangulation {
        let n_ring = self.ring_len();
        let order = self.boundary_order();
        let mut ring_names = vec![String::new(); n_ring];
        let (mut zeros, mut ones) = (0, 0);
        for &r in &order {
            ring_names[r] = match self.ring[r] {
                RingLabel::U => "U".into(),
                RingLabel::V => "V".into(),
                RingLabel::Zero if Some(r) == zero => "0".into(),
                RingLabel::One if Some(r) == one => "1".into(),
                RingLabel::Zero => {
                    zeros += 1;
                    format!("0_{zeros}")
                }
                RingLabel::One => {
                    ones += 1;
                    format!("1_{ones}")
                }
            };
        }

        let mut vertices = vec![Vertex::new("X")];
        vertices.extend(self.link.iter().map(|&n| Vertex::new(n)));
        vertices.extend(ring_names.iter().map(Vertex::new));
        let link_index = |i: usize| 1 + (i % 8);
        let ring_index = |r: usize| 9 + (r % n_ring);

        let mut triangles = Vec::new();
        let mut p = 0;
        for i in 0..8 {
            triangles.push([0, link_index(i), link_index(i + 1)]);
            for j in 0..self.fans[i] {
                triangles.push([link_index(i), ring_index(p + j), ring_index(p + j + 1)]);
            }
            p += self.fans[i];
            triangles.push([link_index(i), ring_index(p), link_index(i + 1)]);
        }

        let by_label =
            |l: RingLabel| order.iter().filter(|&&r| self.ring[r] == l).map(|&r| ring_index(r)).collect::<Vec<_>>();
        let arcs =
            [by_label(RingLabel::U), by_label(RingLabel::Zero), by_label(RingLabel::V), by_label(RingLabel::One)];
        let mut t = Triangulation::new(vertices, triangles, arcs).expect("indices in range");
        let positions = tutte_embedding(&t);
        let rounded: Vec<[f64; 2]> =
            positions.iter().map(|p| [(p[0] * 1e6).round() / 1e6, (p[1] * 1e6).round() / 1e6]).collect();
        t.set_positions(&rounded);
        t
    }

    /// Value-coloured description, minimized over the two link directions.
    pub fn signature(&self) -> String {
        let n = self.ring_len();
        let describe = |link: Vec<usize>, fans: Vec<usize>, ring: Vec<RingLabel>| {
            let mut s = String::new();
            for (slot, e) in link.iter().zip(&fans) {
                let v = published_value(self.link[*slot]);
                s.push_str(&format!("{}:{e},", v));
            }
            s.push('|');
            s.extend(ring.iter().map(|l| l.code()));
            s
        };
        let forward = describe((0..8).collect(), self.fans.to_vec(), self.ring.clone());
        // Reversed: slot order 0, 7, 6, .., ring read backwards from slot 0's far end.
        let slots: Vec<usize> = (0..8).map(|i| (8 - i) % 8).collect();
        let fans: Vec<usize> = slots.iter().map(|&s| self.fans[s]).collect();
        let ring: Vec<RingLabel> = (0..n).map(|i| self.ring[(self.fans[0] + n - i) % n]).collect();
        let backward = describe(slots, fans, ring);
        forward.min(backward)
    }
}

/// Why a triangulation does or does not reproduce the published example.
#[derive(Debug, Clone, PartialEq)]
pub struct PublishedCheck {
    pub items: Vec<(&'static str, bool, String)>,
}

impl PublishedCheck {
    pub fn ok(&self) -> bool {
        self.items.iter().all(|(_, ok, _)| *ok)
    }
}

/// Checks a triangulation against every published quantity; `0` and `1` in
/// the published horizontal path match any P2 / P4 endpoint.
pub fn check_published(t: &Triangulation) -> PublishedCheck {
    let mut items = Vec::new();
    let fail = |what: &'static str, why: String| PublishedCheck { items: vec![(what, false, why)] };
    let network = match derive_network(t) {
        Ok(n) => n,
        Err(e) => return fail("network", e.to_string()),
    };
    let solution = match solve_network_exact(&network) {
        Ok(s) => s,
        Err(e) => return fail("solve", e.to_string()),
    };
    let values_ok = PUBLISHED_VALUES
        .iter()
        .all(|&(name, p, q)| network.index_of(name).is_some_and(|v| solution.values[v] == ratio(p, q)));
    items.push(("values", values_ok, String::new()));

    let energy = dirichlet_energy(&solution.values, &network).map(|e| e.value().clone());
    let energy_ok = energy.as_ref().is_ok_and(|e| *e == ratio(PUBLISHED_ENERGY.0, PUBLISHED_ENERGY.1));
    items.push(("energy", energy_ok, format!("{energy:?}")));

    let k = network_constants::<Rational>(&network).max_degree;
    items.push(("maxDegree", k == PUBLISHED_MAX_DEGREE, k.to_string()));

    let metric = gradient_metric(&solution, &network);
    let rules = ThickRules::default();
    let h = shortest_thick_path(&metric, &network, Orientation::Horizontal, rules);
    let v = shortest_thick_path(&metric, &network, Orientation::Vertical, rules);
    let (Ok(h), Ok(v)) = (h, v) else {
        items.push(("paths", false, "missing thick path".into()));
        return PublishedCheck { items };
    };
    let h_ids = h.ids(&network);
    let h_ok = h_ids.len() == 5 && h_ids[1..4] == PUBLISHED_HORIZONTAL_PATH[1..4];
    items.push(("horizontalPath", h_ok, h_ids.join(",")));
    items.push(("verticalPath", v.ids(&network) == PUBLISHED_VERTICAL_PATH, v.ids(&network).join(",")));
    let close = |a: f64, b: f64| (a - b).abs() <= PUBLISHED_TOLERANCE;
    items.push(("horizontalLength", close(h.length, PUBLISHED_HORIZONTAL_LENGTH), h.length.to_string()));
    items.push(("verticalLength", close(v.length, PUBLISHED_VERTICAL_LENGTH), v.length.to_string()));
    let i = energy.map(|e| crate::numeric::rational_to_f64(&e)).unwrap_or(f64::NAN);
    let gap = h.length * v.length / i - 1.0 / (k as f64).sqrt();
    items.push(("gap", close(gap, PUBLISHED_GAP), gap.to_string()));
    PublishedCheck { items }
}

/// Runs the full search.
pub fn reconstruct() -> Reconstruction {
    let orders = link_orders();
    let mut leaves = Vec::new();
    for link in &orders {
        let mut dfs = Dfs {
            link,
            link_values: link.iter().map(|n| published_value(n)).collect(),
            fans: [0; 8],
            ring: Vec::new(),
            leaves: Vec::new(),
        };
        dfs.step(0);
        leaves.extend(dfs.leaves);
    }

    let mut matches = Vec::new();
    for candidate in &leaves {
        let provisional = candidate.build(None, None);
        if !check_published(&provisional).ok() {
            continue;
        }
        // Name the endpoints of the shortest horizontal path `0` and `1`.
        let network = derive_network(&provisional).expect("checked");
        let solution = solve_network_exact(&network).expect("checked");
        let metric = gradient_metric(&solution, &network);
        let h =
            shortest_thick_path(&metric, &network, Orientation::Horizontal, ThickRules::default()).expect("checked");
        let ring_pos = |v: usize| v - 9;
        let (first, last) = (h.vertices[0], *h.vertices.last().unwrap());
        let triangulation = candidate.build(Some(ring_pos(first)), Some(ring_pos(last)));
        matches.push(Match { signature: candidate.signature(), candidate: candidate.clone(), triangulation });
    }
    Reconstruction { link_orders: orders.len(), solved_leaves: leaves.len(), matches }
}
