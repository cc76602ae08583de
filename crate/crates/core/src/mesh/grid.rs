use std::str::FromStr;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{Triangulation, Vertex};
use crate::numeric::{int, ratio, Rational};

/// How each unit cell is split into two triangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiagonalRule {
    /// Bottom-left to top-right.
    BlTr,
    /// Bottom-right to top-left.
    BrTl,
    /// Bottom-left to top-right on cells with odd `i + j`, the other diagonal
    /// on even cells.
    Alternating,
}

impl DiagonalRule {
    pub const ALL: [DiagonalRule; 3] = [DiagonalRule::BlTr, DiagonalRule::BrTl, DiagonalRule::Alternating];

    fn bl_tr(self, i: usize, j: usize) -> bool {
        match self {
            DiagonalRule::BlTr => true,
            DiagonalRule::BrTl => false,
            DiagonalRule::Alternating => (i + j) % 2 == 1,
        }
    }
}

impl FromStr for DiagonalRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bl-tr" => Ok(DiagonalRule::BlTr),
            "br-tl" => Ok(DiagonalRule::BrTl),
            "alternating" => Ok(DiagonalRule::Alternating),
            other => Err(format!("unknown diagonal rule `{other}` (bl-tr|br-tl|alternating)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConductanceSampler {
    Constant(Rational),
    /// Log-uniform on `[min, max]`, rounded to multiples of 1/1000 so the
    /// result is an exact, short rational.
    LogUniform {
        seed: u64,
        min: f64,
        max: f64,
    },
}

impl ConductanceSampler {
    /// Log-uniform on `[0.1, 10]`.
    pub fn log_uniform(seed: u64) -> Self {
        ConductanceSampler::LogUniform { seed, min: 0.1, max: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    pub diagonal: DiagonalRule,
    pub conductance: ConductanceSampler,
    /// Boundary-cycle positions of the four corners. The cycle starts at the
    /// bottom-left vertex and runs counter-clockwise; P2 spans
    /// `[k0, k1]`, P3 `(k1, k2)`, P4 `[k2, k3]` and P1 the rest.
    pub arc_split: Option<[usize; 4]>,
}

impl GridSpec {
    pub fn new(rows: usize, cols: usize, diagonal: DiagonalRule) -> Self {
        GridSpec { rows, cols, diagonal, conductance: ConductanceSampler::Constant(int(1)), arc_split: None }
    }

    pub fn with_conductance(mut self, sampler: ConductanceSampler) -> Self {
        self.conductance = sampler;
        self
    }

    pub fn with_arc_split(mut self, split: [usize; 4]) -> Self {
        self.arc_split = Some(split);
        self
    }

    /// A uniformly random valid arc split, drawn by rejection.
    pub fn with_random_arc_split(self, seed: u64) -> Self {
        let len = self.boundary_len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let mut k = [0usize; 4];
            for slot in k.iter_mut() {
                *slot = rng.random_range(0..len);
            }
            k.sort_unstable();
            if split_is_valid(k, len) {
                return self.with_arc_split(k);
            }
        }
    }

    pub fn boundary_len(&self) -> usize {
        2 * (self.rows + self.cols) - 4
    }

    /// Corners at the four grid corners: bottom row is P2, right column P3,
    /// top row P4, left column P1.
    pub fn default_split(&self) -> [usize; 4] {
        let (w, h) = (self.cols - 1, self.rows - 1);
        [0, w, w + h, 2 * w + h]
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid must be at least 3x3, got {rows}x{cols}")]
    Dimensions { rows: usize, cols: usize },
    #[error("invalid arc split {0:?}")]
    ArcSplit([usize; 4]),
    #[error("invalid conductance range [{0}, {1}]")]
    ConductanceRange(f64, f64),
}

/// Every arc gets at least one vertex and P2, P4 at least two.
fn split_is_valid([k0, k1, k2, k3]: [usize; 4], len: usize) -> bool {
    k0 < k1 && k1 + 2 <= k2 && k2 < k3 && k3 < len && len - k3 + k0 >= 2
}

pub fn grid_id(x: usize, y: usize) -> String {
    format!("({x},{y})")
}

/// Integer-grid triangulation of a `rows x cols` rectangle.
pub fn generate_grid(spec: &GridSpec) -> Result<Triangulation, GridError> {
    let (rows, cols) = (spec.rows, spec.cols);
    if rows < 3 || cols < 3 {
        return Err(GridError::Dimensions { rows, cols });
    }
    let at = |x: usize, y: usize| y * cols + x;

    let mut vertices = Vec::with_capacity(rows * cols);
    for y in 0..rows {
        for x in 0..cols {
            vertices.push(Vertex::at(grid_id(x, y), x as f64, y as f64));
        }
    }

    let mut triangles = Vec::with_capacity(2 * (rows - 1) * (cols - 1));
    for j in 0..rows - 1 {
        for i in 0..cols - 1 {
            let (bl, br, tl, tr) = (at(i, j), at(i + 1, j), at(i, j + 1), at(i + 1, j + 1));
            if spec.diagonal.bl_tr(i, j) {
                triangles.push([bl, br, tr]);
                triangles.push([bl, tr, tl]);
            } else {
                triangles.push([bl, br, tl]);
                triangles.push([br, tr, tl]);
            }
        }
    }

    let mut cycle = Vec::with_capacity(spec.boundary_len());
    cycle.extend((0..cols).map(|x| at(x, 0)));
    cycle.extend((1..rows).map(|y| at(cols - 1, y)));
    cycle.extend((0..cols - 1).rev().map(|x| at(x, rows - 1)));
    cycle.extend((1..rows - 1).rev().map(|y| at(0, y)));

    let split = spec.arc_split.unwrap_or_else(|| spec.default_split());
    let [k0, k1, k2, k3] = split;
    let len = cycle.len();
    if !split_is_valid(split, len) {
        return Err(GridError::ArcSplit(split));
    }
    let p2 = cycle[k0..=k1].to_vec();
    let p3 = cycle[k1 + 1..k2].to_vec();
    let p4 = cycle[k2..=k3].to_vec();
    let p1: Vec<usize> = cycle[k3 + 1..].iter().chain(&cycle[..k0]).copied().collect();

    let mut t = Triangulation::new(vertices, triangles, [p1, p2, p3, p4]).expect("grid vertex ids are unique");
    t.corners = [cycle[k0], cycle[k1], cycle[k2], cycle[k3]];

    match &spec.conductance {
        ConductanceSampler::Constant(c) => t.default_conductance = c.clone(),
        &ConductanceSampler::LogUniform { seed, min, max } => {
            if !(min > 0.0 && max >= min && max.is_finite()) {
                return Err(GridError::ConductanceRange(min, max));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (lo, hi) = (min.ln(), max.ln());
            for (a, b) in t.edges() {
                let u: f64 = rng.random();
                let sample = (lo + u * (hi - lo)).exp();
                let millis = ((sample * 1000.0).round() as i64).max(1);
                t.set_conductance(a, b, ratio(millis, 1000));
            }
        }
    }
    Ok(t)
}
