//! Energies, differentials, normal derivatives and the gradient metric.
//!
//! Vectors attached to a vertex (gradients, normal vector derivatives,
//! conductance vectors) are measured in the inner product weighted by `1/c`:
//! `(a, b) = sum a_i b_i / c_i`. With unit conductances this is the Euclidean
//! product.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::bvp::{laplacian, HarmonicSolution};
use crate::mesh::{Network, VertexSet};
use crate::numeric::{weighted_diff_sum, weighted_square_sum, Mode, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PotentialError {
    #[error("`{0}`-`{1}` is not a network edge")]
    NotAnEdge(String, String),
    #[error("vertex `{0}` is not interior")]
    NotInterior(String),
    #[error("vertex `{0}` is not on the vertex boundary of the reference set")]
    NotOnBoundary(String),
    #[error("vertex `{0}` has no neighbors in the reference set")]
    EmptyNeighborhood(String),
    #[error(
        "energy formulas disagree: edge sum {edge_sum}, potential sum {potential_sum}, directed sum {directed_sum}"
    )]
    EnergyMismatch { edge_sum: f64, potential_sum: f64, directed_sum: f64 },
}

/// A vector indexed by the directed edges leaving one vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalVector<S> {
    pub neighbors: Vec<usize>,
    pub components: Vec<S>,
    pub conductances: Vec<S>,
}

impl<S: Scalar> LocalVector<S> {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn inner(&self, other: &LocalVector<S>) -> S {
        debug_assert_eq!(self.neighbors, other.neighbors);
        self.components
            .iter()
            .zip(&other.components)
            .zip(&self.conductances)
            .fold(S::zero(), |acc, ((a, b), c)| acc + a.clone() * b.clone() / c.clone())
    }

    pub fn weighted_norm_sq(&self) -> S {
        self.inner(self)
    }

    pub fn weighted_norm(&self) -> f64 {
        self.weighted_norm_sq().sqrt_f64()
    }
}

/// Which neighbors of a vertex a conductance vector ranges over.
#[derive(Debug, Clone, Copy)]
pub enum Side<'a> {
    /// `x` in F, neighbors in the closure of F.
    Interior,
    /// `x` on the vertex boundary of F, neighbors in F.
    Boundary,
    /// `x` on the vertex boundary of the given set, neighbors in the set.
    Region(&'a VertexSet),
}

/// `du[x, y] = c(x, y) (u(y) - u(x))` on a directed network edge.
pub fn differential<S: Scalar>(u: &[S], network: &Network, x: usize, y: usize) -> Result<S, PotentialError> {
    match network.edge_between(x, y) {
        Some(e) if e.incident => Ok(e.conductance::<S>() * (u[y].clone() - u[x].clone())),
        _ => Err(PotentialError::NotAnEdge(network.id(x).into(), network.id(y).into())),
    }
}

/// The differential restricted to the edges leaving an interior vertex.
pub fn restricted_gradient<S: Scalar>(u: &[S], network: &Network, x: usize) -> Result<LocalVector<S>, PotentialError> {
    if !network.is_interior(x) {
        return Err(PotentialError::NotInterior(network.id(x).into()));
    }
    let mut v = LocalVector { neighbors: Vec::new(), components: Vec::new(), conductances: Vec::new() };
    for (y, e) in network.neighbors(x) {
        let c: S = e.conductance();
        v.neighbors.push(y);
        v.components.push(c.clone() * (u[y].clone() - u[x].clone()));
        v.conductances.push(c);
    }
    Ok(v)
}

fn reference<'a>(network: &'a Network, set: Option<&'a VertexSet>) -> &'a VertexSet {
    set.unwrap_or_else(|| network.interior())
}

/// Components `c(x, y_i) (u(x) - u(y_i))` over the neighbors of `x` inside the
/// reference set (F by default), in rotation order.
pub fn normal_vector_derivative<S: Scalar>(
    u: &[S],
    network: &Network,
    x: usize,
    set: Option<&VertexSet>,
) -> Result<LocalVector<S>, PotentialError> {
    let set = reference(network, set);
    if set.contains(x) {
        return Err(PotentialError::NotOnBoundary(network.id(x).into()));
    }
    let mut v = LocalVector { neighbors: Vec::new(), components: Vec::new(), conductances: Vec::new() };
    for (y, e) in network.neighbors_within(x, set) {
        let c: S = e.conductance();
        v.neighbors.push(y);
        v.components.push(c.clone() * (u[x].clone() - u[y].clone()));
        v.conductances.push(c);
    }
    Ok(v)
}

/// Conductances on the edges from `x` to its class-appropriate neighbors,
/// ordered like [`normal_vector_derivative`]. Its weighted squared norm is the
/// sum of those conductances.
pub fn conductance_vector<S: Scalar>(
    network: &Network,
    x: usize,
    side: Side<'_>,
) -> Result<LocalVector<S>, PotentialError> {
    let set = match side {
        Side::Interior => {
            if !network.is_interior(x) {
                return Err(PotentialError::NotInterior(network.id(x).into()));
            }
            network.interior()
        }
        Side::Boundary => {
            if network.is_interior(x) {
                return Err(PotentialError::NotOnBoundary(network.id(x).into()));
            }
            network.interior()
        }
        Side::Region(region) => {
            if region.contains(x) {
                return Err(PotentialError::NotOnBoundary(network.id(x).into()));
            }
            region
        }
    };
    let mut v = LocalVector { neighbors: Vec::new(), components: Vec::new(), conductances: Vec::new() };
    for (y, e) in network.neighbors_within(x, set) {
        let c: S = e.conductance();
        v.neighbors.push(y);
        v.components.push(c.clone());
        v.conductances.push(c);
    }
    if v.is_empty() {
        return Err(PotentialError::EmptyNeighborhood(network.id(x).into()));
    }
    Ok(v)
}

/// Flux of `u` out of the reference set (F by default) at a vertex outside
/// it: `sum over neighbors y in the set of c(x, y) (u(x) - u(y))`.
pub fn normal_derivative<S: Scalar>(u: &[S], network: &Network, x: usize, set: Option<&VertexSet>) -> S {
    let set = reference(network, set);
    let weights: Vec<(usize, S)> =
        network.neighbors_within(x, set).filter(|&(y, _)| set.contains(y)).map(|(y, e)| (y, e.conductance())).collect();
    weighted_diff_sum(weights.iter().map(|(y, c)| (c, &u[x], &u[*y])))
}

/// The three expressions of the Dirichlet energy.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyBreakdown<S> {
    /// `sum over edges of c (u(x) - u(y))^2`.
    pub edge_sum: S,
    /// `sum over the closure of (potential of u) * u`.
    pub potential_sum: S,
    /// Half the sum of squared differential norms over directed edges.
    pub directed_sum: S,
}

impl<S: Scalar> EnergyBreakdown<S> {
    pub fn value(&self) -> &S {
        &self.edge_sum
    }
}

/// Dirichlet energy of `u`, cross-checked against its two other expressions
/// (exactly in exact mode, to 1e-12 relative in float mode).
pub fn dirichlet_energy<S: Scalar>(u: &[S], network: &Network) -> Result<EnergyBreakdown<S>, PotentialError> {
    let edges: Vec<(usize, usize, S)> =
        network.incident_edges().map(|e| (e.ends.0, e.ends.1, e.conductance())).collect();
    let edge_sum = weighted_square_sum(edges.iter().map(|(x, y, c)| (c, &u[*x], &u[*y])));
    let mut scale = edge_sum.to_f64().abs();

    // Grouped by vertex, every network edge is seen from both ends.
    let per_vertex: Vec<S> = (0..network.vertex_count()).map(|x| local_square_sum(u, network, x)).collect();
    let directed_sum = per_vertex.into_iter().fold(S::zero(), |acc, r| acc + r) / (S::one() + S::one());

    let potentials: Vec<S> = (0..network.vertex_count()).map(|x| laplacian(u, network, x)).collect();
    let (zero, one) = (S::zero(), S::one());
    let potential_sum = S::bilinear_sum(potentials.iter().zip(u).map(|(p, ux)| [ux, p, &zero, &one, &zero]));
    scale += potentials.iter().zip(u).map(|(p, ux)| (p.to_f64() * ux.to_f64()).abs()).sum::<f64>();

    let agree = |a: &S, b: &S| match S::MODE {
        Mode::Exact => a == b,
        Mode::Float => (a.to_f64() - b.to_f64()).abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE),
    };
    if !agree(&edge_sum, &potential_sum) || !agree(&edge_sum, &directed_sum) {
        return Err(PotentialError::EnergyMismatch {
            edge_sum: edge_sum.to_f64(),
            potential_sum: potential_sum.to_f64(),
            directed_sum: directed_sum.to_f64(),
        });
    }
    Ok(EnergyBreakdown { edge_sum, potential_sum, directed_sum })
}

/// Vertex weights induced by a solution: the norm of the restricted gradient
/// on F and of the normal vector derivative on the vertex boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientMetric<S> {
    /// Exact (in exact mode) squared weights.
    pub rho_sq: Vec<S>,
    pub rho: Vec<f64>,
}

impl<S: Scalar> GradientMetric<S> {
    pub fn rho(&self, v: usize) -> f64 {
        self.rho[v]
    }

    pub fn to_json(&self, network: &Network, constants: &NetworkConstants<S>) -> Value {
        let mut rho = BTreeMap::new();
        let mut rho_sq = BTreeMap::new();
        for v in 0..network.vertex_count() {
            rho.insert(network.id(v).to_string(), Value::from(self.rho[v]));
            rho_sq.insert(network.id(v).to_string(), self.rho_sq[v].to_json());
        }
        json!({
            "mode": S::MODE,
            "rho": rho.into_iter().collect::<Map<_, _>>(),
            "rhoSquared": rho_sq.into_iter().collect::<Map<_, _>>(),
            "m": constants.m(),
            "M": constants.big_m(),
            "k": constants.max_degree,
        })
    }
}

/// `sum c (u(x) - u(y))^2` over the network neighbors of `x`: the squared
/// weighted norm of the restricted gradient (interior `x`) or of the normal
/// vector derivative (boundary `x`).
fn local_square_sum<S: Scalar>(u: &[S], network: &Network, x: usize) -> S {
    let weights: Vec<(usize, S)> = network.network_neighbors(x).map(|(y, e)| (y, e.conductance())).collect();
    weighted_square_sum(weights.iter().map(|(y, c)| (c, &u[x], &u[*y])))
}

pub fn gradient_metric<S: Scalar>(solution: &HarmonicSolution<S>, network: &Network) -> GradientMetric<S> {
    let u = &solution.values;
    let rho_sq: Vec<S> = (0..network.vertex_count()).map(|x| local_square_sum(u, network, x)).collect();
    let rho = rho_sq.iter().map(|r| r.sqrt_f64()).collect();
    GradientMetric { rho_sq, rho }
}

/// The constants entering the length bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConstants<S> {
    /// Smallest conductance on a network edge (the square of `m`).
    pub min_conductance: S,
    /// Largest squared conductance-vector norm (the square of `M`).
    pub max_conductance_norm_sq: S,
    /// Largest network degree.
    pub max_degree: usize,
}

impl<S: Scalar> NetworkConstants<S> {
    /// `m`: the smallest square root of a conductance.
    pub fn m(&self) -> f64 {
        self.min_conductance.sqrt_f64()
    }

    /// `M`: the largest conductance-vector norm.
    pub fn big_m(&self) -> f64 {
        self.max_conductance_norm_sq.sqrt_f64()
    }

    /// `(m / M)^2`, exact in exact mode.
    pub fn ratio_sq(&self) -> S {
        self.min_conductance.clone() / self.max_conductance_norm_sq.clone()
    }
}

pub fn network_constants<S: Scalar>(network: &Network) -> NetworkConstants<S> {
    let mut min_conductance: Option<S> = None;
    for e in network.incident_edges() {
        let c: S = e.conductance();
        if min_conductance.as_ref().is_none_or(|m| c < *m) {
            min_conductance = Some(c);
        }
    }
    let mut max_norm = S::zero();
    for x in 0..network.vertex_count() {
        let side = if network.is_interior(x) { Side::Interior } else { Side::Boundary };
        if let Ok(cv) = conductance_vector::<S>(network, x, side) {
            let norm = cv.weighted_norm_sq();
            if norm > max_norm {
                max_norm = norm;
            }
        }
    }
    NetworkConstants {
        min_conductance: min_conductance.expect("network has an incident edge"),
        max_conductance_norm_sq: max_norm,
        max_degree: network.max_degree(),
    }
}

/// Both sides of the first Green identity over a reference set.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenCheck<S> {
    pub lhs: S,
    pub rhs: S,
    pub residual: S,
}

/// `sum_E c du dv = sum_set (potential of u) v + sum_boundary (normal derivative of u) v`
/// over a reference set (F by default).
pub fn green_identity<S: Scalar>(u: &[S], v: &[S], network: &Network, set: Option<&VertexSet>) -> GreenCheck<S> {
    let set = reference(network, set);
    let mut lhs = S::zero();
    for e in network.edges() {
        let (x, y) = e.ends;
        if set.contains(x) || set.contains(y) {
            lhs = lhs + e.conductance::<S>() * (u[x].clone() - u[y].clone()) * (v[x].clone() - v[y].clone());
        }
    }
    let mut rhs = S::zero();
    for x in set.iter() {
        let potential = network
            .neighbors(x)
            .fold(S::zero(), |acc, (y, e)| acc + e.conductance::<S>() * (u[x].clone() - u[y].clone()));
        rhs = rhs + potential * v[x].clone();
    }
    for x in network.vertex_boundary_of(set).iter() {
        rhs = rhs + normal_derivative(u, network, x, Some(set)) * v[x].clone();
    }
    let residual = lhs.clone() - rhs.clone();
    GreenCheck { lhs, rhs, residual }
}
