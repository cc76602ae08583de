//! Discrete potential theory on triangulated quadrilaterals.
//!
//! The pipeline: a [`mesh::Triangulation`] with four boundary arcs induces a
//! conductance [`mesh::Network`]; [`bvp`] solves the mixed Dirichlet/Neumann
//! problem (0 on P2, `g` on P4, zero flux on P1 and P3); [`potential`] turns
//! the solution into energies and the gradient metric; [`paths`] finds the
//! shortest thick paths under that metric; [`bounds`] checks the
//! length/energy inequalities and every intermediate identity behind them.

pub mod bounds;
pub mod bvp;
pub mod example;
pub mod mesh;
pub mod numeric;
pub mod paths;
pub mod potential;
pub mod svg;
