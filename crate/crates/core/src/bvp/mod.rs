//! The mixed boundary value problem: harmonic in F, zero on P2, `g` on P4 and
//! zero normal derivative on P1 and P3.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_traits::Zero;
use serde_json::{json, Value};
use thiserror::Error;

use crate::mesh::{ArcId, Network};
use crate::numeric::{weighted_diff_sum, Mode, Rational, Scalar};

mod modular;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BvpError {
    #[error("g must be positive")]
    NonPositiveG,
    #[error("linear system is singular (rank {rank} of {size})")]
    Singular { rank: usize, size: usize },
    #[error("float solve did not reach tolerance: residual {residual:e}, bound {bound:e}")]
    NonConvergence { residual: f64, bound: f64 },
}

/// Assembled equations. Rows follow `unknowns`: interior vertices carry the
/// harmonic equation, Neumann-arc vertices with an interior neighbor carry the
/// zero-flux equation. Dirichlet values are folded into `rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem<S> {
    pub unknowns: Vec<usize>,
    row_of: Vec<Option<usize>>,
    pub matrix: Vec<Vec<S>>,
    pub rhs: Vec<S>,
    pub fixed: BTreeMap<usize, S>,
    pub g: S,
}

impl<S: Scalar> LinearSystem<S> {
    pub fn size(&self) -> usize {
        self.unknowns.len()
    }

    pub fn row_of(&self, v: usize) -> Option<usize> {
        self.row_of[v]
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.size();
        (0..n).all(|i| (0..i).all(|j| self.matrix[i][j] == self.matrix[j][i]))
    }

    fn into_solution(self, solved: Vec<S>, network: &Network) -> HarmonicSolution<S> {
        let n = network.vertex_count();
        let mut values = vec![S::zero(); n];
        let mut defined = vec![false; n];
        for (&v, value) in &self.fixed {
            values[v] = value.clone();
            defined[v] = true;
        }
        for (row, &v) in self.unknowns.iter().enumerate() {
            values[v] = solved[row].clone();
            defined[v] = true;
        }
        let mut solution = HarmonicSolution { values, defined, g: self.g, residual: S::zero() };
        solution.residual = residual_certificate(&solution, network);
        solution
    }
}

/// Values of the boundary value function on the closure of F.
///
/// Neumann-arc vertices without interior neighbors carry no equation and are
/// left undefined (`defined[v] == false`, value zero).
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicSolution<S> {
    pub values: Vec<S>,
    pub defined: Vec<bool>,
    pub g: S,
    /// Largest violation of the four boundary value conditions, recomputed
    /// from the network independently of the solver.
    pub residual: S,
}

impl<S: Scalar> HarmonicSolution<S> {
    pub fn mode(&self) -> Mode {
        S::MODE
    }

    pub fn value(&self, v: usize) -> Option<&S> {
        self.defined[v].then(|| &self.values[v])
    }

    /// `0 - slack <= f <= g + slack` on every defined vertex.
    pub fn satisfies_maximum_principle(&self, slack: &S) -> bool {
        let lo = S::zero() - slack.clone();
        let hi = self.g.clone() + slack.clone();
        self.values.iter().zip(&self.defined).filter(|(_, &d)| d).all(|(f, _)| *f >= lo && *f <= hi)
    }

    pub fn to_json(&self, network: &Network) -> Value {
        let values: serde_json::Map<String, Value> = (0..network.vertex_count())
            .filter(|&v| self.defined[v])
            .map(|v| (network.id(v).to_string(), self.values[v].to_json()))
            .collect::<BTreeMap<_, _>>()
            .into_iter()
            .collect();
        json!({
            "g": self.g.to_json(),
            "mode": S::MODE,
            "values": values,
            "residual": self.residual.to_f64(),
        })
    }
}

/// Builds the linear system for Dirichlet constant `g`.
pub fn assemble<S: Scalar>(network: &Network, g: &S) -> Result<LinearSystem<S>, BvpError> {
    if *g <= S::zero() {
        return Err(BvpError::NonPositiveG);
    }
    let n = network.vertex_count();
    let mut unknowns: Vec<usize> = network.interior().iter().collect();
    unknowns
        .extend((0..n).filter(|&v| matches!(network.arc_of(v), Some(ArcId::P1 | ArcId::P3)) && network.degree(v) > 0));
    let mut row_of = vec![None; n];
    for (row, &v) in unknowns.iter().enumerate() {
        row_of[v] = Some(row);
    }
    let mut fixed = BTreeMap::new();
    for &v in network.arc(ArcId::P2) {
        fixed.insert(v, S::zero());
    }
    for &v in network.arc(ArcId::P4) {
        fixed.insert(v, g.clone());
    }

    let size = unknowns.len();
    let mut matrix = vec![vec![S::zero(); size]; size];
    let mut rhs = vec![S::zero(); size];
    for (row, &v) in unknowns.iter().enumerate() {
        for (w, edge) in network.network_neighbors(v) {
            let c: S = edge.conductance();
            matrix[row][row] = matrix[row][row].clone() + c.clone();
            if let Some(col) = row_of[w] {
                matrix[row][col] = matrix[row][col].clone() - c;
            } else if let Some(value) = fixed.get(&w) {
                rhs[row] = rhs[row].clone() + c * value.clone();
            }
        }
    }
    Ok(LinearSystem { unknowns, row_of, matrix, rhs, fixed, g: g.clone() })
}

fn bit_size(r: &Rational) -> u64 {
    r.numer().bits() + r.denom().bits()
}

/// Exact solve. The system is solved modulo word-sized primes and the
/// determinant and Cramer numerators are recovered by Chinese remaindering,
/// with Hadamard's bound fixing how many primes are needed. Rational
/// elimination takes over if that route fails (singular system or a result
/// that does not satisfy the equations).
pub fn solve_exact(system: LinearSystem<Rational>, network: &Network) -> Result<HarmonicSolution<Rational>, BvpError> {
    if let Some(solved) = modular::solve(&system.matrix, &system.rhs) {
        let solution = system.clone().into_solution(solved, network);
        if solution.residual.is_zero() {
            return Ok(solution);
        }
    }
    solve_exact_by_elimination(system, network)
}

/// Exact solve by rational Gaussian elimination with full pivoting on the
/// smallest entry. Slower than [`solve_exact`]; kept as its reference.
pub fn solve_exact_by_elimination(
    system: LinearSystem<Rational>,
    network: &Network,
) -> Result<HarmonicSolution<Rational>, BvpError> {
    let n = system.size();
    let mut a = system.matrix.clone();
    let mut b = system.rhs.clone();
    let mut col_perm: Vec<usize> = (0..n).collect();

    for k in 0..n {
        // Smallest nonzero entry (by bit size) of the trailing block.
        let mut pivot: Option<(usize, usize, u64)> = None;
        for (i, row) in a.iter().enumerate().skip(k) {
            for (j, entry) in row.iter().enumerate().skip(k) {
                if !entry.is_zero() {
                    let size = bit_size(entry);
                    if pivot.is_none_or(|(_, _, best)| size < best) {
                        pivot = Some((i, j, size));
                    }
                }
            }
        }
        let Some((pi, pj, _)) = pivot else {
            return Err(BvpError::Singular { rank: k, size: n });
        };
        a.swap(k, pi);
        b.swap(k, pi);
        if pj != k {
            for row in a.iter_mut() {
                row.swap(k, pj);
            }
            col_perm.swap(k, pj);
        }

        let (upper, lower) = a.split_at_mut(k + 1);
        let pivot_row = &upper[k];
        let pivot_value = pivot_row[k].clone();
        for (offset, row) in lower.iter_mut().enumerate() {
            if row[k].is_zero() {
                continue;
            }
            let factor = &row[k] / &pivot_value;
            for j in k..n {
                if !pivot_row[j].is_zero() {
                    row[j] = &row[j] - &factor * &pivot_row[j];
                }
            }
            let i = k + 1 + offset;
            b[i] = &b[i] - &factor * &b[k];
        }
    }

    let mut permuted = vec![Rational::zero(); n];
    for k in (0..n).rev() {
        let mut acc = b[k].clone();
        for j in k + 1..n {
            if !a[k][j].is_zero() {
                acc -= &a[k][j] * &permuted[j];
            }
        }
        permuted[k] = acc / &a[k][k];
    }
    let mut solved = vec![Rational::zero(); n];
    for (k, &col) in col_perm.iter().enumerate() {
        solved[col] = permuted[k].clone();
    }
    Ok(system.into_solution(solved, network))
}

/// Float solve: Cholesky factorization of the (symmetric positive definite)
/// system followed by iterative refinement.
pub fn solve_float(system: LinearSystem<f64>, network: &Network, tol: f64) -> Result<HarmonicSolution<f64>, BvpError> {
    let n = system.size();
    let a = DMatrix::from_fn(n, n, |i, j| system.matrix[i][j]);
    let b = DVector::from_column_slice(&system.rhs);
    let chol = a.clone().cholesky().ok_or(BvpError::Singular { rank: 0, size: n })?;
    let mut x = chol.solve(&b);
    let scale = 1.0 + b.amax();
    for _ in 0..4 {
        let r = &b - &a * &x;
        if r.amax() <= f64::EPSILON * scale {
            break;
        }
        x += chol.solve(&r);
    }
    let solution = system.into_solution(x.iter().copied().collect(), network);
    let bound = tol * scale;
    if solution.residual.is_nan() || solution.residual > bound {
        return Err(BvpError::NonConvergence { residual: solution.residual, bound });
    }
    Ok(solution)
}

/// Convenience: assemble and solve exactly with the network's own `g`.
pub fn solve_network_exact(network: &Network) -> Result<HarmonicSolution<Rational>, BvpError> {
    solve_exact(assemble(network, network.g())?, network)
}

/// Convenience: assemble and solve in floating point with the network's `g`.
pub fn solve_network_float(network: &Network, tol: f64) -> Result<HarmonicSolution<f64>, BvpError> {
    let g = crate::numeric::rational_to_f64(network.g());
    solve_float(assemble(network, &g)?, network, tol)
}

/// Solver dispatch by scalar type.
pub trait Solve: Scalar {
    /// Solves with the network's `g`; `tol` is ignored in exact mode.
    fn solve(network: &Network, tol: f64) -> Result<HarmonicSolution<Self>, BvpError>;
}

impl Solve for Rational {
    fn solve(network: &Network, _tol: f64) -> Result<HarmonicSolution<Self>, BvpError> {
        solve_network_exact(network)
    }
}

impl Solve for f64 {
    fn solve(network: &Network, tol: f64) -> Result<HarmonicSolution<Self>, BvpError> {
        solve_network_float(network, tol)
    }
}

/// Potential of `u` at `x`: weighted sum of differences to its network
/// neighbors (interior neighbors only when `x` is a boundary vertex).
pub fn laplacian<S: Scalar>(u: &[S], network: &Network, x: usize) -> S {
    let weights: Vec<(usize, S)> = network.network_neighbors(x).map(|(y, e)| (y, e.conductance())).collect();
    weighted_diff_sum(weights.iter().map(|(y, c)| (c, &u[x], &u[*y])))
}

/// Largest violation of the four boundary value conditions, computed from the
/// raw network data.
pub fn residual_certificate<S: Scalar>(solution: &HarmonicSolution<S>, network: &Network) -> S {
    let u = &solution.values;
    let mut worst = S::zero();
    let mut note = |r: S| {
        let r = r.abs_val();
        if r > worst {
            worst = r;
        }
    };
    for v in 0..network.vertex_count() {
        let needs_value = network.is_interior(v) || network.degree(v) > 0;
        if needs_value && !solution.defined[v] {
            note(S::from_rational(&Rational::from_integer(BigInt::from(i64::MAX))));
            continue;
        }
        match network.arc_of(v) {
            None => note(laplacian(u, network, v)),
            Some(ArcId::P2) => note(u[v].clone()),
            Some(ArcId::P4) => note(u[v].clone() - solution.g.clone()),
            Some(ArcId::P1 | ArcId::P3) if solution.defined[v] => note(laplacian(u, network, v)),
            Some(_) => {}
        }
    }
    worst
}
