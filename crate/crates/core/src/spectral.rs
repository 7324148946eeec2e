//! Checks the link between connection centers and the dominant eigenvector:
//! the element-wise square root of `diag(Sᵏ)` points along `u₁` as `k` grows,
//! with `u₁[j] / u₁[i] → sqrt(Sᵏ[j][j] / Sᵏ[i][i])`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{CceError, Result};
use crate::evolution::PowerState;
use crate::matrix::SquareMatrix;
use crate::similarity::SimilarityMatrix;

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Relative gap under which two component eigenvalues count as equal.
const EIGENVALUE_TIE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenEstimate {
    /// Unit-norm, sign-normalized so its components sum to a nonnegative value.
    pub vector: Vec<f64>,
    /// Rayleigh quotient of `vector`.
    pub eigenvalue: f64,
    pub iterations: usize,
    /// `‖S·u − λ·u‖` for the returned unit vector.
    pub residual: f64,
    pub converged: bool,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Power iteration from the normalized all-ones vector.
pub fn principal_eigenvector(s: &SimilarityMatrix, tol: f64, max_iter: usize) -> Result<EigenEstimate> {
    let n = s.order();
    let start = vec![1.0 / (n as f64).sqrt(); n];
    power_iteration(s.matrix(), &start, tol, max_iter)
}

/// Power iteration from an arbitrary nonzero start vector.
///
/// Stops once `‖S·u − λ·u‖ <= tol · max(1, |λ|)`. Hitting `max_iter` is
/// reported through [`EigenEstimate::converged`], not as an error.
pub fn power_iteration(m: &SquareMatrix, start: &[f64], tol: f64, max_iter: usize) -> Result<EigenEstimate> {
    if !(tol > 0.0) {
        return Err(CceError::Parameter(format!("tolerance must be positive, got {tol}")));
    }
    if m.is_zero() {
        return Err(CceError::ZeroMatrix);
    }
    let start_norm = norm(start);
    if start.len() != m.order() || !(start_norm > 0.0) {
        return Err(CceError::Parameter("start vector must be nonzero with matching length".into()));
    }
    let mut v: Vec<f64> = start.iter().map(|x| x / start_norm).collect();
    let mut iterations = 0;
    loop {
        let w = m.mul_vec(&v);
        let lambda = dot(&v, &w);
        let residual = norm(&w.iter().zip(&v).map(|(a, b)| a - lambda * b).collect::<Vec<_>>());
        let converged = residual <= tol * lambda.abs().max(1.0);
        if converged || iterations >= max_iter {
            if v.iter().sum::<f64>() < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            return Ok(EigenEstimate {
                vector: v,
                eigenvalue: lambda,
                iterations,
                residual,
                converged,
            });
        }
        let wn = norm(&w);
        if wn == 0.0 {
            // start vector lies in the null space
            return Err(CceError::Parameter("start vector is annihilated by the matrix".into()));
        }
        v = w.into_iter().map(|x| x / wn).collect();
        iterations += 1;
    }
}

/// `sqrt(diag(M))` scaled to unit Euclidean norm.
pub fn diag_sqrt_direction(m: &SquareMatrix) -> Result<Vec<f64>> {
    let diag = m.diagonal();
    if let Some(i) = diag.iter().position(|&d| d < 0.0 || !d.is_finite()) {
        return Err(CceError::Input(format!("diagonal entry {i} is {}", diag[i])));
    }
    let roots: Vec<f64> = diag.iter().map(|d| d.sqrt()).collect();
    let len = norm(&roots);
    if len == 0.0 {
        return Err(CceError::ZeroDiagonal);
    }
    Ok(roots.into_iter().map(|x| x / len).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NonConvergence {
    /// Two or more disconnected components share the largest eigenvalue.
    DominantNotSimple,
    /// The graph is disconnected; `u₁` vanishes outside one component.
    Disconnected,
    EigenNotConverged,
}

impl fmt::Display for NonConvergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DominantNotSimple => f.write_str("non-convergent: dominant eigenvalue not simple"),
            Self::Disconnected => f.write_str("non-convergent: similarity graph is disconnected"),
            Self::EigenNotConverged => f.write_str("non-convergent: power iteration hit max_iter"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentComparison {
    pub index: usize,
    pub eigenvector: f64,
    pub diag_sqrt: f64,
    pub abs_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub k: usize,
    /// `max |u[j]/u[i] − sqrt(Sᵏ[j][j]/Sᵏ[i][i])|` over `i` with `u[i] > 0`
    /// and `Sᵏ[i][i] > 0`. `None` when no such `i` exists.
    pub max_ratio_deviation: Option<f64>,
    pub components: Vec<ComponentComparison>,
    pub eigen: EigenEstimate,
    /// `None` when the comparison is expected to converge.
    pub non_convergent: Option<NonConvergence>,
}

impl TheoremReport {
    pub fn status_message(&self) -> String {
        match self.non_convergent {
            None => "convergent".to_string(),
            Some(reason) => reason.to_string(),
        }
    }
}

/// Connected components of the off-diagonal nonzero pattern.
pub fn connected_components(m: &SquareMatrix) -> Vec<Vec<usize>> {
    let n = m.order();
    let mut seen = vec![false; n];
    let mut components = Vec::new();
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut stack = vec![root];
        let mut comp = Vec::new();
        while let Some(i) = stack.pop() {
            comp.push(i);
            for (j, &x) in m.row(i).iter().enumerate() {
                if x != 0.0 && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        comp.sort_unstable();
        components.push(comp);
    }
    components
}

fn classify_disconnected(m: &SquareMatrix, components: &[Vec<usize>]) -> Result<NonConvergence> {
    let mut lambdas = Vec::with_capacity(components.len());
    for comp in components {
        let sub = m.submatrix(comp);
        let lambda = if sub.is_zero() {
            0.0
        } else {
            let start = vec![1.0; comp.len()];
            power_iteration(&sub, &start, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER)?.eigenvalue
        };
        lambdas.push(lambda);
    }
    let top = lambdas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ties = lambdas
        .iter()
        .filter(|&&l| (top - l).abs() <= EIGENVALUE_TIE * top.abs().max(1.0))
        .count();
    Ok(if ties > 1 {
        NonConvergence::DominantNotSimple
    } else {
        NonConvergence::Disconnected
    })
}

/// Compares the dominant eigenvector of `s` with `sqrt(diag(Sᵏ))`.
pub fn verify_theorem(s: &SimilarityMatrix, k: usize) -> Result<TheoremReport> {
    verify_theorem_with(s, k, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER)
}

pub fn verify_theorem_with(s: &SimilarityMatrix, k: usize, tol: f64, max_iter: usize) -> Result<TheoremReport> {
    if k == 0 {
        return Err(CceError::Parameter("k must be at least 1".into()));
    }
    let eigen = principal_eigenvector(s, tol, max_iter)?;
    let state = PowerState::at_power(Arc::new(s.clone()), k);
    let direction = diag_sqrt_direction(state.matrix())?;
    let u = &eigen.vector;

    let mut deviation: Option<f64> = None;
    for i in 0..u.len() {
        if u[i] <= 0.0 || direction[i] <= 0.0 {
            continue;
        }
        for j in 0..u.len() {
            let d = (u[j] / u[i] - direction[j] / direction[i]).abs();
            deviation = Some(deviation.map_or(d, |m| m.max(d)));
        }
    }

    let components = u
        .iter()
        .zip(&direction)
        .enumerate()
        .map(|(index, (&e, &d))| ComponentComparison {
            index,
            eigenvector: e,
            diag_sqrt: d,
            abs_diff: (e - d).abs(),
        })
        .collect();

    let graph = connected_components(s.matrix());
    let non_convergent = if graph.len() > 1 {
        Some(classify_disconnected(s.matrix(), &graph)?)
    } else if !eigen.converged {
        Some(NonConvergence::EigenNotConverged)
    } else {
        None
    };

    Ok(TheoremReport {
        k,
        max_ratio_deviation: deviation,
        components,
        eigen,
        non_convergent,
    })
}
