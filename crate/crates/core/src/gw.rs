//! GED as a fused OT / Gromov-Wasserstein quadratic program, solved by
//! conditional gradient over the Birkhoff polytope.
//!
//! With `g1` padded to `n = n2` nodes, the objective is
//!
//! ```text
//! f(pi) = <pi, M> + 1/2 <pi, L (x) pi>,   L[i,j,k,l] = (A1[i,j] - A2[k,l])^2
//! ```
//!
//! which equals the edit count of the induced path whenever `pi` is a
//! permutation matrix.

use ndarray::Array2;
use thiserror::Error;

use crate::graph::{label_mismatch_matrix, GraphPair};
use crate::ot::{lsap_min, OtError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GwError {
    #[error("dimension mismatch: expected {expected}x{expected}, got {rows}x{cols}")]
    Dimension {
        expected: usize,
        rows: usize,
        cols: usize,
    },
    #[error(transparent)]
    Ot(#[from] OtError),
}

/// How [`tensor_apply`] evaluates `L (x) B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TensorMode {
    /// Direct four-index sum, O(n^4).
    Naive,
    /// Squared-loss decomposition into matrix products, O(n^3).
    #[default]
    Fast,
}

#[derive(Debug, Clone)]
pub struct GwProblem {
    pub m: Array2<f64>,
    pub a1: Array2<f64>,
    pub a2: Array2<f64>,
    pub mode: TensorMode,
}

impl GwProblem {
    /// Builds the padded `n x n` problem for a canonical pair.
    pub fn from_pair(pair: &GraphPair) -> Self {
        let n = pair.n();
        let padded = pair
            .g1
            .pad_with_dummies(n)
            .expect("canonical pair has n1 <= n2");
        GwProblem {
            m: label_mismatch_matrix(pair),
            a1: padded.adjacency(),
            a2: pair.g2.adjacency(),
            mode: TensorMode::default(),
        }
    }

    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    fn check(&self, b: &Array2<f64>) -> Result<(), GwError> {
        let n = self.n();
        if b.dim() != (n, n) {
            return Err(GwError::Dimension {
                expected: n,
                rows: b.nrows(),
                cols: b.ncols(),
            });
        }
        Ok(())
    }

    fn apply(&self, b: &Array2<f64>) -> Array2<f64> {
        match self.mode {
            TensorMode::Naive => tensor_naive(&self.a1, &self.a2, b),
            TensorMode::Fast => tensor_fast(&self.a1, &self.a2, b),
        }
    }
}

fn frobenius(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn tensor_naive(a1: &Array2<f64>, a2: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let n = b.nrows();
    Array2::from_shape_fn((n, n), |(i, k)| {
        let mut acc = 0.0;
        for j in 0..n {
            for l in 0..n {
                let d = a1[[i, j]] - a2[[k, l]];
                acc += d * d * b[[j, l]];
            }
        }
        acc
    })
}

// sum_{j,l} (a_ij - b_kl)^2 B_jl
//   = (A1∘A1 · B1)_i + (A2∘A2 · B^T 1)_k - 2 (A1 B A2^T)_ik
fn tensor_fast(a1: &Array2<f64>, a2: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let rows = b.sum_axis(ndarray::Axis(1));
    let cols = b.sum_axis(ndarray::Axis(0));
    let left = a1.mapv(|x| x * x).dot(&rows);
    let right = a2.mapv(|x| x * x).dot(&cols);
    let mut out = a1.dot(b).dot(&a2.t());
    out.mapv_inplace(|x| -2.0 * x);
    for ((i, k), x) in out.indexed_iter_mut() {
        *x += left[i] + right[k];
    }
    out
}

/// `(sum_{j,l} L[i,j,k,l] B[j,l])_{i,k}`.
pub fn tensor_apply(
    a1: &Array2<f64>,
    a2: &Array2<f64>,
    b: &Array2<f64>,
    mode: TensorMode,
) -> Result<Array2<f64>, GwError> {
    let n = a1.nrows();
    for m in [a1, a2, b] {
        if m.dim() != (n, n) {
            return Err(GwError::Dimension {
                expected: n,
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
    }
    Ok(match mode {
        TensorMode::Naive => tensor_naive(a1, a2, b),
        TensorMode::Fast => tensor_fast(a1, a2, b),
    })
}

pub fn gw_objective(pi: &Array2<f64>, prob: &GwProblem) -> Result<f64, GwError> {
    prob.check(pi)?;
    Ok(frobenius(pi, &prob.m) + 0.5 * frobenius(pi, &prob.apply(pi)))
}

/// Vertex of the Birkhoff polytope minimizing `<G, pi>`: a permutation matrix
/// from the exact assignment solver (lexicographically smallest on ties).
pub fn cg_step_direction(g: &Array2<f64>) -> Result<Array2<f64>, GwError> {
    let (perm, _) = lsap_min(g, &[], &[])?;
    let mut dir = Array2::zeros(g.dim());
    for (i, j) in perm.pairs() {
        dir[[i, j]] = 1.0;
    }
    Ok(dir)
}

/// Exact minimizer over `gamma in [0, 1]` of `f(pi + gamma (dir - pi))`.
///
/// Along the segment the objective is `a gamma^2 + b gamma + c` with
/// `a = 1/2 <D, L (x) D>` and `b = <D, M> + <D, L (x) pi>`, using that
/// `L (x) .` is self-adjoint for symmetric adjacency matrices.
pub fn line_search(pi: &Array2<f64>, dir: &Array2<f64>, prob: &GwProblem) -> Result<f64, GwError> {
    prob.check(pi)?;
    prob.check(dir)?;
    let delta = dir - pi;
    if delta.iter().all(|&x| x == 0.0) {
        return Ok(0.0);
    }
    Ok(step_from(&delta, &prob.apply(pi), prob))
}

fn step_from(delta: &Array2<f64>, l_pi: &Array2<f64>, prob: &GwProblem) -> f64 {
    let a = 0.5 * frobenius(delta, &prob.apply(delta));
    let b = frobenius(delta, &prob.m) + frobenius(delta, l_pi);
    if a > 0.0 {
        (-b / (2.0 * a)).clamp(0.0, 1.0)
    } else if a + b < 0.0 {
        1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GwConfig {
    pub max_iter: usize,
    /// Stop when `(f_prev - f) <= tol * max(|f_prev|, 1)`.
    pub tol: f64,
    pub mode: TensorMode,
}

impl Default for GwConfig {
    fn default() -> Self {
        GwConfig {
            max_iter: 1000,
            tol: 1e-8,
            mode: TensorMode::Fast,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GwSolution {
    /// `n x n` coupling including dummy rows.
    pub coupling: Array2<f64>,
    pub ged_estimate: f64,
    /// Objective at the start point and after every accepted step.
    pub objective_history: Vec<f64>,
    pub step_sizes: Vec<f64>,
}

impl GwSolution {
    /// The first `n1` rows, i.e. the coupling between real nodes of `g1` and
    /// all nodes of `g2`.
    pub fn strip_dummies(&self, n1: usize) -> Array2<f64> {
        self.coupling.slice(ndarray::s![..n1, ..]).to_owned()
    }
}

/// Conditional gradient on the GEDGW objective from the uniform coupling.
pub fn gedgw_solve(pair: &GraphPair, cfg: &GwConfig) -> Result<GwSolution, GwError> {
    let mut prob = GwProblem::from_pair(pair);
    prob.mode = cfg.mode;
    solve_problem(&prob, cfg)
}

pub fn solve_problem(prob: &GwProblem, cfg: &GwConfig) -> Result<GwSolution, GwError> {
    let n = prob.n();
    if n == 0 {
        return Ok(GwSolution {
            coupling: Array2::zeros((0, 0)),
            ged_estimate: 0.0,
            objective_history: vec![0.0],
            step_sizes: Vec::new(),
        });
    }
    let mut pi = Array2::from_elem((n, n), 1.0 / n as f64);
    let mut l_pi = prob.apply(&pi);
    let mut value = frobenius(&pi, &prob.m) + 0.5 * frobenius(&pi, &l_pi);
    let mut history = vec![value];
    let mut steps = Vec::new();

    for _ in 0..cfg.max_iter {
        let grad = &prob.m + &l_pi;
        let dir = cg_step_direction(&grad)?;
        let delta = &dir - &pi;
        // Frank-Wolfe gap: no vertex improves the linearization.
        if frobenius(&grad, &delta) >= -1e-12 {
            break;
        }
        let gamma = step_from(&delta, &l_pi, prob);
        if gamma == 0.0 {
            break;
        }
        let next = &pi + &(gamma * &delta);
        let l_next = prob.apply(&next);
        let next_value = frobenius(&next, &prob.m) + 0.5 * frobenius(&next, &l_next);
        if next_value > value {
            // Rounding pushed the exact minimizer uphill; stay put.
            break;
        }
        let decrease = value - next_value;
        pi = next;
        l_pi = l_next;
        value = next_value;
        history.push(value);
        steps.push(gamma);
        if decrease <= cfg.tol * history[history.len() - 2].abs().max(1.0) {
            break;
        }
    }

    Ok(GwSolution {
        coupling: pi,
        ged_estimate: value.max(0.0) + 0.0,
        objective_history: history,
        step_sizes: steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{canonicalize_pair, Graph, Label};
    use crate::path::{ep_gen, NodeMatching};

    fn labeled(ls: &[&str], edges: &[(usize, usize)]) -> Graph {
        Graph::new(ls.iter().map(|&s| Label::new(s)).collect(), edges).unwrap()
    }

    fn worked_pair() -> GraphPair {
        canonicalize_pair(
            labeled(&["A", "B", "C"], &[(0, 1), (1, 2)]),
            labeled(&["A", "B", "D", "E"], &[(0, 1), (2, 3)]),
        )
    }

    fn perm_matrix(map: &[usize]) -> Array2<f64> {
        let mut p = Array2::zeros((map.len(), map.len()));
        for (i, &j) in map.iter().enumerate() {
            p[[i, j]] = 1.0;
        }
        p
    }

    #[test]
    fn objective_at_identity_on_identical_graphs() {
        let g = labeled(&["A", "B", "A"], &[(0, 1), (1, 2)]);
        let prob = GwProblem::from_pair(&canonicalize_pair(g.clone(), g));
        assert_eq!(gw_objective(&perm_matrix(&[0, 1, 2]), &prob).unwrap(), 0.0);
    }

    #[test]
    fn objective_on_worked_pair() {
        let pair = worked_pair();
        let prob = GwProblem::from_pair(&pair);
        let pi = perm_matrix(&[0, 1, 2, 3]);
        assert_eq!(gw_objective(&pi, &prob).unwrap(), 4.0);
        let path = ep_gen(&pair, &NodeMatching::new(vec![0, 1, 2])).unwrap();
        assert_eq!(path.len(), 4);
    }

    #[test]
    fn tensor_of_zero_is_zero() {
        let g = Graph::unlabeled(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let a = g.adjacency();
        let b = Array2::zeros((4, 4));
        for mode in [TensorMode::Naive, TensorMode::Fast] {
            assert!(tensor_apply(&a, &a, &b, mode)
                .unwrap()
                .iter()
                .all(|&x| x == 0.0));
        }
    }

    #[test]
    fn tensor_identity_has_zero_diagonal_on_same_structure() {
        let g = Graph::unlabeled(4, &[(0, 1), (1, 2), (1, 3)]).unwrap();
        let a = g.adjacency();
        let id = perm_matrix(&[0, 1, 2, 3]);
        let out = tensor_apply(&a, &a, &id, TensorMode::Fast).unwrap();
        for i in 0..4 {
            assert!(out[[i, i]].abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_errors() {
        let a = Array2::zeros((3, 3));
        let b = Array2::zeros((2, 2));
        assert!(matches!(
            tensor_apply(&a, &a, &b, TensorMode::Fast),
            Err(GwError::Dimension { .. })
        ));
        let prob = GwProblem::from_pair(&worked_pair());
        assert!(gw_objective(&b, &prob).is_err());
    }

    #[test]
    fn direction_examples() {
        let mut g = Array2::from_elem((3, 3), 5.0);
        for i in 0..3 {
            g[[i, i]] = 1.0;
        }
        assert_eq!(cg_step_direction(&g).unwrap(), perm_matrix(&[0, 1, 2]));
        let flat = Array2::from_elem((3, 3), 2.0);
        assert_eq!(cg_step_direction(&flat).unwrap(), perm_matrix(&[0, 1, 2]));
    }

    #[test]
    fn line_search_degenerate_direction() {
        let prob = GwProblem::from_pair(&worked_pair());
        let pi = Array2::from_elem((4, 4), 0.25);
        assert_eq!(line_search(&pi, &pi, &prob).unwrap(), 0.0);
    }

    #[test]
    fn line_search_beats_grid() {
        let prob = GwProblem::from_pair(&worked_pair());
        let pi = Array2::from_elem((4, 4), 0.25);
        for target in [[0, 1, 2, 3], [3, 2, 1, 0], [1, 0, 3, 2], [2, 3, 0, 1]] {
            let dir = perm_matrix(&target);
            let gamma = line_search(&pi, &dir, &prob).unwrap();
            assert!((0.0..=1.0).contains(&gamma));
            let at = |t: f64| gw_objective(&(&pi + &(t * (&dir - &pi))), &prob).unwrap();
            let best = at(gamma);
            for k in 0..=100 {
                assert!(best <= at(k as f64 / 100.0) + 1e-12);
            }
        }
    }

    #[test]
    fn solve_identical_graphs_reaches_zero() {
        let g = labeled(&["C", "O", "C", "N"], &[(0, 1), (1, 2), (2, 3)]);
        let sol = gedgw_solve(&canonicalize_pair(g.clone(), g), &GwConfig::default()).unwrap();
        assert!(sol.ged_estimate < 1e-9);
        for x in sol.coupling.iter() {
            assert!(*x < 1e-9 || (*x - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn solve_worked_pair() {
        let sol = gedgw_solve(&worked_pair(), &GwConfig::default()).unwrap();
        assert!(sol.ged_estimate >= 0.0);
        assert!(sol.ged_estimate <= 4.0 + 1e-9);
        for w in sol.objective_history.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }
}
