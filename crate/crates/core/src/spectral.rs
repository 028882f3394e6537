//! Operator-norm estimation and high-degree pruning.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::linalg::{Restrict, SymOperator};
use crate::model::{center_adjacency, Graph};
use crate::scalar::{dot, norm, Scalar};
use crate::seed::rng_from;

pub const DEFAULT_NORM_TOL: f64 = 1e-4;
const MAX_POWER_ITERS: usize = 20_000;
const STABLE_ITERS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct NormEstimate<T> {
    pub value: T,
    /// Unit vector in the dominant eigenspace of `M²`.
    pub vector: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
}

fn random_unit<T: Scalar, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<T> {
    let mut x: Vec<T> = (0..n)
        .map(|_| {
            let g: f64 = StandardNormal.sample(rng);
            T::of(g)
        })
        .collect();
    let nrm = norm(&x);
    x.iter_mut().for_each(|v| *v /= nrm);
    x
}

/// Estimates `‖M‖_op` by power iteration on `M²` from a random start.
///
/// The estimate `‖M x‖` for unit `x` never exceeds the true norm; iteration
/// stops once its relative change stays below `tol / 100` for ten steps.
pub fn operator_norm<T, O, R>(m: &O, tol: f64, rng: &mut R) -> NormEstimate<T>
where
    T: Scalar,
    O: SymOperator<T> + ?Sized,
    R: Rng + ?Sized,
{
    let n = m.dim();
    if n == 0 {
        return NormEstimate { value: T::zero(), vector: Vec::new(), iterations: 0, converged: true };
    }
    let mut x = random_unit::<T, _>(n, rng);
    let mut y = vec![T::zero(); n];
    let mut z = vec![T::zero(); n];
    let mut est = T::zero();
    let mut stable = 0;
    let thresh = T::of(tol * 1e-2);
    for it in 1..=MAX_POWER_ITERS {
        m.apply(&x, &mut y);
        let new_est = norm(&y);
        m.apply(&y, &mut z);
        let zn = norm(&z);
        if zn == T::zero() {
            return NormEstimate { value: new_est, vector: x, iterations: it, converged: true };
        }
        let change = (new_est - est).abs();
        est = new_est;
        x.iter_mut().zip(&z).for_each(|(a, &b)| *a = b / zn);
        if change <= thresh * est {
            stable += 1;
            if stable >= STABLE_ITERS {
                return NormEstimate { value: est, vector: x, iterations: it, converged: true };
            }
        } else {
            stable = 0;
        }
    }
    NormEstimate { value: est, vector: x, iterations: MAX_POWER_ITERS, converged: false }
}

/// Largest algebraic eigenvalue of `M`, via power iteration on `M + c I`
/// with `c` an upper bound on `‖M‖_op`. Returns a Rayleigh quotient, which
/// is a lower bound on the true value.
pub fn largest_eigenvalue<T, O, R>(m: &O, tol: f64, rng: &mut R) -> NormEstimate<T>
where
    T: Scalar,
    O: SymOperator<T> + ?Sized,
    R: Rng + ?Sized,
{
    let n = m.dim();
    if n == 0 {
        return NormEstimate { value: T::zero(), vector: Vec::new(), iterations: 0, converged: true };
    }
    let bound = operator_norm(m, tol, rng);
    let c = bound.value * T::of(1.05) + T::of(1e-12);
    let mut x = random_unit::<T, _>(n, rng);
    let mut y = vec![T::zero(); n];
    let mut rq = T::neg_infinity();
    let mut stable = 0;
    let thresh = T::of(tol * 1e-2);
    for it in 1..=MAX_POWER_ITERS {
        m.apply(&x, &mut y);
        let new_rq = dot(&x, &y);
        y.iter_mut().zip(&x).for_each(|(a, &b)| *a += c * b);
        let yn = norm(&y);
        if yn == T::zero() {
            return NormEstimate { value: new_rq, vector: x, iterations: it, converged: true };
        }
        let change = (new_rq - rq).abs();
        rq = new_rq;
        x.iter_mut().zip(&y).for_each(|(a, &b)| *a = b / yn);
        if change <= thresh * (rq.abs() + c) {
            stable += 1;
            if stable >= STABLE_ITERS {
                return NormEstimate { value: rq, vector: x, iterations: it, converged: true };
            }
        } else {
            stable = 0;
        }
    }
    NormEstimate { value: rq, vector: x, iterations: MAX_POWER_ITERS, converged: false }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PruneResult<T> {
    pub kept: Vec<usize>,
    pub removed: Vec<usize>,
    pub removed_fraction: f64,
    pub norm_after: T,
}

/// Zeroes out every vertex with more than `20 · alpha` neighbors and reports
/// the operator norm of the remaining block of `A − (d/n) J`.
///
/// Deterministic: the power-iteration start is seeded from the graph size.
pub fn prune_high_degree<T: Scalar>(graph: &Graph, alpha: f64, d: f64) -> PruneResult<T> {
    let cap = 20.0 * alpha;
    let (kept, removed): (Vec<usize>, Vec<usize>) = (0..graph.n()).partition(|&i| graph.degree(i) as f64 <= cap);
    let centered = center_adjacency::<T>(graph, d).restrict(&kept);
    let mut rng = rng_from(0x5EC7_2A1, graph.n() as u64);
    let est = operator_norm(&centered, DEFAULT_NORM_TOL, &mut rng);
    PruneResult {
        removed_fraction: removed.len() as f64 / graph.n().max(1) as f64,
        kept,
        removed,
        norm_after: est.value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_and_diagonal_norms() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let id = DenseMatrix::<f64>::identity(10);
        let e = operator_norm(&id, 1e-4, &mut rng);
        assert!((e.value - 1.0).abs() < 1e-4);
        let d = DenseMatrix::<f64>::from_fn(10, |i, j| if i != j { 0.0 } else if i == 0 { 3.0 } else { 1.0 });
        let e = operator_norm(&d, 1e-4, &mut rng);
        assert!((e.value - 3.0).abs() < 3e-4);
        assert!(e.converged);
    }

    #[test]
    fn negative_dominant_eigenvalue() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = DenseMatrix::<f64>::from_fn(5, |i, j| if i != j { 0.0 } else if i == 2 { -4.0 } else { 1.0 });
        assert!((operator_norm(&d, 1e-4, &mut rng).value - 4.0).abs() < 4e-4);
        let top = largest_eigenvalue(&d, 1e-6, &mut rng);
        assert!((top.value - 1.0).abs() < 1e-4, "{}", top.value);
    }

    #[test]
    fn star_hub_is_pruned() {
        let n = 50;
        let g = Graph::from_edges(n, (1..n).map(|j| (0, j))).unwrap();
        let r: PruneResult<f64> = prune_high_degree(&g, 1.0, 2.0);
        assert_eq!(r.removed, vec![0]);
        assert_eq!(r.kept.len(), n - 1);
        let r: PruneResult<f64> = prune_high_degree(&g, 10.0, 2.0);
        assert!(r.removed.is_empty());
        assert_eq!(r.removed_fraction, 0.0);
    }
}
