//! The diagonal-constrained SDP `max ⟨M, X⟩ s.t. X ⪰ 0, Xᵢᵢ = 1`, solved in
//! factored form `X = V Vᵀ` by Riemannian gradient ascent on the product of
//! spheres, with a dual certificate and exact enumeration oracles.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{gram_objective, DenseMatrix, Factor, Restrict, SymOperator};
use crate::scalar::{dot, Scalar};
use crate::seed::rng_from;
use crate::spectral::largest_eigenvalue;

/// Largest size accepted by [`inf_to_one_norm_bruteforce`].
pub const BRUTEFORCE_MAX_N: usize = 22;

const MAX_BACKTRACKS: usize = 40;
const NONMONOTONE_MEMORY: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdpOptions {
    /// Factor width; `None` selects `max(8, ⌈√(2n)⌉)`.
    pub rank: Option<usize>,
    pub restarts: usize,
    pub max_iters: usize,
    /// Relative objective change that counts as converged.
    pub tol: f64,
    /// Iterations over which the change is measured.
    pub window: usize,
    pub seed: u64,
    /// Compute the dual gap after solving.
    pub certify: bool,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self { rank: None, restarts: 5, max_iters: 4000, tol: 1e-9, window: 50, seed: 0, certify: true }
    }
}

impl SdpOptions {
    pub fn rank_for(&self, n: usize) -> usize {
        self.rank.unwrap_or_else(|| default_rank(n)).max(1)
    }
}

pub fn default_rank(n: usize) -> usize {
    8.max((2.0 * n as f64).sqrt().ceil() as usize)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution<T> {
    /// `⟨M, V Vᵀ⟩`.
    pub value: T,
    /// Unit-row factor `V`.
    pub factor: Factor<T>,
    /// Certified upper bound minus `value`, when requested.
    pub dual_gap: Option<T>,
    pub iterations: usize,
    pub converged: bool,
}

impl<T: Scalar> SdpSolution<T> {
    fn empty() -> Self {
        Self { value: T::zero(), factor: Factor::zeros(0, 1), dual_gap: Some(T::zero()), iterations: 0, converged: true }
    }
}

/// Solves the basic SDP of `m` with `opts.restarts` random starts and keeps the best.
pub fn solve_basic_sdp<T, O>(m: &O, opts: &SdpOptions) -> Result<SdpSolution<T>>
where
    T: Scalar,
    O: SymOperator<T> + ?Sized,
{
    if !m.is_symmetric() {
        return invalid("basic SDP requires a symmetric matrix");
    }
    let n = m.dim();
    if n == 0 {
        return Ok(SdpSolution::empty());
    }
    let r = opts.rank_for(n);
    let mut best: Option<(Factor<T>, T, usize, bool)> = None;
    let mut total_iters = 0;
    for restart in 0..opts.restarts.max(1) {
        let mut rng = rng_from(opts.seed, restart as u64);
        let v0 = Factor::random_unit(n, r, &mut rng);
        let (v, val, iters, conv) = ascend(m, v0, opts);
        total_iters += iters;
        if best.as_ref().is_none_or(|b| val > b.1) {
            best = Some((v, val, iters, conv));
        }
    }
    let (factor, value, _, converged) = best.expect("at least one restart");
    finish(m, factor, value, total_iters, converged, opts)
}

/// Single ascent run from a given factor; rows are normalized first.
pub fn solve_basic_sdp_from<T, O>(m: &O, init: Factor<T>, opts: &SdpOptions) -> Result<SdpSolution<T>>
where
    T: Scalar,
    O: SymOperator<T> + ?Sized,
{
    if !m.is_symmetric() {
        return invalid("basic SDP requires a symmetric matrix");
    }
    if init.rows() != m.dim() {
        return invalid(format!("initial factor has {} rows, matrix has dimension {}", init.rows(), m.dim()));
    }
    if m.dim() == 0 {
        return Ok(SdpSolution::empty());
    }
    let mut v0 = init;
    v0.normalize_rows();
    let (v, val, iters, conv) = ascend(m, v0, opts);
    finish(m, v, val, iters, conv, opts)
}

fn finish<T, O>(m: &O, factor: Factor<T>, value: T, iterations: usize, converged: bool, opts: &SdpOptions) -> Result<SdpSolution<T>>
where
    T: Scalar,
    O: SymOperator<T> + ?Sized,
{
    let dual_gap = opts.certify.then(|| certify_optimality_with_seed(m, &factor, opts.seed));
    Ok(SdpSolution { value, factor, dual_gap, iterations, converged })
}

/// Projects each row of `g` onto the tangent space of the sphere at the matching row of `v`.
fn riemannian_gradient<T: Scalar>(v: &Factor<T>, g: &Factor<T>, out: &mut Factor<T>) {
    for i in 0..v.rows() {
        let vi = v.row(i);
        let gi = g.row(i);
        let c = dot(vi, gi);
        for ((o, &a), &b) in out.row_mut(i).iter_mut().zip(gi).zip(vi) {
            *o = a - c * b;
        }
    }
}

/// Nonmonotone Barzilai–Borwein ascent with row renormalization as retraction.
fn ascend<T, O>(m: &O, mut v: Factor<T>, opts: &SdpOptions) -> (Factor<T>, T, usize, bool)
where
    T: Scalar,
    O: SymOperator<T> + ?Sized,
{
    let (n, r) = (v.rows(), v.cols());
    let mut g = Factor::zeros(n, r);
    m.apply_block(&v, &mut g);
    let mut f = v.frobenius_dot(&g);
    let mut grad = Factor::zeros(n, r);
    riemannian_gradient(&v, &g, &mut grad);

    let max_row = (0..n).map(|i| dot(g.row(i), g.row(i)).sqrt()).fold(T::zero(), T::max);
    let scale = max_row.max(T::of(1e-300));
    let mut step = T::of(0.5) / scale;
    let step_min = T::of(1e-12) / scale;
    let step_max = T::of(1e6) / scale;

    let mut history: Vec<T> = vec![f];
    let mut best = (v.clone(), f);
    let mut cand = Factor::zeros(n, r);
    let mut g_new = Factor::zeros(n, r);
    let mut grad_new = Factor::zeros(n, r);
    let tol = T::of(opts.tol);

    for it in 1..=opts.max_iters {
        let grad_norm_sq = grad.frobenius_dot(&grad);
        if grad_norm_sq.sqrt() <= T::of(1e-13) * (scale * T::of(n as f64).sqrt() + T::one()) {
            return (best.0, best.1, it - 1, true);
        }
        // Grippo–Lampariello–Lucidi reference: the worst of the recent values.
        let reference = history.iter().rev().take(NONMONOTONE_MEMORY).copied().fold(T::infinity(), T::min);
        let mut f_new = T::zero();
        let mut accepted = false;
        for _ in 0..MAX_BACKTRACKS {
            for ((c, &a), &b) in cand.as_mut_slice().iter_mut().zip(v.as_slice()).zip(grad.as_slice()) {
                *c = a + step * b;
            }
            cand.normalize_rows();
            m.apply_block(&cand, &mut g_new);
            f_new = cand.frobenius_dot(&g_new);
            if f_new >= reference + T::of(1e-4) * step * grad_norm_sq {
                accepted = true;
                break;
            }
            step = (step * T::of(0.5)).max(step_min);
            if step == step_min {
                break;
            }
        }
        if !accepted && f_new < f {
            return (best.0, best.1, it, false);
        }
        riemannian_gradient(&cand, &g_new, &mut grad_new);

        // BB1 step from the displacement and gradient change.
        let mut ss = T::zero();
        let mut sy = T::zero();
        for (((&c, &a), &gn), &go) in cand
            .as_slice()
            .iter()
            .zip(v.as_slice())
            .zip(grad_new.as_slice())
            .zip(grad.as_slice())
        {
            let s = c - a;
            ss += s * s;
            sy += s * (gn - go);
        }
        step = if sy < T::zero() { ss / -sy } else { step * T::of(2.0) };
        step = step.max(step_min).min(step_max);

        std::mem::swap(&mut v, &mut cand);
        std::mem::swap(&mut g, &mut g_new);
        std::mem::swap(&mut grad, &mut grad_new);
        f = f_new;
        if f > best.1 {
            best = (v.clone(), f);
        }
        history.push(f);
        if history.len() > opts.window {
            let old = history[history.len() - 1 - opts.window];
            if (f - old).abs() <= tol * f.abs().max(T::of(1e-12)) {
                return (best.0, best.1, it, true);
            }
        }
    }
    (best.0, best.1, opts.max_iters, false)
}

/// Upper bound on `SDP(M) − ⟨M, V Vᵀ⟩` from the dual point `λᵢ = (M X)ᵢᵢ`:
/// `n · max(0, λ_max(M − Diag λ)) + Σ λᵢ − value`.
pub fn certify_optimality<T, O>(m: &O, factor: &Factor<T>) -> T
where
    T: Scalar,
    O: SymOperator<T> + ?Sized,
{
    certify_optimality_with_seed(m, factor, 0)
}

fn certify_optimality_with_seed<T, O>(m: &O, factor: &Factor<T>, seed: u64) -> T
where
    T: Scalar,
    O: SymOperator<T> + ?Sized,
{
    let n = m.dim();
    if n == 0 {
        return T::zero();
    }
    let mut mv = Factor::zeros(n, factor.cols());
    m.apply_block(factor, &mut mv);
    let lambda: Vec<T> = (0..n).map(|i| dot(factor.row(i), mv.row(i))).collect();
    let value = factor.frobenius_dot(&mv);
    let shifted = DiagShift { base: m, diag: &lambda };
    let mut rng = rng_from(seed ^ 0xCE27_1F1E, n as u64);
    let top = largest_eigenvalue(&shifted, 1e-8, &mut rng).value;
    let dual = T::of(n as f64) * top.max(T::zero()) + lambda.iter().copied().sum::<T>();
    dual - value
}

/// `M − Diag(diag)`.
struct DiagShift<'a, O: ?Sized, T> {
    base: &'a O,
    diag: &'a [T],
}

impl<T: Scalar, O: SymOperator<T> + ?Sized> SymOperator<T> for DiagShift<'_, O, T> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn entry(&self, i: usize, j: usize) -> T {
        let e = self.base.entry(i, j);
        if i == j {
            e - self.diag[i]
        } else {
            e
        }
    }

    fn apply_block(&self, v: &Factor<T>, out: &mut Factor<T>) {
        self.base.apply_block(v, out);
        for (i, &l) in self.diag.iter().enumerate() {
            let vi = v.row(i).to_vec();
            for (o, x) in out.row_mut(i).iter_mut().zip(vi) {
                *o -= l * x;
            }
        }
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        self.base.apply(x, y);
        for ((yi, &xi), &l) in y.iter_mut().zip(x).zip(self.diag) {
            *yi -= l * xi;
        }
    }
}

/// The symmetrized block embedding `½ [[0, M], [Mᵀ, 0]]` of a square matrix.
pub fn grothendieck_embedding<T: Scalar>(m: &DenseMatrix<T>) -> DenseMatrix<T> {
    let n = m.n();
    let half = T::of(0.5);
    DenseMatrix::from_fn(2 * n, |i, j| match (i < n, j < n) {
        (true, false) => half * m.get(i, j - n),
        (false, true) => half * m.get(j, i - n),
        _ => T::zero(),
    })
}

/// `‖M‖_Gr = max Σᵢⱼ Mᵢⱼ ⟨uᵢ, vⱼ⟩` over unit vectors, via the basic SDP of the embedding.
///
/// With the ½ symmetrization the embedded SDP value equals the Grothendieck
/// norm exactly, so `SDP(M) ≤ ‖M‖_Gr` holds for symmetric `M`.
pub fn grothendieck_norm<T: Scalar>(m: &DenseMatrix<T>, opts: &SdpOptions) -> Result<T> {
    let emb = grothendieck_embedding(m);
    let opts = SdpOptions { certify: false, ..opts.clone() };
    Ok(solve_basic_sdp(&emb, &opts)?.value)
}

/// `max xᵀ M y` over sign vectors by enumerating `x` with a Gray code and
/// maximizing `y` coordinate-wise.
pub fn inf_to_one_norm_bruteforce<T: Scalar>(m: &DenseMatrix<T>) -> Result<T> {
    let n = m.n();
    if n > BRUTEFORCE_MAX_N {
        return Err(Error::BudgetExceeded { n, max: BRUTEFORCE_MAX_N });
    }
    if n == 0 {
        return Ok(T::zero());
    }
    // x₀ = +1 without loss of generality: (x, y) and (−x, −y) agree.
    let mut x = vec![T::one(); n];
    let mut col: Vec<T> = (0..n).map(|j| (0..n).map(|i| m.get(i, j)).sum()).collect();
    let eval = |col: &[T]| col.iter().map(|c| c.abs()).sum::<T>();
    let mut best = eval(&col);
    let free = n - 1;
    for k in 1u64..(1u64 << free) {
        let bit = k.trailing_zeros() as usize;
        let i = bit + 1;
        let two = T::of(2.0);
        let sign = -x[i];
        x[i] = sign;
        for (j, c) in col.iter_mut().enumerate() {
            *c += two * sign * m.get(i, j);
        }
        best = best.max(eval(&col));
    }
    Ok(best)
}

/// Basic SDP of the principal submatrix on `subset`.
pub fn sdp_submatrix<T, O>(m: &O, subset: &[usize], opts: &SdpOptions) -> Result<SdpSolution<T>>
where
    T: Scalar,
    O: SymOperator<T> + Restrict,
{
    if subset.iter().any(|&i| i >= m.dim()) {
        return invalid("subset index out of range");
    }
    if subset.is_empty() {
        return Ok(SdpSolution::empty());
    }
    solve_basic_sdp(&m.restrict(subset), opts)
}

/// Recomputes `⟨M, V Vᵀ⟩`.
pub fn objective<T: Scalar, O: SymOperator<T> + ?Sized>(m: &O, factor: &Factor<T>) -> T {
    gram_objective(m, factor)
}
