//! Planted-partition instances: labels, SBM graphs, centered adjacency
//! operators and Z₂ synchronization matrices.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Result};
use crate::linalg::{DenseMatrix, Factor, Restrict, SymOperator};
use crate::scalar::Scalar;

/// Pair-wise Bernoulli sampling is used up to this size, geometric skipping above.
pub const PAIRWISE_SAMPLING_MAX_N: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SbmParams {
    pub n: usize,
    pub d: f64,
    pub eps: f64,
}

impl SbmParams {
    pub fn new(n: usize, d: f64, eps: f64) -> Result<Self> {
        let p = Self { n, d, eps };
        p.validate()?;
        Ok(p)
    }

    /// Parameters with `eps² d − 1 = delta`.
    pub fn from_delta(n: usize, d: f64, delta: f64) -> Result<Self> {
        if 1.0 + delta < 0.0 {
            return invalid(format!("delta = {delta} gives eps² < 0"));
        }
        Self::new(n, d, ((1.0 + delta) / d).sqrt())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return invalid(format!("n = {} < 2", self.n));
        }
        if !(self.d > 0.0) || !self.d.is_finite() {
            return invalid(format!("average degree d = {} must be positive", self.d));
        }
        if !(0.0..1.0).contains(&self.eps) {
            return invalid(format!("eps = {} outside [0, 1)", self.eps));
        }
        if (1.0 + self.eps) * self.d / self.n as f64 > 1.0 {
            return invalid(format!(
                "edge probability (1 + eps) d / n = {} exceeds 1",
                (1.0 + self.eps) * self.d / self.n as f64
            ));
        }
        Ok(())
    }

    /// `eps² d − 1`; positive above the Kesten–Stigum threshold.
    pub fn delta(&self) -> f64 {
        self.eps * self.eps * self.d - 1.0
    }
}

/// A ±1 community assignment.
#[derive(Debug, Clone, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct LabelVector(Vec<i8>);

impl LabelVector {
    pub fn new(entries: Vec<i8>) -> Result<Self> {
        if let Some(bad) = entries.iter().find(|&&x| x != 1 && x != -1) {
            return invalid(format!("label entry {bad} is not ±1"));
        }
        Ok(Self(entries))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    #[inline]
    pub fn get(&self, i: usize) -> i8 {
        self.0[i]
    }

    pub fn sum(&self) -> i64 {
        self.0.iter().map(|&x| x as i64).sum()
    }

    pub fn to_scalars<T: Scalar>(&self) -> Vec<T> {
        self.0.iter().map(|&x| T::of(x as f64)).collect()
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|&x| -x).collect())
    }

    pub fn select(&self, idx: &[usize]) -> Self {
        Self(idx.iter().map(|&i| self.0[i]).collect())
    }

    pub fn into_inner(self) -> Vec<i8> {
        self.0
    }
}

/// Uniformly random balanced labels; odd `n` gets `⌊n/2⌋` positive entries.
pub fn balanced_labels<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<LabelVector> {
    if n < 2 {
        return invalid(format!("n = {n} < 2"));
    }
    let mut v: Vec<i8> = (0..n).map(|i| if i < n / 2 { 1 } else { -1 }).collect();
    v.shuffle(rng);
    Ok(LabelVector(v))
}

/// Undirected simple graph: sorted edge list plus CSR adjacency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    degrees: Vec<usize>,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Self::from_sorted(n, Vec::new())
    }

    /// Builds a graph from unordered pairs. Self-loops, duplicates and
    /// out-of-range endpoints are rejected.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut list = Vec::new();
        for (u, v) in edges {
            if u == v {
                return invalid(format!("self-loop at vertex {u}"));
            }
            if u >= n || v >= n {
                return invalid(format!("edge ({u}, {v}) out of range for n = {n}"));
            }
            list.push((u.min(v), u.max(v)));
        }
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return invalid(format!("duplicate edge {:?}", w[0]));
        }
        Ok(Self::from_sorted(n, list))
    }

    /// `edges` must be sorted, deduplicated and satisfy `u < v < n`.
    pub(crate) fn from_sorted(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut degrees = vec![0usize; n];
        for &(u, v) in &edges {
            degrees[u] += 1;
            degrees[v] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for &d in &degrees {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut neighbors = vec![0usize; 2 * edges.len()];
        // Edges are sorted by (u, v), so each vertex's list comes out sorted:
        // lower neighbors arrive through their own (w, i) edges first.
        for &(u, v) in &edges {
            neighbors[fill[u]] = v;
            fill[u] += 1;
            neighbors[fill[v]] = u;
            fill[v] += 1;
        }
        for i in 0..n {
            neighbors[offsets[i]..offsets[i + 1]].sort_unstable();
        }
        Self { n, edges, degrees, offsets, neighbors }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    #[inline]
    pub fn degree(&self, i: usize) -> usize {
        self.degrees[i]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn max_degree(&self) -> usize {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v && self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Subgraph induced on `idx`, with vertex `idx[k]` renamed to `k`.
    pub fn induced(&self, idx: &[usize]) -> Graph {
        let mut map = vec![usize::MAX; self.n];
        for (k, &i) in idx.iter().enumerate() {
            map[i] = k;
        }
        let mut edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .filter_map(|&(u, v)| {
                let (a, b) = (map[u], map[v]);
                (a != usize::MAX && b != usize::MAX).then(|| (a.min(b), a.max(b)))
            })
            .collect();
        edges.sort_unstable();
        Graph::from_sorted(idx.len(), edges)
    }

    /// Edges with both endpoints in the indicator set, in original indexing.
    pub fn edges_within(&self, keep: &[bool]) -> Vec<(usize, usize)> {
        self.edges.iter().copied().filter(|&(u, v)| keep[u] && keep[v]).collect()
    }
}

/// Samples `G ~ SBM(n, d, eps)` with the given labels.
pub fn sample_sbm<R: Rng + ?Sized>(params: &SbmParams, labels: &LabelVector, rng: &mut R) -> Result<Graph> {
    params.validate()?;
    let n = params.n;
    if labels.len() != n {
        return invalid(format!("labels have length {}, expected {n}", labels.len()));
    }
    let base = params.d / n as f64;
    let p_same = (1.0 + params.eps) * base;
    let p_diff = (1.0 - params.eps) * base;
    let x = labels.as_slice();
    let mut edges = Vec::new();
    if n <= PAIRWISE_SAMPLING_MAX_N {
        for i in 0..n {
            for j in i + 1..n {
                let p = if x[i] == x[j] { p_same } else { p_diff };
                if rng.random::<f64>() < p {
                    edges.push((i, j));
                }
            }
        }
    } else {
        // Geometric skipping at rate p_same, thinned to p_diff on cross pairs.
        let p_max = p_same.max(p_diff);
        let thin = if p_max > 0.0 { p_diff.min(p_same) / p_max } else { 0.0 };
        let mut carry = geometric_skip(p_max, rng);
        for i in 0..n {
            let len = n - 1 - i;
            let mut k = carry;
            while k < len {
                let j = i + 1 + k;
                let accept = if (x[i] == x[j]) == (p_same >= p_diff) { true } else { rng.random::<f64>() < thin };
                if accept {
                    edges.push((i, j));
                }
                k = k.saturating_add(1).saturating_add(geometric_skip(p_max, rng));
            }
            carry = k - len;
        }
    }
    Ok(Graph::from_sorted(n, edges))
}

/// Number of failures before the next success of a Bernoulli(p) sequence.
fn geometric_skip<R: Rng + ?Sized>(p: f64, rng: &mut R) -> usize {
    if p <= 0.0 {
        return usize::MAX / 2;
    }
    if p >= 1.0 {
        return 0;
    }
    let u: f64 = 1.0 - rng.random::<f64>();
    let k = (u.ln() / (1.0 - p).ln()).floor();
    if k >= (usize::MAX / 4) as f64 {
        usize::MAX / 4
    } else {
        k as usize
    }
}

/// `A − shift · J` with `A` a 0/1 adjacency matrix, evaluated lazily.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredMatrix<T> {
    graph: Graph,
    shift: T,
}

impl<T: Scalar> CenteredMatrix<T> {
    pub fn new(graph: Graph, shift: T) -> Self {
        Self { graph, shift }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn shift(&self) -> T {
        self.shift
    }

    /// Dense copy, for tests and small oracles.
    pub fn to_dense(&self) -> DenseMatrix<T> {
        DenseMatrix::from_fn(self.graph.n(), |i, j| self.entry(i, j))
    }
}

/// Centers `graph` by its expected edge density: `Ã = A − (d/n) J`.
pub fn center_adjacency<T: Scalar>(graph: &Graph, d: f64) -> CenteredMatrix<T> {
    CenteredMatrix::new(graph.clone(), T::of(d / graph.n() as f64))
}

impl<T: Scalar> SymOperator<T> for CenteredMatrix<T> {
    fn dim(&self) -> usize {
        self.graph.n()
    }

    fn entry(&self, i: usize, j: usize) -> T {
        if self.graph.has_edge(i, j) {
            T::one() - self.shift
        } else {
            -self.shift
        }
    }

    fn apply_block(&self, v: &Factor<T>, out: &mut Factor<T>) {
        let r = v.cols();
        let sums = v.column_sums();
        let vs = v.as_slice();
        for i in 0..self.graph.n() {
            let o = out.row_mut(i);
            for (a, &s) in o.iter_mut().zip(&sums) {
                *a = -self.shift * s;
            }
            for &j in self.graph.neighbors(i) {
                for (a, &b) in o.iter_mut().zip(&vs[j * r..(j + 1) * r]) {
                    *a += b;
                }
            }
        }
    }

    fn row_norm_sq(&self, i: usize) -> T {
        let deg = T::of(self.graph.degree(i) as f64);
        let n = T::of(self.graph.n() as f64);
        let s = self.shift;
        deg * (T::one() - s).powi(2) + (n - deg) * s * s
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        let s: T = x.iter().copied().sum();
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.graph.neighbors(i).iter().map(|&j| x[j]).sum::<T>() - self.shift * s;
        }
    }
}

impl<T: Scalar> Restrict for CenteredMatrix<T> {
    fn restrict(&self, idx: &[usize]) -> Self {
        Self { graph: self.graph.induced(idx), shift: self.shift }
    }
}

/// A Z₂ synchronization observation `σ x xᵀ + W`.
#[derive(Debug, Clone, PartialEq)]
pub struct Z2Instance<T> {
    pub n: usize,
    pub sigma: f64,
    pub matrix: DenseMatrix<T>,
    pub labels: LabelVector,
}

/// Samples `σ x xᵀ + W` with off-diagonal noise `N(0, n)` and diagonal noise `N(0, 2n)`.
pub fn sample_z2<T: Scalar, R: Rng + ?Sized>(
    n: usize,
    sigma: f64,
    labels: &LabelVector,
    rng: &mut R,
) -> Result<Z2Instance<T>> {
    if n < 2 {
        return invalid(format!("n = {n} < 2"));
    }
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return invalid(format!("sigma = {sigma} must be nonnegative"));
    }
    if labels.len() != n {
        return invalid(format!("labels have length {}, expected {n}", labels.len()));
    }
    let off = Normal::new(0.0, (n as f64).sqrt()).expect("positive std");
    let diag = Normal::new(0.0, (2.0 * n as f64).sqrt()).expect("positive std");
    let x = labels.as_slice();
    let mut m = DenseMatrix::zeros(n);
    for i in 0..n {
        let w: f64 = diag.sample(rng);
        m.set(i, i, T::of(sigma + w));
        for j in i + 1..n {
            let w: f64 = off.sample(rng);
            let v = T::of(sigma * (x[i] * x[j]) as f64 + w);
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    Ok(Z2Instance { n, sigma, matrix: m, labels: labels.clone() })
}
