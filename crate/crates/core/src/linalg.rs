//! Row-major factors, dense square matrices and the symmetric operator trait
//! every solver in the crate is written against.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Result};
use crate::scalar::{dot, norm, Scalar};

/// An `rows × cols` row-major matrix, used for Gram factors `X = V Vᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Factor<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return invalid(format!("factor data has {} entries, expected {rows}x{cols}", data.len()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return invalid("ragged factor rows");
        }
        Ok(Self { rows: rows.len(), cols, data: rows.concat() })
    }

    /// Rank-one factor whose Gram matrix is `v vᵀ` after row normalization.
    pub fn from_column(v: &[T]) -> Self {
        Self { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    pub fn identity(n: usize) -> Self {
        let mut f = Self::zeros(n, n);
        for i in 0..n {
            f.data[i * n + i] = T::one();
        }
        f
    }

    /// Rows drawn uniformly from the unit sphere.
    pub fn random_unit<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let data = (0..rows * cols)
            .map(|_| {
                let g: f64 = StandardNormal.sample(rng);
                T::of(g)
            })
            .collect();
        let mut f = Self { rows, cols, data };
        f.normalize_rows();
        f
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    /// Entry `(i, j)` of `V Vᵀ`.
    #[inline]
    pub fn gram(&self, i: usize, j: usize) -> T {
        dot(self.row(i), self.row(j))
    }

    /// Scales every row to unit Euclidean norm. A zero row becomes `e₁`.
    pub fn normalize_rows(&mut self) {
        let cols = self.cols;
        if cols == 0 {
            return;
        }
        for row in self.data.chunks_mut(cols) {
            let nrm = norm(row);
            if nrm > T::zero() {
                row.iter_mut().for_each(|x| *x /= nrm);
            } else {
                row.iter_mut().for_each(|x| *x = T::zero());
                row[0] = T::one();
            }
        }
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self { rows: idx.len(), cols: self.cols, data }
    }

    /// Sum of all rows, `Vᵀ 1`.
    pub fn column_sums(&self) -> Vec<T> {
        let mut s = vec![T::zero(); self.cols];
        for row in self.data.chunks(self.cols.max(1)) {
            for (a, &b) in s.iter_mut().zip(row) {
                *a += b;
            }
        }
        s
    }

    /// `Σ_ij A_ij B_ij`.
    pub fn frobenius_dot(&self, other: &Self) -> T {
        dot(&self.data, &other.data)
    }

    pub fn max_row_norm_deviation(&self) -> T {
        (0..self.rows)
            .map(|i| (norm(self.row(i)) - T::one()).abs())
            .fold(T::zero(), T::max)
    }
}

/// A symmetric linear operator with cheap block products.
pub trait SymOperator<T: Scalar>: Sync {
    fn dim(&self) -> usize;

    fn entry(&self, i: usize, j: usize) -> T;

    /// `out = M · v` for an `n × r` block `v`.
    fn apply_block(&self, v: &Factor<T>, out: &mut Factor<T>);

    fn apply(&self, x: &[T], y: &mut [T]) {
        let v = Factor::from_column(x);
        let mut out = Factor::zeros(x.len(), 1);
        self.apply_block(&v, &mut out);
        y.copy_from_slice(out.as_slice());
    }

    /// `‖M eᵢ‖²`.
    fn row_norm_sq(&self, i: usize) -> T {
        (0..self.dim()).map(|j| self.entry(i, j).powi(2)).sum()
    }

    /// Exact symmetry check; operators symmetric by construction return `true`.
    fn is_symmetric(&self) -> bool {
        true
    }
}

/// Operators that can be restricted to a principal submatrix, re-indexed to `0..idx.len()`.
pub trait Restrict {
    fn restrict(&self, idx: &[usize]) -> Self;
}

/// `⟨M, V Vᵀ⟩ = Σᵢ ⟨Vᵢ, (M V)ᵢ⟩`.
pub fn gram_objective<T: Scalar, O: SymOperator<T> + ?Sized>(m: &O, v: &Factor<T>) -> T {
    let mut mv = Factor::zeros(v.rows(), v.cols());
    m.apply_block(v, &mut mv);
    v.frobenius_dot(&mv)
}

/// `xᵀ M x`.
pub fn quadratic_form<T: Scalar, O: SymOperator<T> + ?Sized>(m: &O, x: &[T]) -> T {
    let mut y = vec![T::zero(); x.len()];
    m.apply(x, &mut y);
    dot(x, &y)
}

/// Dense square matrix, row-major. Not required to be symmetric; solvers that
/// need symmetry check [`SymOperator::is_symmetric`].
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn new(n: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * n {
            return invalid(format!("matrix data has {} entries, expected {}", data.len(), n * n));
        }
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return invalid("matrix is not square");
        }
        Ok(Self { n, data: rows.concat() })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i))
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&x| x * c).collect() }
    }

    pub fn frobenius_norm(&self) -> T {
        norm(&self.data)
    }

    /// Bitwise equality of `Mᵢⱼ` and `Mⱼᵢ`.
    pub fn is_symmetric_exact(&self) -> bool {
        (0..self.n).all(|i| (i + 1..self.n).all(|j| self.get(i, j).to_f64_lossy().to_bits() == self.get(j, i).to_f64_lossy().to_bits()))
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }
}

impl<T: Scalar> SymOperator<T> for DenseMatrix<T> {
    fn dim(&self) -> usize {
        self.n
    }

    fn entry(&self, i: usize, j: usize) -> T {
        self.get(i, j)
    }

    fn apply_block(&self, v: &Factor<T>, out: &mut Factor<T>) {
        let r = v.cols();
        for i in 0..self.n {
            let o = out.row_mut(i);
            o.iter_mut().for_each(|x| *x = T::zero());
            for (j, &m) in self.row(i).iter().enumerate() {
                if m != T::zero() {
                    let vj = &v.as_slice()[j * r..(j + 1) * r];
                    for (a, &b) in o.iter_mut().zip(vj) {
                        *a += m * b;
                    }
                }
            }
        }
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = dot(self.row(i), x);
        }
    }

    fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (i + 1..self.n).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

impl<T: Scalar> Restrict for DenseMatrix<T> {
    fn restrict(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), |a, b| self.get(idx[a], idx[b]))
    }
}

/// `M − c · u uᵀ`, applied lazily.
#[derive(Debug, Clone)]
pub struct RankOneShift<O, T> {
    pub base: O,
    pub coef: T,
    pub u: Vec<T>,
}

impl<O, T> RankOneShift<O, T> {
    pub fn new(base: O, coef: T, u: Vec<T>) -> Self {
        Self { base, coef, u }
    }
}

impl<T: Scalar, O: SymOperator<T>> SymOperator<T> for RankOneShift<O, T> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn entry(&self, i: usize, j: usize) -> T {
        self.base.entry(i, j) - self.coef * self.u[i] * self.u[j]
    }

    fn apply_block(&self, v: &Factor<T>, out: &mut Factor<T>) {
        self.base.apply_block(v, out);
        let mut proj = vec![T::zero(); v.cols()];
        for (i, &ui) in self.u.iter().enumerate() {
            for (p, &x) in proj.iter_mut().zip(v.row(i)) {
                *p += ui * x;
            }
        }
        for (i, &ui) in self.u.iter().enumerate() {
            let c = self.coef * ui;
            for (o, &p) in out.row_mut(i).iter_mut().zip(&proj) {
                *o -= c * p;
            }
        }
    }

    fn is_symmetric(&self) -> bool {
        self.base.is_symmetric()
    }
}

impl<T: Scalar, O: Restrict> Restrict for RankOneShift<O, T> {
    fn restrict(&self, idx: &[usize]) -> Self {
        Self {
            base: self.base.restrict(idx),
            coef: self.coef,
            u: idx.iter().map(|&i| self.u[i]).collect(),
        }
    }
}
