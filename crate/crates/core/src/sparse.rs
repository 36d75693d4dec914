//! Row-compressed sparse matrices over a Fock basis.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fock::{Parity, Scalar};

/// Identifies the basis an operator acts on: lattice size plus optional sector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BasisShape {
    pub sites: usize,
    pub sector: Option<usize>,
}

/// Square sparse matrix. Rows hold `(column, value)` pairs sorted by column
/// with no stored zeros, so structural equality is matrix equality.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator<T> {
    shape: BasisShape,
    dim: usize,
    rows: Vec<Vec<(u32, T)>>,
}

impl<T: Scalar> SparseOperator<T> {
    pub fn zeros(shape: BasisShape, dim: usize) -> Self {
        SparseOperator { shape, dim, rows: vec![Vec::new(); dim] }
    }

    pub fn identity(shape: BasisShape, dim: usize) -> Self {
        let rows = (0..dim).map(|i| vec![(i as u32, T::one())]).collect();
        SparseOperator { shape, dim, rows }
    }

    /// Builds from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(shape: BasisShape, dim: usize, triplets: impl IntoIterator<Item = (usize, usize, T)>) -> Self {
        let mut rows: Vec<Vec<(u32, T)>> = vec![Vec::new(); dim];
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) outside {dim}x{dim}");
            rows[r].push((c as u32, v));
        }
        for row in &mut rows {
            compress(row);
        }
        SparseOperator { shape, dim, rows }
    }

    pub fn from_diagonal(shape: BasisShape, diag: &[T]) -> Self {
        let triplets = diag.iter().enumerate().map(|(i, &v)| (i, i, v));
        Self::from_triplets(shape, diag.len(), triplets)
    }

    pub fn shape(&self) -> BasisShape {
        self.shape
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn row(&self, r: usize) -> &[(u32, T)] {
        &self.rows[r]
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        let row = &self.rows[r];
        match row.binary_search_by_key(&(c as u32), |&(j, _)| j) {
            Ok(k) => row[k].1,
            Err(_) => T::zero(),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |&(c, v)| (r, c as usize, v)))
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(Vec::is_empty)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().map(|(_, _, v)| v.abs().to_f64_lossy()).fold(0.0, f64::max)
    }

    pub fn transpose(&self) -> Self {
        let mut rows: Vec<Vec<(u32, T)>> = vec![Vec::new(); self.dim];
        for (r, c, v) in self.entries() {
            rows[c].push((r as u32, v));
        }
        SparseOperator { shape: self.shape, dim: self.dim, rows }
    }

    /// Adjoint of a real matrix.
    pub fn adjoint(&self) -> Self {
        self.transpose()
    }

    pub fn is_symmetric(&self) -> bool {
        *self == self.transpose()
    }

    pub fn scale(&self, c: T) -> Self {
        if c.is_zero() {
            return Self::zeros(self.shape, self.dim);
        }
        let rows = self
            .rows
            .iter()
            .map(|row| row.iter().map(|&(j, v)| (j, v * c)).collect())
            .collect();
        SparseOperator { shape: self.shape, dim: self.dim, rows }
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.shape != other.shape || self.dim != other.dim {
            return Err(Error::BasisMismatch);
        }
        Ok(())
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, other: &Self, c: T) -> Result<Self> {
        self.check_same(other)?;
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| merge(a, b, c))
            .collect();
        Ok(SparseOperator { shape: self.shape, dim: self.dim, rows })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, T::one())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, -T::one())
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut acc = vec![T::zero(); self.dim];
        let mut seen = vec![false; self.dim];
        let mut touched: Vec<u32> = Vec::new();
        let mut rows = Vec::with_capacity(self.dim);
        for row in &self.rows {
            for &(k, a) in row {
                for &(j, b) in &other.rows[k as usize] {
                    let ju = j as usize;
                    if !seen[ju] {
                        seen[ju] = true;
                        touched.push(j);
                    }
                    acc[ju] += a * b;
                }
            }
            touched.sort_unstable();
            let mut out = Vec::with_capacity(touched.len());
            for &j in &touched {
                let ju = j as usize;
                if !acc[ju].is_zero() {
                    out.push((j, acc[ju]));
                }
                acc[ju] = T::zero();
                seen[ju] = false;
            }
            touched.clear();
            rows.push(out);
        }
        Ok(SparseOperator { shape: self.shape, dim: self.dim, rows })
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.dim);
        self.rows
            .iter()
            .map(|row| row.iter().fold(T::zero(), |s, &(j, a)| s + a * v[j as usize]))
            .collect()
    }

    /// Image of the basis vector `e_col` as `(row, value)` pairs.
    pub fn column(&self, col: usize) -> Vec<(usize, T)> {
        self.entries().filter(|&(_, c, _)| c == col).map(|(r, _, v)| (r, v)).collect()
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn to_f64(&self) -> SparseOperator<f64> {
        let rows = self
            .rows
            .iter()
            .map(|row| row.iter().map(|&(j, v)| (j, v.to_f64_lossy())).collect())
            .collect();
        SparseOperator { shape: self.shape, dim: self.dim, rows }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v.to_f64_lossy();
        }
        m
    }

    /// Dense block on the given index set (rows and columns).
    pub fn block(&self, indices: &[usize]) -> DMatrix<f64> {
        let mut local = vec![usize::MAX; self.dim];
        for (k, &i) in indices.iter().enumerate() {
            local[i] = k;
        }
        let mut m = DMatrix::zeros(indices.len(), indices.len());
        for (k, &i) in indices.iter().enumerate() {
            for &(j, v) in &self.rows[i] {
                let l = local[j as usize];
                if l != usize::MAX {
                    m[(k, l)] = v.to_f64_lossy();
                }
            }
        }
        m
    }
}

fn compress<T: Scalar>(row: &mut Vec<(u32, T)>) {
    row.sort_by_key(|&(j, _)| j);
    let mut out: Vec<(u32, T)> = Vec::with_capacity(row.len());
    for &(j, v) in row.iter() {
        match out.last_mut() {
            Some((k, acc)) if *k == j => *acc += v,
            _ => out.push((j, v)),
        }
    }
    out.retain(|(_, v)| !v.is_zero());
    *row = out;
}

fn merge<T: Scalar>(a: &[(u32, T)], b: &[(u32, T)], c: T) -> Vec<(u32, T)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let (col, v) = match (a.get(i), b.get(j)) {
            (Some(&(ca, va)), Some(&(cb, vb))) if ca == cb => {
                i += 1;
                j += 1;
                (ca, va + vb * c)
            }
            (Some(&(ca, va)), Some(&(cb, _))) if ca < cb => {
                i += 1;
                (ca, va)
            }
            (Some(_), Some(&(cb, vb))) | (None, Some(&(cb, vb))) => {
                j += 1;
                (cb, vb * c)
            }
            (Some(&(ca, va)), None) => {
                i += 1;
                (ca, va)
            }
            (None, None) => unreachable!(),
        };
        if !v.is_zero() {
            out.push((col, v));
        }
    }
    out
}

/// `AB + BA`.
pub fn anticommutator<T: Scalar>(a: &SparseOperator<T>, b: &SparseOperator<T>) -> Result<SparseOperator<T>> {
    a.mul(b)?.add(&b.mul(a)?)
}

/// `AB - BA`.
pub fn commutator<T: Scalar>(a: &SparseOperator<T>, b: &SparseOperator<T>) -> Result<SparseOperator<T>> {
    a.mul(b)?.sub(&b.mul(a)?)
}

/// Anticommutator when both operators are odd, commutator otherwise.
pub fn graded_commutator<T: Scalar>(
    a: &SparseOperator<T>,
    b: &SparseOperator<T>,
    parities: (Parity, Parity),
) -> Result<SparseOperator<T>> {
    match parities {
        (Parity::Odd, Parity::Odd) => anticommutator(a, b),
        _ => commutator(a, b),
    }
}
