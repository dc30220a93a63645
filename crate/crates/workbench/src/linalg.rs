//! Dense matrices over a [`Scalar`] field with exact Gauss-Jordan
//! elimination. Pivots are chosen by lowest [`Scalar::weight`] so that
//! cyclotomic elimination mostly divides by monomials.

use crate::scalars::{CycScalar, Scalar};
use serde::Serialize;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = S::one();
        }
        m
    }

    pub fn diag(d: &[S]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n, n);
        for (i, x) in d.iter().enumerate() {
            m.data[i * n + i] = x.clone();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        let data: Vec<S> = rows.into_iter().flatten().collect();
        assert_eq!(data.len(), r * c);
        Matrix { rows: r, cols: c, data }
    }

    pub fn from_cols(cols: &[Vec<S>], rows: usize) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            for (i, x) in col.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> Vec<S> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a.add(b)).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a.sub(b)).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: &S) -> Self {
        if s.is_one() {
            return self.clone();
        }
        let data = self.data.iter().map(|a| if a.is_zero() { S::zero() } else { a.mul(s) }).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn neg(&self) -> Self {
        let data = self.data.iter().map(|a| a.neg()).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    /// Product skipping zero entries; module matrices are very sparse.
    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "shape mismatch in product");
        let mut out = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * o.cols + j;
                    let t = a.mul(b);
                    out.data[idx] = out.data[idx].add(&t);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = S::zero();
                for (k, x) in v.iter().enumerate() {
                    let a = self.get(i, k);
                    if !a.is_zero() && !x.is_zero() {
                        acc = acc.add(&a.mul(x));
                    }
                }
                acc
            })
            .collect()
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::identity(self.rows);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    /// Kronecker product, index (i,k) ↦ i·dim(o) + k.
    pub fn kron(&self, o: &Self) -> Self {
        let mut out = Self::zeros(self.rows * o.rows, self.cols * o.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..o.rows {
                    for l in 0..o.cols {
                        let b = o.get(k, l);
                        if b.is_zero() {
                            continue;
                        }
                        out.set(i * o.rows + k, j * o.cols + l, a.mul(b));
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> S {
        let mut acc = S::zero();
        for i in 0..self.rows.min(self.cols) {
            acc = acc.add(self.get(i, i));
        }
        acc
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut out = Self::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                out.set(a, b, self.get(i, j).clone());
            }
        }
        out
    }

    /// Block-diagonal sum.
    pub fn direct_sum(&self, o: &Self) -> Self {
        let mut out = Self::zeros(self.rows + o.rows, self.cols + o.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
        }
        for i in 0..o.rows {
            for j in 0..o.cols {
                out.set(self.rows + i, self.cols + j, o.get(i, j).clone());
            }
        }
        out
    }

    pub fn hstack(&self, o: &Self) -> Self {
        assert_eq!(self.rows, o.rows);
        let mut out = Self::zeros(self.rows, self.cols + o.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
            for j in 0..o.cols {
                out.set(i, self.cols + j, o.get(i, j).clone());
            }
        }
        out
    }

    pub fn vstack(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.cols);
        let mut data = self.data.clone();
        data.extend(o.data.iter().cloned());
        Matrix { rows: self.rows + o.rows, cols: self.cols, data }
    }

    /// Reduced row echelon form in place; returns pivot columns.
    pub fn rref_in_place(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let mut best: Option<(usize, usize)> = None;
            for i in r..self.rows {
                let x = self.get(i, c);
                if !x.is_zero() {
                    let w = x.weight();
                    if best.is_none_or(|(_, bw)| w < bw) {
                        best = Some((i, w));
                        if w <= 1 {
                            break;
                        }
                    }
                }
            }
            let Some((pi, _)) = best else { continue };
            if pi != r {
                for j in 0..self.cols {
                    self.data.swap(pi * self.cols + j, r * self.cols + j);
                }
            }
            let inv = self.get(r, c).inv().expect("nonzero pivot");
            for j in c..self.cols {
                let v = self.get(r, j);
                if !v.is_zero() {
                    let nv = v.mul(&inv);
                    self.set(r, j, nv);
                }
            }
            let prow: Vec<(usize, S)> = (c..self.cols)
                .filter(|&j| !self.get(r, j).is_zero())
                .map(|j| (j, self.get(r, j).clone()))
                .collect();
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let f = self.get(i, c).clone();
                if f.is_zero() {
                    continue;
                }
                for (j, pv) in &prow {
                    let nv = self.get(i, *j).sub(&f.mul(pv));
                    self.set(i, *j, nv);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref_in_place().len()
    }

    /// Basis of the right kernel {v : Av = 0}.
    pub fn nullspace(&self) -> Vec<Vec<S>> {
        let mut m = self.clone();
        let pivots = m.rref_in_place();
        let mut is_pivot = vec![None; self.cols];
        for (r, &c) in pivots.iter().enumerate() {
            is_pivot[c] = Some(r);
        }
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if is_pivot[free].is_some() {
                continue;
            }
            let mut v = vec![S::zero(); self.cols];
            v[free] = S::one();
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = m.get(r, free).neg();
            }
            basis.push(v);
        }
        basis
    }

    pub fn inverse(&self) -> Option<Self> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut aug = self.hstack(&Self::identity(n));
        let piv = aug.rref_in_place();
        if piv.len() < n || piv[n - 1] != n - 1 {
            return None;
        }
        let cols: Vec<usize> = (n..2 * n).collect();
        let rows: Vec<usize> = (0..n).collect();
        Some(aug.submatrix(&rows, &cols))
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    /// Solves A x = b for one x, if consistent.
    pub fn solve(&self, b: &[S]) -> Option<Vec<S>> {
        let bm = Matrix::from_cols(&[b.to_vec()], self.rows);
        let mut aug = self.hstack(&bm);
        let piv = aug.rref_in_place();
        if piv.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![S::zero(); self.cols];
        for (r, &c) in piv.iter().enumerate() {
            x[c] = aug.get(r, self.cols).clone();
        }
        Some(x)
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    /// Whether the matrix equals s·Id.
    pub fn is_scalar(&self, s: &S) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let x = self.get(i, j);
                    if i == j {
                        x.sub(s).is_zero()
                    } else {
                        x.is_zero()
                    }
                })
            })
    }
}

/// Rank of a list of vectors.
pub fn span_rank<S: Scalar>(vs: &[Vec<S>]) -> usize {
    if vs.is_empty() {
        return 0;
    }
    Matrix::from_rows(vs.to_vec()).rank()
}

/// Row-reduced basis of the span of the given vectors.
pub fn span_basis<S: Scalar>(vs: &[Vec<S>]) -> Vec<Vec<S>> {
    if vs.is_empty() {
        return vec![];
    }
    let mut m = Matrix::from_rows(vs.to_vec());
    let piv = m.rref_in_place();
    (0..piv.len()).map(|r| m.row(r)).collect()
}

#[derive(Serialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<crate::scalars::ScalarJson>>,
}

impl Matrix<CycScalar> {
    pub fn to_json(&self) -> MatrixJson {
        MatrixJson {
            rows: self.rows,
            cols: self.cols,
            entries: (0..self.rows)
                .map(|i| (0..self.cols).map(|j| self.get(i, j).to_json()).collect())
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{q, CycScalar as C};

    fn m(rows: Vec<Vec<i64>>) -> Matrix<C> {
        Matrix::from_rows(rows.into_iter().map(|r| r.into_iter().map(C::from_i64).collect()).collect())
    }

    #[test]
    fn inverse_roundtrip() {
        let a = m(vec![vec![2, 1, 0], vec![1, 3, 1], vec![0, 1, 4]]);
        let b = a.inverse().unwrap();
        assert_eq!(a.mul(&b), Matrix::identity(3));
        let s = m(vec![vec![1, 2], vec![2, 4]]);
        assert!(s.inverse().is_none());
        assert_eq!(s.nullspace().len(), 1);
    }

    #[test]
    fn cyclotomic_entries() {
        let z = C::root(&q(1, 6));
        let a = Matrix::from_rows(vec![vec![z.clone(), C::one()], vec![C::one(), z.conj()]]);
        // det = 1 - 1 = 0
        assert_eq!(a.rank(), 1);
        let k = a.nullspace();
        assert!(a.mul_vec(&k[0]).iter().all(|x| x.is_zero()));
    }

    #[test]
    fn kron_shape() {
        let a = m(vec![vec![1, 2], vec![3, 4]]);
        let i = Matrix::<C>::identity(3);
        let k = a.kron(&i);
        assert_eq!((k.rows, k.cols), (6, 6));
        assert_eq!(k.get(3, 0), &C::from_i64(3));
        assert_eq!(k.trace(), C::from_i64(15));
    }
}
