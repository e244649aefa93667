//! Linear algebra over the chain ring `Z/p^N`.
//!
//! Every ideal of `Z/p^N` is `(p^e)`, so elimination with a pivot of
//! minimal valuation behaves like elimination over a field: all other
//! entries in the pivot's column are multiples of it.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::padic::Zpn;

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    ring: Zpn,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} mod {}", self.rows, self.cols, self.ring.modulus())?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn zeros(ring: Zpn, rows: usize, cols: usize) -> Self {
        Matrix { ring, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(ring: Zpn, n: usize) -> Self {
        let mut m = Self::zeros(ring, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Builds a matrix from rows of equal length `cols`.
    pub fn from_rows(ring: Zpn, cols: usize, rows: Vec<Vec<u64>>) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in &rows {
            if r.len() != cols {
                return Err(Error::Mismatch(format!("row of length {} in a matrix with {cols} columns", r.len())));
            }
            data.extend(r.iter().map(|&x| ring.reduce(x)));
        }
        Ok(Matrix { ring, rows: rows.len(), cols, data })
    }

    pub fn from_i64(ring: Zpn, rows: &[Vec<i64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows = rows.iter().map(|r| r.iter().map(|&x| ring.reduce_i128(x as i128)).collect()).collect();
        Self::from_rows(ring, cols, rows)
    }

    /// Matrix whose columns are the given vectors of length `len`.
    pub fn from_columns(ring: Zpn, len: usize, columns: &[Vec<u64>]) -> Result<Self> {
        let mut m = Self::zeros(ring, len, columns.len());
        for (j, c) in columns.iter().enumerate() {
            if c.len() != len {
                return Err(Error::Mismatch(format!("column of length {} where {len} expected", c.len())));
            }
            for (i, &x) in c.iter().enumerate() {
                m.data[i * m.cols + j] = ring.reduce(x);
            }
        }
        Ok(m)
    }

    pub fn ring(&self) -> Zpn {
        self.ring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: u64) {
        self.data[i * self.cols + j] = self.ring.reduce(x);
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<u64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn row_vectors(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.ring, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn mul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows || self.ring != rhs.ring {
            return Err(Error::Mismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let f = self.ring;
        let mut out = Matrix::zeros(f, self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    let idx = i * rhs.cols + j;
                    out.data[idx] = f.mul_add(out.data[idx], a, rhs.get(k, j));
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(v.len(), self.cols);
        let f = self.ring;
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).fold(0, |acc, (&a, &b)| f.mul_add(acc, a, b)))
            .collect()
    }

    /// Entrywise reduction to a lower precision.
    pub fn reduce_prec(&self, prec: u32) -> Result<Matrix> {
        if prec > self.ring.prec() {
            return Err(Error::OutOfRange(format!("cannot raise precision {} to {prec}", self.ring.prec())));
        }
        let ring = self.ring.with_prec(prec)?;
        Ok(Matrix { ring, rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| ring.reduce(x)).collect() })
    }

    /// Stacks the rows of `other` below `self`.
    pub fn vstack(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.cols || self.ring != other.ring {
            return Err(Error::Mismatch("vstack of incompatible matrices".into()));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Matrix { ring: self.ring, rows: self.rows + other.rows, cols: self.cols, data })
    }

    pub fn hstack(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows || self.ring != other.ring {
            return Err(Error::Mismatch("hstack of incompatible matrices".into()));
        }
        let mut out = Matrix::zeros(self.ring, self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            out.data[i * out.cols..i * out.cols + self.cols].copy_from_slice(self.row(i));
            out.data[i * out.cols + self.cols..(i + 1) * out.cols].copy_from_slice(other.row(i));
        }
        Ok(out)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// `row[dst] -= q * row[src]`
    fn row_axpy(&mut self, dst: usize, src: usize, q: u64) {
        let f = self.ring;
        for j in 0..self.cols {
            let s = self.data[src * self.cols + j];
            if s != 0 {
                let d = &mut self.data[dst * self.cols + j];
                *d = f.sub(*d, f.mul(q, s));
            }
        }
    }

    fn col_axpy(&mut self, dst: usize, src: usize, q: u64) {
        let f = self.ring;
        for i in 0..self.rows {
            let s = self.data[i * self.cols + src];
            if s != 0 {
                let d = &mut self.data[i * self.cols + dst];
                *d = f.sub(*d, f.mul(q, s));
            }
        }
    }

    fn scale_row(&mut self, i: usize, c: u64) {
        let f = self.ring;
        for j in 0..self.cols {
            let d = &mut self.data[i * self.cols + j];
            *d = f.mul(*d, c);
        }
    }

    /// A generating set of the row span with at most `cols` rows, obtained
    /// by row operations only.
    pub fn row_reduced(&self) -> Matrix {
        let f = self.ring;
        let mut m = self.clone();
        let mut top = 0;
        for c in 0..m.cols {
            if top == m.rows {
                break;
            }
            let Some(piv) = (top..m.rows).filter(|&i| m.get(i, c) != 0).min_by_key(|&i| (f.val(m.get(i, c)), i)) else {
                continue;
            };
            m.swap_rows(top, piv);
            let e = f.val(m.get(top, c));
            let unit = f.div_p_pow(m.get(top, c), e);
            m.scale_row(top, f.inv(unit).expect("unit part"));
            for i in top + 1..m.rows {
                let x = m.get(i, c);
                if x != 0 {
                    m.row_axpy(i, top, f.div_p_pow(x, e));
                }
            }
            top += 1;
        }
        let keep: Vec<Vec<u64>> = (0..m.rows).map(|i| m.row(i).to_vec()).filter(|r| r.iter().any(|&x| x != 0)).collect();
        Matrix::from_rows(f, m.cols, keep).expect("consistent widths")
    }

    fn smith_impl(&self, track_u: bool, track_v: bool) -> Smith {
        let f = self.ring;
        let mut d = self.clone();
        let mut u = track_u.then(|| Matrix::identity(f, self.rows));
        let mut v = track_v.then(|| Matrix::identity(f, self.cols));
        let k = self.rows.min(self.cols);
        let mut exps = Vec::with_capacity(k);
        for t in 0..k {
            // minimal valuation, leftmost column first, then topmost row
            let mut best: Option<(u32, usize, usize)> = None;
            for j in t..d.cols {
                for i in t..d.rows {
                    let x = d.get(i, j);
                    if x != 0 {
                        let e = f.val(x);
                        if best.is_none_or(|(b, _, _)| e < b) {
                            best = Some((e, i, j));
                        }
                    }
                }
                if best.is_some_and(|(b, _, _)| b == 0) {
                    break;
                }
            }
            let Some((e, pi, pj)) = best else {
                exps.extend(std::iter::repeat_n(f.prec(), k - t));
                break;
            };
            d.swap_rows(t, pi);
            d.swap_cols(t, pj);
            if let Some(u) = u.as_mut() {
                u.swap_rows(t, pi);
            }
            if let Some(v) = v.as_mut() {
                v.swap_cols(t, pj);
            }
            let unit_inv = f.inv(f.div_p_pow(d.get(t, t), e)).expect("unit part");
            d.scale_row(t, unit_inv);
            if let Some(u) = u.as_mut() {
                u.scale_row(t, unit_inv);
            }
            for i in t + 1..d.rows {
                let x = d.get(i, t);
                if x != 0 {
                    let q = f.div_p_pow(x, e);
                    d.row_axpy(i, t, q);
                    if let Some(u) = u.as_mut() {
                        u.row_axpy(i, t, q);
                    }
                }
            }
            for j in t + 1..d.cols {
                let x = d.get(t, j);
                if x != 0 {
                    let q = f.div_p_pow(x, e);
                    d.col_axpy(j, t, q);
                    if let Some(v) = v.as_mut() {
                        v.col_axpy(j, t, q);
                    }
                }
            }
            exps.push(e);
        }
        Smith { u, d, v, exps }
    }

    /// `(U, D, V)` with `U * M * V = D`, `U`, `V` invertible and `D`
    /// diagonal with entries `p^{e_1} | p^{e_2} | ..`.
    pub fn smith_form(&self) -> Smith {
        self.smith_impl(true, true)
    }

    /// Generators of `{v : M v = 0}`.
    pub fn kernel(&self) -> Vec<Vec<u64>> {
        let s = self.smith_impl(false, true);
        let f = self.ring;
        let v = s.v.as_ref().expect("tracked");
        let mut gens = Vec::new();
        for (i, &e) in s.exps.iter().enumerate() {
            if e > 0 {
                let scale = f.p_pow(f.prec() - e);
                gens.push(v.column(i).into_iter().map(|x| f.mul(x, scale)).collect());
            }
        }
        for i in s.exps.len()..self.cols {
            gens.push(v.column(i));
        }
        gens
    }

    /// `log_p |ker M|`.
    pub fn kernel_order_exp(&self) -> u64 {
        let s = self.smith_impl(false, false);
        s.exps.iter().map(|&e| e as u64).sum::<u64>() + (self.cols - s.exps.len()) as u64 * self.ring.prec() as u64
    }

    /// A solution of `M x = v`, if one exists.
    pub fn solve(&self, rhs: &[u64]) -> Option<Vec<u64>> {
        assert_eq!(rhs.len(), self.rows);
        let s = self.smith_form();
        let f = self.ring;
        let w = s.u.as_ref().expect("tracked").mul_vec(rhs);
        let mut y = vec![0u64; self.cols];
        for (i, &wi) in w.iter().enumerate() {
            match s.exps.get(i) {
                Some(&e) => {
                    if f.val(wi) < e {
                        return None;
                    }
                    if e < f.prec() {
                        y[i] = f.div_p_pow(wi, e);
                    }
                }
                None => {
                    if wi != 0 {
                        return None;
                    }
                }
            }
        }
        Some(s.v.as_ref().expect("tracked").mul_vec(&y))
    }

    /// Whether `v` lies in the column span.
    pub fn membership(&self, v: &[u64]) -> bool {
        ColumnSpan::new(self).contains(v)
    }

    /// Inverse of a square invertible matrix.
    pub fn inverse(&self) -> Result<Matrix> {
        if self.rows != self.cols {
            return Err(Error::Mismatch("inverse of a non-square matrix".into()));
        }
        let s = self.smith_form();
        if s.exps.iter().any(|&e| e > 0) {
            return Err(Error::Precondition("matrix is not invertible".into()));
        }
        // U M V = I  =>  M^{-1} = V U
        s.v.as_ref().unwrap().mul(s.u.as_ref().unwrap())
    }
}

/// Result of [`Matrix::smith_form`].
#[derive(Clone, Debug)]
pub struct Smith {
    pub u: Option<Matrix>,
    pub d: Matrix,
    pub v: Option<Matrix>,
    /// Valuations of the diagonal entries, `N` standing for zero.
    pub exps: Vec<u32>,
}

/// Precomputed column span of a matrix for repeated membership queries.
#[derive(Clone, Debug)]
pub struct ColumnSpan {
    u: Matrix,
    exps: Vec<u32>,
}

impl ColumnSpan {
    pub fn new(m: &Matrix) -> Self {
        let s = m.smith_impl(true, false);
        ColumnSpan { u: s.u.expect("tracked"), exps: s.exps }
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        let f = self.u.ring;
        let w = self.u.mul_vec(v);
        w.iter().enumerate().all(|(i, &wi)| match self.exps.get(i) {
            Some(&e) => f.val(wi) >= e,
            None => wi == 0,
        })
    }

    /// `log_p` of the number of elements in the span.
    pub fn order_exp(&self) -> u64 {
        let n = self.u.ring.prec();
        self.exps.iter().map(|&e| (n - e) as u64).sum()
    }

    /// Canonical representative of `v` modulo the span.
    pub fn canonical(&self, v: &[u64]) -> Vec<u64> {
        let f = self.u.ring;
        let w = self.u.mul_vec(v);
        w.into_iter()
            .enumerate()
            .map(|(i, x)| match self.exps.get(i) {
                Some(&e) if e < f.prec() => x % f.p_pow(e),
                _ => x,
            })
            .collect()
    }
}

/// Structure of a finite `Z/p^N`-module: it is `sum_i Z/p^{c_i}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModuleInvariants {
    pub prec: u32,
    /// Exponents `c_i > 0` of the cyclic factors, nondecreasing.
    pub exponents: Vec<u32>,
}

impl ModuleInvariants {
    /// `log_p` of the order.
    pub fn order_exp(&self) -> u64 {
        self.exponents.iter().map(|&c| c as u64).sum()
    }

    /// `dim_{F_p} M/pM`
    pub fn p_rank(&self) -> usize {
        self.exponents.len()
    }

    /// Number of cyclic factors of full order `p^N`.
    pub fn visible_rank(&self) -> usize {
        self.exponents.iter().filter(|&&c| c == self.prec).count()
    }

    pub fn elementary_divisors(&self, p: u64) -> Vec<u64> {
        self.exponents.iter().map(|&c| crate::padic::ipow(p, c)).collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.exponents.is_empty()
    }
}

/// The cokernel of a relation matrix: `g` generators, one relation per row.
#[derive(Clone, Debug)]
pub struct FiniteModulePresentation {
    pub generators: usize,
    pub relations: Matrix,
}

impl FiniteModulePresentation {
    pub fn new(generators: usize, relations: Matrix) -> Result<Self> {
        if relations.cols() != generators {
            return Err(Error::Mismatch(format!("{} relation columns for {generators} generators", relations.cols())));
        }
        Ok(FiniteModulePresentation { generators, relations })
    }

    pub fn free(ring: Zpn, generators: usize) -> Self {
        FiniteModulePresentation { generators, relations: Matrix::zeros(ring, 0, generators) }
    }

    pub fn invariants(&self) -> ModuleInvariants {
        module_invariants(self)
    }
}

pub fn module_invariants(pres: &FiniteModulePresentation) -> ModuleInvariants {
    let f = pres.relations.ring();
    let s = pres.relations.smith_impl(false, false);
    let mut exponents: Vec<u32> = s.exps.iter().copied().filter(|&e| e > 0).collect();
    exponents.extend(std::iter::repeat_n(f.prec(), pres.generators - s.exps.len()));
    exponents.sort_unstable();
    ModuleInvariants { prec: f.prec(), exponents }
}

/// Invariants of the submodule of `F^a / rowspan(relations)` generated by
/// the images of `gens`.
pub fn submodule_invariants(ring: Zpn, dim: usize, gens: &[Vec<u64>], relations: &Matrix) -> Result<ModuleInvariants> {
    if gens.is_empty() {
        return Ok(ModuleInvariants { prec: ring.prec(), exponents: Vec::new() });
    }
    // coefficient vectors c with sum c_j g_j in the relation span
    let w = Matrix::from_columns(ring, dim, gens)?;
    let rel_t = relations.transpose();
    let neg = Matrix { data: rel_t.data.iter().map(|&x| ring.neg(x)).collect(), ..rel_t };
    let system = w.hstack(&neg)?;
    let syzygies: Vec<Vec<u64>> = system.kernel().into_iter().map(|k| k[..gens.len()].to_vec()).collect();
    let rel = Matrix::from_rows(ring, gens.len(), syzygies)?;
    Ok(module_invariants(&FiniteModulePresentation::new(gens.len(), rel.row_reduced())?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(p: u64, n: u32) -> Zpn {
        Zpn::new(p, n).unwrap()
    }

    #[test]
    fn smith_small_cases() {
        let f = z(3, 2);
        let m = Matrix::from_i64(f, &[vec![3]]).unwrap();
        let s = m.smith_form();
        assert_eq!(s.d.get(0, 0), 3);
        let id = Matrix::identity(f, 3);
        assert_eq!(id.smith_form().d, id);
    }

    #[test]
    fn smith_diagonal_divisibility() {
        let f = z(2, 3);
        let m = Matrix::from_i64(f, &[vec![4, 2, 6], vec![2, 4, 0], vec![0, 0, 4]]).unwrap();
        let s = m.smith_form();
        let prod = s.u.as_ref().unwrap().mul(&m).unwrap().mul(s.v.as_ref().unwrap()).unwrap();
        assert_eq!(prod, s.d);
        assert!(s.exps.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn kernels() {
        let f = z(3, 2);
        let m = Matrix::from_i64(f, &[vec![3]]).unwrap();
        let k = m.kernel();
        assert_eq!(k, vec![vec![3]]);
        assert_eq!(m.kernel_order_exp(), 1);
        let inv = Matrix::from_i64(f, &[vec![1, 2], vec![0, 1]]).unwrap();
        assert!(inv.kernel().is_empty());
        assert_eq!(inv.kernel_order_exp(), 0);
        // wide matrix: free kernel directions
        let wide = Matrix::from_i64(f, &[vec![1, 1]]).unwrap();
        assert_eq!(wide.kernel_order_exp(), 2);
    }

    #[test]
    fn membership_cases() {
        let f = z(2, 2);
        let m = Matrix::from_i64(f, &[vec![2]]).unwrap();
        assert!(m.membership(&[0]));
        assert!(m.membership(&[2]));
        assert!(!m.membership(&[1]));
        let m2 = Matrix::from_i64(f, &[vec![1, 2], vec![3, 0]]).unwrap();
        assert!(m2.membership(&m2.column(0)));
        let x = m2.solve(&[3, 1]).unwrap();
        assert_eq!(m2.mul_vec(&x), vec![3, 1]);
    }

    #[test]
    fn module_invariant_cases() {
        let f = z(3, 2);
        let free = FiniteModulePresentation::free(f, 1).invariants();
        assert_eq!((free.p_rank(), free.order_exp(), free.visible_rank()), (1, 2, 1));
        let trivial = FiniteModulePresentation::new(2, Matrix::identity(f, 2)).unwrap().invariants();
        assert!(trivial.is_trivial());
        let m = Matrix::from_i64(f, &[vec![3, 0], vec![0, 3]]).unwrap();
        let inv = FiniteModulePresentation::new(2, m).unwrap().invariants();
        assert_eq!((inv.order_exp(), inv.p_rank()), (2, 2));
        assert_eq!(inv.elementary_divisors(3), vec![3, 3]);
        assert_eq!(inv.visible_rank(), 0);
    }

    #[test]
    fn row_reduction_preserves_span() {
        let f = z(2, 3);
        let m = Matrix::from_i64(f, &[vec![2, 4], vec![4, 0], vec![6, 4], vec![0, 2]]).unwrap();
        let r = m.row_reduced();
        assert!(r.rows() <= 2);
        let (a, b) = (ColumnSpan::new(&m.transpose()), ColumnSpan::new(&r.transpose()));
        assert_eq!(a.order_exp(), b.order_exp());
        for i in 0..m.rows() {
            assert!(b.contains(m.row(i)));
        }
    }

    #[test]
    fn submodule_of_quotient() {
        // Z/8 modulo 4: the submodule generated by 1 is Z/4, by 2 is Z/2
        let f = z(2, 3);
        let rel = Matrix::from_i64(f, &[vec![4]]).unwrap();
        assert_eq!(submodule_invariants(f, 1, &[vec![1]], &rel).unwrap().exponents, vec![2]);
        assert_eq!(submodule_invariants(f, 1, &[vec![2]], &rel).unwrap().exponents, vec![1]);
        assert!(submodule_invariants(f, 1, &[vec![4]], &rel).unwrap().is_trivial());
    }

    #[test]
    fn inverse_and_canonical_forms() {
        let f = z(3, 2);
        let m = Matrix::from_i64(f, &[vec![1, 3], vec![2, 4]]).unwrap();
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv).unwrap(), Matrix::identity(f, 2));
        assert!(Matrix::from_i64(f, &[vec![3]]).unwrap().inverse().is_err());
        let span = ColumnSpan::new(&Matrix::from_i64(f, &[vec![3], vec![0]]).unwrap());
        assert_eq!(span.canonical(&[4, 1]), span.canonical(&[1, 1]));
        assert_ne!(span.canonical(&[2, 1]), span.canonical(&[1, 1]));
    }
}
