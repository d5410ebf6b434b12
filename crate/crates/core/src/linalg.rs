//! Dense linear algebra over a finite field: rank, reduced row echelon form,
//! null spaces, and an incremental echelon basis that can record how each
//! basis row was assembled from the inserted generators.

use crate::error::{Error, Result};
use crate::field::{FieldElem, FieldSpec};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    fs: FieldSpec,
    rows: usize,
    cols: usize,
    data: Vec<FieldElem>,
}

impl Matrix {
    pub fn zeros(fs: &FieldSpec, rows: usize, cols: usize) -> Self {
        Matrix {
            fs: fs.clone(),
            rows,
            cols,
            data: vec![FieldElem::ZERO; rows * cols],
        }
    }

    pub fn from_rows(fs: &FieldSpec, cols: usize, rows: &[Vec<FieldElem>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row of length {} in a matrix with {cols} columns",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            fs: fs.clone(),
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_data(fs: &FieldSpec, rows: usize, cols: usize, data: Vec<FieldElem>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Matrix {
            fs: fs.clone(),
            rows,
            cols,
            data,
        }
    }

    pub fn field(&self) -> &FieldSpec {
        &self.fs
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[FieldElem] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> FieldElem {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: FieldElem) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[FieldElem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(&self.fs, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let fs = &self.fs;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            if pr != r {
                for j in 0..m.cols {
                    m.data.swap(pr * m.cols + j, r * m.cols + j);
                }
            }
            let inv = fs.inv(m.get(r, c)).expect("pivot is nonzero");
            for j in c..m.cols {
                let v = fs.mul(m.get(r, j), inv);
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let f = m.get(i, c);
                if f.is_zero() {
                    continue;
                }
                for j in c..m.cols {
                    let v = fs.sub(m.get(i, j), fs.mul(f, m.get(r, j)));
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        if self.fs.q() == 2 && self.cols <= 64 {
            return rank_gf2(self);
        }
        self.rref().1.len()
    }

    /// Basis of `{x : M x = 0}` (right kernel), one vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<FieldElem>> {
        let fs = &self.fs;
        let (r, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let mut out = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![FieldElem::ZERO; self.cols];
            v[free] = FieldElem::ONE;
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = fs.neg(r.get(row, free));
            }
            out.push(v);
        }
        out
    }
}

/// Rank over `F_2` with rows packed into `u64` words.
fn rank_gf2(m: &Matrix) -> usize {
    let mut rows: Vec<u64> = (0..m.rows)
        .map(|i| {
            m.row(i)
                .iter()
                .enumerate()
                .fold(0u64, |acc, (j, x)| acc | ((x.code() as u64) << j))
        })
        .collect();
    let mut rank = 0;
    for bit in 0..m.cols {
        let mask = 1u64 << bit;
        let Some(p) = (rank..rows.len()).find(|&i| rows[i] & mask != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank];
        for row in rows.iter_mut().skip(rank + 1) {
            if *row & mask != 0 {
                *row ^= pivot;
            }
        }
        rank += 1;
    }
    rank
}

/// An echelon basis grown one vector at a time. Each stored row has a leading
/// one at its pivot and zeros at every other row's pivot.
///
/// With `track` enabled every row remembers its expression as a combination
/// of the *accepted* generators (those that increased the rank), which is
/// enough to write any member as an explicit combination.
#[derive(Clone, Debug)]
pub struct EchelonBasis {
    fs: FieldSpec,
    n: usize,
    rows: Vec<Vec<FieldElem>>,
    pivots: Vec<usize>,
    track: bool,
    combos: Vec<Vec<FieldElem>>,
    accepted: Vec<usize>,
}

impl EchelonBasis {
    pub fn new(fs: &FieldSpec, n: usize) -> Self {
        EchelonBasis {
            fs: fs.clone(),
            n,
            rows: Vec::new(),
            pivots: Vec::new(),
            track: false,
            combos: Vec::new(),
            accepted: Vec::new(),
        }
    }

    pub fn tracking(fs: &FieldSpec, n: usize) -> Self {
        EchelonBasis {
            track: true,
            ..Self::new(fs, n)
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn ambient(&self) -> usize {
        self.n
    }

    /// Indices (in insertion order) of the generators that were independent.
    pub fn accepted(&self) -> &[usize] {
        &self.accepted
    }

    /// Reduces `v` against the basis. Returns the residual and, when tracking,
    /// the coefficients `c` (over the accepted generators) with `v - residual = sum c_i g_i`.
    pub fn reduce(&self, v: &[FieldElem]) -> (Vec<FieldElem>, Vec<FieldElem>) {
        let fs = &self.fs;
        let mut res = v.to_vec();
        let mut coeff = vec![FieldElem::ZERO; if self.track { self.accepted.len() } else { 0 }];
        for (row, (&pc, combo)) in self
            .rows
            .iter()
            .zip(self.pivots.iter().zip(self.combos.iter().chain(std::iter::repeat(&Vec::new()))))
        {
            let f = res[pc];
            if f.is_zero() {
                continue;
            }
            for j in 0..self.n {
                if !row[j].is_zero() {
                    res[j] = fs.sub(res[j], fs.mul(f, row[j]));
                }
            }
            if self.track {
                for (k, &c) in combo.iter().enumerate() {
                    if !c.is_zero() {
                        coeff[k] = fs.add(coeff[k], fs.mul(f, c));
                    }
                }
            }
        }
        (res, coeff)
    }

    pub fn contains(&self, v: &[FieldElem]) -> bool {
        self.reduce(v).0.iter().all(|x| x.is_zero())
    }

    /// Inserts generator number `index`; returns whether it raised the rank.
    pub fn insert(&mut self, index: usize, v: &[FieldElem]) -> bool {
        assert_eq!(v.len(), self.n);
        if self.rows.len() == self.n {
            return false;
        }
        let fs = self.fs.clone();
        let (mut res, coeff) = self.reduce(v);
        let Some(pc) = res.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = fs.inv(res[pc]).expect("nonzero");
        for x in res.iter_mut() {
            *x = fs.mul(*x, inv);
        }
        // new row = (v - sum coeff_k g_k) * inv
        let mut combo = Vec::new();
        if self.track {
            combo = coeff.iter().map(|&c| fs.neg(fs.mul(c, inv))).collect();
            combo.push(inv);
            for c in self.combos.iter_mut() {
                c.push(FieldElem::ZERO);
            }
        }
        // Clear the new pivot from existing rows.
        for (i, row) in self.rows.iter_mut().enumerate() {
            let f = row[pc];
            if f.is_zero() {
                continue;
            }
            for j in 0..self.n {
                if !res[j].is_zero() {
                    row[j] = fs.sub(row[j], fs.mul(f, res[j]));
                }
            }
            if self.track {
                let ci = &mut self.combos[i];
                for (k, &c) in combo.iter().enumerate() {
                    if !c.is_zero() {
                        ci[k] = fs.sub(ci[k], fs.mul(f, c));
                    }
                }
            }
        }
        self.rows.push(res);
        self.pivots.push(pc);
        if self.track {
            self.combos.push(combo);
        }
        self.accepted.push(index);
        true
    }

    /// Rows sorted by pivot: the reduced row echelon basis of the span.
    pub fn into_rref(self) -> (Vec<Vec<FieldElem>>, Vec<usize>) {
        let mut pairs: Vec<_> = self.pivots.into_iter().zip(self.rows).collect();
        pairs.sort_by_key(|(p, _)| *p);
        let (pivots, rows) = pairs.into_iter().unzip();
        (rows, pivots)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(fs: &FieldSpec, rows: &[&[u32]]) -> Matrix {
        let cols = rows[0].len();
        let rows: Vec<Vec<FieldElem>> = rows
            .iter()
            .map(|r| r.iter().map(|&c| fs.elem(c).unwrap()).collect())
            .collect();
        Matrix::from_rows(fs, cols, &rows).unwrap()
    }

    #[test]
    fn rank_small() {
        let f2 = FieldSpec::prime(2).unwrap();
        assert_eq!(m(&f2, &[&[1, 0], &[0, 1]]).rank(), 2);
        assert_eq!(m(&f2, &[&[1, 1], &[1, 1]]).rank(), 1);
        assert_eq!(m(&f2, &[&[0, 0, 0, 0], &[0, 0, 0, 0]]).rank(), 0);
        let f3 = FieldSpec::prime(3).unwrap();
        assert_eq!(m(&f3, &[&[1, 2], &[2, 1]]).rank(), 1);
        assert_eq!(m(&f3, &[&[1, 1], &[1, 2]]).rank(), 2);
    }

    #[test]
    fn gf2_fast_path_agrees_with_rref() {
        let f2 = FieldSpec::prime(2).unwrap();
        for code in 0u32..(1 << 12) {
            let data: Vec<FieldElem> = (0..12).map(|i| f2.elem((code >> i) & 1).unwrap()).collect();
            let mat = Matrix::from_data(&f2, 3, 4, data);
            assert_eq!(rank_gf2(&mat), mat.rref().1.len());
        }
    }

    #[test]
    fn nullspace_is_kernel() {
        let f5 = FieldSpec::prime(5).unwrap();
        let a = m(&f5, &[&[1, 2, 3, 4], &[2, 4, 1, 3]]);
        let ns = a.nullspace();
        assert_eq!(ns.len(), 4 - a.rank());
        for v in &ns {
            for i in 0..a.rows() {
                assert!(f5.dot(a.row(i), v).is_zero());
            }
        }
    }

    #[test]
    fn tracked_combinations_reproduce_members() {
        let f3 = FieldSpec::prime(3).unwrap();
        let gens: Vec<Vec<FieldElem>> = [[1u32, 2, 0], [2, 1, 0], [0, 1, 1], [1, 0, 1]]
            .iter()
            .map(|r| r.iter().map(|&c| f3.elem(c).unwrap()).collect())
            .collect();
        let mut eb = EchelonBasis::tracking(&f3, 3);
        for (i, g) in gens.iter().enumerate() {
            eb.insert(i, g);
        }
        assert_eq!(eb.accepted(), &[0, 2]);
        let target: Vec<FieldElem> = [2u32, 2, 1].iter().map(|&c| f3.elem(c).unwrap()).collect();
        let (res, coeff) = eb.reduce(&target);
        assert!(res.iter().all(|x| x.is_zero()));
        let mut rebuilt = vec![FieldElem::ZERO; 3];
        for (k, &gi) in eb.accepted().iter().enumerate() {
            for j in 0..3 {
                rebuilt[j] = f3.add(rebuilt[j], f3.mul(coeff[k], gens[gi][j]));
            }
        }
        assert_eq!(rebuilt, target);
    }
}
