//! Dense order-d tensors over a finite field.
//!
//! Entries are stored row-major with the last index fastest. Modes are
//! 0-based in the API; file formats and reports number them from 1.

mod io;

use crate::error::{Error, Result};
use crate::field::{FieldElem, FieldSpec};
use crate::guard;
use crate::linalg::Matrix;

pub use io::{parse_tensor, TensorFile};
pub(crate) use io::num as parse_num;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tensor {
    fs: FieldSpec,
    dims: Vec<usize>,
    entries: Vec<FieldElem>,
}

/// Result of contracting over the leading modes: a tensor, or a scalar when
/// every mode was consumed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Contracted {
    Tensor(Tensor),
    Scalar(FieldElem),
}

/// A proper nonempty subset `S` of the modes `0..d`, kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSplit {
    d: usize,
    s: Vec<usize>,
}

impl IndexSplit {
    pub fn new(d: usize, modes: &[usize]) -> Result<Self> {
        let mut s = modes.to_vec();
        s.sort_unstable();
        s.dedup();
        if s.len() != modes.len() {
            return Err(Error::InvalidSplit(format!("repeated mode in {modes:?}")));
        }
        if s.is_empty() || s.len() >= d || s.iter().any(|&m| m >= d) {
            return Err(Error::InvalidSplit(format!(
                "{modes:?} is not a proper nonempty subset of 0..{d}"
            )));
        }
        Ok(IndexSplit { d, s })
    }

    pub fn order(&self) -> usize {
        self.d
    }

    pub fn modes(&self) -> &[usize] {
        &self.s
    }

    pub fn complement(&self) -> Vec<usize> {
        (0..self.d).filter(|m| !self.s.contains(m)).collect()
    }

    pub fn complement_split(&self) -> IndexSplit {
        IndexSplit {
            d: self.d,
            s: self.complement(),
        }
    }

    pub fn contains(&self, m: usize) -> bool {
        self.s.binary_search(&m).is_ok()
    }

    fn sort_key(&self) -> (usize, &[usize]) {
        (self.s.len(), &self.s)
    }

    /// Every split, ordered by `(|S|, lexicographic)`.
    pub fn all(d: usize) -> Vec<IndexSplit> {
        let mut out: Vec<IndexSplit> = (1u32..(1 << d) - 1)
            .map(|mask| IndexSplit {
                d,
                s: (0..d).filter(|&m| mask >> m & 1 == 1).collect(),
            })
            .collect();
        out.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        out
    }

    /// One split from each pair `{S, S^c}` (the earlier one in [`IndexSplit::all`]
    /// order), keeping that order. `S` and `S^c` describe the same rank-one tensors.
    pub fn canonical(d: usize) -> Vec<IndexSplit> {
        let all = IndexSplit::all(d);
        all.iter()
            .filter(|s| {
                let c = s.complement_split();
                s.sort_key() <= c.sort_key()
            })
            .cloned()
            .collect()
    }
}

fn product(dims: &[usize]) -> usize {
    dims.iter().product()
}

impl Tensor {
    pub fn new(fs: &FieldSpec, dims: Vec<usize>, entries: Vec<FieldElem>) -> Result<Self> {
        Self::check_dims(&dims)?;
        if entries.len() != product(&dims) {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for dims {dims:?}",
                entries.len()
            )));
        }
        for &e in &entries {
            fs.check(e)?;
        }
        Ok(Tensor {
            fs: fs.clone(),
            dims,
            entries,
        })
    }

    pub fn from_codes(fs: &FieldSpec, dims: Vec<usize>, codes: &[u32]) -> Result<Self> {
        let entries = codes.iter().map(|&c| fs.elem(c)).collect::<Result<Vec<_>>>()?;
        Self::new(fs, dims, entries)
    }

    fn check_dims(dims: &[usize]) -> Result<()> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::DimensionMismatch(format!(
                "dims {dims:?} must be a nonempty list of positive sizes"
            )));
        }
        let size = dims
            .iter()
            .try_fold(1u128, |acc, &n| acc.checked_mul(n as u128))
            .unwrap_or(u128::MAX);
        guard::check("tensor storage", size, guard::STORAGE_LIMIT)
    }

    pub fn zeros(fs: &FieldSpec, dims: &[usize]) -> Result<Self> {
        Self::check_dims(dims)?;
        Ok(Tensor {
            fs: fs.clone(),
            dims: dims.to_vec(),
            entries: vec![FieldElem::ZERO; product(dims)],
        })
    }

    /// The one-hot array with a 1 at `index`.
    pub fn unit(fs: &FieldSpec, dims: &[usize], index: &[usize]) -> Result<Self> {
        let mut t = Self::zeros(fs, dims)?;
        let flat = t.flat_index(index)?;
        t.entries[flat] = FieldElem::ONE;
        Ok(t)
    }

    pub fn vector(fs: &FieldSpec, v: &[FieldElem]) -> Result<Self> {
        Self::new(fs, vec![v.len()], v.to_vec())
    }

    /// `u_1 ⊗ ... ⊗ u_d`.
    pub fn product_of(fs: &FieldSpec, vs: &[Vec<FieldElem>]) -> Result<Self> {
        let mut it = vs.iter();
        let first = it
            .next()
            .ok_or_else(|| Error::DimensionMismatch("empty product".into()))?;
        let mut t = Self::vector(fs, first)?;
        for v in it {
            t = t.outer(&Self::vector(fs, v)?)?;
        }
        Ok(t)
    }

    pub fn field(&self) -> &FieldSpec {
        &self.fs
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn entries(&self) -> &[FieldElem] {
        &self.entries
    }

    pub fn codes(&self) -> Vec<u32> {
        self.entries.iter().map(|e| e.code()).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn flat_index(&self, index: &[usize]) -> Result<usize> {
        if index.len() != self.dims.len() || index.iter().zip(&self.dims).any(|(&i, &n)| i >= n) {
            return Err(Error::DimensionMismatch(format!(
                "index {index:?} outside dims {:?}",
                self.dims
            )));
        }
        Ok(index
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &n)| acc * n + i))
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, &n) in out.iter_mut().zip(&self.dims).rev() {
            *slot = flat % n;
            flat /= n;
        }
        out
    }

    pub fn get(&self, index: &[usize]) -> Result<FieldElem> {
        Ok(self.entries[self.flat_index(index)?])
    }

    pub fn set(&mut self, index: &[usize], v: FieldElem) -> Result<()> {
        self.fs.check(v)?;
        let flat = self.flat_index(index)?;
        self.entries[flat] = v;
        Ok(())
    }

    fn same_shape(&self, other: &Tensor) -> Result<()> {
        if self.fs != other.fs {
            return Err(Error::FieldMismatch);
        }
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!(
                "dims {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        self.same_shape(other)?;
        let fs = &self.fs;
        Ok(Tensor {
            fs: fs.clone(),
            dims: self.dims.clone(),
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| fs.add(a, b))
                .collect(),
        })
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        self.same_shape(other)?;
        let fs = &self.fs;
        Ok(Tensor {
            fs: fs.clone(),
            dims: self.dims.clone(),
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| fs.sub(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, c: FieldElem) -> Tensor {
        Tensor {
            fs: self.fs.clone(),
            dims: self.dims.clone(),
            entries: self.entries.iter().map(|&a| self.fs.mul(c, a)).collect(),
        }
    }

    /// Entry-wise dot product `r.s`.
    pub fn dot(&self, other: &Tensor) -> Result<FieldElem> {
        self.same_shape(other)?;
        Ok(self.fs.dot(&self.entries, &other.entries))
    }

    /// Contraction of the first mode against `v`: an order `d-1` array given as raw
    /// entries (a single entry when `d = 1`).
    pub fn contract_first_raw(&self, v: &[FieldElem]) -> Vec<FieldElem> {
        let fs = &self.fs;
        let rest = self.entries.len() / self.dims[0];
        let mut out = vec![FieldElem::ZERO; rest];
        for (i, &vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            let block = &self.entries[i * rest..(i + 1) * rest];
            if vi == FieldElem::ONE {
                for (o, &b) in out.iter_mut().zip(block) {
                    *o = fs.add(*o, b);
                }
            } else {
                for (o, &b) in out.iter_mut().zip(block) {
                    *o = fs.add(*o, fs.mul(vi, b));
                }
            }
        }
        out
    }

    /// `rs` for `s` over the leading `k` modes of `r = self`.
    pub fn contract(&self, s: &Tensor) -> Result<Contracted> {
        if self.fs != s.fs {
            return Err(Error::FieldMismatch);
        }
        let k = s.order();
        if k > self.order() || self.dims[..k] != s.dims[..] {
            return Err(Error::DimensionMismatch(format!(
                "cannot contract dims {:?} against leading modes of {:?}",
                s.dims, self.dims
            )));
        }
        let fs = &self.fs;
        let lead = s.entries.len();
        let rest = self.entries.len() / lead;
        let mut out = vec![FieldElem::ZERO; rest];
        for (i, &si) in s.entries.iter().enumerate() {
            if si.is_zero() {
                continue;
            }
            for (o, &b) in out.iter_mut().zip(&self.entries[i * rest..(i + 1) * rest]) {
                *o = fs.add(*o, fs.mul(si, b));
            }
        }
        if k == self.order() {
            return Ok(Contracted::Scalar(out[0]));
        }
        Ok(Contracted::Tensor(Tensor {
            fs: fs.clone(),
            dims: self.dims[k..].to_vec(),
            entries: out,
        }))
    }

    /// `T(v^1, ..., v^d)`.
    pub fn eval(&self, vs: &[Vec<FieldElem>]) -> Result<FieldElem> {
        if vs.len() != self.order() {
            return Err(Error::DimensionMismatch(format!(
                "{} vectors for an order {} tensor",
                vs.len(),
                self.order()
            )));
        }
        for (v, &n) in vs.iter().zip(&self.dims) {
            if v.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "vector of length {} for a mode of size {n}",
                    v.len()
                )));
            }
            for &x in v {
                self.fs.check(x)?;
            }
        }
        let mut cur = self.entries.clone();
        let mut rest = cur.len();
        for (v, &n) in vs.iter().zip(&self.dims) {
            rest /= n;
            let mut next = vec![FieldElem::ZERO; rest];
            for (i, &vi) in v.iter().enumerate() {
                if vi.is_zero() {
                    continue;
                }
                for (o, &b) in next.iter_mut().zip(&cur[i * rest..(i + 1) * rest]) {
                    *o = self.fs.add(*o, self.fs.mul(vi, b));
                }
            }
            cur = next;
        }
        Ok(cur[0])
    }

    fn check_split(&self, split: &IndexSplit) -> Result<()> {
        if split.order() != self.order() {
            return Err(Error::InvalidSplit(format!(
                "split of order {} for a tensor of order {}",
                split.order(),
                self.order()
            )));
        }
        Ok(())
    }

    /// Rows indexed by multi-indices over `S`, columns over `S^c`, both row-major.
    pub fn matricize(&self, split: &IndexSplit) -> Result<Matrix> {
        self.check_split(split)?;
        let (perm, rows) = self.split_perm(split);
        let permuted = self.permute_modes(&perm)?;
        let cols = self.entries.len() / rows;
        Ok(Matrix::from_data(&self.fs, rows, cols, permuted.entries))
    }

    fn split_perm(&self, split: &IndexSplit) -> (Vec<usize>, usize) {
        let mut perm = split.modes().to_vec();
        perm.extend(split.complement());
        let rows = split.modes().iter().map(|&m| self.dims[m]).product();
        (perm, rows)
    }

    /// Inverse of [`Tensor::matricize`].
    pub fn unmatricize(split: &IndexSplit, dims: &[usize], m: &Matrix) -> Result<Tensor> {
        if split.order() != dims.len() {
            return Err(Error::InvalidSplit("split order differs from dims".into()));
        }
        let mut perm = split.modes().to_vec();
        perm.extend(split.complement());
        let pdims: Vec<usize> = perm.iter().map(|&m| dims[m]).collect();
        let rows: usize = split.modes().iter().map(|&m| dims[m]).product();
        if m.rows() != rows || m.rows() * m.cols() != product(dims) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for dims {dims:?}",
                m.rows(),
                m.cols()
            )));
        }
        let t = Tensor::new(m.field(), pdims, m.data().to_vec())?;
        t.permute_modes(&inverse_perm(&perm))
    }

    /// The tensor `T'` with `T'[i_{perm[0]}, ..., i_{perm[d-1]}] = T[i_0, ..., i_{d-1}]`,
    /// i.e. new mode `j` is old mode `perm[j]`.
    pub fn permute_modes(&self, perm: &[usize]) -> Result<Tensor> {
        let d = self.order();
        let mut seen = vec![false; d];
        if perm.len() != d || perm.iter().any(|&m| m >= d || std::mem::replace(&mut seen[m], true)) {
            return Err(Error::DimensionMismatch(format!("{perm:?} is not a permutation of 0..{d}")));
        }
        let new_dims: Vec<usize> = perm.iter().map(|&m| self.dims[m]).collect();
        let mut old_strides = vec![1usize; d];
        for m in (0..d.saturating_sub(1)).rev() {
            old_strides[m] = old_strides[m + 1] * self.dims[m + 1];
        }
        let strides: Vec<usize> = perm.iter().map(|&m| old_strides[m]).collect();
        let mut entries = Vec::with_capacity(self.entries.len());
        let mut idx = vec![0usize; d];
        let mut src = 0usize;
        for _ in 0..self.entries.len() {
            entries.push(self.entries[src]);
            for j in (0..d).rev() {
                idx[j] += 1;
                src += strides[j];
                if idx[j] < new_dims[j] {
                    break;
                }
                src -= strides[j] * new_dims[j];
                idx[j] = 0;
            }
        }
        Ok(Tensor {
            fs: self.fs.clone(),
            dims: new_dims,
            entries,
        })
    }

    /// `self ⊗ other`, modes of `self` first.
    pub fn outer(&self, other: &Tensor) -> Result<Tensor> {
        if self.fs != other.fs {
            return Err(Error::FieldMismatch);
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self::check_dims(&dims)?;
        let fs = &self.fs;
        let mut entries = Vec::with_capacity(self.len() * other.len());
        for &a in &self.entries {
            for &b in &other.entries {
                entries.push(fs.mul(a, b));
            }
        }
        Ok(Tensor {
            fs: fs.clone(),
            dims,
            entries,
        })
    }

    /// `T(v) = T1(v^i : i in S) T2(v^i : i not in S)`.
    pub fn rank_one(split: &IndexSplit, t1: &Tensor, t2: &Tensor) -> Result<Tensor> {
        let s = split.modes();
        let sc = split.complement();
        if t1.dims.len() != s.len() || t2.dims.len() != sc.len() {
            return Err(Error::DimensionMismatch(format!(
                "factor orders {} and {} for split {:?} of order {}",
                t1.order(),
                t2.order(),
                s,
                split.order()
            )));
        }
        let prod = t1.outer(t2)?;
        let mut perm = s.to_vec();
        perm.extend(sc);
        prod.permute_modes(&inverse_perm(&perm))
    }

    /// The dims of the two factors of a rank-one tensor along `split`.
    pub fn split_dims(&self, split: &IndexSplit) -> (Vec<usize>, Vec<usize>) {
        (
            split.modes().iter().map(|&m| self.dims[m]).collect(),
            split.complement().iter().map(|&m| self.dims[m]).collect(),
        )
    }
}

pub fn inverse_perm(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (j, &m) in perm.iter().enumerate() {
        inv[m] = j;
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(q: u32) -> FieldSpec {
        FieldSpec::of_order(q).unwrap()
    }

    fn els(fs: &FieldSpec, codes: &[u32]) -> Vec<FieldElem> {
        codes.iter().map(|&c| fs.elem(c).unwrap()).collect()
    }

    fn identity(fs: &FieldSpec, n: usize) -> Tensor {
        let mut t = Tensor::zeros(fs, &[n, n]).unwrap();
        for i in 0..n {
            t.set(&[i, i], FieldElem::ONE).unwrap();
        }
        t
    }

    #[test]
    fn eval_examples() {
        let f2 = f(2);
        let id = identity(&f2, 2);
        assert_eq!(id.eval(&[els(&f2, &[1, 0]), els(&f2, &[1, 0])]).unwrap(), FieldElem::ONE);
        assert_eq!(id.eval(&[els(&f2, &[1, 1]), els(&f2, &[0, 0])]).unwrap(), FieldElem::ZERO);
        let e111 = Tensor::unit(&f2, &[2, 2, 2], &[0, 0, 0]).unwrap();
        let e1 = els(&f2, &[1, 0]);
        assert_eq!(e111.eval(&[e1.clone(), e1.clone(), e1]).unwrap(), FieldElem::ONE);
        assert!(id.eval(&[els(&f2, &[1, 0])]).is_err());
    }

    #[test]
    fn contract_examples() {
        let f3 = f(3);
        let id = identity(&f3, 2);
        let e1 = Tensor::vector(&f3, &els(&f3, &[1, 0])).unwrap();
        let e2 = Tensor::vector(&f3, &els(&f3, &[0, 1])).unwrap();
        assert_eq!(id.contract(&e1).unwrap(), Contracted::Tensor(e1.clone()));
        let zero = Tensor::vector(&f3, &els(&f3, &[0, 0])).unwrap();
        assert_eq!(id.contract(&zero).unwrap(), Contracted::Tensor(zero.clone()));
        let r = e1.outer(&e2).unwrap();
        assert_eq!(r.contract(&e1).unwrap(), Contracted::Tensor(e2.clone()));
        assert_eq!(r.contract(&r).unwrap(), Contracted::Scalar(FieldElem::ONE));
        assert!(r.contract(&Tensor::vector(&f3, &els(&f3, &[1])).unwrap()).is_err());
    }

    #[test]
    fn matricize_examples() {
        let f2 = f(2);
        let t = Tensor::zeros(&f2, &[2, 2, 2]).unwrap();
        let s1 = IndexSplit::new(3, &[0]).unwrap();
        let m = t.matricize(&s1).unwrap();
        assert_eq!((m.rows(), m.cols()), (2, 4));
        assert_eq!(m.rank(), 0);
        let u = Tensor::product_of(&f2, &[els(&f2, &[1, 1]), els(&f2, &[0, 1]), els(&f2, &[1, 0])]).unwrap();
        assert_eq!(u.matricize(&s1).unwrap().rank(), 1);
    }

    #[test]
    fn rank_one_examples() {
        let f2 = f(2);
        let s = IndexSplit::new(3, &[0]).unwrap();
        let e1 = Tensor::vector(&f2, &els(&f2, &[1, 0])).unwrap();
        let t = Tensor::rank_one(&s, &e1, &identity(&f2, 2)).unwrap();
        assert_eq!(t.codes(), vec![1, 0, 0, 1, 0, 0, 0, 0]);
        let s12 = IndexSplit::new(3, &[0, 1]).unwrap();
        let t1 = e1.outer(&e1).unwrap();
        assert_eq!(
            Tensor::rank_one(&s12, &t1, &e1).unwrap(),
            Tensor::unit(&f2, &[2, 2, 2], &[0, 0, 0]).unwrap()
        );
        // split {2} of order 3: T1 lives on the middle mode
        let s2 = IndexSplit::new(3, &[1]).unwrap();
        let a = Tensor::vector(&f2, &els(&f2, &[0, 1])).unwrap();
        let t = Tensor::rank_one(&s2, &a, &e1.outer(&e1).unwrap()).unwrap();
        assert_eq!(t, Tensor::unit(&f2, &[2, 2, 2], &[0, 1, 0]).unwrap());
    }

    #[test]
    fn splits_are_ordered() {
        let all: Vec<Vec<usize>> = IndexSplit::all(3).iter().map(|s| s.modes().to_vec()).collect();
        assert_eq!(all, vec![vec![0], vec![1], vec![2], vec![0, 1], vec![0, 2], vec![1, 2]]);
        let canon: Vec<Vec<usize>> = IndexSplit::canonical(3).iter().map(|s| s.modes().to_vec()).collect();
        assert_eq!(canon, vec![vec![0], vec![1], vec![2]]);
        let canon4 = IndexSplit::canonical(4);
        assert_eq!(canon4.len(), 7);
        assert!(IndexSplit::new(2, &[0, 1]).is_err());
        assert!(IndexSplit::new(2, &[]).is_err());
    }

    fn arb_tensor() -> impl Strategy<Value = Tensor> {
        (prop::sample::select(vec![2u32, 3, 4, 5]), prop::collection::vec(1usize..4, 1..5))
            .prop_flat_map(|(q, dims)| {
                let len: usize = dims.iter().product();
                (Just(q), Just(dims), prop::collection::vec(0..q, len))
            })
            .prop_map(|(q, dims, codes)| Tensor::from_codes(&f(q), dims, &codes).unwrap())
    }

    proptest! {
        #[test]
        fn eval_on_basis_reads_entries(t in arb_tensor()) {
            for flat in 0..t.len() {
                let idx = t.multi_index(flat);
                let vs: Vec<Vec<FieldElem>> = idx.iter().zip(t.dims()).map(|(&i, &n)| {
                    let mut v = vec![FieldElem::ZERO; n];
                    v[i] = FieldElem::ONE;
                    v
                }).collect();
                prop_assert_eq!(t.eval(&vs).unwrap(), t.entries()[flat]);
            }
        }

        #[test]
        fn repeated_contraction_matches_eval(t in arb_tensor(), seed in any::<u64>()) {
            let fs = t.field().clone();
            let mut rng = crate::rng::Stream::new(seed, "contract");
            let vs: Vec<Vec<FieldElem>> = t.dims().iter().map(|&n| rng.vector(&fs, n)).collect();
            let mut cur = Contracted::Tensor(t.clone());
            for v in &vs {
                let Contracted::Tensor(c) = cur else { unreachable!() };
                cur = c.contract(&Tensor::vector(&fs, v).unwrap()).unwrap();
            }
            prop_assert_eq!(cur, Contracted::Scalar(t.eval(&vs).unwrap()));
        }

        #[test]
        fn matricize_roundtrip(t in arb_tensor()) {
            if t.order() >= 2 {
                for split in IndexSplit::all(t.order()) {
                    let m = t.matricize(&split).unwrap();
                    prop_assert_eq!(Tensor::unmatricize(&split, t.dims(), &m).unwrap(), t.clone());
                }
            }
        }

        #[test]
        fn permutation_inverse(t in arb_tensor()) {
            let d = t.order();
            let perm: Vec<usize> = (0..d).rev().collect();
            let p = t.permute_modes(&perm).unwrap();
            prop_assert_eq!(p.permute_modes(&inverse_perm(&perm)).unwrap(), t.clone());
            for flat in 0..t.len() {
                let idx = t.multi_index(flat);
                let pidx: Vec<usize> = perm.iter().map(|&m| idx[m]).collect();
                prop_assert_eq!(p.get(&pidx).unwrap(), t.entries()[flat]);
            }
        }
    }
}
