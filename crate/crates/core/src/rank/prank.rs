//! Partition rank: rank-one detection, bounds, and exact search with certificates.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::bias::arank;
use crate::error::{Error, Result};
use crate::field::{FieldElem, FieldSpec};
use crate::tensor::{IndexSplit, Tensor, TensorFile};

/// One rank-one term `T1(v^i : i in S) T2(v^i : i not in S)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Summand {
    pub split: IndexSplit,
    pub t1: Tensor,
    pub t2: Tensor,
}

impl Summand {
    pub fn tensor(&self) -> Result<Tensor> {
        Tensor::rank_one(&self.split, &self.t1, &self.t2)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PrankCertificate {
    pub summands: Vec<Summand>,
}

/// File form of a summand; split modes are numbered from 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummandFile {
    pub split: Vec<usize>,
    pub t1: TensorFile,
    pub t2: TensorFile,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub tensor: TensorFile,
    pub summands: Vec<SummandFile>,
}

impl PrankCertificate {
    pub fn len(&self) -> usize {
        self.summands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.summands.is_empty()
    }

    pub fn reconstitute(&self, fs: &FieldSpec, dims: &[usize]) -> Result<Tensor> {
        let mut acc = Tensor::zeros(fs, dims)?;
        for s in &self.summands {
            acc = acc.add(&s.tensor()?)?;
        }
        Ok(acc)
    }

    /// Checks that the summands add up to `t` entry by entry.
    pub fn verify(&self, t: &Tensor) -> Result<()> {
        if self.reconstitute(t.field(), t.dims())? != *t {
            return Err(Error::VerificationFailed(
                "certificate summands do not add up to the tensor".into(),
            ));
        }
        Ok(())
    }

    pub fn to_file(&self, t: &Tensor) -> CertificateFile {
        CertificateFile {
            tensor: t.to_file(),
            summands: self
                .summands
                .iter()
                .map(|s| SummandFile {
                    split: s.split.modes().iter().map(|m| m + 1).collect(),
                    t1: s.t1.to_file(),
                    t2: s.t2.to_file(),
                })
                .collect(),
        }
    }

    pub fn from_file(file: &CertificateFile) -> Result<(Tensor, PrankCertificate)> {
        let t = file.tensor.to_tensor()?;
        let mut summands = Vec::new();
        for s in &file.summands {
            if s.split.contains(&0) {
                return Err(Error::InvalidSplit("split modes are numbered from 1".into()));
            }
            let modes: Vec<usize> = s.split.iter().map(|m| m - 1).collect();
            summands.push(Summand {
                split: IndexSplit::new(t.order(), &modes)?,
                t1: s.t1.to_tensor()?,
                t2: s.t2.to_tensor()?,
            });
        }
        Ok((t, PrankCertificate { summands }))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PrankStatus {
    Exact,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrankBounds {
    /// Smallest integer at least the analytic rank.
    pub lower: usize,
    pub upper: usize,
    pub certificate: PrankCertificate,
    pub status: PrankStatus,
    /// Every size below this was refuted by the search.
    pub refuted_below: usize,
    pub nodes: u64,
}

/// A split and factors when some matricization of `t` has rank one. Splits are
/// tried in `(|S|, lexicographic)` order, one from each pair `{S, S^c}`.
pub fn prank_one_check(t: &Tensor) -> Result<Option<Summand>> {
    if t.order() < 2 {
        return Err(Error::OrderTooSmall(t.order()));
    }
    if t.is_zero() {
        return Err(Error::ZeroTensor);
    }
    for split in IndexSplit::canonical(t.order()) {
        if let Some(s) = rank_one_factors(t, &split)? {
            return Ok(Some(s));
        }
    }
    Ok(None)
}

/// Factors `t = A ⊗ B` along `split` when the matricization has rank one.
fn rank_one_factors(t: &Tensor, split: &IndexSplit) -> Result<Option<Summand>> {
    let fs = t.field();
    let m = t.matricize(split)?;
    let Some(i0) = (0..m.rows()).find(|&i| m.row(i).iter().any(|x| !x.is_zero())) else {
        return Ok(None);
    };
    let row = m.row(i0).to_vec();
    let j0 = row.iter().position(|x| !x.is_zero()).expect("nonzero row");
    let inv = fs.inv(row[j0])?;
    let a: Vec<FieldElem> = (0..m.rows()).map(|i| fs.mul(m.get(i, j0), inv)).collect();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if m.get(i, j) != fs.mul(a[i], row[j]) {
                return Ok(None);
            }
        }
    }
    let (d1, d2) = t.split_dims(split);
    Ok(Some(Summand {
        split: split.clone(),
        t1: Tensor::new(fs, d1, a)?,
        t2: Tensor::new(fs, d2, row)?,
    }))
}

/// `T = sum_j e_j ⊗ T_j` over the first shortest mode, skipping zero slices.
pub fn slice_decomposition(t: &Tensor) -> Result<PrankCertificate> {
    let d = t.order();
    if d < 2 {
        return Err(Error::OrderTooSmall(d));
    }
    let fs = t.field();
    let dims = t.dims();
    let mode = (0..d).min_by_key(|&m| (dims[m], m)).expect("d >= 2");
    let split = IndexSplit::new(d, &[mode])?;
    let mut perm = vec![mode];
    perm.extend((0..d).filter(|&m| m != mode));
    let p = t.permute_modes(&perm)?;
    let rest = t.len() / dims[mode];
    let rest_dims: Vec<usize> = perm[1..].iter().map(|&m| dims[m]).collect();
    let mut summands = Vec::new();
    for j in 0..dims[mode] {
        let slice = &p.entries()[j * rest..(j + 1) * rest];
        if slice.iter().all(|x| x.is_zero()) {
            continue;
        }
        let mut e = vec![FieldElem::ZERO; dims[mode]];
        e[j] = FieldElem::ONE;
        summands.push(Summand {
            split: split.clone(),
            t1: Tensor::vector(fs, &e)?,
            t2: Tensor::new(fs, rest_dims.clone(), slice.to_vec())?,
        });
    }
    Ok(PrankCertificate { summands })
}

struct Search<'a> {
    fs: &'a FieldSpec,
    splits: Vec<IndexSplit>,
    budget: u64,
    nodes: u64,
}

/// Calls `f` on every vector of `F^n` in code order until it returns `true`.
fn any_vector(fs: &FieldSpec, n: usize, mut f: impl FnMut(&[FieldElem]) -> bool) -> bool {
    let q = fs.q();
    let mut v = vec![FieldElem::ZERO; n];
    loop {
        if f(&v) {
            return true;
        }
        let mut j = 0;
        loop {
            if j == n {
                return false;
            }
            let c = v[j].code() + 1;
            if c < q {
                v[j] = fs.elem(c).expect("code below q");
                break;
            }
            v[j] = FieldElem::ZERO;
            j += 1;
        }
    }
}

enum Outcome {
    Found(Vec<Summand>),
    Refuted,
    OutOfBudget,
}

impl Search<'_> {
    /// Is `residual` a sum of at most `r` rank-one tensors?
    fn run(&mut self, residual: &Tensor, r: usize) -> Outcome {
        if residual.is_zero() {
            return Outcome::Found(Vec::new());
        }
        if r == 0 {
            return Outcome::Refuted;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return Outcome::OutOfBudget;
        }
        if r == 1 {
            return match prank_one_check(residual).expect("nonzero tensor of order >= 2") {
                Some(s) => Outcome::Found(vec![s]),
                None => Outcome::Refuted,
            };
        }
        // Some summand of any decomposition is nonzero at the residual's first
        // nonzero entry; normalizing its first factor there to 1 fixes the scaling.
        let lead = residual
            .entries()
            .iter()
            .position(|x| !x.is_zero())
            .expect("nonzero residual");
        let lead_idx = residual.multi_index(lead);
        let mut seen: HashSet<Vec<FieldElem>> = HashSet::new();
        let splits = self.splits.clone();
        let fs = self.fs;
        let mut result = Outcome::Refuted;
        for split in &splits {
            let (d1, d2) = residual.split_dims(split);
            let (n1, n2): (usize, usize) = (d1.iter().product(), d2.iter().product());
            let p1 = flat(&d1, &split.modes().iter().map(|&m| lead_idx[m]).collect::<Vec<_>>());
            let p2 = flat(&d2, &split.complement().iter().map(|&m| lead_idx[m]).collect::<Vec<_>>());
            let stop = any_vector(fs, n1, |a| {
                if a[p1] != FieldElem::ONE {
                    return false;
                }
                let t1 = Tensor::new(fs, d1.clone(), a.to_vec()).expect("shape");
                any_vector(fs, n2, |b| {
                    if b[p2].is_zero() {
                        return false;
                    }
                    let t2 = Tensor::new(fs, d2.clone(), b.to_vec()).expect("shape");
                    let s = Summand {
                        split: split.clone(),
                        t1: t1.clone(),
                        t2,
                    };
                    let term = s.tensor().expect("shape");
                    if !seen.insert(term.entries().to_vec()) {
                        return false;
                    }
                    let next = residual.sub(&term).expect("shape");
                    match self.run(&next, r - 1) {
                        Outcome::Found(mut rest) => {
                            rest.insert(0, s);
                            result = Outcome::Found(rest);
                            true
                        }
                        Outcome::OutOfBudget => {
                            result = Outcome::OutOfBudget;
                            true
                        }
                        Outcome::Refuted => false,
                    }
                })
            });
            if stop {
                break;
            }
        }
        result
    }
}

fn flat(dims: &[usize], idx: &[usize]) -> usize {
    idx.iter().zip(dims).fold(0, |acc, (&i, &n)| acc * n + i)
}

/// Lower bound from the analytic rank, upper bound from slices, then an
/// iterative-deepening search that closes the gap when `budget` allows.
pub fn prank_bounds(t: &Tensor, budget: u64) -> Result<PrankBounds> {
    let ar = arank(t)?;
    let lower = ar.ceil as usize;
    let mut certificate = slice_decomposition(t)?;
    let mut upper = certificate.len();
    let mut search = Search {
        fs: t.field(),
        splits: IndexSplit::canonical(t.order()),
        budget,
        nodes: 0,
    };
    let mut refuted_below = lower;
    let mut status = PrankStatus::Exact;
    for r in lower..upper {
        match search.run(t, r) {
            Outcome::Found(summands) => {
                certificate = PrankCertificate { summands };
                upper = certificate.len();
                break;
            }
            Outcome::Refuted => refuted_below = r + 1,
            Outcome::OutOfBudget => {
                status = PrankStatus::Inconclusive;
                break;
            }
        }
    }
    if status == PrankStatus::Exact {
        refuted_below = upper;
    }
    certificate.verify(t)?;
    Ok(PrankBounds {
        lower,
        upper,
        certificate,
        status,
        refuted_below,
        nodes: search.nodes,
    })
}
