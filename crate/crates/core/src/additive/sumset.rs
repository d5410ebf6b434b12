use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldDescriptor, FieldElem, FieldSpec};
use crate::guard;
use crate::points::PointSpace;
use crate::rng::Stream;
use crate::tensor::Tensor;

/// One product array `u_1 ⊗ ... ⊗ u_d`, kept with its factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductItem {
    pub factors: Vec<Vec<FieldElem>>,
    pub multiplicity: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Generators {
    /// Every tuple `(u_1, ..., u_d)` once.
    All,
    Explicit(Vec<ProductItem>),
}

/// A multiset of product arrays over fixed dims, either the full multiset of
/// all factor tuples or an explicit indexed list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductMultiset {
    fs: FieldSpec,
    dims: Vec<usize>,
    gens: Generators,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductItemFile {
    pub factors: Vec<Vec<u32>>,
    #[serde(default = "one")]
    pub multiplicity: u64,
}

fn one() -> u64 {
    1
}

/// File form; `items: null` stands for the full multiset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductMultisetFile {
    pub field: FieldDescriptor,
    pub dims: Vec<usize>,
    pub items: Option<Vec<ProductItemFile>>,
}

impl ProductMultiset {
    pub fn all(fs: &FieldSpec, dims: &[usize]) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::OrderTooSmall(0));
        }
        Ok(ProductMultiset {
            fs: fs.clone(),
            dims: dims.to_vec(),
            gens: Generators::All,
        })
    }

    pub fn explicit(fs: &FieldSpec, dims: &[usize], items: Vec<ProductItem>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::OrderTooSmall(0));
        }
        for it in &items {
            if it.factors.len() != dims.len() || it.factors.iter().zip(dims).any(|(f, &n)| f.len() != n) {
                return Err(Error::DimensionMismatch("factor lengths do not match dims".into()));
            }
            for &x in it.factors.iter().flatten() {
                fs.check(x)?;
            }
            if it.multiplicity == 0 {
                return Err(Error::Parse("multiplicity must be positive".into()));
            }
        }
        Ok(ProductMultiset {
            fs: fs.clone(),
            dims: dims.to_vec(),
            gens: Generators::Explicit(items),
        })
    }

    /// Explicit multiset of the given factor-code tuples, multiplicity one each.
    pub fn from_tuples(fs: &FieldSpec, dims: &[usize], tuples: &[Vec<u32>]) -> Result<Self> {
        let spaces = mode_spaces(fs, dims)?;
        let items = tuples
            .iter()
            .map(|t| ProductItem {
                factors: t.iter().zip(&spaces).map(|(&c, sp)| sp.decode(c)).collect(),
                multiplicity: 1,
            })
            .collect();
        ProductMultiset::explicit(fs, dims, items)
    }

    pub fn field(&self) -> &FieldSpec {
        &self.fs
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn is_full(&self) -> bool {
        matches!(self.gens, Generators::All)
    }

    /// `|B| = prod q^{n_i}`, the size of the full multiset.
    pub fn full_size(&self) -> Result<u64> {
        let exp: usize = self.dims.iter().sum();
        Ok(guard::check_pow("product multiset", self.fs.q() as u64, exp as u64, guard::ENUMERATION_LIMIT)? as u64)
    }

    /// Total size counted with multiplicity.
    pub fn size(&self) -> Result<u64> {
        match &self.gens {
            Generators::All => self.full_size(),
            Generators::Explicit(items) => Ok(items.iter().map(|i| i.multiplicity).sum()),
        }
    }

    /// Items in index order; the full multiset is materialized in
    /// little-endian tuple order (mode 1 fastest).
    pub fn items(&self) -> Result<Vec<ProductItem>> {
        match &self.gens {
            Generators::Explicit(items) => Ok(items.clone()),
            Generators::All => {
                let total = self.full_size()?;
                guard::check("product multiset items", total as u128, guard::STORAGE_LIMIT)?;
                let spaces = mode_spaces(&self.fs, &self.dims)?;
                Ok((0..total)
                    .map(|mut i| {
                        let factors = spaces
                            .iter()
                            .map(|sp| {
                                let c = (i % sp.size()) as u32;
                                i /= sp.size();
                                sp.decode(c)
                            })
                            .collect();
                        ProductItem { factors, multiplicity: 1 }
                    })
                    .collect())
            }
        }
    }

    /// Factor tuples as per-mode point codes, in index order.
    pub fn tuples(&self) -> Result<Vec<Vec<u32>>> {
        let spaces = mode_spaces(&self.fs, &self.dims)?;
        Ok(self
            .items()?
            .iter()
            .map(|it| it.factors.iter().zip(&spaces).map(|(f, sp)| sp.encode(f)).collect())
            .collect())
    }

    pub fn tensors(&self) -> Result<Vec<Tensor>> {
        self.items()?
            .iter()
            .map(|it| Tensor::product_of(&self.fs, &it.factors))
            .collect()
    }

    /// A random sub-multiset of the full one: each tuple kept with probability `num/den`.
    pub fn random_subset(fs: &FieldSpec, dims: &[usize], num: u64, den: u64, rng: &mut Stream) -> Result<Self> {
        let full = ProductMultiset::all(fs, dims)?;
        let items = full.items()?.into_iter().filter(|_| rng.chance(num, den)).collect();
        ProductMultiset::explicit(fs, dims, items)
    }

    pub fn to_file(&self) -> ProductMultisetFile {
        ProductMultisetFile {
            field: self.fs.descriptor(),
            dims: self.dims.clone(),
            items: match &self.gens {
                Generators::All => None,
                Generators::Explicit(items) => Some(
                    items
                        .iter()
                        .map(|it| ProductItemFile {
                            factors: it.factors.iter().map(|f| f.iter().map(|x| x.code()).collect()).collect(),
                            multiplicity: it.multiplicity,
                        })
                        .collect(),
                ),
            },
        }
    }

    pub fn from_file(f: &ProductMultisetFile) -> Result<Self> {
        let fs = FieldSpec::from_descriptor(&f.field)?;
        match &f.items {
            None => ProductMultiset::all(&fs, &f.dims),
            Some(items) => {
                let items = items
                    .iter()
                    .map(|it| {
                        Ok(ProductItem {
                            factors: it
                                .factors
                                .iter()
                                .map(|v| v.iter().map(|&c| fs.elem(c)).collect::<Result<Vec<_>>>())
                                .collect::<Result<_>>()?,
                            multiplicity: it.multiplicity,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                ProductMultiset::explicit(&fs, &f.dims, items)
            }
        }
    }
}

pub(crate) fn mode_spaces(fs: &FieldSpec, dims: &[usize]) -> Result<Vec<PointSpace>> {
    dims.iter().map(|&n| PointSpace::new(fs, n)).collect()
}

/// `target = sum of plus - sum of minus`, indices into a [`ProductMultiset`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SumsetCertificate {
    pub plus: Vec<usize>,
    pub minus: Vec<usize>,
}

impl SumsetCertificate {
    pub fn evaluate(&self, tensors: &[Tensor], fs: &FieldSpec, dims: &[usize]) -> Result<Tensor> {
        let mut acc = Tensor::zeros(fs, dims)?;
        for &i in &self.plus {
            acc = acc.add(tensors.get(i).ok_or_else(|| Error::InconsistentWitness(format!("index {i} out of range")))?)?;
        }
        for &i in &self.minus {
            acc = acc.sub(tensors.get(i).ok_or_else(|| Error::InconsistentWitness(format!("index {i} out of range")))?)?;
        }
        Ok(acc)
    }

    /// Re-checks the identity by summation.
    pub fn verify(&self, target: &Tensor, tensors: &[Tensor]) -> Result<bool> {
        Ok(&self.evaluate(tensors, target.field(), target.dims())? == target)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SumsetOutcome {
    Found(SumsetCertificate),
    /// The exhaustive search finished without a representation.
    NotMember,
    /// The budget ran out before the search finished.
    Inconclusive { visited: u64 },
}

/// Multisets of `0..=k` indices drawn from `0..m`, in order of size then lex.
fn for_each_multiset(m: usize, k: usize, mut f: impl FnMut(&[usize]) -> bool) -> bool {
    fn rec(m: usize, left: usize, start: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if left == 0 {
            return f(cur);
        }
        for i in start..m {
            cur.push(i);
            let go = rec(m, left - 1, i, cur, f);
            cur.pop();
            if !go {
                return false;
            }
        }
        true
    }
    let mut cur = Vec::new();
    (0..=k).all(|size| rec(m, size, 0, &mut cur, &mut f))
}

/// Searches for `x = b_1 + ... + b_a - b'_1 - ... - b'_c` with `a <= k`,
/// `c <= l` and all `b` from `bp` (repetition allowed). Sums of plus terms are
/// tabulated first and the minus side is matched against them. The first
/// representation in order of minus size, then lex, is returned with the
/// smallest matching plus side, and is re-verified. Every tabulated or probed multiset counts against `budget`.
pub fn sumset_member(x: &Tensor, k: usize, l: usize, bp: &ProductMultiset, budget: u64) -> Result<SumsetOutcome> {
    if x.field() != bp.field() {
        return Err(Error::FieldMismatch);
    }
    if x.dims() != bp.dims() {
        return Err(Error::DimensionMismatch("target dims differ from the multiset".into()));
    }
    let tensors = bp.tensors()?;
    // distinct arrays, each represented by its first index
    let mut seen: HashMap<Vec<FieldElem>, usize> = HashMap::new();
    let mut reps = Vec::new();
    for (i, t) in tensors.iter().enumerate() {
        if !seen.contains_key(t.entries()) {
            seen.insert(t.entries().to_vec(), i);
            reps.push(i);
        }
    }
    let fs = x.field();
    let dims = x.dims();
    let mut visited = 0u64;
    let mut plus_sums: HashMap<Vec<FieldElem>, Vec<usize>> = HashMap::new();
    let sum_of = |idx: &[usize]| -> Result<Tensor> {
        let mut acc = Tensor::zeros(fs, dims)?;
        for &i in idx {
            acc = acc.add(&tensors[reps[i]])?;
        }
        Ok(acc)
    };
    let mut err = None;
    let complete = for_each_multiset(reps.len(), k, |idx| {
        visited += 1;
        if visited > budget {
            return false;
        }
        match sum_of(idx) {
            Ok(s) => {
                plus_sums.entry(s.entries().to_vec()).or_insert_with(|| idx.to_vec());
                true
            }
            Err(e) => {
                err = Some(e);
                false
            }
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    if !complete {
        return Ok(SumsetOutcome::Inconclusive { visited: budget });
    }
    let mut found: Option<SumsetCertificate> = None;
    let complete = for_each_multiset(reps.len(), l, |idx| {
        visited += 1;
        if visited > budget {
            return false;
        }
        let need = match sum_of(idx).and_then(|s| x.add(&s)) {
            Ok(t) => t,
            Err(e) => {
                err = Some(e);
                return false;
            }
        };
        if let Some(plus) = plus_sums.get(need.entries()) {
            found = Some(SumsetCertificate {
                plus: plus.iter().map(|&i| reps[i]).collect(),
                minus: idx.iter().map(|&i| reps[i]).collect(),
            });
            return false;
        }
        true
    });
    if let Some(e) = err {
        return Err(e);
    }
    match found {
        Some(cert) => {
            if !cert.verify(x, &tensors)? {
                return Err(Error::VerificationFailed("sumset certificate does not sum to the target".into()));
            }
            Ok(SumsetOutcome::Found(cert))
        }
        None if complete => Ok(SumsetOutcome::NotMember),
        None => Ok(SumsetOutcome::Inconclusive { visited: budget }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let f2 = FieldSpec::prime(2).unwrap();
        let mut rng = Stream::new(9, "sumset");
        let bp = ProductMultiset::random_subset(&f2, &[2, 2, 2], 1, 2, &mut rng).unwrap();
        let ts = bp.tensors().unwrap();
        assert!(ts.len() >= 3);
        let zero = Tensor::zeros(&f2, &[2, 2, 2]).unwrap();
        assert_eq!(
            sumset_member(&zero, 0, 0, &bp, 1000).unwrap(),
            SumsetOutcome::Found(SumsetCertificate { plus: vec![], minus: vec![] })
        );
        let i = ts.iter().position(|t| !t.is_zero()).unwrap();
        match sumset_member(&ts[i], 1, 0, &bp, 1000).unwrap() {
            SumsetOutcome::Found(c) => {
                assert_eq!((c.plus.len(), c.minus.len()), (1, 0));
                assert!(c.verify(&ts[i], &ts).unwrap());
            }
            other => panic!("{other:?}"),
        }
        let x = ts[0].add(&ts[1]).unwrap().sub(&ts[2]).unwrap();
        match sumset_member(&x, 2, 1, &bp, 100_000).unwrap() {
            SumsetOutcome::Found(c) => {
                assert!(c.plus.len() <= 2 && c.minus.len() <= 1);
                assert!(c.verify(&x, &ts).unwrap());
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(sumset_member(&x, 2, 1, &bp, 3).unwrap(), SumsetOutcome::Inconclusive { .. }));
    }

    #[test]
    fn non_members_are_reported() {
        let f3 = FieldSpec::prime(3).unwrap();
        // only e_1 ⊗ e_1: its multiples are the sole reachable arrays
        let bp = ProductMultiset::from_tuples(&f3, &[2, 2], &[vec![1, 1]]).unwrap();
        let target = Tensor::unit(&f3, &[2, 2], &[1, 1]).unwrap();
        assert_eq!(sumset_member(&target, 2, 2, &bp, 1000).unwrap(), SumsetOutcome::NotMember);
    }

    #[test]
    fn file_roundtrip() {
        let f2 = FieldSpec::prime(2).unwrap();
        let mut rng = Stream::new(1, "file");
        let bp = ProductMultiset::random_subset(&f2, &[2, 3], 1, 3, &mut rng).unwrap();
        let json = serde_json::to_string(&bp.to_file()).unwrap();
        let back: ProductMultisetFile = serde_json::from_str(&json).unwrap();
        assert_eq!(ProductMultiset::from_file(&back).unwrap(), bp);
        let all = ProductMultiset::all(&f2, &[1, 2]).unwrap();
        assert_eq!(all.items().unwrap().len(), 8);
        assert_eq!(ProductMultiset::from_file(&all.to_file()).unwrap(), all);
    }
}
