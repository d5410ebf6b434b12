//! Verification of `(k, α)`-forcing: every array orthogonal to at least an
//! `α` fraction of `Q` must lie in `Σ_I V_I ⊗ F^{I^c}`.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rayon::prelude::*;

use super::degeneracy::{ModeSet, SubspaceSum};
use crate::additive::Subspace;
use crate::error::{Error, Result};
use crate::field::{FieldElem, FieldSpec};
use crate::guard;
use crate::tensor::Tensor;

#[derive(Clone, Debug)]
pub struct ForcingInstance {
    pub fs: FieldSpec,
    pub dims: Vec<usize>,
    /// Members of `Q` with multiplicities.
    pub q: Vec<(Tensor, u64)>,
    pub alpha: BigRational,
    pub spaces: BTreeMap<ModeSet, Subspace>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForcingVerdict {
    pub forcing: bool,
    /// Arrays orthogonal to at least an `α` fraction of `Q`.
    pub collected: u64,
    /// First collected array (in code order) outside the subspace sum.
    pub counterexample: Option<Tensor>,
    /// `max_I dim V_I`.
    pub k: usize,
}

impl ForcingInstance {
    fn validate(&self) -> Result<()> {
        if !self.alpha.is_positive() || self.alpha > BigRational::one() {
            return Err(Error::Parse(format!("alpha {} must lie in (0, 1]", self.alpha)));
        }
        for (t, _) in &self.q {
            if t.field() != &self.fs {
                return Err(Error::FieldMismatch);
            }
            if t.dims() != self.dims {
                return Err(Error::DimensionMismatch(format!(
                    "member of Q has dims {:?}, ambient is {:?}",
                    t.dims(),
                    self.dims
                )));
            }
        }
        Ok(())
    }
}

/// Enumerates every array `r` of the ambient space.
pub fn forcing_check(inst: &ForcingInstance) -> Result<ForcingVerdict> {
    inst.validate()?;
    let fs = &inst.fs;
    let n: usize = inst.dims.iter().product();
    let total = guard::check_pow("forcing enumeration", fs.q() as u64, n as u64, guard::ENUMERATION_LIMIT)? as u64;
    let sum = SubspaceSum::new(fs, &inst.dims, &inst.spaces)?;
    let size: u64 = inst.q.iter().map(|(_, m)| m).sum();
    let num = BigUint::try_from(inst.alpha.numer().clone()).expect("positive");
    let den = BigUint::try_from(inst.alpha.denom().clone()).expect("positive");
    // r is collected when count * den >= num * |Q|
    let need = &num * BigUint::from(size);
    let members: Vec<(Vec<FieldElem>, u64)> = inst.q.iter().map(|(t, m)| (t.entries().to_vec(), *m)).collect();
    let q = fs.q() as u64;
    let chunk = 4096u64;
    let chunks = total.div_ceil(chunk);
    let results: Vec<(u64, Option<u64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut collected = 0u64;
            let mut first_bad = None;
            let mut r = vec![FieldElem::ZERO; n];
            for code in c * chunk..((c + 1) * chunk).min(total) {
                let mut x = code;
                for slot in r.iter_mut() {
                    *slot = fs.elem((x % q) as u32).expect("digit");
                    x /= q;
                }
                let count: u64 = members
                    .iter()
                    .filter(|(e, _)| fs.dot(&r, e).is_zero())
                    .map(|(_, m)| m)
                    .sum();
                if BigUint::from(count) * &den < need {
                    continue;
                }
                collected += 1;
                if first_bad.is_none() && !sum.contains_entries(&r) {
                    first_bad = Some(code);
                }
            }
            (collected, first_bad)
        })
        .collect();
    let collected = results.iter().map(|r| r.0).sum();
    let first_bad = results.iter().filter_map(|r| r.1).min();
    let counterexample = match first_bad {
        Some(code) => {
            let mut x = code;
            let entries: Vec<FieldElem> = (0..n)
                .map(|_| {
                    let e = fs.elem((x % q) as u32).expect("digit");
                    x /= q;
                    e
                })
                .collect();
            Some(Tensor::new(fs, inst.dims.clone(), entries)?)
        }
        None => None,
    };
    Ok(ForcingVerdict {
        forcing: counterexample.is_none(),
        collected,
        counterexample,
        k: inst.spaces.values().map(|s| s.dim()).max().unwrap_or(0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;
    use crate::rank::degeneracy::nonempty_subsets;
    use crate::rng::Stream;

    fn f2() -> FieldSpec {
        FieldSpec::prime(2).unwrap()
    }

    fn zero_spaces(fs: &FieldSpec, dims: &[usize]) -> BTreeMap<ModeSet, Subspace> {
        nonempty_subsets(dims.len())
            .into_iter()
            .map(|i| {
                let n = i.iter().map(|&m| dims[m]).product();
                (i, Subspace::zero(fs, n))
            })
            .collect()
    }

    fn one_hots(fs: &FieldSpec, dims: &[usize]) -> Vec<(Tensor, u64)> {
        let z = Tensor::zeros(fs, dims).unwrap();
        (0..z.len())
            .map(|i| (Tensor::unit(fs, dims, &z.multi_index(i)).unwrap(), 1))
            .collect()
    }

    #[test]
    fn one_hot_family_forces_zero() {
        let fs = f2();
        let dims = vec![2, 2, 2];
        let inst = ForcingInstance {
            fs: fs.clone(),
            dims: dims.clone(),
            q: one_hots(&fs, &dims),
            alpha: BigRational::one(),
            spaces: zero_spaces(&fs, &dims),
        };
        let v = forcing_check(&inst).unwrap();
        assert!(v.forcing);
        assert_eq!((v.collected, v.k), (1, 0));
    }

    #[test]
    fn empty_family_is_not_forcing() {
        let fs = f2();
        let dims = vec![2, 2];
        let inst = ForcingInstance {
            fs: fs.clone(),
            dims: dims.clone(),
            q: vec![],
            alpha: BigRational::one(),
            spaces: zero_spaces(&fs, &dims),
        };
        let v = forcing_check(&inst).unwrap();
        assert!(!v.forcing);
        assert_eq!(v.collected, 16);
        assert_eq!(v.counterexample.unwrap().codes(), vec![1, 0, 0, 0]);
    }

    #[test]
    fn monotone_in_alpha() {
        let fs = f2();
        let dims = vec![2, 2, 2];
        let mut rng = Stream::new(5, "forcing");
        for _ in 0..10 {
            let q: Vec<(Tensor, u64)> = (0..6)
                .map(|_| {
                    let vs: Vec<_> = dims.iter().map(|&n| rng.vector(&fs, n)).collect();
                    (Tensor::product_of(&fs, &vs).unwrap(), 1 + rng.below(2))
                })
                .collect();
            let mut spaces = zero_spaces(&fs, &dims);
            spaces.insert(vec![0], Subspace::span(&fs, 2, &[rng.vector(&fs, 2)]).unwrap());
            let mut prev = false;
            for a in 1..=6u64 {
                let inst = ForcingInstance {
                    fs: fs.clone(),
                    dims: dims.clone(),
                    q: q.clone(),
                    alpha: BigRational::new(a.into(), 6u64.into()),
                    spaces: spaces.clone(),
                };
                let v = forcing_check(&inst).unwrap();
                assert!(!prev || v.forcing);
                prev = v.forcing;
            }
        }
    }

    #[test]
    fn alpha_out_of_range_rejected() {
        let fs = f2();
        let inst = ForcingInstance {
            fs: fs.clone(),
            dims: vec![2],
            q: vec![],
            alpha: BigRational::zero(),
            spaces: BTreeMap::new(),
        };
        assert!(forcing_check(&inst).is_err());
    }
}
