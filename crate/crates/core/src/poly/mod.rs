//! Polynomials `F^n -> F` kept as exponent-vector to coefficient maps.
//!
//! Exponents are formal: `x^q` is never rewritten to `x`, so the degree is the
//! formal total degree. Pointwise equality is checked separately where
//! function equality is meant.

mod derivative;
mod gowers;
mod rank_cert;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldDescriptor, FieldElem, FieldSpec};
use crate::guard;
use crate::points::PointSpace;
use crate::rng::Stream;

pub use derivative::{binomial_mod_p, derivative, derivative_tensor, taylor_split, TaylorSplit};
pub use gowers::{correlation_search, gowers_norm, poly_bias, Correlation, GowersNorm, PolyBias};
pub use rank_cert::{rank_certificate_check, RankCertificate, RankCheck};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    fs: FieldSpec,
    nvars: usize,
    monomials: BTreeMap<Vec<u32>, FieldElem>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonomialFile {
    pub exps: Vec<u32>,
    pub coeff: u32,
}

/// `{"field": ..., "nvars": n, "monomials": [{"exps": [...], "coeff": c}, ...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyFile {
    pub field: FieldDescriptor,
    pub nvars: usize,
    pub monomials: Vec<MonomialFile>,
}

impl Polynomial {
    pub fn zero(fs: &FieldSpec, nvars: usize) -> Result<Self> {
        if nvars == 0 {
            return Err(Error::DimensionMismatch("a polynomial needs at least one variable".into()));
        }
        Ok(Polynomial {
            fs: fs.clone(),
            nvars,
            monomials: BTreeMap::new(),
        })
    }

    /// Sums the given terms; repeated exponent vectors are combined.
    pub fn from_terms(fs: &FieldSpec, nvars: usize, terms: &[(Vec<u32>, FieldElem)]) -> Result<Self> {
        let mut p = Self::zero(fs, nvars)?;
        for (e, c) in terms {
            p.add_term(e, *c)?;
        }
        Ok(p)
    }

    /// `c * x_i`.
    pub fn variable(fs: &FieldSpec, nvars: usize, i: usize, c: FieldElem) -> Result<Self> {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::from_terms(fs, nvars, &[(e, c)])
    }

    pub fn add_term(&mut self, exps: &[u32], c: FieldElem) -> Result<()> {
        if exps.len() != self.nvars {
            return Err(Error::DimensionMismatch(format!(
                "exponent vector of length {} for {} variables",
                exps.len(),
                self.nvars
            )));
        }
        self.fs.check(c)?;
        let fs = &self.fs;
        let slot = self.monomials.entry(exps.to_vec()).or_insert(FieldElem::ZERO);
        *slot = fs.add(*slot, c);
        if slot.is_zero() {
            self.monomials.remove(exps);
        }
        Ok(())
    }

    pub fn field(&self) -> &FieldSpec {
        &self.fs
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn monomials(&self) -> &BTreeMap<Vec<u32>, FieldElem> {
        &self.monomials
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.monomials.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    fn check_compatible(&self, other: &Polynomial) -> Result<()> {
        if self.fs != other.fs {
            return Err(Error::FieldMismatch);
        }
        if self.nvars != other.nvars {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {} variables",
                self.nvars, other.nvars
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (e, &c) in &other.monomials {
            out.add_term(e, c)?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.add(&other.scale(self.fs.neg(FieldElem::ONE)))
    }

    pub fn scale(&self, c: FieldElem) -> Polynomial {
        let mut out = Polynomial {
            fs: self.fs.clone(),
            nvars: self.nvars,
            monomials: BTreeMap::new(),
        };
        for (e, &a) in &self.monomials {
            let v = self.fs.mul(c, a);
            if !v.is_zero() {
                out.monomials.insert(e.clone(), v);
            }
        }
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_compatible(other)?;
        let mut out = Self::zero(&self.fs, self.nvars)?;
        for (e1, &a) in &self.monomials {
            for (e2, &b) in &other.monomials {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(x, y)| x + y).collect();
                out.add_term(&e, self.fs.mul(a, b))?;
            }
        }
        Ok(out)
    }

    pub fn eval(&self, x: &[FieldElem]) -> Result<FieldElem> {
        if x.len() != self.nvars {
            return Err(Error::DimensionMismatch(format!(
                "point of length {} for {} variables",
                x.len(),
                self.nvars
            )));
        }
        for &v in x {
            self.fs.check(v)?;
        }
        Ok(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: &[FieldElem]) -> FieldElem {
        let fs = &self.fs;
        let mut acc = FieldElem::ZERO;
        for (e, &c) in &self.monomials {
            let mut term = c;
            for (&xi, &ei) in x.iter().zip(e) {
                if ei > 0 {
                    term = fs.mul(term, fs.pow(xi, ei as u64));
                }
            }
            acc = fs.add(acc, term);
        }
        acc
    }

    /// Values at every point of `F^n`, indexed by point code.
    pub fn value_table(&self) -> Result<Vec<FieldElem>> {
        let size = guard::check_pow("polynomial evaluation", self.fs.q() as u64, self.nvars as u64, guard::ENUMERATION_LIMIT)?;
        let sp = PointSpace::new(&self.fs, self.nvars)?;
        let mut x = vec![FieldElem::ZERO; self.nvars];
        Ok((0..size as u32)
            .map(|code| {
                sp.decode_into(code, &mut x);
                self.eval_unchecked(&x)
            })
            .collect())
    }

    pub fn to_file(&self) -> PolyFile {
        PolyFile {
            field: self.fs.descriptor(),
            nvars: self.nvars,
            monomials: self
                .monomials
                .iter()
                .map(|(e, c)| MonomialFile {
                    exps: e.clone(),
                    coeff: c.code(),
                })
                .collect(),
        }
    }

    pub fn from_file(f: &PolyFile) -> Result<Self> {
        let fs = FieldSpec::from_descriptor(&f.field)?;
        let mut p = Self::zero(&fs, f.nvars)?;
        for m in &f.monomials {
            p.add_term(&m.exps, fs.elem(m.coeff)?)?;
        }
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("polynomial serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: PolyFile = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_file(&f)
    }
}

/// Exponent vectors of total degree at most `max_deg`, each exponent below
/// `cap`, in graded order: by total degree, then lexicographically.
pub fn monomials_up_to(nvars: usize, max_deg: u32, cap: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; nvars];
    fn rec(i: usize, left: u32, cap: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left.min(cap.saturating_sub(1)) {
            cur[i] = e;
            rec(i + 1, left - e, cap, cur, out);
        }
        cur[i] = 0;
    }
    rec(0, max_deg, cap, &mut cur, &mut out);
    out.sort_by(|a, b| (a.iter().sum::<u32>(), a).cmp(&(b.iter().sum::<u32>(), b)));
    out
}

/// A random polynomial of degree exactly `deg`: every monomial of degree at
/// most `deg` gets a uniform coefficient, and a degree-`deg` term is forced
/// when none survived.
pub fn random_polynomial(fs: &FieldSpec, nvars: usize, deg: u32, rng: &mut Stream) -> Result<Polynomial> {
    let mons = monomials_up_to(nvars, deg, u32::MAX);
    let mut p = Polynomial::zero(fs, nvars)?;
    for e in &mons {
        p.add_term(e, rng.elem(fs))?;
    }
    if p.degree() < deg {
        let top: Vec<&Vec<u32>> = mons.iter().filter(|e| e.iter().sum::<u32>() == deg).collect();
        let e = top[rng.below(top.len() as u64) as usize];
        p.add_term(e, rng.nonzero_elem(fs))?;
    }
    Ok(p)
}
