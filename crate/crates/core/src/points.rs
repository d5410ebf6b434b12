//! Vectors of `F^n` packed into integer codes.
//!
//! The code of `(x_0, ..., x_{n-1})` is `x_0 + x_1 q + ... + x_{n-1} q^{n-1}`
//! (coordinate 0 least significant). Enumerating codes `0..q^n` is the
//! canonical enumeration order of `F^n` used throughout the crate.

use crate::error::{Error, Result};
use crate::field::{FieldElem, FieldSpec};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSpace {
    fs: FieldSpec,
    n: usize,
    size: u64,
}

impl PointSpace {
    pub fn new(fs: &FieldSpec, n: usize) -> Result<Self> {
        let size = (fs.q() as u64)
            .checked_pow(n as u32)
            .filter(|&s| s <= u32::MAX as u64)
            .ok_or_else(|| Error::GuardExceeded {
                what: "point space",
                needed: format!("{}^{}", fs.q(), n),
                limit: u32::MAX as u128,
            })?;
        Ok(PointSpace {
            fs: fs.clone(),
            n,
            size,
        })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.fs
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn codes(&self) -> impl Iterator<Item = u32> + Clone {
        (0..self.size).map(|c| c as u32)
    }

    pub fn decode(&self, code: u32) -> Vec<FieldElem> {
        let mut out = vec![FieldElem::ZERO; self.n];
        self.decode_into(code, &mut out);
        out
    }

    #[inline]
    pub fn decode_into(&self, mut code: u32, out: &mut [FieldElem]) {
        let q = self.fs.q();
        for slot in out.iter_mut() {
            *slot = FieldElem::from_code_unchecked(code % q);
            code /= q;
        }
    }

    #[inline]
    pub fn encode(&self, v: &[FieldElem]) -> u32 {
        let q = self.fs.q();
        v.iter().rev().fold(0u32, |acc, &x| acc * q + x.code())
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        if self.fs.q() == 2 {
            return a ^ b;
        }
        self.zip_digits(a, b, |x, y| self.fs.add(x, y))
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        if self.fs.q() == 2 {
            return a ^ b;
        }
        self.zip_digits(a, b, |x, y| self.fs.sub(x, y))
    }

    pub fn neg(&self, a: u32) -> u32 {
        self.sub(0, a)
    }

    pub fn scale(&self, c: FieldElem, a: u32) -> u32 {
        self.zip_digits(a, 0, |x, _| self.fs.mul(c, x))
    }

    pub fn dot(&self, a: u32, b: u32) -> FieldElem {
        let q = self.fs.q();
        let (mut a, mut b) = (a, b);
        let mut acc = FieldElem::ZERO;
        for _ in 0..self.n {
            let x = FieldElem::from_code_unchecked(a % q);
            let y = FieldElem::from_code_unchecked(b % q);
            acc = self.fs.add(acc, self.fs.mul(x, y));
            a /= q;
            b /= q;
        }
        acc
    }

    #[inline]
    fn zip_digits(&self, a: u32, b: u32, f: impl Fn(FieldElem, FieldElem) -> FieldElem) -> u32 {
        let q = self.fs.q();
        let (mut a, mut b) = (a, b);
        let mut out = 0u32;
        let mut place = 1u32;
        for _ in 0..self.n {
            let x = FieldElem::from_code_unchecked(a % q);
            let y = FieldElem::from_code_unchecked(b % q);
            out += f(x, y).code() * place;
            place = place.wrapping_mul(q);
            a /= q;
            b /= q;
        }
        out
    }
}
