use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{FieldElem, FieldSpec};
use crate::error::{Error, Result};

/// Exact distribution of values of some map into `F`: `counts[a]` is the
/// number of inputs mapped to the element with code `a`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueHistogram {
    counts: Vec<BigUint>,
    total: BigUint,
}

/// A normalized character sum `(1/total) sum_a counts[a] chi_c(a)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CharSum {
    pub re: f64,
    pub im: f64,
    /// Set when `re`/`im` are the exact value (no rounding happened).
    pub exact: bool,
    /// The exact value when it is a rational number.
    pub rational: Option<BigRational>,
}

impl CharSum {
    pub fn magnitude(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

impl ValueHistogram {
    pub fn new(counts: Vec<BigUint>) -> Self {
        let total = counts.iter().sum();
        ValueHistogram { counts, total }
    }

    pub fn from_u64(counts: &[u64]) -> Self {
        Self::new(counts.iter().map(|&c| BigUint::from(c)).collect())
    }

    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    pub fn count(&self, a: FieldElem) -> &BigUint {
        &self.counts[a.code() as usize]
    }

    pub fn total(&self) -> &BigUint {
        &self.total
    }

    /// Multiplies every count by `factor`.
    pub fn scaled(&self, factor: &BigUint) -> Self {
        Self::new(self.counts.iter().map(|c| c * factor).collect())
    }

    /// True when all counts off zero agree.
    pub fn uniform_off_zero(&self) -> bool {
        self.counts[1..].windows(2).all(|w| w[0] == w[1])
    }

    /// `S_e`: total count of values `a` with `Tr(c a) = e`.
    pub fn exponent_classes(&self, c: FieldElem, fs: &FieldSpec) -> Vec<BigUint> {
        let mut classes = vec![BigUint::zero(); fs.p() as usize];
        for a in fs.elements() {
            classes[fs.char_exponent(a, c) as usize] += &self.counts[a.code() as usize];
        }
        classes
    }

    /// Normalized character sum for `chi_c`; all arithmetic is exact up to the
    /// final conversion to floating point.
    pub fn char_sum(&self, c: FieldElem, fs: &FieldSpec) -> Result<CharSum> {
        if self.counts.len() != fs.q() as usize {
            return Err(Error::DimensionMismatch(format!(
                "histogram has {} bins, field has {} elements",
                self.counts.len(),
                fs.q()
            )));
        }
        fs.check(c)?;
        if self.total.is_zero() {
            return Err(Error::EmptyHistogram);
        }
        let classes: Vec<BigInt> = self
            .exponent_classes(c, fs)
            .into_iter()
            .map(BigInt::from)
            .collect();
        let total = BigInt::from(self.total.clone());
        if classes[1..].windows(2).all(|w| w[0] == w[1]) {
            let off = classes.get(1).cloned().unwrap_or_default();
            let value = BigRational::new(&classes[0] - off, total);
            let re = value.to_f64().unwrap_or(f64::NAN);
            let exact = BigRational::from_float(re).is_some_and(|r| r == value);
            return Ok(CharSum {
                re,
                im: 0.0,
                exact,
                rational: Some(value),
            });
        }
        let p = classes.len();
        let last = classes[p - 1].clone();
        let total_f = total.to_f64().unwrap_or(f64::INFINITY);
        let mut re = 0.0;
        let mut im = 0.0;
        for (j, s) in classes.iter().enumerate().take(p - 1) {
            let b = (s - &last).to_f64().unwrap_or(f64::NAN);
            let theta = 2.0 * std::f64::consts::PI * j as f64 / p as f64;
            re += b * theta.cos();
            im += b * theta.sin();
        }
        Ok(CharSum {
            re: re / total_f,
            im: im / total_f,
            exact: false,
            rational: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn orthogonality() {
        let f3 = FieldSpec::prime(3).unwrap();
        let h = ValueHistogram::from_u64(&[5, 5, 5]);
        for c in f3.nonzero_elements() {
            let s = h.char_sum(c, &f3).unwrap();
            assert_eq!(s.rational, Some(BigRational::zero()));
            assert!(s.exact);
        }
    }

    #[test]
    fn concentrated_at_zero() {
        let f5 = FieldSpec::prime(5).unwrap();
        let h = ValueHistogram::from_u64(&[7, 0, 0, 0, 0]);
        for c in f5.elements() {
            assert_eq!(h.char_sum(c, &f5).unwrap().rational, Some(BigRational::one()));
        }
    }

    #[test]
    fn three_point_example() {
        // (1 + 2 w) / 3 with w = e^{2 pi i/3}: direct evaluation at three points
        let f3 = FieldSpec::prime(3).unwrap();
        let h = ValueHistogram::from_u64(&[1, 2, 0]);
        let s = h.char_sum(FieldElem::ONE, &f3).unwrap();
        let w = (2.0 * std::f64::consts::PI / 3.0).cos();
        let wi = (2.0 * std::f64::consts::PI / 3.0).sin();
        assert!((s.re - (1.0 + 2.0 * w) / 3.0).abs() < 1e-12);
        assert!((s.im - 2.0 * wi / 3.0).abs() < 1e-12);
        assert!((s.magnitude() - 0.5773502691896258).abs() < 1e-12);
        assert!(!s.exact);
    }

    #[test]
    fn binary_values_are_exact_for_power_of_two_totals() {
        let f2 = FieldSpec::prime(2).unwrap();
        let h = ValueHistogram::from_u64(&[10, 6]);
        let s = h.char_sum(FieldElem::ONE, &f2).unwrap();
        assert_eq!(s.re, 0.25);
        assert!(s.exact);
        let h = ValueHistogram::from_u64(&[2, 1]);
        assert!(!h.char_sum(FieldElem::ONE, &f2).unwrap().exact);
    }

    #[test]
    fn character_independence_when_uniform_off_zero() {
        for q in [3u32, 4, 5, 7, 8, 9] {
            let fs = FieldSpec::of_order(q).unwrap();
            let mut counts = vec![3u64; q as usize];
            counts[0] = 11;
            let h = ValueHistogram::from_u64(&counts);
            assert!(h.uniform_off_zero());
            let values: Vec<_> = fs
                .nonzero_elements()
                .map(|c| h.char_sum(c, &fs).unwrap().rational.unwrap())
                .collect();
            assert!(values.windows(2).all(|w| w[0] == w[1]));
        }
    }

    #[test]
    fn empty_histogram_rejected() {
        let f2 = FieldSpec::prime(2).unwrap();
        let h = ValueHistogram::from_u64(&[0, 0]);
        assert_eq!(h.char_sum(FieldElem::ONE, &f2), Err(Error::EmptyHistogram));
    }
}
