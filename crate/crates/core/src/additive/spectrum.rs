use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::RootSum;
use crate::guard;

use super::PointSet;

/// Slack for magnitude comparisons in odd characteristic.
pub const SPECTRUM_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralEntry {
    /// Point code of the frequency `r`.
    pub r: u32,
    /// `|sum_{a in A} chi(r.a)| / |A|`, i.e. `|Â(r)| / density`.
    pub magnitude: f64,
    /// The exact integer sum in characteristic 2.
    pub walsh: Option<i64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub entries: Vec<SpectralEntry>,
    /// True when every comparison was made in exact integer arithmetic.
    pub exact: bool,
}

impl Spectrum {
    pub fn codes(&self) -> Vec<u32> {
        self.entries.iter().map(|e| e.r).collect()
    }
}

/// For every `r`, the histogram of `r.a` over `a in A`, as a flat
/// `q^n x q` table. Built one coordinate at a time: after step `i` the low
/// `i` digits of the index are frequency digits, the rest point digits.
pub fn dot_histograms(a: &PointSet) -> Result<Vec<u32>> {
    let fs = a.field();
    let q = fs.q() as usize;
    let n = a.dim();
    guard::check_pow("spectrum table", q as u64, n as u64 + 1, guard::ENUMERATION_LIMIT)?;
    let size = a.space().size() as usize;
    let mut h = vec![0u32; size * q];
    for &x in a.members() {
        h[x as usize * q] = 1;
    }
    let code = |x: usize| fs.elem(x as u32).expect("digit");
    let mul: Vec<usize> = (0..q * q).map(|i| fs.mul(code(i / q), code(i % q)).code() as usize).collect();
    let add: Vec<usize> = (0..q * q).map(|i| fs.add(code(i / q), code(i % q)).code() as usize).collect();
    let mut stride = 1usize;
    for _ in 0..n {
        let block = stride * q;
        h.par_chunks_mut(block * q).for_each(|chunk| {
            let mut tmp = vec![0u32; q * q];
            for low in 0..stride {
                tmp.iter_mut().for_each(|t| *t = 0);
                for r in 0..q {
                    for x in 0..q {
                        let shift = &add[mul[r * q + x] * q..][..q];
                        let src = &chunk[(x * stride + low) * q..][..q];
                        for v in 0..q {
                            tmp[r * q + shift[v]] += src[v];
                        }
                    }
                }
                for r in 0..q {
                    chunk[(r * stride + low) * q..][..q].copy_from_slice(&tmp[r * q..][..q]);
                }
            }
        });
        stride = block;
    }
    Ok(h)
}

/// Frequencies `r` with `|sum_{a in A} chi(r.a)| >= rho |A|`, given `rho^2`,
/// for the canonical character `chi(x) = omega^{Tr x}`. The trivial frequency
/// is always listed first.
pub fn large_spectrum(a: &PointSet, rho_sq: &BigRational) -> Result<Spectrum> {
    if a.is_empty() {
        return Err(Error::DensityBelowThreshold("spectrum of the empty set".into()));
    }
    if rho_sq.is_negative() {
        return Err(Error::Parse("threshold must be nonnegative".into()));
    }
    let fs = a.field();
    let q = fs.q() as usize;
    let p = fs.p();
    let h = dot_histograms(a)?;
    let size = a.len() as f64;
    let exact = p == 2;
    let rho = rho_sq.to_f64().unwrap_or(f64::INFINITY).sqrt();
    let a_sq = BigInt::from(a.len()).pow(2);
    let traces: Vec<u32> = fs.elements().map(|v| fs.trace(v)).collect();
    let entries = (0..a.space().size() as u32)
        .into_par_iter()
        .filter_map(|r| {
            let hist = &h[r as usize * q..][..q];
            let mut classes = vec![0i128; p as usize];
            for (v, &c) in hist.iter().enumerate() {
                classes[traces[v] as usize] += c as i128;
            }
            if exact {
                let w = (classes[0] - classes[1]) as i64;
                let keep = r == 0 || BigInt::from(w).pow(2) * rho_sq.denom() >= rho_sq.numer() * &a_sq;
                keep.then(|| SpectralEntry {
                    r,
                    magnitude: w.unsigned_abs() as f64 / size,
                    walsh: Some(w),
                })
            } else {
                let magnitude = RootSum::from_coeffs(classes).norm_sq_f64().max(0.0).sqrt() / size;
                (r == 0 || magnitude >= rho - SPECTRUM_TOLERANCE).then_some(SpectralEntry {
                    r,
                    magnitude,
                    walsh: None,
                })
            }
        })
        .collect();
    Ok(Spectrum { entries, exact })
}

/// Large spectrum at threshold `rho`.
pub fn spectrum(a: &PointSet, rho: &BigRational) -> Result<Spectrum> {
    large_spectrum(a, &(rho * rho))
}
