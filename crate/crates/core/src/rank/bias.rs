//! Exact bias and analytic rank of tensors.
//!
//! `bias(T)` is the probability that a uniformly random `(v^1, ..., v^{d-1})`
//! leaves the zero linear form `T(v^1, ..., v^{d-1}, .)`. It is computed by
//! counting those tuples, one contraction at a time.

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{FieldElem, FieldSpec, ValueHistogram};
use crate::guard;
use crate::tensor::Tensor;

/// `numerator / denominator` with `denominator = q^{n_1 + ... + n_{d-1}}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExactBias {
    pub numerator: BigUint,
    pub denominator: BigUint,
}

impl ExactBias {
    pub fn value(&self) -> BigRational {
        BigRational::new(self.numerator.clone().into(), self.denominator.clone().into())
    }

    /// `numerator/denominator` in lowest terms, as strings `"a/b"` (or `"1"`).
    pub fn reduced_string(&self) -> String {
        let v = self.value();
        if v.is_integer() {
            v.numer().to_string()
        } else {
            format!("{}/{}", v.numer(), v.denom())
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.value().to_f64().unwrap_or(f64::NAN)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalyticRank {
    pub bias: ExactBias,
    /// `-log_q(bias)`; exactly an integer when the bias is a power of `q`.
    pub value: f64,
    /// Largest `m` with `q^{-m} >= bias`.
    pub floor: u64,
    /// Smallest `m` with `bias >= q^{-m}`.
    pub ceil: u64,
}

fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().unwrap_or(f64::INFINITY).ln() + shift as f64 * std::f64::consts::LN_2
}

/// Enumerates every vector of `F^n` in code order, calling `f` on each.
fn for_each_vector(fs: &FieldSpec, n: usize, mut f: impl FnMut(&[FieldElem])) {
    let q = fs.q();
    let mut v = vec![FieldElem::ZERO; n];
    loop {
        f(&v);
        let mut j = 0;
        loop {
            if j == n {
                return;
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

/// Number of `v` in `F^{rows}` with `v^T M = 0`, by enumeration. Consecutive
/// vectors differ in few digits, so the running combination is updated from
/// precomputed row multiples rather than recomputed.
fn count_zero_combinations(fs: &FieldSpec, m: &[FieldElem], rows: usize) -> u64 {
    let cols = m.len() / rows;
    let q = fs.q() as usize;
    let mut mult = vec![FieldElem::ZERO; rows * q * cols];
    for j in 0..rows {
        for a in fs.elements() {
            for c in 0..cols {
                mult[(j * q + a.code() as usize) * cols + c] = fs.mul(a, m[j * cols + c]);
            }
        }
    }
    let mut acc = vec![FieldElem::ZERO; cols];
    let mut digits = vec![0usize; rows];
    let mut count = 0u64;
    loop {
        if acc.iter().all(|x| x.is_zero()) {
            count += 1;
        }
        let mut j = 0;
        loop {
            if j == rows {
                return count;
            }
            let old = digits[j];
            let new = (old + 1) % q;
            let (o, n) = ((j * q + old) * cols, (j * q + new) * cols);
            for c in 0..cols {
                acc[c] = fs.add(fs.sub(acc[c], mult[o + c]), mult[n + c]);
            }
            digits[j] = new;
            if new != 0 {
                break;
            }
            j += 1;
        }
    }
}

fn pow_u64(q: u32, e: usize) -> u64 {
    (q as u64).pow(e as u32)
}

/// Zero-slice count for the order `dims.len()` array `data`.
fn count_zero_slices(fs: &FieldSpec, data: &[FieldElem], dims: &[usize]) -> u64 {
    if data.iter().all(|x| x.is_zero()) {
        return pow_u64(fs.q(), dims[..dims.len() - 1].iter().sum());
    }
    if dims.len() == 2 {
        return count_zero_combinations(fs, data, dims[0]);
    }
    let mut total = 0;
    for_each_vector(fs, dims[0], |v| {
        let sub = contract_first(fs, data, dims[0], v);
        total += count_zero_slices(fs, &sub, &dims[1..]);
    });
    total
}

fn contract_first(fs: &FieldSpec, data: &[FieldElem], n0: usize, v: &[FieldElem]) -> Vec<FieldElem> {
    let rest = data.len() / n0;
    let mut out = vec![FieldElem::ZERO; rest];
    for (i, &vi) in v.iter().enumerate() {
        if vi.is_zero() {
            continue;
        }
        for (o, &b) in out.iter_mut().zip(&data[i * rest..(i + 1) * rest]) {
            *o = fs.add(*o, fs.mul(vi, b));
        }
    }
    out
}

fn decode(fs: &FieldSpec, mut code: u64, n: usize) -> Vec<FieldElem> {
    let q = fs.q() as u64;
    (0..n)
        .map(|_| {
            let e = fs.elem((code % q) as u32).expect("digit below q");
            code /= q;
            e
        })
        .collect()
}

/// Exact bias with the last mode as the slice mode.
pub fn bias_exact(t: &Tensor) -> Result<ExactBias> {
    let d = t.order();
    if d < 2 {
        return Err(Error::OrderTooSmall(d));
    }
    let fs = t.field();
    let dims = t.dims();
    let exp: usize = dims[..d - 1].iter().sum();
    guard::check_pow("bias enumeration", fs.q() as u64, exp as u64, guard::ENUMERATION_LIMIT)?;
    let numerator = if d == 2 || t.is_zero() {
        count_zero_slices(fs, t.entries(), dims)
    } else {
        let top = pow_u64(fs.q(), dims[0]);
        (0..top)
            .into_par_iter()
            .map(|code| {
                let v = decode(fs, code, dims[0]);
                let sub = contract_first(fs, t.entries(), dims[0], &v);
                count_zero_slices(fs, &sub, &dims[1..])
            })
            .sum()
    };
    Ok(ExactBias {
        numerator: BigUint::from(numerator),
        denominator: BigUint::from(fs.q()).pow(exp as u32),
    })
}

/// Exact bias with `mode` playing the role of the last mode.
pub fn bias_exact_slice_mode(t: &Tensor, mode: usize) -> Result<ExactBias> {
    let d = t.order();
    if mode >= d {
        return Err(Error::DimensionMismatch(format!("mode {mode} of an order {d} tensor")));
    }
    let mut perm: Vec<usize> = (0..d).filter(|&m| m != mode).collect();
    perm.push(mode);
    bias_exact(&t.permute_modes(&perm)?)
}

/// Histogram of `T(v^1, ..., v^d)` over every input tuple, by full enumeration.
pub fn bias_charsum_crosscheck(t: &Tensor) -> Result<ValueHistogram> {
    let fs = t.field();
    let dims = t.dims();
    let exp: usize = dims.iter().sum();
    guard::check_pow("full-domain enumeration", fs.q() as u64, exp as u64, guard::ENUMERATION_LIMIT)?;
    let q = fs.q() as usize;
    let top = pow_u64(fs.q(), dims[0]);
    let counts = (0..top)
        .into_par_iter()
        .map(|code| {
            let v = decode(fs, code, dims[0]);
            let sub = contract_first(fs, t.entries(), dims[0], &v);
            let mut hist = vec![0u64; q];
            value_counts(fs, &sub, &dims[1..], &mut hist);
            hist
        })
        .reduce(
            || vec![0u64; q],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    Ok(ValueHistogram::from_u64(&counts))
}

fn value_counts(fs: &FieldSpec, data: &[FieldElem], dims: &[usize], hist: &mut [u64]) {
    if dims.is_empty() {
        hist[data[0].code() as usize] += 1;
        return;
    }
    for_each_vector(fs, dims[0], |v| {
        let sub = contract_first(fs, data, dims[0], v);
        value_counts(fs, &sub, &dims[1..], hist);
    });
}

pub fn arank(t: &Tensor) -> Result<AnalyticRank> {
    let bias = bias_exact(t)?;
    let q = BigUint::from(t.field().q());
    let num = &bias.numerator;
    let den = &bias.denominator;
    // floor: largest m with den >= num q^m; ceil: smallest m with num q^m >= den
    let mut floor = 0u64;
    let mut scaled = num.clone();
    while &(&scaled * &q) <= den {
        scaled *= &q;
        floor += 1;
    }
    let ceil = if &scaled == den { floor } else { floor + 1 };
    let value = if floor == ceil {
        floor as f64
    } else {
        ((ln_big(den) - ln_big(num)) / (t.field().q() as f64).ln()).clamp(floor as f64, ceil as f64)
    };
    Ok(AnalyticRank {
        bias,
        value,
        floor,
        ceil,
    })
}

/// `gcd`-reduced check that `bias = q^{-m}` for an integer `m`.
pub fn is_power_of_q(bias: &ExactBias, q: u32) -> Option<u64> {
    let g = bias.numerator.gcd(&bias.denominator);
    if g != bias.numerator {
        return None;
    }
    let mut rest = &bias.denominator / &g;
    let q = BigUint::from(q);
    let mut m = 0;
    while !rest.is_one() {
        if !(&rest % &q).is_zero() {
            return None;
        }
        rest /= &q;
        m += 1;
    }
    Some(m)
}
