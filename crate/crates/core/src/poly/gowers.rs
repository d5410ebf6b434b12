use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{CharSum, FieldElem, FieldSpec, RootSum, ValueHistogram};
use crate::guard;
use crate::points::PointSpace;

use super::{monomials_up_to, Polynomial};

#[derive(Clone, Debug, PartialEq)]
pub struct PolyBias {
    pub histogram: ValueHistogram,
    pub bias: CharSum,
}

/// Value histogram of `P` over `F^n` and its normalized character sum for `chi_c`.
pub fn poly_bias(p: &Polynomial, c: FieldElem) -> Result<PolyBias> {
    let fs = p.field();
    fs.check(c)?;
    let table = p.value_table()?;
    let mut counts = vec![0u64; fs.q() as usize];
    for v in table {
        counts[v.code() as usize] += 1;
    }
    let histogram = ValueHistogram::from_u64(&counts);
    let bias = histogram.char_sum(c, fs)?;
    Ok(PolyBias { histogram, bias })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GowersNorm {
    pub k: usize,
    /// Values of `Δ_{y_1} ... Δ_{y_k} P(x)` over all `(x, y_1, ..., y_k)`.
    pub histogram: ValueHistogram,
    /// `‖f‖^{2^k}` as a character sum over the histogram.
    pub power: CharSum,
    /// `‖f‖_{U^k}`.
    pub value: f64,
}

fn add_hist(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// Histogram of `g(x + y_1 + ...) ` iterated differences, `levels` shifts still to apply.
fn difference_counts(fs: &FieldSpec, sp: &PointSpace, g: &[FieldElem], levels: usize, hist: &mut [u64]) {
    let size = g.len() as u32;
    for y in 0..size {
        let diff: Vec<FieldElem> = (0..size).map(|x| fs.sub(g[sp.add(x, y) as usize], g[x as usize])).collect();
        if levels == 1 {
            for v in diff {
                hist[v.code() as usize] += 1;
            }
        } else {
            difference_counts(fs, sp, &diff, levels - 1, hist);
        }
    }
}

/// `‖χ_c ∘ P‖_{U^k}` from the exact histogram of the `k`-fold derivative.
pub fn gowers_norm(p: &Polynomial, k: usize, c: FieldElem) -> Result<GowersNorm> {
    let fs = p.field();
    fs.check(c)?;
    if c.is_zero() {
        return Err(Error::TrivialCharacter);
    }
    if k == 0 {
        return Err(Error::OrderTooSmall(0));
    }
    let exp = (p.nvars() as u64).saturating_mul(k as u64 + 1);
    guard::check_pow("Gowers enumeration", fs.q() as u64, exp, guard::ENUMERATION_LIMIT)?;
    let table = p.value_table()?;
    let sp = PointSpace::new(fs, p.nvars())?;
    let size = table.len() as u32;
    let q = fs.q() as usize;
    let counts = (0..size)
        .into_par_iter()
        .map(|y| {
            let mut hist = vec![0u64; q];
            let diff: Vec<FieldElem> = (0..size).map(|x| fs.sub(table[sp.add(x, y) as usize], table[x as usize])).collect();
            if k == 1 {
                for v in diff {
                    hist[v.code() as usize] += 1;
                }
            } else {
                difference_counts(fs, &sp, &diff, k - 1, &mut hist);
            }
            hist
        })
        .reduce(|| vec![0u64; q], add_hist);
    let histogram = ValueHistogram::from_u64(&counts);
    let power = histogram.char_sum(c, fs)?;
    // the 2^k-th power is real and nonnegative; rounding can leave a tiny negative
    let value = power.re.max(0.0).powf(1.0 / (1u64 << k) as f64);
    Ok(GowersNorm {
        k,
        histogram,
        power,
        value,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Correlation {
    pub best: Polynomial,
    /// `max_Q |E_x chi_c(P(x) - Q(x))|`.
    pub value: f64,
    /// Position of `best` in the candidate order.
    pub index: u64,
    pub candidates: u64,
    /// Monomials searched, in graded order; candidate `i` has the base-q
    /// digits of `i` (least significant first) as coefficients.
    pub monomials: Vec<Vec<u32>>,
    /// False for prime-power fields, which lie outside the prime-order setting
    /// the inverse statement is usually stated in.
    pub prime_field: bool,
}

/// Exhaustive search over all `Q` of degree at most `max_deg` (exponents below
/// `q`) for the largest `|E_x chi_c(P(x) - Q(x))|`; ties go to the first candidate.
pub fn correlation_search(p: &Polynomial, max_deg: u32, c: FieldElem) -> Result<Correlation> {
    let fs = p.field();
    fs.check(c)?;
    if c.is_zero() {
        return Err(Error::TrivialCharacter);
    }
    let monomials = monomials_up_to(p.nvars(), max_deg, fs.q());
    let m = monomials.len();
    let candidates = guard::check_pow("correlation candidates", fs.q() as u64, m as u64, guard::ENUMERATION_LIMIT)? as u64;
    let ptab = p.value_table()?;
    let mono_tabs: Vec<Vec<FieldElem>> = monomials
        .iter()
        .map(|e| Polynomial::from_terms(fs, p.nvars(), &[(e.clone(), FieldElem::ONE)])?.value_table())
        .collect::<Result<_>>()?;
    let size = ptab.len();
    let q = fs.q() as u64;
    let expo: Vec<u32> = fs.elements().map(|a| fs.char_exponent(a, c)).collect();
    // split digits: the low ones are walked by an odometer inside each chunk
    let low = (0..=m).rev().find(|&l| q.pow(l as u32) <= 4096).unwrap_or(0);
    let high_count = q.pow((m - low) as u32);
    let score = |qtab: &[FieldElem]| -> f64 {
        let mut rs = RootSum::zero(fs.p());
        for (pv, qv) in ptab.iter().zip(qtab) {
            rs.add_term(expo[fs.sub(*pv, *qv).code() as usize], 1);
        }
        rs.norm_sq_f64()
    };
    let best = (0..high_count)
        .into_par_iter()
        .map(|high| {
            let mut qtab = vec![FieldElem::ZERO; size];
            let mut h = high;
            for tab in &mono_tabs[low..] {
                let a = fs.elem((h % q) as u32).expect("digit");
                h /= q;
                if !a.is_zero() {
                    for (t, &v) in qtab.iter_mut().zip(tab) {
                        *t = fs.add(*t, fs.mul(a, v));
                    }
                }
            }
            let base_index = high * q.pow(low as u32);
            let mut digits = vec![0u32; low];
            let mut best = (score(&qtab), base_index);
            for offset in 1..q.pow(low as u32) {
                let mut j = 0;
                loop {
                    let old = fs.elem(digits[j]).expect("digit");
                    let new_code = (digits[j] + 1) % q as u32;
                    let new = fs.elem(new_code).expect("digit");
                    let delta = fs.sub(new, old);
                    for (t, &v) in qtab.iter_mut().zip(&mono_tabs[j]) {
                        *t = fs.add(*t, fs.mul(delta, v));
                    }
                    digits[j] = new_code;
                    if new_code != 0 {
                        break;
                    }
                    j += 1;
                }
                let s = score(&qtab);
                if s > best.0 {
                    best = (s, base_index + offset);
                }
            }
            best
        })
        .reduce(
            || (f64::NEG_INFINITY, u64::MAX),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        );
    let (norm_sq, index) = best;
    let mut best_poly = Polynomial::zero(fs, p.nvars())?;
    let mut i = index;
    for e in &monomials {
        best_poly.add_term(e, fs.elem((i % q) as u32)?)?;
        i /= q;
    }
    Ok(Correlation {
        best: best_poly,
        value: norm_sq.sqrt() / size as f64,
        index,
        candidates,
        monomials,
        prime_field: fs.is_prime_field(),
    })
}
