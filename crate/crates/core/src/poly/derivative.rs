use crate::error::{Error, Result};
use crate::field::FieldElem;
use crate::points::PointSpace;
use crate::tensor::Tensor;

use super::Polynomial;

/// `C(n, k) mod p` by Lucas' theorem.
pub fn binomial_mod_p(mut n: u64, mut k: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    while k > 0 {
        let (ni, ki) = (n % p, k % p);
        if ki > ni {
            return 0;
        }
        // small binomial C(ni, ki) mod p via the multiplicative formula over integers
        let mut c: u128 = 1;
        for j in 0..ki as u128 {
            c = c * (ni as u128 - j) / (j + 1);
        }
        acc = acc * (c % p as u128) as u64 % p;
        n /= p;
        k /= p;
    }
    acc
}

/// `D_y P(x) = P(x + y) - P(x)`, expanded symbolically.
pub fn derivative(p: &Polynomial, y: &[FieldElem]) -> Result<Polynomial> {
    let fs = p.field();
    let n = p.nvars();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "shift of length {} for {n} variables",
            y.len()
        )));
    }
    for &v in y {
        fs.check(v)?;
    }
    let pr = fs.p() as u64;
    let mut shifted = Polynomial::zero(fs, n)?;
    for (e, &c) in p.monomials() {
        // product over variables of sum_k C(e_i, k) y_i^{e_i - k} x_i^k
        let mut partial: Vec<(Vec<u32>, FieldElem)> = vec![(vec![0; n], c)];
        for i in 0..n {
            let ei = e[i];
            if ei == 0 {
                continue;
            }
            let mut next = Vec::new();
            for (exps, coeff) in &partial {
                for k in 0..=ei {
                    let b = binomial_mod_p(ei as u64, k as u64, pr);
                    if b == 0 {
                        continue;
                    }
                    let factor = fs.mul(fs.from_int(b as i64), fs.pow(y[i], (ei - k) as u64));
                    if factor.is_zero() {
                        continue;
                    }
                    let mut ex = exps.clone();
                    ex[i] = k;
                    next.push((ex, fs.mul(*coeff, factor)));
                }
            }
            partial = next;
        }
        for (ex, coeff) in partial {
            shifted.add_term(&ex, coeff)?;
        }
    }
    shifted.sub(p)
}

/// The order-`d` form `T(y_1, ..., y_d) = Σ_{S ⊆ [d]} (-1)^{d-|S|} P(Σ_{i∈S} y_i)`,
/// read off on standard basis vectors.
pub fn derivative_tensor(p: &Polynomial, d: usize) -> Result<Tensor> {
    if d == 0 {
        return Err(Error::OrderTooSmall(0));
    }
    if p.degree() as usize > d {
        return Err(Error::DegreeTooHigh {
            degree: p.degree(),
            order: d,
        });
    }
    let fs = p.field();
    let n = p.nvars();
    let mut t = Tensor::zeros(fs, &vec![n; d])?;
    let mut point = vec![FieldElem::ZERO; n];
    let mut entries = Vec::with_capacity(t.len());
    for flat in 0..t.len() {
        let idx = t.multi_index(flat);
        let mut acc = FieldElem::ZERO;
        for mask in 0u32..(1 << d) {
            point.iter_mut().for_each(|x| *x = FieldElem::ZERO);
            for (j, &i) in idx.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    point[i] = fs.add(point[i], FieldElem::ONE);
                }
            }
            let v = p.eval_unchecked(&point);
            if (d as u32 - mask.count_ones()) % 2 == 0 {
                acc = fs.add(acc, v);
            } else {
                acc = fs.sub(acc, v);
            }
        }
        entries.push(acc);
    }
    for (flat, v) in entries.into_iter().enumerate() {
        let idx = t.multi_index(flat);
        t.set(&idx, v)?;
    }
    Ok(t)
}

/// `P(x) = (1/d!) T(x, ..., x) + W(x)` with `deg W <= d - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaylorSplit {
    pub tensor: Tensor,
    pub remainder: Polynomial,
    /// `(d!)^{-1}` in the field.
    pub inv_factorial: FieldElem,
}

impl TaylorSplit {
    /// `(1/d!) T(x, ..., x)` as a polynomial.
    pub fn diagonal(&self) -> Result<Polynomial> {
        let t = &self.tensor;
        let fs = t.field();
        let n = t.dims()[0];
        let mut out = Polynomial::zero(fs, n)?;
        for (flat, &c) in t.entries().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut e = vec![0u32; n];
            for i in t.multi_index(flat) {
                e[i] += 1;
            }
            out.add_term(&e, fs.mul(self.inv_factorial, c))?;
        }
        Ok(out)
    }

    /// Checks the identity at every point of `F^n`.
    pub fn verify_pointwise(&self, p: &Polynomial) -> Result<()> {
        let fs = p.field();
        let table = p.value_table()?;
        let w = self.remainder.value_table()?;
        let sp = PointSpace::new(fs, p.nvars())?;
        let d = self.tensor.order();
        for (code, (&pv, &wv)) in table.iter().zip(&w).enumerate() {
            let x = sp.decode(code as u32);
            let txx = self.tensor.eval(&vec![x; d])?;
            if fs.add(fs.mul(self.inv_factorial, txx), wv) != pv {
                return Err(Error::VerificationFailed(format!(
                    "Taylor identity fails at point code {code}"
                )));
            }
        }
        Ok(())
    }
}

pub fn taylor_split(p: &Polynomial, d: usize) -> Result<TaylorSplit> {
    let fs = p.field();
    if d as u64 >= fs.p() as u64 {
        return Err(Error::CharacteristicViolation {
            degree: d as u32,
            p: fs.p(),
        });
    }
    let tensor = derivative_tensor(p, d)?;
    let mut fact = FieldElem::ONE;
    for i in 1..=d {
        fact = fs.mul(fact, fs.from_int(i as i64));
    }
    let inv_factorial = fs.inv(fact)?;
    let mut split = TaylorSplit {
        tensor,
        remainder: Polynomial::zero(fs, p.nvars())?,
        inv_factorial,
    };
    split.remainder = p.sub(&split.diagonal()?)?;
    if split.remainder.degree() as usize + 1 > d && !split.remainder.is_zero() {
        return Err(Error::VerificationFailed(format!(
            "remainder has degree {} but should be below {d}",
            split.remainder.degree()
        )));
    }
    Ok(split)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use crate::poly::random_polynomial;
    use crate::rng::Stream;

    fn f(q: u32) -> FieldSpec {
        FieldSpec::of_order(q).unwrap()
    }

    fn mono(fs: &FieldSpec, n: usize, e: &[u32]) -> Polynomial {
        Polynomial::from_terms(fs, n, &[(e.to_vec(), FieldElem::ONE)]).unwrap()
    }

    #[test]
    fn binomials() {
        for p in [2u64, 3, 5, 7] {
            for n in 0..20u64 {
                let mut row = vec![1u64];
                for k in 1..=n {
                    row.push(row[k as usize - 1] * (n - k + 1) / k);
                }
                for k in 0..=n {
                    assert_eq!(binomial_mod_p(n, k, p), row[k as usize] % p, "C({n},{k}) mod {p}");
                }
            }
        }
    }

    #[test]
    fn derivative_examples() {
        let f3 = f(3);
        let p = mono(&f3, 2, &[1, 1]);
        assert!(derivative(&p, &[FieldElem::ZERO; 2]).unwrap().is_zero());
        let d = derivative(&p, &[FieldElem::ONE, FieldElem::ZERO]).unwrap();
        assert_eq!(d, mono(&f3, 2, &[0, 1]));
        // linear: constant P(y) - P(0)
        let lin = Polynomial::from_terms(&f3, 2, &[(vec![1, 0], FieldElem::ONE), (vec![0, 1], f3.elem(2).unwrap()), (vec![0, 0], FieldElem::ONE)]).unwrap();
        let y = [f3.elem(2).unwrap(), FieldElem::ONE];
        let dl = derivative(&lin, &y).unwrap();
        let expect = f3.sub(lin.eval(&y).unwrap(), lin.eval(&[FieldElem::ZERO; 2]).unwrap());
        assert_eq!(dl, Polynomial::from_terms(&f3, 2, &[(vec![0, 0], expect)]).unwrap());
    }

    #[test]
    fn derivative_matches_pointwise_difference() {
        let mut rng = Stream::new(9, "deriv");
        for q in [2u32, 3, 4, 5] {
            let fs = f(q);
            for _ in 0..10 {
                let p = random_polynomial(&fs, 2, 3, &mut rng).unwrap();
                let y = rng.vector(&fs, 2);
                let d = derivative(&p, &y).unwrap();
                assert!(d.degree() < p.degree() || d.is_zero());
                let sp = PointSpace::new(&fs, 2).unwrap();
                for code in sp.codes() {
                    let x = sp.decode(code);
                    let xy: Vec<_> = x.iter().zip(&y).map(|(&a, &b)| fs.add(a, b)).collect();
                    assert_eq!(d.eval(&x).unwrap(), fs.sub(p.eval(&xy).unwrap(), p.eval(&x).unwrap()));
                }
            }
        }
    }

    #[test]
    fn derivative_tensor_examples() {
        let f3 = f(3);
        let t = derivative_tensor(&mono(&f3, 2, &[1, 1]), 2).unwrap();
        assert_eq!(t.codes(), vec![0, 1, 1, 0]);
        assert!(derivative_tensor(&mono(&f3, 2, &[1, 0]), 2).unwrap().is_zero());
        let f5 = f(5);
        let t = derivative_tensor(&mono(&f5, 3, &[1, 1, 1]), 3).unwrap();
        for flat in 0..t.len() {
            let idx = t.multi_index(flat);
            let mut s = idx.clone();
            s.sort();
            let expect = if s == vec![0, 1, 2] { 1 } else { 0 };
            assert_eq!(t.entries()[flat].code(), expect, "{idx:?}");
        }
        assert!(matches!(derivative_tensor(&mono(&f5, 2, &[2, 1]), 2), Err(Error::DegreeTooHigh { .. })));
    }

    #[test]
    fn taylor_examples() {
        let f3 = f(3);
        let p = mono(&f3, 2, &[1, 1]);
        let s = taylor_split(&p, 2).unwrap();
        assert!(s.remainder.is_zero());
        assert_eq!(s.inv_factorial, f3.elem(2).unwrap());
        assert_eq!(s.diagonal().unwrap(), p);
        let f2 = f(2);
        assert!(matches!(
            taylor_split(&mono(&f2, 2, &[1, 1]), 2),
            Err(Error::CharacteristicViolation { degree: 2, p: 2 })
        ));
        // lower-order terms land in W
        let low = Polynomial::from_terms(&f3, 2, &[(vec![1, 0], FieldElem::ONE), (vec![0, 0], f3.elem(2).unwrap())]).unwrap();
        let s = taylor_split(&p.add(&low).unwrap(), 2).unwrap();
        assert_eq!(s.remainder, low);
    }

    #[test]
    fn taylor_identity_on_random_polynomials() {
        let mut rng = Stream::new(4, "taylor");
        for q in [3u32, 5, 7, 9] {
            let fs = f(q);
            for d in 1..fs.p().min(4) as usize {
                let p = random_polynomial(&fs, 2, d as u32, &mut rng).unwrap();
                let s = taylor_split(&p, d).unwrap();
                s.verify_pointwise(&p).unwrap();
                assert!(s.remainder.degree() < d as u32 || s.remainder.is_zero());
                // symmetric
                for flat in 0..s.tensor.len() {
                    let mut idx = s.tensor.multi_index(flat);
                    idx.reverse();
                    assert_eq!(s.tensor.get(&idx).unwrap(), s.tensor.entries()[flat]);
                }
            }
        }
    }
}
