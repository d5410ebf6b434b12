use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::guard;

use super::{large_spectrum, PointSet, Subspace};

/// `u = plus[0] + plus[1] - minus[0] - minus[1]` with all four in `A`, as point codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FourTermWitness {
    pub u: u32,
    pub plus: [u32; 2],
    pub minus: [u32; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub struct Bogolyubov {
    pub space: Subspace,
    /// Squared spectral threshold; the threshold itself is `sqrt(delta)`.
    pub rho_sq: BigRational,
    pub spectrum_size: usize,
    /// `ceil(1/delta^2)`.
    pub codim_bound: u64,
    /// One witness per element of `space`, in [`Subspace::elements`] order.
    pub witnesses: Vec<FourTermWitness>,
}

/// `ceil(1/delta^2)`, saturating.
pub fn inverse_square_ceil(delta: &BigRational) -> u64 {
    let inv = (delta * delta).recip();
    let (q, r) = inv.numer().div_rem(inv.denom());
    let c = if r.is_zero() { q } else { q + 1 };
    c.to_u64().unwrap_or(u64::MAX)
}

fn check_delta(delta: &BigRational) -> Result<()> {
    if !delta.is_positive() || delta > &BigRational::one() {
        return Err(Error::DensityBelowThreshold(format!("delta {delta} must lie in (0, 1]")));
    }
    Ok(())
}

/// For each point `s`, the pair `(a, s - a)` in `A x A` with the smallest `a`.
fn first_pairs(a: &PointSet) -> Vec<Option<(u32, u32)>> {
    let sp = a.space();
    (0..sp.size() as u32)
        .into_par_iter()
        .map(|s| {
            a.members()
                .iter()
                .find(|&&x| a.contains(sp.sub(s, x)))
                .map(|&x| (x, sp.sub(s, x)))
        })
        .collect()
}

/// The subspace `U = span(Spec)^perp` for the large spectrum at threshold
/// `sqrt(delta)`, together with a checked witness `u in 2A - 2A` for every
/// `u in U`. Requires `|A| >= delta q^n`.
pub fn bogolyubov(a: &PointSet, delta: &BigRational) -> Result<Bogolyubov> {
    check_delta(delta)?;
    let fs = a.field();
    let sp = a.space();
    let size = sp.size();
    if BigRational::from(BigInt::from(a.len())) < delta * BigRational::from(BigInt::from(size)) {
        return Err(Error::DensityBelowThreshold(format!(
            "|A| = {} is below {delta} * {size}",
            a.len()
        )));
    }
    guard::check("Bogolyubov pair search", a.len() as u128 * size as u128, guard::ENUMERATION_LIMIT)?;
    let rho_sq = delta.clone();
    let spec = large_spectrum(a, &rho_sq)?;
    let gens: Vec<_> = spec.entries.iter().map(|e| sp.decode(e.r)).collect();
    let space = Subspace::span(fs, a.dim(), &gens)?.orthogonal_complement();
    let codim_bound = inverse_square_ceil(delta);
    if space.codim() as u64 > codim_bound {
        return Err(Error::VerificationFailed(format!(
            "codimension {} exceeds {codim_bound}",
            space.codim()
        )));
    }
    let pairs = first_pairs(a);
    let elements = space.elements()?;
    let witnesses = elements
        .par_iter()
        .map(|u| {
            let u = sp.encode(u);
            (0..size as u32)
                .find_map(|s| match (pairs[s as usize], pairs[sp.sub(s, u) as usize]) {
                    (Some(p), Some(m)) => Some(FourTermWitness {
                        u,
                        plus: [p.0, p.1],
                        minus: [m.0, m.1],
                    }),
                    _ => None,
                })
                .ok_or_else(|| Error::VerificationFailed(format!("no 4-term witness for point {u}")))
        })
        .collect::<Result<Vec<_>>>()?;
    for w in &witnesses {
        verify_witness(a, w)?;
    }
    Ok(Bogolyubov {
        space,
        rho_sq,
        spectrum_size: spec.entries.len(),
        codim_bound,
        witnesses,
    })
}

pub fn verify_witness(a: &PointSet, w: &FourTermWitness) -> Result<()> {
    let sp = a.space();
    let all_in = w.plus.iter().chain(&w.minus).all(|&x| a.contains(x));
    let total = sp.sub(sp.add(w.plus[0], w.plus[1]), sp.add(w.minus[0], w.minus[1]));
    if !all_in || total != w.u {
        return Err(Error::VerificationFailed(format!("bad 4-term witness {w:?}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use crate::rng::Stream;
    use std::collections::BTreeSet;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn ceiling() {
        assert_eq!(inverse_square_ceil(&rat(1, 4)), 16);
        assert_eq!(inverse_square_ceil(&rat(3, 10)), 12);
        assert_eq!(inverse_square_ceil(&rat(1, 1)), 1);
    }

    #[test]
    fn full_space() {
        let f2 = FieldSpec::prime(2).unwrap();
        let a = PointSet::new(&f2, 5, 0..32).unwrap();
        let b = bogolyubov(&a, &rat(1, 1)).unwrap();
        assert!(b.space.is_full());
        assert_eq!(b.witnesses.len(), 32);
    }

    #[test]
    fn coset_of_hyperplane() {
        let f2 = FieldSpec::prime(2).unwrap();
        // H = {x : x_1 + x_3 = 0}, A = H + e_1
        let in_h = |c: u32| ((c & 1) ^ ((c >> 2) & 1)) == 0;
        let a = PointSet::new(&f2, 6, (0..64).filter(|&c| !in_h(c))).unwrap();
        let b = bogolyubov(&a, &rat(1, 2)).unwrap();
        assert!(b.space.codim() <= 4);
        let sp = a.space();
        let mut sums = BTreeSet::new();
        for &x in a.members() {
            for &y in a.members() {
                sums.insert(sp.add(x, y));
            }
        }
        let two_minus_two: BTreeSet<u32> = sums.iter().flat_map(|&s| sums.iter().map(move |&t| sp.sub(s, t))).collect();
        assert!((0..64).filter(|&c| in_h(c)).all(|c| two_minus_two.contains(&c)));
        for u in b.space.elements().unwrap() {
            assert!(in_h(sp.encode(&u)));
        }
    }

    #[test]
    fn random_sets_in_odd_characteristic() {
        let mut rng = Stream::new(5, "bogolyubov");
        for q in [2u32, 3, 5] {
            let fs = FieldSpec::prime(q).unwrap();
            let n = if q == 5 { 3 } else { 4 };
            let total = q.pow(n as u32);
            for _ in 0..5 {
                let a = PointSet::new(&fs, n, (0..total).filter(|_| rng.chance(3, 10))).unwrap();
                let delta = BigRational::new(a.len().into(), (total as usize).into());
                let b = bogolyubov(&a, &delta).unwrap();
                assert!(b.space.codim() as u64 <= b.codim_bound);
                assert_eq!(b.witnesses.len() as u64, b.space.size().unwrap());
            }
        }
    }

    #[test]
    fn sparse_sets_are_rejected() {
        let f2 = FieldSpec::prime(2).unwrap();
        let a = PointSet::new(&f2, 4, [1, 2]).unwrap();
        assert!(matches!(bogolyubov(&a, &rat(1, 4)), Err(Error::DensityBelowThreshold(_))));
    }
}
