use std::collections::BTreeMap;

use num_rational::BigRational;
use proptest::prelude::*;
use trl_core::additive::{
    bogolyubov, find_system, FindOptions, LSystem, PointSet, ProductMultiset, Subspace,
};
use trl_core::field::{FieldElem, FieldSpec, ValueHistogram};
use trl_core::linalg::Matrix;
use trl_core::poly::{correlation_search, derivative_tensor, gowers_norm, random_polynomial, taylor_split, Polynomial};
use trl_core::rank::{
    arank, degenerate_decompose, degenerate_sample, forcing_check, nonempty_subsets, prank_bounds, prank_one_check,
    ForcingInstance, PrankStatus,
};
use trl_core::rng::Stream;
use trl_core::Tensor;

const PRIME_POWERS: [u32; 18] = [2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 17, 19, 23, 25, 27, 29, 31, 32];

fn f(q: u32) -> FieldSpec {
    FieldSpec::of_order(q).unwrap()
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

#[test]
fn field_axioms_hold_exhaustively() {
    for q in PRIME_POWERS.into_iter().chain([37, 41, 43, 47, 49, 53, 59, 61, 64]) {
        let fs = f(q);
        let els: Vec<FieldElem> = fs.elements().collect();
        for &a in &els {
            assert_eq!(fs.add(a, fs.neg(a)), FieldElem::ZERO);
            if !a.is_zero() {
                assert_eq!(fs.mul(a, fs.inv(a).unwrap()), FieldElem::ONE);
            }
            for &b in &els {
                assert_eq!(fs.add(a, b), fs.add(b, a));
                assert_eq!(fs.mul(a, b), fs.mul(b, a));
                // sampled third argument keeps the cube affordable at q = 64
                for &c in els.iter().step_by(1 + q as usize / 8) {
                    assert_eq!(fs.add(fs.add(a, b), c), fs.add(a, fs.add(b, c)));
                    assert_eq!(fs.mul(fs.mul(a, b), c), fs.mul(a, fs.mul(b, c)));
                    assert_eq!(fs.mul(a, fs.add(b, c)), fs.add(fs.mul(a, b), fs.mul(a, c)));
                }
            }
        }
        if fs.is_prime_field() {
            for &a in &els {
                for &b in &els {
                    assert_eq!(fs.mul(a, b).code(), a.code() * b.code() % q);
                    assert_eq!(fs.add(a, b).code(), (a.code() + b.code()) % q);
                }
            }
        }
    }
}

#[test]
fn characters_are_linear_and_nontrivial() {
    for q in PRIME_POWERS {
        let fs = f(q);
        let p = fs.p();
        for c in fs.nonzero_elements() {
            assert!(fs.elements().any(|a| fs.char_exponent(a, c) != 0));
            for a in fs.elements() {
                for b in fs.elements().step_by(3) {
                    let lhs = fs.char_exponent(fs.add(a, b), c);
                    assert_eq!(lhs, (fs.char_exponent(a, c) + fs.char_exponent(b, c)) % p);
                }
            }
        }
    }
}

#[test]
fn uniform_off_zero_histograms_have_one_character_sum() {
    for q in [2u32, 3, 4, 5, 7, 8, 9] {
        let fs = f(q);
        for (z, r) in [(5u64, 2u64), (1, 0), (0, 3)] {
            let mut counts = vec![r; q as usize];
            counts[0] = z;
            let h = ValueHistogram::from_u64(&counts);
            let values: Vec<BigRational> = fs
                .nonzero_elements()
                .map(|c| h.char_sum(c, &fs).unwrap().rational.unwrap())
                .collect();
            assert!(values.windows(2).all(|w| w[0] == w[1]));
            // E chi = (z - r) / (z + (q-1) r)
            let total = (z + (q as u64 - 1) * r) as i64;
            assert_eq!(values[0], rat(z as i64 - r as i64, total));
        }
    }
}

/// Gaussian elimination over a prime field with plain integers.
fn oracle_rank(rows: &[Vec<u32>], p: u32) -> usize {
    let mut m: Vec<Vec<u32>> = rows.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..cols {
        let Some(piv) = (rank..m.len()).find(|&i| m[i][col] != 0) else { continue };
        m.swap(rank, piv);
        let inv = (1..p).find(|x| x * m[rank][col] % p == 1).unwrap();
        for x in m[rank].iter_mut() {
            *x = *x * inv % p;
        }
        for i in 0..m.len() {
            if i != rank && m[i][col] != 0 {
                let factor = m[i][col];
                for j in 0..cols {
                    m[i][j] = (m[i][j] + p * p - factor * m[rank][j] % p) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn arb_small_tensor() -> impl Strategy<Value = Tensor> {
    (prop::sample::select(vec![2u32, 3]), prop::collection::vec(1usize..3, 2..4))
        .prop_flat_map(|(q, dims)| {
            let len: usize = dims.iter().product();
            (Just(q), Just(dims), prop::collection::vec(0..q, len))
        })
        .prop_map(|(q, dims, codes)| Tensor::from_codes(&f(q), dims, &codes).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn matrix_arank_is_rank(q in prop::sample::select(vec![2u32, 3, 5]), r in 1usize..5, c in 1usize..5, seed in any::<u64>()) {
        let fs = f(q);
        let mut rng = Stream::new(seed, "matrix");
        let codes: Vec<u32> = (0..r * c).map(|_| rng.below(q as u64) as u32).collect();
        let t = Tensor::from_codes(&fs, vec![r, c], &codes).unwrap();
        let rows: Vec<Vec<u32>> = codes.chunks(c).map(|x| x.to_vec()).collect();
        let rank = oracle_rank(&rows, q);
        let a = arank(&t).unwrap();
        prop_assert_eq!(a.floor, rank as u64);
        prop_assert_eq!(a.ceil, rank as u64);
        prop_assert_eq!(a.bias.value(), BigRational::new(1.into(), num_bigint::BigInt::from(q).pow(rank as u32)));
        let m = Matrix::from_rows(&fs, c, &rows.iter().map(|r| r.iter().map(|&x| fs.elem(x).unwrap()).collect()).collect::<Vec<_>>()).unwrap();
        prop_assert_eq!(m.rank(), rank);
    }

    #[test]
    fn prank_certificates_reconstitute(t in arb_small_tensor()) {
        let b = prank_bounds(&t, 200_000).unwrap();
        b.certificate.verify(&t).unwrap();
        prop_assert_eq!(b.certificate.len(), b.upper);
        for s in &b.certificate.summands {
            prop_assert!(prank_one_check(&s.tensor().unwrap()).unwrap().is_some());
        }
        let a = arank(&t).unwrap();
        prop_assert!(a.value <= b.upper as f64 + 1e-12);
        if b.status == PrankStatus::Exact {
            prop_assert!(b.lower <= b.upper);
            prop_assert_eq!(b.refuted_below, b.upper);
        }
    }

    #[test]
    fn degenerate_decomposition_size(seed in any::<u64>(), k in 1usize..3) {
        let fs = f(2);
        let mut rng = Stream::new(seed, "degenerate");
        let dims = vec![rng.range_inclusive(1, 3) as usize, rng.range_inclusive(1, 3) as usize, rng.range_inclusive(1, 3) as usize];
        let mut spaces = BTreeMap::new();
        for modes in nonempty_subsets(2) {
            let n: usize = modes.iter().map(|&m| dims[m]).product();
            let gens: Vec<_> = (0..k).map(|_| rng.vector(&fs, n)).collect();
            spaces.insert(modes, Subspace::span(&fs, n, &gens).unwrap());
        }
        let w = degenerate_sample(&fs, &dims, &spaces, &mut rng).unwrap();
        let cert = degenerate_decompose(&w).unwrap();
        prop_assert!(cert.len() <= 4 * w.k());
        cert.verify(&w.tensor).unwrap();
    }

    #[test]
    fn forcing_is_monotone_in_alpha(seed in any::<u64>()) {
        let fs = f(2);
        let dims = vec![2, 2];
        let mut rng = Stream::new(seed, "forcing");
        let q: Vec<(Tensor, u64)> = (0..3)
            .map(|_| (Tensor::product_of(&fs, &[rng.vector(&fs, 2), rng.vector(&fs, 2)]).unwrap(), 1 + rng.below(2)))
            .collect();
        let spaces: BTreeMap<_, _> = nonempty_subsets(2)
            .into_iter()
            .map(|i| {
                let n: usize = i.iter().map(|&m| dims[m]).product();
                let gens = vec![rng.vector(&fs, n)];
                (i, Subspace::span(&fs, n, &gens).unwrap())
            })
            .collect();
        let alphas = [rat(1, 4), rat(1, 2), rat(2, 3), rat(1, 1)];
        let verdicts: Vec<bool> = alphas
            .iter()
            .map(|a| forcing_check(&ForcingInstance { fs: fs.clone(), dims: dims.clone(), q: q.clone(), alpha: a.clone(), spaces: spaces.clone() }).unwrap().forcing)
            .collect();
        for w in verdicts.windows(2) {
            prop_assert!(!w[0] || w[1]);
        }
    }

    #[test]
    fn gowers_norms_increase_and_taylor_reconstitutes(seed in any::<u64>(), q in prop::sample::select(vec![3u32, 5]), d in 2u32..4, n in 1usize..3) {
        prop_assume!(d < q);
        let fs = f(q);
        let mut rng = Stream::new(seed, "poly");
        let p = random_polynomial(&fs, n, d, &mut rng).unwrap();
        let mut prev = 0.0;
        for k in 1..=d as usize {
            let g = gowers_norm(&p, k, FieldElem::ONE).unwrap();
            prop_assert!(prev <= g.value + 1e-9);
            prev = g.value;
        }
        let ts = taylor_split(&p, d as usize).unwrap();
        ts.verify_pointwise(&p).unwrap();
        prop_assert!(ts.remainder.is_zero() || ts.remainder.degree() < d);
    }

    #[test]
    fn derivative_tensor_is_symmetric_and_multilinear(seed in any::<u64>(), q in prop::sample::select(vec![3u32, 5]), n in 1usize..3) {
        let fs = f(q);
        let mut rng = Stream::new(seed, "symmetric");
        let p = random_polynomial(&fs, n, 2, &mut rng).unwrap();
        let t = derivative_tensor(&p, 2).unwrap();
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(t.get(&[i, j]).unwrap(), t.get(&[j, i]).unwrap());
            }
        }
        let (x, y, z) = (rng.vector(&fs, n), rng.vector(&fs, n), rng.vector(&fs, n));
        let a = rng.elem(&fs);
        let comb: Vec<FieldElem> = x.iter().zip(&y).map(|(&u, &v)| fs.add(fs.mul(a, u), v)).collect();
        let lhs = t.eval(&[comb, z.clone()]).unwrap();
        let rhs = fs.add(fs.mul(a, t.eval(&[x, z.clone()]).unwrap()), t.eval(&[y, z]).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn orthogonal_complement_is_an_involution(q in prop::sample::select(vec![2u32, 3, 4, 5]), n in 1usize..6, seed in any::<u64>()) {
        let fs = f(q);
        let mut rng = Stream::new(seed, "complement");
        let k = rng.below(n as u64 + 1) as usize;
        let gens: Vec<_> = (0..k).map(|_| rng.vector(&fs, n)).collect();
        let v = Subspace::span(&fs, n, &gens).unwrap();
        let perp = v.orthogonal_complement();
        prop_assert_eq!(v.dim() + perp.dim(), n);
        prop_assert_eq!(perp.orthogonal_complement(), v);
    }

    #[test]
    fn intersected_systems_stay_inside_both(seed in any::<u64>(), l1 in 0u64..3, l2 in 0u64..3) {
        let fs = f(2);
        let mut rng = Stream::new(seed, "systems");
        let a = LSystem::random(&fs, &[2, 3], l1, &mut rng).unwrap();
        let b = LSystem::random(&fs, &[2, 3], l2, &mut rng).unwrap();
        let c = a.intersect(&b).unwrap();
        prop_assert_eq!(c.bound(), l1 + l2);
        prop_assert!(c.validate().unwrap().valid);
        for t in c.elements().unwrap() {
            prop_assert!(a.contains_tuple(&t) && b.contains_tuple(&t));
        }
    }
}

#[test]
fn correlation_finds_degenerate_phases() {
    // U^d norm exactly 1 means the phase is of lower degree, and the search over that degree finds it
    let mut rng = Stream::new(17, "correlate");
    for q in [3u32, 5] {
        let fs = f(q);
        for _ in 0..4 {
            let p = random_polynomial(&fs, 2, 1, &mut rng).unwrap();
            assert!((gowers_norm(&p, 2, FieldElem::ONE).unwrap().value - 1.0).abs() < 1e-12);
            let c = correlation_search(&p, 1, FieldElem::ONE).unwrap();
            assert!((c.value - 1.0).abs() < 1e-12);
            // the maximizer agrees with P up to an additive constant
            let diff = p.sub(&c.best).unwrap();
            assert!(diff.is_zero() || diff.degree() == 0);
        }
    }
}

#[test]
fn bogolyubov_subspace_lies_in_the_sumset() {
    let fs = f(2);
    let mut rng = Stream::new(21, "bogolyubov");
    for _ in 0..5 {
        let a = PointSet::new(&fs, 6, (0..64).filter(|_| rng.chance(2, 5))).unwrap();
        let delta = BigRational::new((a.len() as i64).into(), 64.into());
        let b = bogolyubov(&a, &delta).unwrap();
        assert!(b.space.codim() as u64 <= b.codim_bound);
        let sp = a.space();
        let sums: std::collections::BTreeSet<u32> =
            a.members().iter().flat_map(|&x| a.members().iter().map(move |&y| sp.add(x, y))).collect();
        for u in b.space.elements().unwrap() {
            let u = sp.encode(&u);
            assert!(sums.iter().any(|&s| sums.contains(&sp.sub(s, u))));
        }
    }
}

#[test]
fn found_systems_respect_their_bounds() {
    let fs = f(2);
    let mut rng = Stream::new(23, "find");
    for dims in [vec![3usize], vec![2, 3], vec![2, 2, 2]] {
        let bp = ProductMultiset::random_subset(&fs, &dims, 1, 2, &mut rng).unwrap();
        let found = find_system(&bp, &rat(1, 4), &FindOptions::default()).unwrap();
        let d = dims.len() as u32;
        assert!(found.max_plus <= 4usize.pow(d) && found.max_minus <= 4usize.pow(d));
        assert!(found.system.max_codim() as u64 <= found.codim_bound);
        let tensors = bp.tensors().unwrap();
        for (tuple, cert) in &found.certificates {
            let factors: Vec<_> = tuple
                .iter()
                .zip(&dims)
                .map(|(&c, &n)| (0..n).map(|i| fs.elem((c >> i) & 1).unwrap()).collect())
                .collect();
            assert!(cert.verify(&Tensor::product_of(&fs, &factors).unwrap(), &tensors).unwrap());
        }
    }
}

#[test]
fn polynomial_files_roundtrip() {
    let mut rng = Stream::new(29, "files");
    for q in [2u32, 3, 4, 9] {
        let fs = f(q);
        let p = random_polynomial(&fs, 3, 2, &mut rng).unwrap();
        assert_eq!(Polynomial::from_json(&p.to_json()).unwrap(), p);
    }
}
