use std::collections::BTreeSet;

use anyhow::Result;
use num_bigint::BigUint;
use num_rational::BigRational;
use rayon::prelude::*;
use serde_json::json;
use trl_core::additive::{
    bogolyubov, find_system, verify_witness, FindOptions, LSystem, PointSet, ProductMultiset, Subspace,
};
use trl_core::field::{FieldElem, FieldSpec};
use trl_core::linalg::Matrix;
use trl_core::poly::{random_polynomial, taylor_split, Polynomial};
use trl_core::rank::bias::is_power_of_q;
use trl_core::rank::tower::{compare_towers, int, pow, tower, Expr, Refusal};
use trl_core::rank::{
    bias_charsum_crosscheck, bias_exact, forcing_check, prank_bounds, tower_bound, ForcingInstance, ModeSet,
    PrankStatus,
};
use trl_core::rng::Stream;
use trl_core::{Error, Tensor};

use crate::args::{EnsembleArgs, EnsembleKind, Format};
use crate::ensemble::{self, degenerate_row, poly_row, random_spaces, random_tensor};
use crate::report::{self, Outcome, Table};

pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, failures: Vec<String>, ok_detail: String) -> Check {
    Check {
        name,
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            ok_detail
        } else {
            let mut s = format!("{} failures; first: {}", failures.len(), failures[0]);
            s.truncate(300);
            s
        },
    }
}

fn stream(seed: u64, label: &str) -> Stream {
    Stream::new(seed, "selftest").split(label)
}

fn field(q: u32) -> FieldSpec {
    FieldSpec::of_order(q).expect("small prime fields exist")
}

fn matrix_case(fs: &FieldSpec, rows: usize, cols: usize, entries: Vec<FieldElem>) -> Option<String> {
    let m = Matrix::from_data(fs, rows, cols, entries.clone());
    let t = Tensor::new(fs, vec![rows, cols], entries).ok()?;
    let rank = m.rank() as u64;
    match bias_exact(&t).map(|b| is_power_of_q(&b, fs.q())) {
        Ok(Some(r)) if r == rank => None,
        other => Some(format!("{rows}x{cols} over F_{}: rank {rank}, bias gives {other:?}", fs.q())),
    }
}

/// Bias of a matrix is exactly `q^{-rank}`.
pub fn matrices(seed: u64) -> Check {
    let f2 = field(2);
    let mut failures: Vec<String> = (2..=4usize)
        .flat_map(|n| {
            let f2 = f2.clone();
            (0..1u64 << (n * n)).into_par_iter().filter_map(move |code| {
                let entries = (0..n * n).map(|b| f2.elem(((code >> b) & 1) as u32).unwrap()).collect();
                matrix_case(&f2, n, n, entries)
            }).collect::<Vec<_>>()
        })
        .collect();
    let base = stream(seed, "matrices");
    failures.extend((0..500u64).into_par_iter().filter_map(|i| {
        let mut rng = base.split_index("instance", i);
        let fs = field(if i % 2 == 0 { 3 } else { 5 });
        let rows = rng.range_inclusive(1, 4) as usize;
        let cols = rng.range_inclusive(1, 4) as usize;
        let entries = rng.vector(&fs, rows * cols);
        matrix_case(&fs, rows, cols, entries)
    }).collect::<Vec<_>>());
    check(
        "matrix bias equals q^-rank",
        failures,
        "66064 F_2 square matrices and 500 F_3/F_5 matrices".into(),
    )
}

/// Every 2x2x2 binary tensor: exact partition rank, arank <= prank, and the
/// bias agrees with every nontrivial character sum.
pub fn small_tensors() -> Check {
    let fs = field(2);
    let failures: Vec<String> = (0..256u32)
        .into_par_iter()
        .filter_map(|code| {
            let codes: Vec<u32> = (0..8).map(|b| (code >> b) & 1).collect();
            let t = Tensor::from_codes(&fs, vec![2, 2, 2], &codes).ok()?;
            let run = || -> trl_core::Result<Option<String>> {
                let b = prank_bounds(&t, 1_000_000)?;
                b.certificate.verify(&t)?;
                if b.status != PrankStatus::Exact {
                    return Ok(Some(format!("tensor {code}: prank inconclusive")));
                }
                let bias = bias_exact(&t)?;
                // arank <= prank  <=>  q^{-prank} <= bias
                let floor = BigRational::new(1.into(), BigUint::from(2u32).pow(b.upper as u32).into());
                if bias.value() < floor {
                    return Ok(Some(format!("tensor {code}: bias {} below 2^-{}", bias.reduced_string(), b.upper)));
                }
                let h = bias_charsum_crosscheck(&t)?;
                for c in fs.nonzero_elements() {
                    if h.char_sum(c, &fs)?.rational != Some(bias.value()) {
                        return Ok(Some(format!("tensor {code}: character sum disagrees")));
                    }
                }
                Ok(None)
            };
            run().unwrap_or_else(|e| Some(format!("tensor {code}: {e}")))
        })
        .collect();
    check(
        "2x2x2 binary tensors: exact prank bounds arank",
        failures,
        "256 tensors, exact status, character sums agree".into(),
    )
}

/// The polynomial ensemble shared by the derivative and Taylor checks.
pub fn poly_case(seed: u64, i: u64) -> (Polynomial, usize) {
    let mut rng = stream(seed, "polynomials").split_index("instance", i);
    let (q, d, max_n) = match i % 3 {
        0 => (3, 2, 3),
        1 => (5, 2, 3),
        _ => (5, 3, 2),
    };
    let n = rng.range_inclusive(1, max_n) as usize;
    let p = random_polynomial(&field(q), n, d as u32, &mut rng).expect("valid parameters");
    (p, d)
}

pub fn gowers_identity(seed: u64) -> Check {
    let failures: Vec<String> = (0..200u64)
        .into_par_iter()
        .filter_map(|i| {
            let (p, d) = poly_case(seed, i);
            match poly_row(&p, d) {
                Ok(r) if r.identity && r.monotone => None,
                Ok(r) => Some(format!("polynomial {i}: identity {}, norms {:?}", r.identity, r.norms)),
                Err(e) => Some(format!("polynomial {i}: {e}")),
            }
        })
        .collect();
    check(
        "derivative histogram identity and norm monotonicity",
        failures,
        format!("200 polynomials, step tolerance {:e}", ensemble::MONOTONE_TOLERANCE),
    )
}

pub fn taylor(seed: u64) -> Check {
    let mut failures: Vec<String> = (0..200u64)
        .into_par_iter()
        .filter_map(|i| {
            let (p, d) = poly_case(seed, i);
            let run = || -> trl_core::Result<Option<String>> {
                let s = taylor_split(&p, d)?;
                s.verify_pointwise(&p)?;
                let w_ok = s.remainder.is_zero() || s.remainder.degree() < d as u32;
                Ok((!w_ok).then(|| format!("polynomial {i}: remainder degree {}", s.remainder.degree())))
            };
            run().unwrap_or_else(|e| Some(format!("polynomial {i}: {e}")))
        })
        .collect();
    let f2 = field(2);
    let x0x1 = Polynomial::from_terms(&f2, 2, &[(vec![1, 1], FieldElem::ONE)]).expect("valid");
    if !matches!(taylor_split(&x0x1, 2), Err(Error::CharacteristicViolation { .. })) {
        failures.push("F_2 with d = 2 was not rejected".into());
    }
    check(
        "Taylor split holds pointwise",
        failures,
        "200 polynomials, F_2 d=2 rejected".into(),
    )
}

pub fn degenerate(seed: u64) -> Check {
    let fs = field(2);
    let base = stream(seed, "degenerate");
    let failures: Vec<String> = (0..100u64)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = base.split_index("instance", i);
            let k = 1 + (i % 2) as usize;
            let dims: Vec<usize> = (0..3).map(|_| rng.range_inclusive(1, 3) as usize).collect();
            match degenerate_row(&fs, &dims, k, &mut rng) {
                Ok(r) if r.ok && r.summands <= 4 * k => None,
                Ok(r) => Some(format!("instance {i}: {} summands for k = {k}", r.summands)),
                Err(e) => Some(format!("instance {i}: {e}")),
            }
        })
        .collect();
    check(
        "degenerate tensors decompose into at most 4k rank-one pieces",
        failures,
        "100 tensors, d=3, k in {1,2}".into(),
    )
}

/// Odd instances lie inside a subspace of codimension 1 or 2.
fn dense_set(rng: &mut Stream, i: u64) -> Vec<u32> {
    let mut pool: Vec<u32> = (0..256).collect();
    let mut size = rng.range_inclusive(64, 256) as usize;
    if i % 2 == 1 {
        let z1 = rng.range_inclusive(1, 255) as u32;
        let z2 = if i % 4 == 1 { 0 } else { (z1 + rng.range_inclusive(1, 254) as u32) % 256 };
        let z2 = if z2 == z1 { 0 } else { z2 };
        pool.retain(|x| (x & z1).count_ones() % 2 == 0 && (x & z2).count_ones() % 2 == 0);
        size = if pool.len() == 64 { 64 } else { rng.range_inclusive(64, 128) as usize };
    }
    rng.shuffle(&mut pool);
    pool.truncate(size);
    pool
}

pub fn bogolyubov_sets(seed: u64) -> Check {
    let fs = field(2);
    let base = stream(seed, "bogolyubov");
    let delta = BigRational::new(1.into(), 4.into());
    let failures: Vec<String> = (0..50u64)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = base.split_index("instance", i);
            let codes = dense_set(&mut rng, i);
            let run = || -> trl_core::Result<Option<String>> {
                let a = PointSet::new(&fs, 8, codes)?;
                let b = bogolyubov(&a, &delta)?;
                if b.space.codim() > 16 {
                    return Ok(Some(format!("set {i}: codim {}", b.space.codim())));
                }
                let covered: BTreeSet<u32> = b.witnesses.iter().map(|w| w.u).collect();
                let elements = b.space.elements()?;
                if covered.len() != elements.len()
                    || elements.iter().any(|v| !covered.contains(&a.space().encode(v)))
                {
                    return Ok(Some(format!("set {i}: witnesses do not cover the subspace")));
                }
                for w in &b.witnesses {
                    verify_witness(&a, w)?;
                }
                Ok(None)
            };
            run().unwrap_or_else(|e| Some(format!("set {i}: {e}")))
        })
        .collect();
    check(
        "Bogolyubov subspaces inside 2A-2A",
        failures,
        "50 sets in F_2^8 of density >= 1/4, codim <= 16".into(),
    )
}

/// Whether `⊗_{i in modes} u_i` lies in `l`.
fn tuple_in(l: &Subspace, modes: &[usize], us: &[Vec<FieldElem>], fs: &FieldSpec) -> bool {
    let mut w = vec![FieldElem::ONE];
    for &i in modes {
        w = w.iter().flat_map(|&a| us[i].iter().map(move |&b| fs.mul(a, b))).collect();
    }
    l.contains(&w)
}

pub fn systems(seed: u64) -> Check {
    let fs = field(2);
    let dims = [3usize, 3];
    let base = stream(seed, "systems");
    let mut failures = Vec::new();
    let decode = |code: u32, n: usize| -> Vec<FieldElem> {
        (0..n).map(|b| fs.elem((code >> b) & 1).unwrap()).collect()
    };
    for i in 0..10u64 {
        let mut rng = base.split_index("instance", i);
        let run = |rng: &mut Stream| -> trl_core::Result<Option<String>> {
            let a = LSystem::random(&fs, &dims, 1, rng)?;
            let b = LSystem::random(&fs, &dims, 1, rng)?;
            let c = a.intersect(&b)?;
            let check = c.validate()?;
            if !check.valid || c.bound() != 2 || check.max_codim > 2 {
                return Ok(Some(format!("intersection {i}: {:?}", check.problems)));
            }
            let ec: BTreeSet<Vec<u32>> = c.elements()?.into_iter().collect();
            let both: BTreeSet<Vec<u32>> = a.elements()?.into_iter().filter(|t| b.contains_tuple(t)).collect();
            if ec != both {
                return Ok(Some(format!("intersection {i}: element set differs from the common elements")));
            }
            // random constraints of codimension <= 1 on {0}, {1} and {0,1}
            let mut constraints = std::collections::BTreeMap::new();
            for modes in [vec![0], vec![1], vec![0, 1]] {
                let n: usize = modes.iter().map(|&m: &usize| dims[m]).product();
                let z = rng.vector(&fs, n);
                constraints.insert(modes, Subspace::span(&fs, n, &[z])?.orthogonal_complement());
            }
            let k = constraints.values().map(|s: &Subspace| s.codim()).max().unwrap_or(0) as u64;
            let r = a.restrict(&constraints)?;
            let check = r.validate()?;
            if !check.valid || r.bound() != 1 + 4 * k || check.max_codim as u64 > 1 + 4 * k {
                return Ok(Some(format!("restriction {i}: bound {} codim {}", r.bound(), check.max_codim)));
            }
            let er: BTreeSet<Vec<u32>> = r.elements()?.into_iter().collect();
            let kept: BTreeSet<Vec<u32>> = a
                .elements()?
                .into_iter()
                .filter(|t| {
                    let us: Vec<Vec<FieldElem>> = t.iter().zip(&dims).map(|(&c, &n)| decode(c, n)).collect();
                    constraints.iter().all(|(m, l)| tuple_in(l, m, &us, &fs))
                })
                .collect();
            if er != kept {
                return Ok(Some(format!("restriction {i}: element set differs from the constrained elements")));
            }
            Ok(None)
        };
        if let Some(f) = run(&mut rng).unwrap_or_else(|e| Some(format!("instance {i}: {e}"))) {
            failures.push(f);
        }
    }
    let delta = BigRational::new(1.into(), 4.into());
    let opts = FindOptions::default();
    let quarter = BigRational::new(1.into(), 4.into());
    for i in 0..5u64 {
        let run = || -> trl_core::Result<Option<String>> {
            let mut attempt = 0;
            let bp = loop {
                let mut rng = base.split_index("multiset", i).split_index("attempt", attempt);
                let bp = ProductMultiset::random_subset(&fs, &dims, 1, 2, &mut rng)?;
                let dens = BigRational::new(bp.tuples()?.len().into(), bp.full_size()?.into());
                if dens >= quarter {
                    break bp;
                }
                attempt += 1;
            };
            let found = find_system(&bp, &delta, &opts)?;
            if !found.system.validate()?.valid {
                return Ok(Some(format!("multiset {i}: invalid system")));
            }
            let tensors = bp.tensors()?;
            let elements = found.system.elements()?;
            for e in &elements {
                let Some(cert) = found.certificates.get(e) else {
                    return Ok(Some(format!("multiset {i}: element {e:?} has no certificate")));
                };
                if cert.plus.len() > 16 || cert.minus.len() > 16 {
                    return Ok(Some(format!("multiset {i}: certificate with {} / {} terms", cert.plus.len(), cert.minus.len())));
                }
                let us: Vec<Vec<FieldElem>> = e.iter().zip(&dims).map(|(&c, &n)| decode(c, n)).collect();
                let target = Tensor::product_of(&fs, &us)?;
                if !cert.verify(&target, &tensors)? {
                    return Ok(Some(format!("multiset {i}: certificate for {e:?} does not sum to it")));
                }
            }
            Ok(None)
        };
        if let Some(f) = run().unwrap_or_else(|e| Some(format!("multiset {i}: {e}"))) {
            failures.push(f);
        }
    }
    check(
        "system intersection, restriction and search",
        failures,
        "10 intersections and restrictions, 5 searches at delta 1/4".into(),
    )
}

/// Brute-force forcing decision on binary arrays: collected arrays by direct
/// counting, the subspace sum by closing its generators under addition.
pub fn forcing_oracle(inst: &ForcingInstance) -> (bool, u64) {
    let fs = &inst.fs;
    let dims = &inst.dims;
    let n: usize = dims.iter().product();
    let shape = Tensor::zeros(fs, dims).expect("valid dims");
    let mut span: BTreeSet<u64> = BTreeSet::from([0]);
    for (modes, v) in &inst.spaces {
        let comp: Vec<usize> = (0..dims.len()).filter(|m| !modes.contains(m)).collect();
        let comp_size: usize = comp.iter().map(|&m| dims[m]).product();
        for b in v.basis() {
            for e in 0..comp_size {
                let mut mask = 0u64;
                for flat in 0..n {
                    let idx = shape.multi_index(flat);
                    let fi = modes.iter().fold(0, |acc, &m| acc * dims[m] + idx[m]);
                    let fc = comp.iter().fold(0, |acc, &m| acc * dims[m] + idx[m]);
                    if fc == e && !b[fi].is_zero() {
                        mask |= 1 << flat;
                    }
                }
                let next: Vec<u64> = span.iter().map(|&s| s ^ mask).collect();
                span.extend(next);
            }
        }
    }
    let masks: Vec<(u64, u64)> = inst
        .q
        .iter()
        .map(|(t, m)| {
            let mask = t.entries().iter().enumerate().fold(0u64, |acc, (j, x)| acc | (u64::from(!x.is_zero()) << j));
            (mask, *m)
        })
        .collect();
    let total: u64 = masks.iter().map(|(_, m)| m).sum();
    let (num, den) = (inst.alpha.numer().clone(), inst.alpha.denom().clone());
    let mut collected = 0;
    let mut forcing = true;
    for r in 0..1u64 << n {
        let orth: u64 = masks.iter().filter(|(q, _)| (q & r).count_ones() % 2 == 0).map(|(_, m)| m).sum();
        if num_bigint::BigInt::from(orth) * &den >= num_bigint::BigInt::from(total) * &num {
            collected += 1;
            forcing &= span.contains(&r);
        }
    }
    (forcing, collected)
}

pub fn forcing(seed: u64) -> Check {
    let fs = field(2);
    let dims = vec![2usize, 2, 2];
    let mut failures = Vec::new();
    let one_hot: Vec<(Tensor, u64)> = (0..8)
        .map(|j| {
            let codes: Vec<u32> = (0..8).map(|b| u32::from(b == j)).collect();
            (Tensor::from_codes(&fs, dims.clone(), &codes).unwrap(), 1)
        })
        .collect();
    let zero_spaces = trl_core::rank::nonempty_subsets(2)
        .into_iter()
        .map(|m: ModeSet| {
            let n = m.iter().map(|&i| dims[i]).product();
            (m, Subspace::zero(&fs, n))
        })
        .collect();
    let inst = ForcingInstance {
        fs: fs.clone(),
        dims: dims.clone(),
        q: one_hot,
        alpha: BigRational::from_integer(1.into()),
        spaces: zero_spaces,
    };
    match forcing_check(&inst) {
        Ok(v) if v.forcing && v.k == 0 && v.collected == 1 => {}
        other => failures.push(format!("one-hot multiset: {other:?}")),
    }
    let base = stream(seed, "forcing");
    for i in 0..20u64 {
        let mut rng = base.split_index("instance", i);
        let members = rng.range_inclusive(1, 6);
        let q: Vec<(Tensor, u64)> = (0..members)
            .map(|_| (random_tensor(&fs, &dims, &mut rng).unwrap(), rng.range_inclusive(1, 3)))
            .collect();
        let spaces = random_spaces(&fs, &dims, rng.below(2) as usize, &mut rng).unwrap();
        let alpha = BigRational::new((rng.range_inclusive(1, 4) as i64).into(), 4.into());
        let inst = ForcingInstance {
            fs: fs.clone(),
            dims: dims.clone(),
            q,
            alpha,
            spaces,
        };
        let oracle = forcing_oracle(&inst);
        match forcing_check(&inst) {
            Ok(v) if (v.forcing, v.collected) == oracle => {}
            other => failures.push(format!("instance {i}: oracle {oracle:?}, got {other:?}")),
        }
    }
    check(
        "forcing decisions match brute force",
        failures,
        "one-hot multiset with zero subspaces, 20 random multisets".into(),
    )
}

pub fn towers() -> Check {
    let mut failures = Vec::new();
    for x in [0i64, 1, 7, 1000] {
        if tower(16, int(0), int(x)).eval() != Ok(BigRational::from_integer(x.into())) {
            failures.push(format!("tower(0, {x}) != {x}"));
        }
    }
    for (d, q) in [(2i64, 2u64), (3, 2), (3, 3), (4, 5)] {
        let h = pow(int(d + 3), int(d + 3));
        let b = 8 * q;
        for r in [1i64, 2, 5] {
            let high = tower(b, trl_core::rank::tower::add(h.clone(), int(1)), int(r));
            let low = tower(b, h.clone(), pow(int(b as i64), int(r)));
            if high.lower_tower().as_ref() != Some(&low) || compare_towers(&high, &low) != Some(std::cmp::Ordering::Equal) {
                failures.push(format!("height shift fails for d={d} q={q} r={r}"));
            }
        }
    }
    match tower_bound("1.11", 3, &BigRational::from_integer(1.into()), 2) {
        Ok(b) if b.numeric.is_none() && b.refusal == Some(Refusal::TooLarge) && b.expression == "2^2·tower_16(6^6+1, 1)" => {}
        other => failures.push(format!("main bound: {other:?}")),
    }
    let edge: Expr = pow(int(2), int(4095));
    if edge.eval().is_err() || pow(int(2), int(4096)).eval() != Err(Refusal::TooLarge) {
        failures.push("4096-bit cap misplaced".into());
    }
    check(
        "tower identities and numeric refusal",
        failures,
        "base case, height shift, symbolic refusal past 4096 bits".into(),
    )
}

/// Small ensembles of every kind render identically on 1 and 4 workers and on repeat.
pub fn determinism(seed: u64) -> Check {
    let kinds = [
        EnsembleArgs {
            kind: EnsembleKind::RandomTensor,
            count: 6,
            q: 2,
            dims: vec![2, 2, 2],
            degree: 2,
            nvars: 2,
            k: 1,
            budget: 100_000,
            delta: "1/4".into(),
            keep: "1/2".into(),
        },
        EnsembleArgs {
            kind: EnsembleKind::RandomPoly,
            q: 3,
            ..default_args()
        },
        EnsembleArgs {
            kind: EnsembleKind::Degenerate,
            ..default_args()
        },
        EnsembleArgs {
            kind: EnsembleKind::ProductMultiset,
            dims: vec![3, 3],
            ..default_args()
        },
    ];
    let render = |args: &EnsembleArgs, threads: usize| -> String {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
        pool.install(|| match ensemble::run(args, seed) {
            Ok(o) => {
                let r = report::build("ensemble", &["trl".into()], &[], &o, None);
                report::render(&r, &o, Format::Json)
            }
            Err(e) => format!("error: {e}"),
        })
    };
    let mut failures = Vec::new();
    for args in &kinds {
        let first = render(args, 1);
        if render(args, 4) != first || render(args, 1) != first {
            failures.push(format!("{} differs between runs", ensemble::kind_label(args.kind)));
        }
    }
    check(
        "ensembles are reproducible across worker counts",
        failures,
        "4 ensemble kinds on 1 and 4 workers".into(),
    )
}

fn default_args() -> EnsembleArgs {
    EnsembleArgs {
        kind: EnsembleKind::RandomTensor,
        count: 6,
        q: 2,
        dims: vec![2, 2, 2],
        degree: 2,
        nvars: 2,
        k: 1,
        budget: 100_000,
        delta: "1/4".into(),
        keep: "1/2".into(),
    }
}

pub fn all(seed: u64) -> Vec<Check> {
    vec![
        matrices(seed),
        small_tensors(),
        gowers_identity(seed),
        taylor(seed),
        degenerate(seed),
        bogolyubov_sets(seed),
        systems(seed),
        forcing(seed),
        towers(),
        determinism(seed),
    ]
}

pub fn run(seed: u64) -> Result<Outcome> {
    let checks = all(seed);
    let mut table = Table::new(&["criterion", "check", "status", "detail"]);
    for (i, c) in checks.iter().enumerate() {
        let status = if c.pass { "pass" } else { "FAIL" };
        table.rows.push(vec![json!(i + 1), json!(c.name), json!(status), json!(c.detail)]);
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    let mut o = Outcome::new(
        format!("{} of {} checks passed", checks.len() - failed, checks.len()),
        json!({ "passed": checks.len() - failed, "failed": failed }),
    );
    o.table = Some(table);
    o.seed = Some(seed);
    if failed > 0 {
        o.exit = 4;
    }
    Ok(o)
}
