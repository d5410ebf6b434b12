use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::points::PointSpace;
use crate::tensor::Tensor;

use super::sumset::mode_spaces;
use super::{bogolyubov, inverse_square_ceil, LSystem, PointSet, ProductMultiset, SumsetCertificate};

#[derive(Clone, Debug)]
pub struct FindOptions {
    /// Smallest accepted density parameter.
    pub min_delta: BigRational,
    pub max_order: usize,
}

impl Default for FindOptions {
    fn default() -> Self {
        FindOptions {
            min_delta: BigRational::new(1.into(), 8.into()),
            max_order: 3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FoundSystem {
    pub system: LSystem,
    /// Certificate for every element tuple, with indices into the input multiset.
    pub certificates: BTreeMap<Vec<u32>, SumsetCertificate>,
    /// `ceil(16^d / delta^2)`, before clamping to the largest mode dimension.
    pub codim_bound: u64,
    /// `4^d`.
    pub term_bound: usize,
    pub max_plus: usize,
    pub max_minus: usize,
}

/// Signed combination of factor tuples of the current suffix modes.
#[derive(Clone, Debug, Default)]
struct TupleCert {
    plus: Vec<Vec<u32>>,
    minus: Vec<Vec<u32>>,
}

struct Partial {
    system: LSystem,
    certs: BTreeMap<Vec<u32>, TupleCert>,
}

fn prepend(t: u32, tuples: &[Vec<u32>]) -> impl Iterator<Item = Vec<u32>> + '_ {
    tuples.iter().map(move |s| {
        let mut v = Vec::with_capacity(s.len() + 1);
        v.push(t);
        v.extend_from_slice(s);
        v
    })
}

fn level_bound(d: usize, delta: &BigRational, dims: &[usize]) -> (u64, u64) {
    let raw = inverse_square_ceil(&(delta / BigRational::from(BigInt::from(4u32).pow(d as u32))));
    let clamp = *dims.iter().max().expect("nonempty dims") as u64;
    (raw, raw.min(clamp))
}

fn find(fs: &FieldSpec, dims: &[usize], spaces: &[PointSpace], support: &BTreeSet<Vec<u32>>, delta: &BigRational) -> Result<Partial> {
    let (_, bound) = level_bound(dims.len(), delta, dims);
    if dims.len() == 1 {
        let a = PointSet::new(fs, dims[0], support.iter().map(|t| t[0]))?;
        let b = bogolyubov(&a, delta)?;
        let mut nodes = BTreeMap::new();
        nodes.insert(Vec::new(), b.space.clone());
        let certs = b
            .witnesses
            .iter()
            .map(|w| {
                let cert = if a.contains(w.u) {
                    TupleCert {
                        plus: vec![vec![w.u]],
                        minus: Vec::new(),
                    }
                } else {
                    TupleCert {
                        plus: w.plus.iter().map(|&x| vec![x]).collect(),
                        minus: w.minus.iter().map(|&x| vec![x]).collect(),
                    }
                };
                (vec![w.u], cert)
            })
            .collect();
        return Ok(Partial {
            system: LSystem::from_nodes(fs, dims, bound, nodes)?,
            certs,
        });
    }
    // fibers B'_u over the first mode
    let mut fibers: BTreeMap<u32, BTreeSet<Vec<u32>>> = BTreeMap::new();
    for t in support {
        fibers.entry(t[0]).or_default().insert(t[1..].to_vec());
    }
    let rest_size: u64 = spaces[1..].iter().map(|s| s.size()).product();
    let half = delta / BigRational::from(BigInt::from(2));
    let threshold = &half * BigRational::from(BigInt::from(rest_size));
    let t_set: Vec<u32> = fibers
        .iter()
        .filter(|(_, f)| BigRational::from(BigInt::from(f.len())) >= threshold)
        .map(|(&u, _)| u)
        .collect();
    let t = PointSet::new(fs, dims[0], t_set)?;
    let b = bogolyubov(&t, &half)?;
    let used: BTreeSet<u32> = b.witnesses.iter().flat_map(|w| w.plus.iter().chain(&w.minus).copied()).collect();
    let subs: BTreeMap<u32, Partial> = used
        .into_par_iter()
        .map(|u| Ok((u, find(fs, &dims[1..], &spaces[1..], &fibers[&u], &half)?)))
        .collect::<Result<_>>()?;
    let mut nodes = BTreeMap::new();
    nodes.insert(Vec::new(), b.space.clone());
    let mut certs = BTreeMap::new();
    for w in &b.witnesses {
        let [t1, t2] = w.plus;
        let [t3, t4] = w.minus;
        let q_u = subs[&t1]
            .system
            .intersect(&subs[&t2].system)?
            .intersect(&subs[&t3].system)?
            .intersect(&subs[&t4].system)?;
        for (prefix, s) in q_u.nodes() {
            let mut key = vec![w.u];
            key.extend_from_slice(prefix);
            nodes.insert(key, s.clone());
        }
        for s in q_u.elements()? {
            let mut full = vec![w.u];
            full.extend_from_slice(&s);
            let cert = if support.contains(&full) {
                TupleCert {
                    plus: vec![full.clone()],
                    minus: Vec::new(),
                }
            } else {
                // u ⊗ s = t1 ⊗ s + t2 ⊗ s - t3 ⊗ s - t4 ⊗ s
                let mut c = TupleCert::default();
                for (ti, sign) in [(t1, true), (t2, true), (t3, false), (t4, false)] {
                    let sub = subs[&ti]
                        .certs
                        .get(&s)
                        .ok_or_else(|| Error::VerificationFailed(format!("element {s:?} lacks a certificate")))?;
                    let (same, flip) = if sign { (&mut c.plus, &mut c.minus) } else { (&mut c.minus, &mut c.plus) };
                    same.extend(prepend(ti, &sub.plus));
                    flip.extend(prepend(ti, &sub.minus));
                }
                c
            };
            certs.insert(full, cert);
        }
    }
    Ok(Partial {
        system: LSystem::from_nodes(fs, dims, bound, nodes)?,
        certs,
    })
}

/// Builds a system whose every element `u_1 ⊗ ... ⊗ u_d` carries a certificate
/// in `4^d B' - 4^d B'`, following the induction on the order: keep the first
/// mode vectors `t` whose fibers have density at least `delta/2`, take the
/// Bogolyubov subspace `U` of that set, recurse on the fibers, and above each
/// `u = t_1 + t_2 - t_3 - t_4` in `U` intersect the four fiber systems.
/// Elements that are themselves in `B'` get the singleton certificate.
/// The density is measured on the distinct factor tuples of `bp`.
pub fn find_system(bp: &ProductMultiset, delta: &BigRational, opts: &FindOptions) -> Result<FoundSystem> {
    let fs = bp.field();
    let dims = bp.dims();
    let d = dims.len();
    if d > opts.max_order {
        return Err(Error::DimensionMismatch(format!("order {d} exceeds the supported {}", opts.max_order)));
    }
    if delta < &opts.min_delta || !delta.is_positive() || delta > &BigRational::one() {
        return Err(Error::DensityBelowThreshold(format!(
            "delta {delta} outside [{}, 1]",
            opts.min_delta
        )));
    }
    let spaces = mode_spaces(fs, dims)?;
    let tuples = bp.tuples()?;
    let mut index: HashMap<Vec<u32>, usize> = HashMap::new();
    for (i, t) in tuples.iter().enumerate() {
        index.entry(t.clone()).or_insert(i);
    }
    let support: BTreeSet<Vec<u32>> = index.keys().cloned().collect();
    let full = bp.full_size()?;
    if BigRational::from(BigInt::from(support.len())) < delta * BigRational::from(BigInt::from(full)) {
        return Err(Error::DensityBelowThreshold(format!(
            "{} distinct tuples out of {full} is below {delta}",
            support.len()
        )));
    }
    let partial = find(fs, dims, &spaces, &support, delta)?;
    let (codim_bound, _) = level_bound(d, delta, dims);
    let check = partial.system.validate()?;
    if !check.valid {
        return Err(Error::VerificationFailed(check.problems.join("; ")));
    }
    let term_bound = 4usize.pow(d as u32);
    let tensors = bp.tensors()?;
    let mut certificates = BTreeMap::new();
    let (mut max_plus, mut max_minus) = (0, 0);
    for el in partial.system.elements()? {
        let c = partial
            .certs
            .get(&el)
            .ok_or_else(|| Error::VerificationFailed(format!("element {el:?} lacks a certificate")))?;
        let lookup = |ts: &[Vec<u32>]| -> Result<Vec<usize>> {
            ts.iter()
                .map(|t| index.get(t).copied().ok_or_else(|| Error::VerificationFailed(format!("tuple {t:?} is not in B'"))))
                .collect()
        };
        let cert = SumsetCertificate {
            plus: lookup(&c.plus)?,
            minus: lookup(&c.minus)?,
        };
        if cert.plus.len() > term_bound || cert.minus.len() > term_bound {
            return Err(Error::VerificationFailed(format!("certificate for {el:?} exceeds {term_bound} terms")));
        }
        let factors: Vec<_> = el.iter().zip(&spaces).map(|(&c, sp)| sp.decode(c)).collect();
        let target = Tensor::product_of(fs, &factors)?;
        if !cert.verify(&target, &tensors)? {
            return Err(Error::VerificationFailed(format!("certificate for {el:?} does not sum to it")));
        }
        max_plus = max_plus.max(cert.plus.len());
        max_minus = max_minus.max(cert.minus.len());
        certificates.insert(el, cert);
    }
    Ok(FoundSystem {
        system: partial.system,
        certificates,
        codim_bound,
        term_bound,
        max_plus,
        max_minus,
    })
}
