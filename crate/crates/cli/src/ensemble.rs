use std::collections::BTreeMap;

use anyhow::{bail, Result};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde_json::{json, Value};
use trl_core::additive::{find_system, FindOptions, ProductMultiset, Subspace};
use trl_core::field::FieldSpec;
use trl_core::poly::{derivative_tensor, gowers_norm, random_polynomial};
use trl_core::rank::tower::render_rational;
use trl_core::rank::{
    arank, bias_charsum_crosscheck, degenerate_decompose, degenerate_sample, nonempty_subsets, prank_bounds,
    prank_one_check, ModeSet, PrankStatus,
};
use trl_core::rng::Stream;
use trl_core::{Error, Tensor};

use crate::args::{EnsembleArgs, EnsembleKind};
use crate::inputs::parse_rational;
use crate::report::{Outcome, Table};

/// Tolerance for one step of the Gowers monotonicity chain.
pub const MONOTONE_TOLERANCE: f64 = 1e-9;

pub fn kind_label(kind: EnsembleKind) -> &'static str {
    match kind {
        EnsembleKind::RandomTensor => "random-tensor",
        EnsembleKind::RandomPoly => "random-poly",
        EnsembleKind::Degenerate => "degenerate",
        EnsembleKind::ProductMultiset => "product-multiset",
    }
}

/// Stream for instance `i` of an ensemble.
pub fn instance_stream(seed: u64, label: &str, i: usize) -> Stream {
    Stream::new(seed, "ensemble").split(label).split_index("instance", i as u64)
}

pub fn random_tensor(fs: &FieldSpec, dims: &[usize], rng: &mut Stream) -> Result<Tensor> {
    let n = dims.iter().product();
    Ok(Tensor::new(fs, dims.to_vec(), rng.vector(fs, n))?)
}

/// For each nonempty `I ⊆ [d-1]`, the span of `k` random vectors of `F^I`.
pub fn random_spaces(fs: &FieldSpec, dims: &[usize], k: usize, rng: &mut Stream) -> Result<BTreeMap<ModeSet, Subspace>> {
    let mut spaces = BTreeMap::new();
    for modes in nonempty_subsets(dims.len() - 1) {
        let n: usize = modes.iter().map(|&m| dims[m]).product();
        let gens: Vec<_> = (0..k).map(|_| rng.vector(fs, n)).collect();
        spaces.insert(modes, Subspace::span(fs, n, &gens)?);
    }
    Ok(spaces)
}

/// Everything measured on one random tensor.
pub struct TensorRow {
    pub bias: String,
    pub arank: f64,
    /// Smallest integer at least the analytic rank.
    pub arank_ceiling: usize,
    pub lower: usize,
    pub upper: usize,
    pub exact: bool,
}

pub fn tensor_row(t: &Tensor, budget: u64) -> Result<TensorRow> {
    let a = arank(t)?;
    let b = prank_bounds(t, budget)?;
    b.certificate.verify(t)?;
    Ok(TensorRow {
        bias: a.bias.reduced_string(),
        arank: a.value,
        arank_ceiling: b.lower,
        lower: b.lower.max(b.refuted_below),
        upper: b.upper,
        exact: b.status == PrankStatus::Exact,
    })
}

pub struct PolyRow {
    pub norms: Vec<f64>,
    pub monotone: bool,
    /// Derivative histogram equals `q^n` times the product-input histogram.
    pub identity: bool,
}

pub fn poly_row(p: &trl_core::poly::Polynomial, d: usize) -> Result<PolyRow> {
    let fs = p.field();
    let c = fs.elem(1)?;
    let gs = (1..=d).map(|k| gowers_norm(p, k, c)).collect::<trl_core::Result<Vec<_>>>()?;
    let norms: Vec<f64> = gs.iter().map(|g| g.value).collect();
    let monotone = norms.windows(2).all(|w| w[0] <= w[1] + MONOTONE_TOLERANCE);
    let t = derivative_tensor(p, d)?;
    let cross = bias_charsum_crosscheck(&t)?;
    let scale = BigUint::from(fs.q()).pow(p.nvars() as u32);
    let identity = gs[d - 1].histogram == cross.scaled(&scale);
    Ok(PolyRow {
        norms,
        monotone,
        identity,
    })
}

pub struct DegenerateRow {
    pub k: usize,
    pub summands: usize,
    pub bound: usize,
    pub ok: bool,
}

pub fn degenerate_row(fs: &FieldSpec, dims: &[usize], k: usize, rng: &mut Stream) -> Result<DegenerateRow> {
    let d = dims.len();
    let spaces = random_spaces(fs, dims, k, rng)?;
    let w = degenerate_sample(fs, dims, &spaces, rng)?;
    let cert = degenerate_decompose(&w)?;
    let bound = (1usize << (d - 1)) * w.k();
    let mut ok = cert.len() <= bound && cert.reconstitute(fs, dims)? == w.tensor;
    for s in &cert.summands {
        ok &= prank_one_check(&s.tensor()?)?.is_some();
    }
    Ok(DegenerateRow {
        k: w.k(),
        summands: cert.len(),
        bound,
        ok,
    })
}

fn fraction(s: &str) -> Result<(u64, u64)> {
    let r = parse_rational(s)?;
    let (n, d) = (r.numer().to_u64(), r.denom().to_u64());
    match (n, d) {
        (Some(n), Some(d)) if n <= d => Ok((n, d)),
        _ => bail!("{s} is not a probability"),
    }
}

pub fn run(args: &EnsembleArgs, seed: u64) -> Result<Outcome> {
    let fs = FieldSpec::of_order(args.q)?;
    let label = kind_label(args.kind);
    let ids: Vec<usize> = (0..args.count).collect();
    let (table, violations, params) = match args.kind {
        EnsembleKind::RandomTensor => {
            let rows = ids
                .par_iter()
                .map(|&i| {
                    let t = random_tensor(&fs, &args.dims, &mut instance_stream(seed, label, i))?;
                    tensor_row(&t, args.budget)
                })
                .collect::<Result<Vec<_>>>()?;
            let mut table = Table::new(&["instance", "bias", "arank", "prank_lower", "prank_upper", "status", "arank<=prank"]);
            let mut bad = 0;
            for (i, r) in rows.iter().enumerate() {
                // prank is an integer, so comparing with the ceiling is exact
                let holds = r.arank_ceiling <= r.upper;
                bad += usize::from(!holds);
                table.rows.push(vec![
                    json!(i),
                    json!(r.bias),
                    json!(r.arank),
                    json!(r.lower),
                    json!(r.upper),
                    json!(if r.exact { "exact" } else { "inconclusive" }),
                    json!(holds),
                ]);
            }
            (table, bad, json!({ "q": args.q, "dims": args.dims, "budget": args.budget }))
        }
        EnsembleKind::RandomPoly => {
            let d = args.degree as usize;
            if d == 0 {
                bail!("degree must be positive");
            }
            let rows = ids
                .par_iter()
                .map(|&i| {
                    let mut rng = instance_stream(seed, label, i);
                    let p = random_polynomial(&fs, args.nvars, args.degree, &mut rng)?;
                    poly_row(&p, d)
                })
                .collect::<Result<Vec<_>>>()?;
            let mut cols: Vec<String> = vec!["instance".into()];
            cols.extend((1..=d).map(|k| format!("U^{k}")));
            cols.extend(["monotone".into(), "top_identity".into()]);
            let mut table = Table {
                columns: cols,
                rows: Vec::new(),
            };
            let mut bad = 0;
            for (i, r) in rows.iter().enumerate() {
                bad += usize::from(!(r.monotone && r.identity));
                let mut row = vec![json!(i)];
                row.extend(r.norms.iter().map(|v| json!(v)));
                row.extend([json!(r.monotone), json!(r.identity)]);
                table.rows.push(row);
            }
            (table, bad, json!({ "q": args.q, "nvars": args.nvars, "degree": args.degree }))
        }
        EnsembleKind::Degenerate => {
            if args.dims.len() < 2 {
                return Err(Error::OrderTooSmall(args.dims.len()).into());
            }
            let rows = ids
                .par_iter()
                .map(|&i| degenerate_row(&fs, &args.dims, args.k, &mut instance_stream(seed, label, i)))
                .collect::<Result<Vec<_>>>()?;
            let mut table = Table::new(&["instance", "k", "summands", "bound", "verified"]);
            let mut bad = 0;
            for (i, r) in rows.iter().enumerate() {
                bad += usize::from(!r.ok);
                table
                    .rows
                    .push(vec![json!(i), json!(r.k), json!(r.summands), json!(r.bound), json!(r.ok)]);
            }
            (table, bad, json!({ "q": args.q, "dims": args.dims, "k": args.k }))
        }
        EnsembleKind::ProductMultiset => {
            let delta = parse_rational(&args.delta)?;
            let (num, den) = fraction(&args.keep)?;
            let opts = FindOptions::default();
            let rows = ids
                .par_iter()
                .map(|&i| {
                    let mut rng = instance_stream(seed, label, i);
                    let bp = ProductMultiset::random_subset(&fs, &args.dims, num, den, &mut rng)?;
                    let density = BigRational::new(bp.tuples()?.len().into(), bp.full_size()?.into());
                    match find_system(&bp, &delta, &opts) {
                        Ok(found) => {
                            let check = found.system.validate()?;
                            Ok(vec![
                                json!(render_rational(&density)),
                                json!("found"),
                                json!(found.system.bound()),
                                json!(check.nodes),
                                json!(found.certificates.len()),
                                json!(found.max_plus.max(found.max_minus)),
                                json!(check.valid && found.max_plus.max(found.max_minus) <= found.term_bound),
                            ])
                        }
                        Err(Error::DensityBelowThreshold(_)) => Ok(vec![
                            json!(render_rational(&density)),
                            json!("below delta"),
                            Value::Null,
                            Value::Null,
                            Value::Null,
                            Value::Null,
                            json!(true),
                        ]),
                        Err(e) => Err(e.into()),
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            let mut table = Table::new(&["instance", "density", "status", "bound", "nodes", "certified", "max_terms", "verified"]);
            let mut bad = 0;
            for (i, r) in rows.into_iter().enumerate() {
                bad += usize::from(r[6] != json!(true));
                let mut row = vec![json!(i)];
                row.extend(r);
                table.rows.push(row);
            }
            (
                table,
                bad,
                json!({ "q": args.q, "dims": args.dims, "delta": render_rational(&delta), "keep": args.keep }),
            )
        }
    };
    let mut o = Outcome::new(
        format!("{label}: {} instances, {} violations", args.count, violations),
        json!({ "kind": label, "count": args.count, "params": params, "violations": violations }),
    );
    o.table = Some(table);
    o.seed = Some(seed);
    if violations > 0 {
        o.exit = 4;
    }
    Ok(o)
}
