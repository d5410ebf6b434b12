use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::{json, Value};
use trl_core::additive::{bogolyubov, find_system, FindOptions, LSystem, Subspace};
use trl_core::field::{CharSum, FieldElem, FieldSpec, ValueHistogram};
use trl_core::poly::{
    correlation_search, derivative_tensor, gowers_norm, poly_bias, rank_certificate_check, taylor_split, Polynomial,
    RankCheck,
};
use trl_core::points::PointSpace;
use trl_core::rank::tower::{render_rational, Expr};
use trl_core::rank::{
    arank, bias_charsum_crosscheck, bias_exact, forcing_check, prank_bounds, tower_bound, ForcingInstance, PrankStatus,
};
use trl_core::{Error, Tensor};

use crate::args::{Command, LsystemOp};
use crate::inputs::{self, parse_rational};
use crate::report::Outcome;
use crate::{ensemble, selftest};

/// Input records collected while a command runs.
#[derive(Default)]
pub struct RunContext {
    pub inputs: Vec<Value>,
    pub seed: u64,
}

impl RunContext {
    fn read(&mut self, path: &Path) -> Result<String> {
        let l = inputs::load(path)?;
        self.inputs.push(l.record);
        Ok(l.text)
    }
}

pub fn big(n: &BigUint) -> Value {
    match n.to_u64() {
        Some(v) => json!(v),
        None => json!(n.to_string()),
    }
}

pub fn histogram_json(h: &ValueHistogram) -> Value {
    json!({
        "counts": h.counts().iter().map(big).collect::<Vec<_>>(),
        "total": big(h.total()),
    })
}

pub fn charsum_json(c: &CharSum) -> Value {
    json!({
        "re": c.re,
        "im": c.im,
        "magnitude": c.magnitude(),
        "rational": c.rational.as_ref().map(render_rational),
    })
}

fn vectors(v: &[Vec<FieldElem>]) -> Vec<Vec<u32>> {
    v.iter().map(|x| x.iter().map(|e| e.code()).collect()).collect()
}

fn write_artifact(path: &Option<PathBuf>, value: &Value) -> Result<Option<String>> {
    let Some(p) = path else { return Ok(None) };
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    std::fs::write(p, s).with_context(|| format!("writing {}", p.display()))?;
    Ok(Some(p.display().to_string()))
}

fn char_elem(fs: &FieldSpec, code: u32) -> Result<FieldElem> {
    Ok(fs.elem(code)?)
}

fn tensor_json(t: &Tensor) -> Value {
    serde_json::to_value(t.to_file()).expect("tensor file serializes")
}

fn poly_json(p: &Polynomial) -> Value {
    serde_json::to_value(p.to_file()).expect("polynomial file serializes")
}

pub fn run(cmd: &Command, ctx: &mut RunContext) -> Result<Outcome> {
    match cmd {
        Command::BiasTensor { input, exact } => {
            let t = inputs::tensor(&ctx.read(&input.input)?)?;
            bias_tensor(&t, *exact)
        }
        Command::Arank { input } => {
            let t = inputs::tensor(&ctx.read(&input.input)?)?;
            arank_cmd(&t)
        }
        Command::Prank { input, budget, artifact } => {
            let t = inputs::tensor(&ctx.read(&input.input)?)?;
            prank_cmd(&t, *budget, artifact)
        }
        Command::BiasPoly { input, character } => {
            let p = inputs::polynomial(&ctx.read(&input.input)?)?;
            let r = poly_bias(&p, char_elem(p.field(), character.char_code)?)?;
            Ok(Outcome::new(
                format!("bias {}", fmt_charsum(&r.bias)),
                json!({
                    "degree": p.degree(),
                    "nvars": p.nvars(),
                    "character": character.char_code,
                    "histogram": histogram_json(&r.histogram),
                    "bias": charsum_json(&r.bias),
                }),
            ))
        }
        Command::Gowers { input, order, character } => {
            let p = inputs::polynomial(&ctx.read(&input.input)?)?;
            let g = gowers_norm(&p, *order, char_elem(p.field(), character.char_code)?)?;
            Ok(Outcome::new(
                format!("U^{} norm {}", order, g.value),
                json!({
                    "order": order,
                    "character": character.char_code,
                    "value": g.value,
                    "power": charsum_json(&g.power),
                    "histogram": histogram_json(&g.histogram),
                }),
            ))
        }
        Command::DeriveTensor { input, order, artifact } => {
            let p = inputs::polynomial(&ctx.read(&input.input)?)?;
            let t = derivative_tensor(&p, *order)?;
            let written = write_artifact(artifact, &tensor_json(&t))?;
            Ok(Outcome::new(
                format!("order {} derivative tensor, dims {:?}", order, t.dims()),
                json!({ "tensor": tensor_json(&t), "artifact": written }),
            ))
        }
        Command::Taylor { input, order, artifact } => {
            let p = inputs::polynomial(&ctx.read(&input.input)?)?;
            let s = taylor_split(&p, *order)?;
            s.verify_pointwise(&p)?;
            let body = json!({
                "tensor": tensor_json(&s.tensor),
                "remainder": poly_json(&s.remainder),
                "remainder_degree": s.remainder.degree(),
                "inv_factorial": s.inv_factorial.code(),
                "verified_points": p.field().q().pow(p.nvars() as u32),
            });
            let written = write_artifact(artifact, &json!({ "tensor": body["tensor"], "remainder": body["remainder"] }))?;
            let mut body = body;
            body["artifact"] = json!(written);
            Ok(Outcome::new(
                format!("P = (1/{}!) T(x,..,x) + W, deg W = {}", order, s.remainder.degree()),
                body,
            ))
        }
        Command::Correlate { input, max_degree, character } => {
            let p = inputs::polynomial(&ctx.read(&input.input)?)?;
            let c = correlation_search(&p, *max_degree, char_elem(p.field(), character.char_code)?)?;
            Ok(Outcome::new(
                format!("best correlation {} over {} candidates", c.value, c.candidates),
                json!({
                    "best": poly_json(&c.best),
                    "value": c.value,
                    "index": c.index,
                    "candidates": c.candidates,
                    "monomials": c.monomials,
                    "prime_field": c.prime_field,
                }),
            ))
        }
        Command::RankCheck { input, with } => {
            let p = inputs::polynomial(&ctx.read(&input.input)?)?;
            let qs = with
                .iter()
                .map(|w| inputs::polynomial(&ctx.read(w)?))
                .collect::<Result<Vec<_>>>()?;
            rank_check(&p, &qs)
        }
        Command::Bogolyubov { input, delta } => {
            let a = inputs::point_set(&ctx.read(&input.input)?)?;
            bogolyubov_cmd(&a, delta.as_deref())
        }
        Command::FindSystem {
            input,
            delta,
            min_delta,
            artifact,
        } => {
            let bp = inputs::multiset(&ctx.read(&input.input)?)?;
            let opts = FindOptions {
                min_delta: parse_rational(min_delta)?,
                ..FindOptions::default()
            };
            let found = find_system(&bp, &parse_rational(delta)?, &opts)?;
            let check = found.system.validate()?;
            let certs: Vec<Value> = found
                .certificates
                .iter()
                .map(|(k, c)| json!({ "tuple": k, "plus": c.plus, "minus": c.minus }))
                .collect();
            let system = serde_json::to_value(found.system.to_file())?;
            let written = write_artifact(artifact, &json!({ "system": system, "certificates": certs }))?;
            Ok(Outcome::new(
                format!(
                    "{}-system with {} nodes, {} certified elements",
                    found.system.bound(),
                    check.nodes,
                    certs.len()
                ),
                json!({
                    "system": system,
                    "valid": check.valid,
                    "certified": certs.len(),
                    "codim_bound": found.codim_bound,
                    "term_bound": found.term_bound,
                    "max_plus": found.max_plus,
                    "max_minus": found.max_minus,
                    "artifact": written,
                }),
            ))
        }
        Command::Lsystem { op } => lsystem_cmd(op, ctx),
        Command::ForcingCheck { input, alpha } => {
            let data = inputs::forcing(&ctx.read(&input.input)?)?;
            let inst = ForcingInstance {
                fs: data.fs,
                dims: data.dims,
                q: data.q,
                alpha: parse_rational(alpha)?,
                spaces: data.spaces,
            };
            let v = forcing_check(&inst)?;
            Ok(Outcome::new(
                format!(
                    "{}({}, {})-forcing",
                    if v.forcing { "" } else { "not " },
                    v.k,
                    render_rational(&inst.alpha)
                ),
                json!({
                    "forcing": v.forcing,
                    "k": v.k,
                    "alpha": render_rational(&inst.alpha),
                    "collected": v.collected,
                    "counterexample": v.counterexample.as_ref().map(|t| t.codes()),
                }),
            ))
        }
        Command::TowerBound { theorem, d, param, q } => {
            let b = tower_bound(theorem, *d, &parse_rational(param)?, *q)?;
            let lowered = lower_root(&b.expr).map(|e| e.to_string());
            Ok(Outcome::new(
                b.expression.clone(),
                json!({
                    "id": b.id,
                    "expression": b.expression,
                    "numeric": b.numeric,
                    "refusal": b.refusal,
                    "lowered": lowered,
                }),
            ))
        }
        Command::Ensemble(args) => ensemble::run(args, ctx.seed),
        Command::Selftest => selftest::run(ctx.seed),
    }
}

fn fmt_charsum(c: &CharSum) -> String {
    match &c.rational {
        Some(r) => render_rational(r),
        None => format!("{}{:+}i", c.re, c.im),
    }
}

/// Lowers the outermost tower, looking through a constant factor.
pub fn lower_root(e: &Expr) -> Option<Expr> {
    match e {
        Expr::Tower { .. } => e.lower_tower(),
        Expr::Mul(a, b) => Some(Expr::Mul(a.clone(), Box::new(lower_root(b)?))),
        _ => None,
    }
}

pub fn bias_tensor(t: &Tensor, exact: bool) -> Result<Outcome> {
    let b = bias_exact(t)?;
    let mut results = json!({
        "field": t.field().header_line(),
        "dims": t.dims(),
        "bias": b.reduced_string(),
        "numerator": big(&b.numerator),
        "denominator": big(&b.denominator),
        "value": b.to_f64(),
    });
    if exact {
        let fs = t.field();
        let h = bias_charsum_crosscheck(t)?;
        let mut checked = 0;
        for c in fs.nonzero_elements() {
            let s = h.char_sum(c, fs)?;
            if s.rational.as_ref() != Some(&b.value()) {
                return Err(Error::VerificationFailed(format!(
                    "character {} gives {} but the slice count gives {}",
                    c.code(),
                    fmt_charsum(&s),
                    b.reduced_string()
                ))
                .into());
            }
            checked += 1;
        }
        results["crosscheck"] = json!({ "characters": checked, "histogram": histogram_json(&h) });
    }
    Ok(Outcome::new(format!("bias {}", b.reduced_string()), results))
}

pub fn arank_cmd(t: &Tensor) -> Result<Outcome> {
    let a = arank(t)?;
    let value = if a.floor == a.ceil {
        a.floor.to_string()
    } else {
        format!("{:.6}", a.value)
    };
    Ok(Outcome::new(
        format!("bias {}, arank {}", a.bias.reduced_string(), value),
        json!({
            "bias": a.bias.reduced_string(),
            "arank": a.value,
            "floor": a.floor,
            "ceil": a.ceil,
            "integral": a.floor == a.ceil,
        }),
    ))
}

pub fn prank_cmd(t: &Tensor, budget: u64, artifact: &Option<PathBuf>) -> Result<Outcome> {
    let b = prank_bounds(t, budget)?;
    b.certificate.verify(t)?;
    let cert = serde_json::to_value(b.certificate.to_file(t))?;
    let written = write_artifact(artifact, &cert)?;
    // the search refutes every size below `refuted_below`, which may beat ceil(arank)
    let lower = b.lower.max(b.refuted_below);
    let status = match b.status {
        PrankStatus::Exact => "exact",
        PrankStatus::Inconclusive => "inconclusive",
    };
    let mut o = Outcome::new(
        format!("prank bounds ({},{}) {}", lower, b.upper, status),
        json!({
            "lower": lower,
            "arank_ceiling": b.lower,
            "upper": b.upper,
            "status": status,
            "refuted_below": b.refuted_below,
            "nodes": b.nodes,
            "budget": budget,
            "certificate": cert,
            "artifact": written,
        }),
    );
    if b.status == PrankStatus::Inconclusive {
        o.exit = 3;
    }
    Ok(o)
}

fn rank_check(p: &Polynomial, qs: &[Polynomial]) -> Result<Outcome> {
    let space = PointSpace::new(p.field(), p.nvars())?;
    match rank_certificate_check(p, qs)? {
        RankCheck::Certified {
            certificate,
            degree_condition,
        } => {
            let table: Vec<Value> = certificate
                .table
                .iter()
                .map(|(k, v)| json!({ "values": k, "p": v }))
                .collect();
            Ok(Outcome::new(
                format!(
                    "P is a function of {} polynomials{}",
                    qs.len(),
                    if degree_condition { " of lower degree" } else { "" }
                ),
                json!({ "functional": true, "degree_condition": degree_condition, "table": table }),
            ))
        }
        RankCheck::Conflict { x, x_prime } => Ok(Outcome::new(
            "P is not a function of the given polynomials",
            json!({
                "functional": false,
                "x": vectors(&[space.decode(x)]).remove(0),
                "x_prime": vectors(&[space.decode(x_prime)]).remove(0),
            }),
        )),
    }
}

fn bogolyubov_cmd(a: &trl_core::additive::PointSet, delta: Option<&str>) -> Result<Outcome> {
    let size = a.space().size();
    let delta = match delta {
        Some(s) => parse_rational(s)?,
        None => BigRational::new((a.len() as u64).into(), size.into()),
    };
    let b = bogolyubov(a, &delta)?;
    let space = a.space();
    let witnesses: Vec<Value> = b
        .witnesses
        .iter()
        .map(|w| {
            let dec = |c: u32| vectors(&[space.decode(c)]).remove(0);
            json!({
                "u": dec(w.u),
                "plus": [dec(w.plus[0]), dec(w.plus[1])],
                "minus": [dec(w.minus[0]), dec(w.minus[1])],
            })
        })
        .collect();
    Ok(Outcome::new(
        format!(
            "codim {} (bound {}), {} witnesses verified",
            b.space.codim(),
            b.codim_bound,
            witnesses.len()
        ),
        json!({
            "size": a.len(),
            "delta": render_rational(&delta),
            "rho_squared": render_rational(&b.rho_sq),
            "spectrum_size": b.spectrum_size,
            "codim": b.space.codim(),
            "codim_bound": b.codim_bound,
            "basis": vectors(b.space.basis()),
            "witnesses": witnesses,
        }),
    ))
}

fn system_outcome(verb: &str, s: &LSystem, artifact: &Option<PathBuf>) -> Result<Outcome> {
    let check = s.validate()?;
    let file = serde_json::to_value(s.to_file())?;
    let written = write_artifact(artifact, &file)?;
    if !check.valid {
        return Err(Error::VerificationFailed(format!("{verb} produced an invalid system: {:?}", check.problems)).into());
    }
    Ok(Outcome::new(
        format!("{verb}: {}-system with {} nodes", s.bound(), check.nodes),
        json!({
            "bound": s.bound(),
            "max_codim": check.max_codim,
            "nodes": check.nodes,
            "valid": check.valid,
            "system": file,
            "artifact": written,
        }),
    ))
}

fn lsystem_cmd(op: &LsystemOp, ctx: &mut RunContext) -> Result<Outcome> {
    match op {
        LsystemOp::Validate { input } => {
            let s = inputs::lsystem(&ctx.read(&input.input)?)?;
            let check = s.validate()?;
            let mut o = Outcome::new(
                if check.valid {
                    format!("valid {}-system", s.bound())
                } else {
                    format!("invalid: {}", check.problems.join("; "))
                },
                json!({
                    "valid": check.valid,
                    "problems": check.problems,
                    "nodes": check.nodes,
                    "max_codim": check.max_codim,
                    "bound": s.bound(),
                    "dims": s.dims(),
                }),
            );
            if !check.valid {
                o.exit = 2;
            }
            Ok(o)
        }
        LsystemOp::Intersect { inputs: paths, artifact } => {
            let [a, b] = paths.as_slice() else {
                bail!("intersect takes exactly two systems");
            };
            let a = inputs::lsystem(&ctx.read(a)?)?;
            let b = inputs::lsystem(&ctx.read(b)?)?;
            system_outcome("intersection", &a.intersect(&b)?, artifact)
        }
        LsystemOp::Restrict {
            input,
            constraints,
            artifact,
        } => {
            let s = inputs::lsystem(&ctx.read(&input.input)?)?;
            let (fs, dims, map) = inputs::constraints(&ctx.read(constraints)?)?;
            if &fs != s.field() {
                return Err(Error::FieldMismatch.into());
            }
            if dims != s.dims() {
                return Err(anyhow!("constraints are for dims {dims:?}, system has {:?}", s.dims()));
            }
            let map: BTreeMap<Vec<usize>, Subspace> = map;
            system_outcome("restriction", &s.restrict(&map)?, artifact)
        }
    }
}
