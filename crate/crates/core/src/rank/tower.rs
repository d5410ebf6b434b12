//! Symbolic tower-type bounds.
//!
//! `tower_b(0, x) = x` and `tower_b(h, x) = b^{tower_b(h-1, x)}`. Bound
//! expressions are kept as trees and printed with their parameters
//! substituted but not multiplied out, e.g. `2^2·tower_16(6^6+1, 1)`. A
//! numeric value is produced only when every intermediate integer fits in
//! [`NUMERIC_BITS`] bits.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

pub const NUMERIC_BITS: u64 = 4096;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Int(BigInt),
    Rat(BigRational),
    Add(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    /// `log_base(arg)`.
    Log(u64, Box<Expr>),
    Tower {
        base: u64,
        height: Box<Expr>,
        top: Box<Expr>,
    },
}

pub fn int(n: i64) -> Expr {
    Expr::Int(BigInt::from(n))
}

pub fn rat(r: BigRational) -> Expr {
    if r.is_integer() {
        Expr::Int(r.to_integer())
    } else {
        Expr::Rat(r)
    }
}

pub fn add(a: Expr, b: Expr) -> Expr {
    Expr::Add(Box::new(a), Box::new(b))
}

pub fn mul(a: Expr, b: Expr) -> Expr {
    Expr::Mul(Box::new(a), Box::new(b))
}

pub fn pow(a: Expr, b: Expr) -> Expr {
    Expr::Pow(Box::new(a), Box::new(b))
}

pub fn neg(a: Expr) -> Expr {
    Expr::Neg(Box::new(a))
}

pub fn log(base: u64, a: Expr) -> Expr {
    Expr::Log(base, Box::new(a))
}

pub fn tower(base: u64, height: Expr, top: Expr) -> Expr {
    Expr::Tower {
        base,
        height: Box::new(height),
        top: Box::new(top),
    }
}

/// Why a numeric value was not produced.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Refusal {
    TooLarge,
    NotRational,
}

type Eval = std::result::Result<BigRational, Refusal>;

fn bits_of(r: &BigRational) -> u64 {
    r.numer().bits().max(r.denom().bits())
}

fn checked(r: BigRational) -> Eval {
    if bits_of(&r) > NUMERIC_BITS {
        Err(Refusal::TooLarge)
    } else {
        Ok(r)
    }
}

/// `b^e` for rational `b` and integer `e`, refusing oversized results.
fn rat_pow(b: &BigRational, e: &BigRational) -> Eval {
    if !e.is_integer() {
        if b.is_one() {
            return Ok(BigRational::one());
        }
        return Err(Refusal::NotRational);
    }
    if b.is_zero() {
        return if e.is_positive() {
            Ok(BigRational::zero())
        } else if e.is_zero() {
            Ok(BigRational::one())
        } else {
            Err(Refusal::NotRational)
        };
    }
    let mag = b.abs();
    if mag.is_one() {
        let odd = (e.to_integer() % 2u32) != BigInt::zero();
        return Ok(if b.is_negative() && odd { -BigRational::one() } else { BigRational::one() });
    }
    let e_abs = e.to_integer().abs();
    let e_u = e_abs.to_u64().ok_or(Refusal::TooLarge)?;
    let per = bits_of(b) as u128;
    // |b|^e needs roughly e * log2|b| bits in numerator or denominator
    let lg = (mag.numer().bits().max(mag.denom().bits()) as f64 - 1.0).max(0.0);
    if (e_u as f64) * lg > NUMERIC_BITS as f64 + 1.0 || (e_u as u128).saturating_mul(per) > 8 * NUMERIC_BITS as u128 + 64 {
        return Err(Refusal::TooLarge);
    }
    let p = num_traits::pow(b.clone(), e_u as usize);
    let p = if e.is_negative() { p.recip() } else { p };
    checked(p)
}

impl Expr {
    /// Exact value, or the reason none is produced.
    pub fn eval(&self) -> Eval {
        match self {
            Expr::Int(n) => checked(BigRational::from_integer(n.clone())),
            Expr::Rat(r) => checked(r.clone()),
            Expr::Add(a, b) => checked(a.eval()? + b.eval()?),
            Expr::Mul(a, b) => checked(a.eval()? * b.eval()?),
            Expr::Neg(a) => Ok(-a.eval()?),
            Expr::Pow(a, b) => {
                let e = b.eval()?;
                let base = a.eval()?;
                rat_pow(&base, &e)
            }
            Expr::Log(base, a) => {
                let x = a.eval()?;
                exact_log(*base, &x).ok_or(Refusal::NotRational)
            }
            Expr::Tower { base, height, top } => {
                let h = height.eval()?;
                if !h.is_integer() || h.is_negative() {
                    return Err(Refusal::NotRational);
                }
                let mut value = top.eval()?;
                let mut steps = h.to_integer();
                let b = BigRational::from_integer(BigInt::from(*base));
                while steps.is_positive() {
                    value = rat_pow(&b, &value)?;
                    steps -= 1;
                }
                Ok(value)
            }
        }
    }

    /// Natural log of the value for positive values that are too large (or
    /// irrational) to evaluate exactly but whose logarithm is modest.
    fn ln(&self) -> Option<f64> {
        if let Ok(v) = self.eval() {
            if v.is_positive() {
                return Some(ln_rat(&v));
            }
            return None;
        }
        match self {
            Expr::Mul(a, b) => Some(a.ln()? + b.ln()?),
            Expr::Pow(a, b) => {
                let e = b.approx()?;
                Some(e * a.ln()?)
            }
            Expr::Tower { base, height, top } => {
                let h = height.eval().ok()?.to_integer().to_u64()?;
                if h == 0 {
                    return top.ln();
                }
                // ln tower(h, x) = tower(h-1, x) * ln b, needs tower(h-1, x) as a float
                let inner = tower(*base, rat(BigRational::from_integer((h - 1).into())), (**top).clone());
                Some(inner.approx()? * (*base as f64).ln())
            }
            _ => None,
        }
    }

    /// Floating approximation when the value is in `f64` range.
    pub fn approx(&self) -> Option<f64> {
        if let Ok(v) = self.eval() {
            return v.to_f64();
        }
        match self {
            Expr::Add(a, b) => Some(a.approx()? + b.approx()?),
            Expr::Mul(a, b) => Some(a.approx()? * b.approx()?),
            Expr::Neg(a) => Some(-a.approx()?),
            Expr::Log(base, a) => Some(a.ln()? / (*base as f64).ln()),
            _ => {
                let l = self.ln()?;
                let v = l.exp();
                v.is_finite().then_some(v)
            }
        }
    }

    /// Rewrites `tower_b(h+1, x)` into `tower_b(h, b^x)` at the root.
    pub fn lower_tower(&self) -> Option<Expr> {
        let Expr::Tower { base, height, top } = self else {
            return None;
        };
        let h = match height.as_ref() {
            Expr::Add(a, one) if **one == int(1) => (**a).clone(),
            other => {
                let v = other.eval().ok()?;
                if !v.is_integer() || !v.is_positive() {
                    return None;
                }
                rat(v - BigRational::one())
            }
        };
        Some(tower(*base, h, pow(int(*base as i64), (**top).clone())))
    }

    fn is_atom(&self) -> bool {
        match self {
            Expr::Int(n) => !n.is_negative(),
            Expr::Tower { .. } | Expr::Log(..) => true,
            _ => false,
        }
    }
}

fn ln_rat(r: &BigRational) -> f64 {
    ln_uint(&r.numer().magnitude().clone()) - ln_uint(&r.denom().magnitude().clone())
}

fn ln_uint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().unwrap_or(f64::INFINITY).ln() + shift as f64 * std::f64::consts::LN_2
}

/// `log_b(x)` when it is an integer.
fn exact_log(b: u64, x: &BigRational) -> Option<BigRational> {
    if !x.is_positive() || b < 2 {
        return None;
    }
    let (num, den, sign) = if x >= &BigRational::one() {
        (x.numer().clone(), x.denom().clone(), 1i64)
    } else {
        (x.denom().clone(), x.numer().clone(), -1i64)
    };
    if !den.is_one() {
        return None;
    }
    let mut rest = num;
    let mut k = 0i64;
    let b = BigInt::from(b);
    while !rest.is_one() {
        if !(&rest % &b).is_zero() {
            return None;
        }
        rest /= &b;
        k += 1;
    }
    Some(BigRational::from_integer((sign * k).into()))
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |e: &Expr| {
            if e.is_atom() {
                e.to_string()
            } else {
                format!("({e})")
            }
        };
        match self {
            Expr::Int(n) => write!(f, "{n}"),
            Expr::Rat(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Expr::Add(a, b) => write!(f, "{a}+{b}"),
            Expr::Mul(a, b) => {
                let side = |e: &Expr| match e {
                    Expr::Add(..) | Expr::Neg(..) | Expr::Rat(..) => format!("({e})"),
                    _ => e.to_string(),
                };
                write!(f, "{}·{}", side(a), side(b))
            }
            Expr::Pow(a, b) => {
                let exp = match b.as_ref() {
                    Expr::Pow(..) => b.to_string(),
                    other => wrap(other),
                };
                write!(f, "{}^{}", wrap(a), exp)
            }
            Expr::Neg(a) => write!(f, "-{}", wrap(a)),
            Expr::Log(base, a) => write!(f, "log_{base}({a})"),
            Expr::Tower { base, height, top } => write!(f, "tower_{base}({height}, {top})"),
        }
    }
}

/// Order of two tower expressions with the same base, decided by comparing
/// heights and then tops (towers are increasing in both). Heights that
/// differ by one are aligned with [`Expr::lower_tower`] first.
pub fn compare_towers(a: &Expr, b: &Expr) -> Option<Ordering> {
    let (Expr::Tower { base: ba, height: ha, .. }, Expr::Tower { base: bb, height: hb, .. }) = (a, b) else {
        return None;
    };
    if ba != bb {
        return None;
    }
    let (ha, hb) = (ha.eval().ok()?, hb.eval().ok()?);
    match ha.cmp(&hb) {
        Ordering::Greater => return compare_towers(&a.lower_tower()?, b),
        Ordering::Less => return compare_towers(a, &b.lower_tower()?),
        Ordering::Equal => {}
    }
    let (Expr::Tower { top: ta, .. }, Expr::Tower { top: tb, .. }) = (a, b) else {
        unreachable!()
    };
    if let (Ok(x), Ok(y)) = (ta.eval(), tb.eval()) {
        return Some(x.cmp(&y));
    }
    let (x, y) = (ta.ln()?, tb.ln()?);
    let gap = (x - y).abs();
    if gap <= 1e-9 * x.abs().max(y.abs()).max(1.0) {
        return None;
    }
    x.partial_cmp(&y)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TowerBound {
    pub id: String,
    pub expression: String,
    /// Exact decimal (or `a/b`) value when it fits under the size cap.
    pub numeric: Option<String>,
    pub refusal: Option<Refusal>,
    #[serde(skip)]
    pub expr: Expr,
}

pub const BOUND_IDS: [&str; 7] = ["1.4", "1.5", "1.6", "1.11", "lemma3.1-f1", "lemma3.1-f2", "lemma3.1-f3"];

/// Builds the bound `id` for order `d`, field order `q`, and the parameter
/// `param` (ε for 1.4, c for 1.5/1.6, r for 1.11, δ for f3; unused by f1/f2).
pub fn tower_bound(id: &str, d: u32, param: &BigRational, q: u32) -> Result<TowerBound> {
    let d_i = d as i64;
    let base = 8 * q as u64;
    let unit_interval = |name: &str| -> Result<()> {
        if !param.is_positive() || param > &BigRational::one() {
            return Err(Error::Parse(format!("{name} must lie in (0, 1], got {param}")));
        }
        Ok(())
    };
    let height = || pow(int(d_i + 3), int(d_i + 3));
    // 2^d·tower_{8q}((d+3)^{d+3}, (1/c)^{2^d})
    let rank_core = |c: &BigRational| {
        mul(
            pow(int(2), int(d_i)),
            tower(base, height(), pow(rat(c.recip()), pow(int(2), int(d_i)))),
        )
    };
    let expr = match id {
        "1.4" | "1.5" => {
            unit_interval(if id == "1.4" { "epsilon" } else { "c" })?;
            add(rank_core(param), int(1))
        }
        "1.6" => {
            unit_interval("c")?;
            pow(int(q as i64), neg(add(rank_core(param), int(1))))
        }
        "1.11" => {
            if param.is_negative() {
                return Err(Error::Parse(format!("r must be nonnegative, got {param}")));
            }
            mul(
                pow(int(2), int(d_i - 1)),
                tower(base, add(height(), int(1)), rat(param.clone())),
            )
        }
        "lemma3.1-f1" => pow(int(2), pow(int(3), int(d_i + 3))),
        "lemma3.1-f2" => pow(int(2), neg(pow(int(3), int(d_i + 3)))),
        "lemma3.1-f3" => {
            unit_interval("delta")?;
            tower(base, pow(int(d_i + 4), int(d_i + 4)), rat(param.recip()))
        }
        other => return Err(Error::UnknownTheorem(other.to_string())),
    };
    let (numeric, refusal) = match expr.eval() {
        Ok(v) => (Some(render_rational(&v)), None),
        Err(r) => (None, Some(r)),
    };
    Ok(TowerBound {
        id: id.to_string(),
        expression: expr.to_string(),
        numeric,
        refusal,
        expr,
    })
}

pub fn render_rational(v: &BigRational) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}
