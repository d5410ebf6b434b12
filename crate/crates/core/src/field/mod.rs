//! Prime and prime-power finite fields of order at most 64.
//!
//! Elements are integer codes: the code of `c_0 + c_1 t + ... + c_{k-1} t^{k-1}`
//! is `c_0 + c_1 p + ... + c_{k-1} p^{k-1}`. All arithmetic goes through
//! lookup tables built once per field, so a [`FieldSpec`] is cheap to clone
//! and safe to share across threads.
//!
//! Additive characters are `chi_c(a) = omega^{Tr(c a)}` with `omega = e^{2 pi i / p}`
//! and `Tr` the absolute trace to `F_p`.

mod charsum;
mod histogram;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use charsum::RootSum;
pub use histogram::{CharSum, ValueHistogram};

/// Largest supported field order.
pub const MAX_ORDER: u32 = 64;

/// An element of a finite field, stored as its integer code.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElem(u8);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);

    #[inline]
    pub fn code(self) -> u32 {
        self.0 as u32
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Caller guarantees `code < q` for the field in use.
    #[inline]
    pub(crate) fn from_code_unchecked(code: u32) -> Self {
        debug_assert!(code < MAX_ORDER);
        FieldElem(code as u8)
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The field descriptor embedded in every file format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDescriptor {
    pub p: u32,
    pub deg: u32,
    /// Little-endian coefficients `c_0..c_k` of the monic modulus; `null` for prime fields.
    pub modulus: Option<Vec<u32>>,
}

struct Tables {
    p: u32,
    deg: u32,
    q: u32,
    modulus: Option<Vec<u32>>,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
    trace: Vec<u8>,
}

/// A finite field `F_{p^k}` with `p^k <= 64`.
#[derive(Clone)]
pub struct FieldSpec(Arc<Tables>);

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p
                && self.0.deg == other.0.deg
                && self.0.modulus == other.0.modulus)
    }
}

impl Eq for FieldSpec {}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.modulus {
            None => write!(f, "F_{}", self.0.p),
            Some(m) => write!(f, "F_{}^{}[{:?}]", self.0.p, self.0.deg, m),
        }
    }
}

/// Conway-style default moduli, little-endian coefficients.
fn default_modulus(p: u32, deg: u32) -> Option<Vec<u32>> {
    let m: &[u32] = match (p, deg) {
        (2, 2) => &[1, 1, 1],
        (2, 3) => &[1, 1, 0, 1],
        (2, 4) => &[1, 1, 0, 0, 1],
        (2, 5) => &[1, 0, 1, 0, 0, 1],
        (2, 6) => &[1, 1, 0, 1, 1, 0, 1],
        (3, 2) => &[2, 2, 1],
        (3, 3) => &[1, 2, 0, 1],
        (5, 2) => &[2, 4, 1],
        (7, 2) => &[3, 6, 1],
        _ => return None,
    };
    Some(m.to_vec())
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Remainder of `a` modulo the monic polynomial `m` over `F_p` (little-endian).
fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dm;
        if lead != 0 {
            for (i, &c) in m.iter().enumerate() {
                r[shift + i] = (r[shift + i] + p - (lead * c) % p) % p;
            }
        }
        r.pop();
    }
    r
}

/// Exhaustive irreducibility test: no monic factor of degree `1..=k/2`.
fn is_irreducible(m: &[u32], p: u32) -> bool {
    let k = m.len() - 1;
    for fdeg in 1..=k / 2 {
        let count = (p as u64).pow(fdeg as u32);
        for idx in 0..count {
            let mut f = Vec::with_capacity(fdeg + 1);
            let mut x = idx;
            for _ in 0..fdeg {
                f.push((x % p as u64) as u32);
                x /= p as u64;
            }
            f.push(1);
            if poly_rem(m, &f, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn digits(code: u32, p: u32, k: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(k as usize);
    let mut x = code;
    for _ in 0..k {
        out.push(x % p);
        x /= p;
    }
    out
}

fn undigits(d: &[u32], p: u32) -> u32 {
    d.iter().rev().fold(0, |acc, &c| acc * p + c)
}

impl FieldSpec {
    /// Builds `F_{p^deg}`. A missing modulus selects the shipped default.
    pub fn new(p: u32, deg: u32, modulus: Option<Vec<u32>>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidField(format!("{p} is not prime")));
        }
        if deg == 0 {
            return Err(Error::InvalidField("extension degree must be >= 1".into()));
        }
        let q = (p as u64)
            .checked_pow(deg)
            .filter(|&q| q <= MAX_ORDER as u64)
            .ok_or_else(|| Error::InvalidField(format!("order {p}^{deg} exceeds {MAX_ORDER}")))?
            as u32;
        let modulus = if deg == 1 {
            if let Some(m) = &modulus {
                if !(m.len() == 2 && m[1] == 1) {
                    return Err(Error::InvalidField(
                        "prime fields take no modulus (or the trivial monic linear one)".into(),
                    ));
                }
            }
            None
        } else {
            let m = match modulus {
                Some(m) => m,
                None => default_modulus(p, deg).ok_or_else(|| {
                    Error::InvalidField(format!("no default modulus for {p}^{deg}"))
                })?,
            };
            if m.len() != deg as usize + 1 || m[deg as usize] != 1 {
                return Err(Error::InvalidField(format!(
                    "modulus must be monic of degree {deg}"
                )));
            }
            if m.iter().any(|&c| c >= p) {
                return Err(Error::InvalidField("modulus coefficient >= p".into()));
            }
            if !is_irreducible(&m, p) {
                return Err(Error::InvalidField(format!("modulus {m:?} is reducible")));
            }
            Some(m)
        };
        Ok(FieldSpec(Arc::new(Self::build_tables(p, deg, q, modulus))))
    }

    pub fn prime(p: u32) -> Result<Self> {
        Self::new(p, 1, None)
    }

    /// Field of order `q` with the default modulus.
    pub fn of_order(q: u32) -> Result<Self> {
        for p in 2..=q {
            if is_prime(p) {
                let mut deg = 1;
                let mut pk = p;
                while pk < q {
                    pk *= p;
                    deg += 1;
                }
                if pk == q {
                    return Self::new(p, deg, None);
                }
                if q % p == 0 {
                    break;
                }
            }
        }
        Err(Error::InvalidField(format!("{q} is not a prime power")))
    }

    fn build_tables(p: u32, deg: u32, q: u32, modulus: Option<Vec<u32>>) -> Tables {
        let qs = q as usize;
        let mut add = vec![0u8; qs * qs];
        let mut mul = vec![0u8; qs * qs];
        let mut neg = vec![0u8; qs];
        let mut inv = vec![0u8; qs];
        for a in 0..q {
            let da = digits(a, p, deg);
            let dn: Vec<u32> = da.iter().map(|&c| (p - c) % p).collect();
            neg[a as usize] = undigits(&dn, p) as u8;
            for b in 0..q {
                let db = digits(b, p, deg);
                let ds: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                add[a as usize * qs + b as usize] = undigits(&ds, p) as u8;
                let mut prod = vec![0u32; (2 * deg - 1) as usize];
                for (i, x) in da.iter().enumerate() {
                    for (j, y) in db.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % p;
                    }
                }
                let red = match &modulus {
                    Some(m) => poly_rem(&prod, m, p),
                    None => prod,
                };
                mul[a as usize * qs + b as usize] = undigits(&red, p) as u8;
            }
        }
        for a in 1..qs {
            inv[a] = (1..qs).find(|&b| mul[a * qs + b] == 1).unwrap() as u8;
        }
        // Tr(x) = x + x^p + ... + x^{p^{k-1}}
        let mut trace = vec![0u8; qs];
        for a in 0..qs {
            let mut acc = 0u8;
            let mut x = a as u8;
            for _ in 0..deg {
                acc = add[acc as usize * qs + x as usize];
                let mut y = 1u8;
                for _ in 0..p {
                    y = mul[y as usize * qs + x as usize];
                }
                x = y;
            }
            debug_assert!((acc as u32) < p);
            trace[a] = acc;
        }
        Tables {
            p,
            deg,
            q,
            modulus,
            add,
            mul,
            neg,
            inv,
            trace,
        }
    }

    pub fn from_descriptor(d: &FieldDescriptor) -> Result<Self> {
        Self::new(d.p, d.deg, d.modulus.clone())
    }

    pub fn descriptor(&self) -> FieldDescriptor {
        FieldDescriptor {
            p: self.0.p,
            deg: self.0.deg,
            modulus: self.0.modulus.clone(),
        }
    }

    /// `field p k [m_0 .. m_k]`, the header line of the text file formats.
    pub fn header_line(&self) -> String {
        let mut s = format!("field {} {}", self.0.p, self.0.deg);
        if let Some(m) = &self.0.modulus {
            for c in m {
                s.push_str(&format!(" {c}"));
            }
        }
        s
    }

    /// Inverse of [`FieldSpec::header_line`], given the numbers after `field`.
    /// A missing modulus for `k > 1` selects the default one.
    pub fn from_header(vals: &[u32]) -> Result<Self> {
        if vals.len() < 2 {
            return Err(Error::Parse("field line needs p and k".into()));
        }
        let modulus = (vals.len() > 2).then(|| vals[2..].to_vec());
        if vals[1] > 1 && modulus.is_none() {
            return FieldSpec::new(vals[0], vals[1], None);
        }
        FieldSpec::from_descriptor(&FieldDescriptor {
            p: vals[0],
            deg: vals[1],
            modulus,
        })
    }

    /// Characteristic.
    #[inline]
    pub fn p(&self) -> u32 {
        self.0.p
    }

    #[inline]
    pub fn deg(&self) -> u32 {
        self.0.deg
    }

    /// Field order `q = p^deg`.
    #[inline]
    pub fn q(&self) -> u32 {
        self.0.q
    }

    pub fn modulus(&self) -> Option<&[u32]> {
        self.0.modulus.as_deref()
    }

    pub fn is_prime_field(&self) -> bool {
        self.0.deg == 1
    }

    /// Validates a raw code.
    pub fn elem(&self, code: u32) -> Result<FieldElem> {
        if code >= self.0.q {
            return Err(Error::CodeOutOfRange { code, q: self.0.q });
        }
        Ok(FieldElem(code as u8))
    }

    pub fn check(&self, a: FieldElem) -> Result<FieldElem> {
        self.elem(a.code())
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElem> + Clone {
        (0..self.0.q).map(|c| FieldElem(c as u8))
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = FieldElem> + Clone {
        (1..self.0.q).map(|c| FieldElem(c as u8))
    }

    /// Image of an integer under `Z -> F_p -> F`.
    pub fn from_int(&self, n: i64) -> FieldElem {
        FieldElem(n.rem_euclid(self.0.p as i64) as u8)
    }

    #[inline]
    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        FieldElem(self.0.add[a.0 as usize * self.0.q as usize + b.0 as usize])
    }

    #[inline]
    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn neg(&self, a: FieldElem) -> FieldElem {
        FieldElem(self.0.neg[a.0 as usize])
    }

    #[inline]
    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        FieldElem(self.0.mul[a.0 as usize * self.0.q as usize + b.0 as usize])
    }

    pub fn inv(&self, a: FieldElem) -> Result<FieldElem> {
        if a.is_zero() {
            return Err(Error::ZeroInverse);
        }
        Ok(FieldElem(self.0.inv[a.0 as usize]))
    }

    pub fn div(&self, a: FieldElem, b: FieldElem) -> Result<FieldElem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: FieldElem, mut e: u64) -> FieldElem {
        let mut base = a;
        let mut acc = FieldElem::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Absolute trace `Tr_{F_q/F_p}(a)` as an integer in `[0, p)`.
    #[inline]
    pub fn trace(&self, a: FieldElem) -> u32 {
        self.0.trace[a.0 as usize] as u32
    }

    /// Exponent `e` in `chi_c(a) = omega^e`, i.e. `Tr(c a)`.
    #[inline]
    pub fn char_exponent(&self, a: FieldElem, c: FieldElem) -> u32 {
        self.trace(self.mul(c, a))
    }

    pub fn dot(&self, a: &[FieldElem], b: &[FieldElem]) -> FieldElem {
        debug_assert_eq!(a.len(), b.len());
        a.iter()
            .zip(b)
            .fold(FieldElem::ZERO, |acc, (&x, &y)| self.add(acc, self.mul(x, y)))
    }
}
