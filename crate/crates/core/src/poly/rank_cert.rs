use std::collections::BTreeMap;

use crate::error::{Error, Result};

use super::Polynomial;

/// `P = f(Q_1, ..., Q_r)` with `f` tabulated on the realized value tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankCertificate {
    pub qs: Vec<Polynomial>,
    /// Value tuple codes `(Q_1(x), ..., Q_r(x))` to the code of `P(x)`.
    pub table: BTreeMap<Vec<u32>, u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RankCheck {
    Certified {
        certificate: RankCertificate,
        /// Whether every `deg Q_i <= deg P - 1`.
        degree_condition: bool,
    },
    /// Two points (as codes) where the `Q_i` agree but `P` differs.
    Conflict { x: u32, x_prime: u32 },
}

/// Checks that `P` is constant on every fiber of `x -> (Q_1(x), ..., Q_r(x))`.
pub fn rank_certificate_check(p: &Polynomial, qs: &[Polynomial]) -> Result<RankCheck> {
    for q in qs {
        if q.field() != p.field() {
            return Err(Error::FieldMismatch);
        }
        if q.nvars() != p.nvars() {
            return Err(Error::DimensionMismatch("Q_i and P have different variable counts".into()));
        }
    }
    let ptab = p.value_table()?;
    let qtabs: Vec<_> = qs.iter().map(|q| q.value_table()).collect::<Result<_>>()?;
    let mut table: BTreeMap<Vec<u32>, u32> = BTreeMap::new();
    let mut first: BTreeMap<Vec<u32>, u32> = BTreeMap::new();
    for (x, pv) in ptab.iter().enumerate() {
        let key: Vec<u32> = qtabs.iter().map(|t| t[x].code()).collect();
        match table.get(&key) {
            Some(&v) if v != pv.code() => {
                return Ok(RankCheck::Conflict {
                    x: first[&key],
                    x_prime: x as u32,
                })
            }
            Some(_) => {}
            None => {
                table.insert(key.clone(), pv.code());
                first.insert(key, x as u32);
            }
        }
    }
    let deg = p.degree();
    let degree_condition = qs.iter().all(|q| q.degree() < deg);
    Ok(RankCheck::Certified {
        certificate: RankCertificate {
            qs: qs.to_vec(),
            table,
        },
        degree_condition,
    })
}
