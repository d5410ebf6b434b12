//! Desk-scale enumeration guards.
//!
//! Every exhaustive routine declares how many items it is about to visit and
//! refuses to start when that count exceeds its limit. The environment
//! variable `TRL_GUARD_OVERRIDE` (a plain integer) raises every limit to at
//! least that value.

use std::sync::OnceLock;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};

pub const ENV_OVERRIDE: &str = "TRL_GUARD_OVERRIDE";

/// 2^24, the default cap for exhaustive enumerations.
pub const ENUMERATION_LIMIT: u128 = 1 << 24;
/// 2^20, the storage cap for dense tensors and sets.
pub const STORAGE_LIMIT: u128 = 1 << 20;
/// 2^16, the cap on materialized l-system prefixes.
pub const PREFIX_LIMIT: u128 = 1 << 16;
/// 2^14, the ambient dimension cap for the subspace-sum linear solve.
pub const SOLVE_LIMIT: u128 = 1 << 14;

fn override_value() -> Option<u128> {
    static CELL: OnceLock<Option<u128>> = OnceLock::new();
    *CELL.get_or_init(|| {
        std::env::var(ENV_OVERRIDE)
            .ok()
            .and_then(|s| s.trim().parse::<u128>().ok())
    })
}

/// Effective limit: the default, raised by the override when one is set.
pub fn limit(default: u128) -> u128 {
    match override_value() {
        Some(v) => v.max(default),
        None => default,
    }
}

pub fn check(what: &'static str, needed: u128, default: u128) -> Result<()> {
    let limit = limit(default);
    if needed > limit {
        return Err(Error::GuardExceeded {
            what,
            needed: needed.to_string(),
            limit,
        });
    }
    Ok(())
}

/// `base^exp` guarded without overflow.
pub fn check_pow(what: &'static str, base: u64, exp: u64, default: u128) -> Result<u128> {
    let limit = limit(default);
    let refuse = || Error::GuardExceeded {
        what,
        needed: format!("{base}^{exp}"),
        limit,
    };
    if base <= 1 {
        return Ok(if exp == 0 { 1 } else { base as u128 });
    }
    // Anything past 128 bits is over every representable limit.
    if exp > 128 {
        return Err(refuse());
    }
    let big = BigUint::from(base).pow(exp as u32);
    match big.to_u128() {
        Some(v) if v <= limit => Ok(v),
        _ => Err(refuse()),
    }
}
