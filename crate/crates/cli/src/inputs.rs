use std::io::Read;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use trl_core::additive::{
    constraints_from_file, ConstraintFile, LSystem, LSystemFile, PointSet, ProductMultiset, ProductMultisetFile,
    Subspace, SubspaceFile,
};
use trl_core::field::{FieldDescriptor, FieldSpec};
use trl_core::poly::Polynomial;
use trl_core::rank::ModeSet;
use trl_core::tensor::parse_tensor;
use trl_core::Tensor;

/// Raw input text with its provenance record.
pub struct Loaded {
    pub text: String,
    pub record: Value,
}

pub fn load(path: &Path) -> Result<Loaded> {
    let mut bytes = Vec::new();
    if path.as_os_str() == "-" {
        std::io::stdin().read_to_end(&mut bytes).context("reading stdin")?;
    } else {
        bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    }
    let digest = Sha256::digest(&bytes);
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    let text = String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))?;
    Ok(Loaded {
        text,
        record: json!({ "path": path.display().to_string(), "sha256": hex }),
    })
}

/// `a/b`, an integer, or a terminating decimal, as an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().with_context(|| format!("bad numerator in {s:?}"))?;
        let d: BigInt = d.trim().parse().with_context(|| format!("bad denominator in {s:?}"))?;
        if d == BigInt::from(0) {
            bail!("zero denominator in {s:?}");
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if !frac.chars().all(|c| c.is_ascii_digit()) {
            bail!("bad decimal {s:?}");
        }
        let digits: BigInt = format!("{int}{frac}").parse().with_context(|| format!("bad decimal {s:?}"))?;
        return Ok(BigRational::new(digits, BigInt::from(10).pow(frac.len() as u32)));
    }
    Ok(BigRational::from_integer(s.parse().with_context(|| format!("bad number {s:?}"))?))
}

pub fn tensor(text: &str) -> Result<Tensor> {
    Ok(parse_tensor(text)?)
}

pub fn polynomial(text: &str) -> Result<Polynomial> {
    Ok(Polynomial::from_json(text)?)
}

pub fn point_set(text: &str) -> Result<PointSet> {
    Ok(PointSet::parse(text)?)
}

pub fn multiset(text: &str) -> Result<ProductMultiset> {
    let f: ProductMultisetFile = serde_json::from_str(text).context("parsing product multiset")?;
    Ok(ProductMultiset::from_file(&f)?)
}

pub fn lsystem(text: &str) -> Result<LSystem> {
    let f: LSystemFile = serde_json::from_str(text).context("parsing l-system")?;
    Ok(LSystem::from_file(&f)?)
}

pub fn constraints(text: &str) -> Result<(FieldSpec, Vec<usize>, std::collections::BTreeMap<ModeSet, Subspace>)> {
    let f: ConstraintFile = serde_json::from_str(text).context("parsing constraints")?;
    let (fs, map) = constraints_from_file(&f)?;
    Ok((fs, f.dims, map))
}

/// A forcing instance on disk. Modes are numbered from 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForcingFile {
    pub field: FieldDescriptor,
    pub dims: Vec<usize>,
    pub q: Vec<ForcingMember>,
    pub spaces: Vec<ForcingSpace>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForcingMember {
    pub entries: Vec<u32>,
    #[serde(default = "one")]
    pub multiplicity: u64,
}

fn one() -> u64 {
    1
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForcingSpace {
    pub modes: Vec<usize>,
    pub space: SubspaceFile,
}

pub struct ForcingData {
    pub fs: FieldSpec,
    pub dims: Vec<usize>,
    pub q: Vec<(Tensor, u64)>,
    pub spaces: std::collections::BTreeMap<ModeSet, Subspace>,
}

pub fn forcing(text: &str) -> Result<ForcingData> {
    let f: ForcingFile = serde_json::from_str(text).context("parsing forcing instance")?;
    let fs = FieldSpec::from_descriptor(&f.field)?;
    let q = f
        .q
        .iter()
        .map(|m| Ok((Tensor::from_codes(&fs, f.dims.clone(), &m.entries)?, m.multiplicity)))
        .collect::<Result<Vec<_>>>()?;
    let mut spaces = std::collections::BTreeMap::new();
    for s in &f.spaces {
        let modes: Vec<usize> = s
            .modes
            .iter()
            .map(|&m| m.checked_sub(1).ok_or_else(|| anyhow!("modes are numbered from 1")))
            .collect::<Result<_>>()?;
        spaces.insert(modes, Subspace::from_file(&fs, &s.space)?);
    }
    Ok(ForcingData {
        fs,
        dims: f.dims,
        q,
        spaces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals() {
        let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        assert_eq!(parse_rational("1/4").unwrap(), r(1, 4));
        assert_eq!(parse_rational("0.25").unwrap(), r(1, 4));
        assert_eq!(parse_rational("3").unwrap(), r(3, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }
}
