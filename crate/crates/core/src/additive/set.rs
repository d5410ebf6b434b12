use crate::error::{Error, Result};
use crate::field::{FieldElem, FieldSpec};
use crate::guard;
use crate::points::PointSpace;
use crate::tensor::parse_num;

/// A subset of `F^n` stored as sorted point codes plus a membership mask.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    space: PointSpace,
    members: Vec<u32>,
    mask: Vec<bool>,
}

impl PointSet {
    pub fn new(fs: &FieldSpec, n: usize, codes: impl IntoIterator<Item = u32>) -> Result<Self> {
        guard::check_pow("point set ambient", fs.q() as u64, n as u64, guard::STORAGE_LIMIT)?;
        let space = PointSpace::new(fs, n)?;
        let mut mask = vec![false; space.size() as usize];
        for c in codes {
            let slot = mask
                .get_mut(c as usize)
                .ok_or_else(|| Error::DimensionMismatch(format!("point code {c} outside F^{n}")))?;
            *slot = true;
        }
        let members = (0..mask.len() as u32).filter(|&c| mask[c as usize]).collect();
        Ok(PointSet { space, members, mask })
    }

    pub fn from_vectors(fs: &FieldSpec, n: usize, vs: &[Vec<FieldElem>]) -> Result<Self> {
        let space = PointSpace::new(fs, n)?;
        let mut codes = Vec::with_capacity(vs.len());
        for v in vs {
            if v.len() != n {
                return Err(Error::DimensionMismatch(format!("vector of length {} in F^{n}", v.len())));
            }
            for &x in v {
                fs.check(x)?;
            }
            codes.push(space.encode(v));
        }
        PointSet::new(fs, n, codes)
    }

    pub fn space(&self) -> &PointSpace {
        &self.space
    }

    pub fn field(&self) -> &FieldSpec {
        self.space.field()
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn members(&self) -> &[u32] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, code: u32) -> bool {
        self.mask.get(code as usize).copied().unwrap_or(false)
    }

    /// `|A| / q^n`.
    pub fn density(&self) -> f64 {
        self.members.len() as f64 / self.mask.len() as f64
    }

    /// Text form: a field header, `dim n`, then one vector per line.
    pub fn to_text(&self) -> String {
        let mut s = self.field().header_line();
        s.push_str(&format!("\ndim {}\n", self.dim()));
        for &c in &self.members {
            let v: Vec<String> = self.space.decode(c).iter().map(|x| x.code().to_string()).collect();
            s.push_str(&v.join(" "));
            s.push('\n');
        }
        s
    }

    /// Reads [`PointSet::to_text`] output. The `dim` line may be omitted when
    /// the set is nonempty.
    pub fn parse(input: &str) -> Result<Self> {
        let mut fs = None;
        let mut dim = None;
        let mut rows: Vec<Vec<u32>> = Vec::new();
        for line in input.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut toks = line.split_whitespace();
            match toks.clone().next() {
                Some("field") => {
                    toks.next();
                    let vals = toks.map(parse_num::<u32>).collect::<Result<Vec<_>>>()?;
                    fs = Some(FieldSpec::from_header(&vals)?);
                }
                Some("dim") => {
                    toks.next();
                    let vals = toks.map(parse_num::<usize>).collect::<Result<Vec<_>>>()?;
                    if vals.len() != 1 {
                        return Err(Error::Parse("dim line takes one number".into()));
                    }
                    dim = Some(vals[0]);
                }
                _ => rows.push(toks.map(parse_num::<u32>).collect::<Result<_>>()?),
            }
        }
        let fs = fs.ok_or_else(|| Error::Parse("missing field line".into()))?;
        let n = match (dim, rows.first()) {
            (Some(n), _) => n,
            (None, Some(r)) => r.len(),
            (None, None) => return Err(Error::Parse("empty set needs a dim line".into())),
        };
        let vs = rows
            .iter()
            .map(|r| r.iter().map(|&c| fs.elem(c)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        PointSet::from_vectors(&fs, n, &vs)
    }
}
