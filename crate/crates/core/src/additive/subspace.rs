use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldElem, FieldSpec};
use crate::guard;
use crate::linalg::{EchelonBasis, Matrix};

/// A subspace of `F^N` held as its reduced row echelon basis, so two
/// subspaces are equal exactly when their bases are.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    fs: FieldSpec,
    ambient: usize,
    basis: Vec<Vec<FieldElem>>,
    pivots: Vec<usize>,
}

/// File form: `{"ambient": N, "basis": [[codes..]..]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubspaceFile {
    pub ambient: usize,
    pub basis: Vec<Vec<u32>>,
}

impl Subspace {
    pub fn zero(fs: &FieldSpec, ambient: usize) -> Self {
        Subspace {
            fs: fs.clone(),
            ambient,
            basis: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn full(fs: &FieldSpec, ambient: usize) -> Self {
        let basis = (0..ambient)
            .map(|i| {
                let mut v = vec![FieldElem::ZERO; ambient];
                v[i] = FieldElem::ONE;
                v
            })
            .collect();
        Subspace {
            fs: fs.clone(),
            ambient,
            basis,
            pivots: (0..ambient).collect(),
        }
    }

    pub fn span(fs: &FieldSpec, ambient: usize, gens: &[Vec<FieldElem>]) -> Result<Self> {
        let mut eb = EchelonBasis::new(fs, ambient);
        for (i, g) in gens.iter().enumerate() {
            if g.len() != ambient {
                return Err(Error::DimensionMismatch(format!(
                    "generator of length {} in F^{ambient}",
                    g.len()
                )));
            }
            for &x in g {
                fs.check(x)?;
            }
            eb.insert(i, g);
        }
        let (basis, pivots) = eb.into_rref();
        Ok(Subspace {
            fs: fs.clone(),
            ambient,
            basis,
            pivots,
        })
    }

    pub fn from_file(fs: &FieldSpec, f: &SubspaceFile) -> Result<Self> {
        let gens = f
            .basis
            .iter()
            .map(|v| v.iter().map(|&c| fs.elem(c)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::span(fs, f.ambient, &gens)
    }

    pub fn to_file(&self) -> SubspaceFile {
        SubspaceFile {
            ambient: self.ambient,
            basis: self
                .basis
                .iter()
                .map(|v| v.iter().map(|x| x.code()).collect())
                .collect(),
        }
    }

    pub fn field(&self) -> &FieldSpec {
        &self.fs
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn codim(&self) -> usize {
        self.ambient - self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<FieldElem>] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient
    }

    fn same_ambient(&self, other: &Subspace) -> Result<()> {
        if self.fs != other.fs {
            return Err(Error::FieldMismatch);
        }
        if self.ambient != other.ambient {
            return Err(Error::DimensionMismatch(format!(
                "ambient F^{} vs F^{}",
                self.ambient, other.ambient
            )));
        }
        Ok(())
    }

    /// Coordinates of `v` in the echelon basis when `v` is a member. Because
    /// the basis is reduced, the coordinate on basis row `j` is `v[pivot_j]`.
    pub fn coordinates(&self, v: &[FieldElem]) -> Option<Vec<FieldElem>> {
        if v.len() != self.ambient {
            return None;
        }
        let coords: Vec<FieldElem> = self.pivots.iter().map(|&p| v[p]).collect();
        (self.combine(&coords) == v).then_some(coords)
    }

    pub fn contains(&self, v: &[FieldElem]) -> bool {
        self.coordinates(v).is_some()
    }

    /// `sum_j c_j b_j`.
    pub fn combine(&self, coords: &[FieldElem]) -> Vec<FieldElem> {
        let fs = &self.fs;
        let mut out = vec![FieldElem::ZERO; self.ambient];
        for (c, b) in coords.iter().zip(&self.basis) {
            if c.is_zero() {
                continue;
            }
            for (o, &x) in out.iter_mut().zip(b) {
                *o = fs.add(*o, fs.mul(*c, x));
            }
        }
        out
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.ambient == other.ambient && self.basis.iter().all(|b| other.contains(b))
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.same_ambient(other)?;
        let mut gens = self.basis.clone();
        gens.extend(other.basis.iter().cloned());
        Subspace::span(&self.fs, self.ambient, &gens)
    }

    /// Complement with respect to the dot product `sum_i x_i y_i`.
    pub fn orthogonal_complement(&self) -> Subspace {
        if self.basis.is_empty() {
            return Subspace::full(&self.fs, self.ambient);
        }
        let m = Matrix::from_rows(&self.fs, self.ambient, &self.basis).expect("rows have ambient length");
        Subspace::span(&self.fs, self.ambient, &m.nullspace()).expect("kernel vectors have ambient length")
    }

    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.same_ambient(other)?;
        Ok(self
            .orthogonal_complement()
            .sum(&other.orthogonal_complement())?
            .orthogonal_complement())
    }

    /// Number of elements, `q^dim`, when it fits in a `u64`.
    pub fn size(&self) -> Option<u64> {
        (self.fs.q() as u64).checked_pow(self.dim() as u32)
    }

    /// All elements, ordered by their coordinate vectors read as base-q codes
    /// (coordinate 0 least significant).
    pub fn elements(&self) -> Result<Vec<Vec<FieldElem>>> {
        let count = guard::check_pow("subspace elements", self.fs.q() as u64, self.dim() as u64, guard::STORAGE_LIMIT)?;
        let q = self.fs.q();
        let mut out = Vec::with_capacity(count as usize);
        let mut coords = vec![FieldElem::ZERO; self.dim()];
        for code in 0..count as u64 {
            let mut c = code;
            for slot in coords.iter_mut() {
                *slot = FieldElem::from_code_unchecked((c % q as u64) as u32);
                c /= q as u64;
            }
            out.push(self.combine(&coords));
        }
        Ok(out)
    }
}
