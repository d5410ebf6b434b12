//! k-degenerate tensors: sums over nonempty `I ⊆ [d-1]` of elements of
//! `H_I ⊗ F^{I^c}` with `dim H_I <= k`, their expansion into at most
//! `2^{d-1} k` rank-one terms, and membership in sums `Σ_I V_I ⊗ F^{I^c}`.

use std::collections::BTreeMap;

use super::prank::{PrankCertificate, Summand};
use crate::additive::Subspace;
use crate::error::{Error, Result};
use crate::field::{FieldElem, FieldSpec};
use crate::guard;
use crate::linalg::EchelonBasis;
use crate::rng::Stream;
use crate::tensor::{IndexSplit, Tensor};

/// Mode subsets are sorted lists of 0-based modes.
pub type ModeSet = Vec<usize>;

/// The component of a degenerate tensor attached to one mode set `I`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegeneracyComponent {
    pub modes: ModeSet,
    /// `H_I`, a subspace of `F^I` (entries of the `I` modes flattened row-major).
    pub space: Subspace,
    pub tensor: Tensor,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegeneracyWitness {
    pub tensor: Tensor,
    pub components: Vec<DegeneracyComponent>,
}

impl DegeneracyWitness {
    /// `max_I dim H_I`.
    pub fn k(&self) -> usize {
        self.components.iter().map(|c| c.space.dim()).max().unwrap_or(0)
    }
}

fn mode_size(dims: &[usize], modes: &[usize]) -> usize {
    modes.iter().map(|&m| dims[m]).product()
}

fn complement(d: usize, modes: &[usize]) -> ModeSet {
    (0..d).filter(|m| !modes.contains(m)).collect()
}

/// Nonempty subsets of `0..upto`, ordered by `(|I|, lexicographic)`.
pub fn nonempty_subsets(upto: usize) -> Vec<ModeSet> {
    let mut out: Vec<ModeSet> = (1u32..(1 << upto))
        .map(|mask| (0..upto).filter(|&m| mask >> m & 1 == 1).collect())
        .collect();
    out.sort_by(|a: &ModeSet, b: &ModeSet| (a.len(), a).cmp(&(b.len(), b)));
    out
}

/// Places an array over the modes `modes` ⊗ an array over the rest.
fn place(d: usize, modes: &[usize], a: &Tensor, b: &Tensor) -> Result<Tensor> {
    if modes.len() == d {
        return Ok(a.scale(b.entries()[0]));
    }
    Tensor::rank_one(&IndexSplit::new(d, modes)?, a, b)
}

fn check_modes(d: usize, modes: &[usize], last_excluded: bool) -> Result<()> {
    let bound = if last_excluded { d - 1 } else { d };
    let sorted = modes.windows(2).all(|w| w[0] < w[1]);
    if modes.is_empty() || !sorted || modes.iter().any(|&m| m >= bound) {
        return Err(Error::InvalidSplit(format!(
            "mode set {modes:?} must be a nonempty sorted subset of 0..{bound}"
        )));
    }
    Ok(())
}

/// A uniformly random element of `Σ_I H_I ⊗ F^{I^c}` with its components.
pub fn degenerate_sample(
    fs: &FieldSpec,
    dims: &[usize],
    spaces: &BTreeMap<ModeSet, Subspace>,
    rng: &mut Stream,
) -> Result<DegeneracyWitness> {
    let d = dims.len();
    if d < 2 {
        return Err(Error::OrderTooSmall(d));
    }
    let mut total = Tensor::zeros(fs, dims)?;
    let mut components = Vec::new();
    for (modes, h) in spaces {
        check_modes(d, modes, true)?;
        let rows = mode_size(dims, modes);
        if h.ambient() != rows || h.field() != fs {
            return Err(Error::DimensionMismatch(format!(
                "H_{modes:?} lives in F^{} but the modes span {rows} coordinates",
                h.ambient()
            )));
        }
        let comp_modes = complement(d, modes);
        let d1: Vec<usize> = modes.iter().map(|&m| dims[m]).collect();
        let d2: Vec<usize> = comp_modes.iter().map(|&m| dims[m]).collect();
        let mut comp = Tensor::zeros(fs, dims)?;
        for b in h.basis() {
            let w = rng.vector(fs, mode_size(dims, &comp_modes));
            let term = place(d, modes, &Tensor::new(fs, d1.clone(), b.clone())?, &Tensor::new(fs, d2.clone(), w)?)?;
            comp = comp.add(&term)?;
        }
        total = total.add(&comp)?;
        components.push(DegeneracyComponent {
            modes: modes.clone(),
            space: h.clone(),
            tensor: comp,
        });
    }
    Ok(DegeneracyWitness {
        tensor: total,
        components,
    })
}

/// Expands each component over the echelon basis of its `H_I`: with pivots
/// `p_j`, the component matricized along `I` equals `Σ_j h_j ⊗ (row p_j)`.
pub fn degenerate_decompose(w: &DegeneracyWitness) -> Result<PrankCertificate> {
    let t = &w.tensor;
    let (fs, dims, d) = (t.field(), t.dims(), t.order());
    let mut sum = Tensor::zeros(fs, dims)?;
    let mut summands = Vec::new();
    for c in &w.components {
        check_modes(d, &c.modes, true)
            .map_err(|e| Error::InconsistentWitness(e.to_string()))?;
        if c.tensor.dims() != dims || c.space.ambient() != mode_size(dims, &c.modes) {
            return Err(Error::InconsistentWitness(format!(
                "component for {:?} has the wrong shape",
                c.modes
            )));
        }
        let split = IndexSplit::new(d, &c.modes)?;
        let m = c.tensor.matricize(&split)?;
        let (d1, d2) = t.split_dims(&split);
        let mut rebuilt = Tensor::zeros(fs, dims)?;
        for (h, &p) in c.space.basis().iter().zip(c.space.pivots()) {
            let row = m.row(p);
            if row.iter().all(|x| x.is_zero()) {
                continue;
            }
            let s = Summand {
                split: split.clone(),
                t1: Tensor::new(fs, d1.clone(), h.clone())?,
                t2: Tensor::new(fs, d2.clone(), row.to_vec())?,
            };
            rebuilt = rebuilt.add(&s.tensor()?)?;
            summands.push(s);
        }
        if rebuilt != c.tensor {
            return Err(Error::InconsistentWitness(format!(
                "component for modes {:?} is not in H_I ⊗ F^(I^c)",
                c.modes
            )));
        }
        sum = sum.add(&c.tensor)?;
    }
    if sum != *t {
        return Err(Error::InconsistentWitness(
            "components do not add up to the tensor".into(),
        ));
    }
    Ok(PrankCertificate { summands })
}

/// The linear span of `{b ⊗ e : b in basis(V_I), e a unit array on I^c}` over
/// all `I`, with enough bookkeeping to split members into per-`I` parts.
pub struct SubspaceSum {
    fs: FieldSpec,
    dims: Vec<usize>,
    basis: EchelonBasis,
    /// For each accepted generator: its mode set and the generator tensor.
    generators: Vec<(ModeSet, Tensor)>,
}

/// Result of a membership query; `components` sums to the queried tensor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Membership {
    pub member: bool,
    pub components: Option<Vec<(ModeSet, Tensor)>>,
}

impl SubspaceSum {
    /// `spaces` maps nonempty `I ⊆ 0..d` to `V_I ⊆ F^I`; missing sets mean `{0}`.
    pub fn new(fs: &FieldSpec, dims: &[usize], spaces: &BTreeMap<ModeSet, Subspace>) -> Result<Self> {
        let d = dims.len();
        let n: usize = dims.iter().product();
        guard::check("subspace-sum ambient dimension", n as u128, guard::SOLVE_LIMIT)?;
        let mut basis = EchelonBasis::tracking(fs, n);
        let mut generators = Vec::new();
        let mut all = Vec::new();
        for (modes, v) in spaces {
            check_modes(d, modes, false)?;
            if v.ambient() != mode_size(dims, modes) || v.field() != fs {
                return Err(Error::DimensionMismatch(format!(
                    "V_{modes:?} lives in F^{} but the modes span {} coordinates",
                    v.ambient(),
                    mode_size(dims, modes)
                )));
            }
            let comp_modes = complement(d, modes);
            let d1: Vec<usize> = modes.iter().map(|&m| dims[m]).collect();
            let d2: Vec<usize> = if comp_modes.is_empty() {
                vec![1]
            } else {
                comp_modes.iter().map(|&m| dims[m]).collect()
            };
            let cols = mode_size(dims, &comp_modes);
            for b in v.basis() {
                let a = Tensor::new(fs, d1.clone(), b.clone())?;
                for j in 0..cols {
                    let mut e = vec![FieldElem::ZERO; cols];
                    e[j] = FieldElem::ONE;
                    let g = place(d, modes, &a, &Tensor::new(fs, d2.clone(), e)?)?;
                    if basis.insert(all.len(), g.entries()) {
                        generators.push((modes.clone(), g.clone()));
                    }
                    all.push(());
                }
            }
        }
        Ok(SubspaceSum {
            fs: fs.clone(),
            dims: dims.to_vec(),
            basis,
            generators,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.rank()
    }

    pub fn contains(&self, t: &Tensor) -> bool {
        self.basis.contains(t.entries())
    }

    pub fn contains_entries(&self, entries: &[FieldElem]) -> bool {
        self.basis.contains(entries)
    }

    pub fn decompose(&self, t: &Tensor) -> Result<Membership> {
        if t.dims() != self.dims || t.field() != &self.fs {
            return Err(Error::DimensionMismatch("tensor shape differs from the ambient space".into()));
        }
        let (res, coeff) = self.basis.reduce(t.entries());
        if res.iter().any(|x| !x.is_zero()) {
            return Ok(Membership {
                member: false,
                components: None,
            });
        }
        let mut parts: BTreeMap<ModeSet, Tensor> = BTreeMap::new();
        for (c, (modes, g)) in coeff.iter().zip(&self.generators) {
            if c.is_zero() {
                continue;
            }
            let entry = parts
                .entry(modes.clone())
                .or_insert(Tensor::zeros(&self.fs, &self.dims)?);
            *entry = entry.add(&g.scale(*c))?;
        }
        let mut check = Tensor::zeros(&self.fs, &self.dims)?;
        for p in parts.values() {
            check = check.add(p)?;
        }
        if check != *t {
            return Err(Error::VerificationFailed("membership combination does not reproduce the tensor".into()));
        }
        Ok(Membership {
            member: true,
            components: Some(parts.into_iter().collect()),
        })
    }
}

/// Decides `t ∈ Σ_I V_I ⊗ F^{I^c}` by exact elimination, with a per-`I` witness.
pub fn membership_subspace_sum(t: &Tensor, spaces: &BTreeMap<ModeSet, Subspace>) -> Result<Membership> {
    SubspaceSum::new(t.field(), t.dims(), spaces)?.decompose(t)
}
