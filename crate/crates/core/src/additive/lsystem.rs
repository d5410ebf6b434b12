use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldDescriptor, FieldElem, FieldSpec};
use crate::guard;
use crate::points::PointSpace;
use crate::rng::Stream;

use super::sumset::mode_spaces;
use super::{Subspace, SubspaceFile};

/// A prefix tree of subspaces: the root `U ⊆ F^{n_1}`, and for every chosen
/// `u_1 in U, ..., u_{k-1} in U_{u_1..u_{k-2}}` a subspace
/// `U_{u_1..u_{k-1}} ⊆ F^{n_k}`. Prefixes are stored as per-mode point codes,
/// and the map is materialized over every reachable prefix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LSystem {
    fs: FieldSpec,
    dims: Vec<usize>,
    bound: u64,
    nodes: BTreeMap<Vec<u32>, Subspace>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LSystemNodeFile {
    /// Prefix vectors `u_1 .. u_{k-1}`.
    pub prefix: Vec<Vec<u32>>,
    pub basis: Vec<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LSystemFile {
    pub field: FieldDescriptor,
    pub dims: Vec<usize>,
    pub bound: u64,
    pub nodes: Vec<LSystemNodeFile>,
}

/// Subspaces `L_I ⊆ F^I` keyed by 1-based mode lists, for restriction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintFile {
    pub field: FieldDescriptor,
    pub dims: Vec<usize>,
    pub spaces: Vec<ConstraintSpaceFile>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintSpaceFile {
    pub modes: Vec<usize>,
    pub space: SubspaceFile,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LSystemCheck {
    pub valid: bool,
    pub problems: Vec<String>,
    pub nodes: usize,
    pub max_codim: usize,
}

fn prefix_guard(fs: &FieldSpec, dims: &[usize]) -> Result<()> {
    let exp: usize = dims[..dims.len().saturating_sub(1)].iter().sum();
    guard::check_pow("l-system prefixes", fs.q() as u64, exp as u64, guard::PREFIX_LIMIT)?;
    Ok(())
}

fn point_codes(sp: &PointSpace, s: &Subspace) -> Result<Vec<u32>> {
    Ok(s.elements()?.iter().map(|v| sp.encode(v)).collect())
}

impl LSystem {
    /// Assembles a system without checking it; see [`LSystem::validate`].
    pub fn from_nodes(fs: &FieldSpec, dims: &[usize], bound: u64, nodes: BTreeMap<Vec<u32>, Subspace>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::OrderTooSmall(0));
        }
        prefix_guard(fs, dims)?;
        Ok(LSystem {
            fs: fs.clone(),
            dims: dims.to_vec(),
            bound,
            nodes,
        })
    }

    /// The 0-system of full spaces.
    pub fn full(fs: &FieldSpec, dims: &[usize]) -> Result<Self> {
        Self::build(fs, dims, 0, |depth, _| Ok(Subspace::full(fs, dims[depth])))
    }

    /// Builds a system depth-first, asking `make(depth, prefix)` for each node.
    pub fn build(
        fs: &FieldSpec,
        dims: &[usize],
        bound: u64,
        mut make: impl FnMut(usize, &[u32]) -> Result<Subspace>,
    ) -> Result<Self> {
        let mut sys = LSystem::from_nodes(fs, dims, bound, BTreeMap::new())?;
        let spaces = mode_spaces(fs, dims)?;
        let mut stack = vec![Vec::new()];
        while let Some(prefix) = stack.pop() {
            let depth = prefix.len();
            let s = make(depth, &prefix)?;
            if depth + 1 < dims.len() {
                for c in point_codes(&spaces[depth], &s)?.into_iter().rev() {
                    let mut child = prefix.clone();
                    child.push(c);
                    stack.push(child);
                }
            }
            sys.nodes.insert(prefix, s);
        }
        Ok(sys)
    }

    /// Every node a random subspace of codimension at most `l`, cut out by
    /// up to `l` random linear constraints.
    pub fn random(fs: &FieldSpec, dims: &[usize], l: u64, rng: &mut Stream) -> Result<Self> {
        Self::build(fs, dims, l, |depth, _| {
            let n = dims[depth];
            let c = rng.range_inclusive(0, l.min(n as u64)) as usize;
            let gens: Vec<_> = (0..c).map(|_| rng.vector(fs, n)).collect();
            Ok(Subspace::span(fs, n, &gens)?.orthogonal_complement())
        })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.fs
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn nodes(&self) -> &BTreeMap<Vec<u32>, Subspace> {
        &self.nodes
    }

    pub fn node(&self, prefix: &[u32]) -> Option<&Subspace> {
        self.nodes.get(prefix)
    }

    pub fn max_codim(&self) -> usize {
        self.nodes.values().map(|s| s.codim()).max().unwrap_or(0)
    }

    /// Checks the codimension bound at every node, that every reachable
    /// prefix has a node of the right ambient dimension, and that no node
    /// hangs off an unreachable prefix.
    pub fn validate(&self) -> Result<LSystemCheck> {
        prefix_guard(&self.fs, &self.dims)?;
        let spaces = mode_spaces(&self.fs, &self.dims)?;
        let mut problems = Vec::new();
        let mut reached = 0usize;
        let mut stack = vec![Vec::new()];
        while let Some(prefix) = stack.pop() {
            let depth = prefix.len();
            let Some(s) = self.nodes.get(&prefix) else {
                problems.push(format!("missing node at prefix {prefix:?}"));
                continue;
            };
            reached += 1;
            if s.field() != &self.fs || s.ambient() != self.dims[depth] {
                problems.push(format!("node {prefix:?} does not live in F^{}", self.dims[depth]));
                continue;
            }
            if s.codim() as u64 > self.bound {
                problems.push(format!("node {prefix:?} has codimension {} > {}", s.codim(), self.bound));
            }
            if depth + 1 < self.dims.len() {
                for c in point_codes(&spaces[depth], s)? {
                    let mut child = prefix.clone();
                    child.push(c);
                    stack.push(child);
                }
            }
        }
        if reached != self.nodes.len() {
            problems.push(format!("{} nodes at unreachable prefixes", self.nodes.len() - reached));
        }
        Ok(LSystemCheck {
            valid: problems.is_empty(),
            problems,
            nodes: self.nodes.len(),
            max_codim: self.max_codim(),
        })
    }

    /// Element tuples `(u_1, ..., u_d)` as per-mode point codes, depth-first.
    pub fn elements(&self) -> Result<Vec<Vec<u32>>> {
        let spaces = mode_spaces(&self.fs, &self.dims)?;
        let mut out = Vec::new();
        for (prefix, s) in &self.nodes {
            if prefix.len() + 1 != self.dims.len() {
                continue;
            }
            let count = s.size().unwrap_or(u64::MAX) as u128 + out.len() as u128;
            guard::check("l-system elements", count, guard::STORAGE_LIMIT)?;
            for c in point_codes(&spaces[prefix.len()], s)? {
                let mut t = prefix.clone();
                t.push(c);
                out.push(t);
            }
        }
        Ok(out)
    }

    /// Whether `(u_1, ..., u_d)` is an element.
    pub fn contains_tuple(&self, tuple: &[u32]) -> bool {
        if tuple.len() != self.dims.len() {
            return false;
        }
        let Ok(spaces) = mode_spaces(&self.fs, &self.dims) else {
            return false;
        };
        (0..tuple.len()).all(|k| match self.nodes.get(&tuple[..k]) {
            Some(s) => (tuple[k] as u64) < spaces[k].size() && s.contains(&spaces[k].decode(tuple[k])),
            None => false,
        })
    }

    fn compatible(&self, other: &LSystem) -> Result<()> {
        if self.fs != other.fs {
            return Err(Error::FieldMismatch);
        }
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!("dims {:?} vs {:?}", self.dims, other.dims)));
        }
        Ok(())
    }

    /// Node-wise intersection `V_p = U_p ∩ U'_p` over the prefixes of the
    /// result; an `(l + l')`-system whose elements lie in both inputs.
    pub fn intersect(&self, other: &LSystem) -> Result<LSystem> {
        self.compatible(other)?;
        Self::build(&self.fs, &self.dims, self.bound + other.bound, |_, prefix| {
            match (self.nodes.get(prefix), other.nodes.get(prefix)) {
                (Some(a), Some(b)) => a.intersect(b),
                _ => Err(Error::VerificationFailed(format!("no node at prefix {prefix:?}"))),
            }
        })
    }

    /// Restriction to `⋂_I (L_I ⊗ F^{I^c})`. At depth `j` the node becomes
    /// `{v in U_p : (⊗_{i in I, i < j} u_i) ⊗ v in L_I for all I with max I = j}`,
    /// so the codimension grows by at most `2^{d-1}` times the largest
    /// `codim L_I`. The declared bound is `k + 2^d l`. `constraints` maps
    /// sorted 0-based mode lists to subspaces of `F^{prod_{i in I} n_i}`;
    /// absent sets are unconstrained.
    pub fn restrict(&self, constraints: &BTreeMap<Vec<usize>, Subspace>) -> Result<LSystem> {
        let d = self.dims.len();
        let mut l = 0usize;
        // per last mode j: (earlier modes, L_I^perp basis)
        let mut by_last: Vec<Vec<(Vec<usize>, Vec<Vec<FieldElem>>)>> = vec![Vec::new(); d];
        for (modes, s) in constraints {
            if modes.is_empty() || modes.windows(2).any(|w| w[0] >= w[1]) || modes[modes.len() - 1] >= d {
                return Err(Error::InvalidSplit(format!("mode set {modes:?} is not a sorted subset of 0..{d}")));
            }
            let ambient: usize = modes.iter().map(|&i| self.dims[i]).product();
            if s.ambient() != ambient || s.field() != &self.fs {
                return Err(Error::DimensionMismatch(format!("L for modes {modes:?} must live in F^{ambient}")));
            }
            l = l.max(s.codim());
            let (&last, earlier) = modes.split_last().expect("nonempty");
            by_last[last].push((earlier.to_vec(), s.orthogonal_complement().basis().to_vec()));
        }
        let spaces = mode_spaces(&self.fs, &self.dims)?;
        let bound = self.bound + (1u64 << d) * l as u64;
        let fs = &self.fs;
        Self::build(fs, &self.dims, bound, |depth, prefix| {
            let u = self
                .nodes
                .get(prefix)
                .ok_or_else(|| Error::VerificationFailed(format!("no node at prefix {prefix:?}")))?;
            let n = self.dims[depth];
            let mut gens: Vec<Vec<FieldElem>> = u.orthogonal_complement().basis().to_vec();
            for (earlier, perp) in &by_last[depth] {
                // w = ⊗_{i in earlier} u_i, flattened with the last listed mode fastest
                let mut w = vec![FieldElem::ONE];
                for &i in earlier {
                    let ui = spaces[i].decode(prefix[i]);
                    w = w.iter().flat_map(|&a| ui.iter().map(move |&b| fs.mul(a, b))).collect();
                }
                for z in perp {
                    let c: Vec<FieldElem> = (0..n)
                        .map(|b| {
                            let mut acc = FieldElem::ZERO;
                            for (a, &wa) in w.iter().enumerate() {
                                acc = fs.add(acc, fs.mul(wa, z[a * n + b]));
                            }
                            acc
                        })
                        .collect();
                    gens.push(c);
                }
            }
            Ok(Subspace::span(fs, n, &gens)?.orthogonal_complement())
        })
    }

    pub fn to_file(&self) -> LSystemFile {
        let spaces = mode_spaces(&self.fs, &self.dims).expect("dims were accepted");
        LSystemFile {
            field: self.fs.descriptor(),
            dims: self.dims.clone(),
            bound: self.bound,
            nodes: self
                .nodes
                .iter()
                .map(|(prefix, s)| LSystemNodeFile {
                    prefix: prefix
                        .iter()
                        .enumerate()
                        .map(|(k, &c)| spaces[k].decode(c).iter().map(|x| x.code()).collect())
                        .collect(),
                    basis: s.to_file().basis,
                })
                .collect(),
        }
    }

    pub fn from_file(f: &LSystemFile) -> Result<Self> {
        let fs = FieldSpec::from_descriptor(&f.field)?;
        let spaces = mode_spaces(&fs, &f.dims)?;
        let mut nodes = BTreeMap::new();
        for node in &f.nodes {
            let depth = node.prefix.len();
            if depth >= f.dims.len() {
                return Err(Error::Parse(format!("prefix of length {depth} in a system of order {}", f.dims.len())));
            }
            let mut key = Vec::with_capacity(depth);
            for (k, v) in node.prefix.iter().enumerate() {
                if v.len() != f.dims[k] {
                    return Err(Error::Parse(format!("prefix vector {v:?} should have length {}", f.dims[k])));
                }
                let v = v.iter().map(|&c| fs.elem(c)).collect::<Result<Vec<_>>>()?;
                key.push(spaces[k].encode(&v));
            }
            let s = Subspace::from_file(
                &fs,
                &SubspaceFile {
                    ambient: f.dims[depth],
                    basis: node.basis.clone(),
                },
            )?;
            if nodes.insert(key, s).is_some() {
                return Err(Error::Parse("duplicate prefix".into()));
            }
        }
        LSystem::from_nodes(&fs, &f.dims, f.bound, nodes)
    }

    /// Canonical depth-first listing, one node per line.
    pub fn dump(&self) -> String {
        let file = self.to_file();
        let vec = |v: &Vec<u32>| format!("({})", v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","));
        let mut s = self.fs.header_line();
        s.push_str(&format!(
            "\ndims {}\nbound {}\n",
            self.dims.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" "),
            self.bound
        ));
        for node in &file.nodes {
            let prefix: String = node.prefix.iter().map(vec).collect();
            let basis: Vec<String> = node.basis.iter().map(vec).collect();
            s.push_str(&format!("node [{prefix}] basis [{}]\n", basis.join(" ")));
        }
        s
    }
}

/// Reads the restriction constraints of a [`ConstraintFile`].
pub fn constraints_from_file(f: &ConstraintFile) -> Result<(FieldSpec, BTreeMap<Vec<usize>, Subspace>)> {
    let fs = FieldSpec::from_descriptor(&f.field)?;
    let mut out = BTreeMap::new();
    for c in &f.spaces {
        let modes: Vec<usize> = c
            .modes
            .iter()
            .map(|&m| {
                m.checked_sub(1)
                    .ok_or_else(|| Error::InvalidSplit("modes are 1-based".into()))
            })
            .collect::<Result<_>>()?;
        out.insert(modes, Subspace::from_file(&fs, &c.space)?);
    }
    Ok((fs, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Tensor;

    fn f2() -> FieldSpec {
        FieldSpec::prime(2).unwrap()
    }

    /// All tuples of the ambient product, for brute-force element checks.
    fn all_tuples(dims: &[usize], q: u32) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new()];
        for &n in dims {
            let size = q.pow(n as u32);
            out = out
                .into_iter()
                .flat_map(|t: Vec<u32>| {
                    (0..size).map(move |c| {
                        let mut t = t.clone();
                        t.push(c);
                        t
                    })
                })
                .collect();
        }
        out
    }

    #[test]
    fn full_system_is_valid_zero_system() {
        let s = LSystem::full(&f2(), &[2, 3]).unwrap();
        let check = s.validate().unwrap();
        assert!(check.valid);
        assert_eq!(check.nodes, 5);
        assert_eq!(s.elements().unwrap().len(), 32);
    }

    #[test]
    fn codimension_violation_is_reported() {
        let fs = f2();
        let mut s = LSystem::full(&fs, &[3, 3]).unwrap();
        s.nodes.insert(vec![5], Subspace::zero(&fs, 3));
        let check = s.validate().unwrap();
        assert!(!check.valid);
        assert_eq!(check.problems.len(), 1);
        s.nodes.remove(&vec![5]);
        assert!(!s.validate().unwrap().valid);
    }

    #[test]
    fn random_systems_validate_and_roundtrip() {
        let fs = f2();
        let mut rng = Stream::new(2, "lsystem");
        for l in 0..3 {
            let s = LSystem::random(&fs, &[3, 2, 2], l, &mut rng).unwrap();
            assert!(s.validate().unwrap().valid);
            let json = serde_json::to_string(&s.to_file()).unwrap();
            let back: LSystemFile = serde_json::from_str(&json).unwrap();
            assert_eq!(LSystem::from_file(&back).unwrap(), s);
            for t in s.elements().unwrap() {
                assert!(s.contains_tuple(&t));
            }
        }
    }

    #[test]
    fn intersection_contains_exactly_common_elements_reachable() {
        let fs = f2();
        let mut rng = Stream::new(4, "intersect");
        for _ in 0..10 {
            let a = LSystem::random(&fs, &[3, 3], 1, &mut rng).unwrap();
            let b = LSystem::random(&fs, &[3, 3], 1, &mut rng).unwrap();
            let c = a.intersect(&b).unwrap();
            assert_eq!(c.bound(), 2);
            assert!(c.validate().unwrap().valid);
            let els = c.elements().unwrap();
            for t in &els {
                assert!(a.contains_tuple(t) && b.contains_tuple(t));
            }
            // with these node-wise definitions the intersection is the full common set
            let common = all_tuples(&[3, 3], 2).into_iter().filter(|t| a.contains_tuple(t) && b.contains_tuple(t)).count();
            assert_eq!(els.len(), common);
            assert_eq!(a.intersect(&a).unwrap().nodes, a.nodes);
            let full = LSystem::full(&fs, &[3, 3]).unwrap();
            assert_eq!(full.intersect(&b).unwrap().nodes, b.nodes);
        }
    }

    #[test]
    fn restriction_respects_constraints() {
        let fs = f2();
        let mut rng = Stream::new(6, "restrict");
        let dims = [3usize, 3];
        for _ in 0..10 {
            let q = LSystem::random(&fs, &dims, 1, &mut rng).unwrap();
            let mut cons = BTreeMap::new();
            cons.insert(vec![0, 1], Subspace::span(&fs, 9, &[rng.vector(&fs, 9)]).unwrap().orthogonal_complement());
            cons.insert(vec![1], Subspace::span(&fs, 3, &[rng.vector(&fs, 3)]).unwrap().orthogonal_complement());
            let r = q.restrict(&cons).unwrap();
            assert_eq!(r.bound(), 1 + 4);
            assert!(r.validate().unwrap().valid);
            let spaces = mode_spaces(&fs, &dims).unwrap();
            for t in r.elements().unwrap() {
                assert!(q.contains_tuple(&t));
                let u0 = spaces[0].decode(t[0]);
                let u1 = spaces[1].decode(t[1]);
                let prod = Tensor::product_of(&fs, &[u0, u1.clone()]).unwrap();
                assert!(cons[&vec![0, 1]].contains(prod.entries()));
                assert!(cons[&vec![1]].contains(&u1));
            }
            let unconstrained = q.restrict(&BTreeMap::new()).unwrap();
            assert_eq!(unconstrained, q);
        }
        // order one: the root is cut by the single constraint
        let q = LSystem::full(&fs, &[4]).unwrap();
        let mut cons = BTreeMap::new();
        let l = Subspace::span(&fs, 4, &[vec![FieldElem::ONE; 4]]).unwrap().orthogonal_complement();
        cons.insert(vec![0], l.clone());
        let r = q.restrict(&cons).unwrap();
        assert_eq!(r.node(&[]).unwrap(), &l);
        assert_eq!(r.bound(), 2);
    }

    #[test]
    fn dump_is_stable() {
        let fs = f2();
        let s = LSystem::full(&fs, &[1, 1]).unwrap();
        assert_eq!(
            s.dump(),
            "field 2 1\ndims 1 1\nbound 0\nnode [] basis [(1)]\nnode [(0)] basis [(1)]\nnode [(1)] basis [(1)]\n"
        );
    }
}
