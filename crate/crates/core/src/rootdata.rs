//! Split root data, finite Weyl groups, Levi subsystems and lattice surgery.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice;

pub type Vector = Vec<i64>;
pub type Matrix = Vec<Vec<i64>>;

/// Default cap on the order of an enumerated Weyl group.
pub const WEYL_BOUND: usize = 1_000_000;

const ROOT_BOUND: usize = 10_000;

pub fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn add(a: &[i64], b: &[i64]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[i64], b: &[i64]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn neg(a: &[i64]) -> Vector {
    a.iter().map(|x| -x).collect()
}

pub fn scale(k: i64, a: &[i64]) -> Vector {
    a.iter().map(|x| k * x).collect()
}

pub fn reduce_mod(a: &[i64], m: u64) -> Vector {
    a.iter().map(|x| x.rem_euclid(m as i64)).collect()
}

fn mat_vec(m: &Matrix, v: &[i64]) -> Vector {
    m.iter().map(|row| dot(row, v)).collect()
}

fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..n)
                .map(|j| row.iter().zip(b).map(|(x, r)| x * r[j]).sum())
                .collect()
        })
        .collect()
}

fn transpose(m: &Matrix) -> Matrix {
    let n = m.first().map_or(0, Vec::len);
    (0..n).map(|j| m.iter().map(|r| r[j]).collect()).collect()
}

fn identity_matrix(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect()
}

/// An element of the finite Weyl group, stored by its matrix on `X`.
///
/// Ordering is lexicographic on the matrix entries.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeylElement {
    mat: Matrix,
    inv: Matrix,
}

impl WeylElement {
    pub fn identity(n: usize) -> Self {
        let m = identity_matrix(n);
        WeylElement {
            mat: m.clone(),
            inv: m,
        }
    }

    /// `x -> x - <x, coroot> root`.
    pub fn reflection(root: &[i64], coroot: &[i64]) -> Self {
        let n = root.len();
        let mat: Matrix = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| i64::from(i == j) - root[i] * coroot[j])
                    .collect()
            })
            .collect();
        WeylElement {
            inv: mat.clone(),
            mat,
        }
    }

    pub fn from_matrix(mat: Matrix) -> Result<Self> {
        let inv = lattice::unimodular_inverse(&mat)
            .ok_or_else(|| Error::InvalidDatum("matrix is not invertible over Z".into()))?;
        Ok(WeylElement { mat, inv })
    }

    pub fn rank(&self) -> usize {
        self.mat.len()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.mat
    }

    /// Action on characters `X`.
    pub fn act(&self, x: &[i64]) -> Vector {
        mat_vec(&self.mat, x)
    }

    /// Contragredient action on cocharacters.
    pub fn act_dual(&self, y: &[i64]) -> Vector {
        // (M^{-1})^T y
        (0..y.len())
            .map(|i| (0..y.len()).map(|k| self.inv[k][i] * y[k]).sum())
            .collect()
    }

    /// Action on a character vector modulo `m`.
    pub fn act_mod(&self, c: &[i64], m: u64) -> Vector {
        reduce_mod(&self.act(c), m)
    }

    /// Contragredient action modulo `m` (residue-torus points).
    pub fn act_dual_mod(&self, u: &[i64], m: u64) -> Vector {
        reduce_mod(&self.act_dual(u), m)
    }

    /// Composition `self * other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Self {
        WeylElement {
            mat: mat_mul(&self.mat, &other.mat),
            inv: mat_mul(&other.inv, &self.inv),
        }
    }

    pub fn inverse(&self) -> Self {
        WeylElement {
            mat: self.inv.clone(),
            inv: self.mat.clone(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.mat == identity_matrix(self.mat.len())
    }
}

impl fmt::Debug for WeylElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W{:?}", self.mat)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<String>,
}

/// A split root datum `(X, Phi, X^, Phi^)` with `X = X^ = Z^n` and the
/// standard pairing, together with a choice of simple roots.
#[derive(Clone)]
pub struct RootDatum {
    name: Option<String>,
    rank: usize,
    roots: Vec<Vector>,
    coroots: Vec<Vector>,
    simple: Vec<usize>,
    positive: Vec<bool>,
    index: HashMap<Vector, usize>,
    weyl: Arc<OnceLock<Result<Arc<Vec<WeylElement>>>>>,
}

impl PartialEq for RootDatum {
    fn eq(&self, other: &Self) -> bool {
        self.rank == other.rank
            && self.roots == other.roots
            && self.coroots == other.coroots
            && self.simple == other.simple
    }
}
impl Eq for RootDatum {}

impl fmt::Debug for RootDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RootDatum")
            .field("name", &self.name)
            .field("rank", &self.rank)
            .field("roots", &self.roots)
            .field("coroots", &self.coroots)
            .field("simple", &self.simple)
            .finish()
    }
}

pub const PRESETS: &[&str] = &["SL2", "PGL2", "GL2", "SL3", "GL3", "C2", "G2"];

impl RootDatum {
    /// Datum from an explicit root list. Positivity is read off from the
    /// coordinates of each root in the simple roots; problems are left for
    /// [`RootDatum::validate`] to report.
    pub fn new(
        rank: usize,
        roots: Vec<Vector>,
        coroots: Vec<Vector>,
        simple: Vec<usize>,
    ) -> Result<Self> {
        if roots.len() != coroots.len() {
            return Err(Error::InvalidDatum(format!(
                "{} roots but {} coroots",
                roots.len(),
                coroots.len()
            )));
        }
        for v in roots.iter().chain(&coroots) {
            if v.len() != rank {
                return Err(Error::DimensionMismatch {
                    expected: rank,
                    got: v.len(),
                });
            }
        }
        let mut index = HashMap::new();
        for (i, r) in roots.iter().enumerate() {
            if index.insert(r.clone(), i).is_some() {
                return Err(Error::InvalidDatum(format!("repeated root {r:?}")));
            }
        }
        let mut seen = BTreeSet::new();
        for &s in &simple {
            if s >= roots.len() || !seen.insert(s) {
                return Err(Error::InvalidDatum(format!("bad simple root index {s}")));
            }
        }
        let simple_vecs: Vec<Vector> = simple.iter().map(|&i| roots[i].clone()).collect();
        let positive = roots
            .iter()
            .map(|r| {
                lattice::rational_coordinates(&simple_vecs, r).is_some_and(|c| {
                    c.iter().all(|x| !x.is_negative()) && c.iter().any(|x| !x.is_zero())
                })
            })
            .collect();
        Ok(RootDatum {
            name: None,
            rank,
            roots,
            coroots,
            simple,
            positive,
            index,
            weyl: Arc::default(),
        })
    }

    /// Datum generated by simple roots and coroots under the simple
    /// reflections. Roots are ordered: simple roots first, other positive
    /// roots by height, then the negatives in the same order.
    pub fn from_simple(
        rank: usize,
        simple_roots: Vec<Vector>,
        simple_coroots: Vec<Vector>,
    ) -> Result<Self> {
        if simple_roots.len() != simple_coroots.len() {
            return Err(Error::InvalidDatum(
                "simple roots and coroots differ in number".into(),
            ));
        }
        for v in simple_roots.iter().chain(&simple_coroots) {
            if v.len() != rank {
                return Err(Error::DimensionMismatch {
                    expected: rank,
                    got: v.len(),
                });
            }
        }
        let r = simple_roots.len();
        let mut pairs: Vec<(Vector, Vector)> = Vec::new();
        let mut seen: HashSet<Vector> = HashSet::new();
        let mut queue: VecDeque<(Vector, Vector)> = VecDeque::new();
        for i in 0..r {
            for (a, c) in [
                (simple_roots[i].clone(), simple_coroots[i].clone()),
                (neg(&simple_roots[i]), neg(&simple_coroots[i])),
            ] {
                if seen.insert(a.clone()) {
                    queue.push_back((a, c));
                }
            }
        }
        while let Some((a, c)) = queue.pop_front() {
            for i in 0..r {
                let (ai, ci) = (&simple_roots[i], &simple_coroots[i]);
                let na = sub(&a, &scale(dot(&a, ci), ai));
                let nc = sub(&c, &scale(dot(ai, &c), ci));
                if seen.insert(na.clone()) {
                    queue.push_back((na, nc));
                }
            }
            pairs.push((a, c));
            if pairs.len() > ROOT_BOUND {
                return Err(Error::InvalidDatum(
                    "root closure does not terminate".into(),
                ));
            }
        }
        // order: simple, positive by height, negatives
        let height = |a: &Vector| -> Option<(i64, bool)> {
            let c = lattice::rational_coordinates(&simple_roots, a)?;
            let h: num_rational::BigRational = c.iter().sum();
            let pos = c.iter().all(|x| !x.is_negative());
            Some((h.abs().to_integer().to_i64()?, pos))
        };
        let mut positives = Vec::new();
        let mut others = Vec::new();
        for (a, c) in pairs {
            match height(&a) {
                Some((h, true)) => positives.push((h, a, c)),
                _ => others.push((a, c)),
            }
        }
        positives.sort();
        let mut roots: Vec<Vector> = simple_roots.clone();
        let mut coroots: Vec<Vector> = simple_coroots.clone();
        for (_, a, c) in &positives {
            if !simple_roots.contains(a) {
                roots.push(a.clone());
                coroots.push(c.clone());
            }
        }
        let npos = roots.len();
        for i in 0..npos {
            roots.push(neg(&roots[i]));
            coroots.push(neg(&coroots[i]));
        }
        // roots that were neither positive nor negated positives survive to validation
        for (a, c) in others {
            if !roots.contains(&a) {
                roots.push(a);
                coroots.push(c);
            }
        }
        Self::new(rank, roots, coroots, (0..r).collect())
    }

    pub fn preset(name: &str) -> Result<Self> {
        let key = name.to_ascii_uppercase();
        let rd = match key.as_str() {
            "SL2" => Self::from_simple(1, vec![vec![2]], vec![vec![1]]),
            "PGL2" => Self::from_simple(1, vec![vec![1]], vec![vec![2]]),
            "GL2" => Self::from_simple(2, vec![vec![1, -1]], vec![vec![1, -1]]),
            "SL3" => Self::from_simple(
                2,
                vec![vec![2, -1], vec![-1, 2]],
                vec![vec![1, 0], vec![0, 1]],
            ),
            "GL3" => Self::from_simple(
                3,
                vec![vec![1, -1, 0], vec![0, 1, -1]],
                vec![vec![1, -1, 0], vec![0, 1, -1]],
            ),
            "C2" | "SP4" => Self::from_simple(
                2,
                vec![vec![1, -1], vec![0, 2]],
                vec![vec![1, -1], vec![0, 1]],
            ),
            "G2" => Self::from_simple(
                2,
                vec![vec![1, 0], vec![0, 1]],
                vec![vec![2, -3], vec![-1, 2]],
            ),
            _ => return Err(Error::InvalidDatum(format!("unknown preset {name:?}"))),
        }?;
        let canonical = if key == "SP4" { "C2".to_string() } else { key };
        Ok(rd.with_name(canonical))
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn num_roots(&self) -> usize {
        self.roots.len()
    }

    pub fn roots(&self) -> &[Vector] {
        &self.roots
    }

    pub fn coroots(&self) -> &[Vector] {
        &self.coroots
    }

    pub fn root(&self, i: usize) -> &Vector {
        &self.roots[i]
    }

    pub fn coroot(&self, i: usize) -> &Vector {
        &self.coroots[i]
    }

    pub fn simple(&self) -> &[usize] {
        &self.simple
    }

    pub fn is_positive(&self, i: usize) -> bool {
        self.positive[i]
    }

    pub fn positive_roots(&self) -> Vec<usize> {
        (0..self.roots.len())
            .filter(|&i| self.positive[i])
            .collect()
    }

    pub fn root_index(&self, v: &[i64]) -> Option<usize> {
        self.index.get(v).copied()
    }

    /// Index of `-alpha`.
    pub fn negative_of(&self, i: usize) -> usize {
        self.index[&neg(&self.roots[i])]
    }

    pub fn reflection(&self, i: usize) -> WeylElement {
        WeylElement::reflection(&self.roots[i], &self.coroots[i])
    }

    pub fn simple_reflection(&self, k: usize) -> WeylElement {
        self.reflection(self.simple[k])
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for (i, (a, c)) in self.roots.iter().zip(&self.coroots).enumerate() {
            let p = dot(a, c);
            if p != 2 {
                violations.push(format!("pairing \u{2260} 2 for root {i} ({a:?}): {p}"));
            }
        }
        if violations.is_empty() {
            for i in 0..self.roots.len() {
                let s = self.reflection(i);
                for (j, (b, d)) in self.roots.iter().zip(&self.coroots).enumerate() {
                    match self.root_index(&s.act(b)) {
                        Some(k) if self.coroots[k] == s.act_dual(d) => {}
                        Some(_) => violations.push(format!(
                            "reflection {i} does not carry coroot {j} to the matching coroot"
                        )),
                        None => violations.push(format!(
                            "reflection {i} does not permute the roots (image of {j})"
                        )),
                    }
                }
            }
        }
        for (i, a) in self.roots.iter().enumerate() {
            let negated = self.root_index(&neg(a));
            match negated {
                None => violations.push(format!("-root {i} is not a root")),
                Some(j) if self.positive[i] == self.positive[j] => violations.push(format!(
                    "root {i} is not of constant sign in the simple roots"
                )),
                _ => {}
            }
            if self.root_index(&scale(2, a)).is_some() {
                violations.push(format!("root system is not reduced at root {i}"));
            }
        }
        let simple_vecs: Vec<Vector> = self.simple.iter().map(|&i| self.roots[i].clone()).collect();
        if lattice::rank(&simple_vecs) != simple_vecs.len() {
            violations.push("simple roots are linearly dependent".into());
        }
        for (i, a) in self.roots.iter().enumerate() {
            if !self.positive[i] {
                continue;
            }
            let integral = lattice::rational_coordinates(&simple_vecs, a)
                .is_some_and(|c| c.iter().all(|x| x.is_integer()));
            if !integral {
                violations.push(format!(
                    "positive root {i} is not an integral combination of simple roots"
                ));
            }
        }
        ValidationReport {
            valid: violations.is_empty(),
            violations,
        }
    }

    pub fn weyl_group(&self) -> Result<Arc<Vec<WeylElement>>> {
        self.weyl
            .get_or_init(|| self.weyl_group_bounded(WEYL_BOUND).map(Arc::new))
            .clone()
    }

    /// Closure of the simple reflections, sorted in canonical order.
    pub fn weyl_group_bounded(&self, bound: usize) -> Result<Vec<WeylElement>> {
        let gens: Vec<WeylElement> = (0..self.simple.len())
            .map(|k| self.simple_reflection(k))
            .collect();
        generate_group(self.rank, &gens, bound)
    }

    /// Number of positive roots made negative by `w`.
    pub fn finite_length(&self, w: &WeylElement) -> usize {
        self.roots
            .iter()
            .enumerate()
            .filter(|&(i, a)| {
                self.positive[i]
                    && self
                        .root_index(&w.act(a))
                        .is_some_and(|j| !self.positive[j])
            })
            .count()
    }

    /// Reduced word in simple-reflection positions `0..|simple|`.
    pub fn reduced_word(&self, w: &WeylElement) -> Vec<usize> {
        let mut word = Vec::new();
        let mut cur = w.clone();
        let mut l = self.finite_length(&cur);
        while l > 0 {
            for k in 0..self.simple.len() {
                let next = self.simple_reflection(k).compose(&cur);
                let nl = self.finite_length(&next);
                if nl < l {
                    word.push(k);
                    cur = next;
                    l = nl;
                    break;
                }
            }
        }
        word
    }

    /// Element given by a word in simple reflections.
    pub fn from_word(&self, word: &[usize]) -> Result<WeylElement> {
        let mut w = WeylElement::identity(self.rank);
        for &k in word {
            if k >= self.simple.len() {
                return Err(Error::InvalidDatum(format!("no simple reflection {k}")));
            }
            w = w.compose(&self.simple_reflection(k));
        }
        Ok(w)
    }

    /// Longest element of `W`.
    pub fn longest_element(&self) -> Result<WeylElement> {
        let w = self.weyl_group()?;
        Ok(w.iter()
            .max_by_key(|x| self.finite_length(x))
            .cloned()
            .expect("Weyl group is nonempty"))
    }

    /// Permutation of root indices induced by `w`.
    pub fn root_permutation(&self, w: &WeylElement) -> Option<Vec<usize>> {
        self.roots
            .iter()
            .map(|a| self.root_index(&w.act(a)))
            .collect()
    }

    /// Subgroup generated by the reflections in a root subset.
    pub fn reflection_subgroup(&self, subset: &[usize]) -> Result<Vec<WeylElement>> {
        let gens: Vec<WeylElement> = subset.iter().map(|&i| self.reflection(i)).collect();
        generate_group(self.rank, &gens, WEYL_BOUND)
    }

    /// Simple roots of a root subsystem for the positive system it inherits.
    pub fn subsystem_simple(&self, subset: &[usize]) -> Vec<usize> {
        let pos: Vec<usize> = subset
            .iter()
            .copied()
            .filter(|&i| self.positive[i])
            .collect();
        pos.iter()
            .copied()
            .filter(|&b| {
                let s = self.reflection(b);
                pos.iter().filter(|&&a| a != b).all(|&a| {
                    self.root_index(&s.act(&self.roots[a]))
                        .is_some_and(|j| self.positive[j])
                })
            })
            .collect()
    }

    /// The datum `(X, Phi', X^, Phi'^)` of a root subsystem, roots kept in
    /// ambient order.
    pub fn sub_datum(&self, subset: &[usize]) -> Result<RootDatum> {
        let mut subset = subset.to_vec();
        subset.sort_unstable();
        let simple_amb = self.subsystem_simple(&subset);
        let roots = subset.iter().map(|&i| self.roots[i].clone()).collect();
        let coroots = subset.iter().map(|&i| self.coroots[i].clone()).collect();
        let simple = simple_amb
            .iter()
            .map(|s| {
                subset
                    .iter()
                    .position(|x| x == s)
                    .expect("simple root in subset")
            })
            .collect();
        Self::new(self.rank, roots, coroots, simple)
    }

    /// Whether the coroots of a subset are closed under addition inside the
    /// coroot system.
    pub fn coroots_closed(&self, subset: &[usize]) -> bool {
        let set: HashSet<&Vector> = subset.iter().map(|&i| &self.coroots[i]).collect();
        let all: HashSet<&Vector> = self.coroots.iter().collect();
        subset.iter().all(|&i| {
            subset.iter().all(|&j| {
                let s = add(&self.coroots[i], &self.coroots[j]);
                !all.contains(&s) || set.contains(&s)
            })
        })
    }

    /// Roots of `Phi` in the rational span of a subset.
    pub fn span_closure(&self, subset: &[usize]) -> Vec<usize> {
        let rows: Vec<Vector> = subset.iter().map(|&i| self.roots[i].clone()).collect();
        (0..self.roots.len())
            .filter(|&i| lattice::in_rational_span(&rows, &self.roots[i]))
            .collect()
    }

    pub fn levi(&self, subset: &[usize]) -> Result<LeviSubsystem> {
        let mut s = subset.to_vec();
        s.sort_unstable();
        s.dedup();
        let closure = self.span_closure(&s);
        if closure != s {
            return Err(Error::NotLevi(format!(
                "{s:?} differs from its span closure {closure:?}"
            )));
        }
        let weyl = self.reflection_subgroup(&s)?;
        Ok(LeviSubsystem {
            root_indices: s,
            weyl,
        })
    }

    /// Every Levi subsystem, ordered by size then indices.
    pub fn all_levis(&self) -> Result<Vec<LeviSubsystem>> {
        let mut found: BTreeSet<(usize, Vec<usize>)> = BTreeSet::new();
        let mut queue = VecDeque::from([Vec::new()]);
        found.insert((0, Vec::new()));
        while let Some(cur) = queue.pop_front() {
            for i in 0..self.roots.len() {
                if cur.contains(&i) {
                    continue;
                }
                let mut ext = cur.clone();
                ext.push(i);
                let next = self.span_closure(&ext);
                if found.insert((next.len(), next.clone())) {
                    queue.push_back(next);
                }
            }
        }
        found.into_iter().map(|(_, s)| self.levi(&s)).collect()
    }

    /// Whether a Levi subsystem is generated by a subset of the simple roots.
    pub fn is_standard_levi(&self, m: &LeviSubsystem) -> bool {
        self.subsystem_simple(&m.root_indices)
            .iter()
            .all(|i| self.simple.contains(i))
    }

    pub fn kostant_representatives(&self, m: &LeviSubsystem) -> Result<Vec<WeylElement>> {
        let w = self.weyl_group()?;
        minimal_coset_representatives(&m.weyl, &w, |x| self.finite_length(x))
    }

    /// Unique factorization `w = w_M * rep` and length additivity.
    pub fn kostant_factorization_check(&self, m: &LeviSubsystem) -> Result<KostantReport> {
        let w = self.weyl_group()?;
        let reps = self.kostant_representatives(m)?;
        let wm: HashSet<&WeylElement> = m.weyl.iter().collect();
        let mut unique = true;
        let mut additive = true;
        for x in w.iter() {
            let factorizations: Vec<(WeylElement, &WeylElement)> = reps
                .iter()
                .map(|r| (x.compose(&r.inverse()), r))
                .filter(|(a, _)| wm.contains(a))
                .collect();
            if factorizations.len() != 1 {
                unique = false;
                continue;
            }
            let (a, r) = &factorizations[0];
            if self.finite_length(x) != self.finite_length(a) + self.finite_length(r) {
                additive = false;
            }
        }
        Ok(KostantReport {
            levi: m.root_indices.clone(),
            standard: self.is_standard_levi(m),
            representatives: reps.len(),
            lengths: reps.iter().map(|r| self.finite_length(r)).collect(),
            unique_factorization: unique,
            length_additive: additive,
        })
    }

    /// The map `W x (W_{M'} \ W') -> (W_M \ W) x W_M`, `(w1, w') -> (w, w_M)`
    /// with `rep(w') w1 = w_M rep(w)`, checked for surjectivity and constant
    /// fiber size `|W_{M'} \ W'|`.
    pub fn iwasawa_fiber_check(&self, phi_m: &[usize], phi_prime: &[usize]) -> Result<FiberReport> {
        let m = self.levi(phi_m)?;
        let w = self.weyl_group()?;
        let wp = self.reflection_subgroup(phi_prime)?;
        let wm_set: HashSet<&WeylElement> = m.weyl.iter().collect();
        let wmp: Vec<WeylElement> = wp.iter().filter(|x| wm_set.contains(x)).cloned().collect();
        let len = |x: &WeylElement| self.finite_length(x);
        let prime_reps = minimal_coset_representatives(&wmp, &wp, len)?;
        let levi_reps = minimal_coset_representatives(&m.weyl, &w, len)?;
        let levi_rep_set: HashSet<&WeylElement> = levi_reps.iter().collect();

        let mut fibers: BTreeMap<(WeylElement, WeylElement), usize> = BTreeMap::new();
        for w1 in w.iter() {
            for r in &prime_reps {
                let p = r.compose(w1);
                let rep = levi_reps
                    .iter()
                    .find(|d| wm_set.contains(&p.compose(&d.inverse())))
                    .ok_or_else(|| Error::Internal("coset without representative".into()))?;
                let wm_part = p.compose(&rep.inverse());
                debug_assert!(levi_rep_set.contains(rep));
                *fibers.entry((rep.clone(), wm_part)).or_default() += 1;
            }
        }
        let expected = prime_reps.len();
        let target = levi_reps.len() * m.weyl.len();
        let sizes: BTreeSet<usize> = fibers.values().copied().collect();
        Ok(FiberReport {
            domain: w.len() * prime_reps.len(),
            target,
            image: fibers.len(),
            surjective: fibers.len() == target,
            expected_fiber: expected,
            fiber_sizes: sizes.iter().copied().collect(),
            uniform: sizes.len() == 1 && sizes.contains(&expected),
        })
    }

    /// `Phi_M = {alpha : <alpha, v> = 0 for v in (X^_Q)^{W'}}`.
    pub fn minimal_levi_containing(&self, phi_prime: &[usize]) -> Result<LeviSubsystem> {
        let fixed = self.fixed_cocharacters(phi_prime);
        let m: Vec<usize> = (0..self.roots.len())
            .filter(|&i| fixed.iter().all(|v| dot(&self.roots[i], v) == 0))
            .collect();
        self.levi(&m)
    }

    /// A rational basis of the cocharacters fixed by the reflections in a
    /// root subset.
    pub fn fixed_cocharacters(&self, subset: &[usize]) -> Vec<Vector> {
        let rows: Vec<Vector> = subset.iter().map(|&i| self.roots[i].clone()).collect();
        if rows.is_empty() {
            return (0..self.rank)
                .map(|i| (0..self.rank).map(|j| i64::from(i == j)).collect())
                .collect();
        }
        lattice::rational_nullspace(&rows, self.rank)
    }

    pub fn is_elliptic_subsystem(&self, phi_prime: &[usize]) -> bool {
        let all: Vec<usize> = (0..self.roots.len()).collect();
        self.fixed_cocharacters(phi_prime).len() == self.fixed_cocharacters(&all).len()
    }

    /// Invariant factors `> 1` of `X^ / (Z Phi^ + X^(A_G))`.
    pub fn lambda_group(&self) -> Vec<u64> {
        let mut gens = self.coroots.clone();
        gens.extend(lattice::integer_kernel(&self.roots, self.rank));
        let (torsion, _) = lattice::quotient_structure(&gens, self.rank);
        torsion
            .iter()
            .map(|d| d.to_u64().expect("small invariant factor"))
            .collect()
    }

    pub fn center_scheme_info(&self) -> CenterSchemeInfo {
        let (tx, _) = lattice::quotient_structure(&self.roots, self.rank);
        let (tc, _) = lattice::quotient_structure(&self.coroots, self.rank);
        CenterSchemeInfo {
            z_is_torus: tx.is_empty(),
            derived_sc: tc.is_empty(),
        }
    }

    pub fn datum_surgery(&self, mode: SurgeryMode) -> Result<SurgeryResult> {
        let info = self.center_scheme_info();
        let satisfied = match mode {
            SurgeryMode::ZExtension => info.derived_sc,
            SurgeryMode::CenterTorus => info.z_is_torus,
        };
        let n = self.rank;
        if satisfied {
            let id = identity_matrix(n);
            return Ok(SurgeryResult {
                mode,
                already_satisfied: true,
                datum: self.clone(),
                projection: id.clone(),
                injection: id,
                kernel: Vec::new(),
                exact: true,
                condition_holds: true,
            });
        }
        // For z_extension the new cocharacter lattice is Z^r + X^ with the
        // simple coroot a^_i sent to (e_i, 0); center_torus is the dual
        // construction on characters.
        let (primary, secondary) = match mode {
            SurgeryMode::ZExtension => (&self.coroots, &self.roots),
            SurgeryMode::CenterTorus => (&self.roots, &self.coroots),
        };
        let r = self.simple.len();
        let basis: Vec<Vector> = self.simple.iter().map(|&i| primary[i].clone()).collect();
        let mut new_primary = Vec::new();
        let mut new_secondary = Vec::new();
        for (p, s) in primary.iter().zip(secondary) {
            let coeffs = lattice::solve_integer(&basis, p).ok_or_else(|| {
                Error::InvalidDatum(format!(
                    "{p:?} is not an integral combination of simple elements"
                ))
            })?;
            let mut np = coeffs;
            np.extend(std::iter::repeat_n(0, n));
            let mut ns: Vector = basis.iter().map(|b| dot(s, b)).collect();
            ns.extend(s.iter().copied());
            new_primary.push(np);
            new_secondary.push(ns);
        }
        let (roots, coroots) = match mode {
            SurgeryMode::ZExtension => (new_secondary, new_primary),
            SurgeryMode::CenterTorus => (new_primary, new_secondary),
        };
        let datum = RootDatum::new(r + n, roots, coroots, self.simple.clone())?;
        // projection Z^r + L -> L, (a, x) -> sum a_i b_i + x
        let projection: Matrix = (0..n)
            .map(|i| {
                basis
                    .iter()
                    .map(|b| b[i])
                    .chain((0..n).map(|j| i64::from(i == j)))
                    .collect()
            })
            .collect();
        let injection = transpose(&projection);
        let kernel: Vec<Vector> = lattice::integer_kernel(&projection, r + n);

        // exactness: projection onto, kernel spanned, duality, roots transported
        let mut exact = kernel.len() == r;
        for e in 0..n {
            let target: Vector = (0..n).map(|j| i64::from(j == e)).collect();
            let cols: Vec<Vector> = transpose(&projection);
            exact &= lattice::solve_integer(&cols, &target).is_some();
        }
        for k in &kernel {
            exact &= mat_vec(&projection, k).iter().all(|&x| x == 0);
        }
        let (new_p, new_s) = match mode {
            SurgeryMode::ZExtension => (datum.coroots(), datum.roots()),
            SurgeryMode::CenterTorus => (datum.roots(), datum.coroots()),
        };
        for (i, (p, s)) in primary.iter().zip(secondary).enumerate() {
            exact &= mat_vec(&projection, &new_p[i]) == *p;
            exact &= mat_vec(&injection, s) == new_s[i];
        }
        for i in 0..self.roots.len() {
            for j in 0..self.roots.len() {
                exact &= dot(&datum.roots[i], &datum.coroots[j])
                    == dot(&self.roots[i], &self.coroots[j]);
            }
        }
        let after = datum.center_scheme_info();
        let condition_holds = match mode {
            SurgeryMode::ZExtension => after.derived_sc,
            SurgeryMode::CenterTorus => after.z_is_torus,
        };
        Ok(SurgeryResult {
            mode,
            already_satisfied: false,
            datum,
            projection,
            injection,
            kernel,
            exact,
            condition_holds,
        })
    }
}

/// Closure of generators under multiplication, sorted.
pub fn generate_group(n: usize, gens: &[WeylElement], bound: usize) -> Result<Vec<WeylElement>> {
    let id = WeylElement::identity(n);
    let mut seen: HashSet<WeylElement> = HashSet::from([id.clone()]);
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = g.compose(&x);
            if !seen.contains(&y) {
                if seen.len() >= bound {
                    return Err(Error::WeylGroupTooLarge(bound));
                }
                seen.insert(y.clone());
                queue.push_back(y);
            }
        }
    }
    let mut out: Vec<WeylElement> = seen.into_iter().collect();
    out.sort();
    Ok(out)
}

/// Minimal-length representatives of the right cosets `sub \ group`, ordered
/// by length then canonical order. The minimum must be unique in each coset.
pub fn minimal_coset_representatives(
    sub: &[WeylElement],
    group: &[WeylElement],
    len: impl Fn(&WeylElement) -> usize,
) -> Result<Vec<WeylElement>> {
    let mut covered: HashSet<WeylElement> = HashSet::new();
    let mut reps = Vec::new();
    for g in group {
        if covered.contains(g) {
            continue;
        }
        let coset: Vec<WeylElement> = sub.iter().map(|h| h.compose(g)).collect();
        let min = coset.iter().map(&len).min().expect("nonempty coset");
        let minimal: Vec<&WeylElement> = coset.iter().filter(|x| len(x) == min).collect();
        if minimal.len() != 1 {
            return Err(Error::Internal(format!(
                "coset has {} elements of minimal length",
                minimal.len()
            )));
        }
        reps.push((min, minimal[0].clone()));
        covered.extend(coset);
    }
    reps.sort();
    Ok(reps.into_iter().map(|(_, r)| r).collect())
}

#[derive(Debug, Clone)]
pub struct LeviSubsystem {
    pub root_indices: Vec<usize>,
    pub weyl: Vec<WeylElement>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KostantReport {
    pub levi: Vec<usize>,
    pub standard: bool,
    pub representatives: usize,
    pub lengths: Vec<usize>,
    pub unique_factorization: bool,
    pub length_additive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiberReport {
    pub domain: usize,
    pub target: usize,
    pub image: usize,
    pub surjective: bool,
    pub expected_fiber: usize,
    pub fiber_sizes: Vec<usize>,
    pub uniform: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CenterSchemeInfo {
    pub z_is_torus: bool,
    pub derived_sc: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurgeryMode {
    ZExtension,
    CenterTorus,
}

/// Result of a root-datum surgery.
///
/// For `ZExtension`, `projection` is the surjection `X^_1 -> X^` and
/// `injection` its transpose `X -> X_1`; for `CenterTorus` the roles of
/// characters and cocharacters are swapped. `kernel` is a basis of the
/// kernel of `projection`.
#[derive(Debug, Clone)]
pub struct SurgeryResult {
    pub mode: SurgeryMode,
    pub already_satisfied: bool,
    pub datum: RootDatum,
    pub projection: Matrix,
    pub injection: Matrix,
    pub kernel: Vec<Vector>,
    pub exact: bool,
    pub condition_holds: bool,
}
