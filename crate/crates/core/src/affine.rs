//! The extended affine Weyl group `X^ x| W` acting on `V = X^ (x) R`,
//! affine roots of a subsystem, alcove lengths and the Coxeter decomposition.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rootdata::{add, dot, neg, scale, RootDatum, Vector, WeylElement};

/// `t_nu w`, acting by `v -> w(v) + nu`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExtAffineElement {
    pub nu: Vector,
    pub w: WeylElement,
}

impl ExtAffineElement {
    pub fn new(nu: Vector, w: WeylElement) -> Self {
        ExtAffineElement { nu, w }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(vec![0; n], WeylElement::identity(n))
    }

    pub fn translation(nu: Vector) -> Self {
        let n = nu.len();
        Self::new(nu, WeylElement::identity(n))
    }

    pub fn finite(w: WeylElement) -> Self {
        Self::new(vec![0; w.rank()], w)
    }

    /// `(t_nu w)(t_mu u) = t_{nu + w(mu)} wu`.
    pub fn compose(&self, other: &Self) -> Self {
        Self::new(
            add(&self.nu, &self.w.act_dual(&other.nu)),
            self.w.compose(&other.w),
        )
    }

    pub fn inverse(&self) -> Self {
        let wi = self.w.inverse();
        Self::new(neg(&wi.act_dual(&self.nu)), wi)
    }

    pub fn is_identity(&self) -> bool {
        self.nu.iter().all(|&x| x == 0) && self.w.is_identity()
    }

    /// Image of an integral point of `V`.
    pub fn act_point(&self, v: &[i64]) -> Vector {
        add(&self.w.act_dual(v), &self.nu)
    }

    /// `a o sigma^{-1}`: for `a = alpha + n`, the root `w(alpha) + n - <w(alpha), nu>`.
    pub fn act_root(&self, rd: &RootDatum, a: &AffineRoot) -> AffineRoot {
        let beta = self.w.act(rd.root(a.root));
        let idx = rd
            .root_index(&beta)
            .expect("Weyl element permutes the roots");
        AffineRoot {
            root: idx,
            offset: a.offset - dot(&beta, &self.nu),
        }
    }
}

impl fmt::Debug for ExtAffineElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{:?}{:?}", self.nu, self.w)
    }
}

/// The affine function `v -> <alpha, v> + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct AffineRoot {
    pub root: usize,
    pub offset: i64,
}

/// Affine roots `alpha + n` with `alpha` in a root subsystem, with the alcove
/// `0 < alpha(v) < 1` for positive `alpha` of the subsystem.
#[derive(Clone, Debug)]
pub struct AffineSystem {
    rd: RootDatum,
    roots: Vec<usize>,
    member: Vec<bool>,
    simple: Vec<AffineRoot>,
    components: Vec<Vec<usize>>,
}

impl AffineSystem {
    /// All of `Phi`.
    pub fn full(rd: &RootDatum) -> Self {
        Self::new(rd, &(0..rd.num_roots()).collect::<Vec<_>>())
    }

    pub fn new(rd: &RootDatum, subset: &[usize]) -> Self {
        let mut roots = subset.to_vec();
        roots.sort_unstable();
        roots.dedup();
        let mut member = vec![false; rd.num_roots()];
        for &i in &roots {
            member[i] = true;
        }
        let mut simple_roots = rd.subsystem_simple(&roots);
        simple_roots.sort_unstable();
        let components = irreducible_components(rd, &simple_roots);
        let mut simple: Vec<AffineRoot> = simple_roots
            .iter()
            .map(|&r| AffineRoot { root: r, offset: 0 })
            .collect();
        for comp in &components {
            let theta = highest_root(rd, &roots, comp);
            simple.push(AffineRoot {
                root: rd.negative_of(theta),
                offset: 1,
            });
        }
        AffineSystem {
            rd: rd.clone(),
            roots,
            member,
            simple,
            components,
        }
    }

    pub fn datum(&self) -> &RootDatum {
        &self.rd
    }

    pub fn roots(&self) -> &[usize] {
        &self.roots
    }

    pub fn contains(&self, root: usize) -> bool {
        self.member[root]
    }

    /// Minimal positive affine roots in canonical order: the simple roots of
    /// the subsystem, then `-theta + 1` per irreducible component.
    pub fn simple_affine_roots(&self) -> &[AffineRoot] {
        &self.simple
    }

    /// Simple roots of each irreducible component.
    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }

    pub fn positive_on_alcove(&self, a: &AffineRoot) -> Result<bool> {
        if !self.contains(a.root) {
            return Err(Error::RootNotInSubsystem);
        }
        Ok(if self.rd.is_positive(a.root) {
            a.offset >= 0
        } else {
            a.offset >= 1
        })
    }

    /// Whether the finite part preserves the subsystem, so that the element
    /// permutes its affine roots.
    pub fn preserves(&self, w: &WeylElement) -> bool {
        self.roots.iter().all(|&i| {
            self.rd
                .root_index(&w.act(self.rd.root(i)))
                .is_some_and(|j| self.member[j])
        })
    }

    /// Number of positive affine roots `a` with `a o sigma^{-1}` negative.
    pub fn length(&self, s: &ExtAffineElement) -> Result<usize> {
        if !self.preserves(&s.w) {
            return Err(Error::LengthUndefined);
        }
        let mut total = 0i64;
        for &i in &self.roots {
            let beta = s.w.act(self.rd.root(i));
            let j = self.rd.root_index(&beta).expect("roots are permuted");
            let k = dot(&beta, &s.nu);
            let n0 = |r: usize| i64::from(!self.rd.is_positive(r));
            // offsets n >= n0(alpha) with n - k < n0(beta)
            total += (k + n0(j) - n0(i)).max(0);
        }
        Ok(total as usize)
    }

    /// Closed form: sum over positive `alpha` of `|<alpha, nu>|`, or of
    /// `|<alpha, nu> - 1|` when `w^{-1} alpha` is negative.
    pub fn length_closed_form(&self, s: &ExtAffineElement) -> Result<usize> {
        if !self.preserves(&s.w) {
            return Err(Error::LengthUndefined);
        }
        let wi = s.w.inverse();
        let mut total = 0i64;
        for &i in &self.roots {
            if !self.rd.is_positive(i) {
                continue;
            }
            let alpha = self.rd.root(i);
            let back = self
                .rd
                .root_index(&wi.act(alpha))
                .expect("roots are permuted");
            let k = dot(alpha, &s.nu);
            total += if self.rd.is_positive(back) {
                k.abs()
            } else {
                (k - 1).abs()
            };
        }
        Ok(total as usize)
    }

    /// The reflection `s_a = t_{-n alpha^} s_alpha` in `alpha(v) + n = 0`.
    pub fn reflection(&self, a: &AffineRoot) -> ExtAffineElement {
        ExtAffineElement::new(
            scale(-a.offset, self.rd.coroot(a.root)),
            self.rd.reflection(a.root),
        )
    }

    pub fn generators(&self) -> Vec<ExtAffineElement> {
        self.simple.iter().map(|a| self.reflection(a)).collect()
    }

    /// Greedy wall-crossing: `sigma = s_{i1} ... s_{ik} eta` with `l'(eta) = 0`.
    pub fn coxeter_decompose(
        &self,
        s: &ExtAffineElement,
    ) -> Result<(Vec<usize>, ExtAffineElement)> {
        let gens = self.generators();
        let mut cur = s.clone();
        let mut l = self.length(&cur)?;
        let mut word = Vec::with_capacity(l);
        while l > 0 {
            let mut stepped = false;
            for (k, g) in gens.iter().enumerate() {
                let next = g.compose(&cur);
                let nl = self.length(&next)?;
                if nl < l {
                    word.push(k);
                    cur = next;
                    l = nl;
                    stepped = true;
                    break;
                }
            }
            if !stepped {
                return Err(Error::Internal(
                    "no descending wall from a positive-length element".into(),
                ));
            }
        }
        Ok((word, cur))
    }

    /// Product of generators along a word.
    pub fn from_word(&self, word: &[usize]) -> ExtAffineElement {
        let gens = self.generators();
        word.iter()
            .fold(ExtAffineElement::identity(self.rd.rank()), |acc, &k| {
                acc.compose(&gens[k])
            })
    }

    /// Whether an element maps every simple affine root to a positive one.
    pub fn preserves_alcove(&self, s: &ExtAffineElement) -> Result<bool> {
        if !self.preserves(&s.w) {
            return Err(Error::LengthUndefined);
        }
        for a in &self.simple {
            if !self.positive_on_alcove(&s.act_root(&self.rd, a))? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn translation_length(&self, nu: &[i64]) -> usize {
        self.length(&ExtAffineElement::translation(nu.to_vec()))
            .expect("translations preserve every subsystem")
    }

    pub fn check_translation_length_w_invariance(
        &self,
        nu: &[i64],
        w: &WeylElement,
    ) -> TranslationLengthReport {
        let a = self.translation_length(nu);
        let wnu = w.act_dual(nu);
        let b = self.translation_length(&wnu);
        TranslationLengthReport {
            nu: nu.to_vec(),
            w_nu: wnu,
            length_nu: a,
            length_w_nu: b,
            equal: a == b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TranslationLengthReport {
    pub nu: Vector,
    pub w_nu: Vector,
    pub length_nu: usize,
    pub length_w_nu: usize,
    pub equal: bool,
}

/// Connected components of the Dynkin graph on the given simple roots.
fn irreducible_components(rd: &RootDatum, simple: &[usize]) -> Vec<Vec<usize>> {
    let mut comp_of: BTreeMap<usize, usize> = BTreeMap::new();
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for &s in simple {
        if comp_of.contains_key(&s) {
            continue;
        }
        let id = comps.len();
        let mut stack = vec![s];
        let mut comp = Vec::new();
        comp_of.insert(s, id);
        while let Some(x) = stack.pop() {
            comp.push(x);
            for &y in simple {
                if !comp_of.contains_key(&y) && dot(rd.root(x), rd.coroot(y)) != 0 {
                    comp_of.insert(y, id);
                    stack.push(y);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

/// Positive root of largest height in the span of a component.
fn highest_root(rd: &RootDatum, subset: &[usize], comp: &[usize]) -> usize {
    let basis: Vec<Vector> = comp.iter().map(|&i| rd.root(i).clone()).collect();
    subset
        .iter()
        .filter(|&&i| rd.is_positive(i))
        .filter_map(|&i| {
            crate::lattice::rational_coordinates(&basis, rd.root(i)).map(|c| {
                let h: num_rational::BigRational = c.iter().sum();
                (h, i)
            })
        })
        .max()
        .map(|(_, i)| i)
        .expect("component has a positive root")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::depth_zero::{endoscopic_datum, DepthZeroCharacter};
    use proptest::prelude::*;

    fn preset(n: &str) -> RootDatum {
        RootDatum::preset(n).unwrap()
    }

    fn gl3_config() -> (RootDatum, AffineSystem) {
        let rd = preset("GL3");
        let e = endoscopic_datum(&rd, &DepthZeroCharacter::new(6, &[0, 0, 2])).unwrap();
        let sys = AffineSystem::new(&rd, &e.phi_prime);
        (rd, sys)
    }

    #[test]
    fn alcove_positivity() {
        let rd = preset("SL2");
        let sys = AffineSystem::full(&rd);
        let (p, n) = (0, rd.negative_of(0));
        assert!(sys
            .positive_on_alcove(&AffineRoot { root: p, offset: 0 })
            .unwrap());
        assert!(sys
            .positive_on_alcove(&AffineRoot { root: n, offset: 1 })
            .unwrap());
        assert!(!sys
            .positive_on_alcove(&AffineRoot { root: n, offset: 0 })
            .unwrap());
        let empty = AffineSystem::new(&rd, &[]);
        assert_eq!(
            empty.positive_on_alcove(&AffineRoot { root: p, offset: 0 }),
            Err(Error::RootNotInSubsystem)
        );
    }

    #[test]
    fn simple_affine_roots() {
        let rd = preset("GL2");
        assert!(AffineSystem::new(&rd, &[]).simple_affine_roots().is_empty());
        let sys = AffineSystem::full(&rd);
        assert_eq!(
            sys.simple_affine_roots(),
            &[
                AffineRoot { root: 0, offset: 0 },
                AffineRoot { root: 1, offset: 1 }
            ]
        );
        let c2 = preset("C2");
        let e = endoscopic_datum(&c2, &DepthZeroCharacter::new(4, &[2, 2])).unwrap();
        let sys = AffineSystem::new(&c2, &e.phi_prime);
        assert_eq!(sys.simple_affine_roots().len(), 4);
        assert_eq!(sys.components().len(), 2);
        for name in crate::rootdata::PRESETS {
            let rd = preset(name);
            let sys = AffineSystem::full(&rd);
            let r = rd.simple().len();
            assert_eq!(
                sys.simple_affine_roots().len(),
                r + usize::from(r > 0),
                "{name}"
            );
        }
    }

    #[test]
    fn length_examples() {
        let rd = preset("GL3");
        let full = AffineSystem::full(&rd);
        assert_eq!(full.length(&ExtAffineElement::identity(3)).unwrap(), 0);
        assert_eq!(full.translation_length(&[2, 1, 0]), 4);
        let (_, sys) = gl3_config();
        assert_eq!(sys.translation_length(&[2, 1, 0]), 1);
        let s23 = rd.simple_reflection(1);
        assert_eq!(
            sys.length(&ExtAffineElement::finite(s23)),
            Err(Error::LengthUndefined)
        );
    }

    #[test]
    fn decomposition_examples() {
        let rd = preset("GL2");
        let sys = AffineSystem::full(&rd);
        for (k, a) in sys.simple_affine_roots().iter().enumerate() {
            let (word, eta) = sys.coxeter_decompose(&sys.reflection(a)).unwrap();
            assert_eq!(word, vec![k]);
            assert!(eta.is_identity());
        }
        let central = ExtAffineElement::translation(vec![1, 1]);
        let (word, eta) = sys.coxeter_decompose(&central).unwrap();
        assert!(word.is_empty());
        assert_eq!(eta, central);

        let t = ExtAffineElement::translation(vec![1, 0]);
        let (word, eta) = sys.coxeter_decompose(&t).unwrap();
        assert_eq!(word.len(), 1);
        assert!(!eta.is_identity());
        assert_eq!(sys.length(&eta).unwrap(), 0);
        assert_eq!(sys.from_word(&word).compose(&eta), t);
    }

    #[test]
    fn invariance_checker_examples() {
        let (rd, sys) = gl3_config();
        let nu = [2, 1, 0];
        assert!(
            sys.check_translation_length_w_invariance(&nu, &WeylElement::identity(3))
                .equal
        );
        assert!(
            sys.check_translation_length_w_invariance(&nu, &rd.simple_reflection(0))
                .equal
        );
        let rep = sys.check_translation_length_w_invariance(&nu, &rd.simple_reflection(1));
        assert!(!rep.equal);
        assert_eq!((rep.length_nu, rep.length_w_nu), (1, 2));
        assert_eq!(rep.w_nu, vec![2, 0, 1]);
    }

    fn cases() -> Vec<(RootDatum, AffineSystem, Vec<WeylElement>)> {
        let mut out = Vec::new();
        for (name, m, c) in [
            ("SL2", 4, vec![2]),
            ("C2", 4, vec![2, 2]),
            ("GL3", 6, vec![0, 0, 2]),
            ("G2", 1, vec![0, 0]),
            ("GL3", 1, vec![0, 0, 0]),
        ] {
            let rd = preset(name);
            let e = endoscopic_datum(&rd, &DepthZeroCharacter::new(m, &c)).unwrap();
            let sys = AffineSystem::new(&rd, &e.phi_prime);
            out.push((rd, sys, e.w_chi0));
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]
        #[test]
        fn length_laws(ci in 0usize..5, wi in 0usize..12, vi in 0usize..12,
                       nu in prop::collection::vec(-3i64..=3, 3), mu in prop::collection::vec(-3i64..=3, 3)) {
            let all = cases();
            let (rd, sys, wchi) = &all[ci];
            let n = rd.rank();
            let a = ExtAffineElement::new(nu[..n].to_vec(), wchi[wi % wchi.len()].clone());
            let b = ExtAffineElement::new(mu[..n].to_vec(), wchi[vi % wchi.len()].clone());
            let la = sys.length(&a).unwrap();
            prop_assert_eq!(la, sys.length_closed_form(&a).unwrap());
            prop_assert_eq!(la, sys.length(&a.inverse()).unwrap());
            let lb = sys.length(&b).unwrap();
            prop_assert!(sys.length(&a.compose(&b)).unwrap() <= la + lb);

            let (word, eta) = sys.coxeter_decompose(&a).unwrap();
            prop_assert_eq!(word.len(), la);
            prop_assert_eq!(sys.length(&eta).unwrap(), 0);
            prop_assert!(sys.preserves_alcove(&eta).unwrap());
            prop_assert_eq!(sys.from_word(&word).compose(&eta), a.clone());

            let wp = rd.reflection_subgroup(sys.roots()).unwrap();
            for x in &wp {
                prop_assert!(sys.check_translation_length_w_invariance(&nu[..n], x).equal);
            }
        }
    }
}
