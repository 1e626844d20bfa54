//! The Iwahori-Hecke algebra of `W_aff' x| C_chi0` with basis `T_sigma`,
//! `T_s^2 = (q - 1) T_s + q T_1`, and length-zero elements acting by
//! relabeling.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::affine::{AffineSystem, ExtAffineElement};
use crate::depth_zero::EndoscopicDatum;
use crate::error::{Error, Result};
use crate::rootdata::{RootDatum, WeylElement};
use crate::scalars::{half_power, CycloField, CycloLaurent, Cyclotomic};

/// The data fixing one Hecke algebra: the root datum, the subsystem `Phi'`,
/// the group `W_chi0` of allowed finite parts, and `m = q - 1`.
#[derive(Debug)]
pub struct HeckeAmbient {
    sys: AffineSystem,
    w_chi0: HashSet<WeylElement>,
    field: Arc<CycloField>,
    q: u64,
}

impl HeckeAmbient {
    pub fn new(rd: &RootDatum, endo: &EndoscopicDatum, q: u64) -> Result<Arc<Self>> {
        if endo.chi0.modulus() != q - 1 {
            return Err(Error::IncompatibleAmbient(format!(
                "character modulus {} but q - 1 = {}",
                endo.chi0.modulus(),
                q - 1
            )));
        }
        Ok(Arc::new(HeckeAmbient {
            sys: AffineSystem::new(rd, &endo.phi_prime),
            w_chi0: endo.w_chi0.iter().cloned().collect(),
            field: CycloField::new(q - 1),
            q,
        }))
    }

    pub fn system(&self) -> &AffineSystem {
        &self.sys
    }

    pub fn field(&self) -> &Arc<CycloField> {
        &self.field
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    fn same(&self, other: &Self) -> bool {
        self.q == other.q
            && self.sys.roots() == other.sys.roots()
            && self.sys.datum() == other.sys.datum()
    }

    pub fn length(&self, s: &ExtAffineElement) -> usize {
        self.sys.length(s).expect("finite part checked on entry")
    }

    fn check_key(&self, s: &ExtAffineElement) -> Result<()> {
        if s.nu.len() != self.sys.datum().rank() {
            return Err(Error::DimensionMismatch {
                expected: self.sys.datum().rank(),
                got: s.nu.len(),
            });
        }
        if !self.w_chi0.contains(&s.w) {
            return Err(Error::IncompatibleAmbient(format!(
                "finite part {:?} is not in the stabilizer of the character",
                s.w
            )));
        }
        Ok(())
    }
}

/// Which family of basis labels an element is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum BasisTag {
    /// `f_{chi, w}` on the `(G, rho)` side.
    G,
    /// `f'_w` on the Iwahori side of the endoscopic group.
    GPrime,
}

impl BasisTag {
    pub fn toggled(self) -> Self {
        match self {
            BasisTag::G => BasisTag::GPrime,
            BasisTag::GPrime => BasisTag::G,
        }
    }
}

#[derive(Clone)]
pub struct HeckeElement {
    ambient: Arc<HeckeAmbient>,
    tag: BasisTag,
    terms: BTreeMap<ExtAffineElement, CycloLaurent>,
}

impl HeckeElement {
    pub fn zero(ambient: &Arc<HeckeAmbient>) -> Self {
        HeckeElement {
            ambient: ambient.clone(),
            tag: BasisTag::GPrime,
            terms: BTreeMap::new(),
        }
    }

    /// `T_sigma`.
    pub fn basis(ambient: &Arc<HeckeAmbient>, s: ExtAffineElement) -> Result<Self> {
        Self::term(ambient, s, CycloLaurent::one(&ambient.field))
    }

    pub fn term(ambient: &Arc<HeckeAmbient>, s: ExtAffineElement, c: CycloLaurent) -> Result<Self> {
        ambient.check_key(&s)?;
        let mut out = Self::zero(ambient);
        out.add_term(s, &c);
        Ok(out)
    }

    pub fn unit(ambient: &Arc<HeckeAmbient>) -> Self {
        let n = ambient.sys.datum().rank();
        Self::basis(ambient, ExtAffineElement::identity(n)).expect("identity is admissible")
    }

    /// `phi'_w = v^{-l'(w)} T_w`.
    pub fn basis_phi(ambient: &Arc<HeckeAmbient>, s: ExtAffineElement) -> Result<Self> {
        ambient.check_key(&s)?;
        let l = ambient.length(&s) as i64;
        Self::term(ambient, s, half_power(&ambient.field, -l))
    }

    pub fn ambient(&self) -> &Arc<HeckeAmbient> {
        &self.ambient
    }

    pub fn tag(&self) -> BasisTag {
        self.tag
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ExtAffineElement, &CycloLaurent)> {
        self.terms.iter()
    }

    pub fn support(&self) -> Vec<ExtAffineElement> {
        self.terms.keys().cloned().collect()
    }

    pub fn coeff(&self, s: &ExtAffineElement) -> Option<&CycloLaurent> {
        self.terms.get(s)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, s: ExtAffineElement, c: &CycloLaurent) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&s) {
            Some(cur) => {
                let sum = &*cur + c;
                if sum.is_zero() {
                    self.terms.remove(&s);
                } else {
                    *cur = sum;
                }
            }
            None => {
                self.terms.insert(s, c.clone());
            }
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if !(Arc::ptr_eq(&self.ambient, &other.ambient) || self.ambient.same(&other.ambient)) {
            return Err(Error::IncompatibleAmbient(
                "different Hecke algebras".into(),
            ));
        }
        if self.tag != other.tag {
            return Err(Error::IncompatibleAmbient("different basis tags".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for (s, c) in &other.terms {
            out.add_term(s.clone(), c);
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -&*c;
        }
        out
    }

    pub fn scale(&self, c: &CycloLaurent) -> Self {
        let mut out = Self {
            terms: BTreeMap::new(),
            ..self.clone()
        };
        for (s, a) in &self.terms {
            out.add_term(s.clone(), &(a * c));
        }
        out
    }

    /// `T_s * self` for a simple affine reflection `s`.
    fn left_mul_generator(&self, g: &ExtAffineElement) -> Self {
        let amb = &self.ambient;
        let q = half_power(&amb.field, 2);
        let q_minus_one = &q - &CycloLaurent::one(&amb.field);
        let mut out = Self {
            terms: BTreeMap::new(),
            ..self.clone()
        };
        for (x, c) in &self.terms {
            let sx = g.compose(x);
            if amb.length(&sx) > amb.length(x) {
                out.add_term(sx, c);
            } else {
                out.add_term(x.clone(), &(c * &q_minus_one));
                out.add_term(sx, &(c * &q));
            }
        }
        out
    }

    /// `T_sigma * self`.
    fn left_mul_basis(&self, sigma: &ExtAffineElement) -> Result<Self> {
        let amb = &self.ambient;
        let (word, eta) = amb.sys.coxeter_decompose(sigma)?;
        let gens = amb.sys.generators();
        let mut acc = Self {
            terms: BTreeMap::new(),
            ..self.clone()
        };
        for (x, c) in &self.terms {
            acc.add_term(eta.compose(x), c);
        }
        for &k in word.iter().rev() {
            acc = acc.left_mul_generator(&gens[k]);
        }
        Ok(acc)
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = Self {
            terms: BTreeMap::new(),
            ..other.clone()
        };
        for (s, c) in &self.terms {
            let prod = other.left_mul_basis(s)?.scale(c);
            for (k, v) in prod.terms {
                out.add_term(k, &v);
            }
        }
        Ok(out)
    }

    /// Basis relabeling between the two sides; coefficients untouched.
    pub fn relabel_psi(&self) -> Self {
        Self {
            tag: self.tag.toggled(),
            ..self.clone()
        }
    }

    /// `v -> 1`, landing in the group algebra of `W_chi0`.
    pub fn specialize_q_one(&self) -> GroupAlgebraElement {
        let mut out = GroupAlgebraElement::zero(&self.ambient.field);
        for (s, c) in &self.terms {
            out.add_term(s.clone(), &c.specialize_v_one());
        }
        out
    }
}

impl PartialEq for HeckeElement {
    fn eq(&self, other: &Self) -> bool {
        self.check(other).is_ok() && self.terms == other.terms
    }
}

impl fmt::Debug for HeckeElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.tag)?;
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

/// Finite sums of group elements with coefficients in `Q(zeta_m)`.
#[derive(Clone, PartialEq, Eq)]
pub struct GroupAlgebraElement {
    field: Arc<CycloField>,
    terms: BTreeMap<ExtAffineElement, Cyclotomic>,
}

impl GroupAlgebraElement {
    pub fn zero(field: &Arc<CycloField>) -> Self {
        GroupAlgebraElement {
            field: field.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn basis(field: &Arc<CycloField>, s: ExtAffineElement) -> Self {
        let mut out = Self::zero(field);
        out.add_term(s, &Cyclotomic::one(field));
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ExtAffineElement, &Cyclotomic)> {
        self.terms.iter()
    }

    fn add_term(&mut self, s: ExtAffineElement, c: &Cyclotomic) {
        if c.is_zero() {
            return;
        }
        let entry = self
            .terms
            .entry(s.clone())
            .or_insert_with(|| Cyclotomic::zero(&self.field));
        *entry = &*entry + c;
        if entry.is_zero() {
            self.terms.remove(&s);
        }
    }

    pub fn multiply(&self, other: &Self) -> Self {
        let mut out = Self::zero(&self.field);
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                out.add_term(a.compose(b), &(x * y));
            }
        }
        out
    }
}

impl fmt::Debug for GroupAlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::depth_zero::{endoscopic_datum, DepthZeroCharacter};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ambient(name: &str, q: u64, c: &[i64]) -> (Arc<HeckeAmbient>, EndoscopicDatum) {
        let rd = RootDatum::preset(name).unwrap();
        let e = endoscopic_datum(&rd, &DepthZeroCharacter::new(q - 1, c)).unwrap();
        (HeckeAmbient::new(&rd, &e, q).unwrap(), e)
    }

    fn random_key(rng: &mut ChaCha8Rng, e: &EndoscopicDatum, n: usize) -> ExtAffineElement {
        let nu = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
        let w = e.w_chi0[rng.gen_range(0..e.w_chi0.len())].clone();
        ExtAffineElement::new(nu, w)
    }

    #[test]
    fn quadratic_relation() {
        for (name, q, c) in [
            ("SL2", 5, vec![2]),
            ("C2", 5, vec![2, 2]),
            ("GL3", 7, vec![0, 0, 2]),
            ("GL2", 3, vec![0, 0]),
        ] {
            let (amb, _) = ambient(name, q, &c);
            let f = amb.field().clone();
            let n = amb.system().datum().rank();
            for g in amb.system().generators() {
                let ts = HeckeElement::basis(&amb, g.clone()).unwrap();
                let lhs = ts.multiply(&ts).unwrap();
                let qq = half_power(&f, 2);
                let rhs = ts
                    .scale(&(&qq - &CycloLaurent::one(&f)))
                    .add(&HeckeElement::unit(&amb).scale(&qq))
                    .unwrap();
                assert_eq!(lhs, rhs, "{name}");
                assert_eq!(
                    lhs.specialize_q_one(),
                    GroupAlgebraElement::basis(&f, ExtAffineElement::identity(n))
                );
            }
        }
    }

    #[test]
    fn length_zero_and_additive_products() {
        let (amb, _) = ambient("GL2", 3, &[0, 0]);
        let sys = amb.system();
        let (_, eta) = sys
            .coxeter_decompose(&ExtAffineElement::translation(vec![1, 0]))
            .unwrap();
        let a = HeckeElement::basis(&amb, eta.clone()).unwrap();
        let b = HeckeElement::basis(&amb, eta.inverse()).unwrap();
        assert_eq!(a.multiply(&b).unwrap(), HeckeElement::unit(&amb));

        let gens = sys.generators();
        let t0 = HeckeElement::basis(&amb, gens[1].clone()).unwrap();
        let t1 = HeckeElement::basis(&amb, gens[0].clone()).unwrap();
        let p = t0.multiply(&t1).unwrap();
        assert_eq!(p.support(), vec![gens[1].compose(&gens[0])]);
        assert!(p.coeff(&gens[1].compose(&gens[0])).unwrap() == &CycloLaurent::one(amb.field()));
    }

    #[test]
    fn basis_phi_examples() {
        let (amb, _) = ambient("GL3", 7, &[0, 0, 2]);
        let f = amb.field().clone();
        assert_eq!(
            HeckeElement::basis_phi(&amb, ExtAffineElement::identity(3)).unwrap(),
            HeckeElement::unit(&amb)
        );
        let g = amb.system().generators()[0].clone();
        assert_eq!(
            HeckeElement::basis_phi(&amb, g.clone()).unwrap(),
            HeckeElement::basis(&amb, g)
                .unwrap()
                .scale(&half_power(&f, -1))
        );
        let t = ExtAffineElement::translation(vec![2, 1, 0]);
        let phi = HeckeElement::basis_phi(&amb, t.clone()).unwrap();
        assert_eq!(phi.coeff(&t), Some(&half_power(&f, -1)));
        assert_eq!(phi.specialize_q_one(), GroupAlgebraElement::basis(&f, t));
        // s23 is not in W_chi0
        let rd = amb.system().datum().clone();
        assert!(
            HeckeElement::basis(&amb, ExtAffineElement::finite(rd.simple_reflection(1))).is_err()
        );
    }

    #[test]
    fn relabeling() {
        let (amb, e) = ambient("C2", 5, &[2, 2]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = HeckeElement::basis_phi(&amb, random_key(&mut rng, &e, 2)).unwrap();
        let y = HeckeElement::basis(&amb, random_key(&mut rng, &e, 2)).unwrap();
        let z = x.add(&y).unwrap();
        let r = z.relabel_psi();
        assert_eq!(r.tag(), BasisTag::G);
        assert_eq!(r.support(), z.support());
        assert_eq!(r.relabel_psi(), z);
        assert!(r.multiply(&z).is_err());
        assert_eq!(x.relabel_psi().add(&y.relabel_psi()).unwrap(), r);
    }

    #[test]
    fn incompatible_ambients() {
        let (a, _) = ambient("SL2", 5, &[2]);
        let (b, _) = ambient("SL2", 5, &[0]);
        let x = HeckeElement::unit(&a);
        let y = HeckeElement::unit(&b);
        assert!(matches!(x.multiply(&y), Err(Error::IncompatibleAmbient(_))));
    }

    #[test]
    fn unit_and_associativity_fuzz() {
        for (name, q, c) in [
            ("SL2", 5, vec![2]),
            ("C2", 5, vec![2, 2]),
            ("GL3", 7, vec![0, 0, 2]),
        ] {
            let (amb, e) = ambient(name, q, &c);
            let n = amb.system().datum().rank();
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let one = HeckeElement::unit(&amb);
            assert_eq!(
                one,
                HeckeElement::basis_phi(&amb, ExtAffineElement::identity(n)).unwrap()
            );
            for _ in 0..25 {
                let k = random_key(&mut rng, &e, n);
                let x = HeckeElement::basis(&amb, k.clone()).unwrap();
                let y = HeckeElement::basis(&amb, random_key(&mut rng, &e, n)).unwrap();
                let z = HeckeElement::basis(&amb, random_key(&mut rng, &e, n)).unwrap();
                assert_eq!(one.multiply(&x).unwrap(), x);
                assert_eq!(x.multiply(&one).unwrap(), x);
                let xy = x.multiply(&y).unwrap();
                assert_eq!(
                    xy.multiply(&z).unwrap(),
                    x.multiply(&y.multiply(&z).unwrap()).unwrap()
                );
                assert_eq!(
                    xy.specialize_q_one(),
                    x.specialize_q_one().multiply(&y.specialize_q_one())
                );
                // braid compatibility: product along the reduced word
                let (word, eta) = amb.system().coxeter_decompose(&k).unwrap();
                let gens = amb.system().generators();
                let mut p = HeckeElement::basis(&amb, eta).unwrap();
                for &i in word.iter().rev() {
                    p = HeckeElement::basis(&amb, gens[i].clone())
                        .unwrap()
                        .multiply(&p)
                        .unwrap();
                }
                assert_eq!(p, x);
            }
        }
    }
}
