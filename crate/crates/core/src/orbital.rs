//! Torus orbital integrals of elementary functions as exact profiles, the
//! transfer-factor diagonal and the matching identity, and the trace
//! formulas.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::affine::AffineSystem;
use crate::depth_zero::{character_translate, stabilizer, DepthZeroCharacter, EndoscopicDatum};
use crate::error::{Error, Result};
use crate::lattice;
use crate::rootdata::{dot, RootDatum, Vector, WeylElement};
use crate::scalars::{half_power, CycloField, CycloLaurent, Cyclotomic};
use crate::spectral::{DualTorusPoly, TransferSetup};

/// Value at `t_mu t_0` (with `t_0 <-> u`) is
/// `sum coeff * zeta_m^{<char, u>}` over the pairs stored at `mu`.
#[derive(Clone, PartialEq, Eq)]
pub struct TorusOrbitalProfile {
    field: Arc<CycloField>,
    entries: BTreeMap<Vector, BTreeMap<Vector, CycloLaurent>>,
}

impl TorusOrbitalProfile {
    pub fn new(field: &Arc<CycloField>) -> Self {
        TorusOrbitalProfile {
            field: field.clone(),
            entries: BTreeMap::new(),
        }
    }

    pub fn add_entry(&mut self, mu: Vector, chr: &DepthZeroCharacter, coeff: &CycloLaurent) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.entries.entry(mu.clone()).or_default();
        let key = chr.coords().to_vec();
        let sum = match slot.get(&key) {
            Some(c) => c + coeff,
            None => coeff.clone(),
        };
        if sum.is_zero() {
            slot.remove(&key);
        } else {
            slot.insert(key, sum);
        }
        if slot.is_empty() {
            self.entries.remove(&mu);
        }
    }

    pub fn components(&self) -> impl Iterator<Item = &Vector> {
        self.entries.keys()
    }

    /// `(char, coeff)` pairs at a component.
    pub fn at(&self, mu: &[i64]) -> Vec<(Vector, CycloLaurent)> {
        self.entries
            .get(mu)
            .map(|m| m.iter().map(|(k, v)| (k.clone(), v.clone())).collect())
            .unwrap_or_default()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vector, &BTreeMap<Vector, CycloLaurent>)> {
        self.entries.iter()
    }

    pub fn value(&self, mu: &[i64], u: &[i64]) -> CycloLaurent {
        let mut acc = CycloLaurent::zero(&self.field);
        if let Some(m) = self.entries.get(mu) {
            for (chr, c) in m {
                let z = Cyclotomic::zeta_pow(&self.field, dot(chr, u));
                acc = &acc + &c.scale(&z);
            }
        }
        acc
    }

    /// Adds `other`, reporting whether the component sets were disjoint.
    pub fn absorb(&mut self, other: &Self) -> bool {
        let disjoint = other.entries.keys().all(|k| !self.entries.contains_key(k));
        let m = self.field.order();
        for (mu, chars) in &other.entries {
            for (chr, c) in chars {
                self.add_entry(mu.clone(), &DepthZeroCharacter::new(m, chr), c);
            }
        }
        disjoint
    }
}

impl fmt::Debug for TorusOrbitalProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.entries.iter()).finish()
    }
}

/// Prefactor convention for the `G`-side trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GPrefactor {
    /// `q^{+l(t_nu)/2}`.
    Verbatim,
    /// `q^{-l(t_nu)/2}`.
    Negated,
}

/// Length used in the `G'`-side coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GPrimePrefactor {
    /// `l'(t_nu)` for every coset.
    Uniform,
    /// `l'(t_{w~(nu)})` for the coset of `w`.
    PerW,
}

/// Whether `<alpha, nu> > 0` for every simple root.
pub fn is_dominant_regular(rd: &RootDatum, nu: &[i64]) -> bool {
    rd.simple().iter().all(|&i| dot(rd.root(i), nu) > 0)
}

/// Whether the components `t_{w(nu)} T` are pairwise distinct over `W`.
pub fn components_disjoint(rd: &RootDatum, nu: &[i64]) -> Result<bool> {
    let w = rd.weyl_group()?;
    let pts: BTreeSet<Vector> = w.iter().map(|x| x.act_dual(nu)).collect();
    Ok(pts.len() == w.len())
}

/// Dominant regular `nu` with `|nu_i| <= k`, together with those having
/// `<alpha, nu> <= k` for simple `alpha` and `|<x, nu>| <= k` for a basis of
/// the characters orthogonal to all coroots.
pub fn dominant_regular_box(rd: &RootDatum, k: i64) -> Vec<Vector> {
    let n = rd.rank();
    let central = lattice::integer_kernel(rd.coroots(), n);
    let bound = 4 * k * n as i64;
    let mut out = BTreeSet::new();
    let mut cur = vec![-bound; n];
    if n == 0 {
        return vec![Vec::new()];
    }
    loop {
        if is_dominant_regular(rd, &cur) {
            let in_cube = cur.iter().all(|x| x.abs() <= k);
            let in_slab = rd.simple().iter().all(|&i| dot(rd.root(i), &cur) <= k)
                && central.iter().all(|x| dot(x, &cur).abs() <= k);
            if in_cube || in_slab {
                out.insert(cur.clone());
            }
        }
        let mut i = 0;
        loop {
            if i == n {
                return out.into_iter().collect();
            }
            if cur[i] < bound {
                cur[i] += 1;
                break;
            }
            cur[i] = -bound;
            i += 1;
        }
    }
}

/// Context for profile computations attached to `(psi0, chi0)`.
pub struct OrbitalSetup<'a> {
    pub rd: &'a RootDatum,
    pub endo: &'a EndoscopicDatum,
    pub psi0: DepthZeroCharacter,
    pub chi0: DepthZeroCharacter,
    full: AffineSystem,
    prime: AffineSystem,
    field: Arc<CycloField>,
}

/// `(char, coeff)` pairs at one component, in wire form.
pub type WireValues = Vec<(Vector, Vec<(i64, Vec<String>)>)>;

#[derive(Debug, Clone, Serialize)]
pub struct ProfileWitness {
    pub component: Vector,
    pub lhs: WireValues,
    pub rhs: WireValues,
}

#[derive(Debug, Clone, Serialize)]
pub struct MatchingReport {
    pub nu: Vector,
    pub components: usize,
    pub disjoint: bool,
    pub pass: bool,
    pub witness: Option<ProfileWitness>,
}

fn witness_side(p: &TorusOrbitalProfile, mu: &[i64]) -> WireValues {
    p.at(mu)
        .into_iter()
        .map(|(c, v)| (c, v.to_pairs()))
        .collect()
}

/// First component where two profiles differ.
pub fn compare_profiles(
    a: &TorusOrbitalProfile,
    b: &TorusOrbitalProfile,
) -> Option<ProfileWitness> {
    let keys: BTreeSet<&Vector> = a.components().chain(b.components()).collect();
    keys.into_iter()
        .find(|mu| a.entries.get(*mu) != b.entries.get(*mu))
        .map(|mu| ProfileWitness {
            component: mu.clone(),
            lhs: witness_side(a, mu),
            rhs: witness_side(b, mu),
        })
}

impl<'a> OrbitalSetup<'a> {
    pub fn new(rd: &'a RootDatum, endo: &'a EndoscopicDatum, psi0: &DepthZeroCharacter) -> Self {
        OrbitalSetup {
            rd,
            endo,
            psi0: psi0.clone(),
            chi0: endo.chi0.clone(),
            full: AffineSystem::full(rd),
            prime: AffineSystem::new(rd, &endo.phi_prime),
            field: CycloField::new(endo.chi0.modulus()),
        }
    }

    pub fn field(&self) -> &Arc<CycloField> {
        &self.field
    }

    pub fn prime_system(&self) -> &AffineSystem {
        &self.prime
    }

    pub fn l(&self, mu: &[i64]) -> i64 {
        self.full.translation_length(mu) as i64
    }

    pub fn l_prime(&self, mu: &[i64]) -> i64 {
        self.prime.translation_length(mu) as i64
    }

    fn require_regular(&self, nu: &[i64]) -> Result<()> {
        if nu.len() != self.rd.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rd.rank(),
                got: nu.len(),
            });
        }
        if !is_dominant_regular(self.rd, nu) {
            return Err(Error::NotDominantRegular(nu.to_vec()));
        }
        Ok(())
    }

    /// The unique `w'` in `W'` carrying `Phi' ∩ w(Phi_+)` onto `Phi'_+`, and
    /// `w~ = w' w`.
    pub fn dominantize_in_gprime(&self, w: &WeylElement) -> Result<(WeylElement, WeylElement)> {
        let winv = w.inverse();
        let target: BTreeSet<usize> = self.endo.phi_prime_pos.iter().copied().collect();
        let chamber: Vec<usize> = self
            .endo
            .phi_prime
            .iter()
            .copied()
            .filter(|&i| {
                self.rd
                    .root_index(&winv.act(self.rd.root(i)))
                    .is_some_and(|j| self.rd.is_positive(j))
            })
            .collect();
        let hits: Vec<&WeylElement> = self
            .endo
            .w_prime
            .iter()
            .filter(|x| {
                let img: Option<BTreeSet<usize>> = chamber
                    .iter()
                    .map(|&i| self.rd.root_index(&x.act(self.rd.root(i))))
                    .collect();
                img.as_ref() == Some(&target)
            })
            .collect();
        if hits.len() != 1 {
            return Err(Error::Internal(format!(
                "{} elements of W' align the chamber",
                hits.len()
            )));
        }
        let wp = hits[0].clone();
        let wt = wp.compose(w);
        Ok((wp, wt))
    }

    /// Profile of the elementary function `f_nu` on `G`.
    pub fn elementary_profile_g(&self, nu: &[i64]) -> Result<TorusOrbitalProfile> {
        self.require_regular(nu)?;
        let theta = self.psi0.add(&self.chi0);
        let coeff = half_power(&self.field, -self.l(nu));
        let mut p = TorusOrbitalProfile::new(&self.field);
        for w in self.rd.weyl_group()?.iter() {
            let other = single(&self.field, w.act_dual(nu), &theta.act(w).neg(), &coeff);
            if !p.absorb(&other) {
                return Err(Error::NotDominantRegular(nu.to_vec()));
            }
        }
        Ok(p)
    }

    /// Profile of `f'_{w, nu}` on `G'`.
    pub fn elementary_profile_gprime(
        &self,
        nu: &[i64],
        w: &WeylElement,
        mode: GPrimePrefactor,
    ) -> Result<TorusOrbitalProfile> {
        self.require_regular(nu)?;
        let (_, wt) = self.dominantize_in_gprime(w)?;
        let nut = wt.act_dual(nu);
        let xi = character_translate(&wt, &self.psi0, &self.chi0);
        let l = match mode {
            GPrimePrefactor::Uniform => self.l_prime(nu),
            GPrimePrefactor::PerW => self.l_prime(&nut),
        };
        let coeff = half_power(&self.field, -l);
        let mut p = TorusOrbitalProfile::new(&self.field);
        for x in &self.endo.w_prime {
            let other = single(&self.field, x.act_dual(&nut), &xi.act(x).neg(), &coeff);
            if !p.absorb(&other) {
                return Err(Error::NotDominantRegular(nu.to_vec()));
            }
        }
        Ok(p)
    }

    /// `v^{l(t_mu) - l'(t_mu)}`.
    pub fn delta_diagonal(&self, mu: &[i64]) -> CycloLaurent {
        half_power(&self.field, self.l(mu) - self.l_prime(mu))
    }

    /// Coset representatives `w~` of `W' \ W`, in canonical order.
    pub fn dominantized_representatives(&self) -> Result<Vec<WeylElement>> {
        let mut reps = BTreeSet::new();
        for w in self.rd.weyl_group()?.iter() {
            reps.insert(self.dominantize_in_gprime(w)?.1);
        }
        Ok(reps.into_iter().collect())
    }

    /// `chi . Delta . O(f_nu)` against `sum_{W' \ W} O(f'_{w~, nu})`.
    pub fn matching_check(&self, nu: &[i64], mode: GPrimePrefactor) -> Result<MatchingReport> {
        let g = self.elementary_profile_g(nu)?;
        let mut lhs = TorusOrbitalProfile::new(&self.field);
        for (mu, chars) in g.entries() {
            let d = self.delta_diagonal(mu);
            for (chr, c) in chars {
                let twisted = DepthZeroCharacter::new(self.field.order(), chr).add(&self.chi0);
                lhs.add_entry(mu.clone(), &twisted, &(c * &d));
            }
        }
        let mut rhs = TorusOrbitalProfile::new(&self.field);
        let mut disjoint = true;
        for wt in self.dominantized_representatives()? {
            disjoint &= rhs.absorb(&self.elementary_profile_gprime(nu, &wt, mode)?);
        }
        let witness = compare_profiles(&lhs, &rhs);
        Ok(MatchingReport {
            nu: nu.to_vec(),
            components: lhs.entries.len(),
            disjoint,
            pass: disjoint && witness.is_none(),
            witness,
        })
    }

    /// `v^{+-l(t_nu)} sum mult e^{w^{-1}(nu)}`.
    pub fn trace_g(
        &self,
        nu: &[i64],
        exponents: &[(WeylElement, u64)],
        mode: GPrefactor,
    ) -> DualTorusPoly {
        let l = self.l(nu);
        let pre = half_power(
            &self.field,
            match mode {
                GPrefactor::Verbatim => l,
                GPrefactor::Negated => -l,
            },
        );
        let mut p = DualTorusPoly::zero(&self.field);
        for (w, mult) in exponents {
            p.add_term(
                w.inverse().act_dual(nu),
                &pre.scale(&Cyclotomic::from_integer(&self.field, *mult as i64)),
            );
        }
        p
    }

    /// `sum_w prefactor_w sum_u mult e^{u^{-1} w~(nu)}`, one group of
    /// exponents per coset representative `w`.
    pub fn trace_gprime(
        &self,
        nu: &[i64],
        per_w: &[(WeylElement, Vec<(WeylElement, u64)>)],
        mode: GPrimePrefactor,
    ) -> Result<DualTorusPoly> {
        let mut p = DualTorusPoly::zero(&self.field);
        for (w, exps) in per_w {
            let (_, wt) = self.dominantize_in_gprime(w)?;
            let nut = wt.act_dual(nu);
            let l = match mode {
                GPrimePrefactor::Uniform => self.l_prime(nu),
                GPrimePrefactor::PerW => self.l_prime(&nut),
            };
            let pre = half_power(&self.field, -l);
            for (u, mult) in exps {
                p.add_term(
                    u.inverse().act_dual(&nut),
                    &pre.scale(&Cyclotomic::from_integer(&self.field, *mult as i64)),
                );
            }
        }
        Ok(p)
    }

    /// Spectral route for a regular character: `xi_transfer(e^nu)` read as a
    /// profile against the sum of the `G'` profiles after the twist.
    pub fn regular_case_crosscheck(&self, nu: &[i64]) -> Result<MatchingReport> {
        if !self.endo.phi_prime.is_empty() {
            return Err(Error::RegularCaseOnly(
                "the endoscopic subsystem is not empty".into(),
            ));
        }
        self.require_regular(nu)?;
        let w = self.rd.weyl_group()?;
        let theta = self.psi0.add(&self.chi0);
        if stabilizer(&w, &theta).len() != 1 {
            return Err(Error::RegularCaseOnly(
                "psi0 chi0 has a nontrivial stabilizer, so e^nu is not a center element".into(),
            ));
        }
        let setup = TransferSetup::new(self.rd, self.endo, &self.psi0);
        let f = setup.g_element(&DualTorusPoly::monomial(
            nu.to_vec(),
            CycloLaurent::one(&self.field),
        ))?;
        let pkg = setup.xi_transfer(&f)?;
        let mut lhs = TorusOrbitalProfile::new(&self.field);
        for (label, poly) in &pkg.entries {
            for (mu, a) in poly.terms() {
                lhs.add_entry(mu.clone(), &label.base.neg(), a);
            }
        }
        let mut rhs = TorusOrbitalProfile::new(&self.field);
        let mut disjoint = true;
        for x in w.iter() {
            let prof = self.elementary_profile_gprime(nu, x, GPrimePrefactor::PerW)?;
            let mut shifted = TorusOrbitalProfile::new(&self.field);
            for (mu, chars) in prof.entries() {
                for (chr, c) in chars {
                    let t = DepthZeroCharacter::new(self.field.order(), chr).sub(&self.chi0);
                    shifted.add_entry(mu.clone(), &t, c);
                }
            }
            disjoint &= rhs.absorb(&shifted);
        }
        let witness = compare_profiles(&lhs, &rhs);
        Ok(MatchingReport {
            nu: nu.to_vec(),
            components: lhs.entries.len(),
            disjoint,
            pass: disjoint && witness.is_none(),
            witness,
        })
    }
}

fn single(
    field: &Arc<CycloField>,
    mu: Vector,
    chr: &DepthZeroCharacter,
    coeff: &CycloLaurent,
) -> TorusOrbitalProfile {
    let mut p = TorusOrbitalProfile::new(field);
    p.add_entry(mu, chr, coeff);
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::depth_zero::endoscopic_datum;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn data(name: &str, m: u64, c: &[i64]) -> (RootDatum, EndoscopicDatum) {
        let rd = RootDatum::preset(name).unwrap();
        let e = endoscopic_datum(&rd, &DepthZeroCharacter::new(m, c)).unwrap();
        (rd, e)
    }

    fn triv(rd: &RootDatum, m: u64) -> DepthZeroCharacter {
        DepthZeroCharacter::trivial(m, rd.rank())
    }

    #[test]
    fn dominantize_examples() {
        let (rd, e) = data("C2", 4, &[2, 2]);
        let s = OrbitalSetup::new(&rd, &e, &triv(&rd, 4));
        let id = WeylElement::identity(2);
        assert_eq!(
            s.dominantize_in_gprime(&id).unwrap(),
            (id.clone(), id.clone())
        );
        for x in &e.w_prime {
            assert!(s.dominantize_in_gprime(x).unwrap().1.is_identity());
        }
        let eps1 = WeylElement::from_matrix(vec![vec![-1, 0], vec![0, 1]]).unwrap();
        let minus = WeylElement::from_matrix(vec![vec![-1, 0], vec![0, -1]]).unwrap();
        let (wp, wt) = s.dominantize_in_gprime(&eps1).unwrap();
        assert_eq!(wp, minus);
        assert_eq!(wt, minus.compose(&eps1));
    }

    #[test]
    fn g_profile_examples() {
        let (rd, e) = data("SL2", 4, &[2]);
        let s = OrbitalSetup::new(&rd, &e, &triv(&rd, 4));
        let f = s.field().clone();
        let p = s.elementary_profile_g(&[1]).unwrap();
        assert_eq!(p.at(&[1]), vec![(vec![2], half_power(&f, -2))]);
        assert_eq!(p.value(&[1], &[0]), half_power(&f, -2));
        assert!(matches!(
            s.elementary_profile_g(&[0]),
            Err(Error::NotDominantRegular(_))
        ));
        assert!(matches!(
            s.elementary_profile_g(&[-1]),
            Err(Error::NotDominantRegular(_))
        ));
    }

    #[test]
    fn profile_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (name, m, c, p) in [
            ("C2", 4, vec![2, 2], vec![1, 0]),
            ("GL3", 6, vec![0, 0, 2], vec![1, 2, 0]),
        ] {
            let (rd, e) = data(name, m, &c);
            let s = OrbitalSetup::new(&rd, &e, &DepthZeroCharacter::new(m, &p));
            let w = rd.weyl_group().unwrap();
            for nu in dominant_regular_box(&rd, 2).into_iter().take(6) {
                let g = s.elementary_profile_g(&nu).unwrap();
                let gp = s
                    .elementary_profile_gprime(
                        &nu,
                        &w[rng.gen_range(0..w.len())],
                        GPrimePrefactor::PerW,
                    )
                    .unwrap();
                for _ in 0..10 {
                    let u: Vec<i64> = (0..rd.rank()).map(|_| rng.gen_range(0..m as i64)).collect();
                    let x = &w[rng.gen_range(0..w.len())];
                    let mu = g
                        .components()
                        .nth(rng.gen_range(0..w.len()))
                        .unwrap()
                        .clone();
                    assert_eq!(
                        g.value(&x.act_dual(&mu), &x.act_dual_mod(&u, m)),
                        g.value(&mu, &u)
                    );
                    let y = &e.w_prime[rng.gen_range(0..e.w_prime.len())];
                    for mu in gp.components() {
                        assert_eq!(
                            gp.value(&y.act_dual(mu), &y.act_dual_mod(&u, m)),
                            gp.value(mu, &u)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn gprime_profile_examples() {
        let (rd, e) = data("GL3", 1, &[0, 0, 0]);
        let s = OrbitalSetup::new(&rd, &e, &triv(&rd, 1));
        let nu = [2, 1, 0];
        let id = WeylElement::identity(3);
        let gp = s
            .elementary_profile_gprime(&nu, &id, GPrimePrefactor::PerW)
            .unwrap();
        assert!(gp
            .entries()
            .all(|(_, m)| m.keys().all(|c| c.iter().all(|&x| x == 0))));
        assert_eq!(gp, s.elementary_profile_g(&nu).unwrap());

        let (rd, e) = data("GL3", 6, &[0, 0, 2]);
        let s = OrbitalSetup::new(&rd, &e, &triv(&rd, 6));
        let f = s.field().clone();
        for x in &e.w_prime {
            assert_eq!(
                s.elementary_profile_gprime(&nu, x, GPrimePrefactor::PerW)
                    .unwrap(),
                s.elementary_profile_gprime(&nu, &id, GPrimePrefactor::PerW)
                    .unwrap()
            );
        }
        let gp = s
            .elementary_profile_gprime(&nu, &rd.simple_reflection(1), GPrimePrefactor::PerW)
            .unwrap();
        assert_eq!(gp.at(&[2, 0, 1])[0].1, half_power(&f, -2));
    }

    #[test]
    fn delta_examples() {
        let (rd, e) = data("GL3", 1, &[0, 0, 0]);
        let s = OrbitalSetup::new(&rd, &e, &triv(&rd, 1));
        assert_eq!(s.delta_diagonal(&[3, -1, 0]), CycloLaurent::one(s.field()));
        let (rd, e) = data("SL2", 4, &[2]);
        let s = OrbitalSetup::new(&rd, &e, &triv(&rd, 4));
        assert_eq!(s.delta_diagonal(&[1]), half_power(s.field(), 2));
        let (rd, e) = data("GL3", 6, &[0, 0, 2]);
        let s = OrbitalSetup::new(&rd, &e, &triv(&rd, 6));
        assert_eq!(s.delta_diagonal(&[2, 1, 0]), half_power(s.field(), 3));
        for x in &e.w_prime {
            assert_eq!(
                s.delta_diagonal(&x.act_dual(&[2, 1, 0])),
                s.delta_diagonal(&[2, 1, 0])
            );
        }
        let s23 = rd.simple_reflection(1);
        let mu = [2, 1, 0];
        assert_eq!(
            s.delta_diagonal(&s23.act_dual(&mu)),
            half_power(s.field(), s.l(&mu) - s.l_prime(&s23.act_dual(&mu)))
        );
    }

    #[test]
    fn matching_examples() {
        let (rd, e) = data("GL3", 1, &[0, 0, 0]);
        let s = OrbitalSetup::new(&rd, &e, &triv(&rd, 1));
        assert!(
            s.matching_check(&[2, 1, 0], GPrimePrefactor::PerW)
                .unwrap()
                .pass
        );

        let (rd, e) = data("SL2", 4, &[2]);
        let s = OrbitalSetup::new(&rd, &e, &triv(&rd, 4));
        for nu in 1..=3 {
            let r = s.matching_check(&[nu], GPrimePrefactor::PerW).unwrap();
            assert!(r.pass, "{r:?}");
        }

        let (rd, e) = data("C2", 4, &[2, 2]);
        let s = OrbitalSetup::new(&rd, &e, &triv(&rd, 4));
        for nu in dominant_regular_box(&rd, 3) {
            assert!(s.matching_check(&nu, GPrimePrefactor::PerW).unwrap().pass);
        }

        // the uniform prefactor breaks matching where the length lemma fails
        let (rd, e) = data("GL3", 6, &[0, 0, 2]);
        let s = OrbitalSetup::new(&rd, &e, &triv(&rd, 6));
        assert!(
            s.matching_check(&[2, 1, 0], GPrimePrefactor::PerW)
                .unwrap()
                .pass
        );
        let r = s
            .matching_check(&[2, 1, 0], GPrimePrefactor::Uniform)
            .unwrap();
        assert!(!r.pass);
        assert!(r.witness.is_some());
    }

    #[test]
    fn disjointness_both_ways() {
        for name in crate::rootdata::PRESETS {
            let rd = RootDatum::preset(name).unwrap();
            for nu in dominant_regular_box(&rd, 2) {
                assert!(components_disjoint(&rd, &nu).unwrap());
            }
            assert!(!components_disjoint(&rd, &vec![0; rd.rank()]).unwrap());
        }
        let rd = RootDatum::preset("GL3").unwrap();
        assert!(!components_disjoint(&rd, &[1, 1, 0]).unwrap());
    }

    #[test]
    fn box_contents() {
        let sl2 = RootDatum::preset("SL2").unwrap();
        assert_eq!(
            dominant_regular_box(&sl2, 3),
            vec![vec![1], vec![2], vec![3]]
        );
        let c2 = RootDatum::preset("C2").unwrap();
        let b = dominant_regular_box(&c2, 3);
        assert!(b.contains(&vec![4, 1]));
        assert!(b.contains(&vec![3, 2]));
        let gl3 = RootDatum::preset("GL3").unwrap();
        assert!(dominant_regular_box(&gl3, 3)
            .iter()
            .all(|nu| is_dominant_regular(&gl3, nu)));
    }

    #[test]
    fn trace_examples() {
        let (rd, e) = data("SL2", 4, &[2]);
        let s = OrbitalSetup::new(&rd, &e, &triv(&rd, 4));
        let f = s.field().clone();
        let id = WeylElement::identity(1);
        let sr = rd.simple_reflection(0);
        let t = s.trace_g(&[1], &[(id.clone(), 1)], GPrefactor::Verbatim);
        assert_eq!(t, DualTorusPoly::monomial(vec![1], half_power(&f, 2)));
        let t = s.trace_g(
            &[1],
            &[(id.clone(), 1), (sr.clone(), 1)],
            GPrefactor::Verbatim,
        );
        let expect = DualTorusPoly::monomial(vec![1], half_power(&f, 2))
            .add(&DualTorusPoly::monomial(vec![-1], half_power(&f, 2)));
        assert_eq!(t, expect);
        let t3 = s.trace_g(
            &[1],
            &[(id.clone(), 3), (sr.clone(), 3)],
            GPrefactor::Verbatim,
        );
        assert_eq!(t3, expect.scale(&CycloLaurent::from_integer(&f, 3)));

        assert!(s
            .trace_gprime(&[1], &[], GPrimePrefactor::Uniform)
            .unwrap()
            .is_zero());

        // Phi' = Phi reduces to the negated G-side convention
        let (rd, e) = data("C2", 4, &[0, 0]);
        let s = OrbitalSetup::new(&rd, &e, &triv(&rd, 4));
        let w = rd.weyl_group().unwrap();
        let exps: Vec<(WeylElement, u64)> = w.iter().map(|x| (x.clone(), 2)).collect();
        let lhs = s
            .trace_gprime(
                &[2, 1],
                &[(WeylElement::identity(2), exps.clone())],
                GPrimePrefactor::Uniform,
            )
            .unwrap();
        assert_eq!(lhs, s.trace_g(&[2, 1], &exps, GPrefactor::Negated));
    }

    #[test]
    fn trace_modes_differ_exactly_where_lengths_do() {
        let (rd, e) = data("GL3", 6, &[0, 0, 2]);
        let s = OrbitalSetup::new(&rd, &e, &triv(&rd, 6));
        let id = WeylElement::identity(3);
        for nu in dominant_regular_box(&rd, 2) {
            for w in s.dominantized_representatives().unwrap() {
                let per = [(w.clone(), vec![(id.clone(), 1)])];
                let a = s.trace_gprime(&nu, &per, GPrimePrefactor::Uniform).unwrap();
                let b = s.trace_gprime(&nu, &per, GPrimePrefactor::PerW).unwrap();
                let rep = s
                    .prime_system()
                    .check_translation_length_w_invariance(&nu, &w);
                assert_eq!(a == b, rep.equal);
            }
        }
    }

    #[test]
    fn regular_case() {
        let (rd, e) = data("SL2", 4, &[1]);
        let s = OrbitalSetup::new(&rd, &e, &triv(&rd, 4));
        let r = s.regular_case_crosscheck(&[1]).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.components, 2);

        let (rd, e) = data("GL2", 4, &[1, 0]);
        let s = OrbitalSetup::new(&rd, &e, &triv(&rd, 4));
        assert!(s.regular_case_crosscheck(&[2, 0]).unwrap().pass);

        let (rd, e) = data("SL2", 4, &[2]);
        let s = OrbitalSetup::new(&rd, &e, &triv(&rd, 4));
        assert!(matches!(
            s.regular_case_crosscheck(&[1]),
            Err(Error::RegularCaseOnly(_))
        ));
        let (rd, e) = data("C2", 4, &[2, 2]);
        let s = OrbitalSetup::new(&rd, &e, &triv(&rd, 4));
        assert!(matches!(
            s.regular_case_crosscheck(&[2, 1]),
            Err(Error::RegularCaseOnly(_))
        ));
    }
}
