//! Bernstein-center coordinate rings as Weyl-invariant Laurent polynomials
//! on the dual torus, and the transfer morphisms between them.
//!
//! Every morphism is a monomial relabeling `e^nu -> e^{w(nu)}` followed by a
//! change of chart. A block is stored in the chart of its lex-minimal orbit
//! representative; a polynomial attached to an arbitrary orbit point `theta`
//! (its raw chart) is moved there by the canonicalizing element.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::depth_zero::{
    block_label_with_canonicalizer, character_translate, double_coset_count, endoscopic_datum,
    stabilizer, BlockLabel, DepthZeroCharacter, EndoscopicDatum, Side,
};
use crate::error::{Error, Result};
use crate::rootdata::{RootDatum, Vector, WeylElement};
use crate::scalars::{CycloField, CycloLaurent};

/// Finite sum of monomials `e^nu`, `nu` in `X^`, with `CycloLaurent`
/// coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct DualTorusPoly {
    field: Arc<CycloField>,
    terms: BTreeMap<Vector, CycloLaurent>,
}

impl DualTorusPoly {
    pub fn zero(field: &Arc<CycloField>) -> Self {
        DualTorusPoly {
            field: field.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(nu: Vector, c: CycloLaurent) -> Self {
        let mut p = Self::zero(c.field());
        p.add_term(nu, &c);
        p
    }

    pub fn one(field: &Arc<CycloField>, n: usize) -> Self {
        Self::monomial(vec![0; n], CycloLaurent::one(field))
    }

    pub fn field(&self) -> &Arc<CycloField> {
        &self.field
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vector, &CycloLaurent)> {
        self.terms.iter()
    }

    pub fn coeff(&self, nu: &[i64]) -> Option<&CycloLaurent> {
        self.terms.get(nu)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, nu: Vector, c: &CycloLaurent) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&nu) {
            Some(cur) => {
                let s = &*cur + c;
                if s.is_zero() {
                    self.terms.remove(&nu);
                } else {
                    *cur = s;
                }
            }
            None => {
                self.terms.insert(nu, c.clone());
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (nu, c) in &other.terms {
            out.add_term(nu.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale_rational(&BigRational::from_integer(BigInt::from(-1))))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(&self.field);
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                out.add_term(crate::rootdata::add(a, b), &(x * y));
            }
        }
        out
    }

    pub fn scale(&self, c: &CycloLaurent) -> Self {
        let mut out = Self::zero(&self.field);
        for (nu, a) in &self.terms {
            out.add_term(nu.clone(), &(a * c));
        }
        out
    }

    pub fn scale_rational(&self, r: &BigRational) -> Self {
        let mut out = Self::zero(&self.field);
        for (nu, a) in &self.terms {
            out.add_term(nu.clone(), &a.scale_rational(r));
        }
        out
    }

    /// `e^nu -> e^{w(nu)}`.
    pub fn weyl_act(&self, w: &WeylElement) -> Self {
        DualTorusPoly {
            field: self.field.clone(),
            terms: self
                .terms
                .iter()
                .map(|(nu, c)| (w.act_dual(nu), c.clone()))
                .collect(),
        }
    }

    pub fn is_invariant(&self, group: &[WeylElement]) -> bool {
        group.iter().all(|w| self.weyl_act(w) == *self)
    }

    /// Sum of `e^mu` over the distinct points `mu` of the orbit of `nu`.
    pub fn orbit_sum(field: &Arc<CycloField>, nu: &[i64], group: &[WeylElement]) -> Self {
        let mut out = Self::zero(field);
        let pts: std::collections::BTreeSet<Vector> =
            group.iter().map(|w| w.act_dual(nu)).collect();
        for p in pts {
            out.add_term(p, &CycloLaurent::one(field));
        }
        out
    }

    /// Group average.
    pub fn reynolds(&self, group: &[WeylElement]) -> Self {
        let mut acc = Self::zero(&self.field);
        for w in group {
            acc = acc.add(&self.weyl_act(w));
        }
        acc.scale_rational(&BigRational::new(
            BigInt::from(1),
            BigInt::from(group.len()),
        ))
    }
}

impl fmt::Debug for DualTorusPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(nu, c)| format!("[{}]e^{:?}", c, nu))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// A polynomial in the canonical chart of a block, invariant under the
/// block's stabilizer.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CenterElement {
    pub block: BlockLabel,
    pub poly: DualTorusPoly,
}

fn group_for<'a>(
    rd: &RootDatum,
    side: Side,
    endo: Option<&'a EndoscopicDatum>,
    holder: &'a mut Option<Arc<Vec<WeylElement>>>,
) -> Result<&'a [WeylElement]> {
    match side {
        Side::G => {
            *holder = Some(rd.weyl_group()?);
            Ok(holder.as_ref().unwrap())
        }
        Side::GPrime => Ok(&endo
            .ok_or_else(|| Error::Internal("side G' needs an endoscopic datum".into()))?
            .w_prime),
    }
}

impl CenterElement {
    /// Element of the block of `raw_char`, given by a polynomial in the raw
    /// chart of `raw_char`.
    pub fn from_raw(
        rd: &RootDatum,
        side: Side,
        endo: Option<&EndoscopicDatum>,
        raw_char: &DepthZeroCharacter,
        raw_poly: &DualTorusPoly,
    ) -> Result<Self> {
        let (block, u) = block_label_with_canonicalizer(rd, side, raw_char, endo)?;
        let poly = raw_poly.weyl_act(&u);
        if !poly.is_invariant(&block.stabilizer) {
            return Err(Error::NotCenterElement(format!(
                "polynomial is not invariant under the stabilizer of {:?}",
                block.base
            )));
        }
        Ok(CenterElement { block, poly })
    }

    /// The polynomial in the raw chart of an orbit point of the block.
    pub fn raw_poly(
        &self,
        rd: &RootDatum,
        endo: Option<&EndoscopicDatum>,
        raw_char: &DepthZeroCharacter,
    ) -> Result<DualTorusPoly> {
        let mut holder = None;
        let group = group_for(rd, self.block.side, endo, &mut holder)?;
        let u = group
            .iter()
            .find(|g| raw_char.act(g) == self.block.base)
            .ok_or_else(|| {
                Error::NotCenterElement(format!(
                    "{raw_char:?} is not in the block of {:?}",
                    self.block.base
                ))
            })?;
        Ok(self.poly.weyl_act(&u.inverse()))
    }
}

/// Entries indexed by `G'`-side block labels.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TransferPackage {
    pub entries: BTreeMap<BlockLabel, DualTorusPoly>,
}

impl TransferPackage {
    pub fn block_count(&self) -> usize {
        self.entries.len()
    }
}

/// Everything needed to move between the `G`-blocks of `psi0 chi0` and the
/// `G'`-blocks of the characters `xi_{w,0}`.
#[derive(Clone)]
pub struct TransferSetup<'a> {
    pub rd: &'a RootDatum,
    pub endo: &'a EndoscopicDatum,
    pub psi0: DepthZeroCharacter,
    pub chi0: DepthZeroCharacter,
}

impl<'a> TransferSetup<'a> {
    pub fn new(rd: &'a RootDatum, endo: &'a EndoscopicDatum, psi0: &DepthZeroCharacter) -> Self {
        TransferSetup {
            rd,
            endo,
            psi0: psi0.clone(),
            chi0: endo.chi0.clone(),
        }
    }

    /// `c_psi + c_chi`.
    pub fn theta(&self) -> DepthZeroCharacter {
        self.psi0.add(&self.chi0)
    }

    /// Center element on the `G`-block of `psi0 chi0` from a polynomial in
    /// the raw chart of `c_psi + c_chi`.
    pub fn g_element(&self, raw_poly: &DualTorusPoly) -> Result<CenterElement> {
        CenterElement::from_raw(self.rd, Side::G, None, &self.theta(), raw_poly)
    }

    fn g_raw(&self, f: &CenterElement) -> Result<DualTorusPoly> {
        if f.block.side != Side::G {
            return Err(Error::NotCenterElement("expected a G-side block".into()));
        }
        let raw = f.raw_poly(self.rd, None, &self.theta())?;
        let w = self.rd.weyl_group()?;
        let stab = stabilizer(&w, &self.theta());
        if !raw.is_invariant(&stab) {
            return Err(Error::NotCenterElement(
                "polynomial is not invariant under the stabilizer of psi0 chi0".into(),
            ));
        }
        Ok(raw)
    }

    fn g_prime(&self, raw_char: &DepthZeroCharacter, raw: &DualTorusPoly) -> Result<CenterElement> {
        CenterElement::from_raw(self.rd, Side::GPrime, Some(self.endo), raw_char, raw)
    }

    /// `zeta_{w, chi}`: the `G'`-block of `xi_{w,0}`, polynomial `w . f`.
    pub fn zeta_w(&self, f: &CenterElement, w: &WeylElement) -> Result<CenterElement> {
        let raw = self.g_raw(f)?;
        self.zeta_w_raw(&raw, w)
    }

    fn zeta_w_raw(&self, raw: &DualTorusPoly, w: &WeylElement) -> Result<CenterElement> {
        let xi = character_translate(w, &self.psi0, &self.chi0);
        self.g_prime(&xi, &raw.weyl_act(w))
    }

    /// `|W'|^{-1} sum_{w in W} zeta_w(f)`, aggregated by block.
    pub fn bold_zeta(&self, f: &CenterElement) -> Result<TransferPackage> {
        let raw = self.g_raw(f)?;
        let w = self.rd.weyl_group()?;
        let parts: Vec<CenterElement> = w
            .par_iter()
            .map(|x| self.zeta_w_raw(&raw, x))
            .collect::<Result<_>>()?;
        let mut entries: BTreeMap<BlockLabel, DualTorusPoly> = BTreeMap::new();
        for p in parts {
            let slot = entries
                .entry(p.block)
                .or_insert_with(|| DualTorusPoly::zero(raw.field()));
            *slot = slot.add(&p.poly);
        }
        let hit = entries.len();
        let expected = double_coset_count(&self.endo.w_prime, &w, &stabilizer(&w, &self.theta()));
        if hit != expected {
            return Err(Error::Internal(format!(
                "{hit} blocks but {expected} double cosets"
            )));
        }
        let inv = BigRational::new(BigInt::from(1), BigInt::from(self.endo.w_prime.len()));
        let entries = entries
            .into_iter()
            .map(|(k, p)| (k, p.scale_rational(&inv)))
            .filter(|(_, p)| !p.is_zero())
            .collect();
        Ok(TransferPackage { entries })
    }

    /// Shift every block base by `shift`, re-canonicalized under `W'`.
    pub fn omega_twist(
        &self,
        pkg: &TransferPackage,
        shift: &DepthZeroCharacter,
    ) -> Result<TransferPackage> {
        let mut entries = BTreeMap::new();
        for (label, poly) in &pkg.entries {
            let raw_char = label.base.add(shift);
            // W' fixes chi0, so the stabilizer and chart carry over verbatim
            let e = self.g_prime(&raw_char, poly)?;
            if entries.insert(e.block, e.poly).is_some() {
                return Err(Error::Internal("twist merged two blocks".into()));
            }
        }
        Ok(TransferPackage { entries })
    }

    /// `(omega'_chi)^{-1} bold_zeta(f)`, landing in blocks of `w(psi0 chi0)`.
    pub fn xi_transfer(&self, f: &CenterElement) -> Result<TransferPackage> {
        let z = self.bold_zeta(f)?;
        self.omega_twist(&z, &self.chi0)
    }

    /// `{w}'`, `[w']'_w`, `{w0}'_w`: the polynomial `g . p` from the raw
    /// chart `xi` to the raw chart `target`.
    fn brace(
        &self,
        e: &CenterElement,
        from: &DepthZeroCharacter,
        g: &WeylElement,
        target: &DepthZeroCharacter,
    ) -> Result<CenterElement> {
        let raw = e.raw_poly(self.rd, Some(self.endo), from)?;
        self.g_prime(target, &raw.weyl_act(g))
    }

    pub fn diagram_check(
        &self,
        relation: DiagramRelation,
        f: &CenterElement,
        w: &WeylElement,
        x: &WeylElement,
    ) -> Result<DiagramReport> {
        let xi = |y: &WeylElement| character_translate(y, &self.psi0, &self.chi0);
        let zeta = self.zeta_w(f, &WeylElement::identity(self.rd.rank()))?;
        let (lhs, rhs) = match relation {
            DiagramRelation::ConjLeftWPrime => {
                // zeta_{w'w} o [w'w] = [w']'_w o {w}' o zeta
                if !self.endo.w_prime.contains(x) {
                    return Err(Error::Internal("element is not in W'".into()));
                }
                let xw = x.compose(w);
                let lhs = self.zeta_w(f, &xw)?;
                let mid = self.brace(
                    &zeta,
                    &xi(&WeylElement::identity(self.rd.rank())),
                    w,
                    &xi(w),
                )?;
                let rhs = self.brace(&mid, &xi(w), x, &xi(&xw))?;
                (lhs, rhs)
            }
            DiagramRelation::ConjRightWChi0 => {
                // zeta_{w w0} o [w w0] = zeta_w o [w]
                if !self.endo.w_chi0.contains(x) {
                    return Err(Error::Internal("element is not in W_chi0".into()));
                }
                (self.zeta_w(f, &w.compose(x))?, self.zeta_w(f, w)?)
            }
            DiagramRelation::BraceComposition => {
                // {w w0}' = {w0}'_w o {w}'
                if !self.endo.w_chi0.contains(x) {
                    return Err(Error::Internal("element is not in W_chi0".into()));
                }
                let one = WeylElement::identity(self.rd.rank());
                let wx = w.compose(x);
                let lhs = self.brace(&zeta, &xi(&one), &wx, &xi(&wx))?;
                let mid = self.brace(&zeta, &xi(&one), w, &xi(w))?;
                let conj = w.compose(x).compose(&w.inverse());
                let rhs = self.brace(&mid, &xi(w), &conj, &xi(&wx))?;
                (lhs, rhs)
            }
        };
        Ok(DiagramReport {
            relation,
            equal: lhs == rhs,
            lhs,
            rhs,
        })
    }

    /// Restriction of `f` to a Levi `M` with `W' <= W_M`, followed by the
    /// `M`-level `zeta`, compared with `zeta` on `G`.
    pub fn descent_zeta_check(&self, f: &CenterElement, phi_m: &[usize]) -> Result<bool> {
        let (m_rd, fm) = descent_inclusion(self.rd, f, &self.theta(), phi_m)?;
        let m_endo = endoscopic_datum(&m_rd, &self.chi0)?;
        let m_setup = TransferSetup::new(&m_rd, &m_endo, &self.psi0);
        let one = WeylElement::identity(self.rd.rank());
        let via_m = m_setup.zeta_w(&fm, &one)?;
        let direct = self.zeta_w(f, &one)?;
        Ok(via_m == direct)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagramRelation {
    ConjLeftWPrime,
    ConjRightWChi0,
    BraceComposition,
}

#[derive(Debug, Clone)]
pub struct DiagramReport {
    pub relation: DiagramRelation,
    pub equal: bool,
    pub lhs: CenterElement,
    pub rhs: CenterElement,
}

/// The same polynomial viewed on the `M`-block of `theta`, where `M` is the
/// Levi with roots `phi_m`; returns the datum of `M` with it.
pub fn descent_inclusion(
    rd: &RootDatum,
    f: &CenterElement,
    theta: &DepthZeroCharacter,
    phi_m: &[usize],
) -> Result<(RootDatum, CenterElement)> {
    let levi = rd.levi(phi_m)?;
    let raw = f.raw_poly(rd, None, theta)?;
    let w = rd.weyl_group()?;
    let stab_g = stabilizer(&w, theta);
    let stab_m = stabilizer(&levi.weyl, theta);
    if !stab_m.iter().all(|x| stab_g.contains(x)) {
        return Err(Error::NotCenterElement(
            "Levi stabilizer is not contained in the stabilizer".into(),
        ));
    }
    let m_rd = rd.sub_datum(&levi.root_indices)?;
    let fm = CenterElement::from_raw(&m_rd, Side::G, None, theta, &raw)?;
    Ok((m_rd, fm))
}
