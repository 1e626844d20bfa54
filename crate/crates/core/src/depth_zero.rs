//! Depth-zero characters of the maximal compact torus and the endoscopic
//! data they determine.
//!
//! A character is a vector `c` in `(Z/m)^n`, `m = q - 1`, in coordinates of
//! `X`. Its value at a residue-torus point `u` in `X^ (x) Z/m` is
//! `zeta_m^{<c, u>}`.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rootdata::{dot, reduce_mod, RootDatum, Vector, WeylElement};
use crate::scalars::{CycloField, Cyclotomic};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DepthZeroCharacter {
    m: u64,
    c: Vector,
}

impl DepthZeroCharacter {
    pub fn new(m: u64, c: &[i64]) -> Self {
        assert!(m >= 1, "character modulus must be positive");
        DepthZeroCharacter {
            m,
            c: reduce_mod(c, m),
        }
    }

    pub fn trivial(m: u64, n: usize) -> Self {
        Self::new(m, &vec![0; n])
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    pub fn coords(&self) -> &[i64] {
        &self.c
    }

    pub fn rank(&self) -> usize {
        self.c.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.c.iter().all(|&x| x == 0)
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.m, other.m);
        Self::new(self.m, &crate::rootdata::add(&self.c, &other.c))
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.m, other.m);
        Self::new(self.m, &crate::rootdata::sub(&self.c, &other.c))
    }

    pub fn neg(&self) -> Self {
        Self::new(self.m, &crate::rootdata::neg(&self.c))
    }

    /// `w . chi`, the Weyl action on `X` reduced mod `m`.
    pub fn act(&self, w: &WeylElement) -> Self {
        DepthZeroCharacter {
            m: self.m,
            c: w.act_mod(&self.c, self.m),
        }
    }

    /// Exponent `<c, u> mod m` of the value at `u`.
    pub fn exponent_at(&self, u: &[i64]) -> i64 {
        dot(&self.c, u).rem_euclid(self.m as i64)
    }

    pub fn eval(&self, field: &Arc<CycloField>, u: &[i64]) -> Cyclotomic {
        Cyclotomic::zeta_pow(field, self.exponent_at(u))
    }

    /// Order of the dual-torus point `y -> zeta_m^{<c, y>}`.
    pub fn order(&self) -> u64 {
        let g = self.c.iter().fold(self.m, |acc, &x| acc.gcd(&(x as u64)));
        self.m / g
    }
}

impl fmt::Debug for DepthZeroCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} mod {}", self.c, self.m)
    }
}

/// `Phi' = {alpha : <c, alpha^> = 0 mod m}`.
pub fn endoscopic_subsystem(rd: &RootDatum, chi0: &DepthZeroCharacter) -> Result<Vec<usize>> {
    let m = chi0.modulus() as i64;
    let phi: Vec<usize> = (0..rd.num_roots())
        .filter(|&i| dot(chi0.coords(), rd.coroot(i)).rem_euclid(m) == 0)
        .collect();
    if !rd.coroots_closed(&phi) {
        return Err(Error::Internal("endoscopic coroots are not closed".into()));
    }
    Ok(phi)
}

#[derive(Debug, Clone)]
pub struct StabilizerGroups {
    pub w_prime: Vec<WeylElement>,
    pub w_chi0: Vec<WeylElement>,
    pub c_chi0: Vec<WeylElement>,
}

/// Elements of `group` fixing `chi`.
pub fn stabilizer(group: &[WeylElement], chi: &DepthZeroCharacter) -> Vec<WeylElement> {
    group
        .iter()
        .filter(|w| chi.act(w) == *chi)
        .cloned()
        .collect()
}

/// Whether `w` maps the given positive roots into themselves.
pub fn preserves_roots(rd: &RootDatum, w: &WeylElement, pos: &[usize]) -> bool {
    let set: HashSet<usize> = pos.iter().copied().collect();
    pos.iter().all(|&i| {
        rd.root_index(&w.act(rd.root(i)))
            .is_some_and(|j| set.contains(&j))
    })
}

pub fn stabilizer_groups(rd: &RootDatum, chi0: &DepthZeroCharacter) -> Result<StabilizerGroups> {
    let w = rd.weyl_group()?;
    let w_chi0 = stabilizer(&w, chi0);
    let phi = endoscopic_subsystem(rd, chi0)?;
    let w_prime = rd.reflection_subgroup(&phi)?;
    let pos: Vec<usize> = phi.iter().copied().filter(|&i| rd.is_positive(i)).collect();
    let c_chi0: Vec<WeylElement> = w_chi0
        .iter()
        .filter(|x| preserves_roots(rd, x, &pos))
        .cloned()
        .collect();

    let stab: HashSet<&WeylElement> = w_chi0.iter().collect();
    if !w_prime.iter().all(|x| stab.contains(x)) {
        return Err(Error::SemidirectViolated(
            "W' is not contained in the stabilizer".into(),
        ));
    }
    if w_chi0.len() != w_prime.len() * c_chi0.len() {
        return Err(Error::SemidirectViolated(format!(
            "|W_chi0| = {} but |W'| * |C_chi0| = {} * {}",
            w_chi0.len(),
            w_prime.len(),
            c_chi0.len()
        )));
    }
    let products: HashSet<WeylElement> = w_prime
        .iter()
        .flat_map(|a| c_chi0.iter().map(move |b| a.compose(b)))
        .collect();
    if products.len() != w_chi0.len() || !products.iter().all(|p| stab.contains(p)) {
        return Err(Error::SemidirectViolated(
            "W' x C_chi0 -> W_chi0 is not a bijection".into(),
        ));
    }
    Ok(StabilizerGroups {
        w_prime,
        w_chi0,
        c_chi0,
    })
}

/// The endoscopic datum attached to a depth-zero character.
#[derive(Debug, Clone)]
pub struct EndoscopicDatum {
    pub chi0: DepthZeroCharacter,
    pub phi_prime: Vec<usize>,
    pub phi_prime_pos: Vec<usize>,
    pub gprime: RootDatum,
    pub w_prime: Vec<WeylElement>,
    pub w_chi0: Vec<WeylElement>,
    pub c_chi0: Vec<WeylElement>,
    pub s_element: Vector,
    pub s_order: u64,
}

pub fn endoscopic_datum(rd: &RootDatum, chi0: &DepthZeroCharacter) -> Result<EndoscopicDatum> {
    let phi_prime = endoscopic_subsystem(rd, chi0)?;
    let groups = stabilizer_groups(rd, chi0)?;
    let gprime = rd.sub_datum(&phi_prime)?;
    let phi_prime_pos = phi_prime
        .iter()
        .copied()
        .filter(|&i| rd.is_positive(i))
        .collect();

    // second route: the coroots on which the dual-torus point is trivial
    let field = CycloField::new(chi0.modulus());
    let from_s: Vec<usize> = (0..rd.num_roots())
        .filter(|&i| chi0.eval(&field, rd.coroot(i)).is_one())
        .collect();
    if from_s != phi_prime {
        return Err(Error::Internal(
            "kernel of the s-element disagrees with the endoscopic subsystem".into(),
        ));
    }
    let s_order = chi0.order();
    if !chi0.modulus().is_multiple_of(s_order) {
        return Err(Error::Internal("order of s does not divide m".into()));
    }
    Ok(EndoscopicDatum {
        chi0: chi0.clone(),
        phi_prime,
        phi_prime_pos,
        gprime,
        w_prime: groups.w_prime,
        w_chi0: groups.w_chi0,
        c_chi0: groups.c_chi0,
        s_element: chi0.coords().to_vec(),
        s_order,
    })
}

/// `w(c_psi + c_chi) - c_chi`.
pub fn character_translate(
    w: &WeylElement,
    psi0: &DepthZeroCharacter,
    chi0: &DepthZeroCharacter,
) -> DepthZeroCharacter {
    psi0.add(chi0).act(w).sub(chi0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Side {
    G,
    #[serde(rename = "G'")]
    GPrime,
}

/// Orbit class of a character: lex-minimal representative and its
/// stabilizer, under `W` (side `G`) or `W'` (side `G'`).
#[derive(Clone)]
pub struct BlockLabel {
    pub side: Side,
    pub base: DepthZeroCharacter,
    pub stabilizer: Vec<WeylElement>,
}

impl BlockLabel {
    fn key(&self) -> (Side, &DepthZeroCharacter) {
        (self.side, &self.base)
    }
}

impl PartialEq for BlockLabel {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}
impl Eq for BlockLabel {}
impl std::hash::Hash for BlockLabel {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.key().hash(state);
    }
}
impl PartialOrd for BlockLabel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for BlockLabel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key().cmp(&other.key())
    }
}

impl fmt::Debug for BlockLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?}[{:?}; |stab| = {}]",
            self.side,
            self.base,
            self.stabilizer.len()
        )
    }
}

/// Lex-minimal orbit point and the first group element (in canonical
/// order) carrying `chi` to it.
pub fn canonicalize(
    chi: &DepthZeroCharacter,
    group: &[WeylElement],
) -> (DepthZeroCharacter, WeylElement) {
    let mut best: Option<(DepthZeroCharacter, &WeylElement)> = None;
    for g in group {
        let img = chi.act(g);
        if best.as_ref().is_none_or(|(b, _)| img < *b) {
            best = Some((img, g));
        }
    }
    let (base, u) = best.expect("group is nonempty");
    (base, u.clone())
}

/// Block label together with the canonicalizing element `u`, `u . chi = base`.
pub fn block_label_with_canonicalizer(
    rd: &RootDatum,
    side: Side,
    chi: &DepthZeroCharacter,
    endo: Option<&EndoscopicDatum>,
) -> Result<(BlockLabel, WeylElement)> {
    let w;
    let group: &[WeylElement] = match side {
        Side::G => {
            w = rd.weyl_group()?;
            &w
        }
        Side::GPrime => {
            &endo
                .ok_or_else(|| Error::Internal("side G' needs an endoscopic datum".into()))?
                .w_prime
        }
    };
    let (base, u) = canonicalize(chi, group);
    let stabilizer = stabilizer(group, &base);
    Ok((
        BlockLabel {
            side,
            base,
            stabilizer,
        },
        u,
    ))
}

pub fn block_label(
    rd: &RootDatum,
    side: Side,
    chi: &DepthZeroCharacter,
    endo: Option<&EndoscopicDatum>,
) -> Result<BlockLabel> {
    block_label_with_canonicalizer(rd, side, chi, endo).map(|(l, _)| l)
}

/// Brute-force form of the same-block criterion: some `w'` in `W'` has
/// `w2^{-1} w' w1` in the stabilizer of `c_psi + c_chi`.
pub fn same_block_by_criterion(
    endo: &EndoscopicDatum,
    stab_theta: &[WeylElement],
    w1: &WeylElement,
    w2: &WeylElement,
) -> bool {
    let stab: HashSet<&WeylElement> = stab_theta.iter().collect();
    let w2i = w2.inverse();
    endo.w_prime
        .iter()
        .any(|wp| stab.contains(&w2i.compose(&wp.compose(w1))))
}

/// Number of double cosets `left \ group / right`.
pub fn double_coset_count(
    left: &[WeylElement],
    group: &[WeylElement],
    right: &[WeylElement],
) -> usize {
    let mut seen: HashSet<WeylElement> = HashSet::new();
    let mut count = 0;
    for g in group {
        if seen.contains(g) {
            continue;
        }
        count += 1;
        for a in left {
            for b in right {
                seen.insert(a.compose(g).compose(b));
            }
        }
    }
    count
}
