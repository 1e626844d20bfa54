//! Exact coefficients in Q(zeta_m)[v, 1/v].
//!
//! `v` stands for the square root of the residue-field size `q`, and `zeta_m`
//! is a primitive `m`-th root of unity with `m = q - 1`. Elements of the
//! cyclotomic field are stored as dense coefficient vectors of length
//! `phi(m)`, reduced modulo the `m`-th cyclotomic polynomial, so equality of
//! values is equality of representatives.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Integer coefficients of the `m`-th cyclotomic polynomial, lowest degree
/// first.
pub fn cyclotomic_polynomial(m: u64) -> Vec<BigInt> {
    assert!(m >= 1, "cyclotomic polynomial needs m >= 1");
    // Phi_m = (x^m - 1) / prod_{d | m, d < m} Phi_d
    let mut num = vec![BigInt::zero(); m as usize + 1];
    num[0] = BigInt::from(-1);
    num[m as usize] = BigInt::one();
    for d in 1..m {
        if m.is_multiple_of(d) {
            num = exact_div_monic(&num, &cyclotomic_polynomial(d));
        }
    }
    num
}

fn exact_div_monic(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let qd = rem.len() - 1 - dd;
    let mut quot = vec![BigInt::zero(); qd + 1];
    for i in (0..=qd).rev() {
        let c = rem[i + dd].clone();
        if c.is_zero() {
            continue;
        }
        for (j, dj) in den.iter().enumerate() {
            rem[i + j] -= &c * dj;
        }
        quot[i] = c;
    }
    debug_assert!(rem.iter().all(Zero::is_zero));
    quot
}

/// Euler's totient.
pub fn totient(m: u64) -> u64 {
    (1..=m).filter(|k| k.gcd(&m) == 1).count() as u64
}

/// The field Q(zeta_m), presented as Q[x] / Phi_m(x).
#[derive(Debug, PartialEq, Eq)]
pub struct CycloField {
    m: u64,
    modulus: Vec<BigInt>,
}

impl CycloField {
    pub fn new(m: u64) -> Arc<Self> {
        Arc::new(CycloField {
            m,
            modulus: cyclotomic_polynomial(m),
        })
    }

    pub fn order(&self) -> u64 {
        self.m
    }

    pub fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    fn reduce(&self, mut p: Vec<BigRational>) -> Vec<BigRational> {
        let d = self.degree();
        for i in (d..p.len()).rev() {
            if p[i].is_zero() {
                continue;
            }
            let c = std::mem::replace(&mut p[i], BigRational::zero());
            for j in 0..d {
                let mj = &self.modulus[j];
                if !mj.is_zero() {
                    p[i - d + j] -= &c * BigRational::from_integer(mj.clone());
                }
            }
        }
        p.resize(d, BigRational::zero());
        p
    }
}

/// An element of Q(zeta_m).
#[derive(Clone)]
pub struct Cyclotomic {
    field: Arc<CycloField>,
    coeffs: Vec<BigRational>,
}

impl Cyclotomic {
    pub fn zero(field: &Arc<CycloField>) -> Self {
        Cyclotomic {
            field: field.clone(),
            coeffs: vec![BigRational::zero(); field.degree()],
        }
    }

    pub fn one(field: &Arc<CycloField>) -> Self {
        Self::from_rational(field, BigRational::one())
    }

    pub fn from_integer(field: &Arc<CycloField>, n: i64) -> Self {
        Self::from_rational(field, BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_rational(field: &Arc<CycloField>, r: BigRational) -> Self {
        let mut c = Self::zero(field);
        c.coeffs[0] = r;
        c
    }

    /// `zeta_m^k`, any integer `k`.
    pub fn zeta_pow(field: &Arc<CycloField>, k: i64) -> Self {
        let m = field.order() as i64;
        let e = k.rem_euclid(m) as usize;
        let mut p = vec![BigRational::zero(); e + 1];
        p[e] = BigRational::one();
        Cyclotomic {
            field: field.clone(),
            coeffs: field.reduce(p),
        }
    }

    pub fn field(&self) -> &Arc<CycloField> {
        &self.field
    }

    pub fn order(&self) -> u64 {
        self.field.m
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(Zero::is_zero)
    }

    /// The rational value when the element lies in Q.
    pub fn as_rational(&self) -> Option<&BigRational> {
        if self.coeffs[1..].iter().all(Zero::is_zero) {
            Some(&self.coeffs[0])
        } else {
            None
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.field.m != other.field.m {
            return Err(Error::IncompatibleOrders(self.field.m, other.field.m));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Cyclotomic {
            field: self.field.clone(),
            coeffs,
        })
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let d = self.field.degree();
        let mut p = vec![BigRational::zero(); 2 * d - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    p[i + j] += a * b;
                }
            }
        }
        Ok(Cyclotomic {
            field: self.field.clone(),
            coeffs: self.field.reduce(p),
        })
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        Cyclotomic {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| c * r).collect(),
        }
    }

    /// Coefficients as exact strings, `"p"` or `"p/q"`.
    pub fn to_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(rational_string).collect()
    }
}

pub fn rational_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl PartialEq for Cyclotomic {
    fn eq(&self, other: &Self) -> bool {
        self.field.m == other.field.m && self.coeffs == other.coeffs
    }
}
impl Eq for Cyclotomic {}

impl fmt::Debug for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{}", rational_string(c))?,
                1 => write!(f, "{}*z", rational_string(c))?,
                _ => write!(f, "{}*z^{}", rational_string(c), i)?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

// Operator sugar panics on mismatched orders; the `checked_*` methods report it.
impl Add for &Cyclotomic {
    type Output = Cyclotomic;
    fn add(self, rhs: &Cyclotomic) -> Cyclotomic {
        self.checked_add(rhs)
            .expect("incompatible cyclotomic orders")
    }
}
impl Sub for &Cyclotomic {
    type Output = Cyclotomic;
    fn sub(self, rhs: &Cyclotomic) -> Cyclotomic {
        self + &(-rhs)
    }
}
impl Mul for &Cyclotomic {
    type Output = Cyclotomic;
    fn mul(self, rhs: &Cyclotomic) -> Cyclotomic {
        self.checked_mul(rhs)
            .expect("incompatible cyclotomic orders")
    }
}
impl Neg for &Cyclotomic {
    type Output = Cyclotomic;
    fn neg(self) -> Cyclotomic {
        Cyclotomic {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

/// A Laurent polynomial in `v` with coefficients in Q(zeta_m). No zero
/// coefficient is ever stored.
#[derive(Clone)]
pub struct CycloLaurent {
    field: Arc<CycloField>,
    terms: BTreeMap<i64, Cyclotomic>,
}

impl CycloLaurent {
    pub fn zero(field: &Arc<CycloField>) -> Self {
        CycloLaurent {
            field: field.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(field: &Arc<CycloField>) -> Self {
        Self::monomial(0, Cyclotomic::one(field))
    }

    pub fn constant(c: Cyclotomic) -> Self {
        Self::monomial(0, c)
    }

    pub fn from_integer(field: &Arc<CycloField>, n: i64) -> Self {
        Self::constant(Cyclotomic::from_integer(field, n))
    }

    pub fn from_rational(field: &Arc<CycloField>, r: BigRational) -> Self {
        Self::constant(Cyclotomic::from_rational(field, r))
    }

    pub fn monomial(exp: i64, c: Cyclotomic) -> Self {
        let field = c.field.clone();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exp, c);
        }
        CycloLaurent { field, terms }
    }

    pub fn field(&self) -> &Arc<CycloField> {
        &self.field
    }

    pub fn order(&self) -> u64 {
        self.field.m
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &Cyclotomic)> {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    pub fn coeff(&self, exp: i64) -> Option<&Cyclotomic> {
        self.terms.get(&exp)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.field.m != other.field.m {
            return Err(Error::IncompatibleOrders(self.field.m, other.field.m));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(*k, c);
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = Self::zero(&self.field);
        for (i, a) in &self.terms {
            for (j, b) in &other.terms {
                out.add_term(i + j, &(a * b));
            }
        }
        Ok(out)
    }

    /// In-place `self += c * v^exp`.
    pub fn add_term(&mut self, exp: i64, c: &Cyclotomic) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&exp) {
            Some(cur) => {
                let s = &*cur + c;
                if s.is_zero() {
                    self.terms.remove(&exp);
                } else {
                    *cur = s;
                }
            }
            None => {
                self.terms.insert(exp, c.clone());
            }
        }
    }

    pub fn scale(&self, c: &Cyclotomic) -> Self {
        let mut out = Self::zero(&self.field);
        for (k, a) in &self.terms {
            out.add_term(*k, &(a * c));
        }
        out
    }

    pub fn scale_rational(&self, r: &BigRational) -> Self {
        let mut out = Self::zero(&self.field);
        for (k, a) in &self.terms {
            out.add_term(*k, &a.scale(r));
        }
        out
    }

    /// Multiply by `v^k`.
    pub fn shift(&self, k: i64) -> Self {
        CycloLaurent {
            field: self.field.clone(),
            terms: self.terms.iter().map(|(e, c)| (e + k, c.clone())).collect(),
        }
    }

    /// The image under `v -> 1`; a ring homomorphism onto Q(zeta_m).
    pub fn specialize_v_one(&self) -> Cyclotomic {
        let mut acc = Cyclotomic::zero(&self.field);
        for c in self.terms.values() {
            acc = &acc + c;
        }
        acc
    }

    /// `(exponent, coefficient strings)` pairs in increasing exponent order.
    pub fn to_pairs(&self) -> Vec<(i64, Vec<String>)> {
        self.terms
            .iter()
            .map(|(k, c)| (*k, c.to_strings()))
            .collect()
    }

    /// Largest absolute rational coefficient bit size; used only for
    /// diagnostics.
    pub fn max_height(&self) -> u64 {
        self.terms
            .values()
            .flat_map(|c| c.coeffs.iter())
            .map(|r| r.numer().abs().bits().max(r.denom().bits()))
            .max()
            .unwrap_or(0)
    }
}

/// `v^k`, standing for `q^{k/2}`.
pub fn half_power(field: &Arc<CycloField>, k: i64) -> CycloLaurent {
    CycloLaurent::monomial(k, Cyclotomic::one(field))
}

impl PartialEq for CycloLaurent {
    fn eq(&self, other: &Self) -> bool {
        self.field.m == other.field.m && self.terms == other.terms
    }
}
impl Eq for CycloLaurent {}

impl fmt::Debug for CycloLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for CycloLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(k, c)| match k {
                0 => format!("({})", c),
                _ => format!("({})v^{}", c, k),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Add for &CycloLaurent {
    type Output = CycloLaurent;
    fn add(self, rhs: &CycloLaurent) -> CycloLaurent {
        self.checked_add(rhs)
            .expect("incompatible cyclotomic orders")
    }
}
impl Sub for &CycloLaurent {
    type Output = CycloLaurent;
    fn sub(self, rhs: &CycloLaurent) -> CycloLaurent {
        self + &(-rhs)
    }
}
impl Mul for &CycloLaurent {
    type Output = CycloLaurent;
    fn mul(self, rhs: &CycloLaurent) -> CycloLaurent {
        self.checked_mul(rhs)
            .expect("incompatible cyclotomic orders")
    }
}
impl Neg for &CycloLaurent {
    type Output = CycloLaurent;
    fn neg(self) -> CycloLaurent {
        CycloLaurent {
            field: self.field.clone(),
            terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect(),
        }
    }
}
