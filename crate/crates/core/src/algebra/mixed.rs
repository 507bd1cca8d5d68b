//! Polynomials in z and z̄. The defining-function tail Σ|f_j|² and every
//! Levi-form value live here. Keys are pairs (holomorphic multiindex,
//! antiholomorphic multiindex).

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::Error;

use super::gaussian::GaussianRational;
use super::holo::HoloPoly;
use super::monomial::Monomial;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MixedPoly {
    nvars: u32,
    terms: BTreeMap<(Monomial, Monomial), GaussianRational>,
}

impl MixedPoly {
    pub fn zero(nvars: u32) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: u32, c: GaussianRational) -> Self {
        let mut p = Self::zero(nvars);
        p.insert_add(Monomial::one(), Monomial::one(), c);
        p
    }

    pub fn nvars(&self) -> u32 {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Monomial, Monomial), &GaussianRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, alpha: &Monomial, beta: &Monomial) -> GaussianRational {
        self.terms
            .get(&(alpha.clone(), beta.clone()))
            .cloned()
            .unwrap_or_else(GaussianRational::zero)
    }

    /// Value at the origin.
    pub fn constant_term(&self) -> GaussianRational {
        self.coeff(&Monomial::one(), &Monomial::one())
    }

    pub(crate) fn insert_add(&mut self, a: Monomial, b: Monomial, c: GaussianRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry((a, b)) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + &c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    fn require_same_nvars(&self, other: &Self) -> Result<(), Error> {
        if self.nvars != other.nvars {
            Err(Error::MismatchedVars { left: self.nvars, right: other.nvars })
        } else {
            Ok(())
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, Error> {
        self.require_same_nvars(other)?;
        let mut out = self.clone();
        for ((a, b), c) in &other.terms {
            out.insert_add(a.clone(), b.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, Error> {
        self.require_same_nvars(other)?;
        let mut out = self.clone();
        for ((a, b), c) in &other.terms {
            out.insert_add(a.clone(), b.clone(), -c);
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, Error> {
        self.require_same_nvars(other)?;
        let mut out = Self::zero(self.nvars);
        for ((a1, b1), c1) in &self.terms {
            for ((a2, b2), c2) in &other.terms {
                out.insert_add(a1.mul(a2), b1.mul(b2), c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Self {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(k, a)| (k.clone(), a * c))
                .collect(),
        }
    }

    /// ∂/∂z_var (conjugate = false) or ∂/∂z̄_var (conjugate = true).
    pub fn diff(&self, var: u32, conjugate: bool) -> Self {
        let mut out = Self::zero(self.nvars);
        for ((a, b), c) in &self.terms {
            let side = if conjugate { b } else { a };
            let e = side.exponent(var);
            if e == 0 {
                continue;
            }
            let lowered = side.with_exponent(var, e - 1);
            let scaled = c.scale_rat(&BigRational::from_integer(BigInt::from(e)));
            if conjugate {
                out.insert_add(a.clone(), lowered, scaled);
            } else {
                out.insert_add(lowered, b.clone(), scaled);
            }
        }
        out
    }

    /// D^α D̄^β applied exactly.
    pub fn diff_multi(&self, alpha: &Monomial, beta: &Monomial) -> Self {
        let mut out = self.clone();
        for &(idx, e) in alpha.exponents() {
            for _ in 0..e {
                out = out.diff(idx, false);
            }
        }
        for &(idx, e) in beta.exponents() {
            for _ in 0..e {
                out = out.diff(idx, true);
            }
        }
        out
    }

    /// Complex conjugate: swaps the holomorphic and antiholomorphic sides.
    pub fn conj(&self) -> Self {
        Self {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|((a, b), c)| ((b.clone(), a.clone()), c.conj()))
                .collect(),
        }
    }

    /// Reality in the Hermitian sense: coeff(α,β) = conj(coeff(β,α)).
    /// Holds for Σ|f_j|² and everything derived from it symmetrically.
    pub fn is_hermitian(&self) -> bool {
        self.terms.iter().all(|((a, b), c)| self.coeff(b, a) == c.conj())
    }

    /// `a · conj(b)` as a mixed polynomial.
    pub fn from_holo_pair(a: &HoloPoly, b: &HoloPoly) -> Self {
        assert_eq!(a.nvars(), b.nvars(), "mismatched nvars");
        let mut out = Self::zero(a.nvars());
        for (ma, ca) in a.terms() {
            for (mb, cb) in b.terms() {
                out.insert_add(ma.clone(), mb.clone(), ca * &cb.conj());
            }
        }
        out
    }

    pub fn from_holo(a: &HoloPoly) -> Self {
        let mut out = Self::zero(a.nvars());
        for (m, c) in a.terms() {
            out.insert_add(m.clone(), Monomial::one(), c.clone());
        }
        out
    }

    /// Succeeds when the polynomial has no antiholomorphic part; otherwise
    /// returns the graded-lex first offending (α, β) pair.
    pub fn try_into_holo(&self) -> Result<HoloPoly, (Monomial, Monomial)> {
        let mut out = HoloPoly::zero(self.nvars);
        for ((a, b), c) in &self.terms {
            if !b.is_one() {
                return Err((a.clone(), b.clone()));
            }
            out.insert_add(a.clone(), c.clone());
        }
        Ok(out)
    }

    /// Substitutes holomorphic rules into the z-side and their conjugates
    /// into the z̄-side.
    pub fn substitute_map(&self, rules: &BTreeMap<u32, HoloPoly>) -> Self {
        let mut out = Self::zero(self.nvars);
        let mut pow_z: BTreeMap<(u32, u32), MixedPoly> = BTreeMap::new();
        let mut pow_zbar: BTreeMap<(u32, u32), MixedPoly> = BTreeMap::new();
        for ((a, b), c) in &self.terms {
            let mut term = Self::constant(self.nvars, c.clone());
            for &(idx, e) in a.exponents() {
                let factor = pow_z
                    .entry((idx, e))
                    .or_insert_with(|| match rules.get(&idx) {
                        None => {
                            let mut m = Self::zero(self.nvars);
                            m.insert_add(
                                Monomial::from_exponents([(idx, e)]),
                                Monomial::one(),
                                GaussianRational::one(),
                            );
                            m
                        }
                        Some(r) => Self::from_holo(&r.pow(e)),
                    })
                    .clone();
                term = term.checked_mul(&factor).expect("same nvars");
            }
            for &(idx, e) in b.exponents() {
                let factor = pow_zbar
                    .entry((idx, e))
                    .or_insert_with(|| match rules.get(&idx) {
                        None => {
                            let mut m = Self::zero(self.nvars);
                            m.insert_add(
                                Monomial::one(),
                                Monomial::from_exponents([(idx, e)]),
                                GaussianRational::one(),
                            );
                            m
                        }
                        Some(r) => Self::from_holo(&r.pow(e)).conj(),
                    })
                    .clone();
                term = term.checked_mul(&factor).expect("same nvars");
            }
            out = out.checked_add(&term).expect("same nvars");
        }
        out
    }
}

/// The non-pluriharmonic tail Σ_j f_j·conj(f_j) of the defining function.
/// Generators must not involve z₁.
pub fn expand_squares(generators: &[HoloPoly]) -> Result<MixedPoly, Error> {
    let nvars = generators.first().map(|g| g.nvars()).unwrap_or(2);
    let mut out = MixedPoly::zero(nvars);
    for g in generators {
        if g.nvars() != nvars {
            return Err(Error::MismatchedVars { left: nvars, right: g.nvars() });
        }
        if g.involves(1) {
            return Err(Error::OutOfScope(
                "generators must not involve the normal variable z1".into(),
            ));
        }
        out = out.checked_add(&MixedPoly::from_holo_pair(g, g))?;
    }
    Ok(out)
}

impl Add for &MixedPoly {
    type Output = MixedPoly;
    fn add(self, rhs: &MixedPoly) -> MixedPoly {
        self.checked_add(rhs).expect("mismatched nvars in +")
    }
}

impl Sub for &MixedPoly {
    type Output = MixedPoly;
    fn sub(self, rhs: &MixedPoly) -> MixedPoly {
        self.checked_sub(rhs).expect("mismatched nvars in -")
    }
}

impl Mul for &MixedPoly {
    type Output = MixedPoly;
    fn mul(self, rhs: &MixedPoly) -> MixedPoly {
        self.checked_mul(rhs).expect("mismatched nvars in *")
    }
}

impl Neg for &MixedPoly {
    type Output = MixedPoly;
    fn neg(self) -> MixedPoly {
        self.scale(&-GaussianRational::one())
    }
}

impl fmt::Display for MixedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((a, b), c) in self.terms.iter().rev() {
            if first {
                first = false;
            } else {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            if !a.is_one() {
                write!(f, "*{a}")?;
            }
            if !b.is_one() {
                write!(f, "*conj({b})")?;
            }
        }
        Ok(())
    }
}
