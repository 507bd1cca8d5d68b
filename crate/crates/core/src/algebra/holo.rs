//! Sparse multivariate polynomials with Gaussian-rational coefficients in
//! the holomorphic variables only. These carry the domain generators f_j,
//! the model truncations, and every holomorphic function the machinery
//! produces.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::Error;

use super::gaussian::GaussianRational;
use super::monomial::Monomial;

/// A polynomial in z₁..z_n. No zero coefficients are stored; the term map
/// iterates in graded-lex monomial order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HoloPoly {
    nvars: u32,
    terms: BTreeMap<Monomial, GaussianRational>,
}

impl HoloPoly {
    pub fn zero(nvars: u32) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: u32, c: GaussianRational) -> Self {
        let mut p = Self::zero(nvars);
        p.insert_add(Monomial::one(), c);
        p
    }

    pub fn one(nvars: u32) -> Self {
        Self::constant(nvars, GaussianRational::one())
    }

    /// The coordinate function z_idx.
    pub fn variable(nvars: u32, idx: u32) -> Self {
        assert!(idx >= 1 && idx <= nvars, "variable z{idx} out of range 1..={nvars}");
        Self::from_terms(nvars, [(Monomial::var(idx), GaussianRational::one())])
    }

    pub fn monomial(nvars: u32, m: Monomial, c: GaussianRational) -> Self {
        Self::from_terms(nvars, [(m, c)])
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, GaussianRational)>>(
        nvars: u32,
        iter: I,
    ) -> Self {
        let mut p = Self::zero(nvars);
        for (m, c) in iter {
            p.insert_add(m, c);
        }
        p
    }

    pub fn nvars(&self) -> u32 {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn monomials(&self) -> impl Iterator<Item = &Monomial> {
        self.terms.keys()
    }

    /// The graded-lex largest term.
    pub fn leading_term(&self) -> Option<(&Monomial, &GaussianRational)> {
        self.terms.iter().next_back()
    }

    pub fn coeff(&self, m: &Monomial) -> GaussianRational {
        self.terms.get(m).cloned().unwrap_or_else(GaussianRational::zero)
    }

    pub fn constant_term(&self) -> GaussianRational {
        self.coeff(&Monomial::one())
    }

    /// Coefficient of the linear monomial z_idx.
    pub fn linear_coeff(&self, idx: u32) -> GaussianRational {
        self.coeff(&Monomial::var(idx))
    }

    /// None for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).max()
    }

    pub fn involves(&self, idx: u32) -> bool {
        self.terms.keys().any(|m| m.involves(idx))
    }

    pub(crate) fn insert_add(&mut self, m: Monomial, c: GaussianRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
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
        for (m, c) in &other.terms {
            out.insert_add(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, Error> {
        self.require_same_nvars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert_add(m.clone(), -c);
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, Error> {
        self.require_same_nvars(other)?;
        let mut out = Self::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.insert_add(ma.mul(mb), ca * cb);
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
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn scale_rat(&self, r: &BigRational) -> Self {
        self.scale(&GaussianRational::from_rational(r.clone()))
    }

    /// Exact partial derivative ∂/∂z_var.
    pub fn diff(&self, var: u32) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.exponent(var);
            if e == 0 {
                continue;
            }
            let dm = m.with_exponent(var, e - 1);
            out.insert_add(dm, c.scale_rat(&BigRational::from_integer(BigInt::from(e))));
        }
        out
    }

    /// Iterated derivative D^α.
    pub fn diff_multi(&self, alpha: &Monomial) -> Self {
        let mut out = self.clone();
        for &(idx, e) in alpha.exponents() {
            for _ in 0..e {
                out = out.diff(idx);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one(self.nvars);
        for _ in 0..k {
            out = out.checked_mul(self).expect("same nvars");
        }
        out
    }

    /// Substitutes each variable present in `rules` by the given polynomial;
    /// other variables are left alone.
    pub fn substitute_map(&self, rules: &BTreeMap<u32, HoloPoly>) -> Self {
        let mut out = Self::zero(self.nvars);
        // cache of powers per rewritten variable
        let mut powers: BTreeMap<(u32, u32), HoloPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut term = Self::constant(self.nvars, c.clone());
            for &(idx, e) in m.exponents() {
                let factor = match rules.get(&idx) {
                    None => Self::monomial(
                        self.nvars,
                        Monomial::from_exponents([(idx, e)]),
                        GaussianRational::one(),
                    ),
                    Some(r) => powers
                        .entry((idx, e))
                        .or_insert_with(|| r.pow(e))
                        .clone(),
                };
                term = term.checked_mul(&factor).expect("same nvars");
            }
            out = out.checked_add(&term).expect("same nvars");
        }
        out
    }

    /// The linear part as coefficients of z₂..z_n.
    pub fn linear_row(&self) -> Vec<GaussianRational> {
        (2..=self.nvars).map(|i| self.linear_coeff(i)).collect()
    }
}

impl Add for &HoloPoly {
    type Output = HoloPoly;
    fn add(self, rhs: &HoloPoly) -> HoloPoly {
        self.checked_add(rhs).expect("mismatched nvars in +")
    }
}

impl Sub for &HoloPoly {
    type Output = HoloPoly;
    fn sub(self, rhs: &HoloPoly) -> HoloPoly {
        self.checked_sub(rhs).expect("mismatched nvars in -")
    }
}

impl Mul for &HoloPoly {
    type Output = HoloPoly;
    fn mul(self, rhs: &HoloPoly) -> HoloPoly {
        self.checked_mul(rhs).expect("mismatched nvars in *")
    }
}

impl Neg for &HoloPoly {
    type Output = HoloPoly;
    fn neg(self) -> HoloPoly {
        self.scale(&-GaussianRational::one())
    }
}

/// Terms print leading (graded-lex largest) first, in the input grammar.
impl fmt::Display for HoloPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            let (sign, mag) = if c.is_real() && c.re() < &BigRational::default() {
                ("-", -c)
            } else if !c.is_real() && c.re().is_zero() && c.im() < &BigRational::default() {
                ("-", -c)
            } else {
                ("+", c.clone())
            };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, " {sign} ")?;
            }
            if m.is_one() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{mag}*{m}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(nvars: u32, idx: u32) -> HoloPoly {
        HoloPoly::variable(nvars, idx)
    }

    #[test]
    fn product_identity() {
        // (z2+z3)(z2-z3) = z2^2 - z3^2
        let a = &z(3, 2) + &z(3, 3);
        let b = &z(3, 2) - &z(3, 3);
        let p = &a * &b;
        let expect = &(&z(3, 2) * &z(3, 2)) - &(&z(3, 3) * &z(3, 3));
        assert_eq!(p, expect);
    }

    #[test]
    fn additive_identity() {
        let p = &z(2, 2) * &z(2, 2);
        assert_eq!(p.checked_add(&HoloPoly::zero(2)).unwrap(), p);
    }

    #[test]
    fn unit_coefficients_multiply() {
        // (1+i)z2 · (1-i)z2 = 2 z2^2
        let a = z(2, 2).scale(&GaussianRational::complex(1, 1));
        let b = z(2, 2).scale(&GaussianRational::complex(1, -1));
        let p = &a * &b;
        assert_eq!(p, z(2, 2).pow(2).scale(&GaussianRational::from_int(2)));
    }

    #[test]
    fn nvars_mismatch_is_an_error() {
        let a = z(2, 2);
        let b = z(3, 2);
        assert!(matches!(a.checked_add(&b), Err(Error::MismatchedVars { .. })));
        assert!(a.checked_mul(&b).is_err());
    }

    #[test]
    fn derivative_power_rule() {
        // ∂_{z2}(z2^2 z3) = 2 z2 z3
        let p = &z(3, 2).pow(2) * &z(3, 3);
        let expect = (&z(3, 2) * &z(3, 3)).scale(&GaussianRational::from_int(2));
        assert_eq!(p.diff(2), expect);
        // ∂_{z3}(z2^2) = 0
        assert!(z(3, 2).pow(2).diff(3).is_zero());
    }

    #[test]
    fn derivatives_commute() {
        let p = &(&z(3, 2).pow(3) * &z(3, 3).pow(2)) + &z(3, 3).pow(4);
        assert_eq!(p.diff(2).diff(3), p.diff(3).diff(2));
    }

    #[test]
    fn substitution_shear() {
        // z3 + z2^3 under z3 ↦ z3 - z2^3 gives back z3
        let p = &z(3, 3) + &z(3, 2).pow(3);
        let mut rules = BTreeMap::new();
        rules.insert(3, &z(3, 3) - &z(3, 2).pow(3));
        assert_eq!(p.substitute_map(&rules), z(3, 3));
    }

    #[test]
    fn display_roundtrip_shape() {
        let p = &(&z(3, 2) * &z(3, 2)) - &z(3, 3).scale(&GaussianRational::ratio(1, 2));
        assert_eq!(p.to_string(), "z2^2 - 1/2*z3");
    }
}
