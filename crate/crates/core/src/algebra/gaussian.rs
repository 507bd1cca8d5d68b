//! Gaussian rationals: complex numbers with exact rational real and
//! imaginary parts. This is the coefficient field for everything in the
//! crate; no floating point appears anywhere.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// An element of ℚ(i). Both components are kept in the canonical reduced
/// form maintained by `BigRational` (coprime, positive denominator), so
/// structural equality is exact equality.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct GaussianRational {
    re: BigRational,
    im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn from_int(n: i64) -> Self {
        Self::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }

    pub fn from_rational(r: BigRational) -> Self {
        Self::new(r, BigRational::zero())
    }

    /// a/b as a real Gaussian rational. Panics if `b == 0`.
    pub fn ratio(a: i64, b: i64) -> Self {
        Self::from_rational(BigRational::new(BigInt::from(a), BigInt::from(b)))
    }

    /// a + b·i with integer parts.
    pub fn complex(a: i64, b: i64) -> Self {
        Self::new(
            BigRational::from_integer(BigInt::from(a)),
            BigRational::from_integer(BigInt::from(b)),
        )
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        Self::new(BigRational::zero(), BigRational::one())
    }

    pub fn re(&self) -> &BigRational {
        &self.re
    }

    pub fn im(&self) -> &BigRational {
        &self.im
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// Real and strictly positive.
    pub fn is_positive_real(&self) -> bool {
        self.im.is_zero() && self.re.is_positive()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    /// |z|² = z·z̄, a nonnegative rational.
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(Self::new(&self.re / &n, -(&self.im / &n)))
    }

    pub fn scale_rat(&self, r: &BigRational) -> Self {
        Self::new(&self.re * r, &self.im * r)
    }
}

impl Add for &GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub for &GaussianRational {
    type Output = GaussianRational;
    fn sub(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul for &GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Div for &GaussianRational {
    type Output = GaussianRational;
    fn div(self, rhs: &GaussianRational) -> GaussianRational {
        let inv = rhs.inv().expect("division by zero Gaussian rational");
        self * &inv
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-self.re.clone(), -self.im.clone())
    }
}

macro_rules! owned_ops {
    ($($trait:ident, $fn:ident);*) => {$(
        impl $trait for GaussianRational {
            type Output = GaussianRational;
            fn $fn(self, rhs: GaussianRational) -> GaussianRational {
                (&self).$fn(&rhs)
            }
        }
    )*};
}
owned_ops!(Add, add; Sub, sub; Mul, mul; Div, div);

impl Neg for GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        -&self
    }
}

/// Prints in the coefficient syntax of the input language: `3`, `-1/2`,
/// `2i`, `-1/3i`, `(1/2+1/3i)`, `(-1+2i)`.
impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", self.re);
        }
        if self.re.is_zero() {
            return write!(f, "{}i", self.im);
        }
        if self.im.is_negative() {
            write!(f, "({}-{}i)", self.re, -self.im.clone())
        } else {
            write!(f, "({}+{}i)", self.re, self.im)
        }
    }
}

impl fmt::Debug for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_basics() {
        let a = GaussianRational::complex(1, 1);
        let b = GaussianRational::complex(1, -1);
        assert_eq!(&a * &b, GaussianRational::from_int(2));
        assert!(a.norm_sqr() == BigRational::from_integer(BigInt::from(2)));
        let inv = a.inv().unwrap();
        assert!((&a * &inv).is_one());
        assert!(GaussianRational::zero().inv().is_none());
    }

    #[test]
    fn conjugation() {
        let a = GaussianRational::complex(2, 3);
        assert_eq!(a.conj().conj(), a);
        let prod = &a * &a.conj();
        assert!(prod.is_real());
        assert_eq!(prod.re(), &a.norm_sqr());
    }

    #[test]
    fn display_forms() {
        assert_eq!(GaussianRational::ratio(-1, 2).to_string(), "-1/2");
        assert_eq!(GaussianRational::complex(0, 2).to_string(), "2i");
        let mixed = GaussianRational::new(
            BigRational::new(BigInt::from(1), BigInt::from(2)),
            BigRational::new(BigInt::from(1), BigInt::from(3)),
        );
        assert_eq!(mixed.to_string(), "(1/2+1/3i)");
        assert_eq!((-mixed).to_string(), "(-1/2-1/3i)");
    }
}
