//! Weight tuples Γ_n: extended positive rationals with the lexicographic
//! order, weighted degrees of mixed monomials, the integer-witness weight
//! test, model extraction and the distinguished-weight verifier.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::algebra::{expand_squares, HoloPoly, Monomial};
use crate::error::Error;

/// A positive rational or the ∞ sentinel. ∞ compares greater than every
/// finite value and x/∞ = 0.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ExtRat {
    Finite(BigRational),
    Infinite,
}

impl ExtRat {
    pub fn from_int(n: i64) -> Self {
        ExtRat::Finite(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(a: i64, b: i64) -> Self {
        ExtRat::Finite(BigRational::new(BigInt::from(a), BigInt::from(b)))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtRat::Finite(_))
    }

    pub fn as_finite(&self) -> Option<&BigRational> {
        match self {
            ExtRat::Finite(r) => Some(r),
            ExtRat::Infinite => None,
        }
    }

    /// 1/λ, with 1/∞ = 0. Panics on zero (weights are ≥ 1).
    pub fn recip(&self) -> BigRational {
        match self {
            ExtRat::Finite(r) => {
                assert!(!r.is_zero(), "reciprocal of zero weight entry");
                r.recip()
            }
            ExtRat::Infinite => BigRational::zero(),
        }
    }
}

impl PartialOrd for ExtRat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtRat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtRat::Infinite, ExtRat::Infinite) => Ordering::Equal,
            (ExtRat::Infinite, ExtRat::Finite(_)) => Ordering::Greater,
            (ExtRat::Finite(_), ExtRat::Infinite) => Ordering::Less,
            (ExtRat::Finite(a), ExtRat::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for ExtRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRat::Finite(r) => write!(f, "{r}"),
            ExtRat::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for ExtRat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") {
            return Ok(ExtRat::Infinite);
        }
        BigRational::from_str(s)
            .map(ExtRat::Finite)
            .map_err(|e| format!("bad rational '{s}': {e}"))
    }
}

/// An n-tuple (λ₁, …, λ_n) of extended positive rationals. Entry 1 of a
/// domain weight is always 1.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Weight {
    entries: Vec<ExtRat>,
}

impl Weight {
    pub fn new(entries: Vec<ExtRat>) -> Self {
        Self { entries }
    }

    pub fn from_ints(entries: &[i64]) -> Self {
        Self::new(entries.iter().map(|&v| ExtRat::from_int(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[ExtRat] {
        &self.entries
    }

    /// λ_j for the variable z_j (1-based).
    pub fn lambda(&self, var: u32) -> &ExtRat {
        &self.entries[(var - 1) as usize]
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(ExtRat::is_finite)
    }

    /// Serialization: comma-separated exact rationals, ∞ as "inf".
    pub fn parse(s: &str) -> Result<Self, Error> {
        let entries = s
            .split(',')
            .map(|p| ExtRat::from_str(p).map_err(Error::Usage))
            .collect::<Result<Vec<_>, _>>()?;
        if entries.is_empty() {
            return Err(Error::Usage("empty weight".into()));
        }
        Ok(Self::new(entries))
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|e| e.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Lexicographic comparison on Γ_n.
pub fn lex_compare(a: &Weight, b: &Weight) -> Result<Ordering, Error> {
    if a.len() != b.len() {
        return Err(Error::WeightLengthMismatch { left: a.len(), right: b.len() });
    }
    for (x, y) in a.entries.iter().zip(b.entries.iter()) {
        match x.cmp(y) {
            Ordering::Equal => continue,
            ord => return Ok(ord),
        }
    }
    Ok(Ordering::Equal)
}

/// Σ_j (α_j + β_j)/λ_j. Infinite entries contribute zero, so the result is
/// always a finite rational.
pub fn weighted_degree(alpha: &Monomial, beta: &Monomial, lam: &Weight) -> BigRational {
    let mut total = BigRational::zero();
    for m in [alpha, beta] {
        for &(idx, e) in m.exponents() {
            let contrib = lam.lambda(idx).recip() * BigRational::from_integer(BigInt::from(e));
            total += contrib;
        }
    }
    total
}

/// Weighted degree of a single holomorphic monomial.
pub fn holo_weight(alpha: &Monomial, lam: &Weight) -> BigRational {
    weighted_degree(alpha, &Monomial::one(), lam)
}

/// Outcome of the Γ_n membership test, with the integer witness tuple
/// (a₁, …, a_t) recorded per finite entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightValidity {
    pub valid: bool,
    pub failure: Option<String>,
    /// Indexed like the entries; `Some` for finite entries that admit a
    /// witness, `None` for entries 0-based index t with λ_t = ∞.
    pub witnesses: Vec<Option<Vec<u32>>>,
}

/// Tests the Γ_n conditions. With `strict` false (the default convention)
/// the witness needs a_t > 0 and a_j ≥ 0; with `strict` true every a_j must
/// be positive, the paper's literal wording.
pub fn is_weight(lam: &Weight, strict: bool) -> WeightValidity {
    let n = lam.len();
    let mut witnesses: Vec<Option<Vec<u32>>> = vec![None; n];
    let one = BigRational::one();

    for t in 0..n {
        match &lam.entries[t] {
            ExtRat::Infinite => {}
            ExtRat::Finite(v) => {
                if v < &one {
                    return WeightValidity {
                        valid: false,
                        failure: Some(format!("entry {} is below 1", t + 1)),
                        witnesses,
                    };
                }
            }
        }
        if t + 1 < n && lam.entries[t] > lam.entries[t + 1] {
            return WeightValidity {
                valid: false,
                failure: Some(format!(
                    "entries are not nondecreasing at position {}",
                    t + 2
                )),
                witnesses,
            };
        }
    }

    for t in 0..n {
        let ExtRat::Finite(_) = &lam.entries[t] else { continue };
        match witness_search(lam, t, strict) {
            Some(w) => witnesses[t] = Some(w),
            None => {
                return WeightValidity {
                    valid: false,
                    failure: Some(format!("no integer witness for entry {}", t + 1)),
                    witnesses,
                };
            }
        }
    }

    WeightValidity { valid: true, failure: None, witnesses }
}

/// Exhaustive search for nonnegative integers a₁..a_t with Σ a_j/λ_j = 1.
/// Bounded by a_j ≤ λ_j since each term is at most the whole budget.
fn witness_search(lam: &Weight, t: usize, strict: bool) -> Option<Vec<u32>> {
    fn rec(
        lam: &Weight,
        t: usize,
        j: usize,
        remaining: BigRational,
        strict: bool,
        acc: &mut Vec<u32>,
    ) -> bool {
        if j == t {
            // last slot: a_t > 0 with a_t/λ_t = remaining
            let lt = match &lam.entries()[t] {
                ExtRat::Finite(v) => v,
                ExtRat::Infinite => return false,
            };
            let a = &remaining * lt;
            if a.is_integer() && a.is_positive() {
                acc.push(a.to_integer().to_u32().unwrap_or(0));
                return acc.last() != Some(&0);
            }
            return false;
        }
        let lj = match &lam.entries()[j] {
            ExtRat::Finite(v) => v.clone(),
            ExtRat::Infinite => {
                // ∞ entries contribute nothing; only a_j = 0 is possible
                if strict {
                    return false;
                }
                acc.push(0);
                if rec(lam, t, j + 1, remaining, strict, acc) {
                    return true;
                }
                acc.pop();
                return false;
            }
        };
        let max_a = (&remaining * &lj).floor().to_integer().to_u32().unwrap_or(0);
        let start = if strict { 1 } else { 0 };
        for a in start..=max_a {
            let used = BigRational::from_integer(BigInt::from(a)) / lj.clone();
            let rest = &remaining - &used;
            if rest.is_negative() {
                break;
            }
            acc.push(a);
            if rec(lam, t, j + 1, rest, strict, acc) {
                return true;
            }
            acc.pop();
        }
        false
    }

    let mut acc = Vec::new();
    if rec(lam, t, 0, BigRational::one(), strict, &mut acc) {
        Some(acc)
    } else {
        None
    }
}

/// Keeps exactly the terms of each generator with weighted degree 1/2.
pub fn model_extract(generators: &[HoloPoly], lam: &Weight) -> Vec<HoloPoly> {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    generators
        .iter()
        .map(|g| {
            HoloPoly::from_terms(
                g.nvars(),
                g.terms().filter_map(|(m, c)| {
                    if holo_weight(m, lam) == half {
                        Some((m.clone(), c.clone()))
                    } else {
                        None
                    }
                }),
            )
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistinguishedReport {
    pub distinguished: bool,
    /// First tail term (α, β) of weighted degree < 1 in graded-lex order.
    pub offender: Option<(Monomial, Monomial, BigRational)>,
}

/// The distinguished-weight test for a sum-of-squares tail: every (α, β)
/// term of Σ_j f_j·conj(f_j) must have weighted degree ≥ 1. The pairwise
/// aggregated coefficients make the derivative condition of the definition
/// finite and exact.
pub fn is_distinguished(generators: &[HoloPoly], lam: &Weight) -> Result<DistinguishedReport, Error> {
    let tail = expand_squares(generators)?;
    let one = BigRational::one();
    for ((a, b), _) in tail.terms() {
        let w = weighted_degree(a, b, lam);
        if w < one {
            return Ok(DistinguishedReport {
                distinguished: false,
                offender: Some((a.clone(), b.clone(), w)),
            });
        }
    }
    Ok(DistinguishedReport { distinguished: true, offender: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::GaussianRational;

    fn z(nvars: u32, idx: u32) -> HoloPoly {
        HoloPoly::variable(nvars, idx)
    }

    fn w(entries: &[i64]) -> Weight {
        Weight::from_ints(entries)
    }

    #[test]
    fn lex_order_basics() {
        let a = w(&[1, 4, 4]);
        let b = w(&[1, 4, 6]);
        assert_eq!(lex_compare(&a, &b).unwrap(), Ordering::Less);
        let c = Weight::new(vec![ExtRat::from_int(1), ExtRat::from_int(2), ExtRat::Infinite]);
        assert_eq!(lex_compare(&c, &a).unwrap(), Ordering::Less);
        assert_eq!(lex_compare(&a, &a).unwrap(), Ordering::Equal);
        assert!(lex_compare(&a, &w(&[1, 4])).is_err());
    }

    #[test]
    fn weighted_degrees() {
        let z2sq = Monomial::from_exponents([(2, 2)]);
        assert_eq!(
            weighted_degree(&z2sq, &z2sq, &w(&[1, 4])),
            BigRational::one()
        );
        let z2z3 = Monomial::from_exponents([(2, 1), (3, 1)]);
        assert_eq!(
            weighted_degree(&z2z3, &Monomial::one(), &w(&[1, 4, 4])),
            BigRational::new(BigInt::from(1), BigInt::from(2))
        );
        let lam_inf = Weight::new(vec![ExtRat::from_int(1), ExtRat::from_int(4), ExtRat::Infinite]);
        assert_eq!(
            weighted_degree(&Monomial::var(3), &Monomial::one(), &lam_inf),
            BigRational::zero()
        );
    }

    #[test]
    fn weight_membership() {
        let v = is_weight(&w(&[1, 4, 6]), false);
        assert!(v.valid);
        // every finite entry carries a witness
        assert!(v.witnesses.iter().all(|x| x.is_some()));
        // λ₃ = 6 realized e.g. by (0, 0, 6)
        let w3 = v.witnesses[2].as_ref().unwrap();
        let total: BigRational = w3
            .iter()
            .enumerate()
            .map(|(j, &a)| {
                BigRational::from_integer(BigInt::from(a))
                    * w(&[1, 4, 6]).entries()[j].recip()
            })
            .sum();
        assert_eq!(total, BigRational::one());

        let v2 = is_weight(&w(&[1, 3, 5]), false);
        assert!(v2.valid);

        // (1, 4, 7/2) is not nondecreasing
        let bad = Weight::new(vec![ExtRat::from_int(1), ExtRat::from_int(4), ExtRat::ratio(7, 2)]);
        assert!(!is_weight(&bad, false).valid);
    }

    #[test]
    fn model_extraction() {
        // [z2^2 + z2^5] under (1,4): only z2^2 has weight 1/2
        let g = &z(2, 2).pow(2) + &z(2, 2).pow(5);
        let m = model_extract(&[g], &w(&[1, 4]));
        assert_eq!(m, vec![z(2, 2).pow(2)]);
        // [z2 z3 + z3^3] under (1,4,4) keeps z2 z3
        let g2 = &(&z(3, 2) * &z(3, 3)) + &z(3, 3).pow(3);
        let m2 = model_extract(&[g2], &w(&[1, 4, 4]));
        assert_eq!(m2, vec![&z(3, 2) * &z(3, 3)]);
        // idempotent
        assert_eq!(model_extract(&m2, &w(&[1, 4, 4])), m2);
    }

    #[test]
    fn distinguished_checks() {
        assert!(is_distinguished(&[z(2, 2).pow(2)], &w(&[1, 4])).unwrap().distinguished);
        let r = is_distinguished(&[z(2, 2).pow(2)], &w(&[1, 6])).unwrap();
        assert!(!r.distinguished);
        let (a, b, wdeg) = r.offender.unwrap();
        assert_eq!(a, Monomial::from_exponents([(2, 2)]));
        assert_eq!(b, Monomial::from_exponents([(2, 2)]));
        assert_eq!(wdeg, BigRational::new(BigInt::from(2), BigInt::from(3)));

        // enumerated pairwise tail of [z2^2 + z2 z3, z3^2] under (1,4,4):
        // every aggregated (α,β) coefficient has weight ≥ 1
        let g1 = &z(3, 2).pow(2) + &(&z(3, 2) * &z(3, 3));
        let g2 = z(3, 3).pow(2);
        assert!(is_distinguished(&[g1, g2], &w(&[1, 4, 4])).unwrap().distinguished);
    }

    #[test]
    fn weight_serialization() {
        let lam = Weight::parse("1,4,14/3,inf").unwrap();
        assert_eq!(lam.to_string(), "1,4,14/3,inf");
        assert!(!lam.is_finite());
        assert!(Weight::parse("1,oops").is_err());
    }

    #[test]
    fn strict_witness_mode() {
        // (1,2) passes with the witness (0,2). In strict mode a1 ≥ 1 already
        // consumes the whole budget, leaving a2 = 0, so no witness exists.
        let lam = w(&[1, 2]);
        assert!(is_weight(&lam, false).valid);
        assert!(!is_weight(&lam, true).valid);
        let _ = GaussianRational::one();
    }
}
