//! Sparse monomials over the variables z₁, z₂, …, z_n.
//!
//! Variable index 1 is the normal direction of the defining function and
//! only appears in defining-function computations; generators live in
//! z₂..z_n. No zero exponents are stored, so equality is structural.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::One;

/// A multiindex α, stored sparsely as (variable index, exponent) pairs
/// sorted by index.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial {
    exps: Vec<(u32, u32)>,
}

impl Monomial {
    /// The empty monomial 1.
    pub fn one() -> Self {
        Self::default()
    }

    /// The monomial z_idx.
    pub fn var(idx: u32) -> Self {
        Self { exps: vec![(idx, 1)] }
    }

    /// Builds from arbitrary (index, exponent) pairs; merges duplicates,
    /// drops zeros and sorts.
    pub fn from_exponents<I: IntoIterator<Item = (u32, u32)>>(iter: I) -> Self {
        let mut exps: Vec<(u32, u32)> = Vec::new();
        for (idx, e) in iter {
            if e == 0 {
                continue;
            }
            match exps.iter_mut().find(|(j, _)| *j == idx) {
                Some((_, acc)) => *acc += e,
                None => exps.push((idx, e)),
            }
        }
        exps.sort_unstable_by_key(|(j, _)| *j);
        Self { exps }
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exponent(&self, idx: u32) -> u32 {
        self.exps
            .iter()
            .find(|(j, _)| *j == idx)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn exponents(&self) -> &[(u32, u32)] {
        &self.exps
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().map(|(_, e)| e).sum()
    }

    pub fn support(&self) -> impl Iterator<Item = u32> + '_ {
        self.exps.iter().map(|(j, _)| *j)
    }

    pub fn involves(&self, idx: u32) -> bool {
        self.exponent(idx) > 0
    }

    pub fn min_var(&self) -> Option<u32> {
        self.exps.first().map(|(j, _)| *j)
    }

    pub fn max_var(&self) -> Option<u32> {
        self.exps.last().map(|(j, _)| *j)
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::from_exponents(
            self.exps.iter().copied().chain(other.exps.iter().copied()),
        )
    }

    /// Componentwise division; `None` when `other` does not divide `self`.
    pub fn try_div(&self, other: &Self) -> Option<Self> {
        let mut out = Vec::with_capacity(self.exps.len());
        for &(idx, e) in &self.exps {
            let d = other.exponent(idx);
            if d > e {
                return None;
            }
            if e - d > 0 {
                out.push((idx, e - d));
            }
        }
        // other may involve a variable absent from self
        for &(idx, d) in &other.exps {
            if d > 0 && self.exponent(idx) == 0 {
                return None;
            }
        }
        Some(Self { exps: out })
    }

    /// Replaces the exponent at `idx` (0 removes it).
    pub fn with_exponent(&self, idx: u32, e: u32) -> Self {
        Self::from_exponents(
            self.exps
                .iter()
                .copied()
                .filter(|(j, _)| *j != idx)
                .chain(std::iter::once((idx, e))),
        )
    }

    /// α! = ∏ α_j!
    pub fn factorial(&self) -> BigInt {
        let mut out = BigInt::one();
        for &(_, e) in &self.exps {
            for k in 2..=e {
                out *= BigInt::from(k);
            }
        }
        out
    }
}

/// Graded lexicographic order: first by total degree, ties broken by the
/// exponent of the lowest variable index (z₂ before z₃, …), larger
/// exponent first. `BTreeMap<Monomial, _>` iteration is therefore the
/// deterministic order used for all golden output.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let mut a = self.exps.iter().peekable();
        let mut b = other.exps.iter().peekable();
        loop {
            match (a.peek(), b.peek()) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some(&&(ia, ea)), Some(&&(ib, eb))) => {
                    // lower index present means a positive exponent there
                    match ib.cmp(&ia) {
                        Ordering::Equal => match ea.cmp(&eb) {
                            Ordering::Equal => {
                                a.next();
                                b.next();
                            }
                            ord => return ord,
                        },
                        ord => return ord,
                    }
                }
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let mut first = true;
        for &(idx, e) in &self.exps {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "z{idx}")?;
            } else {
                write!(f, "z{idx}^{e}")?;
            }
        }
        Ok(())
    }
}
