//! The derivative-of-ideals machinery: Jacobian matrices, tangential
//! (1,0) vector fields viewed as rows, iterated derivative ideals over
//! ordered lists, Levi-form products v·J(A)·J*(B)·w*, and the exact
//! evaluation of ℒ∂r for equally-ordered lists.
//!
//! Convention: the derivative ideal ⟨(L¹⋯L^k)f⟩ is an operator product,
//! i.e. L^k acts first and L¹ last. All composition laws in this module
//! are stated relative to that order.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::algebra::{GaussianRational, HoloPoly, MixedPoly, Monomial};
use crate::error::Error;

/// A finitely generated ideal of holomorphic polynomials, all z₁-free.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Ideal {
    nvars: u32,
    gens: Vec<HoloPoly>,
}

impl Ideal {
    pub fn new(nvars: u32, gens: Vec<HoloPoly>) -> Result<Self, Error> {
        for g in &gens {
            if g.nvars() != nvars {
                return Err(Error::MismatchedVars { left: nvars, right: g.nvars() });
            }
            if g.involves(1) {
                return Err(Error::OutOfScope("ideal generators must be z1-free".into()));
            }
        }
        Ok(Self { nvars, gens })
    }

    pub fn nvars(&self) -> u32 {
        self.nvars
    }

    pub fn gens(&self) -> &[HoloPoly] {
        &self.gens
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }
}

/// A tangential (1,0) vector field, stored as its row of coefficients
/// (v₂, …, v_n). Generators never depend on z₁, so this row determines
/// every ideal computation; the implicit ∂/∂z₁ component is reconstructed
/// only by the oracle module.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VectorFieldSpec {
    nvars: u32,
    coeffs: Vec<HoloPoly>,
}

impl VectorFieldSpec {
    pub fn new(nvars: u32, coeffs: Vec<HoloPoly>) -> Result<Self, Error> {
        if coeffs.len() != (nvars as usize).saturating_sub(1) {
            return Err(Error::MismatchedVars { left: nvars, right: coeffs.len() as u32 + 1 });
        }
        for c in &coeffs {
            if c.nvars() != nvars {
                return Err(Error::MismatchedVars { left: nvars, right: c.nvars() });
            }
        }
        Ok(Self { nvars, coeffs })
    }

    /// The coordinate field ∂/∂z_idx.
    pub fn coordinate(nvars: u32, idx: u32) -> Self {
        assert!((2..=nvars).contains(&idx));
        let coeffs = (2..=nvars)
            .map(|j| {
                if j == idx {
                    HoloPoly::one(nvars)
                } else {
                    HoloPoly::zero(nvars)
                }
            })
            .collect();
        Self { nvars, coeffs }
    }

    /// A constant-coefficient field from a row of scalars over z₂..z_n.
    pub fn constant(nvars: u32, row: &[GaussianRational]) -> Self {
        assert_eq!(row.len(), (nvars - 1) as usize);
        let coeffs = row.iter().map(|c| HoloPoly::constant(nvars, c.clone())).collect();
        Self { nvars, coeffs }
    }

    pub fn nvars(&self) -> u32 {
        self.nvars
    }

    /// Coefficient of ∂/∂z_idx for idx in 2..=n.
    pub fn coeff(&self, idx: u32) -> &HoloPoly {
        &self.coeffs[(idx - 2) as usize]
    }

    pub fn coeffs(&self) -> &[HoloPoly] {
        &self.coeffs
    }

    /// Applies the field to a single holomorphic polynomial.
    pub fn apply(&self, p: &HoloPoly) -> HoloPoly {
        let mut out = HoloPoly::zero(self.nvars);
        for idx in 2..=self.nvars {
            let c = self.coeff(idx);
            if c.is_zero() {
                continue;
            }
            out = &out + &(c * &p.diff(idx));
        }
        out
    }

    /// a·L + b·M, generator-wise.
    pub fn linear_combination(
        a: &GaussianRational,
        l: &VectorFieldSpec,
        b: &GaussianRational,
        m: &VectorFieldSpec,
    ) -> VectorFieldSpec {
        assert_eq!(l.nvars, m.nvars);
        let coeffs = l
            .coeffs
            .iter()
            .zip(m.coeffs.iter())
            .map(|(x, y)| &x.scale(a) + &y.scale(b))
            .collect();
        VectorFieldSpec { nvars: l.nvars, coeffs }
    }

    /// Constant part of the row, for reporting.
    pub fn constant_row(&self) -> Vec<GaussianRational> {
        self.coeffs.iter().map(|c| c.constant_term()).collect()
    }
}

impl fmt::Display for VectorFieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut any = false;
        for idx in 2..=self.nvars {
            let c = self.coeff(idx);
            if c.is_zero() {
                continue;
            }
            if any {
                write!(f, " + ")?;
            }
            any = true;
            if c.num_terms() == 1 && c.constant_term().is_one() {
                write!(f, "d/dz{idx}")?;
            } else {
                write!(f, "({c})*d/dz{idx}")?;
            }
        }
        if !any {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// A list ℒ of vector fields, each entry a field handle with a conjugation
/// flag. The fields table maps boundary-system indices to their rows.
#[derive(Clone, Debug)]
pub struct ListSpec {
    entries: Vec<(u32, bool)>,
    fields: BTreeMap<u32, VectorFieldSpec>,
}

impl ListSpec {
    pub fn new(entries: Vec<(u32, bool)>, fields: BTreeMap<u32, VectorFieldSpec>) -> Self {
        Self { entries, fields }
    }

    /// The equally-ordered list with s_k adjacent (L_k, L̄_k) pairs per
    /// index, blocks in decreasing index order.
    pub fn equally_ordered(
        counts: &BTreeMap<u32, u32>,
        fields: BTreeMap<u32, VectorFieldSpec>,
    ) -> Self {
        let mut entries = Vec::new();
        for (&idx, &s) in counts.iter().rev() {
            for _ in 0..s {
                entries.push((idx, false));
                entries.push((idx, true));
            }
        }
        Self { entries, fields }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(u32, bool)] {
        &self.entries
    }

    pub fn field(&self, idx: u32) -> Option<&VectorFieldSpec> {
        self.fields.get(&idx)
    }

    pub fn fields(&self) -> &BTreeMap<u32, VectorFieldSpec> {
        &self.fields
    }

    /// Total number of times L_i or L̄_i appears, per index.
    pub fn counts(&self) -> BTreeMap<u32, u32> {
        let mut counts = BTreeMap::new();
        for &(idx, _) in &self.entries {
            *counts.entry(idx).or_insert(0) += 1;
        }
        counts
    }

    /// Ordered in the sense of Catlin: contiguous blocks of a single index,
    /// indices strictly decreasing along the list.
    pub fn is_ordered(&self) -> bool {
        let mut last: Option<u32> = None;
        let mut seen = Vec::new();
        for &(idx, _) in &self.entries {
            match last {
                Some(prev) if idx == prev => {}
                Some(prev) => {
                    if idx >= prev || seen.contains(&idx) {
                        return false;
                    }
                    seen.push(prev);
                    last = Some(idx);
                }
                None => last = Some(idx),
            }
        }
        true
    }

    /// Equally-ordered: ordered, with each block an [L, L̄] pair pattern.
    pub fn is_equally_ordered(&self) -> bool {
        if !self.is_ordered() || self.entries.len() % 2 != 0 {
            return false;
        }
        self.entries.chunks(2).all(|pair| {
            pair[0].0 == pair[1].0 && !pair[0].1 && pair[1].1
        })
    }

    /// The ordered holomorphic half ℒ_h = {L¹, …, L^s} of an
    /// equally-ordered list: the odd-position entries.
    pub fn holomorphic_half(&self) -> Result<Vec<u32>, Error> {
        if !self.is_equally_ordered() {
            return Err(Error::NotEquallyOrdered(format!("{:?}", self.entries)));
        }
        Ok(self.entries.iter().step_by(2).map(|&(idx, _)| idx).collect())
    }
}

/// The complex Jacobian matrix of an ideal: entry (l, j) = ∂f_j/∂z_l with
/// rows indexed by z₂..z_n and one column per generator.
pub fn jacobian(ideal: &Ideal) -> Vec<Vec<HoloPoly>> {
    (2..=ideal.nvars)
        .map(|l| ideal.gens.iter().map(|g| g.diff(l)).collect())
        .collect()
}

/// The first-order derivative ideal ⟨Lf₁, …, Lf_N⟩ = v·J(f).
pub fn apply_vf(field: &VectorFieldSpec, ideal: &Ideal) -> Result<Ideal, Error> {
    if field.nvars() != ideal.nvars {
        return Err(Error::MismatchedVars { left: field.nvars(), right: ideal.nvars });
    }
    let gens = ideal.gens.iter().map(|g| field.apply(g)).collect();
    Ideal::new(ideal.nvars, gens)
}

/// Iterated derivative ideal over an all-holomorphic list; the last entry
/// acts first. The empty list returns the ideal unchanged.
pub fn derivative_ideal(list: &ListSpec, ideal: &Ideal) -> Result<Ideal, Error> {
    if list.entries.iter().any(|&(_, conj)| conj) {
        return Err(Error::ConjugatedEntry);
    }
    let mut out = ideal.clone();
    for &(idx, _) in list.entries.iter().rev() {
        let field = list
            .field(idx)
            .ok_or_else(|| Error::NotAdmissible(format!("no field bound for index {idx}")))?;
        out = apply_vf(field, &out)?;
    }
    Ok(out)
}

/// Convenience: derivative ideal along a sequence of explicit fields,
/// last field first.
pub fn derivative_ideal_fields(fields: &[VectorFieldSpec], ideal: &Ideal) -> Result<Ideal, Error> {
    let mut out = ideal.clone();
    for f in fields.iter().rev() {
        out = apply_vf(f, &out)?;
    }
    Ok(out)
}

/// v·J(A)·J*(B)·w* as a mixed polynomial: Σ_j (vJ(A))_j · conj((wJ(B))_j).
pub fn levi_product(
    a: &Ideal,
    b: &Ideal,
    v: &VectorFieldSpec,
    w: &VectorFieldSpec,
) -> Result<MixedPoly, Error> {
    if a.len() != b.len() {
        return Err(Error::GeneratorCountMismatch { left: a.len(), right: b.len() });
    }
    let va = apply_vf(v, a)?;
    let wb = apply_vf(w, b)?;
    let mut out = MixedPoly::zero(a.nvars);
    for (x, y) in va.gens().iter().zip(wb.gens().iter()) {
        out = out.checked_add(&MixedPoly::from_holo_pair(x, y))?;
    }
    Ok(out)
}

/// ℒ∂r for an equally-ordered list, evaluated through the ideal machinery:
/// with holomorphic half ℒ_h = {L¹, …, L^s}, the value is
/// v¹·J(ℒ′_h f)·J*(ℒ′_h f)·(v¹)* where ℒ′_h drops the first entry.
/// Evaluation at the origin is the constant term of the result.
pub fn script_l_partial_r(list: &ListSpec, ideal: &Ideal) -> Result<MixedPoly, Error> {
    let half = list.holomorphic_half()?;
    if half.is_empty() {
        return Err(Error::NotEquallyOrdered("list shorter than one pair".into()));
    }
    let first = half[0];
    let rest = ListSpec::new(
        half[1..].iter().map(|&i| (i, false)).collect(),
        list.fields.clone(),
    );
    let inner = derivative_ideal(&rest, ideal)?;
    let v1 = list
        .field(first)
        .ok_or_else(|| Error::NotAdmissible(format!("no field bound for index {first}")))?;
    levi_product(&inner, &inner, v1, v1)
}

/// Solves Σ_{k<ν} s_k/c_k + s_ν/c(ℒ) = 1/2 for c(ℒ).
///
/// `s_counts` are the holomorphic-half counts; `c_prev` the finite entries
/// below ν. Fails when s_ν = 0 or when the earlier terms already exhaust
/// the 1/2 budget (the list is not ν-admissible).
pub fn solve_c(
    s_counts: &BTreeMap<u32, u32>,
    c_prev: &BTreeMap<u32, BigRational>,
    nu: u32,
) -> Result<BigRational, Error> {
    let s_nu = *s_counts.get(&nu).unwrap_or(&0);
    if s_nu == 0 {
        return Err(Error::NotAdmissible(format!("s_{nu} = 0")));
    }
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut gap = half;
    for (&k, &s) in s_counts.iter() {
        if k >= nu || s == 0 {
            continue;
        }
        let ck = c_prev
            .get(&k)
            .ok_or_else(|| Error::NotAdmissible(format!("no entry c_{k} available")))?;
        gap -= BigRational::from_integer(BigInt::from(s)) / ck.clone();
    }
    if !gap.is_positive() {
        return Err(Error::NotAdmissible(format!(
            "accumulated weight leaves no budget at nu = {nu}"
        )));
    }
    Ok(BigRational::from_integer(BigInt::from(s_nu)) / gap)
}

/// Helper shared with the engine: α! · coefficient of α, i.e. D^α p (0).
pub fn derivative_at_zero(p: &HoloPoly, alpha: &Monomial) -> GaussianRational {
    p.coeff(alpha)
        .scale_rat(&BigRational::from_integer(alpha.factorial()))
}

/// Helper: the monomial `counts` as a multiindex.
pub fn counts_to_monomial(counts: &BTreeMap<u32, u32>) -> Monomial {
    Monomial::from_exponents(counts.iter().map(|(&i, &e)| (i, e)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::expand_squares;

    fn z(nvars: u32, idx: u32) -> HoloPoly {
        HoloPoly::variable(nvars, idx)
    }

    fn ideal(nvars: u32, gens: Vec<HoloPoly>) -> Ideal {
        Ideal::new(nvars, gens).unwrap()
    }

    #[test]
    fn jacobian_entries() {
        // ⟨z2^2⟩ (n=2): J = [2 z2]
        let j = jacobian(&ideal(2, vec![z(2, 2).pow(2)]));
        assert_eq!(j, vec![vec![z(2, 2).scale(&GaussianRational::from_int(2))]]);

        // ⟨z2, z3^2⟩ (n=3): [[1, 0], [0, 2 z3]]
        let j2 = jacobian(&ideal(3, vec![z(3, 2), z(3, 3).pow(2)]));
        assert_eq!(j2[0], vec![HoloPoly::one(3), HoloPoly::zero(3)]);
        assert_eq!(j2[1], vec![HoloPoly::zero(3), z(3, 3).scale(&GaussianRational::from_int(2))]);

        // zero ideal: zero matrix
        let j3 = jacobian(&ideal(2, vec![HoloPoly::zero(2)]));
        assert_eq!(j3, vec![vec![HoloPoly::zero(2)]]);
    }

    #[test]
    fn field_application() {
        // ∂2 on ⟨z2^2 z3⟩ → ⟨2 z2 z3⟩
        let l = VectorFieldSpec::coordinate(3, 2);
        let out = apply_vf(&l, &ideal(3, vec![&z(3, 2).pow(2) * &z(3, 3)])).unwrap();
        assert_eq!(out.gens()[0], (&z(3, 2) * &z(3, 3)).scale(&GaussianRational::from_int(2)));

        // kernel direction: (∂2 − ∂3) on ⟨z2 + z3⟩ → ⟨0⟩
        let l2 = VectorFieldSpec::constant(
            3,
            &[GaussianRational::one(), -GaussianRational::one()],
        );
        let out2 = apply_vf(&l2, &ideal(3, vec![&z(3, 2) + &z(3, 3)])).unwrap();
        assert!(out2.gens()[0].is_zero());

        // polynomial coefficient: v = (z3, 0) on ⟨z2^2⟩ → ⟨2 z2 z3⟩
        let l3 = VectorFieldSpec::new(3, vec![z(3, 3), HoloPoly::zero(3)]).unwrap();
        let out3 = apply_vf(&l3, &ideal(3, vec![z(3, 2).pow(2)])).unwrap();
        assert_eq!(out3.gens()[0], (&z(3, 2) * &z(3, 3)).scale(&GaussianRational::from_int(2)));
    }

    #[test]
    fn derivative_ideal_conventions() {
        let fields: BTreeMap<u32, VectorFieldSpec> =
            [(2, VectorFieldSpec::coordinate(3, 2)), (3, VectorFieldSpec::coordinate(3, 3))]
                .into_iter()
                .collect();

        // {∂2, ∂2} on ⟨z2^3⟩ → ⟨6 z2⟩
        let l = ListSpec::new(vec![(2, false), (2, false)], fields.clone());
        let out = derivative_ideal(&l, &ideal(3, vec![z(3, 2).pow(3)])).unwrap();
        assert_eq!(out.gens()[0], z(3, 2).scale(&GaussianRational::from_int(6)));

        // empty list is the identity
        let empty = ListSpec::new(vec![], fields.clone());
        let i = ideal(3, vec![z(3, 2).pow(2)]);
        assert_eq!(derivative_ideal(&empty, &i).unwrap(), i);

        // {∂2, ∂3} on ⟨z2 z3⟩ → ⟨1⟩
        let l2 = ListSpec::new(vec![(2, false), (3, false)], fields.clone());
        let out2 = derivative_ideal(&l2, &ideal(3, vec![&z(3, 2) * &z(3, 3)])).unwrap();
        assert_eq!(out2.gens()[0], HoloPoly::one(3));

        // conjugated entries are rejected
        let bad = ListSpec::new(vec![(2, true)], fields);
        assert!(matches!(
            derivative_ideal(&bad, &i),
            Err(Error::ConjugatedEntry)
        ));
    }

    #[test]
    fn levi_products() {
        let d2 = VectorFieldSpec::coordinate(2, 2);
        // A = B = ⟨z2^2⟩, v = w = ∂2 → 4 z2 z̄2
        let a = ideal(2, vec![z(2, 2).pow(2)]);
        let lp = levi_product(&a, &a, &d2, &d2).unwrap();
        let z2m = Monomial::var(2);
        assert_eq!(lp.coeff(&z2m, &z2m), GaussianRational::from_int(4));

        // A = B = ⟨z2, z3⟩, v = w = ∂2 → 1
        let d2_3 = VectorFieldSpec::coordinate(3, 2);
        let b = ideal(3, vec![z(3, 2), z(3, 3)]);
        let lp2 = levi_product(&b, &b, &d2_3, &d2_3).unwrap();
        assert_eq!(lp2.constant_term(), GaussianRational::one());
        assert_eq!(lp2.terms().count(), 1);

        // A = B = ⟨z2 z3⟩, v = ∂2, w = ∂3 → z3 z̄2  (hand-expanded oracle:
        // vJ = z3, wJ = z2, value z3·conj(z2))
        let d3_3 = VectorFieldSpec::coordinate(3, 3);
        let c = ideal(3, vec![&z(3, 2) * &z(3, 3)]);
        let lp3 = levi_product(&c, &c, &d2_3, &d3_3).unwrap();
        assert_eq!(lp3.coeff(&Monomial::var(3), &Monomial::var(2)), GaussianRational::one());
        assert_eq!(lp3.terms().count(), 1);

        // generator-count mismatch
        assert!(levi_product(&b, &ideal(3, vec![z(3, 2)]), &d2_3, &d2_3).is_err());
    }

    #[test]
    fn script_l_values() {
        let fields: BTreeMap<u32, VectorFieldSpec> =
            [(2, VectorFieldSpec::coordinate(2, 2))].into_iter().collect();

        // {L2, L̄2} on ⟨z2^2⟩: Levi form 4 z2 z̄2, constant term 0
        let short = ListSpec::equally_ordered(&[(2, 1)].into_iter().collect(), fields.clone());
        let i = ideal(2, vec![z(2, 2).pow(2)]);
        let v = script_l_partial_r(&short, &i).unwrap();
        assert_eq!(v.coeff(&Monomial::var(2), &Monomial::var(2)), GaussianRational::from_int(4));
        assert!(v.constant_term().is_zero());

        // {L2, L̄2, L2, L̄2} on ⟨z2^2⟩: constant term 4
        let full = ListSpec::equally_ordered(&[(2, 2)].into_iter().collect(), fields);
        let v2 = script_l_partial_r(&full, &i).unwrap();
        assert_eq!(v2.constant_term(), GaussianRational::from_int(4));

        // {L3, L̄3, L2, L̄2} on ⟨z2 z3⟩: constant term 1
        let fields3: BTreeMap<u32, VectorFieldSpec> =
            [(2, VectorFieldSpec::coordinate(3, 2)), (3, VectorFieldSpec::coordinate(3, 3))]
                .into_iter()
                .collect();
        let mixed = ListSpec::equally_ordered(
            &[(2, 1), (3, 1)].into_iter().collect(),
            fields3.clone(),
        );
        assert!(mixed.is_equally_ordered());
        // blocks come out in decreasing index order
        assert_eq!(mixed.entries()[0], (3, false));
        let i2 = ideal(3, vec![&z(3, 2) * &z(3, 3)]);
        let v3 = script_l_partial_r(&mixed, &i2).unwrap();
        assert_eq!(v3.constant_term(), GaussianRational::one());

        // non-equally-ordered lists are routed away
        let bad = ListSpec::new(vec![(2, false), (3, true)], fields3);
        assert!(matches!(
            script_l_partial_r(&bad, &i2),
            Err(Error::NotEquallyOrdered(_))
        ));
    }

    #[test]
    fn ordering_predicates() {
        let fields = BTreeMap::new();
        let ok = ListSpec::new(vec![(3, false), (3, true), (2, false), (2, true)], fields.clone());
        assert!(ok.is_ordered());
        assert!(ok.is_equally_ordered());
        // increasing blocks are not ordered in the Catlin sense
        let inc = ListSpec::new(vec![(2, false), (3, false)], fields.clone());
        assert!(!inc.is_ordered());
        // ordered but not equally-ordered: conjugates not adjacent
        let odd = ListSpec::new(
            vec![(3, false), (3, false), (3, true), (3, true)],
            fields,
        );
        assert!(odd.is_ordered());
        assert!(!odd.is_equally_ordered());
    }

    #[test]
    fn solve_c_cases() {
        // s = {ν: 2}, nothing earlier → 2/(1/2) = 4
        let c = solve_c(
            &[(4u32, 2u32)].into_iter().collect(),
            &BTreeMap::new(),
            4,
        )
        .unwrap();
        assert_eq!(c, BigRational::from_integer(BigInt::from(4)));

        // s = {2: 1, ν: 1}, c2 = 4 → 1/(1/2 − 1/4) = 4
        let c2 = solve_c(
            &[(2, 1), (3, 1)].into_iter().collect(),
            &[(2u32, BigRational::from_integer(BigInt::from(4)))].into_iter().collect(),
            3,
        )
        .unwrap();
        assert_eq!(c2, BigRational::from_integer(BigInt::from(4)));

        // s = {2: 2, ν: 1}, c2 = 4 → gap = 0, not admissible
        let bad = solve_c(
            &[(2, 2), (3, 1)].into_iter().collect(),
            &[(2u32, BigRational::from_integer(BigInt::from(4)))].into_iter().collect(),
            3,
        );
        assert!(matches!(bad, Err(Error::NotAdmissible(_))));

        // s_ν = 0 is not admissible either
        let bad2 = solve_c(&[(2, 1)].into_iter().collect(), &BTreeMap::new(), 3);
        assert!(matches!(bad2, Err(Error::NotAdmissible(_))));
    }

    #[test]
    fn script_equals_expand_of_full_derivative() {
        // the spec identity: levi_product(I,I,v,v) = expand_squares(apply_vf(v,I))
        let v = VectorFieldSpec::new(3, vec![z(3, 3), HoloPoly::one(3)]).unwrap();
        let i = ideal(3, vec![&z(3, 2).pow(2) + &(&z(3, 2) * &z(3, 3)), z(3, 3).pow(2)]);
        let lhs = levi_product(&i, &i, &v, &v).unwrap();
        let rhs = expand_squares(apply_vf(&v, &i).unwrap().gens()).unwrap();
        assert_eq!(lhs, rhs);
    }
}
