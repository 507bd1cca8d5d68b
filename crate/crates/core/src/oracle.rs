//! Independent brute-force implementations used to certify the engine:
//! ℒ∂r through the full commutator calculus with explicit ∂/∂z₁
//! components, exhaustive ordered-list enumeration for commutator-multitype
//! entries, and lex-supremum search for the multitype over candidate
//! weights. These deliberately share as little as possible with the fast
//! paths: the only common ground is the algebra layer.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::algebra::{CoordChange, GaussianRational, HoloPoly, MixedPoly, Monomial};
use crate::error::Error;
use crate::machinery::{ListSpec, VectorFieldSpec};
use crate::weights::{holo_weight, is_distinguished, is_weight, lex_compare, ExtRat, Weight};

/// A general first-order operator Σ a_k ∂/∂z_k + Σ b_k ∂/∂z̄_k with mixed
/// polynomial coefficients. Commutators of tangential fields leave the
/// (1,0) class, so this is the closure the direct computation works in.
#[derive(Clone, Debug)]
pub struct MixedField {
    nvars: u32,
    z: BTreeMap<u32, MixedPoly>,
    zbar: BTreeMap<u32, MixedPoly>,
}

impl MixedField {
    fn zero(nvars: u32) -> Self {
        Self { nvars, z: BTreeMap::new(), zbar: BTreeMap::new() }
    }

    fn insert_z(&mut self, k: u32, p: MixedPoly) {
        if !p.is_zero() {
            self.z.insert(k, p);
        }
    }

    fn insert_zbar(&mut self, k: u32, p: MixedPoly) {
        if !p.is_zero() {
            self.zbar.insert(k, p);
        }
    }

    /// Applies the operator to a function.
    pub fn apply(&self, f: &MixedPoly) -> MixedPoly {
        let mut out = MixedPoly::zero(self.nvars);
        for (&k, c) in &self.z {
            out = &out + &(c * &f.diff(k, false));
        }
        for (&k, c) in &self.zbar {
            out = &out + &(c * &f.diff(k, true));
        }
        out
    }

    /// [X, Y] as a first-order operator: coefficients X(Y_d) − Y(X_d).
    pub fn commutator(x: &MixedField, y: &MixedField) -> MixedField {
        let nvars = x.nvars;
        let mut out = MixedField::zero(nvars);
        let keys_z: Vec<u32> = x.z.keys().chain(y.z.keys()).copied().collect();
        for k in keys_z {
            let yc = y.z.get(&k).cloned().unwrap_or_else(|| MixedPoly::zero(nvars));
            let xc = x.z.get(&k).cloned().unwrap_or_else(|| MixedPoly::zero(nvars));
            out.insert_z(k, &x.apply(&yc) - &y.apply(&xc));
        }
        let keys_zbar: Vec<u32> = x.zbar.keys().chain(y.zbar.keys()).copied().collect();
        for k in keys_zbar {
            let yc = y.zbar.get(&k).cloned().unwrap_or_else(|| MixedPoly::zero(nvars));
            let xc = x.zbar.get(&k).cloned().unwrap_or_else(|| MixedPoly::zero(nvars));
            out.insert_zbar(k, &x.apply(&yc) - &y.apply(&xc));
        }
        out
    }

    /// Pairs the 1-form ∂r against the operator, r = 2·Re z₁ + tail:
    /// ∂r(X) = X_{z₁} + Σ_{k≥2} X_{z_k} · ∂tail/∂z_k.
    pub fn pair_dr(&self, tail: &MixedPoly) -> MixedPoly {
        let mut out = MixedPoly::zero(self.nvars);
        for (&k, c) in &self.z {
            if k == 1 {
                out = &out + c;
            } else {
                out = &out + &(c * &tail.diff(k, false));
            }
        }
        out
    }
}

/// A tangential (1,0) field with its ∂/∂z₁ coefficient made explicit:
/// L = Σ_{l≥2} v_l ∂/∂z_l + v₁ ∂/∂z₁ with v₁ = −Σ v_l ∂tail/∂z_l, so that
/// L(r) ≡ 0 holds identically for r = 2·Re z₁ + tail.
#[derive(Clone, Debug)]
pub struct FullVectorField {
    pub tangential: VectorFieldSpec,
    pub z1: MixedPoly,
}

impl FullVectorField {
    pub fn from_tangential(v: &VectorFieldSpec, tail: &MixedPoly) -> Self {
        let nvars = v.nvars();
        let mut z1 = MixedPoly::zero(nvars);
        for l in 2..=nvars {
            let c = v.coeff(l);
            if c.is_zero() {
                continue;
            }
            z1 = &z1 - &(&MixedPoly::from_holo(c) * &tail.diff(l, false));
        }
        Self { tangential: v.clone(), z1 }
    }

    /// Checks L(r) ≡ 0 as a mixed polynomial.
    pub fn is_tangent(&self, tail: &MixedPoly) -> bool {
        let mut lr = self.z1.clone();
        for l in 2..=self.tangential.nvars() {
            let c = self.tangential.coeff(l);
            if c.is_zero() {
                continue;
            }
            lr = &lr + &(&MixedPoly::from_holo(c) * &tail.diff(l, false));
        }
        lr.is_zero()
    }

    /// The field (or its conjugate) as a general first-order operator.
    pub fn as_operator(&self, conjugated: bool) -> MixedField {
        let nvars = self.tangential.nvars();
        let mut out = MixedField::zero(nvars);
        if conjugated {
            out.insert_zbar(1, self.z1.conj());
            for l in 2..=nvars {
                let c = self.tangential.coeff(l);
                if !c.is_zero() {
                    out.insert_zbar(l, MixedPoly::from_holo(c).conj());
                }
            }
        } else {
            out.insert_z(1, self.z1.clone());
            for l in 2..=nvars {
                let c = self.tangential.coeff(l);
                if !c.is_zero() {
                    out.insert_z(l, MixedPoly::from_holo(c));
                }
            }
        }
        out
    }
}

/// ℒ∂r = L¹ ⋯ L^{l−2} ∂r([L^{l−1}, L^l]) computed symbolically: the
/// commutator of the realized last two fields, paired against ∂r, then the
/// remaining fields applied right to left as first-order operators.
/// Returns the full value and its value at the origin.
pub fn direct_l_partial_r(
    list: &ListSpec,
    tail: &MixedPoly,
) -> Result<(MixedPoly, GaussianRational), Error> {
    let entries = list.entries();
    if entries.len() < 2 {
        return Err(Error::NotAdmissible("list must have length at least 2".into()));
    }
    let realize = |&(idx, conj): &(u32, bool)| -> Result<MixedField, Error> {
        let v = list
            .field(idx)
            .ok_or_else(|| Error::NotAdmissible(format!("no field bound for index {idx}")))?;
        Ok(FullVectorField::from_tangential(v, tail).as_operator(conj))
    };
    let l = entries.len();
    let x = realize(&entries[l - 2])?;
    let y = realize(&entries[l - 1])?;
    let mut value = MixedField::commutator(&x, &y).pair_dr(tail);
    for e in entries[..l - 2].iter().rev() {
        value = realize(e)?.apply(&value);
        if value.is_zero() {
            break;
        }
    }
    let at_zero = value.constant_term();
    Ok((value, at_zero))
}

/// Result of the exhaustive list search for one multitype entry.
#[derive(Clone, Debug)]
pub struct BruteEntry {
    pub value: ExtRat,
    /// Counts (l_{q+2}, …, l_ν), top direction and conjugation pattern of a
    /// minimizing list, when one exists.
    pub witness: Option<(BTreeMap<u32, u32>, VectorFieldSpec, Vec<(u32, bool)>)>,
    /// True when nothing was found and the length cap may have excluded
    /// admissible lists, i.e. the ∞ is only "∞ up to the bound".
    pub bound_hit: bool,
}

/// Enumerates every ordered ν-admissible list over the boundary-system
/// fields `lower_fields` (indices q+2..ν−1) and one top direction from
/// `top_directions`, up to total length `max_len`, evaluates ℒ∂r at 0 by
/// the direct route, and returns inf c(ℒ) over the lists with nonzero
/// value. c(ℒ) solves Σ l_k/c_k + l_ν/c(ℒ) = 1.
pub fn brute_commutator_entry(
    nu: u32,
    generators: &[HoloPoly],
    c_prev: &BTreeMap<u32, BigRational>,
    lower_fields: &BTreeMap<u32, VectorFieldSpec>,
    top_directions: &[VectorFieldSpec],
    max_len: usize,
) -> Result<BruteEntry, Error> {
    let tail = crate::algebra::expand_squares(generators)?;
    let one = BigRational::one();

    // All admissible count vectors, sorted by candidate value.
    let lower: Vec<u32> = lower_fields.keys().copied().filter(|&k| k < nu).collect();
    let mut vectors: Vec<(BigRational, BTreeMap<u32, u32>)> = Vec::new();
    let mut stack: Vec<(usize, BTreeMap<u32, u32>, BigRational, usize)> =
        vec![(0, BTreeMap::new(), BigRational::zero(), 0)];
    while let Some((pos, counts, used, total)) = stack.pop() {
        if pos == lower.len() {
            for l_nu in 1..=(max_len.saturating_sub(total)) {
                let denom = &one - &used;
                if !denom.is_positive() {
                    break;
                }
                let value = BigRational::from_integer(BigInt::from(l_nu as u32)) / denom;
                let mut c = counts.clone();
                c.insert(nu, l_nu as u32);
                vectors.push((value, c));
            }
            continue;
        }
        let k = lower[pos];
        let ck = c_prev
            .get(&k)
            .ok_or_else(|| Error::NotAdmissible(format!("missing c_{k}")))?;
        for lk in 0..=(max_len - total) {
            let used_next =
                &used + &(BigRational::from_integer(BigInt::from(lk as u32)) / ck.clone());
            if used_next >= one {
                break;
            }
            let mut c = counts.clone();
            if lk > 0 {
                c.insert(k, lk as u32);
            }
            stack.push((pos + 1, c, used_next, total + lk));
        }
    }
    vectors.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    vectors.dedup();

    let any_vectors = !vectors.is_empty();
    for (value, counts) in vectors {
        for top in top_directions {
            let mut fields = lower_fields.clone();
            fields.insert(nu, top.clone());
            // ordered arrangement: blocks of decreasing index
            let mut slots: Vec<u32> = Vec::new();
            for (&idx, &cnt) in counts.iter().rev() {
                slots.extend(std::iter::repeat(idx).take(cnt as usize));
            }
            let total = slots.len();
            if total < 2 {
                continue;
            }
            // All conjugation patterns. When the last two slots carry the
            // same field the commutator vanishes unless the pair is mixed,
            // so that bit can be fixed; otherwise flip all entries freely.
            let same_tail_field = slots[total - 1] == slots[total - 2];
            let free_bits = if same_tail_field { total - 1 } else { total };
            for mask in 0u64..(1u64 << free_bits) {
                let mut entries: Vec<(u32, bool)> = Vec::with_capacity(total);
                for (i, &idx) in slots.iter().enumerate().take(free_bits) {
                    entries.push((idx, mask >> i & 1 == 1));
                }
                if same_tail_field {
                    let last_conj = !entries[total - 2].1;
                    entries.push((slots[total - 1], last_conj));
                }
                let list = ListSpec::new(entries.clone(), fields.clone());
                let (_, at0) = direct_l_partial_r(&list, &tail)?;
                if !at0.is_zero() {
                    return Ok(BruteEntry {
                        value: ExtRat::Finite(value),
                        witness: Some((counts, top.clone(), entries)),
                        bound_hit: false,
                    });
                }
            }
        }
    }

    Ok(BruteEntry { value: ExtRat::Infinite, witness: None, bound_hit: any_vectors })
}

/// Search bounds for the multitype enumeration.
#[derive(Clone, Debug)]
pub struct Bounds {
    pub max_value: BigRational,
    pub max_denominator: u64,
}

impl Bounds {
    /// Generous default derived from the generator degrees.
    pub fn for_generators(gens: &[HoloPoly], nvars: u32) -> Self {
        let deg = gens.iter().filter_map(|g| g.total_degree()).max().unwrap_or(1).max(1) as i64;
        let mut max_value = BigRational::from_integer(BigInt::from(2 * deg));
        for _ in 2..nvars {
            max_value *= BigRational::from_integer(BigInt::from(2 * deg));
        }
        Self { max_value, max_denominator: 64 }
    }
}

#[derive(Clone, Debug)]
pub struct BruteMultitype {
    pub weight: Weight,
    pub bound_hit: bool,
    /// Index of the coordinate change (into the family) realizing it.
    pub family_index: usize,
}

/// The lex-largest distinguished weight over a finite candidate set and a
/// finite coordinate-change family. Candidate entries solve the pooled
/// weight-1/2 equations over exponent vectors drawn from the (transformed)
/// generators; each candidate weight is tested against the definition via
/// the exact pairwise tail check. Complete only over the supplied family —
/// `bound_hit` reports when a candidate was clipped by the bounds.
pub fn brute_multitype(
    generators: &[HoloPoly],
    nvars: u32,
    bounds: &Bounds,
    family: &[CoordChange],
) -> Result<BruteMultitype, Error> {
    let mut best: Option<(Weight, usize)> = None;
    let mut bound_hit = false;

    for (fi, ch) in family.iter().enumerate() {
        let gens = ch.apply_gens(generators);
        let mut entries = vec![ExtRat::Finite(BigRational::one())];
        if let Some(found) =
            descend(&gens, nvars, bounds, 2, &mut entries, &mut bound_hit)?
        {
            match &best {
                Some((w, _)) if lex_compare(&found, w)? != std::cmp::Ordering::Greater => {}
                _ => best = Some((found, fi)),
            }
        }
    }

    let (weight, family_index) = best.ok_or_else(|| {
        Error::NormalizationFailure("no distinguished weight found within bounds".into())
    })?;
    Ok(BruteMultitype { weight, bound_hit, family_index })
}

/// Depth-first search over candidate entries in decreasing order; the
/// first distinguished completion is the lex-largest one.
fn descend(
    gens: &[HoloPoly],
    nvars: u32,
    bounds: &Bounds,
    t: u32,
    entries: &mut Vec<ExtRat>,
    bound_hit: &mut bool,
) -> Result<Option<Weight>, Error> {
    if t > nvars {
        let w = Weight::new(entries.clone());
        if !is_weight(&w, false).valid {
            return Ok(None);
        }
        let rep = is_distinguished(gens, &w)?;
        return Ok(if rep.distinguished { Some(w) } else { None });
    }

    let prev = entries.last().cloned().unwrap_or_else(|| ExtRat::Finite(BigRational::one()));

    // ∞ first: it is the lex-largest choice and forces the rest to ∞.
    {
        let pad = (t..=nvars).map(|_| ExtRat::Infinite);
        let mut w_entries = entries.clone();
        w_entries.extend(pad);
        let w = Weight::new(w_entries);
        if is_weight(&w, false).valid {
            let rep = is_distinguished(gens, &w)?;
            if rep.distinguished {
                return Ok(Some(w));
            }
        }
    }

    // Finite candidates: λ_t with Σ_{i<t} α_i/λ_i + (Σ_{i≥t} α_i)/λ_t = 1/2
    // for a monomial α of some generator.
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut cands: Vec<BigRational> = Vec::new();
    for g in gens {
        'mono: for m in g.monomials() {
            let mut used = BigRational::zero();
            let mut pooled: u32 = 0;
            for &(idx, e) in m.exponents() {
                if idx < t {
                    let li = match &entries[(idx - 1) as usize] {
                        ExtRat::Finite(v) => v.clone(),
                        ExtRat::Infinite => continue 'mono,
                    };
                    used += BigRational::from_integer(BigInt::from(e)) / li;
                } else {
                    pooled += e;
                }
            }
            if pooled == 0 {
                continue;
            }
            let gap = &half - &used;
            if !gap.is_positive() {
                continue;
            }
            let lam = BigRational::from_integer(BigInt::from(pooled)) / gap;
            if lam > bounds.max_value
                || lam.denom() > &BigInt::from(bounds.max_denominator)
            {
                *bound_hit = true;
                continue;
            }
            if ExtRat::Finite(lam.clone()) < prev {
                continue;
            }
            if !cands.contains(&lam) {
                cands.push(lam);
            }
        }
    }
    cands.sort();
    for lam in cands.into_iter().rev() {
        entries.push(ExtRat::Finite(lam));
        if let Some(found) = descend(gens, nvars, bounds, t + 1, entries, bound_hit)? {
            entries.pop();
            return Ok(Some(found));
        }
        entries.pop();
    }
    Ok(None)
}

/// The weight-1/2 monomials of the generators under a weight; used by the
/// torsion sweep and by chain searches.
pub fn half_weight_monomials(gens: &[HoloPoly], lam: &Weight) -> Vec<Monomial> {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut out: Vec<Monomial> = Vec::new();
    for g in gens {
        for m in g.monomials() {
            if holo_weight(m, lam) == half && !out.contains(m) {
                out.push(m.clone());
            }
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::expand_squares;
    use crate::machinery::{script_l_partial_r, VectorFieldSpec};

    fn z(nvars: u32, idx: u32) -> HoloPoly {
        HoloPoly::variable(nvars, idx)
    }

    #[test]
    fn levi_form_of_ball_slice() {
        // {L2, L̄2} on tail of ⟨z2⟩ → constant 1
        let tail = expand_squares(&[z(2, 2)]).unwrap();
        let fields: BTreeMap<u32, VectorFieldSpec> =
            [(2, VectorFieldSpec::coordinate(2, 2))].into_iter().collect();
        let list = ListSpec::new(vec![(2, false), (2, true)], fields);
        let (_, at0) = direct_l_partial_r(&list, &tail).unwrap();
        assert_eq!(at0, GaussianRational::one());
    }

    #[test]
    fn fourth_order_degenerate_quadric() {
        // {L2, L̄2, L2, L̄2} on tail of ⟨z2^2⟩ → constant 4,
        // cross-checking machinery::script_l_partial_r
        let gens = vec![z(2, 2).pow(2)];
        let tail = expand_squares(&gens).unwrap();
        let fields: BTreeMap<u32, VectorFieldSpec> =
            [(2, VectorFieldSpec::coordinate(2, 2))].into_iter().collect();
        let list = ListSpec::equally_ordered(&[(2, 2)].into_iter().collect(), fields);
        let (_, at0) = direct_l_partial_r(&list, &tail).unwrap();
        assert_eq!(at0, GaussianRational::from_int(4));

        let ideal = crate::machinery::Ideal::new(2, gens).unwrap();
        let fast = script_l_partial_r(&list, &ideal).unwrap();
        assert_eq!(fast.constant_term(), at0);
    }

    #[test]
    fn identical_last_pair_vanishes() {
        // [L, L] = 0
        let tail = expand_squares(&[z(2, 2).pow(2)]).unwrap();
        let fields: BTreeMap<u32, VectorFieldSpec> =
            [(2, VectorFieldSpec::coordinate(2, 2))].into_iter().collect();
        let list = ListSpec::new(vec![(2, false), (2, false)], fields);
        let (value, at0) = direct_l_partial_r(&list, &tail).unwrap();
        assert!(value.is_zero());
        assert!(at0.is_zero());
    }

    #[test]
    fn tangency_of_full_fields() {
        let tail = expand_squares(&[z(3, 2).pow(2), &z(3, 2) * &z(3, 3)]).unwrap();
        let v = VectorFieldSpec::new(3, vec![z(3, 3), HoloPoly::one(3)]).unwrap();
        let full = FullVectorField::from_tangential(&v, &tail);
        assert!(full.is_tangent(&tail));
    }

    #[test]
    fn brute_entry_diagonal() {
        // ⟨z2^2⟩, ν = 2 → 4 with list {L2, L̄2, L2, L̄2}
        let gens = vec![z(2, 2).pow(2)];
        let out = brute_commutator_entry(
            2,
            &gens,
            &BTreeMap::new(),
            &BTreeMap::new(),
            &[VectorFieldSpec::coordinate(2, 2)],
            6,
        )
        .unwrap();
        assert_eq!(out.value, ExtRat::from_int(4));
        let (counts, _, _) = out.witness.unwrap();
        assert_eq!(counts.get(&2), Some(&4));
    }

    #[test]
    fn brute_entry_second_stage() {
        // ⟨z2 z3⟩, ν = 3 with c2 = 4 → 4
        let gens = vec![&z(3, 2) * &z(3, 3)];
        let lower: BTreeMap<u32, VectorFieldSpec> =
            [(2, VectorFieldSpec::coordinate(3, 2))].into_iter().collect();
        let out = brute_commutator_entry(
            3,
            &gens,
            &[(2u32, BigRational::from_integer(BigInt::from(4)))].into_iter().collect(),
            &lower,
            &[VectorFieldSpec::coordinate(3, 3)],
            6,
        )
        .unwrap();
        assert_eq!(out.value, ExtRat::from_int(4));
    }

    #[test]
    fn brute_multitype_small_cases() {
        // ⟨z2^2, z3^3⟩ → (1, 4, 6)
        let gens = vec![z(3, 2).pow(2), z(3, 3).pow(3)];
        let out = brute_multitype(
            &gens,
            3,
            &Bounds::for_generators(&gens, 3),
            &[CoordChange::identity(3)],
        )
        .unwrap();
        assert_eq!(out.weight, Weight::from_ints(&[1, 4, 6]));

        // strongly pseudoconvex: ⟨z2, z3⟩ → (1, 2, 2)
        let gens2 = vec![z(3, 2), z(3, 3)];
        let out2 = brute_multitype(
            &gens2,
            3,
            &Bounds::for_generators(&gens2, 3),
            &[CoordChange::identity(3)],
        )
        .unwrap();
        assert_eq!(out2.weight, Weight::from_ints(&[1, 2, 2]));
    }

    #[test]
    fn brute_multitype_shear_family() {
        // ⟨(z2+z3)^2, z3^3⟩ → (1, 4, 6) via the shear z2 ↦ z2 − z3
        let gens = vec![(&z(3, 2) + &z(3, 3)).pow(2), z(3, 3).pow(3)];
        let mut shear = CoordChange::identity(3);
        shear
            .push_shear(2, GaussianRational::one(), -&z(3, 3))
            .unwrap();
        let family = vec![CoordChange::identity(3), shear];
        let out = brute_multitype(&gens, 3, &Bounds::for_generators(&gens, 3), &family).unwrap();
        assert_eq!(out.weight, Weight::from_ints(&[1, 4, 6]));
        assert_eq!(out.family_index, 1);
    }
}
