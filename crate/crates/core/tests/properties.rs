//! Property tests for the algebraic identities the modules promise. The
//! strategies draw a u64 seed and expand it through the deterministic
//! suite generators, so failures shrink to a reproducible seed.

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::RngCore;

use mtype_core::algebra::{expand_squares, HoloPoly, MixedPoly};
use mtype_core::machinery::{
    apply_vf, derivative_ideal_fields, levi_product, script_l_partial_r, Ideal, ListSpec,
    VectorFieldSpec,
};
use mtype_core::oracle::direct_l_partial_r;
use mtype_core::suites::{
    half_weight_basis, random_coeff, random_ideal_gens, random_model, random_poly,
    random_triangular_change, recombine, rng,
};
use mtype_core::weights::{
    holo_weight, is_distinguished, lex_compare, model_extract, weighted_degree, Weight,
};

fn small_weight_pool() -> Vec<Weight> {
    [
        vec![1, 4],
        vec![1, 6],
        vec![1, 4, 4],
        vec![1, 4, 6],
        vec![1, 2, 4],
        vec![1, 4, 8],
    ]
    .into_iter()
    .map(|v| Weight::from_ints(&v.iter().map(|&x| x as i64).collect::<Vec<_>>()))
    .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// expand_squares output always satisfies the Hermitian reality check.
    #[test]
    fn tail_reality(seed in any::<u64>()) {
        let mut r = rng(seed);
        let gens = random_ideal_gens(&mut r, 3);
        let tail = expand_squares(&gens).unwrap();
        prop_assert!(tail.is_hermitian());
    }

    /// substitute(substitute(p, ch), ch⁻¹) = p for triangular changes.
    #[test]
    fn substitution_roundtrip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = 3;
        let p = random_poly(&mut r, n, 5, 4);
        let ch = random_triangular_change(&mut r, n);
        let inv = ch.inverse().unwrap();
        prop_assert_eq!(inv.apply_holo(&ch.apply_holo(&p)), p);

        let tail = expand_squares(&random_ideal_gens(&mut r, n)).unwrap();
        prop_assert_eq!(inv.apply_mixed(&ch.apply_mixed(&tail)), tail);
    }

    /// substitution respects composition.
    #[test]
    fn substitution_composition(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = 3;
        let p = random_poly(&mut r, n, 4, 3);
        let ch1 = random_triangular_change(&mut r, n);
        let ch2 = random_triangular_change(&mut r, n);
        let composed = ch1.compose(&ch2);
        prop_assert_eq!(
            composed.apply_holo(&p),
            ch2.apply_holo(&ch1.apply_holo(&p))
        );
    }

    /// Holomorphic and antiholomorphic derivatives commute on MixedPoly.
    #[test]
    fn mixed_derivatives_commute(seed in any::<u64>()) {
        let mut r = rng(seed);
        let tail = expand_squares(&random_ideal_gens(&mut r, 3)).unwrap();
        prop_assert_eq!(
            tail.diff(2, false).diff(3, true),
            tail.diff(3, true).diff(2, false)
        );
        prop_assert_eq!(
            tail.diff(2, false).diff(3, false),
            tail.diff(3, false).diff(2, false)
        );
    }

    /// The tail is invariant under phase-permutation recombination.
    #[test]
    fn tail_recombination_invariance(seed in any::<u64>()) {
        let mut r = rng(seed);
        let gens = random_ideal_gens(&mut r, 3);
        let re = recombine(&gens, seed ^ 0x9e3779b9);
        prop_assert_eq!(expand_squares(&gens).unwrap(), expand_squares(&re).unwrap());
    }

    /// lex_compare is a total order: antisymmetric and transitive.
    #[test]
    fn lex_total_order(seed in any::<u64>()) {
        let mut r = rng(seed);
        let pool = small_weight_pool();
        let pool3: Vec<&Weight> = pool.iter().filter(|w| w.len() == 3).collect();
        let pick = |r: &mut rand_chacha::ChaCha8Rng| {
            pool3[(r.next_u32() as usize) % pool3.len()].clone()
        };
        let (a, b, c) = (pick(&mut r), pick(&mut r), pick(&mut r));
        let ab = lex_compare(&a, &b).unwrap();
        let ba = lex_compare(&b, &a).unwrap();
        prop_assert_eq!(ab, ba.reverse());
        if ab != std::cmp::Ordering::Greater && lex_compare(&b, &c).unwrap() != std::cmp::Ordering::Greater {
            prop_assert_ne!(lex_compare(&a, &c).unwrap(), std::cmp::Ordering::Greater);
        }
    }

    /// weighted_degree is additive under monomial multiplication.
    #[test]
    fn weighted_degree_additive(seed in any::<u64>()) {
        let mut r = rng(seed);
        let lam = Weight::from_ints(&[1, 4, 6]);
        let m1 = mtype_core::suites::random_monomial(&mut r, 3, 4);
        let m2 = mtype_core::suites::random_monomial(&mut r, 3, 4);
        prop_assert_eq!(
            holo_weight(&m1.mul(&m2), &lam),
            holo_weight(&m1, &lam) + holo_weight(&m2, &lam)
        );
        let beta = mtype_core::suites::random_monomial(&mut r, 3, 3);
        prop_assert_eq!(
            weighted_degree(&m1, &beta, &lam),
            holo_weight(&m1, &lam) + holo_weight(&beta, &lam)
        );
    }

    /// Splitting generators into model part plus higher-weight remainder
    /// never changes the distinguished verdict.
    #[test]
    fn distinguished_model_split(seed in any::<u64>()) {
        let mut r = rng(seed);
        let pool = small_weight_pool();
        let lam = pool[(r.next_u32() as usize) % pool.len()].clone();
        let n = lam.len() as u32;
        let gens = random_ideal_gens(&mut r, n);
        let model = model_extract(&gens, &lam);
        let mut split: Vec<HoloPoly> = Vec::new();
        for (g, m) in gens.iter().zip(model.iter()) {
            let rest = g.checked_sub(m).unwrap();
            if !m.is_zero() {
                split.push(m.clone());
            }
            if !rest.is_zero() {
                split.push(rest);
            }
        }
        let full = is_distinguished(&gens, &lam).unwrap().distinguished;
        let parts = is_distinguished(&split, &lam).unwrap().distinguished;
        prop_assert_eq!(full, parts);
    }

    // No monotonicity of distinguishedness in the entrywise order is
    // asserted anywhere: the spec records it as a non-assertion.

    /// levi_product(I, I, v, v) = expand_squares(apply_vf(v, I)): the
    /// "likewise a sum of squares" identity.
    #[test]
    fn levi_is_sum_of_squares(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = 3;
        let gens = random_ideal_gens(&mut r, n);
        let ideal = Ideal::new(n, gens).unwrap();
        let v = VectorFieldSpec::new(
            n,
            (2..=n).map(|_| random_poly(&mut r, n, 2, 2)).collect(),
        ).unwrap();
        let lhs = levi_product(&ideal, &ideal, &v, &v).unwrap();
        let rhs = expand_squares(apply_vf(&v, &ideal).unwrap().gens()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    /// apply_vf is linear in the field, generator-wise.
    #[test]
    fn field_linearity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = 3;
        let ideal = Ideal::new(n, random_ideal_gens(&mut r, n)).unwrap();
        let l = VectorFieldSpec::constant(n, &[random_coeff(&mut r), random_coeff(&mut r)]);
        let m = VectorFieldSpec::constant(n, &[random_coeff(&mut r), random_coeff(&mut r)]);
        let a = random_coeff(&mut r);
        let b = random_coeff(&mut r);
        let combo = VectorFieldSpec::linear_combination(&a, &l, &b, &m);
        let lhs = apply_vf(&combo, &ideal).unwrap();
        for (j, g) in lhs.gens().iter().enumerate() {
            let gl = apply_vf(&l, &ideal).unwrap().gens()[j].scale(&a);
            let gm = apply_vf(&m, &ideal).unwrap().gens()[j].scale(&b);
            prop_assert_eq!(g, &(&gl + &gm));
        }
    }

    /// Derivative-ideal composition for constant-coefficient fields:
    /// derivative over A++B equals derivative over A after derivative
    /// over B (B acts first under the operator-product convention).
    #[test]
    fn derivative_ideal_composition(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = 3;
        let ideal = Ideal::new(n, random_ideal_gens(&mut r, n)).unwrap();
        let field = |r: &mut rand_chacha::ChaCha8Rng| {
            VectorFieldSpec::constant(n, &[random_coeff(r), random_coeff(r)])
        };
        let a: Vec<VectorFieldSpec> = (0..2).map(|_| field(&mut r)).collect();
        let b: Vec<VectorFieldSpec> = (0..2).map(|_| field(&mut r)).collect();
        let ab: Vec<VectorFieldSpec> = a.iter().chain(b.iter()).cloned().collect();
        let lhs = derivative_ideal_fields(&ab, &ideal).unwrap();
        let rhs = derivative_ideal_fields(&a, &derivative_ideal_fields(&b, &ideal).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    /// script_l_partial_r agrees with the direct commutator computation at
    /// the origin on random equally-ordered lists (Remark 4.3(i)).
    #[test]
    fn script_matches_direct(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = 3;
        let gens = random_ideal_gens(&mut r, n);
        let ideal = Ideal::new(n, gens.clone()).unwrap();
        let tail = expand_squares(&gens).unwrap();

        // random equally-ordered shape over indices 2..=3, 1..=3 pairs
        let s2 = (r.next_u32() % 2) as u32;
        let s3 = 1 + (r.next_u32() % 2) as u32;
        let mut counts = BTreeMap::new();
        if s2 > 0 { counts.insert(2u32, s2); }
        counts.insert(3u32, s3);

        let mut fields: BTreeMap<u32, VectorFieldSpec> = BTreeMap::new();
        for idx in [2u32, 3] {
            let f = if r.next_u32() % 2 == 0 {
                VectorFieldSpec::constant(n, &[random_coeff(&mut r), random_coeff(&mut r)])
            } else {
                VectorFieldSpec::new(
                    n,
                    (2..=n).map(|_| random_poly(&mut r, n, 1, 2)).collect(),
                ).unwrap()
            };
            fields.insert(idx, f);
        }
        let list = ListSpec::equally_ordered(&counts, fields);
        let fast = script_l_partial_r(&list, &ideal).unwrap();
        let (_, direct_at0) = direct_l_partial_r(&list, &tail).unwrap();
        prop_assert_eq!(fast.constant_term(), direct_at0);
    }

    /// Every shear extraction over a genuine model is holomorphic, its Ψ
    /// avoids the pivot and carries exactly the pivot weight.
    #[test]
    fn shears_have_no_torsion(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (lam, gens) = random_model(&mut r);
        let report = mtype_core::normalizer::torsion_check(&gens, &lam).unwrap();
        prop_assert!(report.all_holomorphic());
    }

    /// The half-weight basis generator only emits exact weight-1/2
    /// monomials (the oracle the random models are built from).
    #[test]
    fn model_basis_weights(seed in any::<u64>()) {
        let mut r = rng(seed);
        let pool = small_weight_pool();
        let lam = pool[(r.next_u32() as usize) % pool.len()].clone();
        let basis = half_weight_basis(&lam);
        prop_assert!(!basis.is_empty());
        for m in &basis {
            prop_assert_eq!(
                holo_weight(m, &lam),
                num_rational::BigRational::new(1.into(), 2.into())
            );
        }
    }

    /// parse ∘ print is structural identity on random domains.
    #[test]
    fn parse_print_roundtrip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = 3;
        let count = 1 + (r.next_u32() % 3) as usize;
        let gens: Vec<HoloPoly> = (0..count).map(|_| random_poly(&mut r, n, 4, 3)).collect();
        let spec = mtype_core::domain::DomainSpec::new(n, gens);
        let printed = spec.to_string();
        let back = mtype_core::domain::parse(&printed).unwrap();
        prop_assert_eq!(back, spec);
    }
}

// a couple of deterministic identities that don't need randomness

#[test]
fn script_full_list_equals_expanded_derivative() {
    // the F-recursion endpoint: 𝔉 = expand_squares of the full derivative
    let n = 3;
    let z = |i: u32| HoloPoly::variable(n, i);
    let gens = vec![&z(2).pow(2) + &(&z(2) * &z(3)), z(3).pow(2)];
    let ideal = Ideal::new(n, gens).unwrap();
    let fields: BTreeMap<u32, VectorFieldSpec> = [
        (2u32, VectorFieldSpec::coordinate(n, 2)),
        (3u32, VectorFieldSpec::coordinate(n, 3)),
    ]
    .into_iter()
    .collect();
    let counts: BTreeMap<u32, u32> = [(2u32, 1u32), (3u32, 1u32)].into_iter().collect();
    let list = ListSpec::equally_ordered(&counts, fields.clone());
    let value = script_l_partial_r(&list, &ideal).unwrap();

    let half: Vec<VectorFieldSpec> = vec![fields[&3].clone(), fields[&2].clone()];
    let derived = derivative_ideal_fields(&half, &ideal).unwrap();
    let expanded = expand_squares(derived.gens()).unwrap();
    assert_eq!(value, expanded);
    let _ = MixedPoly::zero(n);
}
