//! Deterministic randomized suites shared by the property tests, the
//! acceptance suite, and the `crossterm-check` command. Everything is
//! seeded (`MTYPE_SEED` at the CLI); the same seed reproduces the same
//! instances.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{CoordChange, GaussianRational, HoloPoly, Monomial};
use crate::engine::{crossterm_verdict, CrosstermVerdict};
use crate::weights::{holo_weight, Weight};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_coeff(rng: &mut ChaCha8Rng) -> GaussianRational {
    let pick = |rng: &mut ChaCha8Rng| -> i64 {
        let v: i64 = rng.random_range(-3..=3);
        if v == 0 {
            1
        } else {
            v
        }
    };
    let re = pick(rng);
    let im = if rng.random_bool(0.4) { rng.random_range(-2..=2) } else { 0 };
    GaussianRational::complex(re, im)
}

pub fn random_monomial(rng: &mut ChaCha8Rng, nvars: u32, max_degree: u32) -> Monomial {
    loop {
        let exps: Vec<(u32, u32)> = (2..=nvars)
            .map(|i| (i, rng.random_range(0..=max_degree.min(3))))
            .collect();
        let m = Monomial::from_exponents(exps);
        if !m.is_one() && m.degree() <= max_degree {
            return m;
        }
    }
}

pub fn random_poly(rng: &mut ChaCha8Rng, nvars: u32, max_degree: u32, max_terms: usize) -> HoloPoly {
    let terms = rng.random_range(1..=max_terms);
    HoloPoly::from_terms(
        nvars,
        (0..terms).map(|_| (random_monomial(rng, nvars, max_degree), random_coeff(rng))),
    )
}

pub fn random_ideal_gens(rng: &mut ChaCha8Rng, nvars: u32) -> Vec<HoloPoly> {
    let count = rng.random_range(1..=3);
    (0..count).map(|_| random_poly(rng, nvars, 4, 3)).collect()
}

/// A random invertible triangular change: a shear in a random variable
/// composed with an optional unit-triangular linear mix.
pub fn random_triangular_change(rng: &mut ChaCha8Rng, nvars: u32) -> CoordChange {
    let mut ch = CoordChange::identity(nvars);
    if nvars >= 3 && rng.random_bool(0.5) {
        // unit upper-triangular mix of z2..zn
        let dim = (nvars - 1) as usize;
        let mut m: Vec<Vec<GaussianRational>> = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| {
                        if i == j {
                            GaussianRational::one()
                        } else if j > i && rng.random_bool(0.4) {
                            GaussianRational::from_int(rng.random_range(-2..=2))
                        } else {
                            GaussianRational::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        // keep it invertible even when the off-diagonal draws were zero
        m[0][dim - 1] = m[0][dim - 1].clone();
        ch.push_linear((2..=nvars).collect(), m).expect("unit triangular is invertible");
    }
    let var = rng.random_range(2..=nvars);
    // psi independent of the sheared variable
    let psi = HoloPoly::from_terms(
        nvars,
        (0..rng.random_range(0..=2usize)).filter_map(|_| {
            let m = random_monomial(rng, nvars, 3);
            if m.involves(var) {
                None
            } else {
                Some((m, random_coeff(rng)))
            }
        }),
    );
    let scale = GaussianRational::from_int(*[1i64, 1, 2, -1].get(rng.random_range(0..4)).unwrap());
    ch.push_shear(var, scale, psi).expect("valid shear");
    ch
}

/// Phase-permutation recombination: permutes the generator list and
/// multiplies each generator by a unit i^k. The tail Σ|f_j|² is unchanged.
pub fn recombine(gens: &[HoloPoly], seed: u64) -> Vec<HoloPoly> {
    let mut rng = rng(seed);
    let mut order: Vec<usize> = (0..gens.len()).collect();
    // Fisher-Yates
    for i in (1..order.len()).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    order
        .into_iter()
        .map(|j| {
            let mut g = gens[j].clone();
            for _ in 0..rng.random_range(0..4u32) {
                g = g.scale(&GaussianRational::i());
            }
            g
        })
        .collect()
}

/// All monomials in z₂..z_n of weighted degree exactly 1/2 for a finite
/// weight; the building blocks of random models.
pub fn half_weight_basis(lam: &Weight) -> Vec<Monomial> {
    let n = lam.len() as u32;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let max_exp: u32 = 12;
    let mut out = Vec::new();
    let mut stack: Vec<(u32, Monomial)> = vec![(2, Monomial::one())];
    while let Some((var, m)) = stack.pop() {
        if var > n {
            if !m.is_one() && holo_weight(&m, lam) == half {
                out.push(m);
            }
            continue;
        }
        for e in 0..=max_exp {
            let next = if e == 0 { m.clone() } else { m.with_exponent(var, e) };
            if holo_weight(&next, lam) > half {
                break;
            }
            stack.push((var + 1, next));
        }
    }
    out.sort();
    out
}

/// A random balanced model: a finite weight from a small pool and 1..=3
/// generators assembled from its weight-1/2 monomials with random
/// Gaussian-rational coefficients.
pub fn random_model(rng: &mut ChaCha8Rng) -> (Weight, Vec<HoloPoly>) {
    const POOL: &[&[i64]] = &[
        &[1, 4],
        &[1, 6],
        &[1, 8],
        &[1, 4, 4],
        &[1, 4, 6],
        &[1, 4, 8],
        &[1, 6, 6],
        &[1, 2, 4],
        &[1, 2, 6],
        &[1, 6, 12],
    ];
    let lam = Weight::from_ints(POOL[rng.random_range(0..POOL.len())]);
    let basis = half_weight_basis(&lam);
    let nvars = lam.len() as u32;
    let count = rng.random_range(1..=3usize);
    let gens = (0..count)
        .map(|_| {
            let terms = rng.random_range(1..=basis.len().min(3));
            let mut picked = Vec::new();
            while picked.len() < terms {
                let m = basis[rng.random_range(0..basis.len())].clone();
                if !picked.contains(&m) {
                    picked.push(m);
                }
            }
            HoloPoly::from_terms(nvars, picked.into_iter().map(|m| (m, random_coeff(rng))))
        })
        .collect();
    (lam, gens)
}

/// Stage consistency of a monomial against a c-context: at every earlier
/// stage j its pooled X-value must not undercut the already fixed entry
/// c_j — a monomial violating this could never appear in the generators
/// at stage ν, because stage j would have accepted the smaller value.
/// Lemma 3.1's inequalities are about monomials in context, so the random
/// suite only emits consistent ones.
pub fn stage_consistent(m: &Monomial, nu: u32, c_prev: &BTreeMap<u32, BigRational>) -> bool {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    for (&j, cj) in c_prev.iter() {
        if j >= nu {
            continue;
        }
        let top: u32 = m
            .exponents()
            .iter()
            .filter(|&&(i, _)| i >= j)
            .map(|&(_, e)| e)
            .sum();
        let mut gap = half.clone();
        for &(i, e) in m.exponents() {
            if i < j {
                let ci = match c_prev.get(&i) {
                    Some(c) => c.clone(),
                    None => BigRational::from_integer(BigInt::from(2)),
                };
                gap -= BigRational::from_integer(BigInt::from(e)) / ci;
            }
        }
        if top > 0 && gap > BigRational::from_integer(BigInt::from(0)) {
            let pooled = BigRational::from_integer(BigInt::from(top)) / gap;
            if &pooled < cj {
                return false;
            }
        }
    }
    true
}

/// A random (f, g, ν, c-context) triple for the crossterm suite, plus its
/// verdict. Only stage-consistent monomials are emitted.
pub fn random_crossterm_triple(
    rng: &mut ChaCha8Rng,
) -> (Monomial, Monomial, u32, BTreeMap<u32, BigRational>, CrosstermVerdict) {
    const CONTEXTS: &[&[(u32, i64)]] = &[
        &[],
        &[(2, 4)],
        &[(2, 4), (3, 4)],
        &[(2, 4), (3, 6)],
        &[(2, 6), (3, 8)],
        &[(2, 3)],
    ];
    let ctx = CONTEXTS[rng.random_range(0..CONTEXTS.len())];
    let c_prev: BTreeMap<u32, BigRational> = ctx
        .iter()
        .map(|&(i, v)| (i, BigRational::from_integer(BigInt::from(v))))
        .collect();
    let nu = ctx.last().map(|&(i, _)| i + 1).unwrap_or(2);
    let mono = |rng: &mut ChaCha8Rng| -> Monomial {
        loop {
            let exps: Vec<(u32, u32)> = (2..=nu).map(|i| (i, rng.random_range(0..=3))).collect();
            let m = Monomial::from_exponents(exps);
            if !m.is_one() && stage_consistent(&m, nu, &c_prev) {
                return m;
            }
        }
    };
    let f = mono(rng);
    let g = mono(rng);
    let verdict = crossterm_verdict(&f, &g, nu, &c_prev);
    (f, g, nu, c_prev, verdict)
}

/// The fixed agreement corpus: named instances with n ≤ 3 and generator
/// degree ≤ 6, covering diagonal powers, chains, crossterm cancellation,
/// Levi blocks, shears and infinite tails.
pub fn theorem_corpus() -> Vec<(String, u32, Vec<HoloPoly>)> {
    let z = |nvars: u32, idx: u32| HoloPoly::variable(nvars, idx);
    let mut out: Vec<(String, u32, Vec<HoloPoly>)> = Vec::new();
    let mut push = |name: &str, n: u32, gens: Vec<HoloPoly>| {
        out.push((name.to_string(), n, gens));
    };

    // diagonal powers in n = 2
    for a in 1..=5u32 {
        push(&format!("pow-{a}"), 2, vec![z(2, 2).pow(a)]);
    }
    // diagonal pairs in n = 3
    for (a, b) in [(1u32, 1u32), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3), (2, 4), (1, 5), (2, 5), (3, 4)] {
        push(&format!("diag-{a}-{b}"), 3, vec![z(3, 2).pow(a), z(3, 3).pow(b)]);
    }
    // chains
    push("chain-2-11", 3, vec![z(3, 2).pow(2), &z(3, 2) * &z(3, 3)]);
    push("chain-2-12", 3, vec![z(3, 2).pow(2), &z(3, 2) * &z(3, 3).pow(2)]);
    push("chain-3-11", 3, vec![z(3, 2).pow(3), &z(3, 2) * &z(3, 3)]);
    push("chain-3-21", 3, vec![z(3, 2).pow(3), &z(3, 2).pow(2) * &z(3, 3)]);
    push("chain-3-13", 3, vec![z(3, 2).pow(3), &z(3, 2) * &z(3, 3).pow(3)]);
    push("mixed-monomial", 3, vec![&z(3, 2) * &z(3, 3)]);
    push("mixed-monomial-21", 3, vec![&z(3, 2).pow(2) * &z(3, 3)]);
    // crossterm cancellation inside and across generators
    push("sum-squares", 3, vec![&z(3, 2).pow(2) + &z(3, 3).pow(2)]);
    push(
        "plus-minus",
        3,
        vec![&z(3, 2).pow(2) + &z(3, 3).pow(2), &z(3, 2).pow(2) - &z(3, 3).pow(2)],
    );
    push("i-phase", 3, vec![&z(3, 2).pow(2) + &z(3, 3).pow(2).scale(&GaussianRational::i())]);
    push("quadric-mix", 3, vec![&(&z(3, 2).pow(2) + &(&z(3, 2) * &z(3, 3))) + &z(3, 3).pow(2)]);
    push("one-gen-two-scales", 3, vec![&z(3, 2).pow(2) + &z(3, 3).pow(3)]);
    push("factored-quartic", 3, vec![&z(3, 2).pow(2) + &z(3, 3).pow(4)]);
    // shears
    push("shear-spec", 3, vec![(&z(3, 2) + &z(3, 3)).pow(2), z(3, 3).pow(3)]);
    push("shear-two-cubes", 3, vec![(&z(3, 2) + &z(3, 3)).pow(2), (&z(3, 2) - &z(3, 3)).pow(3)]);
    push("shear-inside", 3, vec![&z(3, 2).pow(2) + &(&z(3, 2) * &z(3, 3))]);
    push("shear-cubic-tail", 3, vec![&z(3, 2).pow(2) + &(&z(3, 2) * &z(3, 3).pow(3))]);
    push("square-of-shear", 3, vec![(&z(3, 2) + &z(3, 3).pow(2)).pow(2)]);
    // Levi blocks
    push("ball-slice", 2, vec![z(2, 2)]);
    push("flat-direction", 3, vec![z(3, 2)]);
    push("sphere", 3, vec![z(3, 2), z(3, 3)]);
    push("rotated-sphere", 3, vec![&z(3, 2) + &z(3, 3), &z(3, 2) - &z(3, 3)]);
    push("egg-2", 3, vec![z(3, 2), z(3, 3).pow(2)]);
    push("egg-3", 3, vec![z(3, 2), z(3, 3).pow(3)]);
    push("levi-shear", 3, vec![&z(3, 2) + &z(3, 3).pow(2)]);
    push("levi-shear-tail", 3, vec![&z(3, 2) + &z(3, 3).pow(2), z(3, 3).pow(3)]);
    push("levi-junk", 3, vec![z(3, 2), &(&z(3, 2) * &z(3, 3)) + &z(3, 3).pow(3)]);
    // infinite tails
    push("inf-tail", 3, vec![z(3, 2).pow(2)]);
    push("inf-tail-pair", 3, vec![z(3, 2).pow(2), &z(3, 2) * &z(3, 3).pow(2)]);
    push("inf-chain", 3, vec![z(3, 2), &z(3, 2) * &z(3, 3)]);
    // unit phases and rational coefficients
    push("phase-pair", 3, vec![z(3, 2).pow(2).scale(&GaussianRational::i()), z(3, 3).pow(3)]);
    push(
        "rational-coeffs",
        3,
        vec![
            z(3, 2).pow(2).scale(&GaussianRational::ratio(1, 2)),
            z(3, 3).pow(3).scale(&GaussianRational::complex(1, 1)),
        ],
    );
    push(
        "dup-generators",
        3,
        vec![z(3, 2).pow(2), z(3, 2).pow(2), z(3, 3).pow(3)],
    );

    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_size_and_shape() {
        let corpus = theorem_corpus();
        assert!(corpus.len() >= 40, "corpus has {} instances", corpus.len());
        for (name, n, gens) in &corpus {
            assert!(*n <= 3, "{name}");
            for g in gens {
                assert!(g.total_degree().unwrap_or(0) <= 6, "{name}");
                assert!(!g.involves(1), "{name}");
            }
        }
    }

    #[test]
    fn half_weight_basis_is_exact() {
        let lam = Weight::from_ints(&[1, 4, 6]);
        let basis = half_weight_basis(&lam);
        assert!(basis.contains(&Monomial::from_exponents([(2, 2)])));
        assert!(basis.contains(&Monomial::from_exponents([(3, 3)])));
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        for m in &basis {
            assert_eq!(holo_weight(m, &lam), half);
        }
    }

    #[test]
    fn recombination_preserves_tail() {
        use crate::algebra::expand_squares;
        let gens = theorem_corpus()
            .into_iter()
            .find(|(name, _, _)| name == "plus-minus")
            .unwrap()
            .2;
        let re = recombine(&gens, 7);
        assert_eq!(
            expand_squares(&gens).unwrap(),
            expand_squares(&re).unwrap()
        );
    }

    #[test]
    fn seeded_reproducibility() {
        let mut a = rng(42);
        let mut b = rng(42);
        let (la, ga) = random_model(&mut a);
        let (lb, gb) = random_model(&mut b);
        assert_eq!(la, lb);
        assert_eq!(ga, gb);
    }
}
