//! Shear extraction from one-fewer-derivative functions, torsion
//! detection, balanced-chain search, and the complete normalization of
//! boundary systems for model sum-of-squares data.
//!
//! The central fact operationalized here: for a model tail r₀ and a
//! weight-1/2 monomial f of a generator, the function D^{α₀}D̄^{α}r₀ (one
//! holomorphic derivative short of full order) is holomorphic and has the
//! form K·z_pivot + Ψ with Ψ independent of the pivot variable — no
//! torsion can occur. The shears z̃ = K·z + Ψ assembled from these
//! functions normalize every boundary-system function to Re z_j.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::algebra::{expand_squares, CoordChange, GaussianRational, HoloPoly, MixedPoly, Monomial};
use crate::engine::{compute, EngineOptions};
use crate::error::Error;
use crate::machinery::Ideal;
use crate::oracle::half_weight_monomials;
use crate::weights::{holo_weight, model_extract, ExtRat, Weight};

/// The decomposition F = K·z_pivot + Ψ of a one-fewer-derivative function.
#[derive(Clone, Debug)]
pub struct ShearResult {
    pub pivot: u32,
    pub k: GaussianRational,
    pub psi: HoloPoly,
    pub f: HoloPoly,
}

fn half() -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(2))
}

/// Applies D^{α₀}D̄^{α} to the expanded model tail, where α is the
/// multiindex of the monomial `f` and α₀ drops one exponent at the pivot.
/// The default pivot is the smallest variable in the support of f; the
/// normalization of stage j passes `pivot = Some(j)` to drop at the top.
///
/// Errors: `TorsionDetected` when an antiholomorphic term survives (cannot
/// happen for genuine model input), `ZeroPivot` when K = 0.
pub fn lemma_shear(
    model_gens: &[HoloPoly],
    f: &Monomial,
    lam: &Weight,
    pivot: Option<u32>,
) -> Result<ShearResult, Error> {
    if !model_gens.iter().any(|g| !g.coeff(f).is_zero()) {
        return Err(Error::OutOfScope(format!(
            "{f} is not a monomial of any model generator"
        )));
    }
    if holo_weight(f, lam) != half() {
        return Err(Error::OutOfScope(format!(
            "{f} does not have weighted degree 1/2"
        )));
    }
    let pivot = match pivot {
        Some(p) => {
            if f.exponent(p) == 0 {
                return Err(Error::OutOfScope(format!("pivot z{p} is not in the support of {f}")));
            }
            p
        }
        None => f.min_var().expect("monomial of weight 1/2 is not constant"),
    };
    let alpha0 = f.with_exponent(pivot, f.exponent(pivot) - 1);

    let tail = expand_squares(model_gens)?;
    shear_from_tail(&tail, f, &alpha0, pivot, lam)
}

/// The derivative-and-decompose core, on an explicit tail. Separated out so
/// the torsion sweep can run against deliberately corrupted tails.
pub fn shear_from_tail(
    tail: &MixedPoly,
    f: &Monomial,
    alpha0: &Monomial,
    pivot: u32,
    lam: &Weight,
) -> Result<ShearResult, Error> {
    let value = tail.diff_multi(alpha0, f);
    let holo = match value.try_into_holo() {
        Ok(h) => h,
        Err((a, b)) => {
            return Err(Error::TorsionDetected(format!("{a}*conj({b})")));
        }
    };
    let k = holo.linear_coeff(pivot);
    if k.is_zero() {
        return Err(Error::ZeroPivot);
    }
    let psi = &holo - &HoloPoly::monomial(holo.nvars(), Monomial::var(pivot), k.clone());
    if psi.involves(pivot) {
        return Err(Error::NormalizationFailure(format!(
            "shear remainder for pivot z{pivot} still involves z{pivot}"
        )));
    }
    // every remainder monomial carries exactly the weight of the pivot
    let pivot_weight = lam.lambda(pivot).recip();
    for m in psi.monomials() {
        if holo_weight(m, lam) != pivot_weight {
            return Err(Error::NormalizationFailure(format!(
                "shear remainder term {m} does not have the pivot weight"
            )));
        }
    }
    Ok(ShearResult { pivot, k, psi, f: holo })
}

/// One torsion violation: the monomial swept and the surviving term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorsionViolation {
    pub monomial: Monomial,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct TorsionReport {
    pub checked: usize,
    pub violations: Vec<TorsionViolation>,
}

impl TorsionReport {
    pub fn all_holomorphic(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Sweeps every weight-1/2 monomial of every generator through the shear
/// extraction and reports the violations (none, for genuine models).
pub fn torsion_check(model_gens: &[HoloPoly], lam: &Weight) -> Result<TorsionReport, Error> {
    let tail = expand_squares(model_gens)?;
    Ok(torsion_check_tail(
        &tail,
        &half_weight_monomials(model_gens, lam),
        lam,
    ))
}

/// The same sweep against an explicit tail and monomial list; used by the
/// negative-control test that injects a non-square term by hand.
pub fn torsion_check_tail(
    tail: &MixedPoly,
    monomials: &[Monomial],
    lam: &Weight,
) -> TorsionReport {
    let mut violations = Vec::new();
    for f in monomials {
        let Some(pivot) = f.min_var() else { continue };
        let alpha0 = f.with_exponent(pivot, f.exponent(pivot) - 1);
        match shear_from_tail(tail, f, &alpha0, pivot, lam) {
            Ok(_) => {}
            Err(Error::TorsionDetected(d)) => {
                violations.push(TorsionViolation { monomial: f.clone(), detail: d });
            }
            Err(e) => {
                violations.push(TorsionViolation {
                    monomial: f.clone(),
                    detail: e.to_string(),
                });
            }
        }
    }
    TorsionReport { checked: monomials.len(), violations }
}

/// Searches the model generators for a balanced chain f(j) =
/// z₂^{k_j2}⋯z_j^{k_jj} with k_jj > 0, one monomial per j = 2..n whose
/// square appears in the tail. Absence is reported, not an error: the
/// chain is only guaranteed after a multitype-preserving change, and never
/// exists when the weight has infinite entries.
pub fn find_balanced_chain(model_gens: &[HoloPoly], lam: &Weight) -> Option<Vec<Monomial>> {
    let n = lam.len() as u32;
    let mut chain = Vec::new();
    for j in 2..=n {
        if matches!(lam.lambda(j), ExtRat::Infinite) {
            return None;
        }
        let mut found: Option<Monomial> = None;
        for g in model_gens {
            for m in g.monomials() {
                if m.exponent(j) == 0 || m.max_var() != Some(j) {
                    continue;
                }
                if found.as_ref().map_or(true, |cur| m < cur) {
                    found = Some(m.clone());
                }
            }
        }
        chain.push(found?);
    }
    Some(chain)
}

#[derive(Clone, Debug)]
pub struct NormalizationResult {
    pub changes: CoordChange,
    pub generators: Vec<HoloPoly>,
    /// The shear data per normalized stage index.
    pub shears: Vec<(u32, ShearResult)>,
}

/// The Theorem-1.2 normalization: first the engine's multitype-preserving
/// stage changes (which bring the generators into model position), then
/// for each stage index j past the Levi block with λ_j finite a residual
/// shear extracted from F = K·z_j + Ψ_j with unit-normalized pivot,
/// after which the recomputed boundary-system function r_j is Re z_j up to
/// its unit constant. The composed change preserves the weight: every
/// substituted term has the weighted degree of the variable it replaces.
pub fn normalize_boundary_system(
    generators: &[HoloPoly],
    lam: &Weight,
) -> Result<NormalizationResult, Error> {
    let n = lam.len() as u32;
    let nvars = generators.first().map(|g| g.nvars()).unwrap_or(n);
    if nvars != n {
        return Err(Error::MismatchedVars { left: nvars, right: n });
    }
    let ideal = Ideal::new(n, generators.to_vec())?;
    let q = crate::engine::levi_rank(&ideal).rank;

    let engine_out = compute(
        generators,
        n,
        &EngineOptions { oracle_verify: false, ..EngineOptions::default() },
    )?;
    if engine_out.multitype.weight() != lam {
        return Err(Error::NormalizationFailure(format!(
            "declared weight ({lam}) does not match the computed multitype {}",
            engine_out.multitype
        )));
    }
    let mut current = engine_out.transformed_generators.clone();
    let mut changes = engine_out.system.changes.clone();
    let mut shears = Vec::new();

    for j in (q + 2)..=n {
        let ExtRat::Finite(_) = lam.lambda(j) else { break };
        let model = model_extract(&current, lam);
        // glex-smallest weight-1/2 monomial with support in q+2..j and a
        // positive exponent at j
        let mut witness: Option<Monomial> = None;
        for g in &model {
            for m in g.monomials() {
                if m.exponent(j) == 0
                    || m.max_var().map_or(true, |v| v > j)
                    || m.min_var().map_or(true, |v| v < q + 2)
                {
                    continue;
                }
                if witness.as_ref().map_or(true, |cur| m < cur) {
                    witness = Some(m.clone());
                }
            }
        }
        let Some(w) = witness else {
            return Err(Error::NormalizationFailure(format!(
                "no weight-1/2 witness monomial with top variable z{j}"
            )));
        };
        let shear = lemma_shear(&model, &w, lam, Some(j))?;
        if !shear.psi.is_zero() {
            // normalize the pivot constant to 1: z̃ = z_j + Ψ/K, so the
            // substitution rule is z_j ↦ z_j − Ψ/K
            let mut step = CoordChange::identity(n);
            step.push_shear(
                j,
                GaussianRational::one(),
                shear.psi.scale(&-shear.k.inv().expect("nonzero pivot")),
            )?;
            current = step.apply_gens(&current);
            changes = changes.compose(&step);
        }
        shears.push((j, shear));
    }

    Ok(NormalizationResult { changes, generators: current, shears })
}

/// Convenience used by the acceptance suite: normalize, then recompute the
/// boundary system on the transformed generators and return it with the
/// normalization data.
pub fn normalize_and_recompute(
    generators: &[HoloPoly],
    n: u32,
    lam: &Weight,
) -> Result<(NormalizationResult, crate::engine::ComputeResult), Error> {
    let norm = normalize_boundary_system(generators, lam)?;
    let opts = EngineOptions { oracle_verify: false, ..EngineOptions::default() };
    let recomputed = compute(&norm.generators, n, &opts)?;
    Ok((norm, recomputed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Monomial;

    fn z(nvars: u32, idx: u32) -> HoloPoly {
        HoloPoly::variable(nvars, idx)
    }

    fn w(entries: &[i64]) -> Weight {
        Weight::from_ints(entries)
    }

    #[test]
    fn shear_on_chain_pair() {
        // gens [z2², z2 z3], Λ = (1,4,4), f = z2 z3 with the default
        // (smallest-index) pivot: F = D^{(0,1)} D̄^{(1,1)} r0 = z3 ... the
        // hand expansion gives the z2-coefficient through |z2 z3|² only.
        let gens = vec![z(3, 2).pow(2), &z(3, 2) * &z(3, 3)];
        let f = Monomial::from_exponents([(2, 1), (3, 1)]);
        let out = lemma_shear(&gens, &f, &w(&[1, 4, 4]), None).unwrap();
        assert_eq!(out.pivot, 2);
        assert_eq!(out.k, GaussianRational::one());
        assert!(out.psi.is_zero());
        assert_eq!(out.f, z(3, 2));
    }

    #[test]
    fn shear_pure_power() {
        // gens [z2²], f = z2²: F = D^{(1)} D̄^{(2)} (z2² z̄2²) = 4 z2
        let gens = vec![z(2, 2).pow(2)];
        let f = Monomial::from_exponents([(2, 2)]);
        let out = lemma_shear(&gens, &f, &w(&[1, 4]), None).unwrap();
        assert_eq!(out.k, GaussianRational::from_int(4));
        assert!(out.psi.is_zero());
    }

    #[test]
    fn non_model_monomial_rejected() {
        // z2³ has weight 3/4 ≠ 1/2 under (1,4,4)
        let gens = vec![z(3, 2).pow(2), z(3, 2).pow(3)];
        let f = Monomial::from_exponents([(2, 3)]);
        assert!(matches!(
            lemma_shear(&gens, &f, &w(&[1, 4, 4]), None),
            Err(Error::OutOfScope(_))
        ));
    }

    #[test]
    fn shear_with_remainder() {
        // gens [(z2+z3)²], Λ = (1,4,4), f = z2²: F = 4(z2 + z3)
        let gens = vec![(&z(3, 2) + &z(3, 3)).pow(2)];
        let f = Monomial::from_exponents([(2, 2)]);
        let out = lemma_shear(&gens, &f, &w(&[1, 4, 4]), None).unwrap();
        assert_eq!(out.k, GaussianRational::from_int(4));
        assert_eq!(out.psi, z(3, 3).scale(&GaussianRational::from_int(4)));
        assert!(!out.psi.involves(2));
    }

    #[test]
    fn torsion_free_models() {
        let gens = vec![z(3, 2).pow(2), &z(3, 2) * &z(3, 3)];
        let rep = torsion_check(&gens, &w(&[1, 4, 4])).unwrap();
        assert!(rep.all_holomorphic());
        assert_eq!(rep.checked, 2);
    }

    #[test]
    fn corrupted_tail_flagged() {
        // inject z2 z3·conj(z2 z3²): sweeping f = z2 z3 leaves the
        // antiholomorphic remnant 2 z2 z̄3
        let gens = vec![z(3, 2).pow(2), &z(3, 2) * &z(3, 3)];
        let lam = w(&[1, 4, 4]);
        let mut tail = expand_squares(&gens).unwrap();
        let bad = MixedPoly::from_holo_pair(
            &(&z(3, 2) * &z(3, 3)),
            &(&z(3, 2) * &z(3, 3).pow(2)),
        );
        tail = &tail + &bad;
        let monos = half_weight_monomials(&gens, &lam);
        let rep = torsion_check_tail(&tail, &monos, &lam);
        assert!(!rep.all_holomorphic());
        assert_eq!(rep.violations.len(), 1);
        assert_eq!(
            rep.violations[0].monomial,
            Monomial::from_exponents([(2, 1), (3, 1)])
        );
    }

    #[test]
    fn balanced_chains() {
        // [z2², z2 z3]: chain (z2², z2 z3)
        let lam = w(&[1, 4, 4]);
        let gens = vec![z(3, 2).pow(2), &z(3, 2) * &z(3, 3)];
        let chain = find_balanced_chain(&gens, &lam).unwrap();
        assert_eq!(chain.len(), 2);
        assert_eq!(chain[0], Monomial::from_exponents([(2, 2)]));
        assert_eq!(chain[1], Monomial::from_exponents([(2, 1), (3, 1)]));

        // [z2², z3³]: degenerate off-diagonal exponent is allowed
        let gens2 = vec![z(3, 2).pow(2), z(3, 3).pow(3)];
        let chain2 = find_balanced_chain(&gens2, &w(&[1, 4, 6])).unwrap();
        assert_eq!(chain2[1], Monomial::from_exponents([(3, 3)]));

        // [(z2+z3)²]: absent before normalization — at its multitype
        // (1, 4, ∞) no chain can terminate
        let gens3 = vec![(&z(3, 2) + &z(3, 3)).pow(2)];
        let lam_inf = Weight::new(vec![
            crate::weights::ExtRat::from_int(1),
            crate::weights::ExtRat::from_int(4),
            crate::weights::ExtRat::Infinite,
        ]);
        let model3 = crate::weights::model_extract(&gens3, &lam_inf);
        assert!(find_balanced_chain(&model3, &lam_inf).is_none());
    }

    #[test]
    fn normalize_already_normal() {
        let gens = vec![z(3, 2).pow(2), &z(3, 2) * &z(3, 3)];
        let lam = w(&[1, 4, 4]);
        let out = normalize_boundary_system(&gens, &lam).unwrap();
        assert!(out.changes.is_identity());
        // generators come back in the engine's canonical order
        assert_eq!(out.generators.len(), 2);
        assert!(out.generators.contains(&z(3, 2).pow(2)));
        assert!(out.generators.contains(&(&z(3, 2) * &z(3, 3))));
        // idempotence
        let again = normalize_boundary_system(&out.generators, &lam).unwrap();
        assert!(again.changes.is_identity());
        assert_eq!(again.generators, out.generators);
    }

    #[test]
    fn normalize_shear_case() {
        // [(z2+z3)², z3³] normalizes through z̃2 = z2 + z3
        let gens = vec![(&z(3, 2) + &z(3, 3)).pow(2), z(3, 3).pow(3)];
        let lam = w(&[1, 4, 6]);
        let out = normalize_boundary_system(&gens, &lam).unwrap();
        assert!(!out.changes.is_identity());
        assert!(out.generators.contains(&z(3, 2).pow(2)));
        assert!(out.generators.contains(&z(3, 3).pow(3)));
    }
}
