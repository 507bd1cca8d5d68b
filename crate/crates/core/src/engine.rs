//! The iterative commutator-multitype computation, restated over the ideal
//! of holomorphic generators: Levi rank and block reduction, candidate
//! X-values from generator monomials, verification of each candidate by a
//! symbolic direction over the admissible subbundle, boundary-system
//! construction with the normalizing shear applied between stages, and the
//! final distinguished-weight soundness check.
//!
//! The architecture is candidate-then-verify: exponent formulas produce a
//! finite sorted candidate set, and a candidate is accepted only when the
//! derivative form 𝔉(0) is not identically zero as a polynomial in the
//! free direction (v, v̄). A concrete Gaussian-rational direction is then
//! extracted, turned into a coordinate, and the stage's holomorphic
//! function 𝔥_ν is sheared into that coordinate before the next stage.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::algebra::{CoordChange, GaussianRational, HoloPoly, Monomial};
use crate::error::Error;
use crate::machinery::{counts_to_monomial, derivative_at_zero, Ideal, VectorFieldSpec};
use crate::oracle::{brute_multitype, Bounds};
use crate::weights::{is_distinguished, is_weight, ExtRat, Weight};

/// The tuple 𝔠(0) = (c₁, …, c_n): c₁ = 1, c₂ = … = c_{q+1} = 2, then the
/// computed entries, ∞-padded past the last verifiable stage.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CommutatorMultitype {
    weight: Weight,
}

impl CommutatorMultitype {
    pub fn new(weight: Weight) -> Result<Self, Error> {
        let entries = weight.entries();
        if entries.first() != Some(&ExtRat::Finite(BigRational::one())) {
            return Err(Error::NormalizationFailure("first multitype entry must be 1".into()));
        }
        for w in entries.windows(2) {
            if w[0] > w[1] {
                return Err(Error::NormalizationFailure(
                    "multitype entries are not nondecreasing".into(),
                ));
            }
        }
        Ok(Self { weight })
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    pub fn entries(&self) -> &[ExtRat] {
        self.weight.entries()
    }
}

impl fmt::Display for CommutatorMultitype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.weight)
    }
}

/// Re or Im choice for a boundary-system function r_j = Re 𝔥_j / Im 𝔥_j.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ReIm {
    Re,
    Im,
}

impl fmt::Display for ReIm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReIm::Re => write!(f, "Re"),
            ReIm::Im => write!(f, "Im"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BoundarySystemEntry {
    pub index: u32,
    pub c: ExtRat,
    pub r_choice: ReIm,
    /// The holomorphic function whose Re/Im is r_index, expressed in the
    /// final coordinates.
    pub h: HoloPoly,
    pub field: VectorFieldSpec,
    /// Holomorphic-half counts s_k of the witnessing equally-ordered list;
    /// the Levi block uses the single pair {L_j, L̄_j}.
    pub witness_counts: BTreeMap<u32, u32>,
}

/// 𝔅_ν(0) = {r₁, r_{q+2}, …, r_ν; L₂, …, L_ν} together with the coordinate
/// changes that normalized it.
#[derive(Clone, Debug)]
pub struct BoundarySystem {
    pub rank: u32,
    pub entries: Vec<BoundarySystemEntry>,
    pub changes: CoordChange,
}

/// I_{𝔅_ν} = ⟨𝔥₂, …, 𝔥_ν⟩.
#[derive(Clone, Debug)]
pub struct BoundarySystemIdeal {
    pub gens: Vec<HoloPoly>,
}

/// Everything recorded at a stage, for replay against the oracle.
#[derive(Clone, Debug)]
pub struct StageRecord {
    pub nu: u32,
    pub value: ExtRat,
    pub shape: Option<BTreeMap<u32, u32>>,
    pub witness_monomial: Option<Monomial>,
    /// Direction over the free coordinates ν..n, in the coordinates the
    /// stage entered with.
    pub direction: Option<Vec<GaussianRational>>,
    pub generators_at_entry: Vec<HoloPoly>,
    pub lower_c: BTreeMap<u32, BigRational>,
}

#[derive(Clone, Debug)]
pub struct OracleAgreement {
    pub multitype: Weight,
    pub agrees: bool,
    pub bound_hit: bool,
}

#[derive(Clone, Debug)]
pub struct EngineOptions {
    /// Reject any accepted candidate above this value. The default is the
    /// generous degree-derived bound from [`Bounds::for_generators`].
    pub max_candidate: Option<BigRational>,
    /// Cross-check the final multitype against the brute-force oracle.
    pub oracle_verify: bool,
    pub max_denominator: u64,
    /// Test hook: doubles the last finite entry after the stage loop, so
    /// the final distinguished-weight verification must fail.
    pub sabotage_last_stage: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            max_candidate: None,
            oracle_verify: true,
            max_denominator: 64,
            sabotage_last_stage: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ComputeResult {
    pub n: u32,
    pub levi_rank: u32,
    pub multitype: CommutatorMultitype,
    pub system: BoundarySystem,
    pub ideal: BoundarySystemIdeal,
    pub stages: Vec<StageRecord>,
    pub transformed_generators: Vec<HoloPoly>,
    pub distinguished_verified: bool,
    pub oracle: Option<OracleAgreement>,
}

/// Levi rank data at the origin: the rank q of J(f)J*(f)(0), a basis of
/// tangential rows achieving the nonsingular block, and the complementary
/// kernel rows.
#[derive(Clone, Debug)]
pub struct LeviAnalysis {
    pub rank: u32,
    pub basis: Vec<VectorFieldSpec>,
    pub kernel: Vec<VectorFieldSpec>,
}

fn linear_rows(gens: &[HoloPoly], n: u32) -> Vec<Vec<GaussianRational>> {
    gens.iter()
        .map(|g| (2..=n).map(|i| g.linear_coeff(i)).collect())
        .collect()
}

/// Multiplies by the unit i^k that maximizes the leading coefficient in
/// the (re, im) lexicographic order; the canonical representative of a
/// generator modulo unit phases.
fn canonical_phase(g: &HoloPoly) -> HoloPoly {
    let Some((_, lead)) = g.leading_term() else { return g.clone() };
    let lead = lead.clone();
    let mut best: Option<(GaussianRational, HoloPoly)> = None;
    let mut unit = GaussianRational::one();
    for _ in 0..4 {
        let cand = &lead * &unit;
        let better = match &best {
            None => true,
            Some((c, _)) => (cand.re(), cand.im()) > (c.re(), c.im()),
        };
        if better {
            best = Some((cand, g.scale(&unit)));
        }
        unit = &unit * &GaussianRational::i();
    }
    best.expect("nonzero generator").1
}

/// Σ_t (u·g_t)·conj(w·g_t) over the generator gradients at 0.
fn levi_pairing(
    rows: &[Vec<GaussianRational>],
    u: &[GaussianRational],
    w: &[GaussianRational],
) -> GaussianRational {
    let mut total = GaussianRational::zero();
    for g in rows {
        let a = u
            .iter()
            .zip(g.iter())
            .fold(GaussianRational::zero(), |acc, (x, y)| &acc + &(x * y));
        let b = w
            .iter()
            .zip(g.iter())
            .fold(GaussianRational::zero(), |acc, (x, y)| &acc + &(x * y));
        total = &total + &(&a * &b.conj());
    }
    total
}

/// Rank of the Levi form at 0, with an orthogonalized basis of tangential
/// rows for the nonsingular block and the complementary kernel. Equals the
/// rank of the generators' linear parts.
pub fn levi_rank(ideal: &Ideal) -> LeviAnalysis {
    let n = ideal.nvars();
    let rows = linear_rows(ideal.gens(), n);
    let dim = (n - 1) as usize;
    let mut basis: Vec<Vec<GaussianRational>> = Vec::new();
    let mut kernel: Vec<Vec<GaussianRational>> = Vec::new();
    for i in 0..dim {
        let mut w: Vec<GaussianRational> = (0..dim)
            .map(|j| {
                if i == j {
                    GaussianRational::one()
                } else {
                    GaussianRational::zero()
                }
            })
            .collect();
        // Gram-Schmidt against the kept rows under the Levi pairing.
        for b in &basis {
            let n_b = levi_pairing(&rows, b, b);
            let p = levi_pairing(&rows, &w, b);
            if p.is_zero() {
                continue;
            }
            let f = &p / &n_b;
            for (wj, bj) in w.iter_mut().zip(b.iter()) {
                *wj = &*wj - &(&f * bj);
            }
        }
        // positive-semidefinite form: zero norm means the row pairs to
        // zero with everything
        if levi_pairing(&rows, &w, &w).is_zero() {
            kernel.push(w);
        } else {
            basis.push(w);
        }
    }
    LeviAnalysis {
        rank: basis.len() as u32,
        basis: basis
            .into_iter()
            .map(|r| VectorFieldSpec::constant(n, &r))
            .collect(),
        kernel: kernel
            .into_iter()
            .map(|r| VectorFieldSpec::constant(n, &r))
            .collect(),
    }
}

/// Outcome of a Lemma-3.1 X-value computation: a positive rational or the
/// non-admissible verdict with its reason.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct XValue {
    pub value: ExtRat,
    pub reason: Option<&'static str>,
}

impl XValue {
    fn finite(v: BigRational) -> Self {
        Self { value: ExtRat::Finite(v), reason: None }
    }

    fn infinite(reason: &'static str) -> Self {
        Self { value: ExtRat::Infinite, reason: Some(reason) }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

fn half() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(2))
}

/// X(|f|²) for the monomial square: l¹_ν / (1/2 − Σ_{i<ν} l¹_i/c_i), or ∞
/// when the list would not be ν-admissible.
pub fn x_square(alpha: &Monomial, nu: u32, c_prev: &BTreeMap<u32, BigRational>) -> XValue {
    let top = alpha.exponent(nu);
    if top == 0 {
        return XValue::infinite("l_nu = 0");
    }
    let mut gap = half();
    for &(idx, e) in alpha.exponents() {
        if idx >= nu {
            continue;
        }
        let Some(ci) = c_prev.get(&idx) else {
            return XValue::infinite("support below nu without a computed entry");
        };
        gap -= BigRational::from_integer(BigInt::from(e)) / ci.clone();
    }
    if !gap.is_positive() {
        return XValue::infinite("weight budget exhausted below nu");
    }
    XValue::finite(BigRational::from_integer(BigInt::from(top)) / gap)
}

/// X(f·ḡ) for a crossterm: (l_ν + l̂_ν) / (1 − Σ_{i<ν} (l_i + l̂_i)/c_i).
pub fn x_crossterm(
    alpha_f: &Monomial,
    alpha_g: &Monomial,
    nu: u32,
    c_prev: &BTreeMap<u32, BigRational>,
) -> XValue {
    let top = alpha_f.exponent(nu) + alpha_g.exponent(nu);
    if top == 0 {
        return XValue::infinite("l_nu = 0");
    }
    let mut denom = BigRational::one();
    for alpha in [alpha_f, alpha_g] {
        for &(idx, e) in alpha.exponents() {
            if idx >= nu {
                continue;
            }
            let Some(ci) = c_prev.get(&idx) else {
                return XValue::infinite("support below nu without a computed entry");
            };
            denom -= BigRational::from_integer(BigInt::from(e)) / ci.clone();
        }
    }
    if !denom.is_positive() {
        return XValue::infinite("weight budget exhausted below nu");
    }
    XValue::finite(BigRational::from_integer(BigInt::from(top)) / denom)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CrosstermCase {
    /// Both squares computable with X(|f|²) = X(|g|²).
    AI,
    /// Both computable, strictly different.
    AII,
    /// Neither square computable.
    BI,
    /// Exactly one square computable.
    BII,
}

impl fmt::Display for CrosstermCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CrosstermCase::AI => write!(f, "A(i)"),
            CrosstermCase::AII => write!(f, "A(ii)"),
            CrosstermCase::BI => write!(f, "B(i)"),
            CrosstermCase::BII => write!(f, "B(ii)"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CrosstermVerdict {
    pub case: CrosstermCase,
    pub x_f: XValue,
    pub x_g: XValue,
    pub x_fg: XValue,
    pub holds: bool,
    pub violation: Option<String>,
}

/// Classifies the (f, g) pair into the four crossterm cases and checks the
/// corresponding (in)equality of the three X-values. A violation must
/// never happen; it is reported rather than asserted so suites can count.
pub fn crossterm_verdict(
    f: &Monomial,
    g: &Monomial,
    nu: u32,
    c_prev: &BTreeMap<u32, BigRational>,
) -> CrosstermVerdict {
    let x_f = x_square(f, nu, c_prev);
    let x_g = x_square(g, nu, c_prev);
    let x_fg = x_crossterm(f, g, nu, c_prev);
    let (case, holds) = match (x_f.value.as_finite(), x_g.value.as_finite()) {
        (Some(a), Some(b)) => {
            if a == b {
                (CrosstermCase::AI, x_fg.value == x_f.value)
            } else {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                let ok = match x_fg.value.as_finite() {
                    Some(m) => lo < m && m < hi,
                    None => false,
                };
                (CrosstermCase::AII, ok)
            }
        }
        (None, None) => (CrosstermCase::BI, !x_fg.is_finite()),
        (one_finite, _) => {
            let xs = if one_finite.is_some() { &x_f } else { &x_g };
            let ok = match (xs.value.as_finite(), x_fg.value.as_finite()) {
                (Some(s), Some(m)) => s <= m,
                // crossterm itself not admissible: nothing to bound
                (_, None) => true,
                _ => false,
            };
            (CrosstermCase::BII, ok)
        }
    };
    let violation = if holds {
        None
    } else {
        Some(format!(
            "case {case}: X(|f|^2) = {}, X(|g|^2) = {}, X(f g̅) = {}",
            x_f.value, x_g.value, x_fg.value
        ))
    };
    CrosstermVerdict { case, x_f, x_g, x_fg, holds, violation }
}

// ---------------------------------------------------------------------
// stage helpers

type ShapeKey = Vec<(u32, u32)>;

/// Candidate X-values at stage ν from the squares of generator monomials:
/// lower counts are the exponents below ν, exponents at and above ν pool
/// into the top count served by the T_ν direction.
fn stage_candidates(
    gens: &[HoloPoly],
    nu: u32,
    q: u32,
    c_prev: &BTreeMap<u32, BigRational>,
) -> BTreeMap<BigRational, BTreeMap<ShapeKey, Monomial>> {
    let mut out: BTreeMap<BigRational, BTreeMap<ShapeKey, Monomial>> = BTreeMap::new();
    for g in gens {
        for m in g.monomials() {
            if (2..=q + 1).any(|i| m.involves(i)) {
                continue;
            }
            let pooled: u32 = m
                .exponents()
                .iter()
                .filter(|&&(i, _)| i >= nu)
                .map(|&(_, e)| e)
                .sum();
            let pooled_monomial =
                counts_to_monomial(&shape_of(m, nu, pooled));
            let xv = x_square(&pooled_monomial, nu, c_prev);
            let ExtRat::Finite(value) = xv.value else { continue };
            let shape: ShapeKey = shape_of(m, nu, pooled).into_iter().collect();
            let slot = out.entry(value).or_default().entry(shape).or_insert_with(|| m.clone());
            if *m < *slot {
                *slot = m.clone();
            }
        }
    }
    out
}

fn shape_of(m: &Monomial, nu: u32, pooled: u32) -> BTreeMap<u32, u32> {
    let mut shape: BTreeMap<u32, u32> = m
        .exponents()
        .iter()
        .filter(|&&(i, _)| i < nu)
        .map(|&(i, e)| (i, e))
        .collect();
    if pooled > 0 {
        shape.insert(nu, pooled);
    }
    shape
}

/// The nonzero coefficients of the symbolic form 𝔉(0) over a free direction
/// v supported on ν..n: for each generator j the polynomial
/// P_j(v) = s_top!·Σ_γ c_{j,γ} v^γ with c_{j,γ} the Taylor coefficient of
/// z^γ in ∂^{lower} g_j. 𝔉(0) = Σ_j |P_j(v)|² vanishes identically iff all
/// certificates are empty.
#[derive(Clone, Debug)]
struct SymbolicCert {
    /// (generator index, γ over ν..n, coefficient)
    coeffs: Vec<(usize, Monomial, GaussianRational)>,
}

fn verify_shape(gens: &[HoloPoly], nu: u32, shape: &BTreeMap<u32, u32>) -> Option<SymbolicCert> {
    let s_top = *shape.get(&nu)?;
    let lower_counts: BTreeMap<u32, u32> = shape
        .iter()
        .filter(|&(&i, _)| i < nu)
        .map(|(&i, &e)| (i, e))
        .collect();
    let lower = counts_to_monomial(&lower_counts);
    let mut coeffs = Vec::new();
    for (j, g) in gens.iter().enumerate() {
        let h = g.diff_multi(&lower);
        for (m, c) in h.terms() {
            if m.degree() == s_top && m.min_var().map_or(false, |v| v >= nu) {
                coeffs.push((j, m.clone(), c.clone()));
            }
        }
    }
    if coeffs.is_empty() {
        None
    } else {
        Some(SymbolicCert { coeffs })
    }
}

/// Deterministic search for a concrete direction with 𝔉(0) ≠ 0: coordinate
/// directions ν, ν+1, …, n first, then Gaussian-integer grids of growing
/// radius. Terminates because a nonzero polynomial cannot vanish on a grid
/// wider than its degree.
fn concrete_direction(
    cert: &SymbolicCert,
    nu: u32,
    n: u32,
) -> Result<Vec<GaussianRational>, Error> {
    let dims = (n - nu + 1) as usize;
    let eval = |v: &[GaussianRational]| -> bool {
        let mut per_gen: BTreeMap<usize, GaussianRational> = BTreeMap::new();
        for (j, gamma, c) in &cert.coeffs {
            let mut mono = c.clone();
            for &(idx, e) in gamma.exponents() {
                let x = &v[(idx - nu) as usize];
                for _ in 0..e {
                    mono = &mono * x;
                }
            }
            let entry = per_gen.entry(*j).or_insert_with(GaussianRational::zero);
            *entry = &*entry + &mono;
        }
        per_gen.values().any(|p| !p.is_zero())
    };

    for k in 0..dims {
        let mut v = vec![GaussianRational::zero(); dims];
        v[k] = GaussianRational::one();
        if eval(&v) {
            return Ok(v);
        }
    }
    let max_degree = cert
        .coeffs
        .iter()
        .map(|(_, g, _)| g.degree())
        .max()
        .unwrap_or(1);
    for radius in 1..=(max_degree as i64 + 1) {
        let side = (2 * radius + 1) as usize;
        let cells = side * side;
        let total = cells.pow(dims as u32);
        for code in 0..total {
            let mut rem = code;
            let mut v = Vec::with_capacity(dims);
            for _ in 0..dims {
                let cell = rem % cells;
                rem /= cells;
                let a = (cell % side) as i64 - radius;
                let b = (cell / side) as i64 - radius;
                v.push(GaussianRational::complex(a, b));
            }
            if v.iter().all(|c| c.is_zero()) {
                continue;
            }
            if eval(&v) {
                return Ok(v);
            }
        }
    }
    Err(Error::NormalizationFailure(
        "no concrete direction found for a verified candidate".into(),
    ))
}

/// The linear step moving `dir` (over the free coordinates ν..n) into the
/// ν-th coordinate; `None` when `dir` already is e_ν.
fn direction_to_coordinate(
    nu: u32,
    n: u32,
    dir: &[GaussianRational],
) -> Result<Option<(Vec<u32>, Vec<Vec<GaussianRational>>)>, Error> {
    let dims = dir.len();
    let is_unit_first = dir[0].is_one() && dir[1..].iter().all(|c| c.is_zero());
    if is_unit_first {
        return Ok(None);
    }
    let vars: Vec<u32> = (nu..=n).collect();
    let mut m: Vec<Vec<GaussianRational>> = (0..dims)
        .map(|i| {
            (0..dims)
                .map(|j| {
                    if i == j {
                        GaussianRational::one()
                    } else {
                        GaussianRational::zero()
                    }
                })
                .collect()
        })
        .collect();
    // column 0 (the new ν-direction) is dir
    for (i, row) in m.iter_mut().enumerate() {
        row[0] = dir[i].clone();
    }
    if dir[0].is_zero() {
        let p = dir
            .iter()
            .position(|c| !c.is_zero())
            .ok_or_else(|| Error::NormalizationFailure("zero direction".into()))?;
        for (i, row) in m.iter_mut().enumerate() {
            row[p] = if i == 0 { GaussianRational::one() } else { GaussianRational::zero() };
        }
    }
    Ok(Some((vars, m)))
}

/// The stage function 𝔥_ν = Σ_j (D₂ g_j)·conj(D₁ g_j (0)) with D₁ = ∂^{αf}
/// and D₂ = ∂^{αf − e_ν}, filtered to the terms the model admits: the
/// pivot term K·z_ν plus z_ν-free terms whose weight over the already
/// computed entries does not exceed 1/c_ν (with equality required when the
/// support is fully below ν; terms reaching into not-yet-weighted
/// variables are kept optimistically and the final distinguished check
/// backstops any miss).
fn build_h(
    gens: &[HoloPoly],
    alpha: &Monomial,
    nu: u32,
    q: u32,
    c_prev: &BTreeMap<u32, BigRational>,
    c_nu: &BigRational,
) -> (HoloPoly, GaussianRational) {
    let n = gens.first().map(|g| g.nvars()).unwrap_or(2);
    let alpha0 = alpha.with_exponent(nu, alpha.exponent(nu) - 1);
    let target = c_nu.recip();
    let two = BigRational::from_integer(BigInt::from(2));
    let weight_of = |idx: u32| -> Option<BigRational> {
        if (2..=q + 1).contains(&idx) {
            Some(two.recip())
        } else {
            c_prev.get(&idx).map(|c| c.recip()).or_else(|| {
                if idx == nu {
                    Some(c_nu.recip())
                } else {
                    None
                }
            })
        }
    };

    let mut h = HoloPoly::zero(n);
    let pivot = Monomial::var(nu);
    for g in gens {
        let d1_at_zero = derivative_at_zero(g, alpha);
        if d1_at_zero.is_zero() {
            continue;
        }
        let d2 = g.diff_multi(&alpha0);
        let mut kept = HoloPoly::zero(n);
        for (m, c) in d2.terms() {
            if *m == pivot {
                kept.insert_add(m.clone(), c.clone());
                continue;
            }
            if m.involves(nu) {
                continue;
            }
            let mut known = BigRational::zero();
            let mut beyond = false;
            for &(idx, e) in m.exponents() {
                match weight_of(idx) {
                    Some(w) => known += BigRational::from_integer(BigInt::from(e)) * w,
                    None => beyond = true,
                }
            }
            let keep = if beyond { known <= target } else { known == target };
            if keep {
                kept.insert_add(m.clone(), c.clone());
            }
        }
        h = &h + &kept.scale(&d1_at_zero.conj());
    }
    let k = h.coeff(&pivot);
    (h, k)
}

// ---------------------------------------------------------------------
// Levi reduction

struct LeviReduction {
    q: u32,
    gens: Vec<HoloPoly>,
    change: CoordChange,
    block_fields: Vec<VectorFieldSpec>,
}

/// Aligns the span of the generator linear parts with z₂..z_{q+1} by an
/// exact linear change, then turns each pivot generator g = z_i + (higher)
/// into the coordinate z_i by a shear whenever the higher part avoids the
/// block variables. The block fields are Gram-Schmidt orthogonalized under
/// the Levi pairing so the boundary-system ideal conditions hold exactly.
fn levi_reduce(gens: &[HoloPoly], n: u32) -> Result<LeviReduction, Error> {
    let rows = linear_rows(gens, n);
    let dim = (n - 1) as usize;
    let mut change = CoordChange::identity(n);

    // greedy independent pivot generators
    let mut picked: Vec<usize> = Vec::new();
    let mut picked_rows: Vec<Vec<GaussianRational>> = Vec::new();
    for (t, row) in rows.iter().enumerate() {
        if row.iter().all(|c| c.is_zero()) {
            continue;
        }
        let mut trial = picked_rows.clone();
        trial.push(row.clone());
        if matrix_rank(&trial) > picked_rows.len() {
            picked.push(t);
            picked_rows.push(row.clone());
        }
    }
    let q = picked.len() as u32;
    if q == 0 {
        return Ok(LeviReduction { q, gens: gens.to_vec(), change, block_fields: Vec::new() });
    }

    // complete the picked covectors to an invertible matrix B and change
    // coordinates by A = B⁻¹ so that picked generator i gets linear part
    // z_{i+1} exactly
    let pivot_cols = row_pivot_columns(&picked_rows);
    let mut b = picked_rows.clone();
    for col in 0..dim {
        if !pivot_cols.contains(&col) {
            let mut unit = vec![GaussianRational::zero(); dim];
            unit[col] = GaussianRational::one();
            b.push(unit);
        }
    }
    let a = crate::algebra::invert_matrix(&b).ok_or_else(|| {
        Error::PreNormalizationRequired("could not complete the Levi-block basis".into())
    })?;
    let vars: Vec<u32> = (2..=n).collect();
    change.push_linear(vars, a)?;
    let mut current = change.apply_gens(gens);

    // shear each pivot generator into its coordinate when the higher part
    // is free of the block variables
    for (i, &t) in picked.iter().enumerate() {
        let var = (i + 2) as u32;
        let higher = &current[t] - &HoloPoly::variable(n, var);
        if higher.is_zero() {
            continue;
        }
        if (2..=q + 1).any(|b| higher.involves(b)) {
            continue;
        }
        let mut step = CoordChange::identity(n);
        step.push_shear(var, GaussianRational::one(), -&higher)?;
        current = step.apply_gens(&current);
        change = change.compose(&step);
    }

    // orthogonalize the block directions under the Levi pairing of the
    // transformed generators
    let new_rows = linear_rows(&current, n);
    let mut block_fields = Vec::new();
    let mut kept: Vec<Vec<GaussianRational>> = Vec::new();
    for i in 0..q as usize {
        let mut w = vec![GaussianRational::zero(); dim];
        w[i] = GaussianRational::one();
        for b in &kept {
            let nb = levi_pairing(&new_rows, b, b);
            let p = levi_pairing(&new_rows, &w, b);
            if p.is_zero() {
                continue;
            }
            let f = &p / &nb;
            for (wj, bj) in w.iter_mut().zip(b.iter()) {
                *wj = &*wj - &(&f * bj);
            }
        }
        if levi_pairing(&new_rows, &w, &w).is_zero() {
            return Err(Error::PreNormalizationRequired(
                "Levi block is singular after alignment".into(),
            ));
        }
        block_fields.push(VectorFieldSpec::constant(n, &w));
        kept.push(w);
    }

    Ok(LeviReduction { q, gens: current, change, block_fields })
}

fn matrix_rank(rows: &[Vec<GaussianRational>]) -> usize {
    let mut m: Vec<Vec<GaussianRational>> = rows.to_vec();
    let cols = m.first().map(|r| r.len()).unwrap_or(0);
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else { continue };
        m.swap(rank, p);
        let inv = m[rank][col].inv().expect("nonzero pivot");
        for r in 0..m.len() {
            if r == rank || m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] * &inv;
            for j in 0..cols {
                m[r][j] = &m[r][j] - &(&f * &m[rank][j]);
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

fn row_pivot_columns(rows: &[Vec<GaussianRational>]) -> Vec<usize> {
    let mut m: Vec<Vec<GaussianRational>> = rows.to_vec();
    let cols = m.first().map(|r| r.len()).unwrap_or(0);
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else { continue };
        m.swap(rank, p);
        let inv = m[rank][col].inv().expect("nonzero pivot");
        for r in 0..m.len() {
            if r == rank || m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] * &inv;
            for j in 0..cols {
                m[r][j] = &m[r][j] - &(&f * &m[rank][j]);
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    pivots
}

// ---------------------------------------------------------------------
// the main computation

/// Runs the full iterative construction on polynomial generators in
/// z₂..z_n vanishing at the origin, returning the commutator multitype,
/// the boundary system with its coordinate-change log, the boundary-system
/// ideal, and per-stage records. The result is verified: the multitype is
/// checked to be a valid distinguished weight for the transformed
/// generators, and (unless disabled) cross-checked against the oracle.
pub fn compute(
    generators: &[HoloPoly],
    n: u32,
    opts: &EngineOptions,
) -> Result<ComputeResult, Error> {
    if n < 2 {
        return Err(Error::OutOfScope("need n >= 2".into()));
    }
    let mut gens: Vec<HoloPoly> = Vec::new();
    for g in generators {
        if g.nvars() != n {
            return Err(Error::MismatchedVars { left: n, right: g.nvars() });
        }
        if g.involves(1) {
            return Err(Error::OutOfScope("generators must not involve z1".into()));
        }
        if !g.constant_term().is_zero() {
            return Err(Error::OutOfScope("generators must vanish at the origin".into()));
        }
        if !g.is_zero() {
            gens.push(canonical_phase(g));
        }
    }
    // The tail Σ|f_j|² is invariant under permutations and unit phases of
    // the generator list, and so is everything computed from it. Fixing a
    // canonical order here makes the whole pipeline reproduce bit-identical
    // results under such recombinations.
    gens.sort_by(|a, b| {
        a.total_degree()
            .cmp(&b.total_degree())
            .then_with(|| a.to_string().cmp(&b.to_string()))
    });

    let max_candidate = opts
        .max_candidate
        .clone()
        .unwrap_or_else(|| Bounds::for_generators(&gens, n).max_value);

    let reduction = levi_reduce(&gens, n)?;
    let q = reduction.q;
    let mut current = reduction.gens;
    let mut change = reduction.change;

    let mut stages: Vec<StageRecord> = Vec::new();
    let mut c_fin: BTreeMap<u32, BigRational> = BTreeMap::new();
    let mut stage_entries: Vec<BoundarySystemEntry> = Vec::new();
    let mut infinite_tail = false;

    for nu in (q + 2)..=n {
        if infinite_tail {
            break;
        }
        let generators_at_entry = current.clone();
        let cands = stage_candidates(&current, nu, q, &c_fin);

        let mut accepted: Option<(BigRational, BTreeMap<u32, u32>, Monomial, SymbolicCert)> = None;
        'search: for (value, shapes) in &cands {
            for (shape_key, witness) in shapes {
                let shape: BTreeMap<u32, u32> = shape_key.iter().copied().collect();
                if let Some(cert) = verify_shape(&current, nu, &shape) {
                    accepted = Some((value.clone(), shape, witness.clone(), cert));
                    break 'search;
                }
            }
        }

        let Some((value, shape, witness, cert)) = accepted else {
            stages.push(StageRecord {
                nu,
                value: ExtRat::Infinite,
                shape: None,
                witness_monomial: None,
                direction: None,
                generators_at_entry,
                lower_c: c_fin.clone(),
            });
            infinite_tail = true;
            continue;
        };

        if value > max_candidate {
            return Err(Error::CandidateBoundExceeded(format!(
                "stage {nu} candidate {value} exceeds bound {max_candidate}"
            )));
        }

        let dir = concrete_direction(&cert, nu, n)?;
        if let Some((vars, matrix)) = direction_to_coordinate(nu, n, &dir)? {
            let mut step = CoordChange::identity(n);
            step.push_linear(vars, matrix)?;
            current = step.apply_gens(&current);
            change = change.compose(&step);
        }

        // with the witness direction now the ν-th coordinate, the witness
        // multiindex is the shape itself
        let alpha = counts_to_monomial(&shape);
        let (h, k) = build_h(&current, &alpha, nu, q, &c_fin, &value);
        if k.is_zero() {
            return Err(Error::NormalizationFailure(format!(
                "stage {nu}: pivot coefficient of h vanished"
            )));
        }
        let psi = &h - &HoloPoly::monomial(n, Monomial::var(nu), k.clone());
        if !psi.is_zero() {
            // unit-scale shear: the new coordinate is z_ν + Ψ/K, so the
            // substitution rule is z_ν ↦ z_ν − Ψ/K
            let mut step = CoordChange::identity(n);
            step.push_shear(
                nu,
                GaussianRational::one(),
                psi.scale(&-k.inv().expect("nonzero pivot")),
            )?;
            current = step.apply_gens(&current);
            change = change.compose(&step);
        }

        // the stage function in the final coordinates of this stage: the
        // recomputed h must be a clean multiple of z_ν
        let (h_final, k_final) = build_h(&current, &alpha, nu, q, &c_fin, &value);
        let psi_final = &h_final - &HoloPoly::monomial(n, Monomial::var(nu), k_final.clone());
        if k_final.is_zero() || !psi_final.is_zero() {
            return Err(Error::NormalizationFailure(format!(
                "stage {nu}: shear did not normalize h to a coordinate"
            )));
        }

        let lower_c = c_fin.clone();
        c_fin.insert(nu, value.clone());
        stage_entries.push(BoundarySystemEntry {
            index: nu,
            c: ExtRat::Finite(value.clone()),
            r_choice: ReIm::Re,
            h: h_final,
            field: VectorFieldSpec::coordinate(n, nu),
            witness_counts: shape.clone(),
        });
        stages.push(StageRecord {
            nu,
            value: ExtRat::Finite(value),
            shape: Some(shape),
            witness_monomial: Some(witness),
            direction: Some(dir),
            generators_at_entry,
            lower_c,
        });
    }

    // assemble the multitype
    let mut entries: Vec<ExtRat> = vec![ExtRat::Finite(BigRational::one())];
    for _ in 0..q {
        entries.push(ExtRat::from_int(2));
    }
    for nu in (q + 2)..=n {
        match c_fin.get(&nu) {
            Some(v) => entries.push(ExtRat::Finite(v.clone())),
            None => entries.push(ExtRat::Infinite),
        }
    }

    if opts.sabotage_last_stage {
        if let Some(pos) = entries.iter().rposition(|e| {
            matches!(e, ExtRat::Finite(v) if v > &BigRational::from_integer(BigInt::from(2)))
        }) {
            if let ExtRat::Finite(v) = &entries[pos] {
                let doubled = v * &BigRational::from_integer(BigInt::from(2));
                entries[pos] = ExtRat::Finite(doubled.clone());
                if let Some(e) = stage_entries.iter_mut().find(|e| e.index as usize == pos + 1) {
                    e.c = ExtRat::Finite(doubled);
                }
            }
        }
    }

    let weight = Weight::new(entries);
    let multitype = CommutatorMultitype::new(weight.clone())?;

    let validity = is_weight(&weight, false);
    if !validity.valid {
        return Err(Error::NormalizationFailure(format!(
            "computed multitype {weight} is not a valid weight: {}",
            validity.failure.unwrap_or_default()
        )));
    }

    let dist = is_distinguished(&current, &weight)?;
    if !dist.distinguished {
        let (a, b, w) = dist.offender.expect("offender present on failure");
        return Err(Error::NormalizationFailure(format!(
            "multitype {weight} is not distinguished for the transformed generators: \
             tail term ({a}, conj {b}) has weight {w} < 1"
        )));
    }

    // boundary system: Levi-block entries built at the final weight, then
    // the recorded stage entries
    let mut entries_out: Vec<BoundarySystemEntry> = Vec::new();
    let model = crate::weights::model_extract(&current, &weight);
    for (i, field) in reduction.block_fields.iter().enumerate() {
        let idx = (i + 2) as u32;
        let mut h = HoloPoly::zero(n);
        for m in &model {
            let coeff = field.apply(m).constant_term();
            if !coeff.is_zero() {
                h = &h + &m.scale(&coeff.conj());
            }
        }
        entries_out.push(BoundarySystemEntry {
            index: idx,
            c: ExtRat::from_int(2),
            r_choice: ReIm::Re,
            h,
            field: field.clone(),
            witness_counts: [(idx, 1)].into_iter().collect(),
        });
    }
    entries_out.extend(stage_entries);

    let system = BoundarySystem { rank: q, entries: entries_out, changes: change };
    let ideal = boundary_system_ideal(&system)?;

    let oracle = if opts.oracle_verify {
        let family = system.changes.prefixes();
        let mut bounds = Bounds::for_generators(&gens, n);
        bounds.max_denominator = opts.max_denominator;
        // make sure the oracle's window covers what the engine found
        for e in weight.entries() {
            if let ExtRat::Finite(v) = e {
                if v > &bounds.max_value {
                    bounds.max_value = v.clone();
                }
            }
        }
        let out = brute_multitype(&gens, n, &bounds, &family)?;
        let agrees = out.weight == weight;
        if !agrees {
            return Err(Error::OracleDisagreement {
                engine: weight.to_string(),
                oracle: out.weight.to_string(),
            });
        }
        Some(OracleAgreement { multitype: out.weight, agrees, bound_hit: out.bound_hit })
    } else {
        None
    };

    Ok(ComputeResult {
        n,
        levi_rank: q,
        multitype,
        system,
        ideal,
        stages,
        transformed_generators: current,
        distinguished_verified: true,
        oracle,
    })
}

/// Collects ⟨𝔥₂, …, 𝔥_ν⟩ from a boundary system, asserting holomorphy (by
/// construction of the entry type) and the Jacobian conditions
/// v_τ·J(𝔥_τ)(0) ≠ 0 and v_j·J(𝔥_τ)(0) = 0 for j > τ.
pub fn boundary_system_ideal(system: &BoundarySystem) -> Result<BoundarySystemIdeal, Error> {
    for (ti, entry) in system.entries.iter().enumerate() {
        if !entry.c.is_finite() {
            continue;
        }
        let grad_pair = |field: &VectorFieldSpec| field.apply(&entry.h).constant_term();
        let own = grad_pair(&entry.field);
        if own.is_zero() {
            return Err(Error::NormalizationFailure(format!(
                "boundary system: L_{} r_{} vanishes at 0",
                entry.index, entry.index
            )));
        }
        for later in system.entries.iter().skip(ti + 1) {
            let cross = grad_pair(&later.field);
            if !cross.is_zero() {
                return Err(Error::NormalizationFailure(format!(
                    "boundary system: v_{}·J(h_{})(0) = {} is nonzero",
                    later.index, entry.index, cross
                )));
            }
        }
    }
    Ok(BoundarySystemIdeal {
        gens: system
            .entries
            .iter()
            .filter(|e| e.c.is_finite())
            .map(|e| e.h.clone())
            .collect(),
    })
}
