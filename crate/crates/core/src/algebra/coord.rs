//! Exact holomorphic coordinate changes: invertible linear maps on the
//! tangential variables and triangular shears z_j ↦ c·z_j + Ψ(z_{≠j}).
//! Every change in this class has an exact inverse over ℚ(i), and
//! composition stays in the class.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::Error;

use super::gaussian::GaussianRational;
use super::holo::HoloPoly;
use super::mixed::MixedPoly;

/// One elementary substitution rule set.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ChangeStep {
    /// z_{vars[i]} ↦ Σ_j matrix[i][j]·z_{vars[j]} with an invertible matrix.
    Linear {
        vars: Vec<u32>,
        matrix: Vec<Vec<GaussianRational>>,
    },
    /// z_var ↦ scale·z_var + psi, scale ≠ 0, psi independent of z_var.
    Shear {
        var: u32,
        scale: GaussianRational,
        psi: HoloPoly,
    },
}

impl ChangeStep {
    fn rules(&self, nvars: u32) -> BTreeMap<u32, HoloPoly> {
        let mut rules = BTreeMap::new();
        match self {
            ChangeStep::Linear { vars, matrix } => {
                for (i, &v) in vars.iter().enumerate() {
                    let mut p = HoloPoly::zero(nvars);
                    for (j, &w) in vars.iter().enumerate() {
                        p = p
                            .checked_add(&HoloPoly::variable(nvars, w).scale(&matrix[i][j]))
                            .expect("same nvars");
                    }
                    rules.insert(v, p);
                }
            }
            ChangeStep::Shear { var, scale, psi } => {
                let p = HoloPoly::variable(nvars, *var)
                    .scale(scale)
                    .checked_add(psi)
                    .expect("same nvars");
                rules.insert(*var, p);
            }
        }
        rules
    }

    fn inverse(&self) -> Result<ChangeStep, Error> {
        match self {
            ChangeStep::Linear { vars, matrix } => {
                let inv = invert_matrix(matrix).ok_or(Error::NonInvertibleChange)?;
                Ok(ChangeStep::Linear { vars: vars.clone(), matrix: inv })
            }
            ChangeStep::Shear { var, scale, psi } => {
                let inv_scale = scale.inv().ok_or(Error::NonInvertibleChange)?;
                Ok(ChangeStep::Shear {
                    var: *var,
                    scale: inv_scale.clone(),
                    psi: psi.scale(&-inv_scale),
                })
            }
        }
    }
}

/// A composite coordinate change; steps apply left to right.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CoordChange {
    nvars: u32,
    steps: Vec<ChangeStep>,
}

impl CoordChange {
    pub fn identity(nvars: u32) -> Self {
        Self { nvars, steps: Vec::new() }
    }

    pub fn nvars(&self) -> u32 {
        self.nvars
    }

    pub fn is_identity(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[ChangeStep] {
        &self.steps
    }

    /// Validates and appends a linear step on the given variables.
    pub fn push_linear(
        &mut self,
        vars: Vec<u32>,
        matrix: Vec<Vec<GaussianRational>>,
    ) -> Result<(), Error> {
        if invert_matrix(&matrix).is_none() {
            return Err(Error::NonInvertibleChange);
        }
        for &v in &vars {
            if v < 2 || v > self.nvars {
                return Err(Error::NonInvertibleChange);
            }
        }
        self.steps.push(ChangeStep::Linear { vars, matrix });
        Ok(())
    }

    /// Validates and appends a shear step.
    pub fn push_shear(
        &mut self,
        var: u32,
        scale: GaussianRational,
        psi: HoloPoly,
    ) -> Result<(), Error> {
        if scale.is_zero() || psi.involves(var) || psi.nvars() != self.nvars {
            return Err(Error::NonInvertibleChange);
        }
        self.steps.push(ChangeStep::Shear { var, scale, psi });
        Ok(())
    }

    /// Shear built from the new coordinate z̃ = pivot_coeff·z_var + psi:
    /// the substitution rule is z_var ↦ (z_var − psi)/pivot_coeff.
    pub fn push_shear_from_new_coordinate(
        &mut self,
        var: u32,
        pivot_coeff: GaussianRational,
        psi: HoloPoly,
    ) -> Result<(), Error> {
        let inv = pivot_coeff.inv().ok_or(Error::NonInvertibleChange)?;
        self.push_shear(var, inv.clone(), psi.scale(&-inv))
    }

    /// `self` followed by `other`.
    pub fn compose(&self, other: &CoordChange) -> CoordChange {
        let mut steps = self.steps.clone();
        steps.extend(other.steps.iter().cloned());
        CoordChange { nvars: self.nvars, steps }
    }

    pub fn inverse(&self) -> Result<CoordChange, Error> {
        let mut steps = Vec::with_capacity(self.steps.len());
        for s in self.steps.iter().rev() {
            steps.push(s.inverse()?);
        }
        Ok(CoordChange { nvars: self.nvars, steps })
    }

    pub fn apply_holo(&self, p: &HoloPoly) -> HoloPoly {
        let mut out = p.clone();
        for s in &self.steps {
            out = out.substitute_map(&s.rules(self.nvars));
        }
        out
    }

    pub fn apply_mixed(&self, p: &MixedPoly) -> MixedPoly {
        let mut out = p.clone();
        for s in &self.steps {
            out = out.substitute_map(&s.rules(self.nvars));
        }
        out
    }

    pub fn apply_gens(&self, gens: &[HoloPoly]) -> Vec<HoloPoly> {
        gens.iter().map(|g| self.apply_holo(g)).collect()
    }

    /// The changes [identity, steps[..1], steps[..2], …, all steps].
    pub fn prefixes(&self) -> Vec<CoordChange> {
        let mut out = vec![CoordChange::identity(self.nvars)];
        for k in 1..=self.steps.len() {
            out.push(CoordChange { nvars: self.nvars, steps: self.steps[..k].to_vec() });
        }
        out
    }
}

/// Exact Gauss-Jordan inverse; `None` for singular input.
pub fn invert_matrix(m: &[Vec<GaussianRational>]) -> Option<Vec<Vec<GaussianRational>>> {
    let n = m.len();
    if m.iter().any(|row| row.len() != n) {
        return None;
    }
    let mut a: Vec<Vec<GaussianRational>> = m.to_vec();
    let mut inv: Vec<Vec<GaussianRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { GaussianRational::one() } else { GaussianRational::zero() })
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        let pinv = p.inv()?;
        for j in 0..n {
            a[col][j] = &a[col][j] * &pinv;
            inv[col][j] = &inv[col][j] * &pinv;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..n {
                a[r][j] = &a[r][j] - &(&f * &a[col][j]);
                inv[r][j] = &inv[r][j] - &(&f * &inv[col][j]);
            }
        }
    }
    Some(inv)
}

impl fmt::Display for ChangeStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChangeStep::Linear { vars, matrix } => {
                let mut first = true;
                for (i, &v) in vars.iter().enumerate() {
                    if !first {
                        write!(f, "; ")?;
                    }
                    first = false;
                    write!(f, "z{v} -> ")?;
                    let mut any = false;
                    for (j, &w) in vars.iter().enumerate() {
                        if matrix[i][j].is_zero() {
                            continue;
                        }
                        if any {
                            write!(f, " + ")?;
                        }
                        any = true;
                        if matrix[i][j].is_one() {
                            write!(f, "z{w}")?;
                        } else {
                            write!(f, "{}*z{w}", matrix[i][j])?;
                        }
                    }
                    if !any {
                        write!(f, "0")?;
                    }
                }
                Ok(())
            }
            ChangeStep::Shear { var, scale, psi } => {
                write!(f, "z{var} -> ")?;
                if scale.is_one() {
                    write!(f, "z{var}")?;
                } else {
                    write!(f, "{scale}*z{var}")?;
                }
                if !psi.is_zero() {
                    write!(f, " + ({psi})")?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::mixed::expand_squares;

    fn z(nvars: u32, idx: u32) -> HoloPoly {
        HoloPoly::variable(nvars, idx)
    }

    #[test]
    fn shear_roundtrip() {
        let mut ch = CoordChange::identity(3);
        ch.push_shear(3, GaussianRational::one(), -&z(3, 2).pow(3)).unwrap();
        // substitute(z3, {z3 ↦ z3 − z2³}) = z3 − z2³
        assert_eq!(ch.apply_holo(&z(3, 3)), &z(3, 3) - &z(3, 2).pow(3));
        // inverse shear recovers the coordinate
        let p = &z(3, 3) + &z(3, 2).pow(3);
        assert_eq!(ch.apply_holo(&p), z(3, 3));
        let inv = ch.inverse().unwrap();
        assert_eq!(inv.apply_holo(&ch.apply_holo(&p)), p);
    }

    #[test]
    fn identity_on_mixed() {
        let t = expand_squares(&[z(2, 2)]).unwrap();
        assert_eq!(CoordChange::identity(2).apply_mixed(&t), t);
    }

    #[test]
    fn linear_inverse() {
        let mut ch = CoordChange::identity(3);
        ch.push_linear(
            vec![2, 3],
            vec![
                vec![GaussianRational::one(), GaussianRational::from_int(1)],
                vec![GaussianRational::zero(), GaussianRational::one()],
            ],
        )
        .unwrap();
        let p = &z(3, 2).pow(2) * &z(3, 3);
        let inv = ch.inverse().unwrap();
        assert_eq!(inv.apply_holo(&ch.apply_holo(&p)), p);
    }

    #[test]
    fn singular_matrix_rejected() {
        let mut ch = CoordChange::identity(3);
        let r = ch.push_linear(
            vec![2, 3],
            vec![
                vec![GaussianRational::one(), GaussianRational::one()],
                vec![GaussianRational::one(), GaussianRational::one()],
            ],
        );
        assert!(matches!(r, Err(Error::NonInvertibleChange)));
    }

    #[test]
    fn shear_with_pivot_in_psi_rejected() {
        let mut ch = CoordChange::identity(2);
        let r = ch.push_shear(2, GaussianRational::one(), z(2, 2));
        assert!(matches!(r, Err(Error::NonInvertibleChange)));
    }
}
