//! Command dispatch and machine-readable reporting. The CLI and the wasm
//! demo both come through here, so the JSON schema lives in one place:
//! keys `levi_rank`, `commutator_multitype`, `boundary_system`
//! (`c`, `r_choice`, `h`, `field`, `witness_list`), `boundary_system_ideal`,
//! `coordinate_changes`, `verified_distinguished`, `oracle`
//! (`multitype`, `agrees`). Rationals are serialized as strings so nothing
//! passes through floating point.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::algebra::{ChangeStep, CoordChange};
use crate::domain::DomainSpec;
use crate::engine::{compute, ComputeResult, EngineOptions};
use crate::error::Error;
use crate::normalizer::{normalize_boundary_system, torsion_check};
use crate::oracle::{brute_multitype, Bounds};
use crate::suites;
use crate::weights::{is_distinguished, is_weight, Weight};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Compute,
    Oracle,
    VerifyWeight,
    Normalize,
    TorsionCheck,
    CrosstermCheck,
}

#[derive(Clone, Debug)]
pub struct RunFlags {
    pub json: bool,
    pub max_len: Option<usize>,
    pub max_denominator: Option<u64>,
    pub no_oracle: bool,
    pub weight: Option<Weight>,
    pub seed: u64,
    pub count: usize,
    pub sabotage: bool,
}

impl Default for RunFlags {
    fn default() -> Self {
        Self {
            json: false,
            max_len: None,
            max_denominator: None,
            no_oracle: false,
            weight: None,
            seed: 0x6d74,
            count: 200,
            sabotage: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub text: String,
    pub json: Value,
    pub exit: i32,
}

/// Renders an error the same way on both output paths.
pub fn error_outcome(err: &Error) -> RunOutcome {
    RunOutcome {
        text: format!("error: {err}"),
        json: json!({ "error": err.to_string(), "exit": err.exit_code() }),
        exit: err.exit_code(),
    }
}

fn changes_json(ch: &CoordChange) -> Value {
    let steps: Vec<Value> = ch
        .steps()
        .iter()
        .map(|s| match s {
            ChangeStep::Linear { vars, matrix } => json!({
                "kind": "linear",
                "vars": vars,
                "matrix": matrix
                    .iter()
                    .map(|row| row.iter().map(|c| c.to_string()).collect::<Vec<_>>())
                    .collect::<Vec<_>>(),
            }),
            ChangeStep::Shear { var, scale, psi } => json!({
                "kind": "shear",
                "var": var,
                "scale": scale.to_string(),
                "psi": psi.to_string(),
            }),
        })
        .collect();
    Value::Array(steps)
}

fn changes_text(ch: &CoordChange) -> String {
    if ch.is_identity() {
        return "  (identity)".to_string();
    }
    ch.steps()
        .iter()
        .map(|s| format!("  {s}"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn compute_json(out: &ComputeResult) -> Value {
    let multitype: Vec<String> =
        out.multitype.entries().iter().map(|e| e.to_string()).collect();
    let system: Vec<Value> = out
        .system
        .entries
        .iter()
        .map(|e| {
            let counts: BTreeMap<String, u32> = e
                .witness_counts
                .iter()
                .map(|(&i, &s)| (i.to_string(), s))
                .collect();
            json!({
                "index": e.index,
                "c": e.c.to_string(),
                "r_choice": e.r_choice.to_string(),
                "h": e.h.to_string(),
                "field": e.field.to_string(),
                "witness_list": {
                    "holomorphic_counts": counts,
                    "length": 2 * e.witness_counts.values().sum::<u32>(),
                },
            })
        })
        .collect();
    json!({
        "n": out.n,
        "levi_rank": out.levi_rank,
        "commutator_multitype": multitype,
        "boundary_system": system,
        "boundary_system_ideal": out.ideal.gens.iter().map(|h| h.to_string()).collect::<Vec<_>>(),
        "coordinate_changes": changes_json(&out.system.changes),
        "transformed_generators": out
            .transformed_generators
            .iter()
            .map(|g| g.to_string())
            .collect::<Vec<_>>(),
        "verified_distinguished": out.distinguished_verified,
        "oracle": out.oracle.as_ref().map(|o| json!({
            "multitype": o.multitype.entries().iter().map(|e| e.to_string()).collect::<Vec<_>>(),
            "agrees": o.agrees,
            "bound_hit": o.bound_hit,
        })),
    })
}

fn compute_text(out: &ComputeResult) -> String {
    let mut s = String::new();
    s.push_str(&format!("levi rank: {}\n", out.levi_rank));
    s.push_str(&format!("commutator multitype: {}\n", out.multitype));
    s.push_str("boundary system:\n");
    for e in &out.system.entries {
        s.push_str(&format!(
            "  nu={}: c={}, r_{} = {} h, h = {}, L = {}\n",
            e.index, e.c, e.index, e.r_choice, e.h, e.field
        ));
    }
    s.push_str(&format!(
        "boundary system ideal: <{}>\n",
        out.ideal
            .gens
            .iter()
            .map(|h| h.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    ));
    s.push_str("coordinate changes:\n");
    s.push_str(&changes_text(&out.system.changes));
    s.push('\n');
    s.push_str(&format!("verified distinguished: {}\n", out.distinguished_verified));
    if let Some(o) = &out.oracle {
        s.push_str(&format!(
            "oracle multitype: ({}) [{}]\n",
            o.multitype,
            if o.agrees { "agrees" } else { "DISAGREES" }
        ));
    }
    s
}

fn engine_options(flags: &RunFlags) -> EngineOptions {
    EngineOptions {
        oracle_verify: !flags.no_oracle,
        max_denominator: flags.max_denominator.unwrap_or(64),
        sabotage_last_stage: flags.sabotage,
        ..EngineOptions::default()
    }
}

pub fn run(cmd: Command, spec: Option<&DomainSpec>, flags: &RunFlags) -> RunOutcome {
    match run_inner(cmd, spec, flags) {
        Ok(outcome) => outcome,
        Err(err) => error_outcome(&err),
    }
}

fn need_spec<'s>(spec: Option<&'s DomainSpec>) -> Result<&'s DomainSpec, Error> {
    spec.ok_or_else(|| Error::Usage("this command needs an input domain".into()))
}

fn run_inner(
    cmd: Command,
    spec: Option<&DomainSpec>,
    flags: &RunFlags,
) -> Result<RunOutcome, Error> {
    match cmd {
        Command::Compute => {
            let spec = need_spec(spec)?;
            let out = compute(&spec.generators, spec.n, &engine_options(flags))?;
            Ok(RunOutcome { text: compute_text(&out), json: compute_json(&out), exit: 0 })
        }
        Command::Oracle => {
            let spec = need_spec(spec)?;
            // harvest the engine's coordinate changes as the search family;
            // a failed engine run falls back to the identity family
            let family = match compute(
                &spec.generators,
                spec.n,
                &EngineOptions { oracle_verify: false, ..EngineOptions::default() },
            ) {
                Ok(r) => r.system.changes.prefixes(),
                Err(_) => vec![CoordChange::identity(spec.n)],
            };
            let mut bounds = Bounds::for_generators(&spec.generators, spec.n);
            if let Some(d) = flags.max_denominator {
                bounds.max_denominator = d;
            }
            let out = brute_multitype(&spec.generators, spec.n, &bounds, &family)?;
            let text = format!(
                "oracle multitype: ({}){}\n",
                out.weight,
                if out.bound_hit { " (bound hit)" } else { "" }
            );
            let json = json!({
                "multitype": out.weight.entries().iter().map(|e| e.to_string()).collect::<Vec<_>>(),
                "bound_exceeded": out.bound_hit,
                "family_index": out.family_index,
            });
            Ok(RunOutcome { text, json, exit: 0 })
        }
        Command::VerifyWeight => {
            let spec = need_spec(spec)?;
            let lam = flags
                .weight
                .clone()
                .or_else(|| spec.declared_weight.clone())
                .ok_or_else(|| Error::Usage("verify-weight needs --weight or a weight: line".into()))?;
            if lam.len() != spec.n as usize {
                return Err(Error::Usage(format!(
                    "weight has {} entries but n = {}",
                    lam.len(),
                    spec.n
                )));
            }
            let validity = is_weight(&lam, false);
            let rep = is_distinguished(&spec.generators, &lam)?;
            let text = format!(
                "weight ({lam}): valid = {}, distinguished = {}{}\n",
                validity.valid,
                rep.distinguished,
                rep.offender
                    .as_ref()
                    .map(|(a, b, w)| format!(", offender ({a}, conj {b}) of weight {w}"))
                    .unwrap_or_default()
            );
            let json = json!({
                "weight": lam.entries().iter().map(|e| e.to_string()).collect::<Vec<_>>(),
                "valid_weight": validity.valid,
                "witnesses": validity.witnesses,
                "distinguished": rep.distinguished,
                "offender": rep.offender.as_ref().map(|(a, b, w)| json!({
                    "alpha": a.to_string(),
                    "beta": b.to_string(),
                    "weighted_degree": w.to_string(),
                })),
            });
            Ok(RunOutcome { text, json, exit: 0 })
        }
        Command::Normalize => {
            let spec = need_spec(spec)?;
            let lam = match flags.weight.clone().or_else(|| spec.declared_weight.clone()) {
                Some(w) => w,
                None => {
                    let out = compute(&spec.generators, spec.n, &engine_options(flags))?;
                    out.multitype.weight().clone()
                }
            };
            let norm = normalize_boundary_system(&spec.generators, &lam)?;
            let text = format!(
                "normalized under ({lam}):\ncoordinate changes:\n{}\ngenerators: {}\n",
                changes_text(&norm.changes),
                norm.generators
                    .iter()
                    .map(|g| g.to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            let json = json!({
                "weight": lam.entries().iter().map(|e| e.to_string()).collect::<Vec<_>>(),
                "coordinate_changes": changes_json(&norm.changes),
                "normalized_generators": norm
                    .generators
                    .iter()
                    .map(|g| g.to_string())
                    .collect::<Vec<_>>(),
                "shears": norm
                    .shears
                    .iter()
                    .map(|(j, s)| json!({
                        "index": j,
                        "pivot": s.pivot,
                        "k": s.k.to_string(),
                        "psi": s.psi.to_string(),
                    }))
                    .collect::<Vec<_>>(),
            });
            Ok(RunOutcome { text, json, exit: 0 })
        }
        Command::TorsionCheck => {
            let spec = need_spec(spec)?;
            let lam = match flags.weight.clone().or_else(|| spec.declared_weight.clone()) {
                Some(w) => w,
                None => {
                    let out = compute(&spec.generators, spec.n, &engine_options(flags))?;
                    out.multitype.weight().clone()
                }
            };
            let model = crate::weights::model_extract(&spec.generators, &lam);
            let rep = torsion_check(&model, &lam)?;
            let text = if rep.all_holomorphic() {
                format!("torsion: none ({} monomials checked)\n", rep.checked)
            } else {
                format!(
                    "torsion: {} violation(s) across {} monomials\n",
                    rep.violations.len(),
                    rep.checked
                )
            };
            let json = json!({
                "weight": lam.entries().iter().map(|e| e.to_string()).collect::<Vec<_>>(),
                "checked": rep.checked,
                "torsion": if rep.all_holomorphic() { "none" } else { "violations" },
                "violations": rep
                    .violations
                    .iter()
                    .map(|v| json!({ "monomial": v.monomial.to_string(), "detail": v.detail }))
                    .collect::<Vec<_>>(),
            });
            Ok(RunOutcome { text, json, exit: 0 })
        }
        Command::CrosstermCheck => {
            let mut rng = suites::rng(flags.seed);
            let mut case_counts: BTreeMap<String, usize> = BTreeMap::new();
            let mut violations = Vec::new();
            for _ in 0..flags.count {
                let (f, g, nu, _, verdict) = suites::random_crossterm_triple(&mut rng);
                *case_counts.entry(verdict.case.to_string()).or_insert(0) += 1;
                if !verdict.holds {
                    violations.push(json!({
                        "f": f.to_string(),
                        "g": g.to_string(),
                        "nu": nu,
                        "detail": verdict.violation,
                    }));
                }
            }
            let ok = violations.is_empty();
            let text = format!(
                "crossterm check: {} triples, cases {:?}, violations: {}\n",
                flags.count,
                case_counts,
                violations.len()
            );
            let json = json!({
                "triples": flags.count,
                "seed": flags.seed,
                "cases": case_counts,
                "violations": violations,
            });
            Ok(RunOutcome { text, json, exit: if ok { 0 } else { 3 } })
        }
    }
}
