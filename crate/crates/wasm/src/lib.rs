//! wasm-bindgen surface for the browser demo: the three interactive
//! operations take the same input language as the CLI and return the same
//! JSON reports as strings.

use wasm_bindgen::prelude::*;

use mtype_core::domain::parse;
use mtype_core::report::{error_outcome, run, Command, RunFlags, RunOutcome};
use mtype_core::weights::Weight;

fn render(out: RunOutcome) -> String {
    let mut json = out.json;
    if let Some(obj) = json.as_object_mut() {
        obj.insert("exit".into(), serde_json::json!(out.exit));
        obj.insert("text".into(), serde_json::json!(out.text));
    }
    serde_json::to_string_pretty(&json).unwrap_or_else(|e| format!("{{\"error\":\"{e}\"}}"))
}

fn dispatch(cmd: Command, input: &str, flags: RunFlags) -> String {
    match parse(input) {
        Ok(spec) => render(run(cmd, Some(&spec), &flags)),
        Err(e) => render(error_outcome(&e)),
    }
}

/// Full computation: multitype, boundary system, ideal, coordinate changes
/// and the oracle cross-check.
#[wasm_bindgen]
pub fn compute(input: &str, with_oracle: bool) -> String {
    let flags = RunFlags { no_oracle: !with_oracle, ..RunFlags::default() };
    dispatch(Command::Compute, input, flags)
}

/// Distinguished-weight check of a given weight ("1,4,6" or with "inf").
#[wasm_bindgen]
pub fn verify_weight(input: &str, weight: &str) -> String {
    match Weight::parse(weight) {
        Ok(w) => {
            let flags = RunFlags { weight: Some(w), ..RunFlags::default() };
            dispatch(Command::VerifyWeight, input, flags)
        }
        Err(e) => render(error_outcome(&e)),
    }
}

/// Torsion sweep of the model at a given weight, or at the computed
/// multitype when `weight` is empty.
#[wasm_bindgen]
pub fn torsion_check(input: &str, weight: &str) -> String {
    let parsed = if weight.trim().is_empty() {
        None
    } else {
        match Weight::parse(weight) {
            Ok(w) => Some(w),
            Err(e) => return render(error_outcome(&e)),
        }
    };
    let flags = RunFlags { weight: parsed, ..RunFlags::default() };
    dispatch(Command::TorsionCheck, input, flags)
}
