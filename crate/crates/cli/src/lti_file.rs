//! LTI models from JSON:
//! `{"A": [[..]], "B": [[..]], "offset": [..], "input": {"offset": r,
//! "terms": [{"amp": a, "omega": w, "phase": p}], "period": T}}`.

use std::path::Path;

use anyhow::{Context, Result};
use entrain_core::linalg::{LtiSystem, Matrix};
use entrain_core::models::{CosineTerm, LtiModel, PeriodicInput};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LtiFile {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
    #[serde(default)]
    offset: Option<Vec<f64>>,
    input: InputSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InputSpec {
    #[serde(default)]
    offset: f64,
    #[serde(default)]
    terms: Vec<TermSpec>,
    period: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermSpec {
    amp: f64,
    omega: f64,
    #[serde(default)]
    phase: f64,
}

pub fn load(path: &Path) -> Result<LtiModel> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read LTI file {}", path.display()))?;
    let spec: LtiFile = serde_json::from_str(&text)
        .with_context(|| format!("malformed LTI file {}", path.display()))?;
    build(spec).with_context(|| format!("invalid LTI model in {}", path.display()))
}

fn build(spec: LtiFile) -> Result<LtiModel> {
    let a = Matrix::from_rows(&spec.a)?;
    let b = Matrix::from_rows(&spec.b)?;
    let lti = LtiSystem::new(a, b, spec.offset)?;
    let terms = spec
        .input
        .terms
        .iter()
        .map(|t| CosineTerm {
            amplitude: t.amp,
            omega: t.omega,
            phase: t.phase,
        })
        .collect();
    let input = PeriodicInput::new(spec.input.offset, terms, spec.input.period)?;
    Ok(LtiModel::new(lti, input)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use entrain_core::models::DynSystem;

    #[test]
    fn parses_the_documented_schema() {
        let text = r#"{"A": [[-1, 0.5], [0, -2]], "B": [[1], [0]], "offset": [0.1, 0.2],
            "input": {"offset": 0.5, "terms": [{"amp": 1, "omega": 2, "phase": 0}], "period": 3.141592653589793}}"#;
        let model = build(serde_json::from_str(text).unwrap()).unwrap();
        assert_eq!(model.dim(), 2);
        assert!((model.input().eval(0.0) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_unknown_fields_and_bad_shapes() {
        let extra = r#"{"A": [[-1]], "B": [[1]], "input": {"period": 1}, "C": 1}"#;
        assert!(serde_json::from_str::<LtiFile>(extra).is_err());
        let ragged = r#"{"A": [[-1, 0], [1]], "B": [[1], [1]], "input": {"period": 1}}"#;
        assert!(build(serde_json::from_str(ragged).unwrap()).is_err());
    }
}
