//! JSON interchange format for models.
//!
//! ```json
//! {
//!   "capacity": 20,
//!   "states": [
//!     {"name": "s", "reload": false, "actions": [
//!       {"name": "b", "cons": 5, "distr": [["t", "1/2"], ["u", "1/2"]]}
//!     ]}
//!   ],
//!   "targets": ["t"]
//! }
//! ```
//!
//! A probability may be a JSON number, a string holding a decimal or an
//! `n/d` fraction, or a `[n, d]` pair. Numbers are kept as floats; the other
//! forms are exact.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Cmdp, CmdpBuilder, ModelError, Probability, StateId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProbabilityDoc {
    Number(f64),
    Text(String),
    Pair([u64; 2]),
}

impl ProbabilityDoc {
    fn parse(&self) -> Result<Probability, String> {
        match self {
            ProbabilityDoc::Number(x) if x.is_finite() => Ok(Probability::from_f64(*x)),
            ProbabilityDoc::Number(x) => Err(x.to_string()),
            ProbabilityDoc::Text(t) => t.parse().map_err(|_| t.clone()),
            ProbabilityDoc::Pair([_, 0]) => Err("[_, 0]".to_string()),
            ProbabilityDoc::Pair([n, d]) => Ok(Probability::ratio(*n, *d)),
        }
    }

    fn canonical(p: Probability) -> Self {
        match p.exact() {
            Some(_) => ProbabilityDoc::Text(p.to_string()),
            None => ProbabilityDoc::Number(p.value()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionDoc {
    pub name: String,
    pub cons: u64,
    pub distr: Vec<(String, ProbabilityDoc)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDoc {
    pub name: String,
    #[serde(default)]
    pub reload: bool,
    pub actions: Vec<ActionDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub capacity: u64,
    pub states: Vec<StateDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<String>>,
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("invalid probability `{value}` in action `{action}` of `{state}`")]
    Probability { state: String, action: String, value: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl FormatError {
    /// Syntax and shape errors, as opposed to semantic ones.
    pub fn is_parse_error(&self) -> bool {
        matches!(self, FormatError::Json { .. } | FormatError::Probability { .. })
    }
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        let (line, column) = (e.line(), e.column());
        let text = e.to_string();
        let suffix = format!(" at line {line} column {column}");
        FormatError::Json { line, column, message: text.strip_suffix(&suffix).unwrap_or(&text).to_string() }
    }
}

impl ModelDocument {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_model(model: &Cmdp, targets: Option<&[StateId]>) -> Self {
        let states = model
            .states()
            .map(|s| StateDoc {
                name: model.state_name(s).to_string(),
                reload: model.is_reload(s),
                actions: model
                    .actions_of(s)
                    .map(|a| {
                        let act = model.action(a);
                        ActionDoc {
                            name: act.name.clone(),
                            cons: act.consumption,
                            distr: act
                                .successors
                                .iter()
                                .map(|t| {
                                    (model.state_name(t.target).to_string(), ProbabilityDoc::canonical(t.probability))
                                })
                                .collect(),
                        }
                    })
                    .collect(),
            })
            .collect();
        ModelDocument {
            capacity: model.capacity(),
            states,
            targets: targets.map(|ts| ts.iter().map(|&t| model.state_name(t).to_string()).collect()),
        }
    }

    /// Builds the model and resolves the target names, if any.
    pub fn to_model(&self) -> Result<(Cmdp, Option<Vec<StateId>>), FormatError> {
        let mut b = CmdpBuilder::new(self.capacity);
        let mut ids = std::collections::HashMap::new();
        for st in &self.states {
            let id = b.add_state(st.name.clone(), st.reload);
            ids.entry(st.name.as_str()).or_insert(id);
        }
        for (s, st) in self.states.iter().enumerate() {
            for act in &st.actions {
                let mut distr = Vec::with_capacity(act.distr.len());
                for (target, p) in &act.distr {
                    let t = *ids.get(target.as_str()).ok_or_else(|| ModelError::UnknownState(target.clone()))?;
                    let p = p.parse().map_err(|value| FormatError::Probability {
                        state: st.name.clone(),
                        action: act.name.clone(),
                        value,
                    })?;
                    distr.push((t, p));
                }
                b.add_action(s, act.name.clone(), act.cons, distr);
            }
        }
        let model = b.build()?;
        let targets = match &self.targets {
            None => None,
            Some(names) => Some(model.states_named(names)?),
        };
        Ok((model, targets))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }
}

/// Parses a model file's text.
pub fn parse_model(text: &str) -> Result<(Cmdp, Option<Vec<StateId>>), FormatError> {
    ModelDocument::parse(text)?.to_model()
}

/// Serializes a model in canonical form: exact probabilities as `n/d`
/// strings, inexact ones as numbers.
pub fn model_to_json(model: &Cmdp, targets: Option<&[StateId]>) -> String {
    ModelDocument::from_model(model, targets).to_json()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::model::validate;

    #[test]
    fn accepts_every_probability_form() {
        let text = r#"{
            "capacity": 4,
            "states": [
                {"name": "s", "reload": true, "actions": [
                    {"name": "a", "cons": 1, "distr": [["s", 0.25], ["t", "0.25"], ["u", "1/4"], ["v", [1, 4]]]}
                ]},
                {"name": "t", "actions": [{"name": "a", "cons": 1, "distr": [["s", 1]]}]},
                {"name": "u", "actions": [{"name": "a", "cons": 1, "distr": [["s", "1"]]}]},
                {"name": "v", "actions": [{"name": "a", "cons": 1, "distr": [["s", 1.0]]}]}
            ],
            "targets": ["t"]
        }"#;
        let (m, targets) = parse_model(text).unwrap();
        assert!(validate(&m).is_valid());
        assert_eq!(targets, Some(vec![1]));
        let succ = &m.action(0).successors;
        assert_eq!(succ[0].probability.exact(), None);
        for t in &succ[1..] {
            assert_eq!(t.probability, Probability::ratio(1, 4));
        }
    }

    #[test]
    fn round_trip_is_identity_on_canonical_form() {
        for m in [examples::detour(), examples::reload_chain(), examples::leaning_limit()] {
            let text = model_to_json(&m, Some(&[0]));
            let (back, targets) = parse_model(&text).unwrap();
            assert_eq!(back, m);
            assert_eq!(targets, Some(vec![0]));
            assert_eq!(model_to_json(&back, Some(&[0])), text);
        }
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_model("{\n  \"capacity\": 3,\n  \"states\": [\n}").unwrap_err();
        match err {
            FormatError::Json { line, .. } => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        assert!(parse_model("{\"capacity\": 1, \"states\": [], \"extra\": 0}").unwrap_err().is_parse_error());
    }

    #[test]
    fn semantic_errors() {
        let text = r#"{"capacity": 2, "states": [
            {"name": "s", "actions": [{"name": "a", "cons": 1, "distr": [["nowhere", 1]]}]}]}"#;
        assert!(matches!(
            parse_model(text),
            Err(FormatError::Model(ModelError::UnknownState(name))) if name == "nowhere"
        ));
        let text = r#"{"capacity": 2, "states": [
            {"name": "s", "actions": [{"name": "a", "cons": 1, "distr": [["s", "1/0"]]}]}]}"#;
        assert!(matches!(parse_model(text), Err(FormatError::Probability { .. })));
        let text = r#"{"capacity": 2, "states": [
            {"name": "s", "actions": [{"name": "a", "cons": 1, "distr": [["s", 1]]}]}], "targets": ["x"]}"#;
        assert!(matches!(parse_model(text), Err(FormatError::Model(_))));
    }
}
