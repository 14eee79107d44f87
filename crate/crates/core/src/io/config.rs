//! JSON configuration intake.

use std::path::Path;

use serde::de::DeserializeOwned;

use crate::analysis::SweepSpec;
use crate::engine::Scenario;
use crate::error::{Error, Result};

/// Parse a JSON document, reporting failures with the offending key path.
/// Unknown keys are rejected with a nearest-match suggestion.
pub fn parse_document<T: DeserializeOwned>(text: &str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value: T = serde_path_to_error::deserialize(&mut de).map_err(|err| {
        let path = err.path().to_string();
        let inner = err.into_inner();
        let path = if path == "." { String::new() } else { path };
        let reason = match unknown_field_suggestion(&inner.to_string()) {
            Some(s) => format!("{inner}; did you mean `{s}`?"),
            None => inner.to_string(),
        };
        Error::config(if path.is_empty() { "<document>".to_string() } else { path }, reason)
    })?;
    de.end()
        .map_err(|e| Error::config("<document>", e.to_string()))?;
    Ok(value)
}

/// Closest known key for serde's "unknown field `x`, expected one of ..." messages.
fn unknown_field_suggestion(message: &str) -> Option<String> {
    let rest = message.strip_prefix("unknown field `")?;
    let (unknown, rest) = rest.split_once('`')?;
    let candidates: Vec<&str> = rest.split('`').skip(1).step_by(2).collect();
    candidates
        .into_iter()
        .map(|c| (strsim::levenshtein(unknown, c), c))
        .min_by_key(|(d, _)| *d)
        .map(|(_, c)| c.to_string())
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let scenario: Scenario = parse_document(text)?;
    scenario.validate()?;
    Ok(scenario)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Read, parse and validate a scenario document.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    parse_scenario(&read(path.as_ref())?)
}

pub fn load_sweep(path: impl AsRef<Path>) -> Result<SweepSpec> {
    let spec: SweepSpec = parse_document(&read(path.as_ref())?)?;
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MINIMAL: &str = r#"{
        "horizon": 3,
        "population": {"size": 4, "segments": [
            {"name": "all", "fraction": 1.0, "gamma_range": [0.1, 0.2],
             "bass": {"p": 0.5, "q": 0.1}, "initial_headroom": 0.5}
        ]},
        "schedule": {"kind": "table", "values": [1.0, 2.0, 3.0]},
        "satisfaction": {"k": 1.0, "b": 0.0},
        "seed": 7
    }"#;

    #[test]
    fn minimal_document() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.horizon, 3);
        assert_eq!(s.satisfaction.lambda, 2.25);
        assert!(s.interventions.is_empty());
        assert!(!s.trace_agents);
    }

    #[test]
    fn fraction_sum_violation_names_path() {
        let doc = MINIMAL.replace("\"fraction\": 1.0", "\"fraction\": 0.9");
        match parse_scenario(&doc).unwrap_err() {
            Error::Config { path, .. } => assert_eq!(path, "population.segments[*].fraction"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn typo_suggests_nearest_key() {
        let doc = MINIMAL.replace("\"schedule\"", "\"scheddule\"");
        let err = parse_scenario(&doc).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("scheddule"), "{msg}");
        assert!(msg.contains("did you mean `schedule`"), "{msg}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn nested_typo_path() {
        let doc = MINIMAL.replace("\"initial_headroom\"", "\"initial_headrom\"");
        match parse_scenario(&doc).unwrap_err() {
            Error::Config { path, reason } => {
                assert!(path.starts_with("population.segments[0]"), "{path}");
                assert!(reason.contains("initial_headroom"), "{reason}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invariant_violation_path() {
        let doc = MINIMAL.replace("[1.0, 2.0, 3.0]", "[1.0, 2.0]");
        match parse_scenario(&doc).unwrap_err() {
            Error::Config { path, .. } => assert_eq!(path, "schedule.values"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_error_is_config_error() {
        let err = parse_scenario("{\"horizon\": ").unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
