//! Declarative JSON setups.
//!
//! ```json
//! {
//!   "texts": ["a", "b"],
//!   "metric": [[0, 1], [1, 0]],
//!   "conditions": [{"name": "c", "prob": "1"}],
//!   "keys": ["k"],
//!   "f": ["a"],
//!   "g": [["b"]],
//!   "loss": [[0], [1]],
//!   "detect": [[false, true]],
//!   "epsilon": 1, "epsilon_prime": 1, "delta": 0,
//!   "mode": "nearest"
//! }
//! ```
//!
//! `f[c]` and `g[k][c]` name texts (or give their index). `loss[x][c]` and
//! `metric[x][y]` accept JSON numbers, `"p/q"` strings and `"inf"`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{
    parse_ext, parse_rational, run_experiment, search_erasers, EraserSearch, ErasureError,
    ErasureReport, ErasureSetup, Ext, Mode, Rational, TextSpace,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    Nearest,
    Posterior,
    /// Enumerate every deterministic eraser.
    Exhaustive,
}

#[derive(Debug, Deserialize)]
struct RawCondition {
    name: String,
    prob: Value,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSetup {
    texts: Vec<String>,
    metric: Vec<Vec<Value>>,
    conditions: Vec<RawCondition>,
    keys: Vec<String>,
    f: Vec<Value>,
    g: Vec<Vec<Value>>,
    loss: Vec<Vec<Value>>,
    detect: Vec<Vec<bool>>,
    epsilon: Value,
    epsilon_prime: Value,
    delta: Value,
    mode: SimMode,
    #[serde(default)]
    #[allow(dead_code)]
    description: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SetupFile {
    pub setup: ErasureSetup,
    pub mode: SimMode,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Simulation {
    Report(Box<ErasureReport>),
    Search(EraserSearch),
}

fn bad(field: &str, msg: impl std::fmt::Display) -> ErasureError {
    ErasureError::Malformed(format!("{field}: {msg}"))
}

fn number_text(v: &Value) -> Option<String> {
    match v {
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn ext_value(v: &Value, field: &str) -> Result<Ext, ErasureError> {
    number_text(v)
        .and_then(|s| parse_ext(&s))
        .ok_or_else(|| bad(field, format!("not a number: {v}")))
}

fn rational_value(v: &Value, field: &str) -> Result<Rational, ErasureError> {
    number_text(v)
        .and_then(|s| parse_rational(&s))
        .ok_or_else(|| bad(field, format!("not a finite number: {v}")))
}

fn text_ref(v: &Value, texts: &[String], field: &str) -> Result<usize, ErasureError> {
    match v {
        Value::String(s) => texts
            .iter()
            .position(|t| t == s)
            .ok_or_else(|| bad(field, format!("unknown text {s:?}"))),
        Value::Number(n) => n
            .as_u64()
            .map(|i| i as usize)
            .filter(|&i| i < texts.len())
            .ok_or_else(|| bad(field, format!("text index {n} out of range"))),
        other => Err(bad(field, format!("expected a text name, got {other}"))),
    }
}

impl SetupFile {
    pub fn from_json(json: &str) -> Result<SetupFile, ErasureError> {
        let raw: RawSetup =
            serde_json::from_str(json).map_err(|e| ErasureError::Malformed(e.to_string()))?;
        let metric = raw
            .metric
            .iter()
            .map(|row| row.iter().map(|v| ext_value(v, "metric")).collect())
            .collect::<Result<Vec<Vec<Ext>>, _>>()?;
        let space = TextSpace::new(raw.texts.clone(), metric)?;
        let setup = ErasureSetup {
            space,
            conditions: raw.conditions.iter().map(|c| c.name.clone()).collect(),
            condition_probs: raw
                .conditions
                .iter()
                .map(|c| rational_value(&c.prob, "conditions.prob"))
                .collect::<Result<_, _>>()?,
            keys: raw.keys,
            generator: raw
                .f
                .iter()
                .map(|v| text_ref(v, &raw.texts, "f"))
                .collect::<Result<_, _>>()?,
            watermarker: raw
                .g
                .iter()
                .map(|row| row.iter().map(|v| text_ref(v, &raw.texts, "g")).collect())
                .collect::<Result<_, _>>()?,
            loss: raw
                .loss
                .iter()
                .map(|row| row.iter().map(|v| ext_value(v, "loss")).collect())
                .collect::<Result<_, _>>()?,
            detect: raw.detect,
            epsilon: rational_value(&raw.epsilon, "epsilon")?,
            epsilon_prime: rational_value(&raw.epsilon_prime, "epsilon_prime")?,
            delta: rational_value(&raw.delta, "delta")?,
        };
        setup.validate_structure()?;
        Ok(SetupFile {
            setup,
            mode: raw.mode,
        })
    }

    pub fn load(path: &Path) -> Result<SetupFile, ErasureError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ErasureError::Malformed(format!("{}: {e}", path.display())))?;
        SetupFile::from_json(&text)
    }

    /// Runs the file's own mode, or `mode` when given.
    pub fn run(&self, mode: Option<SimMode>) -> Result<Simulation, ErasureError> {
        match mode.unwrap_or(self.mode) {
            SimMode::Nearest => {
                run_experiment(&self.setup, Mode::Nearest).map(|r| Simulation::Report(Box::new(r)))
            }
            SimMode::Posterior => run_experiment(&self.setup, Mode::Posterior)
                .map(|r| Simulation::Report(Box::new(r))),
            SimMode::Exhaustive => search_erasers(&self.setup).map(Simulation::Search),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::erasure::multimodal_setup;

    const SMALL: &str = r#"{
        "texts": ["a", "b"],
        "metric": [[0, 1], [1, 0]],
        "conditions": [{"name": "c", "prob": 1}],
        "keys": ["k"],
        "f": ["a"],
        "g": [["b"]],
        "loss": [[0], ["1/2"]],
        "detect": [[false, true]],
        "epsilon": 0.5, "epsilon_prime": 1, "delta": 0,
        "mode": "nearest"
    }"#;

    #[test]
    fn parses_and_runs() {
        let file = SetupFile::from_json(SMALL).unwrap();
        assert_eq!(file.setup.epsilon, parse_rational("1/2").unwrap());
        match file.run(None).unwrap() {
            Simulation::Report(r) => {
                assert!(r.passed);
                assert_eq!(r.loss_excess, Ext::zero());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_text_is_reported() {
        let broken = SMALL.replace(r#""f": ["a"]"#, r#""f": ["zz"]"#);
        let err = SetupFile::from_json(&broken).unwrap_err();
        assert!(err.to_string().contains("zz"), "{err}");
    }

    #[test]
    fn bundled_multimodal_matches_builtin() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("setups/multimodal.json");
        let file = SetupFile::load(&path).unwrap();
        let built = multimodal_setup();
        assert_eq!(file.setup.loss, built.loss);
        assert_eq!(file.setup.space, built.space);
        assert_eq!(file.setup.detect, built.detect);
        assert_eq!(file.mode, SimMode::Exhaustive);
        match file.run(None).unwrap() {
            Simulation::Search(s) => assert!(s.all_fail),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bundled_universal_matches_builtin() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("setups/universal.json");
        let file = SetupFile::load(&path).unwrap();
        let built = crate::erasure::universal_setup(4, 3).unwrap();
        assert_eq!(file.setup.detect, built.detect);
        assert_eq!(file.setup.delta, built.delta);
        assert_eq!(file.setup.law_of_x(), built.law_of_x());
        match file.run(None).unwrap() {
            Simulation::Report(r) => {
                assert!(r.passed);
                assert_eq!(r.erase_success_prob, parse_rational("3/4").unwrap());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bundled_line_matches_toy() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("setups/line.json");
        let file = SetupFile::load(&path).unwrap();
        let toy = crate::erasure::tests::toy_setup();
        assert_eq!(file.setup.loss, toy.loss);
        assert_eq!(file.setup.space, toy.space);
        assert_eq!(file.setup.watermarker, toy.watermarker);
    }
}
