//! JSON problem files.

use serde::{Deserialize, Serialize};
use switchgame::model::validate;
use switchgame::GameSpec;

use crate::CliError;

/// On-disk form of a [`GameSpec`]; field names match the struct.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub drift: [[f64; 2]; 2],
    pub vol: [[f64; 2]; 2],
    pub discount: f64,
    pub gamma: f64,
    pub cost_max: [[f64; 2]; 2],
    pub cost_min: [[f64; 2]; 2],
    pub x0: f64,
}

impl From<SpecFile> for GameSpec {
    fn from(f: SpecFile) -> GameSpec {
        GameSpec {
            drift: f.drift,
            vol: f.vol,
            discount: f.discount,
            gamma: f.gamma,
            cost_max: f.cost_max,
            cost_min: f.cost_min,
            x0: f.x0,
        }
    }
}

impl From<&GameSpec> for SpecFile {
    fn from(s: &GameSpec) -> SpecFile {
        SpecFile {
            drift: s.drift,
            vol: s.vol,
            discount: s.discount,
            gamma: s.gamma,
            cost_max: s.cost_max,
            cost_min: s.cost_min,
            x0: s.x0,
        }
    }
}

/// Parses and validates a problem file.
pub fn parse_spec(text: &str) -> Result<GameSpec, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: SpecFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            CliError::InvalidSpec(e.inner().to_string())
        } else {
            CliError::InvalidSpec(format!("{path}: {}", e.inner()))
        }
    })?;
    let spec = GameSpec::from(file);
    let report = validate(&spec);
    if !report.is_valid() {
        let lines: Vec<String> =
            report.violations.iter().map(|v| format!("{}: [{}] {}", v.field(), v.label(), v)).collect();
        return Err(CliError::InvalidSpec(lines.join("\n")));
    }
    Ok(spec)
}

/// Reads, parses and validates a problem file.
pub fn read_spec(path: &std::path::Path) -> Result<GameSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::InvalidSpec(format!("{}: {e}", path.display())))?;
    parse_spec(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{"drift":[[0.05,0.05],[0.05,0.05]],"vol":[[0.3,0.3],[0.3,0.3]],
        "discount":1.0,"gamma":0.5,"cost_max":[[0,1],[1,0]],"cost_min":[[0,1],[1,0]],"x0":1.0}"#;

    #[test]
    fn parses_good_file() {
        let s = parse_spec(GOOD).unwrap();
        assert_eq!(s.c12(), 1.0);
    }

    #[test]
    fn unknown_key_is_named() {
        let bad = GOOD.replace("cost_min", "cost_mn");
        let CliError::InvalidSpec(msg) = parse_spec(&bad).unwrap_err() else { panic!() };
        assert!(msg.contains("cost_mn"), "{msg}");
    }

    #[test]
    fn violation_names_field() {
        let bad = GOOD.replace("\"gamma\":0.5", "\"gamma\":1.5");
        let CliError::InvalidSpec(msg) = parse_spec(&bad).unwrap_err() else { panic!() };
        assert!(msg.starts_with("gamma:"), "{msg}");
    }
}
