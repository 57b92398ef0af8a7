//! Named reference states with amplitudes written as exact expressions
//! (`"sqrt(53/100)"`) and evaluated at load time.

use coherence_core::{BipartitePureState, C64};
use serde::Deserialize;

use crate::error::CliError;

const BUNDLED: &str = include_str!("../fixtures/reference_states.json");

/// Fixture format version understood by this build.
pub const FIXTURE_VERSION: u32 = 1;

const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Amplitude {
    Real(String),
    Complex([String; 2]),
}

#[derive(Debug, Deserialize)]
struct RawState {
    name: String,
    #[serde(default)]
    description: String,
    dims: [usize; 2],
    amplitudes: Vec<Amplitude>,
}

#[derive(Debug, Deserialize)]
struct RawFile {
    version: u32,
    states: Vec<RawState>,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub description: String,
    pub state: BipartitePureState,
}

#[derive(Debug, Clone)]
pub struct Fixtures {
    pub version: u32,
    pub states: Vec<Fixture>,
}

fn eval(name: &str, expr: &str) -> Result<f64, CliError> {
    exmex::eval_str::<f64>(expr).map_err(|e| CliError::Fixture(format!("{name}: cannot evaluate `{expr}`: {e}")))
}

impl Fixtures {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED).expect("bundled fixtures are valid")
    }

    /// Parses a fixture file. Amplitudes must already be normalized.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: RawFile = serde_json::from_str(text).map_err(|e| CliError::Fixture(e.to_string()))?;
        if raw.version != FIXTURE_VERSION {
            return Err(CliError::Fixture(format!(
                "unsupported fixture version {} (expected {FIXTURE_VERSION})",
                raw.version
            )));
        }
        let states = raw
            .states
            .into_iter()
            .map(|s| {
                let amps = s
                    .amplitudes
                    .iter()
                    .map(|a| match a {
                        Amplitude::Real(re) => Ok(C64::new(eval(&s.name, re)?, 0.0)),
                        Amplitude::Complex([re, im]) => Ok(C64::new(eval(&s.name, re)?, eval(&s.name, im)?)),
                    })
                    .collect::<Result<Vec<_>, CliError>>()?;
                let [da, db] = s.dims;
                if amps.len() != da * db {
                    return Err(CliError::Fixture(format!(
                        "{}: expected {} amplitudes",
                        s.name,
                        da * db
                    )));
                }
                let (state, factor) = BipartitePureState::from_row_major(da, db, &amps)
                    .map_err(|e| CliError::Fixture(format!("{}: {e}", s.name)))?;
                if (factor - 1.0).abs() > NORM_TOL {
                    return Err(CliError::Fixture(format!("{}: amplitudes are not normalized", s.name)));
                }
                Ok(Fixture {
                    name: s.name,
                    description: s.description,
                    state,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(Self {
            version: raw.version,
            states,
        })
    }

    pub fn get(&self, name: &str) -> Option<&BipartitePureState> {
        self.states.iter().find(|f| f.name == name).map(|f| &f.state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_fixtures_load() {
        let f = Fixtures::bundled();
        assert_eq!(f.version, FIXTURE_VERSION);
        let w = f.get("half_entropy_witness").unwrap();
        assert!((w.coeffs()[(0, 0)].re - 0.53f64.sqrt()).abs() < 1e-16);
        assert!((w.coeffs()[(1, 1)].re - 0.03f64.sqrt()).abs() < 1e-16);
        assert_eq!(f.get("phased_qutrit_pair").unwrap().dim_a(), 3);
    }

    #[test]
    fn malformed_fixtures_are_rejected() {
        let bad = [
            r#"{"version": 2, "states": []}"#,
            r#"{"version": 1, "states": [{"name": "x", "dims": [1, 2], "amplitudes": ["1", "1"]}]}"#,
            r#"{"version": 1, "states": [{"name": "x", "dims": [1, 1], "amplitudes": ["sqrt("]}]}"#,
            r#"{"version": 1, "states": [{"name": "x", "dims": [1, 2], "amplitudes": ["1"]}]}"#,
        ];
        for text in bad {
            assert!(matches!(Fixtures::parse(text), Err(CliError::Fixture(_))), "{text}");
        }
    }
}
