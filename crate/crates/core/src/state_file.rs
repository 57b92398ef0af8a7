//! JSON state files.
//!
//! ```json
//! { "kind": "bipartite_pure", "dims": [2, 2],
//!   "amplitudes": [[0.5, 0], [0.5, 0], [0.5, 0], [0.5, 0]] }
//! ```
//!
//! `kind` is `pure`, `bipartite_pure` or `density`. Pure kinds carry
//! `amplitudes` and density states carry `entries`, both as flat row-major
//! arrays of `[re, im]` pairs. Amplitudes are normalized on load; the factor
//! applied is reported back.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::state::{BipartitePureState, DensityMatrix, PureState};
use crate::C64;

/// Largest accepted dimension per subsystem.
pub const MAX_DIM: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    Pure,
    BipartitePure,
    Density,
}

/// Serialized form written by [`StateDocument::to_json`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDocument {
    pub kind: StateKind,
    pub dims: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub amplitudes: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub entries: Option<Vec<[f64; 2]>>,
}

fn pairs(values: impl IntoIterator<Item = C64>) -> Vec<[f64; 2]> {
    values.into_iter().map(|z| [z.re, z.im]).collect()
}

impl StateDocument {
    pub fn from_pure(psi: &PureState) -> Self {
        Self {
            kind: StateKind::Pure,
            dims: vec![psi.dim()],
            amplitudes: Some(pairs(psi.amplitudes().iter().copied())),
            entries: None,
        }
    }

    pub fn from_bipartite(phi: &BipartitePureState) -> Self {
        Self {
            kind: StateKind::BipartitePure,
            dims: vec![phi.dim_a(), phi.dim_b()],
            amplitudes: Some(pairs(phi.flatten().amplitudes().iter().copied())),
            entries: None,
        }
    }

    pub fn from_density(rho: &DensityMatrix) -> Self {
        let d = rho.dim();
        Self {
            kind: StateKind::Density,
            dims: vec![d],
            amplitudes: None,
            entries: Some(pairs(
                (0..d)
                    .flat_map(|i| (0..d).map(move |j| (i, j)))
                    .map(|(i, j)| rho.entry(i, j)),
            )),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("state documents always serialize")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LoadedState {
    Pure(PureState),
    Bipartite(BipartitePureState),
    Density(DensityMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Loaded {
    pub state: LoadedState,
    /// Factor multiplied into the amplitudes (1 for density files).
    pub normalization: f64,
}

fn field_error(field: &str, message: impl Into<String>) -> Error {
    Error::StateFile {
        field: field.to_string(),
        message: message.into(),
    }
}

fn complex_array(doc: &Value, field: &str) -> Result<Vec<C64>> {
    let arr = doc
        .get(field)
        .ok_or_else(|| field_error(field, "missing"))?
        .as_array()
        .ok_or_else(|| field_error(field, "expected an array of [re, im] pairs"))?;
    arr.iter()
        .enumerate()
        .map(|(k, v)| {
            let pair = v.as_array().filter(|p| p.len() == 2);
            let nums = pair.and_then(|p| Some((p[0].as_f64()?, p[1].as_f64()?)));
            nums.map(|(re, im)| C64::new(re, im))
                .ok_or_else(|| field_error(field, format!("element {k} is not a [re, im] pair of numbers")))
        })
        .collect()
}

fn dims(doc: &Value, expected: usize) -> Result<Vec<usize>> {
    let arr = doc
        .get("dims")
        .ok_or_else(|| field_error("dims", "missing"))?
        .as_array()
        .ok_or_else(|| field_error("dims", "expected an array of integers"))?;
    if arr.len() != expected {
        return Err(field_error(
            "dims",
            format!("expected {expected} entries, found {}", arr.len()),
        ));
    }
    let dims = arr
        .iter()
        .map(|v| {
            v.as_u64()
                .filter(|&d| d >= 1)
                .map(|d| d as usize)
                .ok_or_else(|| field_error("dims", "entries must be positive integers"))
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(&dim) = dims.iter().find(|&&d| d > MAX_DIM) {
        return Err(Error::DimensionTooLarge { dim, max: MAX_DIM });
    }
    Ok(dims)
}

fn expect_len(values: &[C64], n: usize, field: &str) -> Result<()> {
    if values.len() != n {
        return Err(field_error(
            field,
            format!("expected {n} entries, found {}", values.len()),
        ));
    }
    Ok(())
}

/// Parses and validates a state file.
pub fn parse_state(text: &str) -> Result<Loaded> {
    let doc: Value = serde_json::from_str(text).map_err(|e| field_error("<document>", e.to_string()))?;
    let kind = doc
        .get("kind")
        .ok_or_else(|| field_error("kind", "missing"))?
        .as_str()
        .ok_or_else(|| field_error("kind", "expected a string"))?;
    match kind {
        "pure" => {
            let d = dims(&doc, 1)?;
            let amps = complex_array(&doc, "amplitudes")?;
            expect_len(&amps, d[0], "amplitudes")?;
            let (psi, factor) = PureState::normalized(amps).map_err(|e| field_error("amplitudes", e.to_string()))?;
            Ok(Loaded {
                state: LoadedState::Pure(psi),
                normalization: factor,
            })
        }
        "bipartite_pure" => {
            let d = dims(&doc, 2)?;
            let amps = complex_array(&doc, "amplitudes")?;
            expect_len(&amps, d[0] * d[1], "amplitudes")?;
            let (phi, factor) = BipartitePureState::from_row_major(d[0], d[1], &amps)
                .map_err(|e| field_error("amplitudes", e.to_string()))?;
            Ok(Loaded {
                state: LoadedState::Bipartite(phi),
                normalization: factor,
            })
        }
        "density" => {
            let d = dims(&doc, 1)?;
            let entries = complex_array(&doc, "entries")?;
            expect_len(&entries, d[0] * d[0], "entries")?;
            let rho = DensityMatrix::new(DMatrix::from_row_slice(d[0], d[0], &entries))
                .map_err(|e| field_error("entries", e.to_string()))?;
            Ok(Loaded {
                state: LoadedState::Density(rho),
                normalization: 1.0,
            })
        }
        other => Err(field_error(
            "kind",
            format!("unknown kind `{other}` (expected pure, bipartite_pure or density)"),
        )),
    }
}
