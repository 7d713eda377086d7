//! Declarative system files and verification report documents.
//!
//! A system file is a JSON document carrying exact fractions as strings
//! (`"1/6"`, `"-2"`); floating-point literals are rejected so file inputs
//! can never smuggle rounding into the exact engine. Random-time values use
//! the `"inf"` sentinel. Classes are either explicit per-time partitions or
//! the string `"derive-prefix"`, which derives `D(c, S)` from the declared
//! observed processes by stopped-prefix agreement.
//!
//! Reports are JSON documents with a schema tag, the tool version, a SHA-256
//! digest of the input and the seed where one applies. Identical inputs
//! produce byte-identical reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::control::{derive_prefix_classes, Control, ControlTime, FiniteControlSystem};
use crate::finite::{Filtration, ProbMeasure, RandomVariable, SampleSpace, SigmaField};
use crate::process::{DiscreteProcess, RandomTime, TimeValue};
use crate::rational::{format_fraction, parse_fraction};
use crate::{Error, Result};

pub const SYSTEM_SCHEMA: &str = "control-system/1";
pub const REPORT_SCHEMA: &str = "bellman-report/1";

// ---------------------------------------------------------------------------
// Documents
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemDoc {
    pub schema: String,
    pub outcomes: Vec<String>,
    pub horizon: usize,
    pub controls: Vec<ControlDoc>,
    pub times: Vec<TimeDoc>,
    pub classes: ClassesDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ControlDoc {
    pub id: String,
    /// One exact fraction per outcome, summing to one.
    pub measure: Vec<String>,
    /// Stages → atoms → outcome indices.
    pub filtration: Vec<Vec<Vec<usize>>>,
    pub payoff: Vec<String>,
    /// Observed process rows (outcome-major), needed by `derive-prefix`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimeDoc {
    pub id: String,
    /// Per control id: one time value per outcome (`"inf"` allowed).
    pub values: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ClassesDoc {
    /// `"derive-prefix"`: classes from stopped observed-process agreement.
    Mode(String),
    /// Per time id: the partition of control ids.
    Explicit(BTreeMap<String, Vec<Vec<String>>>),
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

fn parse_time_value(text: &str, horizon: usize) -> Result<TimeValue> {
    let t = text.trim();
    if t.eq_ignore_ascii_case("inf") || t == "∞" {
        return Ok(TimeValue::Infinite);
    }
    let v: usize = t
        .parse()
        .map_err(|_| Error::Parse(format!("bad time value {text:?}")))?;
    if v > horizon {
        return Err(Error::Parse(format!(
            "time value {v} exceeds horizon {horizon}; use \"inf\" for at-or-beyond"
        )));
    }
    Ok(TimeValue::Finite(v))
}

/// Parses a system file. Returns the system together with the document.
pub fn parse_system(text: &str) -> Result<(FiniteControlSystem, SystemDoc)> {
    let doc: SystemDoc = serde_json::from_str(text).map_err(|e| {
        Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column()))
    })?;
    if doc.schema != SYSTEM_SCHEMA {
        return Err(Error::Parse(format!(
            "unsupported schema {:?} (expected {SYSTEM_SCHEMA:?})",
            doc.schema
        )));
    }
    let space = SampleSpace::new(doc.outcomes.clone())?;
    let n = space.size();

    let mut controls = Vec::with_capacity(doc.controls.len());
    let mut observed: Vec<Option<DiscreteProcess>> = Vec::with_capacity(doc.controls.len());
    for c in &doc.controls {
        let weights = c.measure.iter().map(|s| parse_fraction(s)).collect::<Result<_>>()?;
        let measure = ProbMeasure::new(weights)?;
        if c.filtration.len() != doc.horizon + 1 {
            return Err(Error::Parse(format!(
                "control {}: filtration must list horizon+1 = {} stages",
                c.id,
                doc.horizon + 1
            )));
        }
        let stages = c
            .filtration
            .iter()
            .map(|atoms| SigmaField::from_atoms(n, atoms.clone()))
            .collect::<Result<Vec<_>>>()?;
        let filtration = Filtration::new(stages)?;
        let payoff = RandomVariable::new(
            c.payoff.iter().map(|s| parse_fraction(s)).collect::<Result<_>>()?,
        );
        if payoff.size() != n || measure.size() != n {
            return Err(Error::Dimension { expected: n, got: payoff.size() });
        }
        let obs = match &c.observed {
            None => None,
            Some(rows) => {
                let parsed = rows
                    .iter()
                    .map(|row| row.iter().map(|s| parse_fraction(s)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                Some(DiscreteProcess::new(parsed)?)
            }
        };
        observed.push(obs);
        controls.push(Control { id: c.id.clone(), filtration, measure, payoff });
    }

    let index_of = |id: &str| -> Result<usize> {
        controls
            .iter()
            .position(|c| c.id == id)
            .ok_or_else(|| Error::Parse(format!("unknown control id {id:?}")))
    };

    let mut times = Vec::with_capacity(doc.times.len());
    for t in &doc.times {
        let mut per_control = vec![None; controls.len()];
        for (cid, vals) in &t.values {
            let ci = index_of(cid)?;
            if vals.len() != n {
                return Err(Error::Parse(format!(
                    "time {}: control {} lists {} values for {} outcomes",
                    t.id,
                    cid,
                    vals.len(),
                    n
                )));
            }
            let parsed = vals
                .iter()
                .map(|v| parse_time_value(v, doc.horizon))
                .collect::<Result<Vec<_>>>()?;
            per_control[ci] = Some(RandomTime::new(parsed));
        }
        let stopping_times = per_control
            .into_iter()
            .enumerate()
            .map(|(ci, v)| {
                v.ok_or_else(|| {
                    Error::Parse(format!(
                        "time {} misses control {}",
                        t.id, controls[ci].id
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        times.push(ControlTime { id: t.id.clone(), stopping_times });
    }

    let classes = match &doc.classes {
        ClassesDoc::Mode(mode) if mode == "derive-prefix" => {
            let processes = observed
                .iter()
                .enumerate()
                .map(|(ci, o)| {
                    o.clone().ok_or_else(|| {
                        Error::Parse(format!(
                            "derive-prefix needs an observed process for control {}",
                            controls[ci].id
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            derive_prefix_classes(&processes, &times)?
        }
        ClassesDoc::Mode(mode) => {
            return Err(Error::Parse(format!("unknown classes mode {mode:?}")));
        }
        ClassesDoc::Explicit(map) => {
            let mut rows = Vec::with_capacity(times.len());
            for t in &times {
                let partition = map.get(&t.id).ok_or_else(|| {
                    Error::Parse(format!("classes missing time {}", t.id))
                })?;
                let mut row: Vec<Option<Vec<usize>>> = vec![None; controls.len()];
                for class in partition {
                    let mut ids = class
                        .iter()
                        .map(|id| index_of(id))
                        .collect::<Result<Vec<usize>>>()?;
                    ids.sort_unstable();
                    for &member in &ids {
                        if row[member].is_some() {
                            return Err(Error::Parse(format!(
                                "control {} appears in two classes at time {}",
                                controls[member].id, t.id
                            )));
                        }
                        row[member] = Some(ids.clone());
                    }
                }
                let row = row
                    .into_iter()
                    .enumerate()
                    .map(|(ci, v)| {
                        v.ok_or_else(|| {
                            Error::Parse(format!(
                                "control {} missing from classes at time {}",
                                controls[ci].id, t.id
                            ))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                rows.push(row);
            }
            rows
        }
    };

    let system = FiniteControlSystem::new(space, doc.horizon, controls, times, classes)?;
    Ok((system, doc))
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

/// Renders a system back into a document (with explicit classes).
pub fn system_to_doc(
    sys: &FiniteControlSystem,
    observed: Option<&[DiscreteProcess]>,
) -> SystemDoc {
    let controls = sys
        .controls
        .iter()
        .enumerate()
        .map(|(ci, c)| ControlDoc {
            id: c.id.clone(),
            measure: c.measure.weights().iter().map(format_fraction).collect(),
            filtration: c
                .filtration
                .stages()
                .iter()
                .map(|g| g.atoms().to_vec())
                .collect(),
            payoff: c.payoff.values().iter().map(format_fraction).collect(),
            observed: observed.map(|procs| {
                (0..procs[ci].outcomes())
                    .map(|i| {
                        (0..=procs[ci].horizon())
                            .map(|t| format_fraction(procs[ci].value(i, t)))
                            .collect()
                    })
                    .collect()
            }),
        })
        .collect();
    let times = sys
        .times
        .iter()
        .map(|t| TimeDoc {
            id: t.id.clone(),
            values: sys
                .controls
                .iter()
                .enumerate()
                .map(|(ci, c)| {
                    (
                        c.id.clone(),
                        t.stopping_times[ci].values().iter().map(|v| v.to_string()).collect(),
                    )
                })
                .collect(),
        })
        .collect();
    let classes = ClassesDoc::Explicit(
        sys.times
            .iter()
            .enumerate()
            .map(|(ti, t)| {
                let mut partition: Vec<Vec<String>> = Vec::new();
                let mut seen: Vec<&[usize]> = Vec::new();
                for ci in 0..sys.controls.len() {
                    let class = sys.class(ti, ci);
                    if !seen.contains(&class) {
                        seen.push(class);
                        partition
                            .push(class.iter().map(|&d| sys.controls[d].id.clone()).collect());
                    }
                }
                (t.id.clone(), partition)
            })
            .collect(),
    );
    SystemDoc {
        schema: SYSTEM_SCHEMA.into(),
        outcomes: sys.space.labels().to_vec(),
        horizon: sys.horizon,
        controls,
        times,
        classes,
    }
}

/// Deterministic pretty JSON for a document.
pub fn emit_json<T: Serialize>(doc: &T) -> String {
    let mut out = serde_json::to_string_pretty(doc).expect("document serialization is infallible");
    out.push('\n');
    out
}

// ---------------------------------------------------------------------------
// Report documents
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ReportDocument<T: Serialize> {
    pub schema: String,
    pub tool_version: String,
    /// `sha256:` digest of the input file (or of the config JSON for
    /// simulations).
    pub input_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub report: T,
}

pub fn sha256_hex(data: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(data);
    format!("sha256:{:x}", hasher.finalize())
}

pub fn report_document<T: Serialize>(input: &[u8], seed: Option<u64>, report: T) -> ReportDocument<T> {
    ReportDocument {
        schema: REPORT_SCHEMA.into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        input_digest: sha256_hex(input),
        seed,
        report,
    }
}
