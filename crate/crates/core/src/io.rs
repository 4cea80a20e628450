//! File formats: dataset and design JSON, bound and scaling CSV.
//!
//! Dataset JSON:
//!
//! ```json
//! {"n": 370, "kind": "rpe-alpha", "entries": [
//!   {"prep": [], "germ": ["Gx"], "reps": 4, "meas": ["Gx"], "n0": 180, "n1": 190}
//! ]}
//! ```

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::analysis::ScalingPoint;
use crate::bounds::{rmse_bound, BoundParams};
use crate::error::{Error, Result};
use crate::ptm::Gate;
use crate::sequences::{DesignKind, ExperimentDesign, SequenceSpec};
use crate::simulator::{Counts, Dataset};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetFile {
    n: u64,
    kind: DesignKind,
    entries: Vec<EntryFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryFile {
    prep: Vec<Gate>,
    germ: Vec<Gate>,
    reps: usize,
    meas: Vec<Gate>,
    n0: u64,
    n1: u64,
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

pub fn dataset_to_json(data: &Dataset) -> Result<String> {
    let file = DatasetFile {
        n: data.samples_per_sequence(),
        kind: data.kind(),
        entries: data
            .iter()
            .map(|(s, c)| EntryFile {
                prep: s.prep.clone(),
                germ: s.germ.clone(),
                reps: s.reps,
                meas: s.meas.clone(),
                n0: c.n0,
                n1: c.n1,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).map_err(parse_error)
}

/// Parses and validates a dataset: every entry's counts must sum to `n`, and
/// no sequence may appear twice.
pub fn dataset_from_json(text: &str) -> Result<Dataset> {
    let file: DatasetFile = serde_json::from_str(text).map_err(parse_error)?;
    let mut data = Dataset::new(file.kind, file.n);
    for e in file.entries {
        let seq = SequenceSpec {
            prep: e.prep,
            germ: e.germ,
            reps: e.reps,
            meas: e.meas,
        };
        if data.get(&seq).is_some() {
            return Err(Error::Validation {
                sequence: seq.to_string(),
                reason: "duplicate entry".into(),
            });
        }
        data.insert(seq, Counts { n0: e.n0, n1: e.n1 })?;
    }
    Ok(data)
}

pub fn ingest_dataset(path: impl AsRef<std::path::Path>) -> Result<Dataset> {
    dataset_from_json(&std::fs::read_to_string(path)?)
}

pub fn design_to_json(design: &ExperimentDesign) -> Result<String> {
    serde_json::to_string_pretty(design).map_err(parse_error)
}

pub fn design_from_json(text: &str) -> Result<ExperimentDesign> {
    let design: ExperimentDesign = serde_json::from_str(text).map_err(parse_error)?;
    for s in &design.sequences {
        s.validate()?;
    }
    if design.samples_per_sequence == 0 {
        return Err(Error::invalid("samples_per_sequence must be at least 1"));
    }
    Ok(design)
}

/// Bound curve CSV with columns `l_max,n,delta,bound`.
pub fn write_bound_csv<W: Write>(out: W, rows: &[BoundParams]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["l_max", "n", "delta", "bound"])?;
    for p in rows {
        w.write_record([
            p.l_max.to_string(),
            p.n.to_string(),
            p.delta.to_string(),
            rmse_bound(p).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Scaling CSV: `abscissa,rmse` followed by bookkeeping columns.
pub fn write_scaling_csv<W: Write>(out: W, points: &[ScalingPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "abscissa",
        "rmse",
        "l_max",
        "n",
        "total_samples",
        "mean_deviation",
    ])?;
    for p in points {
        w.write_record([
            p.abscissa.to_string(),
            p.rmse.to_string(),
            p.l_max.to_string(),
            p.n.to_string(),
            p.total_samples.to_string(),
            p.mean_deviation.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
