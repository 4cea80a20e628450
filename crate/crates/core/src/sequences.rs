//! Experiment designs: the RPE ladders for `Gx`/`Gy` and the GST
//! fiducial–germ–fiducial family.
//!
//! Sequences are written in operation order: `[Gx, Gy]` applies `Gx` first.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ptm::Gate;
use Gate::{Gx, Gy};

/// Samples per sequence used when a design is built without an explicit `N`.
pub const DEFAULT_SAMPLES_PER_SEQUENCE: u64 = 370;

/// Unique GST sequence count of the reference experiment (`L_max = 1024`).
///
/// [`gst_design`] produces one fewer: the reference count also contains the
/// null sequence, which only arises from fiducial-pair strings.
pub const REFERENCE_GST_SEQUENCE_COUNT: usize = 2347;

/// Preparation and measurement fiducials for GST (identical sets).
pub const GST_FIDUCIALS: [&[Gate]; 6] = [&[], &[Gx], &[Gy], &[Gx, Gx], &[Gx, Gx, Gx], &[Gy, Gy, Gy]];

pub const GST_GERMS: [&[Gate]; 8] = [
    &[Gx],
    &[Gy],
    &[Gx, Gy],
    &[Gy, Gy, Gy, Gx],
    &[Gy, Gx, Gy, Gx, Gx, Gx],
    &[Gy, Gx, Gy, Gy, Gx, Gx],
    &[Gy, Gy, Gy, Gx, Gy, Gx],
    &[Gx, Gx, Gy, Gx, Gy, Gy],
];

/// Which rotation angle an RPE experiment targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Alpha,
    Epsilon,
}

impl Target {
    pub fn gate(self) -> Gate {
        match self {
            Target::Alpha => Gx,
            Target::Epsilon => Gy,
        }
    }

    pub fn kind(self) -> DesignKind {
        match self {
            Target::Alpha => DesignKind::RpeAlpha,
            Target::Epsilon => DesignKind::RpeEpsilon,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::Alpha => "alpha",
            Target::Epsilon => "epsilon",
        })
    }
}

impl std::str::FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" => Ok(Target::Alpha),
            "epsilon" => Ok(Target::Epsilon),
            other => Err(Error::invalid(format!(
                "unknown target {other:?}, expected alpha or epsilon"
            ))),
        }
    }
}

/// The two RPE sequences of a generation: `germ^k` (cosine) and `germ^(k+1)` (sine).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RpeRole {
    Cos,
    Sin,
}

/// One circuit: `prep`, then `germ` repeated `reps` times, then `meas`.
///
/// Equality is structural. Two specs may expand to the same gate string (for
/// instance `Gx·Gx` with one repetition and a `Gx` measurement fiducial, and
/// `Gx` repeated twice); use [`SequenceSpec::gate_string`] to compare circuits.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SequenceSpec {
    pub prep: Vec<Gate>,
    pub germ: Vec<Gate>,
    pub reps: usize,
    pub meas: Vec<Gate>,
}

impl SequenceSpec {
    pub fn new(prep: Vec<Gate>, germ: Vec<Gate>, reps: usize, meas: Vec<Gate>) -> Result<Self> {
        let spec = SequenceSpec {
            prep,
            germ,
            reps,
            meas,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::invalid(format!("sequence {self} has zero germ repetitions")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.prep.len() + self.reps * self.germ.len() + self.meas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Gates in operation order.
    pub fn expanded(&self) -> Vec<Gate> {
        let mut out = Vec::with_capacity(self.len());
        out.extend_from_slice(&self.prep);
        for _ in 0..self.reps {
            out.extend_from_slice(&self.germ);
        }
        out.extend_from_slice(&self.meas);
        out
    }

    /// Fully expanded gate string, e.g. `GxGxGy`; `{}` for the null sequence.
    pub fn gate_string(&self) -> String {
        let gates = self.expanded();
        if gates.is_empty() {
            return "{}".to_string();
        }
        gates.iter().map(|g| g.label()).collect()
    }
}

impl fmt::Display for SequenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |gs: &[Gate]| gs.iter().map(|g| g.label()).collect::<String>();
        if self.prep.is_empty() && self.germ.is_empty() && self.meas.is_empty() {
            return f.write_str("{}");
        }
        write!(f, "{}", join(&self.prep))?;
        if !self.germ.is_empty() {
            write!(f, "({})^{}", join(&self.germ), self.reps)?;
        }
        write!(f, "{}", join(&self.meas))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DesignKind {
    #[serde(rename = "rpe-alpha")]
    RpeAlpha,
    #[serde(rename = "rpe-epsilon")]
    RpeEpsilon,
    #[serde(rename = "gst")]
    Gst,
}

impl DesignKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DesignKind::RpeAlpha => "rpe-alpha",
            DesignKind::RpeEpsilon => "rpe-epsilon",
            DesignKind::Gst => "gst",
        }
    }

    pub fn target(self) -> Option<Target> {
        match self {
            DesignKind::RpeAlpha => Some(Target::Alpha),
            DesignKind::RpeEpsilon => Some(Target::Epsilon),
            DesignKind::Gst => None,
        }
    }
}

impl fmt::Display for DesignKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentDesign {
    pub kind: DesignKind,
    pub generations: Vec<u32>,
    pub sequences: Vec<SequenceSpec>,
    pub samples_per_sequence: u64,
}

impl ExperimentDesign {
    pub fn with_samples_per_sequence(mut self, n: u64) -> Self {
        self.samples_per_sequence = n;
        self
    }

    pub fn l_max(&self) -> u64 {
        self.generations.last().map_or(0, |&m| 1u64 << m)
    }

    /// Number of distinct expanded gate strings in the design.
    pub fn unique_gate_strings(&self) -> usize {
        self.sequences
            .iter()
            .map(SequenceSpec::gate_string)
            .collect::<HashSet<_>>()
            .len()
    }
}

fn log2_exact(l_max: u64) -> Result<u32> {
    if l_max == 0 || !l_max.is_power_of_two() {
        return Err(Error::invalid(format!(
            "l_max must be a power of two, got {l_max}"
        )));
    }
    Ok(l_max.trailing_zeros())
}

/// The RPE sequence for `target` at generation `m` in the given role.
pub fn rpe_sequence(target: Target, generation: u32, role: RpeRole) -> SequenceSpec {
    let g = target.gate();
    SequenceSpec {
        prep: Vec::new(),
        germ: vec![g],
        reps: 1usize << generation,
        meas: match role {
            RpeRole::Cos => Vec::new(),
            RpeRole::Sin => vec![g],
        },
    }
}

/// Two sequences per generation `m = 0..=log2(l_max)`: `germ^(2^m)` and
/// `germ^(2^m)` followed by one more `germ` as measurement fiducial.
pub fn rpe_design(target: Target, l_max: u64) -> Result<ExperimentDesign> {
    let top = log2_exact(l_max)?;
    let generations: Vec<u32> = (0..=top).collect();
    let sequences = generations
        .iter()
        .flat_map(|&m| {
            [RpeRole::Cos, RpeRole::Sin]
                .into_iter()
                .map(move |role| rpe_sequence(target, m, role))
        })
        .collect();
    Ok(ExperimentDesign {
        kind: target.kind(),
        generations,
        sequences,
        samples_per_sequence: DEFAULT_SAMPLES_PER_SEQUENCE,
    })
}

/// Every fiducial × germ × fiducial combination at every generation, before
/// deduplication, in canonical order (generation, germ, prep, meas).
///
/// Germs longer than `L` are applied once instead of zero times.
pub fn gst_candidates(l_max: u64) -> Result<Vec<SequenceSpec>> {
    let top = log2_exact(l_max)?;
    let mut out = Vec::with_capacity((top as usize + 1) * 8 * 36);
    for m in 0..=top {
        let l = 1usize << m;
        for germ in GST_GERMS {
            let reps = (l / germ.len()).max(1);
            for prep in GST_FIDUCIALS {
                for meas in GST_FIDUCIALS {
                    out.push(SequenceSpec {
                        prep: prep.to_vec(),
                        germ: germ.to_vec(),
                        reps,
                        meas: meas.to_vec(),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// [`gst_candidates`] deduplicated on the expanded gate string, keeping the
/// first occurrence.
pub fn gst_design(l_max: u64) -> Result<ExperimentDesign> {
    let top = log2_exact(l_max)?;
    let mut seen = HashSet::new();
    let sequences = gst_candidates(l_max)?
        .into_iter()
        .filter(|s| seen.insert(s.expanded()))
        .collect();
    Ok(ExperimentDesign {
        kind: DesignKind::Gst,
        generations: (0..=top).collect(),
        sequences,
        samples_per_sequence: DEFAULT_SAMPLES_PER_SEQUENCE,
    })
}

/// `(sequence_count, sequence_count × n)`.
pub fn count_samples(design: &ExperimentDesign, n: u64) -> (usize, u64) {
    count_sequences(design.sequences.len(), n)
}

pub fn count_sequences(sequence_count: usize, n: u64) -> (usize, u64) {
    (sequence_count, sequence_count as u64 * n)
}
