//! Robust phase estimation: successive range restriction over a ladder of
//! sequence lengths `L = 1, 2, 4, …`.
//!
//! Generation `i` measures `cos(Lφ)` and `sin(Lφ)` through two binomial
//! channels. Its arctangent fixes `φ` only modulo `2π/L`; the branch kept is
//! the one inside the half-open window `(prev − π/L, prev + π/L]` around the
//! previous generation's estimate.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequences::{rpe_sequence, RpeRole, Target};
use crate::simulator::Dataset;

/// Counts of one generation in the canonical convention: `cos_count / samples`
/// estimates `(1 + cos Lφ)/2` and `sin_count / samples` estimates `(1 + sin Lφ)/2`.
///
/// Counts are real-valued so exact expected signals can be fed in directly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelCounts {
    pub samples: f64,
    pub cos_count: f64,
    pub sin_count: f64,
}

impl ChannelCounts {
    /// Centered channel values `(2·cos_count/samples − 1, 2·sin_count/samples − 1)`.
    pub fn centered(&self) -> (f64, f64) {
        (
            (self.cos_count - self.samples / 2.0) / self.samples,
            (self.sin_count - self.samples / 2.0) / self.samples,
        )
    }
}

/// Generation `i` (0-based) has `L = 2^i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalSignal {
    generations: Vec<ChannelCounts>,
}

impl CanonicalSignal {
    pub fn new(generations: Vec<ChannelCounts>) -> Result<Self> {
        for (i, g) in generations.iter().enumerate() {
            if !(g.samples.is_finite() && g.samples >= 1.0) {
                return Err(Error::invalid(format!(
                    "generation {i}: sample count {} must be at least 1",
                    g.samples
                )));
            }
            for (name, v) in [("cosine", g.cos_count), ("sine", g.sin_count)] {
                if !(0.0..=g.samples).contains(&v) {
                    return Err(Error::invalid(format!(
                        "generation {i}: {name} count {v} outside [0, {}]",
                        g.samples
                    )));
                }
            }
        }
        Ok(CanonicalSignal { generations })
    }

    pub fn generations(&self) -> &[ChannelCounts] {
        &self.generations
    }

    pub fn len(&self) -> usize {
        self.generations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generations.is_empty()
    }

    /// The first `n` generations (`L_max = 2^(n-1)`).
    pub fn truncated(&self, n: usize) -> CanonicalSignal {
        CanonicalSignal {
            generations: self.generations[..n.min(self.generations.len())].to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RpeEstimate {
    /// Final estimate wrapped into `(−π, π]`.
    pub phase: f64,
    /// Estimate after each generation, before wrapping.
    pub per_generation: Vec<f64>,
    /// Generations whose empirical point sat exactly at the origin; they
    /// repeat the previous estimate.
    pub flagged: Vec<usize>,
    pub l_max: u64,
    pub target: Option<Target>,
}

impl RpeEstimate {
    /// Deviation of the estimated rotation angle from the ideal `π/2`.
    pub fn error_from_quarter_turn(&self) -> f64 {
        self.phase - FRAC_PI_2
    }
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut y = x.rem_euclid(two_pi);
    if y > PI {
        y -= two_pi;
    }
    y
}

pub fn robust_phase_estimation(signal: &CanonicalSignal) -> Result<RpeEstimate> {
    if signal.is_empty() {
        return Err(Error::invalid("signal has no generations"));
    }
    let mut estimate = 0.0;
    let mut per_generation = Vec::with_capacity(signal.len());
    let mut flagged = Vec::new();
    for (i, g) in signal.generations.iter().enumerate() {
        let l = (1u64 << i) as f64;
        let (c, s) = g.centered();
        if c == 0.0 && s == 0.0 {
            flagged.push(i);
            per_generation.push(estimate);
            continue;
        }
        // residue of φ modulo 2π/L
        let mut current = s.atan2(c) / l;
        let step = 2.0 * PI / l;
        let (lo, hi) = (estimate - PI / l, estimate + PI / l);
        while current <= lo {
            current += step;
        }
        while current > hi {
            current -= step;
        }
        estimate = current;
        per_generation.push(estimate);
    }
    Ok(RpeEstimate {
        phase: wrap_angle(estimate),
        per_generation,
        flagged,
        l_max: 1u64 << (signal.len() - 1),
        target: None,
    })
}

/// Highest generation `m` with an RPE-shaped entry `germ^(2^m)` for the target gate.
fn top_generation(data: &Dataset, target: Target) -> Option<u32> {
    let g = target.gate();
    data.iter()
        .filter(|(s, _)| {
            s.prep.is_empty()
                && s.germ == [g]
                && (s.meas.is_empty() || s.meas == [g])
                && s.reps.is_power_of_two()
        })
        .map(|(s, _)| s.reps.trailing_zeros())
        .max()
}

/// Maps physical `|1⟩` counts onto the canonical channels.
///
/// With prep `|0⟩`, effect `|1⟩⟨1|` and a rotation by `θ`, the `germ^k`
/// sequence fires with probability `(1 − cos kθ)/2` and `germ^(k+1)` with
/// `(1 + sin kθ)/2` up to `O(θ − π/2)`. The cosine channel therefore counts
/// outcome 0 of `germ^k` and the sine channel counts outcome 1 of `germ^(k+1)`.
pub fn canonicalize(data: &Dataset, target: Target) -> Result<CanonicalSignal> {
    let top = top_generation(data, target).ok_or_else(|| {
        Error::MalformedDataset(format!(
            "no {target} RPE sequences; missing {}",
            rpe_sequence(target, 0, RpeRole::Cos)
        ))
    })?;
    canonicalize_generations(data, target, top + 1)
}

/// As [`canonicalize`], using exactly the first `n_generations` generations.
pub fn canonicalize_generations(
    data: &Dataset,
    target: Target,
    n_generations: u32,
) -> Result<CanonicalSignal> {
    let n = data.samples_per_sequence() as f64;
    let mut generations = Vec::with_capacity(n_generations as usize);
    for m in 0..n_generations {
        let fetch = |role| {
            let seq = rpe_sequence(target, m, role);
            data.lookup(&seq).copied().ok_or_else(|| {
                Error::MalformedDataset(format!(
                    "missing sequence {seq} (generation {m}, {} role)",
                    match role {
                        RpeRole::Cos => "cosine",
                        RpeRole::Sin => "sine",
                    }
                ))
            })
        };
        let cos = fetch(RpeRole::Cos)?;
        let sin = fetch(RpeRole::Sin)?;
        generations.push(ChannelCounts {
            samples: n,
            cos_count: cos.n0 as f64,
            sin_count: sin.n1 as f64,
        });
    }
    CanonicalSignal::new(generations)
}

/// Canonicalize then estimate; the returned phase is the full rotation angle.
pub fn estimate_phase(data: &Dataset, target: Target) -> Result<RpeEstimate> {
    let signal = canonicalize(data, target)?;
    let mut est = robust_phase_estimation(&signal)?;
    est.target = Some(target);
    Ok(est)
}
