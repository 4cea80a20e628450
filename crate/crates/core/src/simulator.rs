//! Synthetic datasets: exact outcome probabilities from the gate model and
//! seeded binomial sampling, plus per-sequence subsampling without replacement.

use indexmap::IndexMap;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Hypergeometric};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ptm::{
    clamp_probability, gate_ptm, trace_distance, EffectVec, Gate, GateParams, Ptm, StateVec,
};
use crate::sequences::{rpe_sequence, DesignKind, ExperimentDesign, RpeRole, SequenceSpec, Target};

/// Preparation state and the effect reported as outcome `1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpamModel {
    pub prep: StateVec,
    pub effect_one: EffectVec,
}

impl Default for SpamModel {
    fn default() -> Self {
        SpamModel {
            prep: StateVec::zero(),
            effect_one: EffectVec::proj_one(),
        }
    }
}

impl SpamModel {
    /// Preparation with Bloch vector `prep_bloch` and a measurement whose
    /// outcome-1 effect is `a·I + b·σ`.
    pub fn new(prep_bloch: [f64; 3], effect_a: f64, effect_b: [f64; 3]) -> Result<Self> {
        Ok(SpamModel {
            prep: StateVec::from_bloch(prep_bloch)?,
            effect_one: EffectVec::from_pauli(effect_a, effect_b)?,
        })
    }

    /// Trace distance of the preparation from `|0⟩⟨0|`.
    pub fn prep_error(&self) -> f64 {
        trace_distance(&self.prep, &StateVec::zero())
    }
}

/// Gate PTMs and SPAM fixed once, for repeated probability evaluation.
#[derive(Clone, Debug)]
pub struct ProbabilityModel {
    gx: Ptm,
    gy: Ptm,
    spam: SpamModel,
}

impl ProbabilityModel {
    pub fn new(params: &GateParams, spam: &SpamModel) -> Result<Self> {
        Ok(ProbabilityModel {
            gx: gate_ptm(params, Gate::Gx)?,
            gy: gate_ptm(params, Gate::Gy)?,
            spam: *spam,
        })
    }

    fn gate(&self, g: Gate) -> &Ptm {
        match g {
            Gate::Gx => &self.gx,
            Gate::Gy => &self.gy,
        }
    }

    fn product(&self, gates: &[Gate]) -> Ptm {
        gates
            .iter()
            .fold(Ptm::identity(), |acc, &g| acc.then(self.gate(g)))
    }

    /// Probability of outcome `1` for `seq`.
    pub fn probability(&self, seq: &SequenceSpec) -> Result<f64> {
        let germ = self.product(&seq.germ).power(seq.reps);
        let circuit = self
            .product(&seq.prep)
            .then(&germ)
            .then(&self.product(&seq.meas));
        let v = circuit.apply(self.spam.prep.coords());
        clamp_probability(self.spam.effect_one.dot(&v))
    }
}

pub fn sequence_probability(seq: &SequenceSpec, params: &GateParams, spam: &SpamModel) -> Result<f64> {
    ProbabilityModel::new(params, spam)?.probability(seq)
}

/// Outcome-1 probability of every design sequence, in design order.
pub fn design_probabilities(
    design: &ExperimentDesign,
    params: &GateParams,
    spam: &SpamModel,
) -> Result<Vec<f64>> {
    let model = ProbabilityModel::new(params, spam)?;
    design.sequences.iter().map(|s| model.probability(s)).collect()
}

/// Largest deviation of any RPE sequence probability from the ideal signal
/// `(1 − cos kφ)/2` (cosine role) or `(1 + sin kφ)/2` (sine role), where `φ`
/// is the eigenphase of the target gate.
pub fn additive_error(
    target: Target,
    l_max: u64,
    params: &GateParams,
    spam: &SpamModel,
) -> Result<f64> {
    let model = ProbabilityModel::new(params, spam)?;
    let phi = model.gate(target.gate()).eigenframe()?.phi;
    let design = crate::sequences::rpe_design(target, l_max)?;
    let mut worst: f64 = 0.0;
    for &m in &design.generations {
        let k = (1u64 << m) as f64;
        for (role, ideal) in [
            (RpeRole::Cos, (1.0 - (k * phi).cos()) / 2.0),
            (RpeRole::Sin, (1.0 + (k * phi).sin()) / 2.0),
        ] {
            let p = model.probability(&rpe_sequence(target, m, role))?;
            worst = worst.max((p - ideal).abs());
        }
    }
    Ok(worst)
}

/// Two-outcome tallies for one sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub n0: u64,
    pub n1: u64,
}

impl Counts {
    pub fn total(&self) -> u64 {
        self.n0 + self.n1
    }
}

/// Counts keyed by sequence, all with the same number of samples `N`.
///
/// Iteration follows insertion order; equality ignores order.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    kind: DesignKind,
    samples_per_sequence: u64,
    entries: IndexMap<SequenceSpec, Counts>,
}

impl Dataset {
    pub fn new(kind: DesignKind, samples_per_sequence: u64) -> Self {
        Dataset {
            kind,
            samples_per_sequence,
            entries: IndexMap::new(),
        }
    }

    pub fn kind(&self) -> DesignKind {
        self.kind
    }

    pub fn samples_per_sequence(&self) -> u64 {
        self.samples_per_sequence
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds or replaces an entry; counts must sum to `N`.
    pub fn insert(&mut self, seq: SequenceSpec, counts: Counts) -> Result<()> {
        seq.validate()?;
        if counts.total() != self.samples_per_sequence {
            return Err(Error::Validation {
                sequence: seq.to_string(),
                reason: format!(
                    "n0 + n1 = {} but the dataset declares N = {}",
                    counts.total(),
                    self.samples_per_sequence
                ),
            });
        }
        self.entries.insert(seq, counts);
        Ok(())
    }

    pub fn get(&self, seq: &SequenceSpec) -> Option<&Counts> {
        self.entries.get(seq)
    }

    /// Exact structural match first, then any entry with the same expanded
    /// gate string. One measured circuit may thus serve several roles.
    pub fn lookup(&self, seq: &SequenceSpec) -> Option<&Counts> {
        self.get(seq).or_else(|| {
            let key = seq.expanded();
            self.entries
                .iter()
                .find(|(s, _)| s.expanded() == key)
                .map(|(_, c)| c)
        })
    }

    pub fn remove(&mut self, seq: &SequenceSpec) -> Option<Counts> {
        self.entries.shift_remove(seq)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SequenceSpec, &Counts)> {
        self.entries.iter()
    }
}

/// FNV-1a, used only to turn a sequence into a stable RNG stream id.
fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn sequence_key(domain: &str, seq: &SequenceSpec) -> String {
    let join = |gs: &[Gate]| gs.iter().map(|g| g.label()).collect::<Vec<_>>().join(",");
    format!(
        "{domain}|{}|{}|{}|{}",
        join(&seq.prep),
        join(&seq.germ),
        seq.reps,
        join(&seq.meas)
    )
}

/// Independent generator for `(seed, domain, sequence)`.
fn substream(seed: u64, domain: &str, seq: &SequenceSpec) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(sequence_key(domain, seq).as_bytes()));
    rng
}

/// SplitMix64 step; derives per-trial seeds from a master seed.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `n1 ~ Binomial(n, p)` per sequence, with precomputed probabilities.
pub fn sample_with_probabilities(
    design: &ExperimentDesign,
    probabilities: &[f64],
    n: u64,
    seed: u64,
) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::invalid("samples per sequence must be at least 1"));
    }
    if probabilities.len() != design.sequences.len() {
        return Err(Error::invalid(format!(
            "{} probabilities for {} sequences",
            probabilities.len(),
            design.sequences.len()
        )));
    }
    let mut data = Dataset::new(design.kind, n);
    for (seq, &p) in design.sequences.iter().zip(probabilities) {
        let binom = Binomial::new(n, p)
            .map_err(|e| Error::invalid(format!("binomial({n}, {p}): {e}")))?;
        let n1 = binom.sample(&mut substream(seed, "sample", seq));
        data.insert(seq.clone(), Counts { n0: n - n1, n1 })?;
    }
    Ok(data)
}

pub fn sample_dataset(
    design: &ExperimentDesign,
    params: &GateParams,
    spam: &SpamModel,
    n: u64,
    seed: u64,
) -> Result<Dataset> {
    let probs = design_probabilities(design, params, spam)?;
    sample_with_probabilities(design, &probs, n, seed)
}

/// Keeps `n_sub` of the `N` recorded shots of every sequence, drawn uniformly
/// without replacement.
pub fn subsample(data: &Dataset, n_sub: u64, seed: u64) -> Result<Dataset> {
    let total = data.samples_per_sequence;
    if n_sub > total {
        return Err(Error::invalid(format!(
            "cannot subsample {n_sub} shots from N = {total}"
        )));
    }
    let mut out = Dataset::new(data.kind, n_sub);
    for (seq, c) in data.iter() {
        let n1 = if n_sub == total {
            c.n1
        } else {
            Hypergeometric::new(total, c.n1, n_sub)
                .map_err(|e| Error::invalid(format!("hypergeometric: {e}")))?
                .sample(&mut substream(seed, "subsample", seq))
        };
        out.insert(seq.clone(), Counts { n0: n_sub - n1, n1 })?;
    }
    Ok(out)
}
