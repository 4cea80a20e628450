//! Monte Carlo scaling studies: RMSE against `L_max` at fixed `N`
//! (Heisenberg) and against total samples at fixed `L_max` (standard quantum
//! limit).

use serde::{Deserialize, Serialize};

use crate::bounds::{mean_estimate_deviation, rmse_over_trials, scaling_fit, ScalingFit};
use crate::error::{Error, Result};
use crate::estimator::{canonicalize_generations, robust_phase_estimation, wrap_angle};
use crate::ptm::{gate_ptm, GateParams};
use crate::sequences::{rpe_design, ExperimentDesign, Target};
use crate::simulator::{
    derive_seed, design_probabilities, sample_with_probabilities, subsample, Dataset, SpamModel,
};

/// Where each trial's data comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrialSource {
    /// An independent simulated dataset per trial.
    Fresh,
    /// Subsamples of one simulated master dataset with this many samples per sequence.
    Subsample { master_n: u64 },
}

#[derive(Clone, Debug)]
pub struct TrialConfig {
    pub target: Target,
    pub params: GateParams,
    pub spam: SpamModel,
    pub trials: usize,
    pub seed: u64,
    pub source: TrialSource,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub abscissa: f64,
    pub rmse: f64,
    pub l_max: u64,
    pub n: u64,
    pub total_samples: u64,
    pub mean_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    /// True eigenphase of the target gate.
    pub truth: f64,
    pub points: Vec<ScalingPoint>,
    pub fit: ScalingFit,
}

/// Eigenphase of the target gate under `params`.
pub fn true_phase(target: Target, params: &GateParams) -> Result<f64> {
    Ok(gate_ptm(params, target.gate())?.eigenframe()?.phi)
}

struct TrialRunner<'a> {
    cfg: &'a TrialConfig,
    design: ExperimentDesign,
    probabilities: Vec<f64>,
    master: Option<Dataset>,
}

impl<'a> TrialRunner<'a> {
    fn new(cfg: &'a TrialConfig, l_max: u64) -> Result<Self> {
        if cfg.trials == 0 {
            return Err(Error::invalid("trial count must be at least 1"));
        }
        let design = rpe_design(cfg.target, l_max)?;
        let probabilities = design_probabilities(&design, &cfg.params, &cfg.spam)?;
        let master = match cfg.source {
            TrialSource::Fresh => None,
            TrialSource::Subsample { master_n } => Some(sample_with_probabilities(
                &design,
                &probabilities,
                master_n,
                cfg.seed,
            )?),
        };
        Ok(TrialRunner {
            cfg,
            design,
            probabilities,
            master,
        })
    }

    fn dataset(&self, n: u64, trial: usize) -> Result<Dataset> {
        let seed = derive_seed(derive_seed(self.cfg.seed, n), trial as u64);
        match &self.master {
            None => sample_with_probabilities(&self.design, &self.probabilities, n, seed),
            Some(master) => subsample(master, n, seed),
        }
    }

    /// Per-generation estimates of one trial; entry `g` uses `L_max = 2^g`.
    fn per_generation(&self, n: u64, trial: usize) -> Result<Vec<f64>> {
        let data = self.dataset(n, trial)?;
        let signal =
            canonicalize_generations(&data, self.cfg.target, self.design.generations.len() as u32)?;
        Ok(robust_phase_estimation(&signal)?
            .per_generation
            .into_iter()
            .map(wrap_angle)
            .collect())
    }
}

/// RMSE of the estimate for every `L_max ∈ {1, 2, …, l_max}` at `n` samples
/// per sequence. Truncating the ladder is exact, so one pass per trial serves
/// every `L_max`.
pub fn heisenberg_scaling(cfg: &TrialConfig, n: u64, l_max: u64) -> Result<ScalingResult> {
    let runner = TrialRunner::new(cfg, l_max)?;
    let truth = true_phase(cfg.target, &cfg.params)?;
    let gens = runner.design.generations.len();
    let mut by_generation = vec![Vec::with_capacity(cfg.trials); gens];
    for t in 0..cfg.trials {
        for (g, e) in runner.per_generation(n, t)?.into_iter().enumerate() {
            by_generation[g].push(e);
        }
    }
    let points = by_generation
        .iter()
        .enumerate()
        .map(|(g, est)| {
            let l = 1u64 << g;
            Ok(ScalingPoint {
                abscissa: l as f64,
                rmse: rmse_over_trials(est, truth)?,
                l_max: l,
                n,
                total_samples: 2 * (g as u64 + 1) * n,
                mean_deviation: mean_estimate_deviation(est, truth)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    finish(truth, points)
}

/// RMSE at fixed `l_max` for each `n`, against total samples `S = sequences × n`.
pub fn sql_scaling(cfg: &TrialConfig, l_max: u64, ns: &[u64]) -> Result<ScalingResult> {
    let runner = TrialRunner::new(cfg, l_max)?;
    let truth = true_phase(cfg.target, &cfg.params)?;
    let sequences = runner.design.sequences.len() as u64;
    let mut points = Vec::with_capacity(ns.len());
    for &n in ns {
        let est = (0..cfg.trials)
            .map(|t| Ok(*runner.per_generation(n, t)?.last().expect("nonempty ladder")))
            .collect::<Result<Vec<f64>>>()?;
        let total = sequences * n;
        points.push(ScalingPoint {
            abscissa: total as f64,
            rmse: rmse_over_trials(&est, truth)?,
            l_max,
            n,
            total_samples: total,
            mean_deviation: mean_estimate_deviation(&est, truth)?,
        });
    }
    finish(truth, points)
}

/// Final-generation absolute errors of every trial.
pub fn trial_errors(cfg: &TrialConfig, n: u64, l_max: u64) -> Result<Vec<f64>> {
    let runner = TrialRunner::new(cfg, l_max)?;
    let truth = true_phase(cfg.target, &cfg.params)?;
    (0..cfg.trials)
        .map(|t| {
            let last = *runner.per_generation(n, t)?.last().expect("nonempty ladder");
            Ok(wrap_angle(last - truth).abs())
        })
        .collect()
}

fn finish(truth: f64, points: Vec<ScalingPoint>) -> Result<ScalingResult> {
    // a zero RMSE cannot be placed on a log scale; floor it at machine precision
    let fit_points: Vec<(f64, f64)> = points
        .iter()
        .map(|p| (p.abscissa, p.rmse.max(f64::EPSILON)))
        .collect();
    let fit = scaling_fit(&fit_points)?;
    Ok(ScalingResult { truth, points, fit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn config(trials: usize, source: TrialSource) -> TrialConfig {
        TrialConfig {
            target: Target::Alpha,
            params: GateParams {
                x_angle: FRAC_PI_2 + 1e-4,
                ..GateParams::ideal()
            },
            spam: SpamModel::default(),
            trials,
            seed: 99,
            source,
        }
    }

    #[test]
    fn heisenberg_points_cover_ladder() {
        let r = heisenberg_scaling(&config(20, TrialSource::Fresh), 64, 256).unwrap();
        assert_eq!(r.points.len(), 9);
        assert_eq!(r.points[8].l_max, 256);
        assert!(r.fit.exponent < -0.7, "{:?}", r.fit);
    }

    #[test]
    fn deterministic_in_seed() {
        let cfg = config(5, TrialSource::Subsample { master_n: 370 });
        let a = sql_scaling(&cfg, 64, &[8, 16, 32]).unwrap();
        let b = sql_scaling(&cfg, 64, &[8, 16, 32]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.points[0].total_samples, 14 * 8);
    }

    #[test]
    fn subsample_source_respects_master_size() {
        let cfg = config(3, TrialSource::Subsample { master_n: 10 });
        assert!(sql_scaling(&cfg, 8, &[8, 16, 32]).is_err());
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(heisenberg_scaling(&config(0, TrialSource::Fresh), 16, 8).is_err());
    }

    #[test]
    fn truth_is_eigenphase() {
        let p = GateParams {
            x_angle: 1.6,
            depol_x: 0.99,
            ..GateParams::ideal()
        };
        assert!((true_phase(Target::Alpha, &p).unwrap() - 1.6).abs() < 1e-12);
    }
}
