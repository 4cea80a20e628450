//! The `rpe` command line: design, simulate, subsample, estimate, bound and
//! scaling subcommands over the rpe-core pipeline.
//!
//! Defaults: N = 370 samples per sequence, l_max = 1024, 100 trials.

use std::ffi::OsString;
use std::f64::consts::FRAC_PI_2;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rpe_core::analysis::{heisenberg_scaling, sql_scaling, ScalingResult, TrialConfig, TrialSource};
use rpe_core::bounds::BoundParams;
use rpe_core::estimator::estimate_phase;
use rpe_core::io::{
    dataset_to_json, design_from_json, design_to_json, ingest_dataset, write_bound_csv,
    write_scaling_csv,
};
use rpe_core::ptm::GateParams;
use rpe_core::sequences::{
    count_samples, gst_design, rpe_design, ExperimentDesign, Target, DEFAULT_SAMPLES_PER_SEQUENCE,
    REFERENCE_GST_SEQUENCE_COUNT,
};
use rpe_core::simulator::{sample_dataset, subsample, SpamModel};
use rpe_core::{Error, Result};

pub const DEFAULT_L_MAX: u64 = 1024;
pub const DEFAULT_TRIALS: usize = 100;

#[derive(Debug, Parser)]
#[command(name = "rpe", version, about = "Robust phase estimation toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Emit an experiment design as JSON.
    Design(DesignArgs),
    /// Simulate a dataset for a design.
    Simulate(SimulateArgs),
    /// Subsample every sequence of a dataset without replacement.
    Subsample(SubsampleArgs),
    /// Estimate a rotation angle from a dataset.
    Estimate(EstimateArgs),
    /// Analytic RMSE upper bound as CSV.
    Bound(BoundArgs),
    /// Monte Carlo RMSE scaling study with a power-law fit.
    Scaling(ScalingArgs),
}

#[derive(Debug, Args)]
pub struct DesignSelect {
    /// Gate whose angle the RPE design targets.
    #[arg(long, value_parser = parse_target, conflicts_with = "gst")]
    pub target: Option<Target>,
    /// GST design instead of RPE.
    #[arg(long)]
    pub gst: bool,
    #[arg(long, default_value_t = DEFAULT_L_MAX)]
    pub lmax: u64,
}

impl DesignSelect {
    fn build(&self) -> Result<ExperimentDesign> {
        if self.gst {
            gst_design(self.lmax)
        } else {
            rpe_design(self.target.unwrap_or(Target::Alpha), self.lmax)
        }
    }
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[command(flatten)]
    pub select: DesignSelect,
    #[arg(long, default_value_t = DEFAULT_SAMPLES_PER_SEQUENCE)]
    pub n: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Gate and SPAM model. Vectors are comma-separated `x,y,z`.
#[derive(Debug, Args, Clone)]
pub struct ModelArgs {
    #[arg(long, default_value_t = FRAC_PI_2, allow_negative_numbers = true)]
    pub x_angle: f64,
    #[arg(long, default_value_t = FRAC_PI_2, allow_negative_numbers = true)]
    pub y_angle: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub y_tilt: f64,
    /// Bloch-vector survival per X gate.
    #[arg(long, default_value_t = 1.0)]
    pub depol_x: f64,
    /// Bloch-vector survival per Y gate.
    #[arg(long, default_value_t = 1.0)]
    pub depol_y: f64,
    /// Bloch vector of the prepared state.
    #[arg(long, value_parser = parse_vec3, default_value = "0,0,1", allow_hyphen_values = true)]
    pub prep_bloch: [f64; 3],
    /// Identity coefficient of the outcome-1 effect `a·I + b·σ`.
    #[arg(long, default_value_t = 0.5)]
    pub effect_a: f64,
    #[arg(long, value_parser = parse_vec3, default_value = "0,0,-0.5", allow_hyphen_values = true)]
    pub effect_b: [f64; 3],
}

impl ModelArgs {
    fn params(&self) -> Result<GateParams> {
        let p = GateParams {
            x_angle: self.x_angle,
            y_angle: self.y_angle,
            y_tilt: self.y_tilt,
            depol_x: self.depol_x,
            depol_y: self.depol_y,
        };
        p.validate()?;
        Ok(p)
    }

    fn spam(&self) -> Result<SpamModel> {
        SpamModel::new(self.prep_bloch, self.effect_a, self.effect_b)
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub select: DesignSelect,
    /// Design JSON to simulate instead of a generated design.
    #[arg(long, conflicts_with_all = ["target", "gst"])]
    pub design: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Samples per sequence; defaults to the design's value.
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SubsampleArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Defaults to the dataset's kind.
    #[arg(long, value_parser = parse_target)]
    pub target: Option<Target>,
    /// Per-generation estimates as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// Samples per sequence; comma-separated for a curve.
    #[arg(long, value_delimiter = ',', default_value = "370")]
    pub n: Vec<u64>,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = DEFAULT_L_MAX)]
    pub lmax: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScalingMode {
    /// RMSE against L_max at fixed N.
    Heisenberg,
    /// RMSE against total samples at fixed L_max.
    Sql,
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    #[arg(long, value_enum)]
    pub mode: ScalingMode,
    #[arg(long, value_parser = parse_target, default_value = "alpha")]
    pub target: Target,
    /// Samples per sequence. Heisenberg mode takes one value (default 16),
    /// SQL mode a comma-separated list (default 8,16,32,64,128,256).
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<u64>,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    pub trials: usize,
    #[arg(long, default_value_t = DEFAULT_L_MAX)]
    pub lmax: u64,
    /// Draw trials as subsamples of one master dataset of this size.
    #[arg(long)]
    pub master_n: Option<u64>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_target(s: &str) -> std::result::Result<Target, String> {
    s.parse::<Target>().map_err(|e| e.to_string())
}

fn parse_vec3(s: &str) -> std::result::Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated numbers, got {s:?}"));
    }
    let mut out = [0.0; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|e| format!("{p:?}: {e}"))?;
    }
    Ok(out)
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, or to `stdout` when no path is given.
fn emit(path: Option<&Path>, contents: &[u8], stdout: &mut dyn Write) -> Result<()> {
    match path {
        None => {
            stdout.write_all(contents)?;
            Ok(())
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(contents)?;
            tmp.as_file().sync_all()?;
            tmp.persist(path).map_err(|e| Error::Io(e.error))?;
            Ok(())
        }
    }
}

fn resolve_seed(seed: Option<u64>, stderr: &mut dyn Write) -> Result<u64> {
    Ok(match seed {
        Some(s) => s,
        None => {
            let s = rand::random::<u64>();
            writeln!(stderr, "seed: {s}")?;
            s
        }
    })
}

fn with_newline(mut s: String) -> Vec<u8> {
    s.push('\n');
    s.into_bytes()
}

fn design_cmd(a: &DesignArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    if a.n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let design = a.select.build()?.with_samples_per_sequence(a.n);
    let (seqs, samples) = count_samples(&design, a.n);
    writeln!(stderr, "{}: {seqs} sequences, {samples} samples at N = {}", design.kind, a.n)?;
    if a.select.gst {
        writeln!(
            stderr,
            "reference GST count {REFERENCE_GST_SEQUENCE_COUNT}, generated {seqs} (difference {})",
            REFERENCE_GST_SEQUENCE_COUNT as i64 - seqs as i64
        )?;
    }
    emit(a.out.as_deref(), &with_newline(design_to_json(&design)?), stdout)
}

fn simulate_cmd(a: &SimulateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let design = match &a.design {
        Some(path) => design_from_json(&std::fs::read_to_string(path)?)?,
        None => a.select.build()?,
    };
    let n = a.n.unwrap_or(design.samples_per_sequence);
    let seed = resolve_seed(a.seed, stderr)?;
    let data = sample_dataset(&design, &a.model.params()?, &a.model.spam()?, n, seed)?;
    emit(a.out.as_deref(), &with_newline(dataset_to_json(&data)?), stdout)
}

fn subsample_cmd(a: &SubsampleArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let data = ingest_dataset(&a.input)?;
    let seed = resolve_seed(a.seed, stderr)?;
    let sub = subsample(&data, a.n, seed)?;
    emit(a.out.as_deref(), &with_newline(dataset_to_json(&sub)?), stdout)
}

fn estimate_cmd(a: &EstimateArgs, stdout: &mut dyn Write) -> Result<()> {
    let data = ingest_dataset(&a.input)?;
    let target = match a.target.or(data.kind().target()) {
        Some(t) => t,
        None => {
            return Err(Error::InvalidArgument(
                "dataset kind has no RPE target; pass --target".into(),
            ))
        }
    };
    let est = estimate_phase(&data, target)?;
    writeln!(stdout, "target: {target}")?;
    writeln!(stdout, "theta: {:.17e}", est.phase)?;
    writeln!(stdout, "theta - pi/2: {:.17e}", est.error_from_quarter_turn())?;
    if !est.flagged.is_empty() {
        writeln!(stdout, "flagged generations: {:?}", est.flagged)?;
    }
    if let Some(path) = &a.out {
        let per_generation: Vec<_> = est
            .per_generation
            .iter()
            .enumerate()
            .map(|(m, e)| serde_json::json!({"generation": m, "l": 1u64 << m, "estimate": e}))
            .collect();
        let doc = serde_json::json!({
            "target": target.to_string(),
            "l_max": est.l_max,
            "theta": est.phase,
            "theta_minus_half_pi": est.error_from_quarter_turn(),
            "flagged": est.flagged,
            "per_generation": per_generation,
        });
        let text = serde_json::to_string_pretty(&doc)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        emit(Some(path), &with_newline(text), stdout)?;
    }
    Ok(())
}

fn bound_cmd(a: &BoundArgs, stdout: &mut dyn Write) -> Result<()> {
    let rows = a
        .n
        .iter()
        .map(|&n| BoundParams::new(n, a.lmax, a.delta))
        .collect::<Result<Vec<_>>>()?;
    let mut buf = Vec::new();
    write_bound_csv(&mut buf, &rows)?;
    emit(a.out.as_deref(), &buf, stdout)
}

fn scaling_cmd(a: &ScalingArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let seed = resolve_seed(a.seed, stderr)?;
    let cfg = TrialConfig {
        target: a.target,
        params: a.model.params()?,
        spam: a.model.spam()?,
        trials: a.trials,
        seed,
        source: match a.master_n {
            Some(master_n) => TrialSource::Subsample { master_n },
            None => TrialSource::Fresh,
        },
    };
    let result: ScalingResult = match a.mode {
        ScalingMode::Heisenberg => {
            let n = match a.n.as_slice() {
                [] => 16,
                [n] => *n,
                _ => {
                    return Err(Error::InvalidArgument(
                        "heisenberg mode takes a single --n".into(),
                    ))
                }
            };
            heisenberg_scaling(&cfg, n, a.lmax)?
        }
        ScalingMode::Sql => {
            let ns = if a.n.is_empty() {
                vec![8, 16, 32, 64, 128, 256]
            } else {
                a.n.clone()
            };
            sql_scaling(&cfg, a.lmax, &ns)?
        }
    };
    let mut buf = Vec::new();
    write_scaling_csv(&mut buf, &result.points)?;
    emit(a.out.as_deref(), &buf, stdout)?;
    writeln!(
        stderr,
        "fit: rmse = {:.6e} * x^{:.6} (r^2 = {:.6})",
        result.fit.constant, result.fit.exponent, result.fit.r_squared
    )?;
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
/// Usage errors from argument parsing are returned as [`clap::Error`].
pub fn run<I, T>(
    args: I,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> std::result::Result<Result<()>, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    Ok(execute(&cli.command, stdout, stderr))
}

pub fn execute(command: &Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match command {
        Command::Design(a) => design_cmd(a, stdout, stderr),
        Command::Simulate(a) => simulate_cmd(a, stdout, stderr),
        Command::Subsample(a) => subsample_cmd(a, stdout, stderr),
        Command::Estimate(a) => estimate_cmd(a, stdout),
        Command::Bound(a) => bound_cmd(a, stdout),
        Command::Scaling(a) => scaling_cmd(a, stdout, stderr),
    }
}
