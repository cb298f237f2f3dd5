//! Synthetic parameter sweeps: for each grid value and repeat, generate an
//! MMSB graph, recover Θ, and score the recovery.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evaluation::entrywise_error;
use crate::harness::format_real;
use crate::lp::{recover_all, RecoveryMode};
use crate::mmsb::{
    build_probability_matrix, default_samples, make_interaction_matrix, sample_adjacency_average,
    sample_theta, InteractionKind, MmsbParams,
};
use crate::rng::stream;

pub const CSV_HEADER: &str = "variable,value,repeat_count,mean_error,std_error,mean_seconds,std_seconds";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepVariable {
    N,
    K,
    Alpha,
    Delta,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::N => "n",
            SweepVariable::K => "k",
            SweepVariable::Alpha => "alpha",
            SweepVariable::Delta => "delta",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    /// Values for the parameters not being swept.
    pub n: usize,
    pub k: usize,
    pub alpha: f64,
    pub delta: f64,
    /// Averaged samples per graph; `None` means `⌈√n⌉` for each trial's `n`.
    pub samples: Option<usize>,
    pub repeats: usize,
    pub base_seed: u64,
    pub mode: RecoveryMode,
    pub b_kind: InteractionKind,
    /// Measure wall-clock recovery time. Timed trials run one at a time so
    /// that they do not compete for cores; untimed sweeps report 0 seconds
    /// and are byte-for-byte reproducible.
    pub timing: bool,
}

impl SweepConfig {
    /// Defaults: n = 5000, k = 3, α = 0.5, δ = 0, 10 repeats, spectral
    /// recovery; B is `diag_random` unless δ itself is swept.
    pub fn new(variable: SweepVariable, grid: Vec<f64>) -> Self {
        SweepConfig {
            variable,
            grid,
            n: 5000,
            k: 3,
            alpha: 0.5,
            delta: 0.0,
            samples: None,
            repeats: 10,
            base_seed: 0,
            mode: RecoveryMode::Spectral,
            b_kind: if variable == SweepVariable::Delta {
                InteractionKind::DeltaBlend
            } else {
                InteractionKind::DiagRandom
            },
            timing: false,
        }
    }

    /// `(n, k, α, δ)` for one grid value.
    fn point(&self, value: f64) -> Result<(usize, usize, f64, f64)> {
        let as_count = |v: f64, what: &str| -> Result<usize> {
            if v.fract() == 0.0 && v >= 1.0 && v <= u32::MAX as f64 {
                Ok(v as usize)
            } else {
                Err(Error::invalid(format!("{what} = {v} must be a positive integer")))
            }
        };
        let (mut n, mut k, mut alpha, mut delta) = (self.n, self.k, self.alpha, self.delta);
        match self.variable {
            SweepVariable::N => n = as_count(value, "n")?,
            SweepVariable::K => k = as_count(value, "k")?,
            SweepVariable::Alpha => alpha = value,
            SweepVariable::Delta => delta = value,
        }
        if k < 2 || n < k {
            return Err(Error::invalid(format!("need 2 ≤ k ≤ n, got n = {n}, k = {k}")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid(format!("alpha = {alpha} must be positive")));
        }
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::invalid(format!("delta = {delta} must lie in [0, 1]")));
        }
        Ok((n, k, alpha, delta))
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::invalid("sweep grid is empty"));
        }
        if self.repeats == 0 {
            return Err(Error::invalid("repeats must be at least 1"));
        }
        if self.samples == Some(0) {
            return Err(Error::invalid("number of samples must be at least 1"));
        }
        for &v in &self.grid {
            self.point(v)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialOutcome {
    pub repeat: usize,
    /// Entrywise error, or the failure message.
    pub result: std::result::Result<f64, String>,
    pub seconds: f64,
    /// Some LP did not end optimal; its column of Θ̂ is zero or unnormalized.
    pub degraded: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub variable: SweepVariable,
    pub value: f64,
    /// Number of trials that produced an error value (the statistics below
    /// are over these); equals `repeats` unless some trial failed.
    pub repeat_count: usize,
    pub mean_error: f64,
    /// Sample standard deviation (`n − 1` denominator); 0 for one trial.
    pub std_error: f64,
    pub mean_seconds: f64,
    pub std_seconds: f64,
    pub trials: Vec<TrialOutcome>,
}

impl SweepRecord {
    pub fn failed_trials(&self) -> usize {
        self.trials.iter().filter(|t| t.result.is_err()).count()
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.variable.name(),
            format_real(self.value),
            self.repeat_count,
            format_real(self.mean_error),
            format_real(self.std_error),
            format_real(self.mean_seconds),
            format_real(self.std_seconds),
        )
    }
}

/// Mean and sample standard deviation; `(NaN, NaN)` for no data.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// RNG stream for one trial: grid index in the high half, repeat in the low.
fn trial_stream(grid_index: usize, repeat: usize) -> u64 {
    ((grid_index as u64) << 32) | repeat as u64
}

fn run_trial(cfg: &SweepConfig, grid_index: usize, repeat: usize) -> TrialOutcome {
    let mut seconds = 0.0;
    let mut degraded = false;
    let result = (|| -> Result<f64> {
        let (n, k, alpha, delta) = cfg.point(cfg.grid[grid_index])?;
        let mut rng = stream(cfg.base_seed, trial_stream(grid_index, repeat));
        let b = make_interaction_matrix(cfg.b_kind, k, delta, &mut rng)?;
        let params = MmsbParams::new(n, k, alpha, b)?;
        let theta = sample_theta(&params, &mut rng);
        let p = build_probability_matrix(&theta, &params.b)?;
        let graph = match cfg.mode {
            RecoveryMode::Exact => p,
            RecoveryMode::Spectral => {
                let s = cfg.samples.unwrap_or_else(|| default_samples(n));
                sample_adjacency_average(&p, s, &mut rng)?
            }
        };
        let start = Instant::now();
        let rec = recover_all(&graph, k, cfg.mode, &mut rng)?;
        if cfg.timing {
            seconds = start.elapsed().as_secs_f64();
        }
        degraded = !rec.all_optimal();
        Ok(entrywise_error(&rec.theta_hat, theta.as_matrix())?.error)
    })();
    TrialOutcome {
        repeat,
        result: result.map_err(|e| e.to_string()),
        seconds,
        degraded,
    }
}

/// Runs every (grid value, repeat) trial. Trial `(g, r)` draws from its own
/// stream of `base_seed`, so results do not depend on scheduling. A failing
/// trial is recorded in [`SweepRecord::trials`] and never aborts the sweep.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = (0..cfg.grid.len())
        .flat_map(|g| (0..cfg.repeats).map(move |r| (g, r)))
        .collect();
    let outcomes: Vec<TrialOutcome> = if cfg.timing {
        jobs.iter().map(|&(g, r)| run_trial(cfg, g, r)).collect()
    } else {
        jobs.par_iter().map(|&(g, r)| run_trial(cfg, g, r)).collect()
    };

    let mut records = Vec::with_capacity(cfg.grid.len());
    for (g, trials) in outcomes.chunks(cfg.repeats).enumerate() {
        let ok: Vec<&TrialOutcome> = trials.iter().filter(|t| t.result.is_ok()).collect();
        let errors: Vec<f64> = ok.iter().map(|t| *t.result.as_ref().unwrap()).collect();
        let secs: Vec<f64> = ok.iter().map(|t| t.seconds).collect();
        let (mean_error, std_error) = mean_std(&errors);
        let (mean_seconds, std_seconds) = mean_std(&secs);
        records.push(SweepRecord {
            variable: cfg.variable,
            value: cfg.grid[g],
            repeat_count: ok.len(),
            mean_error,
            std_error,
            mean_seconds,
            std_seconds,
            trials: trials.to_vec(),
        });
    }
    Ok(records)
}

/// Header plus one row per record, LF line endings.
pub fn write_sweep_csv<W: Write>(records: &[SweepRecord], mut out: W) -> Result<()> {
    out.write_all(CSV_HEADER.as_bytes())?;
    out.write_all(b"\n")?;
    for r in records {
        out.write_all(r.csv_row().as_bytes())?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
