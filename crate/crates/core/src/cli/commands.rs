//! `mixing-curve`, `sweep` and `support`.

use std::fmt::Write as _;
use std::io::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use super::{
    linspace, output_dir, parse_grid, sidecar_path, to_json, CliError, CliResult, ExactMode,
    MixingCurveArgs, StagedOutputs, SupportArgs, SweepArgs,
};
use crate::dynamics::{sample_update_sequence, UpdateSequence};
use crate::histories::{
    backward_support, cluster_decomposition, default_thresholds, max_displacement,
    survival_probability, write_trajectories_csv, TRAJECTORY_CSV_HEADER,
};
use crate::model::{InitialConditionKind, ModelParams};
use crate::oracle::{self, N_MAX};
use crate::rng::{stream, Domain};
use crate::semigroup::predicted_mixing_constant;
use crate::stats::{self, curve_statistics, Start, BOOTSTRAP_RESAMPLES};

/// Largest number of sampled statistic values held in memory per source.
pub const MAX_SAMPLE_VALUES: usize = 1 << 28;

/// Replicas processed (and written) per batch by `support`.
const SUPPORT_BATCH: usize = 4096;

/// Package version plus `git describe`, when built from a checkout.
const VERSION: &str = env!("ISING_CYCLE_VERSION");

/// Exact mixing-time level reported alongside curves.
const QUARTER: f64 = 0.25;

fn wants_exact(mode: ExactMode, n: usize) -> CliResult<bool> {
    match mode {
        ExactMode::Never => Ok(false),
        ExactMode::Auto => Ok(n <= N_MAX),
        ExactMode::Always if n <= N_MAX => Ok(true),
        ExactMode::Always => Err(CliError::Capacity(format!(
            "the exact oracle handles n <= {N_MAX}, got n = {n}; \
             rerun with --exact auto or --exact never to drop the exact column"
        ))),
    }
}

fn params(n: usize, beta: f64) -> CliResult<ModelParams> {
    Ok(ModelParams::new(n, beta)?)
}

#[derive(Debug, Serialize)]
struct MixingCurveConfig {
    n: usize,
    beta: f64,
    theta: f64,
    init: &'static str,
    t_max: f64,
    t_steps: usize,
    replicas: usize,
    seed: u64,
    exact: ExactMode,
    statistics: Vec<&'static str>,
    bootstrap_resamples: usize,
    out: String,
}

#[derive(Debug, Serialize)]
struct StatisticColumns {
    statistic: &'static str,
    tv_lower: Vec<f64>,
    raw_tv: Vec<f64>,
    null_bias: Vec<f64>,
    stderr: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct MixingCurveMeta {
    command: &'static str,
    version: &'static str,
    config: MixingCurveConfig,
    first_time_below_quarter: Option<f64>,
    exact_t_mix_quarter: Option<f64>,
    per_statistic: Vec<StatisticColumns>,
}

pub(super) fn mixing_curve(a: &MixingCurveArgs) -> CliResult<()> {
    let p = params(a.n, a.beta)?;
    let kind = InitialConditionKind::from(a.init);
    let start = Start::from_kind(kind, a.n)?;
    if !(a.t_max > 0.0 && a.t_max.is_finite()) {
        return Err(CliError::Config(format!("t-max must be positive and finite, got {}", a.t_max)));
    }
    if a.t_steps < 2 {
        return Err(CliError::Config(format!("t-steps must be at least 2, got {}", a.t_steps)));
    }
    if a.replicas < 2 {
        return Err(CliError::Config(format!("replicas must be at least 2, got {}", a.replicas)));
    }
    let exact = wants_exact(a.exact, a.n)?;
    let stats = curve_statistics(a.n);
    let values = a.replicas.saturating_mul(a.t_steps * stats.len());
    if values > MAX_SAMPLE_VALUES {
        return Err(CliError::Capacity(format!(
            "{values} sampled values per source exceed the limit of {MAX_SAMPLE_VALUES}; \
             lower --replicas or --t-steps"
        )));
    }
    output_dir(&a.out)?;
    let side = sidecar_path(&a.out)?;

    let times = linspace(0.0, a.t_max, a.t_steps);
    let curve = stats::mixing_curve(kind, &p, &times, a.replicas, a.seed)?;
    let exact_tv = if exact { curve.exact_tv.as_deref() } else { None };
    let exact_t_mix = if exact {
        Some(oracle::exact_mixing_time_from(&start.distribution(a.n)?, QUARTER, &p, oracle::DEFAULT_TOL)?)
    } else {
        None
    };

    let mut csv = String::from(if exact_tv.is_some() { "t,tv_lower,stderr,exact_tv\n" } else { "t,tv_lower,stderr\n" });
    for (k, t) in times.iter().enumerate() {
        write!(csv, "{t},{},{}", curve.tv_lower_bounds[k], curve.std_errors[k]).unwrap();
        if let Some(ex) = exact_tv {
            write!(csv, ",{}", ex[k]).unwrap();
        }
        csv.push('\n');
    }

    let meta = MixingCurveMeta {
        command: "mixing-curve",
        version: VERSION,
        config: MixingCurveConfig {
            n: a.n,
            beta: a.beta,
            theta: p.theta(),
            init: kind.name(),
            t_max: a.t_max,
            t_steps: a.t_steps,
            replicas: a.replicas,
            seed: a.seed,
            exact: a.exact,
            statistics: stats.iter().map(|s| s.name()).collect(),
            bootstrap_resamples: BOOTSTRAP_RESAMPLES,
            out: a.out.display().to_string(),
        },
        first_time_below_quarter: curve.first_time_below(QUARTER),
        exact_t_mix_quarter: exact_t_mix,
        per_statistic: curve
            .per_statistic
            .iter()
            .map(|c| StatisticColumns {
                statistic: c.statistic.name(),
                tv_lower: c.estimates.iter().map(|e| e.tv).collect(),
                raw_tv: c.estimates.iter().map(|e| e.raw).collect(),
                null_bias: c.estimates.iter().map(|e| e.null_bias).collect(),
                stderr: c.estimates.iter().map(|e| e.std_error).collect(),
            })
            .collect(),
    };

    let mut out = StagedOutputs::new();
    out.write_all(&a.out, csv.as_bytes())?;
    out.write_all(&side, &to_json(&meta)?)?;
    out.commit()
}

#[derive(Debug, Serialize)]
struct SweepConfig {
    n: usize,
    beta_grid: String,
    betas: Vec<f64>,
    eps: f64,
    seed: u64,
    exact: ExactMode,
    out: String,
}

#[derive(Debug, Serialize)]
struct SweepMeta {
    command: &'static str,
    version: &'static str,
    config: SweepConfig,
    columns: Vec<&'static str>,
}

pub(super) fn sweep(a: &SweepArgs) -> CliResult<()> {
    let (lo, hi, steps) = parse_grid(&a.beta_grid)?;
    let betas = linspace(lo, hi, steps);
    let grid: Vec<ModelParams> = betas.iter().map(|&b| params(a.n, b)).collect::<CliResult<_>>()?;
    if !(a.eps > 0.0 && a.eps < 1.0) {
        return Err(CliError::Config(format!("eps must lie in (0, 1), got {}", a.eps)));
    }
    let exact = wants_exact(a.exact, a.n)?;
    // Starts that do not fit this n (the bi-alternating one needs 4 | n)
    // get an empty exact column.
    let starts: Vec<Option<Start>> =
        InitialConditionKind::ALL.iter().map(|&k| Start::from_kind(k, a.n).ok()).collect();
    output_dir(&a.out)?;
    let side = sidecar_path(&a.out)?;

    let jobs: Vec<(usize, usize)> =
        (0..grid.len()).flat_map(|b| (0..starts.len()).map(move |k| (b, k))).collect();
    let exact_times: Vec<Option<f64>> = if exact {
        jobs.par_iter()
            .map(|&(b, k)| match &starts[k] {
                Some(s) => oracle::exact_mixing_time_from(
                    &s.distribution(a.n)?,
                    a.eps,
                    &grid[b],
                    oracle::DEFAULT_TOL,
                )
                .map(Some),
                None => Ok(None),
            })
            .collect::<crate::Result<_>>()?
    } else {
        vec![None; jobs.len()]
    };

    let log_n = (a.n as f64).ln();
    let mut csv = String::from(if exact {
        "beta,theta,init,predicted_constant,exact_t_mix,exact_t_mix_over_log_n\n"
    } else {
        "beta,theta,init,predicted_constant\n"
    });
    for (&(b, k), t_mix) in jobs.iter().zip(&exact_times) {
        let p = &grid[b];
        let kind = InitialConditionKind::ALL[k];
        write!(csv, "{},{},{},{}", p.beta(), p.theta(), kind.name(), predicted_mixing_constant(kind, p)).unwrap();
        if exact {
            match t_mix {
                Some(t) => write!(csv, ",{t},{}", t / log_n).unwrap(),
                None => csv.push_str(",,"),
            }
        }
        csv.push('\n');
    }

    let mut columns = vec!["beta", "theta", "init", "predicted_constant"];
    if exact {
        columns.extend(["exact_t_mix", "exact_t_mix_over_log_n"]);
    }
    let meta = SweepMeta {
        command: "sweep",
        version: VERSION,
        config: SweepConfig {
            n: a.n,
            beta_grid: a.beta_grid.clone(),
            betas,
            eps: a.eps,
            seed: a.seed,
            exact: a.exact,
            out: a.out.display().to_string(),
        },
        columns,
    };

    let mut out = StagedOutputs::new();
    out.write_all(&a.out, csv.as_bytes())?;
    out.write_all(&side, &to_json(&meta)?)?;
    out.commit()
}

#[derive(Debug, Serialize)]
struct SupportConfig {
    n: usize,
    beta: f64,
    theta: f64,
    horizon: f64,
    replicas: usize,
    seed: u64,
    sites: Vec<usize>,
    d_sep: usize,
    d_max: usize,
    spread: usize,
    summary_only: bool,
    out: String,
}

#[derive(Debug, Default, Serialize)]
pub struct SupportSummary {
    pub trajectories: usize,
    pub survival_fraction: f64,
    /// From the per-replica fractions, which are independent across replicas.
    pub survival_std_error: f64,
    pub expected_survival: f64,
    pub mean_max_displacement: f64,
    pub max_displacement: usize,
    pub mean_support_size: f64,
    /// Fraction of replicas whose support splits into small, well-separated
    /// intervals.
    pub event_a_rate: f64,
    /// Fraction of replicas where no history moved beyond the spread
    /// threshold.
    pub event_b_rate: f64,
}

#[derive(Debug, Serialize)]
struct SupportMeta {
    command: &'static str,
    version: &'static str,
    config: SupportConfig,
    summary: SupportSummary,
}

struct ReplicaOutcome {
    rows: Vec<u8>,
    survivors: usize,
    max_displacement: usize,
    support_size: usize,
    event_a: bool,
    event_b: bool,
}

pub(super) fn support(a: &SupportArgs) -> CliResult<()> {
    let p = params(a.n, a.beta)?;
    if !(a.horizon >= 0.0 && a.horizon.is_finite()) {
        return Err(CliError::Config(format!("horizon must be finite and non-negative, got {}", a.horizon)));
    }
    if a.replicas < 2 {
        return Err(CliError::Config(format!("replicas must be at least 2, got {}", a.replicas)));
    }
    let sites = a.sites.clone().unwrap_or_else(|| (0..a.n).collect());
    if sites.is_empty() {
        return Err(CliError::Config("need at least one query site".into()));
    }
    if let Some(&bad) = sites.iter().find(|&&s| s >= a.n) {
        return Err(CliError::Config(format!("site {bad} outside 0..{}", a.n)));
    }
    let mut sorted = sites.clone();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(CliError::Config("query sites must be distinct".into()));
    }
    let (default_sep, default_max) = default_thresholds(a.n);
    let d_sep = a.d_sep.unwrap_or(default_sep);
    let d_max = a.d_max.unwrap_or(default_max);
    let spread = a.spread.unwrap_or(d_sep);
    if d_sep == 0 || d_max == 0 {
        return Err(CliError::Config("d-sep and d-max must be at least 1".into()));
    }
    output_dir(&a.out)?;
    let side = sidecar_path(&a.out)?;

    let mut out = StagedOutputs::new();
    let mut csv = if a.summary_only { None } else { Some(out.create(&a.out)?) };
    if let Some(f) = csv.as_mut() {
        writeln!(f, "{TRAJECTORY_CSV_HEADER}")?;
    }

    let n = a.n;
    let mut fractions = Vec::with_capacity(a.replicas);
    let mut summary = SupportSummary::default();
    let (mut events_a, mut events_b, mut support_total, mut displacement_total) = (0usize, 0usize, 0usize, 0usize);
    for first in (0..a.replicas).step_by(SUPPORT_BATCH) {
        let batch: Vec<ReplicaOutcome> = (first..a.replicas.min(first + SUPPORT_BATCH))
            .into_par_iter()
            .map(|r| -> crate::Result<ReplicaOutcome> {
                let seq = if a.horizon > 0.0 {
                    sample_update_sequence(&p, a.horizon, &mut stream(a.seed, Domain::Support, r as u64))?
                } else {
                    UpdateSequence::empty(n, 0.0)
                };
                let (support, histories) = backward_support(&sites, 0.0, a.horizon, &seq, &p)?;
                let mut rows = Vec::new();
                if !a.summary_only {
                    write_trajectories_csv(&mut rows, r, &histories)?;
                }
                let max_disp = max_displacement(&histories, n);
                Ok(ReplicaOutcome {
                    rows,
                    survivors: histories.iter().filter(|h| h.survived()).count(),
                    max_displacement: max_disp,
                    support_size: support.len(),
                    event_a: cluster_decomposition(&support, n, d_sep, d_max)?.event_a,
                    event_b: max_disp <= spread,
                })
            })
            .collect::<crate::Result<_>>()?;
        for o in batch {
            if let Some(f) = csv.as_mut() {
                f.write_all(&o.rows)?;
            }
            fractions.push(o.survivors as f64 / sites.len() as f64);
            summary.max_displacement = summary.max_displacement.max(o.max_displacement);
            displacement_total += o.max_displacement;
            support_total += o.support_size;
            events_a += usize::from(o.event_a);
            events_b += usize::from(o.event_b);
        }
    }

    let reps = a.replicas as f64;
    summary.trajectories = a.replicas * sites.len();
    summary.survival_fraction = crate::stats::mean(&fractions);
    summary.survival_std_error = (crate::stats::variance(&fractions) / reps).sqrt();
    summary.expected_survival = survival_probability(&p, a.horizon)?;
    summary.mean_max_displacement = displacement_total as f64 / reps;
    summary.mean_support_size = support_total as f64 / reps;
    summary.event_a_rate = events_a as f64 / reps;
    summary.event_b_rate = events_b as f64 / reps;

    let meta = SupportMeta {
        command: "support",
        version: VERSION,
        config: SupportConfig {
            n,
            beta: a.beta,
            theta: p.theta(),
            horizon: a.horizon,
            replicas: a.replicas,
            seed: a.seed,
            sites,
            d_sep,
            d_max,
            spread,
            summary_only: a.summary_only,
            out: a.out.display().to_string(),
        },
        summary,
    };
    out.write_all(&side, &to_json(&meta)?)?;
    out.commit()
}
