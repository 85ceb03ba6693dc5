//! Test statistics, Monte Carlo sampling and statistic-based lower bounds on
//! the total-variation distance to stationarity.
//!
//! For any statistic `f`, `TV(law of f(X_t), law of f(Y)) <= TV(X_t, Y)`,
//! so the empirical TV between the two samples of `f` is a lower bound on
//! the distance of the chain from equilibrium (up to sampling error).


use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{apply_voter, resample_update_sequence, UpdateSequence};
use crate::error::{invalid, Result};
use crate::model::{
    deterministic_initial, make_initial, sample_gibbs_into, InitialConditionKind, ModelParams,
    SpinConfig,
};
use crate::oracle::{self, DistributionVector};
use crate::rng::{stream, Domain, Stream};
use crate::semigroup::conditional_magnetization;

/// Default replica count for mixing curves.
pub const CURVE_REPLICAS: usize = 100_000;
/// Default replica count for mean-identity checks.
pub const IDENTITY_REPLICAS: usize = 1_000_000;
pub const BOOTSTRAP_RESAMPLES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// `sum_i x(i) E_{x0}[X_t(i)]`
    Autocorrelation,
    /// `sum_{k < n/4} x(4k) x(4k+1)`
    Hamiltonian,
    /// `sum_i x(i)`
    Magnetization,
}

impl Statistic {
    pub const ALL: [Statistic; 3] = [Self::Autocorrelation, Self::Hamiltonian, Self::Magnetization];

    pub fn name(self) -> &'static str {
        match self {
            Self::Autocorrelation => "autocorrelation",
            Self::Hamiltonian => "hamiltonian",
            Self::Magnetization => "magnetization",
        }
    }
}

/// Where the chain starts: a fixed configuration or a fresh uniformly
/// random one per replica (the annealed start).
#[derive(Debug, Clone, PartialEq)]
pub enum Start {
    Fixed(SpinConfig),
    Annealed,
}

impl Start {
    pub fn from_kind(kind: InitialConditionKind, n: usize) -> Result<Self> {
        Ok(match deterministic_initial(kind, n)? {
            Some(x) => Self::Fixed(x),
            None => Self::Annealed,
        })
    }

    /// Exact law of the start, for the oracle.
    pub fn distribution(&self, n: usize) -> Result<DistributionVector> {
        match self {
            Self::Fixed(x) => DistributionVector::point_mass(x),
            Self::Annealed => DistributionVector::uniform(n),
        }
    }

    fn conditional_magnetization(&self, t: f64, p: &ModelParams) -> Result<Vec<f64>> {
        match self {
            Self::Fixed(x) => conditional_magnetization(x, t, p),
            // the uniform start has zero mean at every site and time
            Self::Annealed => Ok(vec![0.0; p.n()]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleSource {
    /// The chain at time `t` from the start.
    Dynamics,
    /// Exact Gibbs samples.
    Stationary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatisticSamples {
    pub statistic: Statistic,
    pub source: SampleSource,
    pub t: f64,
    pub values: Vec<f64>,
}

impl StatisticSamples {
    pub fn replica_count(&self) -> usize {
        self.values.len()
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }

    pub fn variance(&self) -> f64 {
        variance(&self.values)
    }

    pub fn std_error(&self) -> f64 {
        (self.variance() / self.values.len() as f64).sqrt()
    }
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Unbiased sample variance (0 for fewer than two values).
pub fn variance(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64
}

pub fn autocorrelation_statistic(
    x: &SpinConfig,
    x0: &SpinConfig,
    t: f64,
    p: &ModelParams,
) -> Result<f64> {
    x.check_len(p.n())?;
    let m = conditional_magnetization(x0, t, p)?;
    Ok(dot(x.spins(), &m))
}

fn dot(spins: &[i8], w: &[f64]) -> f64 {
    spins.iter().zip(w).map(|(&s, &w)| f64::from(s) * w).sum()
}

pub fn hamiltonian_statistic(x: &SpinConfig) -> Result<f64> {
    if !x.len().is_multiple_of(4) {
        return Err(invalid(format!("Hamiltonian statistic needs n divisible by 4, got {}", x.len())));
    }
    Ok(hamiltonian_of(x.spins()))
}

fn hamiltonian_of(spins: &[i8]) -> f64 {
    spins
        .chunks_exact(4)
        .map(|c| f64::from(c[0] * c[1]))
        .sum()
}

pub fn magnetization(x: &SpinConfig) -> f64 {
    magnetization_of(x.spins())
}

fn magnetization_of(spins: &[i8]) -> f64 {
    spins.iter().map(|&s| f64::from(s)).sum()
}

/// The statistics evaluated at one time, with the autocorrelation weights
/// for that time precomputed.
struct Evaluator<'a> {
    stats: &'a [Statistic],
    weights: Vec<Vec<f64>>,
}

impl<'a> Evaluator<'a> {
    fn new(stats: &'a [Statistic], start: &Start, times: &[f64], p: &ModelParams) -> Result<Self> {
        if stats.contains(&Statistic::Hamiltonian) {
            p.require_multiple_of_four()?;
        }
        let weights = if stats.contains(&Statistic::Autocorrelation) {
            times
                .iter()
                .map(|&t| start.conditional_magnetization(t, p))
                .collect::<Result<_>>()?
        } else {
            vec![Vec::new(); times.len()]
        };
        Ok(Self { stats, weights })
    }

    fn write(&self, time_index: usize, spins: &[i8], out: &mut [f64]) {
        for (o, s) in out.iter_mut().zip(self.stats) {
            *o = match s {
                Statistic::Autocorrelation => dot(spins, &self.weights[time_index]),
                Statistic::Hamiltonian => hamiltonian_of(spins),
                Statistic::Magnetization => magnetization_of(spins),
            };
        }
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(invalid("need at least one time"));
    }
    if times.iter().any(|&t| !(t >= 0.0 && t.is_finite())) {
        return Err(invalid("times must be finite and non-negative"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("times must be strictly increasing"));
    }
    Ok(())
}

/// Samples every statistic in `stats` at every time in `times`.
///
/// Under [`SampleSource::Dynamics`] each replica runs one voter-encoded path
/// up to the last time and is observed at each grid time, so a replica's
/// values at different times are correlated while each time's sample is
/// i.i.d. across replicas. Under [`SampleSource::Stationary`] each replica
/// is one exact Gibbs sample. Replica `r` always draws from stream `r` of
/// the seed, so the output does not depend on the thread count.
///
/// Returned as `[time][statistic]`.
pub fn mc_sample_grid(
    stats: &[Statistic],
    start: &Start,
    times: &[f64],
    source: SampleSource,
    p: &ModelParams,
    replicas: usize,
    seed: u64,
) -> Result<Vec<Vec<StatisticSamples>>> {
    if replicas == 0 {
        return Err(invalid("need at least one replica"));
    }
    if stats.is_empty() {
        return Err(invalid("need at least one statistic"));
    }
    check_times(times)?;
    if let Start::Fixed(x) = start {
        x.check_len(p.n())?;
    }
    let eval = Evaluator::new(stats, start, times, p)?;
    let (nt, ns, n) = (times.len(), stats.len(), p.n());
    let t_max = *times.last().unwrap();
    let mut raw = vec![0.0; replicas * nt * ns];

    match source {
        SampleSource::Dynamics => raw.par_chunks_mut(nt * ns).enumerate().try_for_each_init(
            || (UpdateSequence::empty(n, 0.0), Vec::with_capacity(n)),
            |(seq, spins), (r, out)| -> Result<()> {
                let mut rng = stream(seed, Domain::Dynamics, r as u64);
                spins.clear();
                match start {
                    Start::Fixed(x) => spins.extend_from_slice(x.spins()),
                    Start::Annealed => spins.extend(
                        make_initial(InitialConditionKind::UniformRandom, n, &mut rng)?.spins(),
                    ),
                }
                if t_max > 0.0 {
                    resample_update_sequence(seq, p, t_max, &mut rng)?;
                } else {
                    *seq = UpdateSequence::empty(n, 0.0);
                }
                let mut prev = 0.0;
                for (k, &t) in times.iter().enumerate() {
                    apply_voter(spins, seq.window(prev, t), p.theta());
                    prev = t;
                    eval.write(k, spins, &mut out[k * ns..(k + 1) * ns]);
                }
                Ok(())
            },
        )?,
        SampleSource::Stationary => raw.par_chunks_mut(nt * ns).enumerate().for_each_init(
            || Vec::with_capacity(n),
            |spins, (r, out)| {
                let mut rng = stream(seed, Domain::Stationary, r as u64);
                sample_gibbs_into(p, &mut rng, spins);
                for k in 0..nt {
                    eval.write(k, spins, &mut out[k * ns..(k + 1) * ns]);
                }
            },
        ),
    }

    Ok(times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            stats
                .iter()
                .enumerate()
                .map(|(j, &statistic)| StatisticSamples {
                    statistic,
                    source,
                    t,
                    values: raw.chunks_exact(nt * ns).map(|c| c[k * ns + j]).collect(),
                })
                .collect()
        })
        .collect())
}

/// Samples of one statistic (the test function defined by `start` and `t`)
/// drawn from the chain at time `t` or from stationarity.
pub fn mc_statistic_samples(
    statistic: Statistic,
    start: &Start,
    t: f64,
    source: SampleSource,
    p: &ModelParams,
    replicas: usize,
    seed: u64,
) -> Result<StatisticSamples> {
    let mut grid = mc_sample_grid(&[statistic], start, &[t], source, p, replicas, seed)?;
    Ok(grid.remove(0).remove(0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TvEstimate {
    /// Null-bias-corrected lower bound, in `[0, raw]`.
    pub tv: f64,
    pub std_error: f64,
    /// Plain TV between the two binned empirical laws.
    pub raw: f64,
    /// Mean empirical TV between two samples of the same sizes drawn from the
    /// pooled law, i.e. the estimator's bias when the true distance is zero.
    pub null_bias: f64,
}

impl TvEstimate {
    const ZERO: Self = Self { tv: 0.0, std_error: 0.0, raw: 0.0, null_bias: 0.0 };
}

/// Shared histogram edges for two samples: Freedman–Diaconis width on the
/// pooled values, falling back to Sturges when the IQR vanishes.
fn bin_width(pooled: &mut [f64]) -> Option<(f64, f64)> {
    pooled.sort_by(|a, b| a.total_cmp(b));
    let len = pooled.len();
    let (lo, hi) = (pooled[0], pooled[len - 1]);
    if hi <= lo {
        return None;
    }
    let q = |f: f64| pooled[((len - 1) as f64 * f).round() as usize];
    let iqr = q(0.75) - q(0.25);
    let width = if iqr > 0.0 {
        2.0 * iqr / (len as f64).cbrt()
    } else {
        (hi - lo) / ((len as f64).log2().ceil() + 1.0)
    };
    Some((lo, width))
}

/// Per-bin counts of both samples over the bins occupied by either.
fn bin_counts(a: &[f64], b: &[f64], lo: f64, width: f64) -> (Vec<u64>, Vec<u64>) {
    let index = |v: &f64| ((v - lo) / width).floor() as i64;
    let mut occupied: Vec<i64> = a.iter().chain(b).map(index).collect();
    occupied.sort_unstable();
    occupied.dedup();
    let tally = |xs: &[f64]| {
        let mut counts = vec![0u64; occupied.len()];
        for v in xs {
            // Every index is present by construction.
            let k = occupied.binary_search(&index(v)).unwrap_or_else(|k| k);
            counts[k] += 1;
        }
        counts
    };
    (tally(a), tally(b))
}

fn counts_tv(ca: &[u64], cb: &[u64]) -> f64 {
    let na = ca.iter().sum::<u64>() as f64;
    let nb = cb.iter().sum::<u64>() as f64;
    0.5 * ca.iter().zip(cb).map(|(&x, &y)| (x as f64 / na - y as f64 / nb).abs()).sum::<f64>()
}

/// Multinomial draw of `total` items over bins weighted by `weights`; the
/// same law as resampling the underlying values with replacement.
fn multinomial(weights: &[u64], total: u64, rng: &mut Stream) -> Vec<u64> {
    let mut left_weight: u64 = weights.iter().sum();
    let mut left = total;
    weights
        .iter()
        .map(|&w| {
            let draw = if left == 0 || w == 0 {
                0
            } else if w >= left_weight {
                left
            } else {
                let prob = w as f64 / left_weight as f64;
                Binomial::new(left, prob).map_or(0, |d| d.sample(rng))
            };
            left -= draw;
            left_weight -= w;
            draw
        })
        .collect()
}

/// TV lower bound between the laws of two samples of a scalar statistic on a
/// shared binning, with a bootstrap standard error.
pub fn empirical_tv_lower_bound(
    a: &StatisticSamples,
    b: &StatisticSamples,
    seed: u64,
) -> Result<TvEstimate> {
    empirical_tv(&a.values, &b.values, seed)
}

/// The plain empirical TV is biased upwards (by roughly the sampling noise
/// per bin), so near stationarity it overshoots the true distance. The
/// returned `tv` rescales it as `(raw - b0) / (1 - b0)`, where `b0` is the
/// estimator's mean under the null of identical laws. This never exceeds
/// `raw`, so it remains a lower bound, and still maps `raw = 1` to 1.
pub fn empirical_tv(a: &[f64], b: &[f64], seed: u64) -> Result<TvEstimate> {
    if a.is_empty() || b.is_empty() {
        return Err(invalid("both samples must be non-empty"));
    }
    let mut pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let Some((lo, width)) = bin_width(&mut pooled) else {
        return Ok(TvEstimate::ZERO);
    };
    let (ca, cb) = bin_counts(a, b, lo, width);
    let (na, nb) = (a.len() as u64, b.len() as u64);
    let pooled_counts: Vec<u64> = ca.iter().zip(&cb).map(|(x, y)| x + y).collect();
    let raw = counts_tv(&ca, &cb);
    let draws: Vec<(f64, f64)> = (0..BOOTSTRAP_RESAMPLES)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, Domain::Bootstrap, k as u64);
            let boot = counts_tv(&multinomial(&ca, na, &mut rng), &multinomial(&cb, nb, &mut rng));
            let null = counts_tv(
                &multinomial(&pooled_counts, na, &mut rng),
                &multinomial(&pooled_counts, nb, &mut rng),
            );
            (boot, null)
        })
        .collect();
    let boot: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let null_bias = draws.iter().map(|d| d.1).sum::<f64>() / draws.len() as f64;
    let tv = if null_bias < 1.0 { ((raw - null_bias) / (1.0 - null_bias)).clamp(0.0, raw) } else { 0.0 };
    // Resampling cannot see cells the sample never hit, so near 0 or 1 the
    // bootstrap spread can collapse below what one observation moves the
    // estimate; report at least that resolution.
    let resolution = 0.5 * (1.0 / na as f64 + 1.0 / nb as f64);
    let std_error = variance(&boot).sqrt().max(resolution);
    Ok(TvEstimate { tv, std_error, raw, null_bias })
}

/// Threshold-set lower bound: `|P_a(f >= c) - P_b(f >= c)|` with `c` the
/// midpoint of the two sample means.
pub fn threshold_tv_lower_bound(a: &StatisticSamples, b: &StatisticSamples) -> f64 {
    let c = 0.5 * (a.mean() + b.mean());
    let frac = |v: &[f64]| v.iter().filter(|&&x| x >= c).count() as f64 / v.len() as f64;
    (frac(&a.values) - frac(&b.values)).abs()
}

/// TV lower bounds from one statistic along a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatisticCurve {
    pub statistic: Statistic,
    pub estimates: Vec<TvEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingCurve {
    pub times: Vec<f64>,
    /// Best lower bound over the statistics at each time.
    pub tv_lower_bounds: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// Present when `n <= oracle::N_MAX`.
    pub exact_tv: Option<Vec<f64>>,
    pub per_statistic: Vec<StatisticCurve>,
}

impl MixingCurve {
    /// First grid time whose lower bound is at most `level`.
    pub fn first_time_below(&self, level: f64) -> Option<f64> {
        self.times
            .iter()
            .zip(&self.tv_lower_bounds)
            .find(|(_, &tv)| tv <= level)
            .map(|(&t, _)| t)
    }
}

/// Statistics usable for a cycle of length `n`.
pub fn curve_statistics(n: usize) -> Vec<Statistic> {
    Statistic::ALL
        .into_iter()
        .filter(|&s| s != Statistic::Hamiltonian || n.is_multiple_of(4))
        .collect()
}

pub fn mixing_curve(
    kind: InitialConditionKind,
    p: &ModelParams,
    times: &[f64],
    replicas: usize,
    seed: u64,
) -> Result<MixingCurve> {
    let start = Start::from_kind(kind, p.n())?;
    mixing_curve_from(&start, p, times, replicas, seed)
}

pub fn mixing_curve_from(
    start: &Start,
    p: &ModelParams,
    times: &[f64],
    replicas: usize,
    seed: u64,
) -> Result<MixingCurve> {
    let stats = curve_statistics(p.n());
    let dynamic = mc_sample_grid(&stats, start, times, SampleSource::Dynamics, p, replicas, seed)?;
    let stationary = mc_sample_grid(&stats, start, times, SampleSource::Stationary, p, replicas, seed)?;

    let mut per_statistic: Vec<StatisticCurve> = stats
        .iter()
        .map(|&statistic| StatisticCurve { statistic, estimates: Vec::with_capacity(times.len()) })
        .collect();
    for (k, (dyn_row, stat_row)) in dynamic.iter().zip(&stationary).enumerate() {
        for (j, curve) in per_statistic.iter_mut().enumerate() {
            let boot_seed = seed ^ ((k as u64) << 32 | j as u64);
            curve.estimates.push(empirical_tv_lower_bound(&dyn_row[j], &stat_row[j], boot_seed)?);
        }
    }
    let (tv_lower_bounds, std_errors) = (0..times.len())
        .map(|k| {
            let best = per_statistic
                .iter()
                .map(|c| c.estimates[k])
                .max_by(|a, b| a.tv.total_cmp(&b.tv))
                .unwrap();
            (best.tv, best.std_error)
        })
        .unzip();
    let exact_tv = if p.n() <= oracle::N_MAX {
        Some(oracle::tv_curve(&start.distribution(p.n())?, times, p, oracle::DEFAULT_TOL)?)
    } else {
        None
    };
    Ok(MixingCurve { times: times.to_vec(), tv_lower_bounds, std_errors, exact_tv, per_statistic })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceEstimate {
    pub cov: f64,
    pub std_error: f64,
}

/// Empirical `Cov(X_t(0), X_t(separation))`, from the dynamics started at
/// `start` or, when `start` is `None`, from exact stationary samples.
pub fn covariance_decay_check(
    p: &ModelParams,
    t: f64,
    separation: usize,
    replicas: usize,
    seed: u64,
    start: Option<&Start>,
) -> Result<CovarianceEstimate> {
    let n = p.n();
    if separation == 0 || separation >= n {
        return Err(invalid(format!("separation must lie in 1..{n}, got {separation}")));
    }
    if replicas < 2 {
        return Err(invalid("need at least two replicas"));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid(format!("time must be finite and non-negative, got {t}")));
    }
    let pairs: Vec<(f64, f64)> = (0..replicas)
        .into_par_iter()
        .map_init(
            || (UpdateSequence::empty(n, 0.0), Vec::with_capacity(n)),
            |(seq, spins), r| -> Result<(f64, f64)> {
                match start {
                    None => {
                        let mut rng = stream(seed, Domain::Stationary, r as u64);
                        sample_gibbs_into(p, &mut rng, spins);
                    }
                    Some(s) => {
                        let mut rng = stream(seed, Domain::Dynamics, r as u64);
                        spins.clear();
                        match s {
                            Start::Fixed(x) => {
                                x.check_len(n)?;
                                spins.extend_from_slice(x.spins());
                            }
                            Start::Annealed => spins.extend(
                                make_initial(InitialConditionKind::UniformRandom, n, &mut rng)?.spins(),
                            ),
                        }
                        if t > 0.0 {
                            resample_update_sequence(seq, p, t, &mut rng)?;
                            apply_voter(spins, seq.events(), p.theta());
                        }
                    }
                }
                Ok((f64::from(spins[0]), f64::from(spins[separation])))
            },
        )
        .collect::<Result<_>>()?;
    let mx = pairs.iter().map(|q| q.0).sum::<f64>() / replicas as f64;
    let my = pairs.iter().map(|q| q.1).sum::<f64>() / replicas as f64;
    let products: Vec<f64> = pairs.iter().map(|(x, y)| (x - mx) * (y - my)).collect();
    let cov = products.iter().sum::<f64>() / (replicas - 1) as f64;
    Ok(CovarianceEstimate { cov, std_error: (variance(&products) / replicas as f64).sqrt() })
}

/// Two independent rate-`(1 - theta)` walks started at `site` and
/// `site + 1`, observed through `W(t) = x0(Z1(t)) x0(Z2(t))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoWalkSummary {
    pub replicas: usize,
    /// `E[W(t)]`
    pub product_mean: f64,
    pub product_se: f64,
    /// `E[W(t) 1{T > t}]`, `T` the first meeting time.
    pub unmet_product_mean: f64,
    pub unmet_product_se: f64,
    /// `E[W(t) | T > t]`
    pub conditional_mean: f64,
    pub conditional_se: f64,
    pub unmet_fraction: f64,
}

pub fn two_walk_sign_check(
    x0: &SpinConfig,
    site: usize,
    t: f64,
    p: &ModelParams,
    replicas: usize,
    seed: u64,
) -> Result<TwoWalkSummary> {
    let n = p.n();
    x0.check_len(n)?;
    if site >= n {
        return Err(invalid(format!("site {site} outside 0..{n}")));
    }
    if replicas < 2 {
        return Err(invalid("need at least two replicas"));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid(format!("time must be finite and non-negative, got {t}")));
    }
    let rate = 2.0 * (1.0 - p.theta());
    let spins = x0.spins();
    let outcomes: Vec<(f64, bool)> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, Domain::Walks, r as u64);
            let (mut z1, mut z2) = (site, (site + 1) % n);
            let mut met = false;
            let mut clock = 0.0;
            if rate > 0.0 {
                loop {
                    clock += rng.sample::<f64, _>(rand_distr::Exp1) / rate;
                    if clock > t {
                        break;
                    }
                    let draw: u8 = rng.random_range(0..4);
                    let z = if draw < 2 { &mut z1 } else { &mut z2 };
                    *z = if draw.is_multiple_of(2) { (*z + 1) % n } else { (*z + n - 1) % n };
                    met |= z1 == z2;
                }
            }
            (f64::from(spins[z1] * spins[z2]), met)
        })
        .collect();
    let products: Vec<f64> = outcomes.iter().map(|o| o.0).collect();
    let unmet: Vec<f64> = outcomes.iter().map(|&(w, met)| if met { 0.0 } else { w }).collect();
    let conditional: Vec<f64> = outcomes.iter().filter(|o| !o.1).map(|o| o.0).collect();
    let se = |v: &[f64]| (variance(v) / v.len() as f64).sqrt();
    let (conditional_mean, conditional_se) = if conditional.len() >= 2 {
        (mean(&conditional), se(&conditional))
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(TwoWalkSummary {
        replicas,
        product_mean: mean(&products),
        product_se: se(&products),
        unmet_product_mean: mean(&unmet),
        unmet_product_se: se(&unmet),
        conditional_mean,
        conditional_se,
        unmet_fraction: conditional.len() as f64 / replicas as f64,
    })
}
