//! The invariant suite behind `verify`: named checks per module at desk-scale
//! sizes, each with its own fixed seed.

use std::io::Write;
use std::time::{Duration, Instant};

use rand::Rng;

use super::{CliError, CliResult};
use crate::dynamics::{
    apply_voter, evolve_heat_bath, evolve_voter, heat_bath_plus_probability, sample_update_sequence,
    voter_plus_probability,
};
use crate::histories::{
    backward_support, cluster_decomposition, cycle_distance, resolve_spins, survival_probability,
    SupportSet,
};
use crate::model::{
    edge_sum, gibbs_log_weight, pair_correlation, partition_function, sample_gibbs, theta_of_beta,
    InitialConditionKind, ModelParams, SpinConfig,
};
use crate::oracle::{self, DistributionVector, DEFAULT_TOL};
use crate::rng::{stream, Domain};
use crate::semigroup::{
    autocorrelation_l2_prediction, conditional_magnetization, from_spectral, mixing_constant_for_theta,
    semigroup_apply, to_spectral,
};
use crate::stats::{
    covariance_decay_check, empirical_tv, mc_sample_grid, mixing_curve, SampleSource, Start, Statistic,
};

/// Hooks the suite exposes for mutation testing.
#[derive(Debug, Clone, Copy)]
pub struct VerifyContext {
    /// `theta(beta)` as used by the encoding-equivalence check.
    pub theta: fn(f64) -> f64,
    pub seed: u64,
}

impl Default for VerifyContext {
    fn default() -> Self {
        Self { theta: |beta| theta_of_beta(beta).unwrap_or(f64::NAN), seed: 20_240_611 }
    }
}

type CheckFn = fn(&VerifyContext) -> Result<String, String>;

struct Check {
    module: &'static str,
    name: &'static str,
    run: CheckFn,
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    /// `module::check`
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Default)]
pub struct SuiteReport {
    pub outcomes: Vec<CheckOutcome>,
}

impl SuiteReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.outcomes.iter().filter(|c| !c.passed)
    }

    pub fn all_passed(&self) -> bool {
        self.failures().next().is_none()
    }

    pub fn print<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        for c in &self.outcomes {
            let status = if c.passed { "PASS" } else { "FAIL" };
            writeln!(out, "{status} {:<44} {:>8.2?}  {}", c.name, c.elapsed, c.detail)?;
        }
        let failed = self.failures().count();
        writeln!(out, "{} checks, {} passed, {failed} failed", self.outcomes.len(), self.outcomes.len() - failed)
    }
}

const CHECKS: &[Check] = &[
    Check { module: "model", name: "theta_range", run: theta_range },
    Check { module: "model", name: "partition_function_enumeration", run: partition_function_enumeration },
    Check { module: "model", name: "pair_correlation_enumeration", run: pair_correlation_enumeration },
    Check { module: "model", name: "sampler_energy", run: sampler_energy },
    Check { module: "dynamics", name: "encoding_equivalence", run: encoding_equivalence },
    Check { module: "dynamics", name: "update_rate", run: update_rate },
    Check { module: "dynamics", name: "voter_matches_heat_bath", run: voter_matches_heat_bath },
    Check { module: "histories", name: "support_determines_spins", run: support_determines_spins },
    Check { module: "histories", name: "survival_law", run: survival_law },
    Check { module: "histories", name: "support_shrinks_backwards", run: support_shrinks_backwards },
    Check { module: "histories", name: "cluster_intervals_cover_support", run: cluster_intervals },
    Check { module: "semigroup", name: "eigenvector_decay", run: eigenvector_decay },
    Check { module: "semigroup", name: "round_trip_and_parseval", run: round_trip_and_parseval },
    Check { module: "semigroup", name: "semigroup_property", run: semigroup_property },
    Check { module: "semigroup", name: "predicted_constants", run: predicted_constants },
    Check { module: "oracle", name: "stationary_fixed_point", run: stationary_fixed_point },
    Check { module: "oracle", name: "killed_walk_marginals", run: killed_walk_marginals },
    Check { module: "oracle", name: "beta_zero_product_law", run: beta_zero_product_law },
    Check { module: "oracle", name: "tv_non_increasing", run: tv_non_increasing },
    Check { module: "oracle", name: "mixing_ordering", run: mixing_ordering },
    Check { module: "stats", name: "autocorrelation_mean_identity", run: autocorrelation_mean_identity },
    Check { module: "stats", name: "empirical_tv_fixtures", run: empirical_tv_fixtures },
    Check { module: "stats", name: "lower_bound_validity", run: lower_bound_validity },
    Check { module: "stats", name: "stationary_covariance", run: stationary_covariance },
];

/// Names of every check, as `module::check`.
pub fn check_names() -> Vec<String> {
    CHECKS.iter().map(|c| format!("{}::{}", c.module, c.name)).collect()
}

/// Runs the checks selected by `filter` (module name, or a substring of the
/// full name); a filter that selects nothing is a configuration error.
pub fn run_suite(ctx: &VerifyContext, filter: Option<&str>) -> CliResult<SuiteReport> {
    let selected: Vec<&Check> = CHECKS
        .iter()
        .filter(|c| match filter {
            None => true,
            Some(f) => c.module == f || format!("{}::{}", c.module, c.name).contains(f),
        })
        .collect();
    if selected.is_empty() {
        return Err(CliError::Config(format!("filter {:?} selects no checks", filter.unwrap_or(""))));
    }
    let outcomes = selected
        .into_iter()
        .map(|c| {
            let clock = Instant::now();
            let result = (c.run)(ctx);
            let elapsed = clock.elapsed();
            let (passed, detail) = match result {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckOutcome { name: format!("{}::{}", c.module, c.name), passed, detail, elapsed }
        })
        .collect();
    Ok(SuiteReport { outcomes })
}

type CheckResult = Result<String, String>;

fn lib<T>(r: crate::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn params(n: usize, beta: f64) -> Result<ModelParams, String> {
    lib(ModelParams::new(n, beta))
}

fn all_configs(n: usize) -> impl Iterator<Item = SpinConfig> {
    (0..1u64 << n).map(move |m| SpinConfig::from_mask(m, n))
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    (crate::stats::mean(v), (crate::stats::variance(v) / v.len() as f64).sqrt())
}

/// `|estimate - target| <= k * se`, reported as a z-score.
fn within_sigma(label: &str, estimate: f64, target: f64, se: f64, k: f64) -> Result<f64, String> {
    let z = (estimate - target) / se;
    ensure(z.abs() <= k, || format!("{label}: {estimate:.6} vs {target:.6} (z = {z:.2})"))?;
    Ok(z)
}

// ---- model ----

fn theta_range(_: &VerifyContext) -> CheckResult {
    let grid: Vec<f64> = (0..=40).map(|k| 0.1 * k as f64).collect();
    let thetas: Vec<f64> = grid.iter().map(|&b| lib(theta_of_beta(b))).collect::<Result<_, _>>()?;
    ensure(thetas[0] == 1.0, || format!("theta(0) = {}", thetas[0]))?;
    ensure(thetas.iter().all(|&t| t > 0.0 && t <= 1.0), || "theta outside (0, 1]".into())?;
    ensure(thetas.windows(2).all(|w| w[1] < w[0]), || "theta not decreasing in beta".into())?;
    ensure(theta_of_beta(-0.1).is_err() && theta_of_beta(f64::NAN).is_err(), || "bad beta accepted".into())?;
    Ok(format!("{} grid points", grid.len()))
}

fn partition_function_enumeration(_: &VerifyContext) -> CheckResult {
    let mut worst: f64 = 0.0;
    for n in [4, 6, 8, 10] {
        for beta in [0.0, 0.1, 0.5, 1.2] {
            let p = params(n, beta)?;
            let weights: Vec<f64> = all_configs(n).map(|x| gibbs_log_weight(&x, &p)).collect::<crate::Result<_>>().map_err(|e| e.to_string())?;
            let top = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let log_z = top + weights.iter().map(|w| (w - top).exp()).sum::<f64>().ln();
            let err = (log_z - partition_function(&p)).abs();
            worst = worst.max(err);
            ensure(err <= 1e-10, || format!("n = {n}, beta = {beta}: log Z error {err:e}"))?;
        }
    }
    Ok(format!("max |error| {worst:.1e}"))
}

fn pair_correlation_enumeration(_: &VerifyContext) -> CheckResult {
    let n = 10;
    for beta in [0.3, 0.8] {
        let p = params(n, beta)?;
        let pi = lib(oracle::stationary_vector(&p))?;
        for d in 1..=n / 2 {
            let exact: f64 = all_configs(n)
                .map(|x| pi.prob(&x) * f64::from(x.spins()[0] * x.spins()[d]))
                .sum();
            let formula = lib(pair_correlation(&p, d))?;
            ensure((exact - formula).abs() <= 1e-10, || {
                format!("beta = {beta}, d = {d}: {formula} vs enumerated {exact}")
            })?;
        }
    }
    Ok("n = 10, all separations".into())
}

fn sampler_energy(ctx: &VerifyContext) -> CheckResult {
    let p = params(10, 0.4)?;
    let pi = lib(oracle::stationary_vector(&p))?;
    let exact: f64 = all_configs(10).map(|x| pi.prob(&x) * f64::from(edge_sum(x.spins()))).sum();
    let mut rng = stream(ctx.seed, Domain::Stationary, 0);
    let samples: Vec<f64> = (0..20_000).map(|_| f64::from(edge_sum(sample_gibbs(&p, &mut rng).spins()))).collect();
    let (m, se) = mean_se(&samples);
    let z = within_sigma("mean edge sum", m, exact, se, 4.0)?;
    Ok(format!("z = {z:.2}"))
}

// ---- dynamics ----

fn encoding_equivalence(ctx: &VerifyContext) -> CheckResult {
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let beta = 0.1 * k as f64;
        let p = params(4, beta)?;
        let theta = (ctx.theta)(beta);
        for (left, right) in [(1i8, 1i8), (1, -1), (-1, 1), (-1, -1)] {
            let voter = voter_plus_probability(left, right, theta);
            let heat = lib(heat_bath_plus_probability(i32::from(left + right), &p))?;
            let err = (voter - heat).abs();
            worst = worst.max(err);
            ensure(err <= 1e-12, || {
                format!("beta = {beta:.2}, neighbours ({left}, {right}): voter {voter} vs heat-bath {heat}")
            })?;
        }
    }
    Ok(format!("max |error| {worst:.1e}"))
}

fn update_rate(ctx: &VerifyContext) -> CheckResult {
    let (n, horizon) = (32, 50.0);
    let p = params(n, 0.3)?;
    let seq = lib(sample_update_sequence(&p, horizon, &mut stream(ctx.seed, Domain::Dynamics, 0)))?;
    let events = seq.events();
    ensure(events.windows(2).all(|w| w[0].time < w[1].time), || "event times not increasing".into())?;
    ensure(
        events.iter().all(|e| {
            e.time > 0.0 && e.time <= horizon && cycle_distance(e.site as usize, e.neighbor as usize, n) == 1
        }),
        || "event outside the window or neighbour not adjacent".into(),
    )?;
    let expected = n as f64 * horizon;
    let z = within_sigma("event count", events.len() as f64, expected, expected.sqrt(), 4.0)?;
    Ok(format!("{} events, z = {z:.2}", events.len()))
}

fn voter_matches_heat_bath(ctx: &VerifyContext) -> CheckResult {
    let (n, t, reps) = (8, 0.7, 20_000);
    let p = params(n, 0.35)?;
    let x0 = lib(crate::model::deterministic_initial(InitialConditionKind::Alt, n))?.unwrap();
    let mut voter = Vec::with_capacity(reps);
    let mut heat = Vec::with_capacity(reps);
    for r in 0..reps as u64 {
        let seq = lib(sample_update_sequence(&p, t, &mut stream(ctx.seed, Domain::Dynamics, r)))?;
        voter.push(f64::from(lib(evolve_voter(&x0, &seq, &p))?.spins()[0]));
        let seq = lib(sample_update_sequence(&p, t, &mut stream(ctx.seed, Domain::Walks, r)))?;
        heat.push(f64::from(lib(evolve_heat_bath(&x0, &seq, &p))?.spins()[0]));
    }
    let (mv, sv) = mean_se(&voter);
    let (mh, sh) = mean_se(&heat);
    let z = within_sigma("site-0 mean", mv, mh, sv.hypot(sh), 4.0)?;
    Ok(format!("z = {z:.2}"))
}

// ---- histories ----

fn support_determines_spins(ctx: &VerifyContext) -> CheckResult {
    let n = 16;
    for r in 0..200u64 {
        let mut rng = stream(ctx.seed, Domain::Support, r);
        let p = params(n, rng.random_range(0.0..1.5))?;
        let seq = lib(sample_update_sequence(&p, 3.0, &mut rng))?;
        let s1 = rng.random_range(0.0..3.0);
        let mut at_s1: Vec<i8> = (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        apply_voter(&mut at_s1, seq.window(0.0, s1), p.theta());
        let mut at_s2 = at_s1.clone();
        apply_voter(&mut at_s2, seq.window(s1, 3.0), p.theta());
        let query: Vec<usize> = (0..n).filter(|i| i % 3 != 1).collect();
        let (support, histories) = lib(backward_support(&query, s1, 3.0, &seq, &p))?;
        let resolved = resolve_spins(&histories, &at_s1);
        for (k, &q) in query.iter().enumerate() {
            ensure(resolved[k] == at_s2[q], || format!("replica {r}: site {q} resolved wrongly"))?;
        }
        ensure(
            histories.iter().filter(|h| h.survived()).all(|h| support.contains(h.end_site())),
            || format!("replica {r}: surviving history ends outside the support"),
        )?;
    }
    Ok("200 random windows".into())
}

fn survival_law(ctx: &VerifyContext) -> CheckResult {
    let (n, horizon, reps) = (16, 1.5, 5_000);
    let p = params(n, 0.3)?;
    let all: Vec<usize> = (0..n).collect();
    let mut fractions = Vec::with_capacity(reps);
    for r in 0..reps as u64 {
        let seq = lib(sample_update_sequence(&p, horizon, &mut stream(ctx.seed, Domain::Support, r)))?;
        let (_, h) = lib(backward_support(&all, 0.0, horizon, &seq, &p))?;
        fractions.push(h.iter().filter(|h| h.survived()).count() as f64 / n as f64);
    }
    let (m, se) = mean_se(&fractions);
    let z = within_sigma("survival", m, lib(survival_probability(&p, horizon))?, se, 4.0)?;
    Ok(format!("z = {z:.2}"))
}

fn support_shrinks_backwards(ctx: &VerifyContext) -> CheckResult {
    let n = 24;
    let all: Vec<usize> = (0..n).collect();
    for r in 0..50u64 {
        let p = params(n, 0.1 * (r % 12) as f64)?;
        let seq = lib(sample_update_sequence(&p, 4.0, &mut stream(ctx.seed, Domain::Support, 10_000 + r)))?;
        let mut prev = usize::MAX;
        for k in (0..=8).rev() {
            let size = lib(backward_support(&all, 0.5 * k as f64, 4.0, &seq, &p))?.0.len();
            ensure(size <= prev, || format!("replica {r}: support grew going backwards"))?;
            prev = size;
        }
    }
    Ok("50 sequences".into())
}

fn cluster_intervals(ctx: &VerifyContext) -> CheckResult {
    let n = 40;
    let mut rng = stream(ctx.seed, Domain::Support, 99);
    for r in 0..300 {
        let sites = SupportSet::new((0..n).filter(|_| rng.random_bool(0.2)));
        let d_sep = rng.random_range(1..6);
        let dec = lib(cluster_decomposition(&sites, n, d_sep, 10))?;
        let mut covered = vec![0u32; n];
        for w in &dec.intervals {
            w.sites(n).for_each(|s| covered[s] += 1);
        }
        ensure(covered.iter().all(|&c| c <= 1), || format!("case {r}: intervals overlap"))?;
        ensure(sites.sites().iter().all(|&s| covered[s] == 1), || format!("case {r}: site left uncovered"))?;
    }
    Ok("300 random supports".into())
}

// ---- semigroup ----

fn eigenvector_decay(_: &VerifyContext) -> CheckResult {
    let mut worst: f64 = 0.0;
    for n in [8, 64, 4096] {
        for (kind, rate) in [(InitialConditionKind::Alt, 2.0), (InitialConditionKind::Blt, 1.0)] {
            let x = lib(crate::model::deterministic_initial(kind, n))?.unwrap();
            let xf: Vec<f64> = x.spins().iter().map(|&s| f64::from(s)).collect();
            for t in [0.3, 1.0, 2.5] {
                let y = lib(semigroup_apply(&xf, t, n))?;
                let scale = (-rate * t).exp();
                let err = y.iter().zip(&xf).map(|(a, b)| (a - scale * b).abs()).fold(0.0, f64::max);
                worst = worst.max(err);
                ensure(err <= 1e-10, || format!("{} at n = {n}, t = {t}: error {err:e}", kind.name()))?;
            }
        }
    }
    Ok(format!("max |error| {worst:.1e}"))
}

fn round_trip_and_parseval(ctx: &VerifyContext) -> CheckResult {
    let mut rng = stream(ctx.seed, Domain::Initial, 7);
    for n in [4, 30, 256] {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let spec = lib(to_spectral(&x))?;
        let back = from_spectral(&spec);
        let err = x.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        ensure(err <= 1e-10, || format!("n = {n}: round trip error {err:e}"))?;
        let lhs: f64 = x.iter().map(|v| v * v).sum();
        let rhs: f64 = spec.coefficients().iter().map(|v| v * v).sum();
        ensure((lhs - rhs).abs() <= 1e-9 * lhs.max(1.0), || format!("n = {n}: Parseval {lhs} vs {rhs}"))?;
    }
    Ok("n = 4, 30, 256".into())
}

fn semigroup_property(ctx: &VerifyContext) -> CheckResult {
    let n = 48;
    let mut rng = stream(ctx.seed, Domain::Initial, 8);
    let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let (s, t) = (0.4, 1.3);
    let composed = lib(semigroup_apply(&lib(semigroup_apply(&x, s, n))?, t, n))?;
    let direct = lib(semigroup_apply(&x, s + t, n))?;
    let err = composed.iter().zip(&direct).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ensure(err <= 1e-10, || format!("P_s P_t vs P_(s+t): error {err:e}"))?;
    let mass = |v: &[f64]| v.iter().sum::<f64>();
    ensure((mass(&direct) - mass(&x)).abs() <= 1e-9, || "mass not conserved".into())?;
    let sup = |v: &[f64]| v.iter().map(|a| a.abs()).fold(0.0, f64::max);
    ensure(sup(&direct) <= sup(&x) + 1e-12, || "sup norm grew".into())?;
    Ok(format!("max |error| {err:.1e}"))
}

fn predicted_constants(_: &VerifyContext) -> CheckResult {
    let crossing = lib(theta_of_beta(0.5 * (1.0f64 / 3.0).atanh()))?;
    for kind in [InitialConditionKind::Alt, InitialConditionKind::UniformRandom] {
        let c = mixing_constant_for_theta(kind, crossing);
        ensure((c - 0.375).abs() <= 1e-12, || format!("{} constant {c} at the crossing", kind.name()))?;
    }
    let half = lib(theta_of_beta(0.5 * 0.5f64.atanh()))?;
    let c = mixing_constant_for_theta(InitialConditionKind::Blt, half);
    ensure((c - 0.5).abs() <= 1e-12, || format!("blt constant {c}"))?;
    let beta0 = 0.5 * (1.0f64 / 3.0).atanh();
    let alt: Vec<f64> = (1..20)
        .map(|k| lib(theta_of_beta(beta0 * k as f64 / 20.0)).map(|t| mixing_constant_for_theta(InitialConditionKind::Alt, t)))
        .collect::<Result<_, _>>()?;
    ensure(alt.windows(2).all(|w| w[1] < w[0]), || "alt constant not decreasing below the crossing".into())?;
    Ok("crossing 3/8, blt 1/2, alt decreasing".into())
}

// ---- oracle ----

fn stationary_fixed_point(_: &VerifyContext) -> CheckResult {
    let p = params(8, 0.4)?;
    let pi = lib(oracle::stationary_vector(&p))?;
    let evolved = lib(oracle::evolve_from(&pi, 1.3, &p, DEFAULT_TOL))?;
    let tv = lib(oracle::total_variation(&pi, &evolved))?;
    ensure(tv <= 1e-10, || format!("TV(pi P_t, pi) = {tv:e}"))?;
    Ok(format!("TV {tv:.1e}"))
}

fn killed_walk_marginals(_: &VerifyContext) -> CheckResult {
    let n = 12;
    let p = params(n, 0.3)?;
    let mut worst: f64 = 0.0;
    for kind in InitialConditionKind::ALL {
        let start = lib(Start::from_kind(kind, n))?;
        for t in [0.5, 1.5] {
            let law = lib(oracle::evolve_from(&lib(start.distribution(n))?, t, &p, DEFAULT_TOL))?;
            let m = match &start {
                Start::Fixed(x) => lib(conditional_magnetization(x, t, &p))?,
                Start::Annealed => vec![0.0; n],
            };
            for (i, mi) in m.iter().enumerate() {
                let err = (law.plus_marginal(i) - 0.5 * (1.0 + mi)).abs();
                worst = worst.max(err);
                ensure(err <= 1e-8, || format!("{} at t = {t}, site {i}: error {err:e}", kind.name()))?;
            }
        }
    }
    Ok(format!("max |error| {worst:.1e}"))
}

fn beta_zero_product_law(_: &VerifyContext) -> CheckResult {
    let n = 8;
    let p = params(n, 0.0)?;
    let x0 = lib(crate::model::deterministic_initial(InitialConditionKind::Alt, n))?.unwrap();
    let t = 0.8;
    let law = lib(oracle::evolve_distribution(&x0, t, &p, DEFAULT_TOL))?;
    let stay = 0.5 * (1.0 + (-t).exp());
    let mut worst: f64 = 0.0;
    for x in all_configs(n) {
        let agree = x.spins().iter().zip(x0.spins()).filter(|(a, b)| a == b).count() as i32;
        let expected = stay.powi(agree) * (1.0 - stay).powi(n as i32 - agree);
        worst = worst.max((law.prob(&x) - expected).abs());
    }
    ensure(worst <= 1e-10, || format!("max error {worst:e}"))?;
    Ok(format!("max |error| {worst:.1e}"))
}

fn tv_non_increasing(_: &VerifyContext) -> CheckResult {
    let p = params(10, 0.5)?;
    let x0 = lib(crate::model::deterministic_initial(InitialConditionKind::Alt, 10))?.unwrap();
    let times: Vec<f64> = (0..=20).map(|k| 0.2 * k as f64).collect();
    let tv = lib(oracle::tv_curve(&lib(DistributionVector::point_mass(&x0))?, &times, &p, DEFAULT_TOL))?;
    ensure(tv.windows(2).all(|w| w[1] <= w[0] + 1e-12), || "TV increased along the grid".into())?;
    Ok(format!("TV {:.3} -> {:.3}", tv[0], tv[tv.len() - 1]))
}

fn mixing_ordering(_: &VerifyContext) -> CheckResult {
    let n = 12;
    let p = params(n, 0.15)?;
    let t: Vec<f64> = InitialConditionKind::ALL
        .iter()
        .map(|&k| {
            let start = lib(Start::from_kind(k, n))?;
            lib(oracle::exact_mixing_time_from(&lib(start.distribution(n))?, 0.25, &p, DEFAULT_TOL))
        })
        .collect::<Result<_, _>>()?;
    let (alt, blt, plus, annealed) = (t[0], t[1], t[2], t[3]);
    ensure(alt < blt && blt < plus && annealed <= plus, || {
        format!("alt {alt:.3}, blt {blt:.3}, plus {plus:.3}, annealed {annealed:.3}")
    })?;
    Ok(format!("alt {alt:.3} < blt {blt:.3} < plus {plus:.3}; annealed {annealed:.3}"))
}

// ---- stats ----

fn autocorrelation_mean_identity(ctx: &VerifyContext) -> CheckResult {
    let (n, t) = (32, 1.0);
    let p = params(n, 0.2)?;
    let start = lib(Start::from_kind(InitialConditionKind::Alt, n))?;
    let samples = lib(mc_sample_grid(&[Statistic::Autocorrelation], &start, &[t], SampleSource::Dynamics, &p, 20_000, ctx.seed))?;
    let s = &samples[0][0];
    let Start::Fixed(x0) = &start else { unreachable!() };
    let target = lib(autocorrelation_l2_prediction(x0, t, &p))?;
    let z = within_sigma("mean", s.mean(), target, s.std_error(), 4.0)?;
    Ok(format!("z = {z:.2}"))
}

fn empirical_tv_fixtures(ctx: &VerifyContext) -> CheckResult {
    let a: Vec<f64> = (0..500).map(|k| (k % 7) as f64).collect();
    let same = lib(empirical_tv(&a, &a, ctx.seed))?;
    ensure(same.tv == 0.0, || format!("identical samples give {}", same.tv))?;
    let zeros = vec![0.0; 300];
    let ones = vec![1.0; 400];
    let apart = lib(empirical_tv(&zeros, &ones, ctx.seed))?;
    ensure((apart.tv - 1.0).abs() <= 1e-12, || format!("disjoint samples give {}", apart.tv))?;
    Ok("identical -> 0, disjoint -> 1".into())
}

fn lower_bound_validity(ctx: &VerifyContext) -> CheckResult {
    let p = params(8, 0.3)?;
    let times: Vec<f64> = (0..=6).map(|k| 0.4 * k as f64).collect();
    let curve = lib(mixing_curve(InitialConditionKind::Alt, &p, &times, 20_000, ctx.seed))?;
    let exact = curve.exact_tv.as_ref().ok_or("exact column missing")?;
    let mut worst = f64::NEG_INFINITY;
    for c in &curve.per_statistic {
        for (k, e) in c.estimates.iter().enumerate() {
            let excess = e.tv - exact[k];
            ensure(excess <= 3.0 * e.std_error + 1e-12, || {
                format!("{} at t = {}: {:.4} > exact {:.4} + 3 se", c.statistic.name(), times[k], e.tv, exact[k])
            })?;
            if e.std_error > 0.0 {
                worst = worst.max(excess / e.std_error);
            }
        }
    }
    Ok(format!("worst z {worst:.2}"))
}

fn stationary_covariance(ctx: &VerifyContext) -> CheckResult {
    let p = params(16, 0.5)?;
    let mut worst: f64 = 0.0;
    for d in [1, 3] {
        let est = lib(covariance_decay_check(&p, 0.0, d, 40_000, ctx.seed + d as u64, None))?;
        let z = within_sigma(&format!("separation {d}"), est.cov, lib(pair_correlation(&p, d))?, est.std_error, 4.0)?;
        worst = worst.max(z.abs());
    }
    Ok(format!("max |z| {worst:.2}"))
}
