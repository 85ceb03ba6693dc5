//! Monte Carlo laws of the backward histories: killing, jumping, spreading
//! and meeting.

mod common;

use common::{mean_se, poisson_tail};
use ising_cycle::dynamics::sample_update_sequence;
use ising_cycle::histories::{backward_support, max_displacement, survival_probability, HistoryTrajectory};
use ising_cycle::model::ModelParams;
use ising_cycle::rng::{stream, Domain};
use rayon::prelude::*;

fn histories(p: &ModelParams, sites: &[usize], horizon: f64, reps: usize, seed: u64) -> Vec<Vec<HistoryTrajectory>> {
    (0..reps)
        .into_par_iter()
        .map(|r| {
            let seq = sample_update_sequence(p, horizon, &mut stream(seed, Domain::Support, r as u64)).unwrap();
            backward_support(sites, 0.0, horizon, &seq, p).unwrap().1
        })
        .collect()
}

#[test]
fn survival_matches_exponential_killing() {
    let n = 32;
    let all: Vec<usize> = (0..n).collect();
    for (k, (beta, dt)) in [(0.1, 0.6), (0.4, 1.2), (0.8, 2.5)].into_iter().enumerate() {
        let p = ModelParams::new(n, beta).unwrap();
        let fractions: Vec<f64> = histories(&p, &all, dt, 100_000, 50 + k as u64)
            .iter()
            .map(|h| h.iter().filter(|h| h.survived()).count() as f64 / n as f64)
            .collect();
        let (m, se) = mean_se(&fractions);
        let target = survival_probability(&p, dt).unwrap();
        assert!((m - target).abs() <= 3.0 * se, "beta = {beta}: {m} vs {target} (se {se})");
    }
}

#[test]
fn single_walker_jump_count_near_zero_killing() {
    // theta is about 7e-4 here; jumps happen at rate 1 - theta while alive.
    let (n, horizon) = (64, 1.0);
    let p = ModelParams::new(n, 2.0).unwrap();
    let theta = p.theta();
    let jumps: Vec<f64> = histories(&p, &[0], horizon, 1_000_000, 60)
        .iter()
        .map(|h| h[0].jump_count() as f64)
        .collect();
    let (m, se) = mean_se(&jumps);
    let target = (1.0 - theta) * (1.0 - (-theta * horizon).exp()) / theta;
    assert!((m - target).abs() <= 3.0 * se, "{m} vs {target} (se {se})");
}

/// `P(max displacement >= k) <= |A| P(Poisson((1 - theta) T) >= k)`: a
/// history moves only at its own jumps, which come at rate `1 - theta`.
#[test]
fn displacement_tail_is_below_the_poisson_bound() {
    let (n, horizon) = (64, 2.0);
    let p = ModelParams::new(n, 0.3).unwrap();
    let rate = (1.0 - p.theta()) * horizon;
    for (sites, seed) in [(vec![0usize], 61), (vec![0, 16, 32, 48], 62), ((0..n).collect::<Vec<_>>(), 63)] {
        let displacement: Vec<usize> =
            histories(&p, &sites, horizon, 100_000, seed).iter().map(|h| max_displacement(h, n)).collect();
        for k in 1..=8u64 {
            let hits: Vec<f64> = displacement.iter().map(|&d| f64::from(u8::from(d as u64 >= k))).collect();
            let (freq, se) = mean_se(&hits);
            let bound = (sites.len() as f64 * poisson_tail(rate, k)).min(1.0);
            assert!(freq <= bound + 3.0 * se, "|A| = {}, k = {k}: {freq} > {bound}", sites.len());
        }
    }
}

/// Exceedance of the spread threshold decays in the threshold: each step up
/// removes at least as much probability as the Poisson tail predicts for the
/// union over all sites.
#[test]
fn spread_exceedance_decays_with_threshold() {
    let (n, horizon) = (48, 1.5);
    let p = ModelParams::new(n, 0.2).unwrap();
    let all: Vec<usize> = (0..n).collect();
    let rate = (1.0 - p.theta()) * horizon;
    let displacement: Vec<usize> =
        histories(&p, &all, horizon, 50_000, 64).iter().map(|h| max_displacement(h, n)).collect();
    let mut prev = f64::INFINITY;
    for d in 0..10u64 {
        let hits: Vec<f64> = displacement.iter().map(|&x| f64::from(u8::from(x as u64 > d))).collect();
        let (freq, se) = mean_se(&hits);
        let bound = (n as f64 * poisson_tail(rate, d + 1)).min(1.0);
        assert!(freq <= bound + 3.0 * se, "d = {d}: {freq} > {bound}");
        assert!(freq <= prev, "exceedance grew at d = {d}");
        prev = freq;
    }
}

#[test]
fn two_walkers_rarely_survive_apart() {
    let n = 32;
    let p = ModelParams::new(n, 0.2).unwrap();
    for (k, horizon) in [0.5, 1.0, 2.0].into_iter().enumerate() {
        let apart: Vec<f64> = histories(&p, &[0, 1], horizon, 100_000, 70 + k as u64)
            .iter()
            .map(|h| {
                // merged histories end on the same site
                let both = h[0].survived() && h[1].survived() && h[0].end_site() != h[1].end_site();
                f64::from(u8::from(both))
            })
            .collect();
        let (freq, se) = mean_se(&apart);
        let bound = (-2.0 * p.theta() * horizon).exp();
        assert!(freq <= bound + 3.0 * se, "T = {horizon}: {freq} > {bound}");
    }
}
