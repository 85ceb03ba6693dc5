//! The voter and heat-bath encodings drive different couplings of the same
//! chain, so their one-time laws must agree.

mod common;

use common::mean_se;
use ising_cycle::dynamics::{evolve_heat_bath, evolve_voter, sample_update_sequence};
use ising_cycle::model::{deterministic_initial, InitialConditionKind, ModelParams, SpinConfig};
use ising_cycle::oracle::{evolve_distribution, DEFAULT_TOL};
use ising_cycle::rng::{stream, Domain};
use rayon::prelude::*;

type Evolve = fn(&SpinConfig, &ising_cycle::dynamics::UpdateSequence, &ModelParams) -> ising_cycle::Result<SpinConfig>;

fn site_values(evolve: Evolve, x0: &SpinConfig, p: &ModelParams, t: f64, site: usize, reps: usize, seed: u64) -> Vec<f64> {
    (0..reps)
        .into_par_iter()
        .map(|r| {
            let seq = sample_update_sequence(p, t, &mut stream(seed, Domain::Dynamics, r as u64)).unwrap();
            f64::from(evolve(x0, &seq, p).unwrap().spins()[site])
        })
        .collect()
}

#[test]
fn single_site_marginals_agree() {
    let (n, t) = (10, 2.0);
    let p = ModelParams::new(n, 0.3).unwrap();
    let x0 = SpinConfig::new(vec![1, 1, -1, 1, -1, -1, -1, 1, 1, -1]).unwrap();
    let voter = site_values(evolve_voter, &x0, &p, t, 0, 100_000, 41);
    let heat = site_values(evolve_heat_bath, &x0, &p, t, 0, 100_000, 42);
    let ((mv, sv), (mh, sh)) = (mean_se(&voter), mean_se(&heat));
    assert!((mv - mh).abs() <= 3.0 * sv.hypot(sh), "voter {mv} vs heat-bath {mh}");
}

#[test]
fn both_encodings_match_the_exact_marginal() {
    let (n, t) = (8, 0.9);
    let p = ModelParams::new(n, 0.45).unwrap();
    let x0 = deterministic_initial(InitialConditionKind::Blt, n).unwrap().unwrap();
    let exact = 2.0 * evolve_distribution(&x0, t, &p, DEFAULT_TOL).unwrap().plus_marginal(1) - 1.0;
    for (name, evolve, seed) in [("voter", evolve_voter as Evolve, 43), ("heat-bath", evolve_heat_bath as Evolve, 44)] {
        let (m, se) = mean_se(&site_values(evolve, &x0, &p, t, 1, 100_000, seed));
        assert!((m - exact).abs() <= 3.0 * se, "{name}: {m} vs exact {exact}");
    }
}
