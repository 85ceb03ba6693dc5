//! Statistical helpers shared by the integration tests.
#![allow(dead_code)]

use statrs::distribution::{ChiSquared, ContinuousCDF, DiscreteCDF, Poisson};

pub fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Goodness of fit of `observed` counts to `probs`, merging cells with
/// expected count below 5 into one; returns the p-value.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> f64 {
    let total: u64 = observed.iter().sum();
    let (mut stat, mut cells) = (0.0, 0usize);
    let (mut small_obs, mut small_exp) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        let e = p * total as f64;
        if e < 5.0 {
            small_obs += o as f64;
            small_exp += e;
        } else {
            stat += (o as f64 - e).powi(2) / e;
            cells += 1;
        }
    }
    if small_exp > 0.0 {
        stat += (small_obs - small_exp).powi(2) / small_exp;
        cells += 1;
    }
    1.0 - ChiSquared::new((cells - 1) as f64).unwrap().cdf(stat)
}

/// Two-sample chi-square homogeneity test on paired category counts,
/// merging categories with pooled count below 10; returns the p-value.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> f64 {
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pending = (0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        pending.0 += x as f64;
        pending.1 += y as f64;
        if pending.0 + pending.1 >= 10.0 {
            cells.push(pending);
            pending = (0.0, 0.0);
        }
    }
    if pending.0 + pending.1 > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += pending.0;
                last.1 += pending.1;
            }
            None => cells.push(pending),
        }
    }
    let na: f64 = cells.iter().map(|c| c.0).sum();
    let nb: f64 = cells.iter().map(|c| c.1).sum();
    let stat: f64 = cells
        .iter()
        .map(|&(x, y)| {
            let pooled = (x + y) / (na + nb);
            let (ea, eb) = (pooled * na, pooled * nb);
            (x - ea).powi(2) / ea + (y - eb).powi(2) / eb
        })
        .sum();
    1.0 - ChiSquared::new((cells.len() - 1) as f64).unwrap().cdf(stat)
}

/// `P(Poisson(mean) >= k)`.
pub fn poisson_tail(mean: f64, k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    1.0 - Poisson::new(mean).unwrap().cdf(k - 1)
}
