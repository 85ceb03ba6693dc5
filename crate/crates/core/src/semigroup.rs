//! The rate-1 simple random walk semigroup `P_t` on the cycle, applied
//! through its real orthonormal eigenbasis, and the closed-form quantities
//! built on it.
//!
//! Basis layout (index `j` -> frequency `k`):
//!
//! ```text
//! j = 0            constant          1/sqrt(n)                 k = 0
//! j = 2k - 1       cosine            sqrt(2/n) cos(2 pi k i/n)  1 <= k < n/2
//! j = 2k           sine              sqrt(2/n) sin(2 pi k i/n)  1 <= k < n/2
//! j = n - 1        alternating       (-1)^i / sqrt(n)           k = n/2, n even
//! ```
//!
//! Frequency `k` decays at rate `lambda_k = 1 - cos(2 pi k / n)`.

use crate::error::{invalid, Result};
use crate::model::{InitialConditionKind, ModelParams, SpinConfig};

/// Coefficients of a site vector in the real eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVector {
    coefficients: Vec<f64>,
}

impl SpectralVector {
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }
}

/// Decay rates `1 - cos(2 pi k / n)` for `k = 0..n`.
pub fn walk_eigenvalues(n: usize) -> Result<Vec<f64>> {
    if n < 3 {
        return Err(invalid(format!("cycle needs at least 3 sites, got {n}")));
    }
    Ok((0..n).map(|k| decay_rate(k, n)).collect())
}

// 2 sin^2(pi k / n) == 1 - cos(2 pi k / n), without cancellation at small k.
fn decay_rate(k: usize, n: usize) -> f64 {
    let s = (std::f64::consts::PI * k as f64 / n as f64).sin();
    2.0 * s * s
}

fn frequency_of(j: usize) -> usize {
    j.div_ceil(2)
}

struct Tables {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl Tables {
    fn new(n: usize) -> Self {
        let step = 2.0 * std::f64::consts::PI / n as f64;
        Self {
            cos: (0..n).map(|m| (step * m as f64).cos()).collect(),
            sin: (0..n).map(|m| (step * m as f64).sin()).collect(),
        }
    }
}

pub fn to_spectral(x: &[f64]) -> Result<SpectralVector> {
    let n = x.len();
    if n < 3 {
        return Err(invalid(format!("cycle needs at least 3 sites, got {n}")));
    }
    let tab = Tables::new(n);
    let norm0 = 1.0 / (n as f64).sqrt();
    let norm = (2.0 / n as f64).sqrt();
    let mut c = vec![0.0; n];
    c[0] = x.iter().sum::<f64>() * norm0;
    for k in 1..n.div_ceil(2) {
        let (mut a, mut b) = (0.0, 0.0);
        let mut m = 0;
        for &xi in x {
            a += xi * tab.cos[m];
            b += xi * tab.sin[m];
            m += k;
            if m >= n {
                m -= n;
            }
        }
        c[2 * k - 1] = a * norm;
        c[2 * k] = b * norm;
    }
    if n.is_multiple_of(2) {
        c[n - 1] = x
            .iter()
            .enumerate()
            .map(|(i, &xi)| if i % 2 == 0 { xi } else { -xi })
            .sum::<f64>()
            * norm0;
    }
    Ok(SpectralVector { coefficients: c })
}

pub fn from_spectral(v: &SpectralVector) -> Vec<f64> {
    let c = &v.coefficients;
    let n = c.len();
    let tab = Tables::new(n);
    let norm0 = 1.0 / (n as f64).sqrt();
    let norm = (2.0 / n as f64).sqrt();
    let mut x = vec![c[0] * norm0; n];
    for k in 1..n.div_ceil(2) {
        let (a, b) = (c[2 * k - 1] * norm, c[2 * k] * norm);
        if a == 0.0 && b == 0.0 {
            continue;
        }
        let mut m = 0;
        for xi in x.iter_mut() {
            *xi += a * tab.cos[m] + b * tab.sin[m];
            m += k;
            if m >= n {
                m -= n;
            }
        }
    }
    if n.is_multiple_of(2) {
        let a = c[n - 1] * norm0;
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += if i % 2 == 0 { a } else { -a };
        }
    }
    x
}

/// `P_t x` for the rate-1 walk on the cycle of length `x.len()`.
pub fn semigroup_apply(x: &[f64], t: f64, n: usize) -> Result<Vec<f64>> {
    if x.len() != n {
        return Err(invalid(format!("vector has {} entries, cycle has {n}", x.len())));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid(format!("time must be finite and non-negative, got {t}")));
    }
    if t == 0.0 {
        return Ok(x.to_vec());
    }
    let mut s = to_spectral(x)?;
    for (j, c) in s.coefficients.iter_mut().enumerate() {
        *c *= (-decay_rate(frequency_of(j), n) * t).exp();
    }
    Ok(from_spectral(&s))
}

/// `E_{x0}[X_t(i)] = e^{-theta t} (P_{(1-theta) t} x0)(i)`.
pub fn conditional_magnetization(x0: &SpinConfig, t: f64, p: &ModelParams) -> Result<Vec<f64>> {
    x0.check_len(p.n())?;
    let x: Vec<f64> = x0.spins().iter().map(|&s| f64::from(s)).collect();
    let damp = (-p.theta() * t).exp();
    let mut m = semigroup_apply(&x, (1.0 - p.theta()) * t, p.n())?;
    m.iter_mut().for_each(|v| *v *= damp);
    Ok(m)
}

/// Predicted mean of the autocorrelation statistic started from `x0`:
/// `e^{-2 theta t} ||P_{(1-theta) t} x0||^2`.
pub fn autocorrelation_l2_prediction(x0: &SpinConfig, t: f64, p: &ModelParams) -> Result<f64> {
    Ok(conditional_magnetization(x0, t, p)?.iter().map(|v| v * v).sum())
}

/// Coefficient of `log n` in the asymptotic mixing time from each start.
/// The random start is the annealed one.
pub fn predicted_mixing_constant(kind: InitialConditionKind, p: &ModelParams) -> f64 {
    mixing_constant_for_theta(kind, p.theta())
}

pub fn mixing_constant_for_theta(kind: InitialConditionKind, theta: f64) -> f64 {
    match kind {
        InitialConditionKind::Alt => (1.0 / (4.0 - 2.0 * theta)).max(1.0 / (4.0 * theta)),
        InitialConditionKind::Blt => 0.5f64.max(1.0 / (4.0 * theta)),
        InitialConditionKind::Plus => 1.0 / (2.0 * theta),
        InitialConditionKind::UniformRandom => 1.0 / (4.0 * theta),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::deterministic_initial;
    use proptest::prelude::*;

    fn as_f64(x: &SpinConfig) -> Vec<f64> {
        x.spins().iter().map(|&s| f64::from(s)).collect()
    }

    fn norm2(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    /// Direct transition kernel of the rate-1 walk: sum over the number of
    /// left and right steps of a Poisson(t) jump count.
    fn walk_kernel_apply(x: &[f64], t: f64) -> Vec<f64> {
        let n = x.len();
        let mut out = vec![0.0; n];
        let mut pk = (-t).exp();
        for k in 0..200usize {
            if k > 0 {
                pk *= t / k as f64;
            }
            // binomial split of k steps into right moves
            let mut b = 0.5f64.powi(k as i32);
            for r in 0..=k {
                if r > 0 {
                    b *= (k - r + 1) as f64 / r as f64;
                }
                let shift = (r as i64 - (k - r) as i64).rem_euclid(n as i64) as usize;
                for i in 0..n {
                    out[i] += pk * b * x[(i + shift) % n];
                }
            }
        }
        out
    }

    #[test]
    fn eigenvalue_fixtures() {
        let ev = walk_eigenvalues(16).unwrap();
        assert_eq!(ev[0], 0.0);
        assert!((ev[8] - 2.0).abs() < 1e-15);
        assert!((ev[4] - 1.0).abs() < 1e-15);
        assert!(ev.iter().all(|&l| (0.0..=2.0).contains(&l)));
        let odd = walk_eigenvalues(7).unwrap();
        assert!(odd.iter().all(|&l| l < 2.0));
        assert!(walk_eigenvalues(2).is_err());
    }

    #[test]
    fn alternating_starts_are_eigenvectors() {
        for n in [8usize, 64, 4096] {
            let alt = as_f64(&deterministic_initial(InitialConditionKind::Alt, n).unwrap().unwrap());
            let blt = as_f64(&deterministic_initial(InitialConditionKind::Blt, n).unwrap().unwrap());
            for &t in &[0.0, 0.3, 1.0, 2.5] {
                let pa = semigroup_apply(&alt, t, n).unwrap();
                let pb = semigroup_apply(&blt, t, n).unwrap();
                for i in 0..n {
                    assert!((pa[i] - (-2.0 * t).exp() * alt[i]).abs() < 1e-10);
                    assert!((pb[i] - (-t).exp() * blt[i]).abs() < 1e-10);
                }
            }
        }
        let ones = vec![1.0; 12];
        let p = semigroup_apply(&ones, 7.0, 12).unwrap();
        assert!(p.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn matches_direct_walk_kernel() {
        let x: Vec<f64> = (0..10).map(|i| ((i * 7 + 3) % 5) as f64 - 2.0).collect();
        for &t in &[0.1, 0.8, 3.0] {
            let spectral = semigroup_apply(&x, t, 10).unwrap();
            let direct = walk_kernel_apply(&x, t);
            for i in 0..10 {
                assert!((spectral[i] - direct[i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(semigroup_apply(&[1.0; 8], -0.1, 8).is_err());
        assert!(semigroup_apply(&[1.0; 8], 1.0, 6).is_err());
    }

    #[test]
    fn conditional_magnetization_fixtures() {
        let p = ModelParams::new(12, 0.3).unwrap();
        let th = p.theta();
        let plus = SpinConfig::plus(12);
        for v in conditional_magnetization(&plus, 1.5, &p).unwrap() {
            assert!((v - (-th * 1.5).exp()).abs() < 1e-12);
        }
        let alt = deterministic_initial(InitialConditionKind::Alt, 12).unwrap().unwrap();
        let m = conditional_magnetization(&alt, 0.7, &p).unwrap();
        for (i, v) in m.iter().enumerate() {
            let expect = (-(2.0 - th) * 0.7).exp() * f64::from(alt.spins()[i]);
            assert!((v - expect).abs() < 1e-12);
        }
        let m0 = conditional_magnetization(&alt, 0.0, &p).unwrap();
        assert_eq!(m0, as_f64(&alt));
    }

    #[test]
    fn l2_prediction_fixtures() {
        let p = ModelParams::new(16, 0.25).unwrap();
        let th = p.theta();
        let alt = deterministic_initial(InitialConditionKind::Alt, 16).unwrap().unwrap();
        let blt = deterministic_initial(InitialConditionKind::Blt, 16).unwrap().unwrap();
        for &t in &[0.0, 0.5, 2.0] {
            let a = autocorrelation_l2_prediction(&alt, t, &p).unwrap();
            assert!((a - 16.0 * (-(4.0 - 2.0 * th) * t).exp()).abs() < 1e-10);
            let b = autocorrelation_l2_prediction(&blt, t, &p).unwrap();
            assert!((b - 16.0 * (-2.0 * t).exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn mixing_constants() {
        let b0 = 0.5 * (1.0f64 / 3.0).atanh();
        let p0 = ModelParams::new(8, b0).unwrap();
        assert!((predicted_mixing_constant(InitialConditionKind::Alt, &p0) - 0.375).abs() < 1e-12);
        assert!(
            (predicted_mixing_constant(InitialConditionKind::UniformRandom, &p0) - 0.375).abs() < 1e-12
        );
        let p_inf = ModelParams::new(8, 0.0).unwrap();
        assert_eq!(predicted_mixing_constant(InitialConditionKind::Alt, &p_inf), 0.5);
        let b1 = 0.5 * 0.5f64.atanh();
        let p1 = ModelParams::new(8, b1).unwrap();
        assert!((predicted_mixing_constant(InitialConditionKind::Blt, &p1) - 0.5).abs() < 1e-12);
        assert!((predicted_mixing_constant(InitialConditionKind::Plus, &p1) - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn transform_round_trip_and_parseval(x in prop::collection::vec(-3.0f64..3.0, 3..40)) {
            let s = to_spectral(&x).unwrap();
            let back = from_spectral(&s);
            for (a, b) in x.iter().zip(&back) {
                prop_assert!((a - b).abs() < 1e-10);
            }
            let ratio = norm2(s.coefficients()) - norm2(&x);
            prop_assert!(ratio.abs() < 1e-9 * (1.0 + norm2(&x)));
        }

        #[test]
        fn semigroup_laws(x in prop::collection::vec(-1.0f64..1.0, 4..33), s in 0.0f64..3.0, t in 0.0f64..3.0) {
            let n = x.len();
            let direct = semigroup_apply(&x, s + t, n).unwrap();
            let composed = semigroup_apply(&semigroup_apply(&x, s, n).unwrap(), t, n).unwrap();
            for (a, b) in direct.iter().zip(&composed) {
                prop_assert!((a - b).abs() < 1e-9);
            }
            let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
            prop_assert!((mean(&direct) - mean(&x)).abs() < 1e-10);
            let ps = semigroup_apply(&x, s, n).unwrap();
            prop_assert!(norm2(&direct) <= norm2(&ps) + 1e-10);
            // every decay rate is at most 2
            prop_assert!(norm2(&direct) >= (-4.0 * (s + t)).exp() * norm2(&x) - 1e-10);
        }
    }
}
