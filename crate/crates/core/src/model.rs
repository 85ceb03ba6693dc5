//! Model parameters, initial conditions and the exact Gibbs measure on the
//! cycle `Z/nZ`.
//!
//! Sites are 0-based throughout the crate. The Gibbs measure is
//! `pi(x) ∝ exp(beta * sum_i x(i) x(i+1 mod n))`, handled through its 2x2
//! transfer matrix with eigenvalues `2 cosh(beta)` and `2 sinh(beta)`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// `1 - tanh(2 beta)`: the probability that an update ignores the
/// neighbourhood, and the kill rate of backward histories.
pub fn theta_of_beta(beta: f64) -> Result<f64> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(invalid(format!("beta must be finite and non-negative, got {beta}")));
    }
    Ok(1.0 - (2.0 * beta).tanh())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    n: usize,
    beta: f64,
    theta: f64,
}

impl ModelParams {
    /// `n` must be even and at least 4.
    pub fn new(n: usize, beta: f64) -> Result<Self> {
        let theta = theta_of_beta(beta)?;
        if n < 4 || !n.is_multiple_of(2) {
            return Err(invalid(format!("cycle length must be even and >= 4, got {n}")));
        }
        if n > u32::MAX as usize {
            return Err(invalid(format!("cycle length {n} does not fit in 32 bits")));
        }
        Ok(Self { n, beta, theta })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Errors unless `n` is a multiple of 4 (needed by the bi-alternating
    /// start and the Hamiltonian statistic).
    pub fn require_multiple_of_four(&self) -> Result<()> {
        if !self.n.is_multiple_of(4) {
            return Err(invalid(format!("n must be a multiple of 4, got {}", self.n)));
        }
        Ok(())
    }
}

/// A ±1 assignment to the sites of the cycle.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfig(Vec<i8>);

impl SpinConfig {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if spins.is_empty() {
            return Err(invalid("configuration must be non-empty"));
        }
        if let Some(bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(invalid(format!("spins must be ±1, found {bad}")));
        }
        Ok(Self(spins))
    }

    pub fn plus(n: usize) -> Self {
        Self(vec![1; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<i8> {
        self.0
    }

    /// Bit `i` is set iff site `i` carries a plus spin.
    pub fn to_mask(&self) -> u64 {
        assert!(self.len() <= 64, "mask encoding needs n <= 64");
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > 0)
            .fold(0u64, |m, (i, _)| m | (1 << i))
    }

    pub fn from_mask(mask: u64, n: usize) -> Self {
        assert!(n <= 64, "mask encoding needs n <= 64");
        Self((0..n).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect())
    }

    pub fn rotated(&self, by: usize) -> Self {
        let n = self.len();
        Self((0..n).map(|i| self.0[(i + n - by % n) % n]).collect())
    }

    pub fn flipped(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(invalid(format!(
                "configuration has {} sites, model has {n}",
                self.len()
            )));
        }
        Ok(())
    }
}

impl AsRef<[i8]> for SpinConfig {
    fn as_ref(&self) -> &[i8] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialConditionKind {
    /// `+1` on even sites, `-1` on odd sites.
    Alt,
    /// `+1` on sites `≡ 0, 3 (mod 4)`, `-1` on sites `≡ 1, 2 (mod 4)`.
    Blt,
    Plus,
    /// I.i.d. fair signs. Drawn afresh per replica this is the annealed start.
    UniformRandom,
}

impl InitialConditionKind {
    pub const ALL: [InitialConditionKind; 4] = [Self::Alt, Self::Blt, Self::Plus, Self::UniformRandom];

    pub fn is_deterministic(self) -> bool {
        self != Self::UniformRandom
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Alt => "alt",
            Self::Blt => "blt",
            Self::Plus => "plus",
            Self::UniformRandom => "annealed",
        }
    }
}

impl fmt::Display for InitialConditionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InitialConditionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "alt" => Ok(Self::Alt),
            "blt" => Ok(Self::Blt),
            "plus" => Ok(Self::Plus),
            "annealed" | "uniform" | "uniform_random" | "random" => Ok(Self::UniformRandom),
            other => Err(invalid(format!("unknown initial condition {other:?}"))),
        }
    }
}

/// Deterministic starts only; `None` for the random start.
pub fn deterministic_initial(kind: InitialConditionKind, n: usize) -> Result<Option<SpinConfig>> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(invalid(format!("n must be even and positive, got {n}")));
    }
    let spins = match kind {
        InitialConditionKind::Alt => (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect(),
        InitialConditionKind::Blt => {
            if !n.is_multiple_of(4) {
                return Err(invalid(format!(
                    "bi-alternating start needs n divisible by 4, got {n}"
                )));
            }
            (0..n)
                .map(|i| if matches!(i % 4, 0 | 3) { 1 } else { -1 })
                .collect()
        }
        InitialConditionKind::Plus => vec![1; n],
        InitialConditionKind::UniformRandom => return Ok(None),
    };
    Ok(Some(SpinConfig(spins)))
}

pub fn make_initial<R: Rng + ?Sized>(
    kind: InitialConditionKind,
    n: usize,
    rng: &mut R,
) -> Result<SpinConfig> {
    match deterministic_initial(kind, n)? {
        Some(x) => Ok(x),
        None => Ok(SpinConfig(
            (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect(),
        )),
    }
}

/// Unnormalised log-probability `beta * sum_i x(i) x(i+1)`.
pub fn gibbs_log_weight(x: &SpinConfig, p: &ModelParams) -> Result<f64> {
    x.check_len(p.n())?;
    Ok(p.beta() * f64::from(edge_sum(x.spins())))
}

pub(crate) fn edge_sum(spins: &[i8]) -> i32 {
    let n = spins.len();
    (0..n)
        .map(|i| i32::from(spins[i]) * i32::from(spins[(i + 1) % n]))
        .sum()
}

/// `log Z = log((2 cosh b)^n + (2 sinh b)^n)`, evaluated without overflow.
pub fn partition_function(p: &ModelParams) -> f64 {
    let n = p.n() as f64;
    let t = p.beta().tanh();
    n * (2.0 * p.beta().cosh()).ln() + t.powf(n).ln_1p()
}

/// `E_pi[Y(i) Y(i+d)] = (t^d + t^(n-d)) / (1 + t^n)` with `t = tanh(beta)`.
pub fn pair_correlation(p: &ModelParams, d: usize) -> Result<f64> {
    let n = p.n();
    if d == 0 || d >= n {
        return Err(invalid(format!("distance must lie in 1..{n}, got {d}")));
    }
    let t = p.beta().tanh();
    Ok((t.powi(d as i32) + t.powi((n - d) as i32)) / (1.0 + t.powi(n as i32)))
}

/// Exact sample from the Gibbs measure.
///
/// Site 0 is fair by spin-flip symmetry. Given site 0 the rest of the ring is
/// a Markov chain whose conditionals carry the transfer-matrix weight of the
/// edges still to close: `P(x_i = s | x_{i-1} = a, x_0 = b) ∝
/// exp(beta a s) (1 + s b t^(n-i))`.
pub fn sample_gibbs<R: Rng + ?Sized>(p: &ModelParams, rng: &mut R) -> SpinConfig {
    let mut spins = Vec::with_capacity(p.n());
    sample_gibbs_into(p, rng, &mut spins);
    SpinConfig(spins)
}

pub(crate) fn sample_gibbs_into<R: Rng + ?Sized>(p: &ModelParams, rng: &mut R, spins: &mut Vec<i8>) {
    let n = p.n();
    let t = p.beta().tanh();
    // exp(-2 beta): relative weight of disagreeing with the left neighbour
    let disagree = (-2.0 * p.beta()).exp();
    spins.clear();
    let first: i8 = if rng.random::<bool>() { 1 } else { -1 };
    spins.push(first);
    let b = f64::from(first);
    let mut prev = first;
    for i in 1..n {
        let tail = t.powi((n - i) as i32);
        let same = 1.0 + f64::from(prev) * b * tail;
        let other = disagree * (1.0 - f64::from(prev) * b * tail);
        let keep = same / (same + other);
        let s = if rng.random::<f64>() < keep { prev } else { -prev };
        spins.push(s);
        prev = s;
    }
}
