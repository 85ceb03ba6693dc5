//! Exact distribution evolution for small cycles.
//!
//! Configurations are indexed by bitmask (bit `i` set iff site `i` is
//! plus). The law at time `t` is obtained by uniformization at rate `n`:
//! `e^{Qt} = sum_k Poisson(k; n t) K^k` with `K = I + Q/n`, where `K`
//! picks a uniform site and resamples it from the heat-bath conditional.
//! `K` is applied matrix-free in `O(n 2^n)`.

use std::io::{Read, Write};

use crate::dynamics::plus_probability;
use crate::error::{invalid, Error, Result};
use crate::model::{gibbs_log_weight, ModelParams, SpinConfig};

/// Largest cycle the oracle will enumerate.
pub const N_MAX: usize = 14;
/// Default Poisson truncation mass.
pub const DEFAULT_TOL: f64 = 1e-12;
const DUMP_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionVector {
    n: usize,
    probs: Vec<f64>,
}

impl DistributionVector {
    pub fn new(n: usize, probs: Vec<f64>) -> Result<Self> {
        check_capacity(n)?;
        if probs.len() != 1 << n {
            return Err(invalid(format!("expected {} entries, got {}", 1usize << n, probs.len())));
        }
        if probs.iter().any(|&p| p.is_nan() || p < -1e-14) {
            return Err(invalid("probabilities must be non-negative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(invalid(format!("probabilities sum to {total}")));
        }
        Ok(Self { n, probs })
    }

    pub fn point_mass(x: &SpinConfig) -> Result<Self> {
        check_capacity(x.len())?;
        let mut probs = vec![0.0; 1 << x.len()];
        probs[x.to_mask() as usize] = 1.0;
        Ok(Self { n: x.len(), probs })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        check_capacity(n)?;
        Ok(Self { n, probs: vec![1.0 / (1u64 << n) as f64; 1 << n] })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, x: &SpinConfig) -> f64 {
        self.probs[x.to_mask() as usize]
    }

    /// `P(X(site) = +1)`.
    pub fn plus_marginal(&self, site: usize) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .filter(|(m, _)| m >> site & 1 == 1)
            .map(|(_, p)| p)
            .sum()
    }

    pub fn rotated(&self, by: usize) -> Self {
        let n = self.n;
        let mut probs = vec![0.0; self.probs.len()];
        for (m, &p) in self.probs.iter().enumerate() {
            let r = ((m << (by % n)) | (m >> ((n - by % n) % n))) & ((1 << n) - 1);
            probs[r] = p;
        }
        Self { n, probs }
    }

    pub fn flipped(&self) -> Self {
        let full = (1usize << self.n) - 1;
        let mut probs = vec![0.0; self.probs.len()];
        for (m, &p) in self.probs.iter().enumerate() {
            probs[m ^ full] = p;
        }
        Self { n: self.n, probs }
    }

    /// Mixture `sum_k w_k mu_k`.
    pub fn mixture(parts: &[(f64, DistributionVector)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| invalid("empty mixture"))?;
        let mut probs = vec![0.0; first.1.probs.len()];
        for (w, d) in parts {
            if d.n != first.1.n {
                return Err(invalid("mixture components differ in n"));
            }
            probs.iter_mut().zip(&d.probs).for_each(|(a, b)| *a += w * b);
        }
        Ok(Self { n: first.1.n, probs })
    }

    /// Binary snapshot: `n` (u32 LE), format version (u32 LE), then `2^n`
    /// little-endian f64 values.
    pub fn write_to<W: Write>(&self, out: &mut W) -> Result<()> {
        out.write_all(&(self.n as u32).to_le_bytes())?;
        out.write_all(&DUMP_VERSION.to_le_bytes())?;
        for p in &self.probs {
            out.write_all(&p.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(input: &mut R) -> Result<Self> {
        let mut word = [0u8; 4];
        input.read_exact(&mut word)?;
        let n = u32::from_le_bytes(word) as usize;
        input.read_exact(&mut word)?;
        let version = u32::from_le_bytes(word);
        if version != DUMP_VERSION {
            return Err(invalid(format!("unsupported distribution dump version {version}")));
        }
        check_capacity(n)?;
        let mut probs = Vec::with_capacity(1 << n);
        let mut buf = [0u8; 8];
        for _ in 0..1usize << n {
            input.read_exact(&mut buf)?;
            probs.push(f64::from_le_bytes(buf));
        }
        Self::new(n, probs)
    }
}

fn check_capacity(n: usize) -> Result<()> {
    if n > N_MAX {
        return Err(Error::Capacity { n, max: N_MAX });
    }
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    Ok(())
}

pub fn stationary_vector(p: &ModelParams) -> Result<DistributionVector> {
    let n = p.n();
    check_capacity(n)?;
    let logw: Vec<f64> = (0..1u64 << n)
        .map(|m| gibbs_log_weight(&SpinConfig::from_mask(m, n), p))
        .collect::<Result<_>>()?;
    let max = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = logw.iter().map(|w| (w - max).exp()).collect();
    let z: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|q| *q /= z);
    Ok(DistributionVector { n, probs })
}

/// One step of the uniformized heat-bath kernel applied to a row vector.
pub struct UniformizedKernel {
    n: usize,
    /// `flip[m * n + i]`: probability that a heat-bath update at site `i`
    /// changes configuration `m`.
    flip: Vec<f64>,
}

impl UniformizedKernel {
    pub fn new(p: &ModelParams) -> Result<Self> {
        let n = p.n();
        check_capacity(n)?;
        let plus = [
            plus_probability(-2, p.beta()),
            plus_probability(0, p.beta()),
            plus_probability(2, p.beta()),
        ];
        let mut flip = Vec::with_capacity(n << n);
        for m in 0..1usize << n {
            for i in 0..n {
                let spin = |k: usize| if m >> k & 1 == 1 { 1i32 } else { -1 };
                let sum = spin((i + n - 1) % n) + spin((i + 1) % n);
                let q = plus[((sum + 2) / 2) as usize];
                flip.push(if spin(i) > 0 { 1.0 - q } else { q });
            }
        }
        Ok(Self { n, flip })
    }

    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        let n = self.n;
        let rate = 1.0 / n as f64;
        out.iter_mut().for_each(|o| *o = 0.0);
        for (m, &mass) in v.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            let row = &self.flip[m * n..(m + 1) * n];
            let mut stay = 1.0;
            for (i, &f) in row.iter().enumerate() {
                let moved = f * rate;
                out[m ^ (1 << i)] += mass * moved;
                stay -= moved;
            }
            out[m] += mass * stay;
        }
    }
}

pub fn evolve_distribution(
    x0: &SpinConfig,
    t: f64,
    p: &ModelParams,
    tol: f64,
) -> Result<DistributionVector> {
    x0.check_len(p.n())?;
    evolve_from(&DistributionVector::point_mass(x0)?, t, p, tol)
}

/// `mu e^{Qt}` for an arbitrary initial law `mu`.
pub fn evolve_from(
    initial: &DistributionVector,
    t: f64,
    p: &ModelParams,
    tol: f64,
) -> Result<DistributionVector> {
    let kernel = UniformizedKernel::new(p)?;
    evolve_with(&kernel, initial, t, tol)
}

fn evolve_with(
    kernel: &UniformizedKernel,
    initial: &DistributionVector,
    t: f64,
    tol: f64,
) -> Result<DistributionVector> {
    if initial.n != kernel.n {
        return Err(invalid("initial law and kernel differ in n"));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid(format!("time must be finite and non-negative, got {t}")));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(invalid(format!("tolerance must lie in (0, 1), got {tol}")));
    }
    if t == 0.0 {
        return Ok(initial.clone());
    }
    let mean = kernel.n as f64 * t;
    let ln_mean = mean.ln();
    let mut cur = initial.probs.clone();
    let mut next = vec![0.0; cur.len()];
    let mut acc = vec![0.0; cur.len()];
    let mut log_w = -mean;
    let mut covered = 0.0;
    let mut k = 0usize;
    loop {
        let w = log_w.exp();
        if w > 0.0 {
            acc.iter_mut().zip(&cur).for_each(|(a, c)| *a += w * c);
            covered += w;
        }
        if 1.0 - covered < tol && k as f64 >= mean {
            break;
        }
        k += 1;
        log_w += ln_mean - (k as f64).ln();
        kernel.apply(&cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
        if k > 10 * (mean as usize + 100) {
            return Err(Error::Computation(format!(
                "uniformization failed to reach tolerance {tol} (covered {covered})"
            )));
        }
    }
    // redistribute the truncated tail so the result is a probability vector
    acc.iter_mut().for_each(|a| *a /= covered);
    Ok(DistributionVector { n: initial.n, probs: acc })
}

pub fn total_variation(a: &DistributionVector, b: &DistributionVector) -> Result<f64> {
    if a.n != b.n {
        return Err(invalid(format!("distributions over n = {} and n = {}", a.n, b.n)));
    }
    let l1: f64 = a.probs.iter().zip(&b.probs).map(|(x, y)| (x - y).abs()).sum();
    Ok((0.5 * l1).clamp(0.0, 1.0))
}

/// `TV(P_{mu}(X_t), pi)` evaluated on a grid of times, reusing one kernel.
pub fn tv_curve(
    initial: &DistributionVector,
    times: &[f64],
    p: &ModelParams,
    tol: f64,
) -> Result<Vec<f64>> {
    let kernel = UniformizedKernel::new(p)?;
    let pi = stationary_vector(p)?;
    times
        .iter()
        .map(|&t| total_variation(&evolve_with(&kernel, initial, t, tol)?, &pi))
        .collect()
}

pub fn exact_mixing_time(x0: &SpinConfig, eps: f64, p: &ModelParams, tol: f64) -> Result<f64> {
    x0.check_len(p.n())?;
    exact_mixing_time_from(&DistributionVector::point_mass(x0)?, eps, p, tol)
}

/// Mixing-time resolution of the bisection.
pub const MIXING_TIME_RESOLUTION: f64 = 1e-3;

/// Smallest `t` (to within [`MIXING_TIME_RESOLUTION`]) with
/// `TV(mu e^{Qt}, pi) <= eps`.
///
/// The bisection checks that the distance is non-increasing along every
/// probe and fails if it is not.
pub fn exact_mixing_time_from(
    initial: &DistributionVector,
    eps: f64,
    p: &ModelParams,
    tol: f64,
) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    let kernel = UniformizedKernel::new(p)?;
    let pi = stationary_vector(p)?;
    let tv = |t: f64| -> Result<f64> { total_variation(&evolve_with(&kernel, initial, t, tol)?, &pi) };

    let tv0 = tv(0.0)?;
    if tv0 <= eps {
        return Ok(0.0);
    }
    let (mut lo, mut tv_lo) = (0.0, tv0);
    let mut hi = 1.0;
    let mut tv_hi = tv(hi)?;
    while tv_hi > eps {
        if tv_hi > tv_lo + 1e-12 {
            return Err(non_monotone(lo, tv_lo, hi, tv_hi));
        }
        (lo, tv_lo) = (hi, tv_hi);
        hi *= 2.0;
        if hi > 1e4 {
            return Err(Error::Computation(format!(
                "no bracket found: TV({lo}) = {tv_lo} still above eps = {eps}"
            )));
        }
        tv_hi = tv(hi)?;
    }
    while hi - lo > MIXING_TIME_RESOLUTION {
        let mid = 0.5 * (lo + hi);
        let tv_mid = tv(mid)?;
        if tv_mid > tv_lo + 1e-12 || tv_mid + 1e-12 < tv_hi {
            return Err(non_monotone(lo, tv_lo, mid, tv_mid));
        }
        if tv_mid > eps {
            (lo, tv_lo) = (mid, tv_mid);
        } else {
            (hi, tv_hi) = (mid, tv_mid);
        }
    }
    Ok(hi)
}

fn non_monotone(t1: f64, tv1: f64, t2: f64, tv2: f64) -> Error {
    Error::Computation(format!(
        "TV to stationarity is not monotone: TV({t1}) = {tv1}, TV({t2}) = {tv2}"
    ))
}
