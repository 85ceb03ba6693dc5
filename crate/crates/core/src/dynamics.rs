//! Event-driven continuous-time Glauber dynamics.
//!
//! The chain is a deterministic function of the start and an update
//! sequence `(time, site, neighbor, u)`. Two encodings read the same
//! sequence:
//!
//! * voter: if `u <= theta` the site is refreshed (`+1` iff `u <= theta/2`),
//!   otherwise it copies the chosen neighbour;
//! * heat-bath: the site becomes `+1` iff `u` falls below the Gibbs
//!   conditional probability of a plus spin.
//!
//! Both realise the same Markov chain under different couplings.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{invalid, Result};
use crate::model::{ModelParams, SpinConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateEvent {
    pub time: f64,
    pub site: u32,
    pub neighbor: u32,
    pub u: f64,
}

/// Time-ordered updates on `(0, horizon]`. Immutable once sampled.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateSequence {
    n: usize,
    horizon: f64,
    events: Vec<UpdateEvent>,
}

impl UpdateSequence {
    /// The sequence with no updates, for a zero-length window.
    pub fn empty(n: usize, horizon: f64) -> Self {
        Self { n, horizon, events: Vec::new() }
    }

    /// Builds a sequence from explicit events, validating every invariant.
    pub fn from_events(n: usize, horizon: f64, events: Vec<UpdateEvent>) -> Result<Self> {
        if !(horizon >= 0.0 && horizon.is_finite()) {
            return Err(invalid(format!("horizon must be finite and non-negative, got {horizon}")));
        }
        let mut last = 0.0;
        for e in &events {
            if !(e.time > last && e.time <= horizon) {
                return Err(invalid(format!("event time {} out of order or outside (0, {horizon}]", e.time)));
            }
            last = e.time;
            let (s, nb) = (e.site as usize, e.neighbor as usize);
            if s >= n || nb >= n || (nb != (s + 1) % n && nb != (s + n - 1) % n) {
                return Err(invalid(format!("neighbor {nb} is not adjacent to site {s} on a cycle of {n}")));
            }
            if !(0.0..1.0).contains(&e.u) {
                return Err(invalid(format!("uniform {} outside [0, 1)", e.u)));
            }
        }
        Ok(Self { n, horizon, events })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn events(&self) -> &[UpdateEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Events with time in `(s1, s2]`.
    pub fn window(&self, s1: f64, s2: f64) -> &[UpdateEvent] {
        let lo = self.events.partition_point(|e| e.time <= s1);
        let hi = self.events.partition_point(|e| e.time <= s2);
        &self.events[lo..hi.max(lo)]
    }

    fn check(&self, p: &ModelParams) -> Result<()> {
        if self.n != p.n() {
            return Err(invalid(format!(
                "update sequence is for n = {}, model has n = {}",
                self.n,
                p.n()
            )));
        }
        Ok(())
    }
}

pub fn sample_update_sequence<R: Rng + ?Sized>(
    p: &ModelParams,
    horizon: f64,
    rng: &mut R,
) -> Result<UpdateSequence> {
    let mut seq = UpdateSequence::empty(p.n(), horizon);
    resample_update_sequence(&mut seq, p, horizon, rng)?;
    Ok(seq)
}

/// As [`sample_update_sequence`], reusing the allocation of `seq`.
pub fn resample_update_sequence<R: Rng + ?Sized>(
    seq: &mut UpdateSequence,
    p: &ModelParams,
    horizon: f64,
    rng: &mut R,
) -> Result<()> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(invalid(format!("horizon must be positive and finite, got {horizon}")));
    }
    let n = p.n();
    let rate = n as f64;
    seq.n = n;
    seq.horizon = horizon;
    seq.events.clear();
    let mut t = 0.0;
    loop {
        let step: f64 = Exp1.sample(rng);
        let next = t + step / rate;
        if next == t {
            // increment below float resolution; redraw
            continue;
        }
        if next > horizon {
            break;
        }
        t = next;
        let draw: u64 = rng.random();
        let site = ((draw >> 1) % n as u64) as u32;
        let neighbor = if draw & 1 == 0 {
            (site + 1) % n as u32
        } else {
            (site + n as u32 - 1) % n as u32
        };
        seq.events.push(UpdateEvent { time: t, site, neighbor, u: rng.random() });
    }
    Ok(())
}

/// Voter-encoding update of one site in place.
#[inline]
pub(crate) fn voter_step(spins: &mut [i8], e: &UpdateEvent, theta: f64) {
    spins[e.site as usize] = if e.u <= theta {
        if e.u <= 0.5 * theta {
            1
        } else {
            -1
        }
    } else {
        spins[e.neighbor as usize]
    };
}

pub(crate) fn apply_voter(spins: &mut [i8], events: &[UpdateEvent], theta: f64) {
    for e in events {
        voter_step(spins, e, theta);
    }
}

pub fn evolve_voter(x0: &SpinConfig, seq: &UpdateSequence, p: &ModelParams) -> Result<SpinConfig> {
    seq.check(p)?;
    x0.check_len(p.n())?;
    let mut spins = x0.clone().into_inner();
    apply_voter(&mut spins, seq.events(), p.theta());
    SpinConfig::new(spins)
}

/// Gibbs conditional `P(+1 | neighbour sum s) = e^{beta s} / (e^{beta s} + e^{-beta s})`.
pub fn heat_bath_plus_probability(neighbor_sum: i32, p: &ModelParams) -> Result<f64> {
    if !matches!(neighbor_sum, -2 | 0 | 2) {
        return Err(invalid(format!("neighbour sum must be -2, 0 or 2, got {neighbor_sum}")));
    }
    Ok(plus_probability(neighbor_sum, p.beta()))
}

#[inline]
pub(crate) fn plus_probability(neighbor_sum: i32, beta: f64) -> f64 {
    1.0 / (1.0 + (-2.0 * beta * f64::from(neighbor_sum)).exp())
}

/// One-update plus probability under the voter encoding, marginalised over
/// the fair choice of neighbour: `theta/2 + (1 - theta) * (#plus neighbours)/2`.
pub fn voter_plus_probability(left: i8, right: i8, theta: f64) -> f64 {
    let plus_neighbors = f64::from(u8::from(left > 0) + u8::from(right > 0));
    0.5 * theta + (1.0 - theta) * 0.5 * plus_neighbors
}

pub(crate) fn apply_heat_bath(spins: &mut [i8], events: &[UpdateEvent], beta: f64) {
    let n = spins.len();
    let table = [
        plus_probability(-2, beta),
        plus_probability(0, beta),
        plus_probability(2, beta),
    ];
    for e in events {
        let s = e.site as usize;
        let sum = i32::from(spins[(s + n - 1) % n]) + i32::from(spins[(s + 1) % n]);
        let q = table[((sum + 2) / 2) as usize];
        spins[s] = if e.u < q { 1 } else { -1 };
    }
}

pub fn evolve_heat_bath(x0: &SpinConfig, seq: &UpdateSequence, p: &ModelParams) -> Result<SpinConfig> {
    seq.check(p)?;
    x0.check_len(p.n())?;
    let mut spins = x0.clone().into_inner();
    apply_heat_bath(&mut spins, seq.events(), p.beta());
    SpinConfig::new(spins)
}
